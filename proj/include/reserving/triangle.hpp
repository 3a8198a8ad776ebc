#pragma once

// Run-off triangles of incremental paid losses.
//
// Rows are accident years in ascending order, addressed by 0-based position.
// Development years are addressed 1..n, as actuaries write them. Within a
// row the observed cells always form a prefix, so a row is stored as the
// vector of its observed incremental amounts.

#include "reserving/errors.hpp"

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace reserving {

enum class TriangleErrorKind {
    Parse,
    NonPositivePremium,
    NonPositiveLoss,
    NonStaircase,
    EmptyRow,
    EmptySelection,
    UnobservedCell,
};

const char* to_string(TriangleErrorKind kind);

class TriangleError : public InputError {
public:
    TriangleError(TriangleErrorKind kind, const std::string& what);
    TriangleErrorKind kind() const noexcept { return kind_; }

private:
    TriangleErrorKind kind_;
};

class RunOffTriangle {
public:
    /// Validates every invariant; throws TriangleError.
    RunOffTriangle(std::vector<int> accident_years, std::vector<double> premiums,
                   std::vector<std::vector<double>> losses, std::size_t n_dev);

    std::size_t m() const noexcept { return years_.size(); }
    std::size_t n() const noexcept { return n_; }

    int accident_year(std::size_t row) const { return years_.at(row); }
    const std::vector<int>& accident_years() const noexcept { return years_; }
    double premium(std::size_t row) const { return premiums_.at(row); }
    const std::vector<double>& premiums() const noexcept { return premiums_; }

    /// Observed incremental losses of a row (a prefix of length observed(row)).
    std::span<const double> row(std::size_t row) const { return losses_.at(row); }
    std::size_t observed(std::size_t row) const { return losses_.at(row).size(); }
    bool is_observed(std::size_t row, std::size_t dev) const;

    /// Row with all n development years present.
    bool is_complete(std::size_t row) const { return observed(row) == n_; }
    /// Complete row in the historical block i <= m - n (1-based i).
    bool is_fully_developed_history(std::size_t row) const;

private:
    std::vector<int> years_;
    std::vector<double> premiums_;
    std::vector<std::vector<double>> losses_;
    std::size_t n_;
};

/// Incremental loss ratios Y_ij = X_ij / E_i with the same observed pattern.
class LossRatioTriangle {
public:
    /// Rows must be nonempty prefixes of strictly positive finite ratios.
    LossRatioTriangle(std::vector<int> accident_years, std::vector<std::vector<double>> ratios,
                      std::size_t n_dev);

    std::size_t m() const noexcept { return years_.size(); }
    std::size_t n() const noexcept { return n_; }
    int accident_year(std::size_t row) const { return years_.at(row); }
    const std::vector<int>& accident_years() const noexcept { return years_; }

    std::span<const double> row(std::size_t row) const { return ratios_.at(row); }
    std::size_t observed(std::size_t row) const { return ratios_.at(row).size(); }
    bool is_complete(std::size_t row) const { return observed(row) == n_; }
    bool is_fully_developed_history(std::size_t row) const;

    /// Sum of all observed cells of a row, S_{i,1:k_i}.
    double observed_cumulative(std::size_t row) const;

private:
    std::vector<int> years_;
    std::vector<std::vector<double>> ratios_;
    std::size_t n_;
};

/// Parses the wide CSV `accident_year,premium,dev_1,...,dev_n`.
RunOffTriangle parse_triangle(const std::string& text);
RunOffTriangle load_triangle(const std::filesystem::path& path);

/// Renders a triangle back to the wide CSV format.
std::string format_triangle(const RunOffTriangle& t);

LossRatioTriangle to_loss_ratios(const RunOffTriangle& t);

/// S_{i,k:k2}, the sum of Y_{i,k..k2} for 1 <= k <= k2 <= n.
double cumulative(const LossRatioTriangle& t, std::size_t row, std::size_t k, std::size_t k2);

/// Rows with accident_year >= first_accident_year.
RunOffTriangle restrict_years(const RunOffTriangle& t, int first_accident_year);
LossRatioTriangle restrict_years(const LossRatioTriangle& t, int first_accident_year);

/// The most recent `count` accident years.
RunOffTriangle most_recent(const RunOffTriangle& t, std::size_t count);

/// Hold-out cells of a lower triangle: the same wide CSV layout, but any
/// subset of development cells may be present.
struct HoldoutRow {
    int accident_year = 0;
    double premium = 0.0;
    std::vector<double> cells;  // length n; NaN where absent
};

std::vector<HoldoutRow> load_holdout(const std::filesystem::path& path);
std::vector<HoldoutRow> parse_holdout(const std::string& text);
/// Wide CSV with empty fields for absent cells.
std::string format_holdout(std::span<const HoldoutRow> rows, std::size_t n_dev);

/// Realized cumulative loss ratio at development year n for every row of the
/// training triangle, combining observed cells with the hold-out cells.
/// Every cell missing from training must be present in the hold-out.
std::vector<double> realized_ultimate_ratios(const RunOffTriangle& training,
                                             std::span<const HoldoutRow> holdout);

}  // namespace reserving
