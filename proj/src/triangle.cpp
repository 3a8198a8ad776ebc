#include "reserving/triangle.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <string_view>

namespace reserving {

const char* to_string(TriangleErrorKind kind) {
    switch (kind) {
        case TriangleErrorKind::Parse: return "parse";
        case TriangleErrorKind::NonPositivePremium: return "nonpositive-premium";
        case TriangleErrorKind::NonPositiveLoss: return "nonpositive-loss";
        case TriangleErrorKind::NonStaircase: return "non-staircase";
        case TriangleErrorKind::EmptyRow: return "empty-row";
        case TriangleErrorKind::EmptySelection: return "empty-selection";
        case TriangleErrorKind::UnobservedCell: return "unobserved-cell";
    }
    return "unknown";
}

TriangleError::TriangleError(TriangleErrorKind kind, const std::string& what)
    : InputError(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

namespace {

void check_shape(std::size_t m, std::size_t rows, std::size_t n) {
    if (m != rows) {
        throw TriangleError(TriangleErrorKind::Parse, "accident years and rows differ in length");
    }
    if (n == 0) throw TriangleError(TriangleErrorKind::Parse, "no development years");
}

void check_years(const std::vector<int>& years) {
    if (years.empty()) throw TriangleError(TriangleErrorKind::EmptySelection, "triangle has no rows");
    for (std::size_t i = 1; i < years.size(); ++i) {
        if (years[i] <= years[i - 1]) {
            throw TriangleError(TriangleErrorKind::Parse,
                                "accident years must be strictly ascending (year " +
                                    std::to_string(years[i]) + ")");
        }
    }
}

void check_row(const std::vector<double>& row, std::size_t n, int year, TriangleErrorKind bad) {
    if (row.empty()) {
        throw TriangleError(TriangleErrorKind::EmptyRow,
                            "accident year " + std::to_string(year) + " has no observed losses");
    }
    if (row.size() > n) {
        throw TriangleError(TriangleErrorKind::Parse,
                            "accident year " + std::to_string(year) + " has more than n cells");
    }
    for (std::size_t j = 0; j < row.size(); ++j) {
        if (!(row[j] > 0.0) || !std::isfinite(row[j])) {
            throw TriangleError(bad, "accident year " + std::to_string(year) +
                                         ", development year " + std::to_string(j + 1));
        }
    }
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    for (auto& f : out) {
        while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
        while (!f.empty() && (f.back() == ' ' || f.back() == '\t')) f.remove_suffix(1);
    }
    return out;
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto pos = text.find('\n', start);
        auto line = text.substr(start, pos == std::string_view::npos ? std::string_view::npos
                                                                     : pos - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    return lines;
}

double parse_number(std::string_view field, std::size_t line_no) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw TriangleError(TriangleErrorKind::Parse, "line " + std::to_string(line_no) +
                                                          ": not a number: '" +
                                                          std::string(field) + "'");
    }
    return value;
}

int parse_year(std::string_view field, std::size_t line_no) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw TriangleError(TriangleErrorKind::Parse, "line " + std::to_string(line_no) +
                                                          ": bad accident year '" +
                                                          std::string(field) + "'");
    }
    return value;
}

struct RawRow {
    int year;
    double premium;
    std::vector<double> cells;  // NaN for blank
};

struct RawTable {
    std::size_t n = 0;
    std::vector<RawRow> rows;
};

RawTable parse_wide_csv(const std::string& text) {
    auto lines = split_lines(text);
    if (lines.empty()) throw TriangleError(TriangleErrorKind::Parse, "empty file");
    if (text.find('"') != std::string::npos) {
        throw TriangleError(TriangleErrorKind::Parse, "quoted fields are not supported");
    }
    auto header = split_fields(lines[0]);
    if (header.size() < 3 || header[0] != "accident_year" || header[1] != "premium") {
        throw TriangleError(TriangleErrorKind::Parse,
                            "header must be accident_year,premium,dev_1,...,dev_n");
    }
    RawTable table;
    table.n = header.size() - 2;
    for (std::size_t j = 0; j < table.n; ++j) {
        if (header[j + 2] != "dev_" + std::to_string(j + 1)) {
            throw TriangleError(TriangleErrorKind::Parse,
                                "header column " + std::to_string(j + 3) + " must be dev_" +
                                    std::to_string(j + 1));
        }
    }
    for (std::size_t li = 1; li < lines.size(); ++li) {
        auto fields = split_fields(lines[li]);
        if (fields.size() != table.n + 2) {
            throw TriangleError(TriangleErrorKind::Parse,
                                "line " + std::to_string(li + 1) + ": expected " +
                                    std::to_string(table.n + 2) + " fields, found " +
                                    std::to_string(fields.size()));
        }
        RawRow row;
        row.year = parse_year(fields[0], li + 1);
        if (fields[1].empty()) {
            throw TriangleError(TriangleErrorKind::Parse,
                                "line " + std::to_string(li + 1) + ": missing premium");
        }
        row.premium = parse_number(fields[1], li + 1);
        if (!(row.premium > 0.0) || !std::isfinite(row.premium)) {
            throw TriangleError(TriangleErrorKind::NonPositivePremium,
                                "accident year " + std::to_string(row.year));
        }
        for (std::size_t j = 0; j < table.n; ++j) {
            auto f = fields[j + 2];
            row.cells.push_back(f.empty() ? std::numeric_limits<double>::quiet_NaN()
                                          : parse_number(f, li + 1));
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string format_number(double x) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, ptr);
}

}  // namespace

RunOffTriangle::RunOffTriangle(std::vector<int> accident_years, std::vector<double> premiums,
                               std::vector<std::vector<double>> losses, std::size_t n_dev)
    : years_(std::move(accident_years)),
      premiums_(std::move(premiums)),
      losses_(std::move(losses)),
      n_(n_dev) {
    check_shape(years_.size(), losses_.size(), n_);
    if (premiums_.size() != years_.size()) {
        throw TriangleError(TriangleErrorKind::Parse, "premiums and rows differ in length");
    }
    check_years(years_);
    for (std::size_t i = 0; i < years_.size(); ++i) {
        if (!(premiums_[i] > 0.0) || !std::isfinite(premiums_[i])) {
            throw TriangleError(TriangleErrorKind::NonPositivePremium,
                                "accident year " + std::to_string(years_[i]));
        }
        check_row(losses_[i], n_, years_[i], TriangleErrorKind::NonPositiveLoss);
    }
}

bool RunOffTriangle::is_observed(std::size_t row, std::size_t dev) const {
    return dev >= 1 && dev <= observed(row);
}

bool RunOffTriangle::is_fully_developed_history(std::size_t row) const {
    return is_complete(row) && m() > n_ && row + 1 <= m() - n_;
}

LossRatioTriangle::LossRatioTriangle(std::vector<int> accident_years,
                                     std::vector<std::vector<double>> ratios, std::size_t n_dev)
    : years_(std::move(accident_years)), ratios_(std::move(ratios)), n_(n_dev) {
    check_shape(years_.size(), ratios_.size(), n_);
    check_years(years_);
    for (std::size_t i = 0; i < years_.size(); ++i) {
        check_row(ratios_[i], n_, years_[i], TriangleErrorKind::NonPositiveLoss);
    }
}

bool LossRatioTriangle::is_fully_developed_history(std::size_t row) const {
    return is_complete(row) && m() > n_ && row + 1 <= m() - n_;
}

double LossRatioTriangle::observed_cumulative(std::size_t row) const {
    auto r = this->row(row);
    return std::accumulate(r.begin(), r.end(), 0.0);
}

RunOffTriangle parse_triangle(const std::string& text) {
    auto table = parse_wide_csv(text);
    std::vector<int> years;
    std::vector<double> premiums;
    std::vector<std::vector<double>> losses;
    for (const auto& row : table.rows) {
        std::vector<double> prefix;
        bool gap = false;
        for (std::size_t j = 0; j < table.n; ++j) {
            double v = row.cells[j];
            if (std::isnan(v)) {
                gap = true;
                continue;
            }
            if (gap) {
                throw TriangleError(TriangleErrorKind::NonStaircase,
                                    "accident year " + std::to_string(row.year) +
                                        ": observed cell after a blank at development year " +
                                        std::to_string(j + 1));
            }
            if (!(v > 0.0)) {
                throw TriangleError(TriangleErrorKind::NonPositiveLoss,
                                    "accident year " + std::to_string(row.year) +
                                        ", development year " + std::to_string(j + 1));
            }
            prefix.push_back(v);
        }
        years.push_back(row.year);
        premiums.push_back(row.premium);
        losses.push_back(std::move(prefix));
    }
    return RunOffTriangle(std::move(years), std::move(premiums), std::move(losses), table.n);
}

RunOffTriangle load_triangle(const std::filesystem::path& path) {
    return parse_triangle(read_file(path));
}

std::string format_triangle(const RunOffTriangle& t) {
    std::string out = "accident_year,premium";
    for (std::size_t j = 1; j <= t.n(); ++j) out += ",dev_" + std::to_string(j);
    out += '\n';
    for (std::size_t i = 0; i < t.m(); ++i) {
        out += std::to_string(t.accident_year(i)) + "," + format_number(t.premium(i));
        auto r = t.row(i);
        for (std::size_t j = 0; j < t.n(); ++j) {
            out += ',';
            if (j < r.size()) out += format_number(r[j]);
        }
        out += '\n';
    }
    return out;
}

LossRatioTriangle to_loss_ratios(const RunOffTriangle& t) {
    std::vector<std::vector<double>> ratios(t.m());
    for (std::size_t i = 0; i < t.m(); ++i) {
        for (double x : t.row(i)) ratios[i].push_back(x / t.premium(i));
    }
    return LossRatioTriangle(t.accident_years(), std::move(ratios), t.n());
}

double cumulative(const LossRatioTriangle& t, std::size_t row, std::size_t k, std::size_t k2) {
    if (row >= t.m()) throw std::out_of_range("cumulative: row out of range");
    if (k < 1 || k > k2 || k2 > t.n()) throw std::out_of_range("cumulative: need 1 <= k <= k2 <= n");
    if (k2 > t.observed(row)) {
        throw TriangleError(TriangleErrorKind::UnobservedCell,
                            "accident year " + std::to_string(t.accident_year(row)) +
                                ", development year " + std::to_string(k2));
    }
    auto r = t.row(row);
    return std::accumulate(r.begin() + static_cast<std::ptrdiff_t>(k - 1),
                           r.begin() + static_cast<std::ptrdiff_t>(k2), 0.0);
}

RunOffTriangle restrict_years(const RunOffTriangle& t, int first_accident_year) {
    std::vector<int> years;
    std::vector<double> premiums;
    std::vector<std::vector<double>> losses;
    for (std::size_t i = 0; i < t.m(); ++i) {
        if (t.accident_year(i) < first_accident_year) continue;
        years.push_back(t.accident_year(i));
        premiums.push_back(t.premium(i));
        auto r = t.row(i);
        losses.emplace_back(r.begin(), r.end());
    }
    if (years.empty()) {
        throw TriangleError(TriangleErrorKind::EmptySelection,
                            "no accident years from " + std::to_string(first_accident_year));
    }
    return RunOffTriangle(std::move(years), std::move(premiums), std::move(losses), t.n());
}

LossRatioTriangle restrict_years(const LossRatioTriangle& t, int first_accident_year) {
    std::vector<int> years;
    std::vector<std::vector<double>> ratios;
    for (std::size_t i = 0; i < t.m(); ++i) {
        if (t.accident_year(i) < first_accident_year) continue;
        years.push_back(t.accident_year(i));
        auto r = t.row(i);
        ratios.emplace_back(r.begin(), r.end());
    }
    if (years.empty()) {
        throw TriangleError(TriangleErrorKind::EmptySelection,
                            "no accident years from " + std::to_string(first_accident_year));
    }
    return LossRatioTriangle(std::move(years), std::move(ratios), t.n());
}

RunOffTriangle most_recent(const RunOffTriangle& t, std::size_t count) {
    if (count == 0) throw TriangleError(TriangleErrorKind::EmptySelection, "zero accident years");
    if (count >= t.m()) return t;
    return restrict_years(t, t.accident_year(t.m() - count));
}

std::vector<HoldoutRow> parse_holdout(const std::string& text) {
    auto table = parse_wide_csv(text);
    std::vector<HoldoutRow> out;
    for (auto& row : table.rows) {
        for (std::size_t j = 0; j < row.cells.size(); ++j) {
            double v = row.cells[j];
            if (!std::isnan(v) && !(v >= 0.0)) {
                throw TriangleError(TriangleErrorKind::NonPositiveLoss,
                                    "hold-out accident year " + std::to_string(row.year) +
                                        ", development year " + std::to_string(j + 1));
            }
        }
        out.push_back({row.year, row.premium, std::move(row.cells)});
    }
    return out;
}

std::string format_holdout(std::span<const HoldoutRow> rows, std::size_t n_dev) {
    std::string out = "accident_year,premium";
    for (std::size_t j = 1; j <= n_dev; ++j) out += ",dev_" + std::to_string(j);
    out += '\n';
    for (const auto& r : rows) {
        out += std::to_string(r.accident_year) + "," + format_number(r.premium);
        for (std::size_t j = 0; j < n_dev; ++j) {
            out += ',';
            if (j < r.cells.size() && !std::isnan(r.cells[j])) out += format_number(r.cells[j]);
        }
        out += '\n';
    }
    return out;
}

std::vector<HoldoutRow> load_holdout(const std::filesystem::path& path) {
    return parse_holdout(read_file(path));
}

std::vector<double> realized_ultimate_ratios(const RunOffTriangle& training,
                                             std::span<const HoldoutRow> holdout) {
    std::vector<double> out;
    for (std::size_t i = 0; i < training.m(); ++i) {
        int year = training.accident_year(i);
        auto r = training.row(i);
        double total = std::accumulate(r.begin(), r.end(), 0.0);
        if (!training.is_complete(i)) {
            auto it = std::find_if(holdout.begin(), holdout.end(),
                                   [&](const HoldoutRow& h) { return h.accident_year == year; });
            if (it == holdout.end()) {
                throw TriangleError(TriangleErrorKind::UnobservedCell,
                                    "hold-out lacks accident year " + std::to_string(year));
            }
            if (it->cells.size() != training.n()) {
                throw TriangleError(TriangleErrorKind::Parse,
                                    "hold-out has a different number of development years");
            }
            for (std::size_t j = training.observed(i); j < training.n(); ++j) {
                if (std::isnan(it->cells[j])) {
                    throw TriangleError(TriangleErrorKind::UnobservedCell,
                                        "hold-out accident year " + std::to_string(year) +
                                            " lacks development year " + std::to_string(j + 1));
                }
                total += it->cells[j];
            }
        }
        out.push_back(total / training.premium(i));
    }
    return out;
}

}  // namespace reserving
