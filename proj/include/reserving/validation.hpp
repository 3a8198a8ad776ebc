#pragma once

// Hold-out evaluation of predicted n-th development year cumulative loss
// ratios against realized values, for one insurer or a panel.

#include "reserving/bootstrap.hpp"
#include "reserving/dirichlet.hpp"
#include "reserving/mle.hpp"
#include "reserving/triangle.hpp"

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace reserving {

struct KeyedPrediction {
    std::string insurer;
    ReservePrediction prediction;  // ultimate and optional interval
};

struct RealizedValue {
    std::string insurer;
    int accident_year = 0;
    double ultimate = 0.0;
};

/// One (insurer, accident year, method) comparison. A missing interval is
/// treated as the degenerate interval at the point prediction.
struct EvalDetail {
    std::string insurer;
    int accident_year = 0;
    std::string method;
    double predicted = 0.0;
    double actual = 0.0;
    double abs_deviation = 0.0;
    bool contains = false;
    double interval_length = 0.0;
};

/// Metrics over a group of comparisons. For a single insurer the RMSE is
/// the absolute deviation, Cov95 is 0 or 1 and Len95 the interval length.
struct EvalRow {
    std::string insurer;  // kAllInsurers for panel aggregates
    int accident_year = 0;
    std::string method;
    double rmse = 0.0;
    double cov95 = 0.0;
    double len95 = 0.0;
    std::size_t count = 0;
};

inline constexpr const char* kAllInsurers = "all";

struct PanelFailure {
    std::string insurer;
    std::string message;
};

struct EvalReport {
    std::vector<EvalDetail> details;
    std::vector<EvalRow> per_insurer;  // one row per detail
    std::vector<EvalRow> aggregate;    // per (accident year, method) across insurers
    std::vector<PanelFailure> failures;

    const EvalRow& find(int accident_year, const std::string& method) const;
};

/// Every prediction must have a realized value with the same (insurer,
/// accident year), and every realized value must be predicted by each method
/// that appears. Throws InputError naming the first mismatched key.
EvalReport evaluate(const std::vector<KeyedPrediction>& predictions,
                    const std::vector<RealizedValue>& actuals);

struct PanelOptions {
    std::vector<std::string> methods{"dirichlet", "cl"};
    BootstrapOptions bootstrap;  // threads is ignored; insurers run in parallel
    std::size_t threads = 0;
    double level = 0.95;
};

/// Evaluates every `X.csv` in dir that has a companion `X.holdout.csv`.
/// Training files without a hold-out, and insurers whose fit or prediction
/// fails, are reported as failures. Only accident years incomplete in
/// training are evaluated. Throws InputError on an unknown method or when
/// dir holds no training files.
EvalReport run_panel(const std::filesystem::path& dir, const PanelOptions& opts = {});

/// CSV `insurer,accident_year,method,rmse,cov95,len95`: per-insurer rows
/// followed by the aggregate rows.
void write_report_csv(const EvalReport& report, std::ostream& out);

/// A complete square drawn from theta, split into the training staircase
/// (row i observes min(n, m - i) years) and the hold-out lower triangle.
struct SyntheticInsurer {
    RunOffTriangle training;
    std::vector<HoldoutRow> holdout;
};

SyntheticInsurer simulate_insurer(const DirichletParams& theta, int first_accident_year,
                                  const std::vector<double>& premiums, Rng& rng);

/// Writes name.csv and name.holdout.csv into dir.
void write_insurer_files(const SyntheticInsurer& insurer, const std::filesystem::path& dir,
                         const std::string& name);

}  // namespace reserving
