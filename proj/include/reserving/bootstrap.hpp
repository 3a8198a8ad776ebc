#pragma once

// Parametric bootstrap of the predictive distribution of unpaid losses,
// with a two-stage bias correction of the MLE.

#include "reserving/dirichlet.hpp"
#include "reserving/mle.hpp"
#include "reserving/parallel.hpp"
#include "reserving/triangle.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

namespace reserving {

/// Seed used when neither a flag nor RESERVE_SEED provides one.
inline constexpr std::uint64_t kDefaultSeed = 20240501;

struct BootstrapOptions {
    std::size_t n_sim = 1000;
    std::uint64_t seed = kDefaultSeed;
    std::size_t threads = 0;  // 0 = default_threads()
    FitOptions fit;
};

struct BiasCorrection {
    DirichletParams avg;  // stage-I bootstrap mean
    DirichletParams mod;  // MLE * MLE / avg, componentwise; b_n = 1
};

struct PredictiveDistribution {
    std::size_t n_sim = 0;
    std::uint64_t seed = 0;
    std::vector<int> accident_years;
    std::vector<double> observed;                     // S_{i,1:k_i}
    std::vector<DirichletParams> thetas;              // one per replicate
    std::vector<std::vector<std::vector<double>>> unpaid_cells;  // [rep][row] -> Y_{i,k+1..n}
    std::vector<std::vector<double>> ultimate;        // [rep][row] -> S_{i,1:n}
    std::size_t failed_refits = 0;    // refits that failed and were redrawn
    std::size_t clamped_rows = 0;     // replicate rows with phi^(s) <= S, unpaid set to 0
    std::optional<BiasCorrection> correction;

    double reserve(std::size_t rep, std::size_t row) const {
        return ultimate.at(rep).at(row) - observed.at(row);
    }
};

/// A dataset with t's observed pattern drawn from the model at theta.
LossRatioTriangle simulate_triangle(const DirichletParams& theta, const LossRatioTriangle& t, Rng& rng);

/// Simulate D_U from theta_gen with t's mask and refit. Throws whatever the
/// refit throws (InputError, NumericalError) so callers can redraw.
FitResult bootstrap_once(const DirichletParams& theta_gen, const LossRatioTriangle& t, Rng& rng,
                         const FitOptions& opts = {});

/// n refits from theta_gen, each on its own stream (seed, stage, index,
/// attempt). Failed refits are redrawn; more than 10 * n attempts in total
/// is a NumericalError.
std::vector<FitResult> bootstrap_refits(const DirichletParams& theta_gen, const LossRatioTriangle& t,
                                        std::size_t n, std::uint64_t seed, std::uint64_t stage,
                                        std::size_t threads, const FitOptions& opts,
                                        std::size_t* failures = nullptr);

/// Mean of refitted parameters and the corrected MLE * MLE / mean.
BiasCorrection bias_correction(const DirichletParams& mle, const std::vector<FitResult>& stage_one);

/// Two-stage bias-corrected bootstrap. n_sim < 100 is rejected.
PredictiveDistribution bias_corrected_bootstrap(const FitResult& fit, const LossRatioTriangle& t,
                                                const BootstrapOptions& opts = {});

/// Predictive distribution from a fixed set of parameter draws: unpaid cells
/// for each draw from the conditional model given the observed rows.
PredictiveDistribution predictive_from_draws(const std::vector<DirichletParams>& draws,
                                             const LossRatioTriangle& t, std::uint64_t seed,
                                             std::uint64_t stage, std::size_t threads);

/// Order-statistic quantile with linear interpolation (Hyndman-Fan type 7).
double empirical_quantile(std::vector<double> values, double p);

/// Per accident year: predictive mean and equal-tailed interval at `level`.
std::vector<ReservePrediction> summarize(const PredictiveDistribution& pd, double level = 0.95,
                                         const std::string& method = "dirichlet");

struct ParameterSummary {
    std::vector<double> mean_a;
    std::vector<double> sd_a;
};

ParameterSummary summarize_parameters(const PredictiveDistribution& pd);

/// CSV with header replicate,accident_year,ultimate_ratio,reserve_ratio.
void write_predictive_csv(const PredictiveDistribution& pd, std::ostream& out);

}  // namespace reserving
