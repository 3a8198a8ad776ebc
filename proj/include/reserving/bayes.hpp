#pragma once

// Hierarchical Bayesian inference for the scaled Dirichlet model.
//
// Prior: phi_1..phi_m iid uniform(0, phi_hyper), p(phi_hyper) flat, and flat
// priors on a and b_n with b_n >= max(1, alpha / (1 - alpha) * a_0). The
// optional alpha bounds the expected tail quota b_n / (a_0 + b_n) from below.
// Caps on phi_hyper and b_n / a_0 keep the sampling region bounded.
//
// The sampler works on unconstrained coordinates
//   u_j = log a_j, v = log(b_n - lower(a)), w = log(phi_hyper - max_i S_i),
//   z_i = logit((phi_i - S_i) / (phi_hyper - S_i))
// and cycles through a joint random-walk move with covariance learned during
// warmup, moves along the principal axes of that covariance, and
// single-coordinate moves. Chains start at dispersed values of b_n.
// Adaptation stops at the end of warmup.

#include "reserving/bootstrap.hpp"
#include "reserving/dirichlet.hpp"
#include "reserving/triangle.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace reserving {

struct BayesSpec {
    std::optional<double> tail_alpha;
    std::size_t iterations = 20000;  // per chain, including warmup
    std::size_t warmup = 5000;
    std::size_t chains = 4;
    std::uint64_t seed = kDefaultSeed;
    double phi_hyper_cap = 10.0;
    double b_cap_multiple = 10.0;    // b_n <= b_cap_multiple * a_0
    double max_rhat = 1.05;
    std::size_t threads = 0;

    /// Throws InputError on alpha outside [0, 1), iterations <= warmup,
    /// zero chains or non-positive caps.
    void validate() const;
    /// max(1, alpha / (1 - alpha) * a0).
    double b_lower(double a0) const;
};

struct BayesState {
    std::vector<double> a;
    double b_n = 1.0;
    std::vector<double> phi;
    double phi_hyper = 1.0;

    DirichletParams params() const { return DirichletParams{a, b_n, phi}; }
};

/// Log posterior up to a constant; -infinity outside the prior support.
double log_posterior(const BayesState& state, const LossRatioTriangle& t, const BayesSpec& spec);

struct PosteriorSample {
    BayesSpec spec;
    std::vector<std::string> names;  // a_1..a_n, b_n, phi_1..phi_m, phi_hyper
    std::vector<std::vector<std::vector<double>>> draws;  // [chain][iteration][param]
    std::vector<double> joint_acceptance;  // per chain, post-warmup
    std::vector<double> coord_acceptance;  // per chain, post-warmup
    std::vector<double> rhat;              // split-chain R-hat per parameter
    std::size_t near_hyper_cap = 0;        // draws with phi_hyper >= 0.99 cap
    std::size_t near_b_cap = 0;            // draws with b_n >= 0.99 cap

    std::size_t n() const;
    std::size_t draw_count() const;
    BayesState state(std::size_t chain, std::size_t iteration) const;
};

/// Split-chain potential scale reduction factor of one scalar.
double split_rhat(const std::vector<std::vector<double>>& chains);

/// Runs the chains (in parallel, one RNG stream each). Throws NumericalError
/// when a chain accepts nothing for 2000 consecutive iterations or when any
/// parameter's split R-hat exceeds spec.max_rhat.
PosteriorSample run_mcmc(const LossRatioTriangle& t, const BayesSpec& spec);

/// Unpaid cells simulated once per retained draw.
PredictiveDistribution posterior_predict(const PosteriorSample& ps, const LossRatioTriangle& t);

/// CSV with header chain,iteration,param,value (post-warmup iterations).
void write_draws_csv(const PosteriorSample& ps, std::ostream& out);

}  // namespace reserving
