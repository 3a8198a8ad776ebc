#pragma once

// The scaled Dirichlet reserving model. For accident year i,
//
//   (Y_i1/phi_i, ..., Y_in/phi_i, 1 - S_{i,1:n}/phi_i) ~ Dir(a_1, ..., a_n, b_n)
//
// where S_{i,k:k2} is the sum of Y_ij over k <= j <= k2. Development years
// are 1-based (k = 1..n); rows are 0-based positions in the triangle.

#include "reserving/parallel.hpp"
#include "reserving/triangle.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace reserving {

struct DirichletParams {
    std::vector<double> a;    // a_1..a_n, all > 0
    double b_n = 1.0;         // tail concentration, >= 1
    std::vector<double> phi;  // one scale per accident year, > 0

    std::size_t n() const noexcept { return a.size(); }
    double a0() const;
    /// Sum of a_j for j in [k, k2] (1-based, inclusive); empty range sums to 0.
    double a_sum(std::size_t k, std::size_t k2) const;

    /// Throws std::invalid_argument when a_j <= 0, b_n < 1 or phi_i <= 0.
    void validate() const;
    /// validate() plus shape agreement with t and phi_i above the observed
    /// cumulative of each row (phi_i == S allowed only when the row's tail
    /// exponent is zero, i.e. the density stays finite).
    bool supports(const LossRatioTriangle& t) const;
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

struct ReservePrediction {
    int accident_year = 0;
    std::string method;             // "dirichlet", "cl", "ex", "bf", ...
    double observed = 0.0;          // S_{i,1:k}
    double ultimate = 0.0;          // predicted S_{i,1:n}
    double reserve = 0.0;           // ultimate - observed
    std::optional<Interval> interval;
    std::optional<double> std_error;
};

struct Moments {
    double mean = 0.0;
    double variance = 0.0;
};

/// ln l_i(theta). Returns -infinity when phi_i does not exceed the observed
/// cumulative of the row; throws std::invalid_argument for invalid theta.
/// The complete-row and partial-row likelihoods coincide once the tail
/// parameter is written as a_0 + b_n - sum_{j<=k} a_j, so one formula serves both.
double row_log_density(const DirichletParams& theta, const LossRatioTriangle& t, std::size_t row);

/// Sum of row_log_density over all rows.
double total_loglik(const DirichletParams& theta, const LossRatioTriangle& t);

/// Mean and variance of S_{i,k:k2}.
Moments cumulative_moments(const DirichletParams& theta, std::size_t row, std::size_t k,
                           std::size_t k2);

/// gamma_{k:k+1} = (a_1+...+a_{k+1}) / (a_1+...+a_k), 1 <= k <= n-1.
double dev_factor(const DirichletParams& theta, std::size_t k);
/// eta_k = (a_1+...+a_k) / a_0, 1 <= k <= n.
double dev_quota(const DirichletParams& theta, std::size_t k);
std::vector<double> dev_factors(const DirichletParams& theta);
std::vector<double> dev_quotas(const DirichletParams& theta);

/// v(k) = b_n/(sum_{j>k} a_j + b_n) * (sum_{j<=k} a_j)/a_0.
double credibility_weight(const DirichletParams& theta, std::size_t k);
/// The same weight as the squared ratio CV(S_{1:n}) / CV(S_{1:k}).
double credibility_weight_cv(const DirichletParams& theta, std::size_t k);

/// E(S_{i,1:n} | S_{i,1:k} = observed) evaluated directly.
double conditional_ultimate(const DirichletParams& theta, std::size_t row, std::size_t k,
                            double observed);

/// Credibility-weighted blend of the Chain-Ladder and expected predictions.
ReservePrediction predict_dirichlet(const DirichletParams& theta, const LossRatioTriangle& t,
                                    std::size_t row);

struct ConditionalAllocation {
    std::vector<double> paid;    // Dir(a_1..a_k) for the split of S_{1:k}
    std::vector<double> future;  // Dir(a_{k+1}..a_n, b_n) for the split of phi - S_{1:k}
    /// a_j / (sum_{j>k} a_j + b_n) for j = k+1..n
    std::vector<double> disposal_rates() const;
    /// Beta parameters of S_{k+1:n} / (phi - S_{1:k}).
    std::pair<double, double> unpaid_beta() const;
};

ConditionalAllocation conditional_allocation(const DirichletParams& theta, std::size_t k);

/// 1 + b_n / a_0.
double tail_factor(const DirichletParams& theta);

/// Dirichlet draw by normalized independent gamma variates.
std::vector<double> sample_dirichlet(std::span<const double> alpha, Rng& rng);

struct SampledRow {
    std::vector<double> cells;  // Y_i1..Y_in
    double tail = 0.0;          // phi_i - S_{i,1:n}
};

SampledRow sample_row(const DirichletParams& theta, std::size_t row, Rng& rng);

/// Unpaid cells Y_{i,k+1..n} given the observed row, drawn from the
/// conditional Dirichlet scaled by phi_i - S_{i,1:k}. Empty for complete rows.
/// Throws std::domain_error when phi_i does not exceed the observed cumulative.
std::vector<double> sample_future_row(const DirichletParams& theta, const LossRatioTriangle& t,
                                      std::size_t row, Rng& rng);

}  // namespace reserving
