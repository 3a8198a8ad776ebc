#pragma once

// Industry comparators on the loss-ratio triangle: Chain-Ladder with Mack's
// distribution-free standard errors, the expected loss-ratio method, and
// Bornhuetter-Ferguson.

#include "reserving/dirichlet.hpp"
#include "reserving/triangle.hpp"

#include <vector>

namespace reserving {

struct ClFit {
    std::vector<double> factors;    // gamma_{k:k+1}, k = 1..n-1
    std::vector<double> factor_se;  // sqrt(sigma2_k / sum_i S_{i,1:k})
    std::vector<double> sigma2;     // Mack's sigma^2_k; NaN when not estimable
    std::vector<double> volume;     // sum_i S_{i,1:k} over rows observing k+1
    /// Per row: ultimate, reserve, std_error = sqrt(MSEP), normal interval.
    std::vector<ReservePrediction> predictions;
    double level = 0.95;
};

/// Volume-weighted factors over rows observing both k and k+1. The last
/// sigma^2 falls back to min(s_{k-1}^4 / s_{k-2}^2, s_{k-2}^2, s_{k-1}^2)
/// when only one row informs it. Throws InputError when some factor has no
/// informing row.
ClFit cl_fit(const LossRatioTriangle& t, double level = 0.95);

/// eta_k = prod_{j >= k} 1 / gamma_j for k = 1..n, with eta_n = 1.
std::vector<double> cl_quotas(const ClFit& fit);

/// Predicted incremental ratio of development year k2 (beyond the observed
/// prefix): S_{i,1:k} * (prod_{j=k}^{k2-1} gamma_j - prod_{j=k}^{k2-2} gamma_j).
double cl_predict_incremental(const ClFit& fit, const LossRatioTriangle& t, std::size_t row,
                              std::size_t k2);

/// S_{i,1:k} + (1 - eta_k) * expected_ultimate.
ReservePrediction bf_predict(const ClFit& fit, const LossRatioTriangle& t, std::size_t row,
                             double expected_ultimate);

/// Ultimate = expected_ultimate; the reserve may be negative.
ReservePrediction expected_method(const LossRatioTriangle& t, std::size_t row, double expected_ultimate);

}  // namespace reserving
