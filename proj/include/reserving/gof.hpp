#pragma once

// Goodness of fit for the scaled Dirichlet model. Each observed cell is
// mapped through the Beta CDF of its stick-breaking ratio
//
//   Y_ik / (phi_i - Y_i1 - ... - Y_i,k-1) ~ Beta(a_k, a_{k+1} + ... + a_n + b_n)
//
// and the Kolmogorov-Smirnov distance of these values from uniform(0,1) is
// compared with its parametric-bootstrap distribution. The region is
// two-sided: unusually small distances also reject.

#include "reserving/bootstrap.hpp"
#include "reserving/dirichlet.hpp"
#include "reserving/mle.hpp"
#include "reserving/triangle.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace reserving {

/// Regularized incomplete beta I_x(a, b) by continued fraction.
double beta_cdf(double x, double a, double b);

/// Cells (row, k) entering the statistic: every observed cell except
/// (i, n) for history rows i <= m - n, whose fitted phi equals the row total.
std::vector<std::pair<std::size_t, std::size_t>> pit_index_set(const LossRatioTriangle& t);

/// Beta CDF values over pit_index_set(t), in row-major order. Ratios within
/// 1e-9 of [0, 1] are clamped; beyond that std::domain_error.
std::vector<double> pit_transform(const DirichletParams& theta, const LossRatioTriangle& t);

/// sup |F_N(u) - u| over [0, 1].
double ks_statistic(std::vector<double> u);

struct GofOptions {
    double alpha = 0.05;
    std::size_t n_boot = 500;
    std::uint64_t seed = kDefaultSeed;
    std::size_t threads = 0;
    FitOptions fit;
};

struct GofResult {
    double t_obs = 0.0;
    std::vector<double> null_sample;
    double lower = 0.0;
    double upper = 0.0;
    double alpha = 0.05;
    std::size_t n_boot = 0;
    bool reject = false;
    std::size_t index_size = 0;
    std::size_t failed_refits = 0;
};

/// Fit, transform, and calibrate against n_boot refitted datasets simulated
/// from the fit. Throws InputError for alpha outside (0, 1) or n_boot < 20.
GofResult gof_test(const LossRatioTriangle& t, const GofOptions& opts = {});

/// {"t_obs", "lower", "upper", "alpha", "n_boot", "reject"}.
std::string to_json(const GofResult& r);

}  // namespace reserving
