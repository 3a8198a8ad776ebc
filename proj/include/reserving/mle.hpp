#pragma once

// Maximum likelihood for the scaled Dirichlet model.
//
// For fixed (a, b_n) each phi_i has a closed-form maximizer, and for b_n >= 1
// the profiled likelihood decreases in b_n, so b_n = 1 at the optimum. What
// remains is a smooth problem in a = (a_1..a_n), solved by Newton-Raphson on
// log a with step halving.

#include "reserving/dirichlet.hpp"
#include "reserving/triangle.hpp"

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <vector>

namespace reserving {

struct FitOptions {
    int max_iterations = 200;
    double step_tolerance = 1e-8;      // max_j |delta a_j| / a_j
    double gradient_tolerance = 1e-6;  // max_j |a_j * d ll / d a_j|
    int max_halvings = 30;
    std::optional<std::vector<double>> start;  // a^(0); default from column means
};

struct FitResult {
    DirichletParams theta;  // b_n == 1 exactly
    double loglik = 0.0;
    int iterations = 0;
    bool converged = false;
    double gradient_norm = 0.0;
    std::vector<int> accident_years;
    std::vector<double> loglik_trace;  // start value, then after each accepted step
};

/// Maximizer of the likelihood in phi for fixed a and b_n:
/// phi_i = (a_0 + b_n - 1) / (a_1 + ... + a_{k_i}) * S_{i,1:k_i}.
std::vector<double> profile_phi(std::span<const double> a, double b_n, const LossRatioTriangle& t);

/// ll(a) = total_loglik at b_n = 1 and phi = profile_phi(a, 1, t).
double profiled_loglik(std::span<const double> a, const LossRatioTriangle& t);

/// Analytic derivatives of profiled_loglik in the original a scale.
Eigen::VectorXd profiled_gradient(std::span<const double> a, const LossRatioTriangle& t);
Eigen::MatrixXd profiled_hessian(std::span<const double> a, const LossRatioTriangle& t);

/// Default Newton start: column means of observed ratios, scaled to a_0 = 100.
std::vector<double> default_start(const LossRatioTriangle& t);

/// Throws InputError when some development year is never observed and
/// NumericalError when Newton-Raphson does not converge.
FitResult fit_mle(const LossRatioTriangle& t, const FitOptions& opts = {});

}  // namespace reserving
