#pragma once

// Gamma-family special functions on the positive real line.
// All three throw std::domain_error for x <= 0 or NaN.

namespace reserving {

/// ln Γ(x).
double log_gamma(double x);

/// Ψ(x) = d/dx ln Γ(x).
double digamma(double x);

/// Ψ'(x), the trigamma function.
double trigamma(double x);

}  // namespace reserving
