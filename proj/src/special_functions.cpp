#include "reserving/special_functions.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace reserving {

namespace {

// Below this the argument is shifted upward by recurrence before the
// asymptotic series is applied.
constexpr double kShift = 10.0;

void require_positive(double x, const char* name) {
    if (!(x > 0.0)) throw std::domain_error(std::string(name) + ": argument must be positive");
}

}  // namespace

double log_gamma(double x) {
    require_positive(x, "log_gamma");
    if (std::isinf(x)) return x;
    double shift = 0.0;
    double prod = 1.0;
    while (x < kShift) {
        prod *= x;
        x += 1.0;
    }
    if (prod != 1.0) shift = std::log(prod);

    const double z2 = 1.0 / (x * x);
    // Stirling series: sum of B_{2k} / (2k (2k-1) x^{2k-1})
    double series = 1.0 / 156.0;
    series = series * z2 - 691.0 / 360360.0;
    series = series * z2 + 1.0 / 1188.0;
    series = series * z2 - 1.0 / 1680.0;
    series = series * z2 + 1.0 / 1260.0;
    series = series * z2 - 1.0 / 360.0;
    series = series * z2 + 1.0 / 12.0;
    series /= x;
    constexpr double half_log_two_pi = 0.91893853320467274178;
    return (x - 0.5) * std::log(x) - x + half_log_two_pi + series - shift;
}

double digamma(double x) {
    require_positive(x, "digamma");
    if (std::isinf(x)) return x;
    double acc = 0.0;
    while (x < kShift) {
        acc -= 1.0 / x;
        x += 1.0;
    }
    const double z2 = 1.0 / (x * x);
    double series = 691.0 / 32760.0;
    series = series * z2 - 1.0 / 132.0;
    series = series * z2 + 1.0 / 240.0;
    series = series * z2 - 1.0 / 252.0;
    series = series * z2 + 1.0 / 120.0;
    series = series * z2 - 1.0 / 12.0;
    series *= z2;
    return acc + std::log(x) - 0.5 / x + series;
}

double trigamma(double x) {
    require_positive(x, "trigamma");
    if (std::isinf(x)) return 0.0;
    double acc = 0.0;
    while (x < kShift) {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    const double z = 1.0 / x;
    const double z2 = z * z;
    double series = -691.0 / 2730.0;
    series = series * z2 + 5.0 / 66.0;
    series = series * z2 - 1.0 / 30.0;
    series = series * z2 + 1.0 / 42.0;
    series = series * z2 - 1.0 / 30.0;
    series = series * z2 + 1.0 / 6.0;
    series *= z2 * z;
    return acc + z + 0.5 * z2 + series;
}

}  // namespace reserving
