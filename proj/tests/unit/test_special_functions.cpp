#include "reserving/special_functions.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace reserving {
namespace {

// Reference values computed with mpmath at 40 significant digits.
struct Oracle {
    double x, log_gamma, digamma, trigamma;
};

constexpr Oracle kOracles[] = {
    {0.5, 0.57236494292470008707, -1.9635100260214234794, 4.9348022005446793094},
    {1e-3, 6.9071788853838536825, -1000.5755719318103005, 1000001.642533195869},
    {3.7, 1.4280723266653879219, 1.1671535393615113859, 0.3100378576700383191},
    {12.25, 18.115669505710892619, 2.4641546551853689558, 0.085055142988163208079},
    {250.5, 1131.2840013322551691, 5.521461584527046449, 0.0039999946666965329554},
    {4512.28, 33453.272764405845504, 8.4144470351707770435, 0.0002216420117794384747},
    {1e6, 12815504.56914761166, 13.815510057964190771, 1.0000005000001666667e-6},
};

double rel(double got, double want) { return std::abs(got - want) / std::max(1e-300, std::abs(want)); }

TEST(SpecialFunctions, MatchesHighPrecisionOracle) {
    for (const auto& o : kOracles) {
        SCOPED_TRACE(o.x);
        EXPECT_LT(rel(log_gamma(o.x), o.log_gamma), 1e-14);
        EXPECT_LT(rel(digamma(o.x), o.digamma), 1e-13);
        EXPECT_LT(rel(trigamma(o.x), o.trigamma), 1e-13);
    }
}

TEST(SpecialFunctions, ExactValues) {
    EXPECT_NEAR(log_gamma(1.0), 0.0, 1e-14);
    EXPECT_NEAR(log_gamma(2.0), 0.0, 1e-14);
    EXPECT_NEAR(log_gamma(5.0), std::log(24.0), 1e-14);
    EXPECT_NEAR(log_gamma(0.5), 0.5 * std::log(std::numbers::pi), 1e-14);
    EXPECT_NEAR(digamma(1.0), -0.57721566490153286061, 1e-14);
    EXPECT_NEAR(trigamma(1.0), std::numbers::pi * std::numbers::pi / 6.0, 1e-14);
}

TEST(SpecialFunctions, Recurrences) {
    for (double x : {0.01, 0.3, 1.0, 2.5, 7.75, 40.0, 900.0}) {
        SCOPED_TRACE(x);
        EXPECT_NEAR(log_gamma(x + 1.0) - log_gamma(x), std::log(x), 1e-12 * std::max(1.0, log_gamma(x + 1.0)));
        EXPECT_NEAR(digamma(x + 1.0) - digamma(x), 1.0 / x, 1e-12 * (1.0 / x + std::abs(digamma(x))));
        EXPECT_NEAR(trigamma(x + 1.0) - trigamma(x), -1.0 / (x * x), 1e-12 * trigamma(x));
    }
}

TEST(SpecialFunctions, Asymptotics) {
    const double x = 1e5;
    EXPECT_NEAR(digamma(x), std::log(x) - 1.0 / (2.0 * x), 1e-10);
    EXPECT_NEAR(trigamma(x), 1.0 / x + 1.0 / (2.0 * x * x), 1e-8);
}

TEST(SpecialFunctions, DomainErrors) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (double x : {0.0, -1.0, -0.5, nan}) {
        EXPECT_THROW(log_gamma(x), std::domain_error);
        EXPECT_THROW(digamma(x), std::domain_error);
        EXPECT_THROW(trigamma(x), std::domain_error);
    }
}

}  // namespace
}  // namespace reserving
