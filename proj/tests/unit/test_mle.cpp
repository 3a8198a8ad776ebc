#include "reserving/bootstrap.hpp"
#include "reserving/dirichlet.hpp"
#include "reserving/mle.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

namespace reserving {
namespace {

using testing::fixture_ratios;
using testing::kA10;
using testing::kA18;

constexpr double kPhi10[] = {0.629, 0.719, 0.766, 0.774, 0.773, 0.745, 0.758, 0.725, 0.766, 0.682};
constexpr double kPhi18[] = {0.629, 0.716, 0.759, 0.761, 0.753, 0.720, 0.728, 0.691, 0.724, 0.643};

std::vector<double> published(const double (&a)[10]) { return {std::begin(a), std::end(a)}; }

// Staircase mask with m rows and n development years.
LossRatioTriangle staircase_mask(std::size_t m, std::size_t n) {
    std::vector<int> years(m);
    std::iota(years.begin(), years.end(), 1900);
    std::vector<std::vector<double>> rows(m);
    for (std::size_t i = 0; i < m; ++i) rows[i].assign(std::min(n, m - i), 0.01);
    return LossRatioTriangle(years, rows, n);
}

TEST(ProfilePhi, ClosedForm) {
    const auto t = fixture_ratios(18);
    const auto a = published(kA18);
    const double a0 = std::accumulate(a.begin(), a.end(), 0.0);
    const auto phi1 = profile_phi(a, 1.0, t);
    const auto phi2 = profile_phi(a, 2.0, t);
    for (std::size_t i = 0; i < 9; ++i) {
        EXPECT_EQ(phi1[i], t.observed_cumulative(i));
        EXPECT_NEAR(phi2[i], (a0 + 1.0) / a0 * t.observed_cumulative(i), 1e-15);
        EXPECT_GT(phi2[i], t.observed_cumulative(i));
    }
    const auto t10 = fixture_ratios(10);
    const auto phi = profile_phi(published(kA10), 1.0, t10);
    EXPECT_NEAR(phi[1], 4512.28 / 4449.12 * 0.70846, 2e-5);
    EXPECT_NEAR(phi[1], 0.719, 5e-4);
}

TEST(ProfiledDerivatives, GradientMatchesFiniteDifferences) {
    const auto t = fixture_ratios(10);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> jitter(0.8, 1.2);
    for (int rep = 0; rep < 5; ++rep) {
        auto a = published(kA10);
        for (double& x : a) x *= jitter(rng);
        const auto g = profiled_gradient(a, t);
        for (std::size_t j = 0; j < a.size(); ++j) {
            const double h = 1e-6 * a[j];
            auto up = a, dn = a;
            up[j] += h;
            dn[j] -= h;
            const double fd = (profiled_loglik(up, t) - profiled_loglik(dn, t)) / (2.0 * h);
            EXPECT_NEAR(g[static_cast<Eigen::Index>(j)], fd, 1e-4) << "rep " << rep << " j " << j;
        }
    }
}

TEST(ProfiledDerivatives, HessianMatchesFiniteDifferences) {
    const auto t = fixture_ratios(18);
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> jitter(0.8, 1.2);
    for (int rep = 0; rep < 3; ++rep) {
        auto a = published(kA18);
        for (double& x : a) x *= jitter(rng);
        const auto hess = profiled_hessian(a, t);
        EXPECT_EQ(hess, hess.transpose());
        for (std::size_t r = 0; r < a.size(); ++r) {
            const double h = 1e-5 * a[r];
            auto up = a, dn = a;
            up[r] += h;
            dn[r] -= h;
            const Eigen::VectorXd fd = (profiled_gradient(up, t) - profiled_gradient(dn, t)) / (2.0 * h);
            for (std::size_t j = 0; j < a.size(); ++j) {
                const auto jj = static_cast<Eigen::Index>(j);
                const auto rr = static_cast<Eigen::Index>(r);
                EXPECT_NEAR(hess(jj, rr), fd[jj], 1e-3 * std::abs(hess(jj, rr)) + 1e-9)
                    << "entry (" << j << "," << r << ")";
            }
        }
    }
}

TEST(FitMle, TenYearFixture) {
    const auto t = fixture_ratios(10);
    const auto fit = fit_mle(t);
    ASSERT_TRUE(fit.converged);
    EXPECT_LT(fit.gradient_norm, FitOptions{}.gradient_tolerance);
    EXPECT_EQ(fit.theta.b_n, 1.0);
    for (std::size_t j = 0; j < 10; ++j) EXPECT_NEAR(fit.theta.a[j] / kA10[j], 1.0, 0.01) << "a_" << j + 1;
    for (std::size_t i = 0; i < 10; ++i) EXPECT_NEAR(fit.theta.phi[i], kPhi10[i], 0.005) << "row " << i;
    EXPECT_NEAR(fit.theta.a0() / 4512.0, 1.0, 0.01);
    EXPECT_EQ(fit.accident_years.front(), 1997);
}

TEST(FitMle, EighteenYearFixture) {
    const auto t = fixture_ratios(18);
    const auto fit = fit_mle(t);
    ASSERT_TRUE(fit.converged);
    EXPECT_EQ(fit.theta.b_n, 1.0);
    for (std::size_t j = 0; j < 10; ++j) EXPECT_NEAR(fit.theta.a[j] / kA18[j], 1.0, 0.01) << "a_" << j + 1;
    for (std::size_t i = 0; i < 10; ++i) EXPECT_NEAR(fit.theta.phi[8 + i], kPhi18[i], 0.005);
    for (std::size_t i = 0; i < 9; ++i) EXPECT_EQ(fit.theta.phi[i], t.observed_cumulative(i));
}

TEST(FitMle, AscentIsMonotoneWithinRoundingAndDeterministic) {
    const auto t = fixture_ratios(10);
    const auto fit = fit_mle(t);
    ASSERT_GE(fit.loglik_trace.size(), 2u);
    for (std::size_t s = 1; s < fit.loglik_trace.size(); ++s) {
        EXPECT_GE(fit.loglik_trace[s], fit.loglik_trace[s - 1] - 1e-8) << "step " << s;
    }
    EXPECT_GT(fit.loglik_trace.back(), fit.loglik_trace.front());
    const auto again = fit_mle(t);
    EXPECT_EQ(again.theta.a, fit.theta.a);
    EXPECT_EQ(again.theta.phi, fit.theta.phi);
    EXPECT_EQ(again.loglik, fit.loglik);
}

TEST(FitMle, LikelihoodDecreasesInTailParameter) {
    for (std::size_t years : {10u, 18u}) {
        const auto t = fixture_ratios(years);
        const auto fit = fit_mle(t);
        double previous = std::numeric_limits<double>::infinity();
        for (double b : {1.0, 1.5, 2.0, 5.0}) {
            const DirichletParams th{fit.theta.a, b, profile_phi(fit.theta.a, b, t)};
            const double ll = total_loglik(th, t);
            EXPECT_LE(ll, previous) << "years " << years << " b " << b;
            previous = ll;
        }
    }
}

TEST(FitMle, SyntheticRecovery) {
    // Complete rows pin phi at the row total, which inflates a_0 by about
    // 1 + 2 / (n - 1); the development pattern a / a_0 is unaffected.
    const std::size_t m = 200, n = 4;
    DirichletParams truth{{400.0, 250.0, 120.0, 60.0}, 1.0, {}};
    std::mt19937_64 prng(1);
    std::uniform_real_distribution<double> up(0.6, 0.9);
    for (std::size_t i = 0; i < m; ++i) truth.phi.push_back(up(prng));
    auto rng = make_stream(2024, {42});
    const auto data = simulate_triangle(truth, staircase_mask(m, n), rng);
    const auto fit = fit_mle(data);
    for (std::size_t j = 0; j < n; ++j) {
        EXPECT_NEAR(fit.theta.a[j] / fit.theta.a0(), truth.a[j] / truth.a0(), 0.05 * truth.a[j] / truth.a0())
            << "a_" << j + 1;
    }
    const double inflation = 1.0 + 2.0 / static_cast<double>(n - 1);
    EXPECT_NEAR(fit.theta.a0() / truth.a0(), inflation, 0.15 * inflation);

    BootstrapOptions opts;
    opts.n_sim = 200;
    opts.seed = 5;
    const auto stage_one = bootstrap_refits(fit.theta, data, opts.n_sim, opts.seed, 1, 0, opts.fit);
    const auto corrected = bias_correction(fit.theta, stage_one).mod;
    for (std::size_t j = 0; j < n; ++j) EXPECT_NEAR(corrected.a[j] / truth.a[j], 1.0, 0.10) << "a_" << j + 1;
}

TEST(FitMle, ChainLadderNesting) {
    // At the MLE the prediction is the Chain-Ladder projection with the
    // fitted quotas, shrunk by at most a factor a_0 / (a_0 + 1).
    const auto t = fixture_ratios(10);
    const auto fit = fit_mle(t);
    const auto eta = dev_quotas(fit.theta);
    const double a0 = fit.theta.a0();
    for (std::size_t i = 0; i < t.m(); ++i) {
        const std::size_t k = t.observed(i);
        const double cl = t.observed_cumulative(i) / eta[k - 1];
        const double v = credibility_weight(fit.theta, k);
        const double expected = cl * (v + (1.0 - v) * a0 / (a0 + 1.0));
        EXPECT_NEAR(predict_dirichlet(fit.theta, t, i).ultimate, expected, 1e-12);
        EXPECT_NEAR(predict_dirichlet(fit.theta, t, i).ultimate, cl, cl / (a0 + 1.0));
    }
}

TEST(FitMle, Errors) {
    const LossRatioTriangle shallow({2000, 2001}, {{0.1, 0.2}, {0.1}}, 3);
    EXPECT_THROW(fit_mle(shallow), InputError);

    FitOptions tight;
    tight.max_iterations = 1;
    EXPECT_THROW(fit_mle(fixture_ratios(18), tight), NumericalError);

    FitOptions bad;
    bad.start = std::vector<double>{1.0, 2.0};
    EXPECT_THROW(fit_mle(fixture_ratios(10), bad), std::invalid_argument);
}

}  // namespace
}  // namespace reserving
