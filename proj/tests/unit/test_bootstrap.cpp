#include "reserving/bootstrap.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <sstream>

namespace reserving {
namespace {

using testing::fixture_ratios;

const Interval* interval_for(const std::vector<ReservePrediction>& s, int year) {
    for (const auto& p : s) {
        if (p.accident_year == year) return p.interval ? &*p.interval : nullptr;
    }
    return nullptr;
}

class FixtureBootstrap : public ::testing::Test {
protected:
    static PredictiveDistribution run(std::size_t years, std::uint64_t seed) {
        const auto t = fixture_ratios(years);
        BootstrapOptions opts;
        opts.n_sim = 1000;
        opts.seed = seed;
        return bias_corrected_bootstrap(fit_mle(t), t, opts);
    }
};

TEST(Bootstrap, SimulationPreservesMask) {
    const auto t = fixture_ratios(18);
    const auto fit = fit_mle(t);
    auto rng = make_stream(1, {0});
    for (int rep = 0; rep < 20; ++rep) {
        const auto sim = simulate_triangle(fit.theta, t, rng);
        ASSERT_EQ(sim.m(), t.m());
        ASSERT_EQ(sim.n(), t.n());
        for (std::size_t i = 0; i < t.m(); ++i) {
            EXPECT_EQ(sim.observed(i), t.observed(i));
            EXPECT_EQ(sim.accident_year(i), t.accident_year(i));
        }
    }
}

TEST(Bootstrap, RefitsKeepTailAtOneAndReproduceTheEstimator) {
    const auto t = fixture_ratios(10);
    const auto fit = fit_mle(t);
    std::size_t failures = 0;
    const auto refits = bootstrap_refits(fit.theta, t, 300, 9, 1, 0, FitOptions{}, &failures);
    ASSERT_EQ(refits.size(), 300u);
    std::vector<double> mean_quota(t.n(), 0.0);
    for (const auto& r : refits) {
        EXPECT_EQ(r.theta.b_n, 1.0);
        EXPECT_TRUE(r.converged);
        for (std::size_t j = 0; j < t.n(); ++j) mean_quota[j] += r.theta.a[j] / r.theta.a0() / 300.0;
    }
    for (std::size_t j = 0; j < t.n(); ++j) {
        const double q = fit.theta.a[j] / fit.theta.a0();
        EXPECT_NEAR(mean_quota[j], q, 0.03 * q) << "a_" << j + 1;
    }
}

TEST_F(FixtureBootstrap, BiasCorrectionRestoresMle) {
    const auto t = fixture_ratios(10);
    const auto fit = fit_mle(t);
    const auto pd = run(10, kDefaultSeed);
    ASSERT_TRUE(pd.correction);
    EXPECT_EQ(pd.correction->mod.b_n, 1.0);
    for (std::size_t j = 0; j < t.n(); ++j) {
        const double a = fit.theta.a[j];
        EXPECT_NEAR(pd.correction->mod.a[j], a * a / pd.correction->avg.a[j], 1e-9 * a);
    }
    const auto summary = summarize_parameters(pd);
    for (std::size_t j = 0; j < t.n(); ++j) {
        EXPECT_NEAR(summary.mean_a[j] / fit.theta.a[j], 1.0, 0.03) << "a_" << j + 1;
    }
    EXPECT_NEAR(summary.sd_a[0] / 326.87, 1.0, 0.25);
    for (const auto& th : pd.thetas) EXPECT_EQ(th.b_n, 1.0);
}

TEST_F(FixtureBootstrap, TenYearInterval) {
    const auto s = summarize(run(10, 7));
    const auto* iv = interval_for(s, 1998);
    ASSERT_NE(iv, nullptr);
    EXPECT_NEAR(iv->lo, 0.714, 0.003);
    EXPECT_NEAR(iv->hi, 0.723, 0.003);
    const auto* first = interval_for(s, 1997);
    ASSERT_NE(first, nullptr);
    EXPECT_EQ(first->lo, first->hi);
}

TEST_F(FixtureBootstrap, EighteenYearInterval) {
    const auto pd = run(18, 7);
    const auto* iv = interval_for(summarize(pd), 2006);
    ASSERT_NE(iv, nullptr);
    EXPECT_NEAR(iv->lo, 0.576, 0.01);
    EXPECT_NEAR(iv->hi, 0.708, 0.01);
}

TEST_F(FixtureBootstrap, DeterministicAcrossThreadCounts) {
    const auto t = fixture_ratios(10);
    const auto fit = fit_mle(t);
    BootstrapOptions one;
    one.n_sim = 200;
    one.seed = 31;
    one.threads = 1;
    BootstrapOptions many = one;
    many.threads = 3;
    const auto a = bias_corrected_bootstrap(fit, t, one);
    const auto b = bias_corrected_bootstrap(fit, t, many);
    EXPECT_EQ(a.ultimate, b.ultimate);
    std::ostringstream sa, sb;
    write_predictive_csv(a, sa);
    write_predictive_csv(b, sb);
    EXPECT_EQ(sa.str(), sb.str());
    EXPECT_EQ(sa.str().substr(0, sa.str().find('\n')), "replicate,accident_year,ultimate_ratio,reserve_ratio");
}

TEST(Bootstrap, FullyDevelopedTriangleHasNoReserve) {
    const LossRatioTriangle t({2000, 2001, 2002, 2003, 2004},
                              {{0.30, 0.20, 0.10},
                               {0.35, 0.18, 0.08},
                               {0.28, 0.22, 0.12},
                               {0.33, 0.19, 0.09},
                               {0.31, 0.21, 0.11}},
                              3);
    BootstrapOptions opts;
    opts.n_sim = 100;
    const auto pd = bias_corrected_bootstrap(fit_mle(t), t, opts);
    for (std::size_t s = 0; s < pd.n_sim; ++s) {
        for (std::size_t i = 0; i < t.m(); ++i) EXPECT_EQ(pd.reserve(s, i), 0.0);
    }
}

TEST(Bootstrap, RejectsTooFewReplicates) {
    const auto t = fixture_ratios(10);
    BootstrapOptions opts;
    opts.n_sim = 99;
    EXPECT_THROW(bias_corrected_bootstrap(fit_mle(t), t, opts), InputError);
}

TEST(Quantile, TypeSeven) {
    EXPECT_DOUBLE_EQ(empirical_quantile({1.0, 2.0, 3.0, 4.0}, 0.25), 1.75);
    EXPECT_DOUBLE_EQ(empirical_quantile({4.0, 1.0, 3.0, 2.0}, 0.5), 2.5);
    EXPECT_DOUBLE_EQ(empirical_quantile({1.0, 2.0, 3.0, 4.0}, 0.0), 1.0);
    EXPECT_DOUBLE_EQ(empirical_quantile({1.0, 2.0, 3.0, 4.0}, 1.0), 4.0);
    EXPECT_DOUBLE_EQ(empirical_quantile(std::vector<double>(50, 0.7), 0.025), 0.7);
    EXPECT_DOUBLE_EQ(empirical_quantile(std::vector<double>(50, 0.7), 0.975), 0.7);
    EXPECT_THROW(empirical_quantile({}, 0.5), std::invalid_argument);
}

}  // namespace
}  // namespace reserving
