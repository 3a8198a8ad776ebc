#include "reserving/gof.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <random>

namespace reserving {
namespace {

using testing::fixture_ratios;

double brute_force_ks(const std::vector<double>& u) {
    const auto n = static_cast<double>(u.size());
    double d = 0.0;
    for (double x : u) {
        double le = 0.0, lt = 0.0;
        for (double y : u) {
            le += y <= x;
            lt += y < x;
        }
        d = std::max({d, std::abs(le / n - x), std::abs(lt / n - x)});
    }
    return d;
}

TEST(BetaCdf, MatchesHighPrecisionOracle) {
    // Reference values from mpmath.betainc(regularized=True).
    EXPECT_NEAR(beta_cdf(0.3, 2.0, 5.0), 0.579825, 1e-14);
    EXPECT_NEAR(beta_cdf(0.9, 0.5, 0.5), 0.79516723530086654835, 1e-14);
    EXPECT_NEAR(beta_cdf(0.2, 120.5, 480.25), 0.49388718067080945745, 1e-12);
    EXPECT_NEAR(beta_cdf(0.21, 120.5, 480.25), 0.72238093034906466528, 1e-12);
    EXPECT_NEAR(beta_cdf(0.287, 1293.81, 3218.47), 0.51780498613377421134, 1e-10);
    EXPECT_NEAR(beta_cdf(0.05, 63.16, 1.0) / 6.7134455960646912772e-83, 1.0, 1e-10);
}

TEST(BetaCdf, IdentitiesAndEdges) {
    for (double x : {0.0, 0.1, 0.37, 0.5, 0.99, 1.0}) EXPECT_NEAR(beta_cdf(x, 1.0, 1.0), x, 1e-15);
    for (double x : {0.05, 0.4, 0.8}) {
        EXPECT_NEAR(beta_cdf(x, 3.5, 7.25), 1.0 - beta_cdf(1.0 - x, 7.25, 3.5), 1e-14);
    }
    EXPECT_EQ(beta_cdf(-0.1, 2.0, 3.0), 0.0);
    EXPECT_EQ(beta_cdf(1.1, 2.0, 3.0), 1.0);
    EXPECT_THROW(beta_cdf(0.5, 0.0, 1.0), std::domain_error);
    EXPECT_THROW(beta_cdf(0.5, 1.0, -1.0), std::domain_error);
    EXPECT_THROW(beta_cdf(std::nan(""), 1.0, 1.0), std::domain_error);
}

TEST(PitIndexSet, Counts) {
    // 55 staircase cells, and for 18 years 80 more cells minus the (i, n)
    // cells of the eight history rows i <= m - n.
    EXPECT_EQ(pit_index_set(fixture_ratios(10)).size(), 55u);
    EXPECT_EQ(pit_index_set(fixture_ratios(18)).size(), 127u);
}

TEST(PitTransform, UnitShapesGiveRatios) {
    const LossRatioTriangle t({2000, 2001}, {{0.2, 0.3}, {0.4}}, 2);
    const DirichletParams th{{1.0, 1.0}, 1.0, {1.0, 1.0}};
    // Row 2000: 0.2 / 1 under Beta(1, 2), 0.3 / 0.8 under Beta(1, 1); row 2001: 0.4 under Beta(1, 2).
    const auto u = pit_transform(th, t);
    ASSERT_EQ(u.size(), 3u);
    EXPECT_NEAR(u[0], 1.0 - 0.8 * 0.8, 1e-15);
    EXPECT_NEAR(u[1], 0.375, 1e-15);
    EXPECT_NEAR(u[2], 1.0 - 0.6 * 0.6, 1e-15);

    const DirichletParams low{{1.0, 1.0}, 1.0, {0.3, 1.0}};
    EXPECT_THROW(pit_transform(low, t), std::domain_error);
}

TEST(PitTransform, UniformUnderTheModel) {
    const auto t = fixture_ratios(10);
    const auto theta = fit_mle(t).theta;
    const double n = static_cast<double>(pit_index_set(t).size());
    // Stephens' approximation to the 5% critical value of the KS statistic.
    const double critical = 1.358 / (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n));
    int pass = 0;
    constexpr int kSims = 200;
    for (int s = 0; s < kSims; ++s) {
        auto rng = make_stream(77, {static_cast<std::uint64_t>(s)});
        const auto sim = simulate_triangle(theta, t, rng);
        pass += ks_statistic(pit_transform(theta, sim)) <= critical;
    }
    EXPECT_GE(pass, static_cast<int>(0.9 * kSims));
}

TEST(KsStatistic, KnownValues) {
    EXPECT_DOUBLE_EQ(ks_statistic({0.5}), 0.5);
    for (int n : {1, 4, 19}) {
        std::vector<double> u;
        for (int i = 1; i <= n; ++i) u.push_back(static_cast<double>(i) / (n + 1));
        EXPECT_NEAR(ks_statistic(u), 1.0 / (n + 1), 1e-15);
    }
    EXPECT_THROW(ks_statistic({}), std::invalid_argument);
}

TEST(KsStatistic, AgreesWithBruteForce) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<double> u(1 + rep % 37);
        for (double& x : u) x = rep % 3 == 0 ? std::pow(unif(rng), 2.0) : unif(rng);
        if (rep % 5 == 0 && u.size() > 2) u[1] = u[0];  // ties
        EXPECT_NEAR(ks_statistic(u), brute_force_ks(u), 1e-15);
    }
}

TEST(GofTest, FixtureDoesNotReject) {
    for (std::size_t years : {10u, 18u}) {
        GofOptions opts;
        opts.seed = 1;
        const auto r = gof_test(fixture_ratios(years), opts);
        EXPECT_FALSE(r.reject) << years << " years: T = " << r.t_obs << " outside [" << r.lower << ", "
                               << r.upper << "]";
        EXPECT_LT(r.lower, r.upper);
        EXPECT_EQ(r.null_sample.size(), 500u);
        const auto j = nlohmann::json::parse(to_json(r));
        EXPECT_EQ(j["reject"], false);
        EXPECT_EQ(j["n_boot"], 500);
    }
}

TEST(GofTest, RejectsAGrosslyMisspecifiedProcess) {
    // Alternating rows: fast geometric decay against slowly rising payments.
    int rejections = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        std::mt19937_64 g(seed);
        std::normal_distribution<double> z(0.0, 1.0);
        std::vector<int> years;
        std::vector<std::vector<double>> rows;
        const std::size_t m = 18, n = 10;
        for (std::size_t i = 0; i < m; ++i) {
            years.push_back(2000 + static_cast<int>(i));
            std::vector<double> r;
            for (std::size_t j = 0; j < std::min(n, m - i); ++j) {
                const double base = i % 2 ? 0.3 * std::pow(0.6, static_cast<double>(j)) : 0.02 + 0.01 * j;
                r.push_back(base * (1.0 + 0.001 * z(g)));
            }
            rows.push_back(r);
        }
        GofOptions opts;
        opts.seed = seed;
        opts.n_boot = 200;
        rejections += gof_test(LossRatioTriangle(years, rows, n), opts).reject;
    }
    EXPECT_GT(rejections, 5);
}

TEST(GofTest, InputValidation) {
    const auto t = fixture_ratios(10);
    GofOptions opts;
    opts.alpha = 1.5;
    EXPECT_THROW(gof_test(t, opts), InputError);
    opts.alpha = 0.0;
    EXPECT_THROW(gof_test(t, opts), InputError);
    opts.alpha = 0.05;
    opts.n_boot = 10;
    EXPECT_THROW(gof_test(t, opts), InputError);
}

}  // namespace
}  // namespace reserving
