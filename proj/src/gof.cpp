#include "reserving/gof.hpp"

#include "reserving/errors.hpp"
#include "reserving/parallel.hpp"
#include "reserving/special_functions.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace reserving {

namespace {

constexpr std::uint64_t kStageNull = 4;
constexpr double kClampSlack = 1e-9;

// Modified Lentz evaluation of the continued fraction for I_x(a, b).
double beta_fraction(double x, double a, double b) {
    constexpr int kMaxTerms = 100000;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxTerms; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) return h;
    }
    throw NumericalError("beta_cdf: continued fraction did not converge");
}

std::size_t resolve_threads(std::size_t threads) { return threads ? threads : default_threads(); }

}  // namespace

double beta_cdf(double x, double a, double b) {
    if (!(a > 0.0) || !(b > 0.0)) throw std::domain_error("beta_cdf: shapes must be positive");
    if (std::isnan(x)) throw std::domain_error("beta_cdf: x is NaN");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double log_front = log_gamma(a + b) - log_gamma(a) - log_gamma(b) + a * std::log(x) +
                             b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_fraction(x, a, b) / a;
    return 1.0 - front * beta_fraction(1.0 - x, b, a) / b;
}

std::vector<std::pair<std::size_t, std::size_t>> pit_index_set(const LossRatioTriangle& t) {
    std::vector<std::pair<std::size_t, std::size_t>> s;
    for (std::size_t i = 0; i < t.m(); ++i) {
        std::size_t k_max = t.observed(i);
        if (t.is_fully_developed_history(i)) --k_max;
        for (std::size_t k = 1; k <= k_max; ++k) s.emplace_back(i, k);
    }
    return s;
}

std::vector<double> pit_transform(const DirichletParams& theta, const LossRatioTriangle& t) {
    theta.validate();
    if (theta.n() != t.n() || theta.phi.size() != t.m()) {
        throw std::invalid_argument("pit_transform: parameters do not match the triangle");
    }
    std::vector<double> out;
    for (auto [i, k] : pit_index_set(t)) {
        auto y = t.row(i);
        double paid_before = 0.0;
        for (std::size_t j = 0; j + 1 < k; ++j) paid_before += y[j];
        const double remaining = theta.phi[i] - paid_before;
        double ratio = remaining > 0.0 ? y[k - 1] / remaining : std::numeric_limits<double>::infinity();
        if (ratio > 1.0 && ratio <= 1.0 + kClampSlack) ratio = 1.0;
        if (!(ratio > 0.0 && ratio <= 1.0)) {
            throw std::domain_error("pit_transform: accident year " + std::to_string(t.accident_year(i)) +
                                    ", development year " + std::to_string(k) +
                                    " lies outside the support of the fitted model");
        }
        const double later = theta.a_sum(k + 1, theta.n()) + theta.b_n;
        out.push_back(beta_cdf(ratio, theta.a[k - 1], later));
    }
    return out;
}

double ks_statistic(std::vector<double> u) {
    if (u.empty()) throw std::invalid_argument("ks_statistic: empty sample");
    std::sort(u.begin(), u.end());
    const auto n = static_cast<double>(u.size());
    double d = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double rank = static_cast<double>(i);
        d = std::max({d, (rank + 1.0) / n - u[i], u[i] - rank / n});
    }
    return d;
}

GofResult gof_test(const LossRatioTriangle& t, const GofOptions& opts) {
    if (!(opts.alpha > 0.0 && opts.alpha < 1.0)) {
        throw InputError("gof: alpha must lie in (0, 1)");
    }
    if (opts.n_boot < 20) throw InputError("gof: n_boot must be at least 20");

    const auto fit = fit_mle(t, opts.fit);
    GofResult r;
    r.alpha = opts.alpha;
    r.n_boot = opts.n_boot;
    r.index_size = pit_index_set(t).size();
    r.t_obs = ks_statistic(pit_transform(fit.theta, t));

    FitOptions warm = opts.fit;
    warm.start = fit.theta.a;
    const std::size_t n = opts.n_boot;
    const std::size_t budget = 10 * n;
    r.null_sample.assign(n, 0.0);
    std::atomic<std::size_t> failed{0};
    parallel_for(n, resolve_threads(opts.threads), [&](std::size_t s) {
        for (std::uint64_t attempt = 0;; ++attempt) {
            if (failed.load() + n > budget) {
                throw NumericalError("gof: too many failed bootstrap refits");
            }
            auto rng = make_stream(opts.seed, {kStageNull, s, attempt});
            try {
                auto sim = simulate_triangle(fit.theta, t, rng);
                auto refit = fit_mle(sim, warm);
                r.null_sample[s] = ks_statistic(pit_transform(refit.theta, sim));
                return;
            } catch (const InputError&) {
            } catch (const NumericalError&) {
            } catch (const std::domain_error&) {
            }
            ++failed;
        }
    });
    r.failed_refits = failed.load();
    r.lower = empirical_quantile(r.null_sample, opts.alpha / 2.0);
    r.upper = empirical_quantile(r.null_sample, 1.0 - opts.alpha / 2.0);
    r.reject = r.t_obs < r.lower || r.t_obs > r.upper;
    return r;
}

std::string to_json(const GofResult& r) {
    nlohmann::ordered_json j;
    j["t_obs"] = r.t_obs;
    j["lower"] = r.lower;
    j["upper"] = r.upper;
    j["alpha"] = r.alpha;
    j["n_boot"] = r.n_boot;
    j["reject"] = r.reject;
    return j.dump(2);
}

}  // namespace reserving
