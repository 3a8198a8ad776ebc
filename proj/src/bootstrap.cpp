#include "reserving/bootstrap.hpp"

#include "reserving/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace reserving {

namespace {

constexpr std::uint64_t kStageOne = 1;
constexpr std::uint64_t kStageTwo = 2;
constexpr std::uint64_t kStageFuture = 3;
constexpr std::size_t kAttemptBudget = 10;

std::vector<double> mean_of(const std::vector<FitResult>& fits, bool use_a, std::size_t size) {
    std::vector<double> out(size, 0.0);
    for (const auto& f : fits) {
        const auto& v = use_a ? f.theta.a : f.theta.phi;
        for (std::size_t j = 0; j < size; ++j) out[j] += v[j];
    }
    for (auto& x : out) x /= static_cast<double>(fits.size());
    return out;
}

}  // namespace

LossRatioTriangle simulate_triangle(const DirichletParams& theta, const LossRatioTriangle& t, Rng& rng) {
    if (theta.n() != t.n() || theta.phi.size() != t.m()) {
        throw std::invalid_argument("simulate_triangle: parameters do not match the triangle shape");
    }
    std::vector<std::vector<double>> rows(t.m());
    for (std::size_t i = 0; i < t.m(); ++i) {
        auto draw = sample_row(theta, i, rng);
        draw.cells.resize(t.observed(i));
        rows[i] = std::move(draw.cells);
    }
    return LossRatioTriangle(t.accident_years(), std::move(rows), t.n());
}

FitResult bootstrap_once(const DirichletParams& theta_gen, const LossRatioTriangle& t, Rng& rng,
                         const FitOptions& opts) {
    auto sim = simulate_triangle(theta_gen, t, rng);
    FitOptions warm = opts;
    if (!warm.start) warm.start = theta_gen.a;
    return fit_mle(sim, warm);
}

std::vector<FitResult> bootstrap_refits(const DirichletParams& theta_gen, const LossRatioTriangle& t,
                                        std::size_t n, std::uint64_t seed, std::uint64_t stage,
                                        std::size_t threads, const FitOptions& opts,
                                        std::size_t* failures) {
    theta_gen.validate();
    std::vector<FitResult> out(n);
    std::atomic<std::size_t> failed{0};
    const std::size_t budget = kAttemptBudget * n;
    parallel_for(n, threads, [&](std::size_t s) {
        for (std::uint64_t attempt = 0;; ++attempt) {
            if (failed.load() + n > budget) {
                throw NumericalError("bootstrap: too many failed refits (" +
                                     std::to_string(failed.load()) + " for " + std::to_string(n) +
                                     " replicates)");
            }
            auto rng = make_stream(seed, {stage, s, attempt});
            try {
                out[s] = bootstrap_once(theta_gen, t, rng, opts);
                return;
            } catch (const InputError&) {
            } catch (const NumericalError&) {
            }
            ++failed;
        }
    });
    if (failures) *failures = failed.load();
    return out;
}

BiasCorrection bias_correction(const DirichletParams& mle, const std::vector<FitResult>& stage_one) {
    if (stage_one.empty()) throw std::invalid_argument("bias_correction: no replicates");
    BiasCorrection bc;
    bc.avg.a = mean_of(stage_one, true, mle.n());
    bc.avg.phi = mean_of(stage_one, false, mle.phi.size());
    bc.avg.b_n = 1.0;
    bc.mod.a.resize(mle.n());
    bc.mod.phi.resize(mle.phi.size());
    for (std::size_t j = 0; j < mle.n(); ++j) bc.mod.a[j] = mle.a[j] * mle.a[j] / bc.avg.a[j];
    for (std::size_t i = 0; i < mle.phi.size(); ++i) {
        bc.mod.phi[i] = mle.phi[i] * mle.phi[i] / bc.avg.phi[i];
    }
    // Every refit has b_n = 1, so the ratio for b_n is 1.
    bc.mod.b_n = 1.0;
    return bc;
}

PredictiveDistribution predictive_from_draws(const std::vector<DirichletParams>& draws,
                                             const LossRatioTriangle& t, std::uint64_t seed,
                                             std::uint64_t stage, std::size_t threads) {
    if (draws.empty()) throw std::invalid_argument("predictive_from_draws: no draws");
    PredictiveDistribution pd;
    pd.n_sim = draws.size();
    pd.seed = seed;
    pd.accident_years = t.accident_years();
    for (std::size_t i = 0; i < t.m(); ++i) pd.observed.push_back(t.observed_cumulative(i));
    pd.thetas = draws;
    pd.unpaid_cells.assign(draws.size(), std::vector<std::vector<double>>(t.m()));
    pd.ultimate.assign(draws.size(), pd.observed);
    std::vector<std::size_t> clamped(draws.size(), 0);

    parallel_for(draws.size(), threads, [&](std::size_t s) {
        auto rng = make_stream(seed, {stage, s});
        const auto& theta = draws[s];
        for (std::size_t i = 0; i < t.m(); ++i) {
            const std::size_t k = t.observed(i);
            if (k == t.n()) continue;
            auto& cells = pd.unpaid_cells[s][i];
            if (theta.phi[i] <= pd.observed[i]) {
                cells.assign(t.n() - k, 0.0);
                ++clamped[s];
                continue;
            }
            cells = sample_future_row(theta, t, i, rng);
            for (double c : cells) pd.ultimate[s][i] += c;
        }
    });
    for (auto c : clamped) pd.clamped_rows += c;
    return pd;
}

PredictiveDistribution bias_corrected_bootstrap(const FitResult& fit, const LossRatioTriangle& t,
                                                const BootstrapOptions& opts) {
    if (opts.n_sim < 100) {
        throw InputError("bootstrap: n_sim must be at least 100 (got " + std::to_string(opts.n_sim) + ")");
    }
    std::size_t fail_one = 0;
    std::size_t fail_two = 0;
    auto stage_one = bootstrap_refits(fit.theta, t, opts.n_sim, opts.seed, kStageOne, opts.threads,
                                      opts.fit, &fail_one);
    auto bc = bias_correction(fit.theta, stage_one);

    FitOptions warm = opts.fit;
    warm.start = fit.theta.a;
    auto stage_two = bootstrap_refits(bc.mod, t, opts.n_sim, opts.seed, kStageTwo, opts.threads,
                                      warm, &fail_two);

    std::vector<DirichletParams> draws;
    draws.reserve(stage_two.size());
    for (auto& f : stage_two) draws.push_back(std::move(f.theta));
    auto pd = predictive_from_draws(draws, t, opts.seed, kStageFuture, opts.threads);
    pd.failed_refits = fail_one + fail_two;
    pd.correction = std::move(bc);
    return pd;
}

double empirical_quantile(std::vector<double> values, double p) {
    if (values.empty()) throw std::invalid_argument("empirical_quantile: no values");
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("empirical_quantile: p outside [0,1]");
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<ReservePrediction> summarize(const PredictiveDistribution& pd, double level,
                                         const std::string& method) {
    if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("summarize: level outside (0,1)");
    if (pd.ultimate.empty()) throw std::invalid_argument("summarize: no replicates");
    const double tail = (1.0 - level) / 2.0;
    std::vector<ReservePrediction> out;
    for (std::size_t i = 0; i < pd.observed.size(); ++i) {
        std::vector<double> u;
        u.reserve(pd.ultimate.size());
        double sum = 0.0;
        for (const auto& rep : pd.ultimate) {
            u.push_back(rep[i]);
            sum += rep[i];
        }
        ReservePrediction p;
        p.accident_year = pd.accident_years[i];
        p.method = method;
        p.observed = pd.observed[i];
        p.ultimate = sum / static_cast<double>(u.size());
        p.reserve = p.ultimate - p.observed;
        p.interval = Interval{empirical_quantile(u, tail), empirical_quantile(u, 1.0 - tail)};
        out.push_back(std::move(p));
    }
    return out;
}

ParameterSummary summarize_parameters(const PredictiveDistribution& pd) {
    if (pd.thetas.empty()) throw std::invalid_argument("summarize_parameters: no replicates");
    const std::size_t n = pd.thetas.front().n();
    const auto count = static_cast<double>(pd.thetas.size());
    ParameterSummary s;
    s.mean_a.assign(n, 0.0);
    s.sd_a.assign(n, 0.0);
    for (const auto& th : pd.thetas) {
        for (std::size_t j = 0; j < n; ++j) s.mean_a[j] += th.a[j] / count;
    }
    for (const auto& th : pd.thetas) {
        for (std::size_t j = 0; j < n; ++j) {
            const double d = th.a[j] - s.mean_a[j];
            s.sd_a[j] += d * d;
        }
    }
    for (auto& v : s.sd_a) v = count > 1.0 ? std::sqrt(v / (count - 1.0)) : 0.0;
    return s;
}

void write_predictive_csv(const PredictiveDistribution& pd, std::ostream& out) {
    out << "replicate,accident_year,ultimate_ratio,reserve_ratio\n";
    char buf[128];
    for (std::size_t s = 0; s < pd.ultimate.size(); ++s) {
        for (std::size_t i = 0; i < pd.observed.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%zu,%d,%.10g,%.10g\n", s + 1, pd.accident_years[i],
                          pd.ultimate[s][i], pd.reserve(s, i));
            out << buf;
        }
    }
}

}  // namespace reserving
