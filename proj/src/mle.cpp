#include "reserving/mle.hpp"

#include "reserving/errors.hpp"
#include "reserving/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace reserving {

namespace {

// Largest Newton move allowed in log a per iteration.
constexpr double kMaxLogStep = 5.0;

struct RowSums {
    double paid;  // sum_{j<=k} a_j
    double tail;  // sum_{j>k} a_j
};

RowSums row_sums(std::span<const double> a, std::size_t k) {
    RowSums s{0.0, 0.0};
    for (std::size_t j = 0; j < a.size(); ++j) (j < k ? s.paid : s.tail) += a[j];
    return s;
}

std::vector<double> exp_all(const Eigen::VectorXd& u) {
    std::vector<double> a(static_cast<std::size_t>(u.size()));
    for (Eigen::Index j = 0; j < u.size(); ++j) a[static_cast<std::size_t>(j)] = std::exp(u[j]);
    return a;
}

double inf_norm(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

std::vector<double> profile_phi(std::span<const double> a, double b_n, const LossRatioTriangle& t) {
    if (a.size() != t.n()) throw std::invalid_argument("profile_phi: a has wrong length");
    std::vector<double> phi(t.m());
    for (std::size_t i = 0; i < t.m(); ++i) {
        auto sums = row_sums(a, t.observed(i));
        double s = t.observed_cumulative(i);
        // Written as S + S*(tail + b_n - 1)/paid so that a complete row at
        // b_n = 1 gives phi == S exactly.
        phi[i] = s + s * (sums.tail + (b_n - 1.0)) / sums.paid;
    }
    return phi;
}

double profiled_loglik(std::span<const double> a, const LossRatioTriangle& t) {
    DirichletParams theta{std::vector<double>(a.begin(), a.end()), 1.0, profile_phi(a, 1.0, t)};
    return total_loglik(theta, t);
}

Eigen::VectorXd profiled_gradient(std::span<const double> a, const LossRatioTriangle& t) {
    const std::size_t n = t.n();
    if (a.size() != n) throw std::invalid_argument("profiled_gradient: a has wrong length");
    const double a0 = std::accumulate(a.begin(), a.end(), 0.0);
    const double psi_total = digamma(a0 + 1.0);
    std::vector<double> psi_a(n);
    for (std::size_t j = 0; j < n; ++j) psi_a[j] = digamma(a[j]);

    Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < t.m(); ++i) {
        auto y = t.row(i);
        const std::size_t k = y.size();
        auto sums = row_sums(a, k);
        const double s = t.observed_cumulative(i);
        const double log_paid_share = std::log(sums.paid / a0);
        for (std::size_t j = 0; j < k; ++j) {
            g[static_cast<Eigen::Index>(j)] +=
                psi_total - psi_a[j] + std::log(y[j] / s) + log_paid_share;
        }
        if (k < n) {
            const double later = psi_total - digamma(sums.tail + 1.0) + std::log(sums.tail / a0);
            for (std::size_t j = k; j < n; ++j) g[static_cast<Eigen::Index>(j)] += later;
        }
    }
    return g;
}

Eigen::MatrixXd profiled_hessian(std::span<const double> a, const LossRatioTriangle& t) {
    const std::size_t n = t.n();
    if (a.size() != n) throw std::invalid_argument("profiled_hessian: a has wrong length");
    const auto N = static_cast<Eigen::Index>(n);
    const double a0 = std::accumulate(a.begin(), a.end(), 0.0);
    const double m = static_cast<double>(t.m());

    Eigen::MatrixXd h = Eigen::MatrixXd::Constant(N, N, m * (trigamma(a0 + 1.0) - 1.0 / a0));
    for (std::size_t i = 0; i < t.m(); ++i) {
        const std::size_t k = t.observed(i);
        auto sums = row_sums(a, k);
        const auto K = static_cast<Eigen::Index>(k);
        h.topLeftCorner(K, K).array() += 1.0 / sums.paid;
        for (Eigen::Index j = 0; j < K; ++j) h(j, j) -= trigamma(a[static_cast<std::size_t>(j)]);
        if (k < n) {
            const double later = 1.0 / sums.tail - trigamma(sums.tail + 1.0);
            h.bottomRightCorner(N - K, N - K).array() += later;
        }
    }
    return h;
}

std::vector<double> default_start(const LossRatioTriangle& t) {
    const std::size_t n = t.n();
    std::vector<double> sum(n, 0.0);
    std::vector<std::size_t> count(n, 0);
    for (std::size_t i = 0; i < t.m(); ++i) {
        auto y = t.row(i);
        for (std::size_t j = 0; j < y.size(); ++j) {
            sum[j] += y[j];
            ++count[j];
        }
    }
    std::vector<double> a(n);
    for (std::size_t j = 0; j < n; ++j) a[j] = count[j] ? sum[j] / static_cast<double>(count[j]) : 0.0;
    const double total = std::accumulate(a.begin(), a.end(), 0.0);
    for (auto& x : a) x = 100.0 * x / total;
    return a;
}

FitResult fit_mle(const LossRatioTriangle& t, const FitOptions& opts) {
    const std::size_t n = t.n();
    std::size_t deepest = 0;
    for (std::size_t i = 0; i < t.m(); ++i) deepest = std::max(deepest, t.observed(i));
    if (deepest < n) {
        throw InputError("fit_mle: development year " + std::to_string(deepest + 1) +
                         " is never observed, so a_" + std::to_string(deepest + 1) +
                         " is not identified");
    }

    std::vector<double> a = opts.start ? *opts.start : default_start(t);
    if (a.size() != n) throw std::invalid_argument("fit_mle: start has wrong length");
    Eigen::VectorXd u(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) {
        if (!(a[j] > 0.0)) throw std::invalid_argument("fit_mle: start must be positive");
        u[static_cast<Eigen::Index>(j)] = std::log(a[j]);
    }

    double ll = profiled_loglik(a, t);
    if (!std::isfinite(ll)) throw NumericalError("fit_mle: log-likelihood not finite at start");

    FitResult result;
    result.loglik_trace.push_back(ll);
    bool small_step = false;
    int it = 0;
    for (; it < opts.max_iterations; ++it) {
        Eigen::Map<const Eigen::VectorXd> av(a.data(), static_cast<Eigen::Index>(n));
        Eigen::VectorXd g = profiled_gradient(a, t);
        Eigen::VectorXd gu = av.cwiseProduct(g);
        result.gradient_norm = inf_norm(gu);
        if (result.gradient_norm < opts.gradient_tolerance) {
            result.converged = true;
            break;
        }
        if (small_step) {
            // The last accepted move was below the step tolerance.
            result.converged = true;
            break;
        }

        // Chain rule into u = log a: H_u = D H D + diag(a .* g).
        Eigen::MatrixXd hu = av.asDiagonal() * profiled_hessian(a, t) * av.asDiagonal();
        hu.diagonal() += gu;

        Eigen::VectorXd newton;
        bool use_newton = false;
        Eigen::LLT<Eigen::MatrixXd> llt(-hu);
        if (llt.info() == Eigen::Success) {
            newton = llt.solve(gu);
            use_newton = newton.allFinite() && newton.dot(gu) > 0.0;
        }
        Eigen::VectorXd gradient_step = gu / std::max(1.0, inf_norm(gu));

        // ll sums m terms of size ~ a_0 ln a_0, so it carries absolute
        // rounding error far above eps * |ll| when a_0 is large.
        const double a0 = av.sum();
        const double noise = 1e-14 * static_cast<double>(t.m()) * (a0 + 1.0) * std::log(a0 + 2.0);

        bool accepted = false;
        for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
            const bool newton_pass = attempt == 0 && use_newton;
            if (attempt == 0 && !use_newton) continue;
            Eigen::VectorXd step = newton_pass ? newton : gradient_step;
            const double size = inf_norm(step);
            if (size > kMaxLogStep) step *= kMaxLogStep / size;
            for (int h = 0; h <= opts.max_halvings; ++h) {
                Eigen::VectorXd trial = u + step;
                auto ta = exp_all(trial);
                double tll = profiled_loglik(ta, t);
                bool better = std::isfinite(tll) && tll >= ll;
                if (!better && std::isfinite(tll) && tll >= ll - noise) {
                    // Differences at rounding level: let the gradient decide.
                    Eigen::Map<const Eigen::VectorXd> tv(ta.data(), static_cast<Eigen::Index>(n));
                    better = inf_norm(tv.cwiseProduct(profiled_gradient(ta, t))) < result.gradient_norm;
                }
                if (better) {
                    // |delta a| / a = |exp(delta u) - 1|
                    double rel = (trial - u).unaryExpr([](double d) { return std::abs(std::expm1(d)); })
                                     .maxCoeff();
                    small_step = rel < opts.step_tolerance;
                    u = trial;
                    a = std::move(ta);
                    ll = tll;
                    result.loglik_trace.push_back(ll);
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
        }
        if (!accepted) {
            // No ascent in either direction: the iterate sits at the optimum to
            // working precision.
            result.converged = true;
            break;
        }
    }
    result.iterations = it;
    if (!result.converged) {
        throw NumericalError("fit_mle: Newton-Raphson did not converge in " +
                             std::to_string(opts.max_iterations) + " iterations");
    }
    result.theta = DirichletParams{a, 1.0, profile_phi(a, 1.0, t)};
    result.loglik = ll;
    result.accident_years = t.accident_years();
    return result;
}

}  // namespace reserving
