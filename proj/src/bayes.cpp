#include "reserving/bayes.hpp"

#include "reserving/errors.hpp"
#include "reserving/mle.hpp"
#include "reserving/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>

namespace reserving {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::uint64_t kStageChain = 6;
constexpr std::uint64_t kStagePredict = 5;
constexpr std::size_t kBatch = 50;
constexpr std::size_t kStallLimit = 2000;
constexpr double kTargetAcceptance = 0.3;
constexpr std::size_t kCovarianceStart = 200;
constexpr std::size_t kCovarianceUpdate = 100;

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Maps between the constrained state and the unconstrained sampler coordinates.
class Transform {
public:
    Transform(const LossRatioTriangle& t, const BayesSpec& spec) : t_(t), spec_(spec) {
        for (std::size_t i = 0; i < t.m(); ++i) paid_.push_back(t.observed_cumulative(i));
        max_paid_ = *std::max_element(paid_.begin(), paid_.end());
    }

    std::size_t dim() const { return t_.n() + 2 + t_.m(); }

    // State plus log |d state / d x|.
    BayesState unpack(const Eigen::VectorXd& x, double& log_jac) const {
        const std::size_t n = t_.n();
        const std::size_t m = t_.m();
        BayesState s;
        s.a.resize(n);
        log_jac = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            s.a[j] = std::exp(x[idx(j)]);
            log_jac += x[idx(j)];
        }
        const double a0 = std::accumulate(s.a.begin(), s.a.end(), 0.0);
        s.b_n = spec_.b_lower(a0) + std::exp(x[idx(n)]);
        log_jac += x[idx(n)];
        s.phi_hyper = max_paid_ + std::exp(x[idx(n + 1)]);
        log_jac += x[idx(n + 1)];
        s.phi.resize(m);
        for (std::size_t i = 0; i < m; ++i) {
            const double z = x[idx(n + 2 + i)];
            const double sg = logistic(z);
            const double width = s.phi_hyper - paid_[i];
            s.phi[i] = paid_[i] + width * sg;
            // log(width) + log(sg) + log(1 - sg), stable for large |z|
            log_jac += std::log(width) - std::abs(z) - 2.0 * std::log1p(std::exp(-std::abs(z)));
        }
        return s;
    }

    Eigen::VectorXd pack(const BayesState& s) const {
        const std::size_t n = t_.n();
        Eigen::VectorXd x(static_cast<Eigen::Index>(dim()));
        for (std::size_t j = 0; j < n; ++j) x[idx(j)] = std::log(s.a[j]);
        const double a0 = std::accumulate(s.a.begin(), s.a.end(), 0.0);
        x[idx(n)] = std::log(s.b_n - spec_.b_lower(a0));
        x[idx(n + 1)] = std::log(s.phi_hyper - max_paid_);
        for (std::size_t i = 0; i < t_.m(); ++i) {
            const double p = (s.phi[i] - paid_[i]) / (s.phi_hyper - paid_[i]);
            x[idx(n + 2 + i)] = std::log(p / (1.0 - p));
        }
        return x;
    }

    double log_target(const Eigen::VectorXd& x) const {
        double log_jac = 0.0;
        auto s = unpack(x, log_jac);
        const double lp = log_posterior(s, t_, spec_);
        if (!std::isfinite(lp)) return kNegInf;
        return lp + log_jac;
    }

    double max_paid() const { return max_paid_; }
    const std::vector<double>& paid() const { return paid_; }

private:
    static Eigen::Index idx(std::size_t k) { return static_cast<Eigen::Index>(k); }

    const LossRatioTriangle& t_;
    const BayesSpec& spec_;
    std::vector<double> paid_;
    double max_paid_ = 0.0;
};

BayesState initial_state(const LossRatioTriangle& t, const BayesSpec& spec, const Transform& tr,
                         const std::vector<double>& a_hat, Rng& rng) {
    std::normal_distribution<double> jitter(0.0, 0.05);
    BayesState s;
    for (double a : a_hat) s.a.push_back(a * std::exp(jitter(rng)));
    const double a0 = std::accumulate(s.a.begin(), s.a.end(), 0.0);
    const double lower = spec.b_lower(a0);
    // Overdispersed start: b_n uniform over the lower part of its support.
    std::uniform_real_distribution<double> spread(0.05, 0.6);
    s.b_n = lower + spread(rng) * (spec.b_cap_multiple * a0 - lower);
    s.phi = profile_phi(s.a, s.b_n, t);
    const double top = *std::max_element(s.phi.begin(), s.phi.end());
    s.phi_hyper = std::min(top * 1.1, 0.5 * (tr.max_paid() + spec.phi_hyper_cap));
    for (std::size_t i = 0; i < t.m(); ++i) {
        const double lo = tr.paid()[i];
        s.phi[i] = std::clamp(s.phi[i], lo + 0.01 * (s.phi_hyper - lo), lo + 0.99 * (s.phi_hyper - lo));
    }
    return s;
}

struct ChainOutput {
    std::vector<std::vector<double>> draws;
    double joint_acceptance = 0.0;
    double coord_acceptance = 0.0;
};

std::vector<double> flatten(const BayesState& s) {
    std::vector<double> v(s.a);
    v.push_back(s.b_n);
    v.insert(v.end(), s.phi.begin(), s.phi.end());
    v.push_back(s.phi_hyper);
    return v;
}

ChainOutput run_chain(const LossRatioTriangle& t, const BayesSpec& spec, const Transform& tr,
                      const std::vector<double>& a_hat, std::size_t chain) {
    auto rng = make_stream(spec.seed, {kStageChain, chain});
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    const auto d = static_cast<Eigen::Index>(tr.dim());
    Eigen::VectorXd x = tr.pack(initial_state(t, spec, tr, a_hat, rng));
    double lp = tr.log_target(x);
    if (!std::isfinite(lp)) throw NumericalError("bayes: initial state has zero posterior density");

    Eigen::VectorXd coord_scale = Eigen::VectorXd::Constant(d, 0.1);
    Eigen::VectorXd coord_accepts = Eigen::VectorXd::Zero(d);
    double joint_scale = 2.38 * 2.38 / static_cast<double>(d);
    std::size_t joint_accepts = 0;
    std::size_t joint_tries = 0;
    Eigen::MatrixXd chol;  // empty until enough warmup history
    // Principal directions of the learned covariance, each with its own
    // step size. Long ridges (b_n, phi_hyper and the phi_i moving together)
    // are crossed along the leading direction.
    Eigen::MatrixXd axes;
    Eigen::VectorXd axis_scale = Eigen::VectorXd::Constant(d, 2.4);
    Eigen::VectorXd axis_accepts = Eigen::VectorXd::Zero(d);

    // Running moments of x for the joint proposal covariance.
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(d, d);
    std::size_t count = 0;

    ChainOutput out;
    std::size_t post_joint = 0, post_joint_acc = 0, post_coord = 0, post_coord_acc = 0;
    std::size_t stalled = 0;
    std::size_t batch_index = 0;

    auto accept = [&](const Eigen::VectorXd& y) {
        const double ly = tr.log_target(y);
        if (std::isfinite(ly) && std::log(unif(rng)) < ly - lp) {
            x = y;
            lp = ly;
            return true;
        }
        return false;
    };

    for (std::size_t it = 0; it < spec.iterations; ++it) {
        const bool warm = it < spec.warmup;
        bool moved = false;

        if (chol.size() > 0) {
            Eigen::VectorXd e(d);
            for (Eigen::Index k = 0; k < d; ++k) e[k] = normal(rng);
            const bool ok = accept(x + std::sqrt(joint_scale) * (chol * e));
            moved |= ok;
            ++joint_tries;
            joint_accepts += ok;
            if (!warm) {
                ++post_joint;
                post_joint_acc += ok;
            }
        }
        if (axes.size() > 0) {
            for (Eigen::Index k = 0; k < d; ++k) {
                const bool ok = accept(x + axis_scale[k] * normal(rng) * axes.col(k));
                moved |= ok;
                axis_accepts[k] += ok;
                if (!warm) {
                    ++post_coord;
                    post_coord_acc += ok;
                }
            }
        }
        for (Eigen::Index k = 0; k < d; ++k) {
            Eigen::VectorXd y = x;
            y[k] += coord_scale[k] * normal(rng);
            const bool ok = accept(y);
            moved |= ok;
            coord_accepts[k] += ok;
            if (!warm) {
                ++post_coord;
                post_coord_acc += ok;
            }
        }
        stalled = moved ? 0 : stalled + 1;
        if (stalled >= kStallLimit) {
            throw NumericalError("bayes: chain " + std::to_string(chain + 1) + " rejected every proposal for " +
                                 std::to_string(kStallLimit) + " iterations");
        }

        if (warm) {
            if (it == spec.warmup / 2) {
                // Forget the early transient.
                mean.setZero();
                scatter.setZero();
                count = 0;
            }
            if (it >= kCovarianceStart) {
                ++count;
                const Eigen::VectorXd delta = x - mean;
                mean += delta / static_cast<double>(count);
                scatter += delta * (x - mean).transpose();
            }
            if (count > static_cast<std::size_t>(5 * d) && it % kCovarianceUpdate == 0) {
                Eigen::MatrixXd cov = scatter / static_cast<double>(count - 1);
                cov.diagonal().array() += 1e-10;
                Eigen::LLT<Eigen::MatrixXd> llt(cov);
                if (llt.info() == Eigen::Success) chol = llt.matrixL();
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
                if (eig.info() == Eigen::Success) {
                    axes = eig.eigenvectors() *
                           eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
                }
            }
            if ((it + 1) % kBatch == 0) {
                ++batch_index;
                const double step = std::min(0.5, 2.0 / std::sqrt(static_cast<double>(batch_index)));
                for (Eigen::Index k = 0; k < d; ++k) {
                    const double rate = coord_accepts[k] / static_cast<double>(kBatch);
                    coord_scale[k] *= std::exp(rate > kTargetAcceptance ? step : -step);
                }
                coord_accepts.setZero();
                if (axes.size() > 0) {
                    for (Eigen::Index k = 0; k < d; ++k) {
                        const double rate = axis_accepts[k] / static_cast<double>(kBatch);
                        axis_scale[k] *= std::exp(rate > kTargetAcceptance ? step : -step);
                    }
                }
                axis_accepts.setZero();
                if (joint_tries > 0) {
                    const double rate = static_cast<double>(joint_accepts) / static_cast<double>(joint_tries);
                    joint_scale *= std::exp(rate > 0.25 ? step : -step);
                }
                joint_accepts = 0;
                joint_tries = 0;
            }
        } else {
            double log_jac = 0.0;
            out.draws.push_back(flatten(tr.unpack(x, log_jac)));
        }
    }
    out.joint_acceptance = post_joint ? static_cast<double>(post_joint_acc) / static_cast<double>(post_joint) : 0.0;
    out.coord_acceptance = post_coord ? static_cast<double>(post_coord_acc) / static_cast<double>(post_coord) : 0.0;
    return out;
}

}  // namespace

void BayesSpec::validate() const {
    if (tail_alpha && !(*tail_alpha >= 0.0 && *tail_alpha < 1.0)) {
        throw InputError("bayes: tail alpha must lie in [0, 1)");
    }
    if (!(iterations > warmup)) throw InputError("bayes: iterations must exceed warmup");
    if (chains == 0) throw InputError("bayes: need at least one chain");
    if (!(phi_hyper_cap > 0.0) || !(b_cap_multiple > 0.0)) throw InputError("bayes: caps must be positive");
}

double BayesSpec::b_lower(double a0) const {
    const double alpha = tail_alpha.value_or(0.0);
    return std::max(1.0, alpha / (1.0 - alpha) * a0);
}

double log_posterior(const BayesState& s, const LossRatioTriangle& t, const BayesSpec& spec) {
    if (s.a.size() != t.n() || s.phi.size() != t.m()) {
        throw std::invalid_argument("log_posterior: state does not match the triangle");
    }
    for (double a : s.a) {
        if (!(a > 0.0) || !std::isfinite(a)) return kNegInf;
    }
    const double a0 = std::accumulate(s.a.begin(), s.a.end(), 0.0);
    if (!(s.b_n >= spec.b_lower(a0)) || s.b_n > spec.b_cap_multiple * a0) return kNegInf;
    if (!(s.phi_hyper > 0.0) || s.phi_hyper > spec.phi_hyper_cap) return kNegInf;
    for (std::size_t i = 0; i < t.m(); ++i) {
        if (!(s.phi[i] > t.observed_cumulative(i)) || !(s.phi[i] < s.phi_hyper)) return kNegInf;
    }
    const double ll = total_loglik(s.params(), t);
    if (!std::isfinite(ll)) return kNegInf;
    return ll - static_cast<double>(t.m()) * std::log(s.phi_hyper);
}

std::size_t PosteriorSample::n() const {
    // names = a_1..a_n, b_n, phi_1..phi_m, phi_hyper
    return static_cast<std::size_t>(std::count_if(names.begin(), names.end(),
                                                  [](const std::string& s) { return s.rfind("a_", 0) == 0; }));
}

std::size_t PosteriorSample::draw_count() const {
    std::size_t c = 0;
    for (const auto& ch : draws) c += ch.size();
    return c;
}

BayesState PosteriorSample::state(std::size_t chain, std::size_t iteration) const {
    const auto& v = draws.at(chain).at(iteration);
    const std::size_t nn = n();
    BayesState s;
    s.a.assign(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(nn));
    s.b_n = v[nn];
    s.phi.assign(v.begin() + static_cast<std::ptrdiff_t>(nn + 1), v.end() - 1);
    s.phi_hyper = v.back();
    return s;
}

double split_rhat(const std::vector<std::vector<double>>& chains) {
    std::vector<std::vector<double>> halves;
    for (const auto& c : chains) {
        const std::size_t half = c.size() / 2;
        if (half < 2) throw std::invalid_argument("split_rhat: chains too short");
        halves.emplace_back(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(half));
        halves.emplace_back(c.end() - static_cast<std::ptrdiff_t>(half), c.end());
    }
    const auto len = static_cast<double>(halves.front().size());
    const auto k = static_cast<double>(halves.size());
    std::vector<double> means;
    double within = 0.0;
    for (const auto& h : halves) {
        const double mu = std::accumulate(h.begin(), h.end(), 0.0) / len;
        double ss = 0.0;
        for (double v : h) ss += (v - mu) * (v - mu);
        within += ss / (len - 1.0);
        means.push_back(mu);
    }
    within /= k;
    const double grand = std::accumulate(means.begin(), means.end(), 0.0) / k;
    double between = 0.0;
    for (double mu : means) between += (mu - grand) * (mu - grand);
    between *= len / (k - 1.0);
    if (within <= 0.0) return between <= 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    const double var_plus = (len - 1.0) / len * within + between / len;
    return std::sqrt(var_plus / within);
}

PosteriorSample run_mcmc(const LossRatioTriangle& t, const BayesSpec& spec) {
    spec.validate();
    Transform tr(t, spec);
    if (tr.max_paid() >= spec.phi_hyper_cap) {
        throw InputError("bayes: an observed cumulative loss ratio reaches the phi_hyper cap");
    }
    const auto a_hat = fit_mle(t).theta.a;

    PosteriorSample ps;
    ps.spec = spec;
    for (std::size_t j = 1; j <= t.n(); ++j) ps.names.push_back("a_" + std::to_string(j));
    ps.names.push_back("b_n");
    for (std::size_t i = 1; i <= t.m(); ++i) ps.names.push_back("phi_" + std::to_string(i));
    ps.names.push_back("phi_hyper");

    std::vector<ChainOutput> outputs(spec.chains);
    parallel_for(spec.chains, spec.threads ? spec.threads : default_threads(),
                 [&](std::size_t c) { outputs[c] = run_chain(t, spec, tr, a_hat, c); });

    for (auto& o : outputs) {
        ps.joint_acceptance.push_back(o.joint_acceptance);
        ps.coord_acceptance.push_back(o.coord_acceptance);
        ps.draws.push_back(std::move(o.draws));
    }

    const std::size_t n = t.n();
    for (const auto& chain : ps.draws) {
        for (const auto& v : chain) {
            const double a0 = std::accumulate(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n), 0.0);
            if (v.back() >= 0.99 * spec.phi_hyper_cap) ++ps.near_hyper_cap;
            if (v[n] >= 0.99 * spec.b_cap_multiple * a0) ++ps.near_b_cap;
        }
    }

    std::size_t worst = 0;
    for (std::size_t p = 0; p < ps.names.size(); ++p) {
        std::vector<std::vector<double>> per_chain;
        for (const auto& chain : ps.draws) {
            std::vector<double> col;
            col.reserve(chain.size());
            for (const auto& v : chain) col.push_back(v[p]);
            per_chain.push_back(std::move(col));
        }
        ps.rhat.push_back(split_rhat(per_chain));
        if (ps.rhat[p] > ps.rhat[worst]) worst = p;
    }
    if (!(ps.rhat[worst] <= spec.max_rhat)) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "bayes: chains did not converge (split R-hat of %s is %.4f > %.4g)",
                      ps.names[worst].c_str(), ps.rhat[worst], spec.max_rhat);
        throw NumericalError(buf);
    }
    return ps;
}

PredictiveDistribution posterior_predict(const PosteriorSample& ps, const LossRatioTriangle& t) {
    std::vector<DirichletParams> params;
    params.reserve(ps.draw_count());
    for (std::size_t c = 0; c < ps.draws.size(); ++c) {
        for (std::size_t s = 0; s < ps.draws[c].size(); ++s) params.push_back(ps.state(c, s).params());
    }
    return predictive_from_draws(params, t, ps.spec.seed, kStagePredict,
                                 ps.spec.threads ? ps.spec.threads : default_threads());
}

void write_draws_csv(const PosteriorSample& ps, std::ostream& out) {
    out << "chain,iteration,param,value\n";
    char buf[160];
    for (std::size_t c = 0; c < ps.draws.size(); ++c) {
        for (std::size_t s = 0; s < ps.draws[c].size(); ++s) {
            const auto& v = ps.draws[c][s];
            for (std::size_t p = 0; p < v.size(); ++p) {
                std::snprintf(buf, sizeof buf, "%zu,%zu,%s,%.10g\n", c + 1, ps.spec.warmup + s + 1,
                              ps.names[p].c_str(), v[p]);
                out << buf;
            }
        }
    }
}

}  // namespace reserving
