#include "reserving/dirichlet.hpp"

#include "reserving/special_functions.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace reserving {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_dev(const DirichletParams& theta, std::size_t k, std::size_t max, const char* what) {
    if (k < 1 || k > max) {
        throw std::out_of_range(std::string(what) + ": development year " + std::to_string(k) +
                                " outside 1.." + std::to_string(max));
    }
    (void)theta;
}

void check_row_index(const DirichletParams& theta, std::size_t row) {
    if (row >= theta.phi.size()) throw std::out_of_range("row has no phi parameter");
}

}  // namespace

double DirichletParams::a0() const { return std::accumulate(a.begin(), a.end(), 0.0); }

double DirichletParams::a_sum(std::size_t k, std::size_t k2) const {
    double s = 0.0;
    for (std::size_t j = k; j <= k2 && j <= a.size(); ++j) s += a[j - 1];
    return s;
}

void DirichletParams::validate() const {
    if (a.empty()) throw std::invalid_argument("DirichletParams: no development parameters");
    for (std::size_t j = 0; j < a.size(); ++j) {
        if (!(a[j] > 0.0) || !std::isfinite(a[j])) {
            throw std::invalid_argument("DirichletParams: a_" + std::to_string(j + 1) +
                                        " must be positive and finite");
        }
    }
    if (!(b_n >= 1.0) || !std::isfinite(b_n)) {
        throw std::invalid_argument("DirichletParams: b_n must be >= 1");
    }
    for (std::size_t i = 0; i < phi.size(); ++i) {
        if (!(phi[i] > 0.0) || !std::isfinite(phi[i])) {
            throw std::invalid_argument("DirichletParams: phi_" + std::to_string(i + 1) +
                                        " must be positive and finite");
        }
    }
}

bool DirichletParams::supports(const LossRatioTriangle& t) const {
    validate();
    if (a.size() != t.n() || phi.size() != t.m()) return false;
    for (std::size_t i = 0; i < t.m(); ++i) {
        double s = t.observed_cumulative(i);
        double tail_shape = a_sum(t.observed(i) + 1, n()) + b_n;
        if (phi[i] < s) return false;
        if (phi[i] == s && tail_shape != 1.0) return false;
    }
    return true;
}

double row_log_density(const DirichletParams& theta, const LossRatioTriangle& t, std::size_t row) {
    theta.validate();
    if (theta.n() != t.n()) throw std::invalid_argument("row_log_density: n mismatch");
    check_row_index(theta, row);
    auto y = t.row(row);
    const std::size_t k = y.size();
    const double phi = theta.phi[row];
    const double s = std::accumulate(y.begin(), y.end(), 0.0);
    const double unpaid = phi - s;
    if (unpaid < 0.0) return kNegInf;

    double paid_shape = 0.0;
    double lp = 0.0;
    const double log_phi = std::log(phi);
    for (std::size_t j = 0; j < k; ++j) {
        const double aj = theta.a[j];
        paid_shape += aj;
        lp += -log_gamma(aj) + (aj - 1.0) * (std::log(y[j]) - log_phi);
    }
    const double tail_shape = theta.a_sum(k + 1, theta.n()) + theta.b_n;
    lp += log_gamma(paid_shape + tail_shape) - log_gamma(tail_shape);
    lp -= static_cast<double>(k) * log_phi;
    if (tail_shape != 1.0) {
        if (unpaid == 0.0) return kNegInf;
        lp += (tail_shape - 1.0) * std::log(unpaid / phi);
    }
    return lp;
}

double total_loglik(const DirichletParams& theta, const LossRatioTriangle& t) {
    if (theta.phi.size() != t.m()) throw std::invalid_argument("total_loglik: phi size mismatch");
    double ll = 0.0;
    for (std::size_t i = 0; i < t.m(); ++i) {
        double li = row_log_density(theta, t, i);
        if (li == kNegInf) return kNegInf;
        ll += li;
    }
    return ll;
}

Moments cumulative_moments(const DirichletParams& theta, std::size_t row, std::size_t k,
                           std::size_t k2) {
    check_row_index(theta, row);
    if (k < 1 || k > k2 || k2 > theta.n()) {
        throw std::out_of_range("cumulative_moments: need 1 <= k <= k2 <= n");
    }
    const double total = theta.a0() + theta.b_n;
    const double part = theta.a_sum(k, k2);
    const double phi = theta.phi[row];
    Moments m;
    m.mean = part / total * phi;
    m.variance = part * (total - part) / (total * total * (total + 1.0)) * phi * phi;
    return m;
}

double dev_factor(const DirichletParams& theta, std::size_t k) {
    check_dev(theta, k, theta.n() - 1, "dev_factor");
    return theta.a_sum(1, k + 1) / theta.a_sum(1, k);
}

double dev_quota(const DirichletParams& theta, std::size_t k) {
    check_dev(theta, k, theta.n(), "dev_quota");
    if (k == theta.n()) return 1.0;
    return theta.a_sum(1, k) / theta.a0();
}

std::vector<double> dev_factors(const DirichletParams& theta) {
    std::vector<double> out;
    for (std::size_t k = 1; k < theta.n(); ++k) out.push_back(dev_factor(theta, k));
    return out;
}

std::vector<double> dev_quotas(const DirichletParams& theta) {
    std::vector<double> out;
    for (std::size_t k = 1; k <= theta.n(); ++k) out.push_back(dev_quota(theta, k));
    return out;
}

double credibility_weight(const DirichletParams& theta, std::size_t k) {
    check_dev(theta, k, theta.n(), "credibility_weight");
    const double later = theta.a_sum(k + 1, theta.n());
    return theta.b_n / (later + theta.b_n) * (theta.a_sum(1, k) / theta.a0());
}

double credibility_weight_cv(const DirichletParams& theta, std::size_t k) {
    check_dev(theta, k, theta.n(), "credibility_weight_cv");
    // phi cancels in the ratio of squared coefficients of variation.
    DirichletParams unit{theta.a, theta.b_n, {1.0}};
    auto full = cumulative_moments(unit, 0, 1, theta.n());
    auto early = cumulative_moments(unit, 0, 1, k);
    const double cv2_full = full.variance / (full.mean * full.mean);
    const double cv2_early = early.variance / (early.mean * early.mean);
    return cv2_full / cv2_early;
}

double conditional_ultimate(const DirichletParams& theta, std::size_t row, std::size_t k,
                            double observed) {
    check_row_index(theta, row);
    check_dev(theta, k, theta.n(), "conditional_ultimate");
    const double later = theta.a_sum(k + 1, theta.n());
    return observed + later / (later + theta.b_n) * (theta.phi[row] - observed);
}

ReservePrediction predict_dirichlet(const DirichletParams& theta, const LossRatioTriangle& t,
                                    std::size_t row) {
    check_row_index(theta, row);
    const std::size_t k = t.observed(row);
    if (k == 0) throw std::invalid_argument("predict_dirichlet: row has no observed cells");
    const double s = t.observed_cumulative(row);
    const double v = credibility_weight(theta, k);
    const double chain_ladder = s / dev_quota(theta, k);
    const double a0 = theta.a0();
    const double expected = a0 / (a0 + theta.b_n) * theta.phi[row];

    ReservePrediction p;
    p.accident_year = t.accident_year(row);
    p.method = "dirichlet";
    p.observed = s;
    p.ultimate = v * chain_ladder + (1.0 - v) * expected;
    p.reserve = p.ultimate - s;
    return p;
}

std::vector<double> ConditionalAllocation::disposal_rates() const {
    double total = std::accumulate(future.begin(), future.end(), 0.0);
    std::vector<double> out(future.begin(), future.end() - 1);
    for (auto& r : out) r /= total;
    return out;
}

std::pair<double, double> ConditionalAllocation::unpaid_beta() const {
    double later = std::accumulate(future.begin(), future.end() - 1, 0.0);
    return {later, future.back()};
}

ConditionalAllocation conditional_allocation(const DirichletParams& theta, std::size_t k) {
    check_dev(theta, k, theta.n() - 1, "conditional_allocation");
    ConditionalAllocation c;
    c.paid.assign(theta.a.begin(), theta.a.begin() + static_cast<std::ptrdiff_t>(k));
    c.future.assign(theta.a.begin() + static_cast<std::ptrdiff_t>(k), theta.a.end());
    c.future.push_back(theta.b_n);
    return c;
}

double tail_factor(const DirichletParams& theta) { return 1.0 + theta.b_n / theta.a0(); }

std::vector<double> sample_dirichlet(std::span<const double> alpha, Rng& rng) {
    std::vector<double> g(alpha.size());
    double total = 0.0;
    for (std::size_t j = 0; j < alpha.size(); ++j) {
        std::gamma_distribution<double> gamma(alpha[j], 1.0);
        g[j] = gamma(rng);
        total += g[j];
    }
    for (auto& x : g) x /= total;
    return g;
}

SampledRow sample_row(const DirichletParams& theta, std::size_t row, Rng& rng) {
    theta.validate();
    check_row_index(theta, row);
    std::vector<double> alpha(theta.a);
    alpha.push_back(theta.b_n);
    auto p = sample_dirichlet(alpha, rng);
    SampledRow out;
    const double phi = theta.phi[row];
    for (std::size_t j = 0; j < theta.n(); ++j) out.cells.push_back(phi * p[j]);
    out.tail = phi * p.back();
    return out;
}

std::vector<double> sample_future_row(const DirichletParams& theta, const LossRatioTriangle& t,
                                      std::size_t row, Rng& rng) {
    check_row_index(theta, row);
    const std::size_t k = t.observed(row);
    if (k >= theta.n()) return {};
    const double unpaid = theta.phi[row] - t.observed_cumulative(row);
    if (!(unpaid > 0.0)) {
        throw std::domain_error("sample_future_row: phi does not exceed the observed cumulative");
    }
    auto alloc = conditional_allocation(theta, k);
    auto p = sample_dirichlet(alloc.future, rng);
    p.pop_back();
    for (auto& x : p) x *= unpaid;
    return p;
}

}  // namespace reserving
