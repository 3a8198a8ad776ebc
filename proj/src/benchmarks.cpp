#include "reserving/benchmarks.hpp"

#include "reserving/errors.hpp"

#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace reserving {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_row(const LossRatioTriangle& t, std::size_t row) {
    if (row >= t.m()) throw std::out_of_range("row outside the triangle");
}

}  // namespace

ClFit cl_fit(const LossRatioTriangle& t, double level) {
    if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("cl_fit: level outside (0,1)");
    const std::size_t n = t.n();
    const std::size_t m = t.m();
    if (n < 2) throw InputError("cl_fit: need at least two development years");

    // Cumulative observed ratios per row.
    std::vector<std::vector<double>> c(m);
    for (std::size_t i = 0; i < m; ++i) {
        double s = 0.0;
        for (double y : t.row(i)) c[i].push_back(s += y);
    }

    ClFit fit;
    fit.level = level;
    std::vector<std::size_t> rows_informing(n - 1, 0);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        double num = 0.0;
        double den = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            if (c[i].size() > k + 1) {
                num += c[i][k + 1];
                den += c[i][k];
                ++rows_informing[k];
            }
        }
        if (rows_informing[k] == 0) {
            throw InputError("cl_fit: no accident year observes development years " +
                             std::to_string(k + 1) + " and " + std::to_string(k + 2));
        }
        fit.factors.push_back(num / den);
        fit.volume.push_back(den);
    }

    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (rows_informing[k] < 2) {
            fit.sigma2.push_back(kNaN);
            continue;
        }
        double ss = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            if (c[i].size() > k + 1) {
                const double dev = c[i][k + 1] / c[i][k] - fit.factors[k];
                ss += c[i][k] * dev * dev;
            }
        }
        fit.sigma2.push_back(ss / static_cast<double>(rows_informing[k] - 1));
    }
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (!std::isnan(fit.sigma2[k]) || k < 2) continue;
        const double s1 = fit.sigma2[k - 1];
        const double s2 = fit.sigma2[k - 2];
        if (std::isnan(s1) || std::isnan(s2)) continue;
        double v = std::min(s1, s2);
        if (s2 > 0.0) v = std::min(v, s1 * s1 / s2);
        fit.sigma2[k] = v;
    }
    for (std::size_t k = 0; k + 1 < n; ++k) {
        fit.factor_se.push_back(std::sqrt(fit.sigma2[k] / fit.volume[k]));
    }

    const double z = boost::math::quantile(boost::math::normal(), 0.5 + level / 2.0);
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t k = c[i].size();  // last observed development year
        double ultimate = c[i].back();
        double rel_var = 0.0;  // MSEP / ultimate^2
        double current = ultimate;
        for (std::size_t j = k - 1; j + 1 < n; ++j) {
            const double f = fit.factors[j];
            rel_var += fit.sigma2[j] / (f * f) * (1.0 / current + 1.0 / fit.volume[j]);
            current *= f;
        }
        ultimate = current;
        ReservePrediction p;
        p.accident_year = t.accident_year(i);
        p.method = "cl";
        p.observed = c[i].back();
        p.ultimate = ultimate;
        p.reserve = ultimate - p.observed;
        const double se = ultimate * std::sqrt(rel_var);
        p.std_error = se;
        if (std::isfinite(se)) p.interval = Interval{ultimate - z * se, ultimate + z * se};
        fit.predictions.push_back(std::move(p));
    }
    return fit;
}

std::vector<double> cl_quotas(const ClFit& fit) {
    const std::size_t n = fit.factors.size() + 1;
    std::vector<double> eta(n, 1.0);
    for (std::size_t k = n - 1; k-- > 0;) eta[k] = eta[k + 1] / fit.factors[k];
    return eta;
}

double cl_predict_incremental(const ClFit& fit, const LossRatioTriangle& t, std::size_t row,
                              std::size_t k2) {
    check_row(t, row);
    const std::size_t k = t.observed(row);
    if (k2 <= k || k2 > t.n()) {
        throw std::out_of_range("cl_predict_incremental: development year " + std::to_string(k2) +
                                " is not in the unobserved range");
    }
    double upper = 1.0;  // prod_{j=k}^{k2-1} gamma_j
    double lower = 1.0;  // prod_{j=k}^{k2-2} gamma_j
    for (std::size_t j = k; j + 1 <= k2 - 1; ++j) lower *= fit.factors[j - 1];
    upper = lower * fit.factors[k2 - 2];
    return t.observed_cumulative(row) * (upper - lower);
}

ReservePrediction bf_predict(const ClFit& fit, const LossRatioTriangle& t, std::size_t row,
                             double expected_ultimate) {
    check_row(t, row);
    if (!(expected_ultimate > 0.0)) throw InputError("bf_predict: expected ultimate must be positive");
    const double eta = cl_quotas(fit)[t.observed(row) - 1];
    ReservePrediction p;
    p.accident_year = t.accident_year(row);
    p.method = "bf";
    p.observed = t.observed_cumulative(row);
    p.ultimate = p.observed + (1.0 - eta) * expected_ultimate;
    p.reserve = p.ultimate - p.observed;
    return p;
}

ReservePrediction expected_method(const LossRatioTriangle& t, std::size_t row, double expected_ultimate) {
    check_row(t, row);
    ReservePrediction p;
    p.accident_year = t.accident_year(row);
    p.method = "expected";
    p.observed = t.observed_cumulative(row);
    p.ultimate = expected_ultimate;
    p.reserve = expected_ultimate - p.observed;
    return p;
}

}  // namespace reserving
