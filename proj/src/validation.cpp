#include "reserving/validation.hpp"

#include "reserving/benchmarks.hpp"
#include "reserving/errors.hpp"
#include "reserving/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>
#include <utility>

namespace reserving {

namespace {

constexpr std::uint64_t kStagePanel = 7;

using Key = std::pair<std::string, int>;

std::string describe(const Key& k) {
    return "insurer '" + k.first + "', accident year " + std::to_string(k.second);
}

bool within(double x, double lo, double hi) {
    const double tol = 1e-12 * std::max(1.0, std::abs(x));
    return x >= lo - tol && x <= hi + tol;
}

EvalRow summarize_group(const std::vector<const EvalDetail*>& group) {
    EvalRow row;
    double sq = 0.0;
    for (const auto* d : group) {
        sq += d->abs_deviation * d->abs_deviation;
        row.cov95 += d->contains ? 1.0 : 0.0;
        row.len95 += d->interval_length;
    }
    const auto n = static_cast<double>(group.size());
    row.rmse = std::sqrt(sq / n);
    row.cov95 /= n;
    row.len95 /= n;
    row.count = group.size();
    return row;
}

// FNV-1a, so an insurer's stream depends on its name only.
std::uint64_t name_hash(const std::string& s) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

struct InsurerOutcome {
    std::vector<KeyedPrediction> predictions;
    std::vector<RealizedValue> actuals;
    std::optional<std::string> error;
};

InsurerOutcome evaluate_insurer(const std::filesystem::path& training_path, const std::string& name,
                                const PanelOptions& opts) {
    InsurerOutcome out;
    const auto holdout_path = training_path.parent_path() / (name + ".holdout.csv");
    if (!std::filesystem::exists(holdout_path)) {
        out.error = "missing hold-out file " + holdout_path.string();
        return out;
    }
    const auto training = load_triangle(training_path);
    const auto holdout = load_holdout(holdout_path);
    const auto realized = realized_ultimate_ratios(training, holdout);
    const auto lr = to_loss_ratios(training);

    std::vector<ReservePrediction> all;
    for (const auto& method : opts.methods) {
        if (method == "dirichlet") {
            const auto fit = fit_mle(lr, opts.bootstrap.fit);
            BootstrapOptions bo = opts.bootstrap;
            bo.threads = 1;
            bo.seed = make_stream(opts.bootstrap.seed, {kStagePanel, name_hash(name)})();
            const auto pd = bias_corrected_bootstrap(fit, lr, bo);
            auto s = summarize(pd, opts.level, "dirichlet");
            all.insert(all.end(), s.begin(), s.end());
        } else {
            auto cl = cl_fit(lr, opts.level);
            all.insert(all.end(), cl.predictions.begin(), cl.predictions.end());
        }
    }
    for (std::size_t i = 0; i < lr.m(); ++i) {
        if (lr.is_complete(i)) continue;
        out.actuals.push_back({name, lr.accident_year(i), realized[i]});
    }
    for (auto& p : all) {
        const auto row = std::find(lr.accident_years().begin(), lr.accident_years().end(), p.accident_year) -
                         lr.accident_years().begin();
        if (lr.is_complete(static_cast<std::size_t>(row))) continue;
        out.predictions.push_back({name, std::move(p)});
    }
    return out;
}

}  // namespace

const EvalRow& EvalReport::find(int accident_year, const std::string& method) const {
    for (const auto& r : aggregate) {
        if (r.accident_year == accident_year && r.method == method) return r;
    }
    throw std::out_of_range("no aggregate row for accident year " + std::to_string(accident_year) +
                            " and method " + method);
}

EvalReport evaluate(const std::vector<KeyedPrediction>& predictions,
                    const std::vector<RealizedValue>& actuals) {
    std::map<Key, double> truth;
    for (const auto& a : actuals) {
        if (!truth.emplace(Key{a.insurer, a.accident_year}, a.ultimate).second) {
            throw InputError("evaluate: duplicate realized value for " +
                             describe({a.insurer, a.accident_year}));
        }
    }

    std::map<std::string, std::set<Key>> covered;
    EvalReport report;
    for (const auto& kp : predictions) {
        const Key key{kp.insurer, kp.prediction.accident_year};
        const auto it = truth.find(key);
        if (it == truth.end()) throw InputError("evaluate: no realized value for " + describe(key));
        const auto& method = kp.prediction.method;
        if (!covered[method].insert(key).second) {
            throw InputError("evaluate: duplicate " + method + " prediction for " + describe(key));
        }
        EvalDetail d;
        d.insurer = kp.insurer;
        d.accident_year = key.second;
        d.method = method;
        d.predicted = kp.prediction.ultimate;
        d.actual = it->second;
        d.abs_deviation = std::abs(d.predicted - d.actual);
        const auto iv = kp.prediction.interval.value_or(Interval{d.predicted, d.predicted});
        d.contains = within(d.actual, iv.lo, iv.hi);
        d.interval_length = iv.hi - iv.lo;
        report.details.push_back(std::move(d));
    }
    for (const auto& [method, keys] : covered) {
        for (const auto& [key, value] : truth) {
            if (!keys.count(key)) {
                throw InputError("evaluate: method " + method + " has no prediction for " + describe(key));
            }
        }
    }

    std::sort(report.details.begin(), report.details.end(), [](const EvalDetail& x, const EvalDetail& y) {
        return std::tie(x.insurer, x.accident_year, x.method) < std::tie(y.insurer, y.accident_year, y.method);
    });
    std::map<std::pair<int, std::string>, std::vector<const EvalDetail*>> groups;
    for (const auto& d : report.details) {
        auto row = summarize_group({&d});
        row.insurer = d.insurer;
        row.accident_year = d.accident_year;
        row.method = d.method;
        report.per_insurer.push_back(row);
        groups[{d.accident_year, d.method}].push_back(&d);
    }
    for (const auto& [key, group] : groups) {
        auto row = summarize_group(group);
        row.insurer = kAllInsurers;
        row.accident_year = key.first;
        row.method = key.second;
        report.aggregate.push_back(row);
    }
    return report;
}

EvalReport run_panel(const std::filesystem::path& dir, const PanelOptions& opts) {
    for (const auto& m : opts.methods) {
        if (m != "dirichlet" && m != "cl") throw InputError("run_panel: unknown method '" + m + "'");
    }
    if (opts.methods.empty()) throw InputError("run_panel: no methods requested");
    if (!std::filesystem::is_directory(dir)) {
        throw InputError("run_panel: not a directory: " + dir.string());
    }

    std::vector<std::pair<std::filesystem::path, std::string>> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
        const auto stem = entry.path().stem().string();
        if (stem.size() >= 8 && stem.ends_with(".holdout")) continue;
        files.emplace_back(entry.path(), stem);
    }
    if (files.empty()) throw InputError("run_panel: no triangle files in " + dir.string());
    std::sort(files.begin(), files.end());

    std::vector<InsurerOutcome> outcomes(files.size());
    const std::size_t threads = opts.threads ? opts.threads : default_threads();
    parallel_for(files.size(), threads, [&](std::size_t i) {
        try {
            outcomes[i] = evaluate_insurer(files[i].first, files[i].second, opts);
        } catch (const std::exception& e) {
            outcomes[i] = InsurerOutcome{};
            outcomes[i].error = e.what();
        }
    });

    std::vector<KeyedPrediction> predictions;
    std::vector<RealizedValue> actuals;
    std::vector<PanelFailure> failures;
    for (std::size_t i = 0; i < files.size(); ++i) {
        auto& o = outcomes[i];
        if (o.error) {
            failures.push_back({files[i].second, *o.error});
            continue;
        }
        predictions.insert(predictions.end(), o.predictions.begin(), o.predictions.end());
        actuals.insert(actuals.end(), o.actuals.begin(), o.actuals.end());
    }
    EvalReport report = evaluate(predictions, actuals);
    report.failures = std::move(failures);
    return report;
}

void write_report_csv(const EvalReport& report, std::ostream& out) {
    out << "insurer,accident_year,method,rmse,cov95,len95\n";
    auto emit = [&](const EvalRow& r) {
        out << r.insurer << ',' << r.accident_year << ',' << r.method << ',' << r.rmse << ',' << r.cov95
            << ',' << r.len95 << '\n';
    };
    const auto old = out.precision(10);
    for (const auto& r : report.per_insurer) emit(r);
    for (const auto& r : report.aggregate) emit(r);
    out.precision(old);
}

SyntheticInsurer simulate_insurer(const DirichletParams& theta, int first_accident_year,
                                  const std::vector<double>& premiums, Rng& rng) {
    theta.validate();
    const std::size_t m = theta.phi.size();
    const std::size_t n = theta.n();
    if (premiums.size() != m) throw std::invalid_argument("simulate_insurer: one premium per accident year");
    if (m < n) throw std::invalid_argument("simulate_insurer: need at least n accident years");

    std::vector<int> years;
    std::vector<std::vector<double>> losses(m);
    std::vector<HoldoutRow> holdout;
    for (std::size_t i = 0; i < m; ++i) {
        const int year = first_accident_year + static_cast<int>(i);
        years.push_back(year);
        const auto row = sample_row(theta, i, rng);
        const std::size_t k = std::min(n, m - i);
        HoldoutRow h{year, premiums[i], std::vector<double>(n, std::nan(""))};
        for (std::size_t j = 0; j < n; ++j) {
            const double x = row.cells[j] * premiums[i];
            if (j < k) {
                losses[i].push_back(x);
            } else {
                h.cells[j] = x;
            }
        }
        if (k < n) holdout.push_back(std::move(h));
    }
    return {RunOffTriangle(std::move(years), premiums, std::move(losses), n), std::move(holdout)};
}

void write_insurer_files(const SyntheticInsurer& insurer, const std::filesystem::path& dir,
                         const std::string& name) {
    auto write = [](const std::filesystem::path& p, const std::string& text) {
        std::ofstream f(p);
        if (!f) throw InputError("cannot write " + p.string());
        f << text;
    };
    write(dir / (name + ".csv"), format_triangle(insurer.training));
    write(dir / (name + ".holdout.csv"), format_holdout(insurer.holdout, insurer.training.n()));
}

}  // namespace reserving
