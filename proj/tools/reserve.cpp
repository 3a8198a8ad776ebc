// reserve: command-line front end for the scaled Dirichlet reserving library.
//
// Exit status: 0 on success, 1 on numerical failure, 2 on usage or input errors.

#include "reserving/bayes.hpp"
#include "reserving/benchmarks.hpp"
#include "reserving/bootstrap.hpp"
#include "reserving/dirichlet.hpp"
#include "reserving/errors.hpp"
#include "reserving/gof.hpp"
#include "reserving/mle.hpp"
#include "reserving/triangle.hpp"
#include "reserving/validation.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#ifndef RESERVE_VERSION
#define RESERVE_VERSION "0.0.0"
#endif

namespace {

using json = nlohmann::ordered_json;
using namespace reserving;

struct RunConfig {
    std::string subcommand;
    std::string triangle;
    std::string years = "all";
    std::optional<std::uint64_t> seed_flag;
    std::uint64_t seed = kDefaultSeed;
    std::size_t threads = 0;
    std::string out;

    std::string method = "mle-boot";
    std::size_t n_sim = 1000;
    std::size_t n_boot = 500;
    double alpha = 0.05;
    std::optional<double> elr;

    std::size_t iterations = 20000;
    std::size_t warmup = 5000;
    std::size_t chains = 4;
    std::optional<double> tail_alpha;
    std::string draws;

    std::string panel;
    std::string methods = "dirichlet,cl";
};

std::uint64_t resolve_seed(const RunConfig& cfg) {
    if (cfg.seed_flag) return *cfg.seed_flag;
    if (const char* env = std::getenv("RESERVE_SEED")) {
        try {
            std::size_t used = 0;
            const auto v = std::stoull(env, &used);
            if (used == std::string(env).size()) return v;
        } catch (const std::exception&) {
        }
        throw InputError("RESERVE_SEED is not a non-negative integer: '" + std::string(env) + "'");
    }
    return kDefaultSeed;
}

RunOffTriangle load_selected(const RunConfig& cfg) {
    auto t = load_triangle(cfg.triangle);
    if (cfg.years == "all") return t;
    std::size_t count = 0;
    try {
        std::size_t used = 0;
        count = std::stoul(cfg.years, &used);
        if (used != cfg.years.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
        throw InputError("--years must be a positive integer or 'all', got '" + cfg.years + "'");
    }
    if (count == 0) throw InputError("--years must be positive");
    if (count > t.m()) {
        throw InputError("--years " + cfg.years + " exceeds the " + std::to_string(t.m()) +
                         " accident years in " + cfg.triangle);
    }
    return most_recent(t, count);
}

json base_config(const RunConfig& cfg) {
    json c;
    if (!cfg.triangle.empty()) {
        c["triangle"] = cfg.triangle;
        c["years"] = cfg.years;
    }
    c["seed"] = cfg.seed;
    c["threads"] = cfg.threads;
    return c;
}

json meta(const RunConfig& cfg, const json& config) {
    json m;
    m["version"] = RESERVE_VERSION;
    m["subcommand"] = cfg.subcommand;
    m["config"] = config;
    m["seed"] = cfg.seed;
    return m;
}

std::string csv_meta(const RunConfig& cfg, const json& config) {
    std::ostringstream s;
    s << "# version: " << RESERVE_VERSION << '\n'
      << "# subcommand: " << cfg.subcommand << '\n'
      << "# config: " << config.dump() << '\n'
      << "# seed: " << cfg.seed << '\n';
    return s.str();
}

void emit(const RunConfig& cfg, const std::string& text) {
    if (cfg.out.empty() || cfg.out == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(cfg.out, std::ios::binary);
    if (!f) throw InputError("cannot write output file: " + cfg.out);
    f << text;
}

std::string fmt(double x) {
    std::ostringstream s;
    s.precision(10);
    s << x;
    return s.str();
}

std::string prediction_csv(const std::vector<ReservePrediction>& preds) {
    std::string out = "accident_year,method,point,lo95,hi95\n";
    for (const auto& p : preds) {
        out += std::to_string(p.accident_year) + "," + p.method + "," + fmt(p.ultimate) + ",";
        if (p.interval) out += fmt(p.interval->lo) + "," + fmt(p.interval->hi);
        else out += ",";
        out += '\n';
    }
    return out;
}

BayesSpec bayes_spec(const RunConfig& cfg) {
    BayesSpec spec;
    spec.tail_alpha = cfg.tail_alpha;
    spec.iterations = cfg.iterations;
    spec.warmup = cfg.warmup;
    spec.chains = cfg.chains;
    spec.seed = cfg.seed;
    spec.threads = cfg.threads;
    spec.validate();
    return spec;
}

json bayes_config(const RunConfig& cfg) {
    json c = base_config(cfg);
    c["iterations"] = cfg.iterations;
    c["warmup"] = cfg.warmup;
    c["chains"] = cfg.chains;
    c["tail_alpha"] = cfg.tail_alpha ? json(*cfg.tail_alpha) : json(nullptr);
    return c;
}

void warn_caps(const PosteriorSample& ps) {
    if (ps.near_hyper_cap) {
        std::cerr << "warning: " << ps.near_hyper_cap << " draws within 1% of the phi_hyper cap\n";
    }
    if (ps.near_b_cap) std::cerr << "warning: " << ps.near_b_cap << " draws within 1% of the b_n cap\n";
}

void cmd_fit(const RunConfig& cfg) {
    const auto t = to_loss_ratios(load_selected(cfg));
    const auto fit = fit_mle(t);
    json j;
    j["meta"] = meta(cfg, base_config(cfg));
    j["accident_years"] = fit.accident_years;
    j["a"] = fit.theta.a;
    j["b_n"] = fit.theta.b_n;
    j["phi"] = fit.theta.phi;
    j["loglik"] = fit.loglik;
    j["converged"] = fit.converged;
    j["iterations"] = fit.iterations;
    j["gradient_norm"] = fit.gradient_norm;
    j["dev_factors"] = dev_factors(fit.theta);
    j["dev_quotas"] = dev_quotas(fit.theta);
    j["tail_factor"] = tail_factor(fit.theta);
    emit(cfg, j.dump(2) + "\n");
}

void cmd_predict(const RunConfig& cfg) {
    const auto& m = cfg.method;
    if ((m == "bf" || m == "expected") && !cfg.elr) {
        throw InputError("--method " + m + " requires --elr (expected ultimate loss ratio)");
    }
    if (cfg.elr && !(*cfg.elr > 0.0)) throw InputError("--elr must be positive");
    const auto t = to_loss_ratios(load_selected(cfg));

    json config = base_config(cfg);
    config["method"] = m;
    std::vector<ReservePrediction> preds;
    if (m == "mle-boot") {
        config["nsim"] = cfg.n_sim;
        BootstrapOptions opts;
        opts.n_sim = cfg.n_sim;
        opts.seed = cfg.seed;
        opts.threads = cfg.threads;
        const auto pd = bias_corrected_bootstrap(fit_mle(t), t, opts);
        preds = summarize(pd, 0.95, "mle-boot");
    } else if (m == "bayes") {
        config = bayes_config(cfg);
        config["method"] = m;
        const auto ps = run_mcmc(t, bayes_spec(cfg));
        warn_caps(ps);
        preds = summarize(posterior_predict(ps, t), 0.95, "bayes");
    } else if (m == "cl") {
        preds = cl_fit(t).predictions;
    } else {
        config["elr"] = *cfg.elr;
        const auto cl = cl_fit(t);
        for (std::size_t i = 0; i < t.m(); ++i) {
            preds.push_back(m == "bf" ? bf_predict(cl, t, i, *cfg.elr) : expected_method(t, i, *cfg.elr));
        }
    }
    emit(cfg, csv_meta(cfg, config) + prediction_csv(preds));
}

void cmd_gof(const RunConfig& cfg) {
    GofOptions opts;
    opts.alpha = cfg.alpha;
    opts.n_boot = cfg.n_boot;
    opts.seed = cfg.seed;
    opts.threads = cfg.threads;
    if (!(opts.alpha > 0.0 && opts.alpha < 1.0)) throw InputError("--alpha must lie in (0, 1)");
    const auto t = to_loss_ratios(load_selected(cfg));
    const auto r = gof_test(t, opts);

    json config = base_config(cfg);
    config["alpha"] = cfg.alpha;
    config["nboot"] = cfg.n_boot;
    json j = json::parse(to_json(r));
    j["index_size"] = r.index_size;
    j["meta"] = meta(cfg, config);
    emit(cfg, j.dump(2) + "\n");
}

void cmd_bayes(const RunConfig& cfg) {
    const auto spec = bayes_spec(cfg);
    const auto t = to_loss_ratios(load_selected(cfg));
    const auto ps = run_mcmc(t, spec);
    warn_caps(ps);

    json config = bayes_config(cfg);
    if (!cfg.draws.empty()) config["draws"] = cfg.draws;
    json j;
    j["meta"] = meta(cfg, config);
    json params = json::array();
    const std::size_t d = ps.names.size();
    for (std::size_t p = 0; p < d; ++p) {
        std::vector<double> v;
        for (const auto& chain : ps.draws) {
            for (const auto& draw : chain) v.push_back(draw[p]);
        }
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        json row;
        row["name"] = ps.names[p];
        row["mean"] = mean;
        row["q025"] = empirical_quantile(v, 0.025);
        row["q975"] = empirical_quantile(v, 0.975);
        row["rhat"] = ps.rhat[p];
        params.push_back(row);
    }
    j["parameters"] = params;
    j["joint_acceptance"] = ps.joint_acceptance;
    j["coordinate_acceptance"] = ps.coord_acceptance;
    j["near_phi_hyper_cap"] = ps.near_hyper_cap;
    j["near_b_cap"] = ps.near_b_cap;
    j["draws"] = ps.draw_count();
    emit(cfg, j.dump(2) + "\n");

    if (!cfg.draws.empty()) {
        std::ofstream f(cfg.draws, std::ios::binary);
        if (!f) throw InputError("cannot write draws file: " + cfg.draws);
        f << csv_meta(cfg, config);
        write_draws_csv(ps, f);
    }
}

void cmd_benchmark(const RunConfig& cfg) {
    if (cfg.elr && !(*cfg.elr > 0.0)) throw InputError("--elr must be positive");
    const auto t = to_loss_ratios(load_selected(cfg));
    const auto fit = fit_mle(t);
    const auto cl = cl_fit(t);

    json config = base_config(cfg);
    if (cfg.elr) config["elr"] = *cfg.elr;
    json j;
    j["meta"] = meta(cfg, config);
    j["dirichlet_factors"] = dev_factors(fit.theta);
    j["mack_factors"] = cl.factors;
    j["mack_factor_se"] = cl.factor_se;
    j["dirichlet_quotas"] = dev_quotas(fit.theta);
    j["cl_quotas"] = cl_quotas(cl);
    json rows = json::array();
    for (std::size_t i = 0; i < t.m(); ++i) {
        json r;
        r["accident_year"] = t.accident_year(i);
        r["observed"] = t.observed_cumulative(i);
        r["dirichlet"] = predict_dirichlet(fit.theta, t, i).ultimate;
        const auto& c = cl.predictions[i];
        r["cl"] = c.ultimate;
        r["cl_se"] = c.std_error && std::isfinite(*c.std_error) ? json(*c.std_error) : json(nullptr);
        if (cfg.elr) {
            r["bf"] = bf_predict(cl, t, i, *cfg.elr).ultimate;
            r["expected"] = expected_method(t, i, *cfg.elr).ultimate;
        }
        rows.push_back(r);
    }
    j["predictions"] = rows;
    emit(cfg, j.dump(2) + "\n");
}

std::vector<std::string> split_methods(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

void cmd_validate(const RunConfig& cfg) {
    PanelOptions opts;
    opts.methods = split_methods(cfg.methods);
    opts.bootstrap.n_sim = cfg.n_sim;
    opts.bootstrap.seed = cfg.seed;
    opts.threads = cfg.threads;
    const auto report = run_panel(cfg.panel, opts);

    json config = base_config(cfg);
    config["panel"] = cfg.panel;
    config["methods"] = cfg.methods;
    config["nsim"] = cfg.n_sim;
    std::ostringstream body;
    write_report_csv(report, body);
    std::string failures;
    for (const auto& f : report.failures) {
        std::cerr << "warning: insurer " << f.insurer << " failed: " << f.message << '\n';
        failures += "# failed: " + f.insurer + ": " + f.message + "\n";
    }
    emit(cfg, csv_meta(cfg, config) + failures + body.str());
}

void add_common(CLI::App* sub, RunConfig& cfg, bool needs_triangle) {
    if (needs_triangle) {
        sub->add_option("--triangle", cfg.triangle, "Wide CSV: accident_year,premium,dev_1..dev_n")->required();
        sub->add_option("--years", cfg.years, "Most recent N accident years, or 'all'");
    }
    sub->add_option("--seed", cfg.seed_flag, "Master seed (default: RESERVE_SEED, then a built-in value)");
    sub->add_option("--threads", cfg.threads, "Worker threads (0 = available cores)");
    sub->add_option("--out", cfg.out, "Output path (default: standard output)");
}

void add_bayes(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--iterations", cfg.iterations, "Iterations per chain, including warmup");
    sub->add_option("--warmup", cfg.warmup, "Warmup iterations per chain");
    sub->add_option("--chains", cfg.chains, "Number of chains");
    sub->add_option("--tail-alpha", cfg.tail_alpha, "Lower bound on the expected tail quota");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Loss reserving with the scaled Dirichlet model", "reserve"};
    app.set_version_flag("--version", RESERVE_VERSION);
    app.require_subcommand(1);
    RunConfig cfg;

    auto* fit = app.add_subcommand("fit", "Maximum likelihood fit");
    add_common(fit, cfg, true);

    auto* predict = app.add_subcommand("predict", "Predicted ultimate loss ratios with 95% intervals");
    add_common(predict, cfg, true);
    predict->add_option("--method", cfg.method, "mle-boot | bayes | cl | bf | expected")
        ->check(CLI::IsMember({"mle-boot", "bayes", "cl", "bf", "expected"}));
    predict->add_option("--nsim", cfg.n_sim, "Bootstrap replicates");
    predict->add_option("--elr", cfg.elr, "Expected ultimate loss ratio (bf, expected)");
    add_bayes(predict, cfg);

    auto* gof = app.add_subcommand("gof", "Goodness-of-fit test");
    add_common(gof, cfg, true);
    gof->add_option("--alpha", cfg.alpha, "Test level");
    gof->add_option("--nboot", cfg.n_boot, "Bootstrap replicates of the null statistic");

    auto* bayes = app.add_subcommand("bayes", "Posterior sampling");
    add_common(bayes, cfg, true);
    add_bayes(bayes, cfg);
    bayes->add_option("--draws", cfg.draws, "Also write post-warmup draws to this CSV");

    auto* bench = app.add_subcommand("benchmark", "Chain-Ladder, BF and expected-method comparison");
    add_common(bench, cfg, true);
    bench->add_option("--elr", cfg.elr, "Expected ultimate loss ratio");

    auto* validate = app.add_subcommand("validate", "Hold-out evaluation over a panel of insurers");
    add_common(validate, cfg, false);
    validate->add_option("--panel", cfg.panel, "Directory of X.csv and X.holdout.csv pairs")->required();
    validate->add_option("--methods", cfg.methods, "Comma-separated: dirichlet, cl");
    validate->add_option("--nsim", cfg.n_sim, "Bootstrap replicates per insurer");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        cfg.seed = resolve_seed(cfg);
        for (auto* sub : app.get_subcommands()) cfg.subcommand = sub->get_name();
        if (cfg.subcommand == "fit") cmd_fit(cfg);
        else if (cfg.subcommand == "predict") cmd_predict(cfg);
        else if (cfg.subcommand == "gof") cmd_gof(cfg);
        else if (cfg.subcommand == "bayes") cmd_bayes(cfg);
        else if (cfg.subcommand == "benchmark") cmd_benchmark(cfg);
        else cmd_validate(cfg);
    } catch (const InputError& e) {
        std::cerr << "reserve: " << e.what() << '\n';
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "reserve: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "reserve: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
