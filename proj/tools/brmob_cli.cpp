#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "brmob/brmob.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct DomainFlags {
    std::string kind = "identity_zero_mean";
    std::size_t k = 5;
    std::size_t d = 5;
    std::uint64_t feature_seed = 0;
    std::string file;

    void attach(CLI::App* app) {
        app->add_option("--domain", kind, "Generated domain kind")
            ->check(CLI::IsMember({"identity_zero_mean", "identity_sqrt_mean", "random_linf_ball"}));
        app->add_option("--k", k, "Number of arms");
        app->add_option("--d", d, "Feature dimension");
        app->add_option("--feature-seed", feature_seed, "Seed for random features");
        app->add_option("--domain-file", file, "Domain JSON (overrides the generator flags)");
    }

    brmob::BanditDomain build() const {
        if (!file.empty()) return brmob::load_domain(file);
        brmob::DomainSpec spec;
        spec.kind = brmob::parse_domain_kind(kind);
        spec.k = k;
        spec.d = d;
        spec.feature_seed = feature_seed;
        return brmob::build_domain(spec);
    }
};

brmob::GaussianPosterior posterior_for(const brmob::BanditDomain& domain, const std::string& data_path) {
    if (data_path.empty()) return brmob::GaussianPosterior(domain.prior_mean, domain.prior_cov);
    return brmob::posterior_update(domain, brmob::load_dataset(data_path, domain.k()));
}

void write_output(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    brmob::require(static_cast<bool>(out), brmob::ErrorKind::Io, "cannot open '" + path + "' for writing");
    out << text;
    out.flush();
    brmob::require(static_cast<bool>(out), brmob::ErrorKind::Io, "write to '" + path + "' failed");
}

int exit_code(const brmob::Error& e) {
    return e.kind() == brmob::ErrorKind::NotPositiveDefinite ? kExitNumerical : kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian regret minimization for offline linear bandits"};
    app.require_subcommand(1);

    double delta = 0.1;
    std::uint64_t seed = 1;
    std::string out_path;
    std::string family = "gaussian";
    int tighten_m = 3;
    std::string data_path;

    // solve
    auto* solve = app.add_subcommand("solve", "Compute a policy from a domain and a logged dataset");
    DomainFlags solve_domain;
    solve_domain.attach(solve);
    std::string algorithm = "brmob";
    std::size_t scenario_samples = 2000;
    solve->add_option("--data", data_path, "Logged dataset CSV (action,reward); the prior is used if absent");
    solve->add_option("--delta", delta, "Risk level");
    solve->add_option("--tighten-m", tighten_m, "Tightening iterations");
    solve->add_option("--family", family)->check(CLI::IsMember({"gaussian", "subgaussian"}));
    solve->add_option("--algorithm", algorithm, "Algorithm name");
    solve->add_option("--seed", seed, "Seed for scenario methods");
    solve->add_option("--samples", scenario_samples, "Scenario count for scenario methods");
    solve->add_option("--out", out_path, "Output path (stdout if absent)");

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "Monte-Carlo regret of a policy under the posterior");
    DomainFlags eval_domain;
    eval_domain.attach(evaluate);
    std::string policy_path;
    std::size_t eval_samples = 10000;
    evaluate->add_option("--policy", policy_path, "Policy JSON")->required();
    evaluate->add_option("--data", data_path, "Logged dataset CSV");
    evaluate->add_option("--delta", delta, "Risk level");
    evaluate->add_option("--samples", eval_samples, "Posterior samples");
    evaluate->add_option("--seed", seed, "Sampling seed");
    evaluate->add_option("--out", out_path, "Output path (stdout if absent)");

    // experiment
    auto* experiment = app.add_subcommand("experiment", "Run the varying-n experiment and write CSV");
    std::string config_path;
    std::string svg_path;
    std::optional<std::uint64_t> exp_seed;
    std::optional<double> exp_delta;
    std::optional<std::size_t> exp_runs;
    std::optional<std::size_t> exp_samples;
    std::optional<int> exp_tighten;
    std::optional<std::string> exp_family;
    std::optional<std::size_t> exp_threads;
    experiment->add_option("--config", config_path, "Experiment config JSON");
    experiment->add_option("--seed", exp_seed, "Master seed");
    experiment->add_option("--delta", exp_delta, "Risk level");
    experiment->add_option("--runs", exp_runs, "Number of runs");
    experiment->add_option("--samples", exp_samples, "Posterior samples per evaluation");
    experiment->add_option("--tighten-m", exp_tighten, "Tightening iterations");
    experiment->add_option("--family", exp_family)->check(CLI::IsMember({"gaussian", "subgaussian"}));
    experiment->add_option("--threads", exp_threads, "Worker threads (0 = all cores)");
    experiment->add_option("--out", out_path, "CSV output path (stdout if absent)");
    experiment->add_option("--svg", svg_path, "Also write a figure");

    // diagnostics
    auto* diagnostics = app.add_subcommand("diagnostics", "Uniform versus tightened tail allocations");
    std::vector<std::size_t> k_grid{2, 5, 10, 20, 50, 100};
    std::size_t diag_samples = 100000;
    diagnostics->add_option("--seed", seed, "Sampling seed");
    diagnostics->add_option("--delta", delta, "Risk level");
    diagnostics->add_option("--samples", diag_samples, "Monte-Carlo samples per point");
    diagnostics->add_option("--k", k_grid, "Arm counts to sweep");
    diagnostics->add_option("--out", out_path, "CSV output path (stdout if absent)");

    // figure
    auto* figure = app.add_subcommand("figure", "Render experiment CSV as SVG");
    std::string csv_path;
    std::string title;
    figure->add_option("csv", csv_path, "Experiment CSV")->required();
    figure->add_option("--svg", svg_path, "SVG output path")->required();
    figure->add_option("--title", title, "Figure title");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (*solve) {
            const brmob::BanditDomain domain = solve_domain.build();
            const brmob::GaussianPosterior post = posterior_for(domain, data_path);
            brmob::Json out;
            bool tolerance_met = true;
            const brmob::Algorithm alg = brmob::parse_algorithm(algorithm);
            if (alg == brmob::Algorithm::Brmob) {
                brmob::BrmobConfig cfg;
                cfg.delta = delta;
                cfg.tighten_iterations = tighten_m;
                cfg.family = brmob::parse_family(family);
                const brmob::BrmobResult r = brmob::brmob(domain, post, cfg);
                brmob::Json trace = brmob::Json::array();
                for (const auto& step : r.trace) {
                    trace.push_back({{"rho", step.rho},
                                     {"policy", brmob::to_json(step.policy)},
                                     {"status", std::string(brmob::to_string(step.status))},
                                     {"achieved_tolerance", step.achieved_tolerance}});
                }
                out = {{"algorithm", algorithm},
                       {"policy", brmob::to_json(r.policy)},
                       {"rho", r.bound},
                       {"best_step", r.best_step},
                       {"status", std::string(brmob::to_string(r.status))},
                       {"trace", trace}};
                tolerance_met = r.status == brmob::SolveStatus::Optimal;
            } else {
                brmob::ExperimentConfig cfg;
                cfg.delta = delta;
                cfg.tighten_m = tighten_m;
                cfg.family = brmob::parse_family(family);
                cfg.scenario_samples = scenario_samples;
                const brmob::CoverageEstimate coverage{0.0, 0};
                const auto r = brmob::run_algorithm(alg, domain, post, coverage, cfg, seed);
                out = {{"algorithm", algorithm}, {"policy", brmob::to_json(r.policy)}};
            }
            write_output(out_path, out.dump(2) + "\n");
            return tolerance_met ? 0 : kExitNumerical;
        }
        if (*evaluate) {
            const brmob::BanditDomain domain = eval_domain.build();
            const brmob::GaussianPosterior post = posterior_for(domain, data_path);
            const brmob::Policy pi = brmob::load_policy(policy_path);
            const auto est = brmob::estimate_regret(domain, post, pi, delta, eval_samples, seed);
            const brmob::Json out = {{"var_estimate", est.var_estimate},
                                     {"mc_std_error", est.mc_std_error},
                                     {"samples", est.samples},
                                     {"delta", est.delta}};
            write_output(out_path, out.dump(2) + "\n");
            return 0;
        }
        if (*experiment) {
            brmob::ExperimentConfig cfg =
                config_path.empty() ? brmob::ExperimentConfig{} : brmob::load_experiment_config(config_path);
            if (exp_seed) cfg.seed = *exp_seed;
            if (exp_delta) cfg.delta = *exp_delta;
            if (exp_runs) cfg.runs = *exp_runs;
            if (exp_samples) cfg.eval_samples = *exp_samples;
            if (exp_tighten) cfg.tighten_m = *exp_tighten;
            if (exp_family) cfg.family = brmob::parse_family(*exp_family);
            if (exp_threads) cfg.threads = *exp_threads;
            try {
                cfg.validate();
            } catch (const brmob::Error& e) {
                std::cerr << "error: " << e.what() << '\n';
                return kExitConfig;
            }
            const auto rows = brmob::run_experiment(cfg);
            std::ostringstream csv;
            brmob::write_csv(rows, csv);
            write_output(out_path, csv.str());
            if (!svg_path.empty()) brmob::emit_figure(rows, svg_path, cfg.domain.label());
            return 0;
        }
        if (*diagnostics) {
            brmob::DiagnosticsConfig cfg;
            cfg.seed = seed;
            cfg.delta = delta;
            cfg.samples = diag_samples;
            cfg.k_grid = k_grid;
            std::ostringstream csv;
            brmob::write_diagnostics_csv(brmob::bound_diagnostics(cfg), csv);
            write_output(out_path, csv.str());
            return 0;
        }
        if (*figure) {
            brmob::emit_figure(brmob::parse_csv(csv_path), svg_path, title);
            return 0;
        }
    } catch (const brmob::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e);
    }
    return kExitConfig;
}
