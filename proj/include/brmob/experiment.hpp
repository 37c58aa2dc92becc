#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "brmob/algorithms.hpp"
#include "brmob/bounds.hpp"
#include "brmob/domains.hpp"
#include "brmob/error.hpp"
#include "brmob/evaluation.hpp"
#include "brmob/policy.hpp"
#include "brmob/posterior.hpp"
#include "brmob/rng.hpp"

// The fixed-dataset / varying-n protocol: per run draw theta* from the prior,
// log one dataset of the largest size with a uniform logging policy, and for
// each n fit the posterior to the first n records, run every algorithm and
// score it by Monte-Carlo regret under that posterior.

namespace brmob {

enum class Algorithm { Brmob, FlatOpo, Greedy, ScenarioCvar, ScenarioVar, ScenarioWorst, HcReturn };

inline constexpr Algorithm kAllAlgorithms[] = {Algorithm::Brmob,        Algorithm::FlatOpo,     Algorithm::Greedy,
                                               Algorithm::ScenarioCvar, Algorithm::ScenarioVar, Algorithm::ScenarioWorst,
                                               Algorithm::HcReturn};

inline std::string_view to_string(Algorithm a) {
    switch (a) {
        case Algorithm::Brmob: return "brmob";
        case Algorithm::FlatOpo: return "flatopo";
        case Algorithm::Greedy: return "greedy";
        case Algorithm::ScenarioCvar: return "scenario_r";
        case Algorithm::ScenarioVar: return "scenario_var";
        case Algorithm::ScenarioWorst: return "scenario_worst";
        case Algorithm::HcReturn: return "hc_return";
    }
    return "unknown";
}

inline Algorithm parse_algorithm(std::string_view text) {
    for (const Algorithm a : kAllAlgorithms) {
        if (text == to_string(a)) return a;
    }
    fail(ErrorKind::ConfigInvalid, "unknown algorithm '" + std::string(text) + "'");
}

struct ExperimentConfig {
    std::uint64_t seed = 1;
    double delta = 0.1;
    std::size_t runs = 100;
    std::vector<std::size_t> n_grid{10, 30, 100, 300, 1000};
    std::size_t eval_samples = 10000;
    std::vector<Algorithm> algorithms{Algorithm::Brmob, Algorithm::FlatOpo, Algorithm::Greedy, Algorithm::ScenarioCvar};
    DomainSpec domain;
    int tighten_m = 3;
    BoundFamily family = BoundFamily::Gaussian;
    std::size_t scenario_samples = 2000;  // ScenarioR and the scenario VaR method
    std::size_t worst_case_samples = 0;   // 0 selects 2 * ceil(1/delta)
    std::size_t threads = 0;              // 0 selects the hardware concurrency

    void validate() const {
        require(runs >= 1, ErrorKind::ConfigInvalid, "runs must be at least 1");
        require(!n_grid.empty(), ErrorKind::ConfigInvalid, "n grid must not be empty");
        for (std::size_t i = 1; i < n_grid.size(); ++i) {
            require(n_grid[i] > n_grid[i - 1], ErrorKind::ConfigInvalid, "n grid must be strictly increasing");
        }
        require(!algorithms.empty(), ErrorKind::ConfigInvalid, "algorithm list must not be empty");
        require(delta > 0.0 && delta <= 0.5, ErrorKind::ConfigInvalid, "delta must lie in (0, 1/2]");
        require(tighten_m >= 0, ErrorKind::ConfigInvalid, "tightening iterations must be non-negative");
        require(static_cast<double>(eval_samples) * delta >= 100.0 - 1e-9, ErrorKind::ConfigInvalid,
                "evaluation needs at least 100/delta samples");
        try {
            domain.validate();
        } catch (const Error& e) {
            fail(ErrorKind::ConfigInvalid, e.what());
        }
    }
};

struct ResultRow {
    std::string domain;
    std::string algorithm;
    std::size_t n = 0;
    std::size_t run = 0;
    std::optional<double> regret;  // empty when the cell failed
    std::optional<double> bound;   // empty when the algorithm has no analytic bound
    double ms = 0.0;

    bool operator==(const ResultRow&) const = default;
};

/// Policy and analytic bound of one algorithm on one posterior.
struct AlgorithmOutput {
    Policy policy;
    std::optional<double> bound;
};

inline AlgorithmOutput run_algorithm(Algorithm alg, const BanditDomain& domain, const GaussianPosterior& post,
                                     const CoverageEstimate& coverage, const ExperimentConfig& cfg,
                                     std::uint64_t seed) {
    const auto finite = [](double v) { return std::isfinite(v) ? std::optional<double>(v) : std::nullopt; };
    switch (alg) {
        case Algorithm::Brmob: {
            BrmobConfig bc;
            bc.delta = cfg.delta;
            bc.tighten_iterations = cfg.tighten_m;
            bc.family = cfg.family;
            const BrmobResult r = brmob(domain, post, bc);
            return {r.policy, r.bound};
        }
        case Algorithm::FlatOpo:
            return {flatopo(domain, post, cfg.delta), coverage.n > 0 ? finite(flatopo_bound(domain, coverage, cfg.delta, domain.d()))
                                                                     : std::nullopt};
        case Algorithm::Greedy:
            return {greedy(domain, post), std::nullopt};
        case Algorithm::ScenarioCvar:
            return {scenario_cvar(domain, post, cfg.delta, cfg.scenario_samples, seed).policy, std::nullopt};
        case Algorithm::ScenarioVar:
            return {scenario_var_deterministic(domain, post, cfg.delta, cfg.scenario_samples, seed).policy, std::nullopt};
        case Algorithm::ScenarioWorst: {
            const std::size_t j = cfg.worst_case_samples > 0 ? cfg.worst_case_samples : default_worst_case_samples(cfg.delta);
            return {scenario_worst_case(domain, post, cfg.delta, j, seed).policy, std::nullopt};
        }
        case Algorithm::HcReturn:
            return {hc_return_policy(domain, post, cfg.delta).argmin, std::nullopt};
    }
    fail(ErrorKind::ConfigInvalid, "unknown algorithm");
}

/// theta* drawn from the prior for one run.
inline Vector draw_theta_star(const BanditDomain& domain, std::uint64_t run_seed) {
    const GaussianPosterior prior(domain.prior_mean, domain.prior_cov);
    return sample_posterior(prior, 1, derive_seed(run_seed, "theta")).row(0).transpose();
}

inline std::uint64_t run_seed(std::uint64_t master, std::size_t run) {
    return derive_seed(master, "run", static_cast<std::uint64_t>(run));
}

/// All rows of one run, ordered by (n, algorithm position in the config).
inline std::vector<ResultRow> run_single(const ExperimentConfig& cfg, const BanditDomain& domain, std::size_t run) {
    const std::uint64_t seed = run_seed(cfg.seed, run);
    const Vector theta = draw_theta_star(domain, seed);
    const LoggedDataset data =
        simulate_logged_data(domain, theta, Policy::uniform(domain.k()), cfg.n_grid.back(), derive_seed(seed, "data"));
    const std::string label = cfg.domain.label();

    std::vector<ResultRow> rows;
    DataSummary summary(domain.d());
    std::size_t used = 0;
    for (const std::size_t n : cfg.n_grid) {
        while (used < n) summary.add(domain, data.records[used++]);
        const GaussianPosterior post = posterior_update(domain, summary);
        const CoverageEstimate coverage = n > 0 ? coverage_gamma(domain, summary) : CoverageEstimate{0.0, 0};
        const std::uint64_t eval_seed = derive_seed(seed, "eval", n);
        const std::uint64_t alg_seed = derive_seed(seed, "scenarios", n);
        for (const Algorithm alg : cfg.algorithms) {
            ResultRow row{label, std::string(to_string(alg)), n, run, std::nullopt, std::nullopt, 0.0};
            const auto start = std::chrono::steady_clock::now();
            try {
                const AlgorithmOutput out = run_algorithm(alg, domain, post, coverage, cfg, alg_seed);
                row.bound = out.bound;
                row.regret = estimate_regret(domain, post, out.policy, cfg.delta, cfg.eval_samples, eval_seed).var_estimate;
            } catch (const Error&) {
                row.regret.reset();
                row.bound.reset();
            }
            row.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

/// Runs execute concurrently; the output is ordered by (run, n, algorithm)
/// regardless of scheduling.
inline std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const BanditDomain domain = build_domain(cfg.domain);
    std::vector<std::vector<ResultRow>> per_run(cfg.runs);
    std::size_t workers = cfg.threads > 0 ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, cfg.runs);

    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    const auto work = [&](std::size_t w) {
        try {
            for (std::size_t r = next++; r < cfg.runs; r = next++) per_run[r] = run_single(cfg, domain, r);
        } catch (...) {
            errors[w] = std::current_exception();
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    std::vector<ResultRow> rows;
    for (auto& block : per_run) {
        for (auto& row : block) rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace brmob
