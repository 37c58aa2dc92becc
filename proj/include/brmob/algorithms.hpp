#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "brmob/bounds.hpp"
#include "brmob/error.hpp"
#include "brmob/linalg.hpp"
#include "brmob/policy.hpp"
#include "brmob/posterior.hpp"
#include "brmob/programs.hpp"
#include "brmob/risk.hpp"

// Policy-computing algorithms: BRMOB, the LCB baseline FlatOPO, greedy, the
// scenario-based methods and the high-confidence-return policy.

namespace brmob {

/// Smallest coefficient passed to the policy program after tightening.
inline constexpr double kNuFloor = 1e-6;

struct BrmobConfig {
    double delta = 0.1;
    int tighten_iterations = 3;
    BoundFamily family = BoundFamily::Gaussian;
    SolveOptions solve;

    void validate() const {
        require_program_delta(delta);
        require(tighten_iterations >= 0, ErrorKind::OutOfRange, "tightening iterations must be non-negative");
        require(solve.tolerance > 0.0, ErrorKind::OutOfRange, "solver tolerance must be positive");
    }
};

struct BrmobStep {
    double rho = 0.0;
    Policy policy;
    std::optional<TailLevels> xi;  // absent for the first phase
    SolveStatus status = SolveStatus::Optimal;
    double achieved_tolerance = 0.0;
};

struct BrmobResult {
    Policy policy;
    double bound = 0.0;
    std::size_t best_step = 0;
    std::vector<BrmobStep> trace;
    SolveStatus status = SolveStatus::Optimal;  // ToleranceNotMet if any solve missed its tolerance
};

inline BrmobResult brmob(const BanditDomain& domain, const GaussianPosterior& post, const BrmobConfig& cfg = {}) {
    cfg.validate();
    const std::size_t k = domain.k();
    BrmobResult result;
    if (k == 1) {
        result.policy = Policy::one_hot(1, 0);
        result.trace.push_back({0.0, result.policy, std::nullopt, SolveStatus::Optimal, 0.0});
        return result;
    }

    const BoundCoefficients nu0 = combined_nu(cfg.delta, k, domain.d(), cfg.family);
    auto first = solve_min_max_norm(domain, post, nu0.nu, cfg.solve);
    result.trace.push_back({first.objective, first.argmin, std::nullopt, first.status, first.achieved_tolerance});

    for (int i = 1; i <= cfg.tighten_iterations; ++i) {
        const Policy& previous = result.trace.back().policy;
        const auto xi = solve_xi_tightening(regret_projection(domain, post, previous), cfg.delta, cfg.solve);
        Vector nu(static_cast<Eigen::Index>(k));
        for (Eigen::Index a = 0; a < nu.size(); ++a) {
            const double level = xi.argmin.xi(a);
            const double coeff = cfg.family == BoundFamily::Gaussian ? normal_upper_quantile(level)
                                                                     : std::sqrt(2.0 * std::log(1.0 / level));
            nu(a) = std::max(coeff, kNuFloor);
        }
        auto step = solve_min_max_norm(domain, post, nu, cfg.solve);
        const SolveStatus status =
            xi.optimal() && step.optimal() ? SolveStatus::Optimal : SolveStatus::ToleranceNotMet;
        result.trace.push_back({step.objective, step.argmin, xi.argmin, status,
                                std::max(xi.achieved_tolerance, step.achieved_tolerance)});
    }

    for (std::size_t i = 0; i < result.trace.size(); ++i) {
        if (result.trace[i].rho < result.trace[result.best_step].rho) result.best_step = i;
        if (result.trace[i].status != SolveStatus::Optimal) result.status = SolveStatus::ToleranceNotMet;
    }
    result.policy = result.trace[result.best_step].policy;
    result.bound = result.trace[result.best_step].rho;
    return result;
}

struct FlatOpoConfig {
    std::optional<double> beta;
};

inline double flatopo_default_beta(std::size_t d, double delta) {
    require_delta(delta);
    return std::sqrt(5.0 * static_cast<double>(d) * std::log(1.0 / delta));
}

/// Lower confidence bounds mu^T phi_a - beta ||phi_a||_Sigma.
inline Vector lcb_scores(const BanditDomain& domain, const GaussianPosterior& post, double beta) {
    const Vector m = domain.phi.transpose() * post.mean();
    const Matrix b = post.factor().lower().transpose() * domain.phi;
    return m - beta * b.colwise().norm().transpose();
}

inline Policy flatopo(const BanditDomain& domain, const GaussianPosterior& post, double delta,
                      const FlatOpoConfig& cfg = {}) {
    const double beta = cfg.beta.value_or(flatopo_default_beta(domain.d(), delta));
    require(beta > 0.0, ErrorKind::OutOfRange, "beta must be positive");
    return Policy::one_hot(domain.k(), argmax_lowest(lcb_scores(domain, post, beta)));
}

inline Policy greedy(const BanditDomain& domain, const GaussianPosterior& post) {
    return Policy::one_hot(domain.k(), argmax_lowest(domain.phi.transpose() * post.mean()));
}

/// Scenario rewards: row j holds phi_a^T q_j for a posterior draw q_j.
inline Matrix scenario_rewards(const BanditDomain& domain, const GaussianPosterior& post, std::size_t samples,
                               std::uint64_t seed) {
    return sample_posterior(post, samples, seed) * domain.phi;
}

struct ScenarioPolicy {
    Policy policy;
    double objective = 0.0;  // the scenario estimate the policy minimizes
    SolveStatus status = SolveStatus::Optimal;
};

/// The arm with the smallest empirical VaR_{1-delta} of scenario regret.
inline ScenarioPolicy scenario_var_deterministic(const BanditDomain& domain, const GaussianPosterior& post,
                                                 double delta, std::size_t samples, std::uint64_t seed) {
    require_delta(delta);
    require(static_cast<double>(samples) * delta >= 1.0 - 1e-9, ErrorKind::InsufficientSamples,
            "scenario VaR needs at least 1/delta samples");
    const Matrix r = scenario_rewards(domain, post, samples, seed);
    const Vector best = r.rowwise().maxCoeff();
    const RiskLevel level(1.0 - delta);
    ScenarioPolicy out{Policy::one_hot(domain.k(), 0), std::numeric_limits<double>::infinity(), SolveStatus::Optimal};
    std::vector<double> regret(samples);
    for (Eigen::Index a = 0; a < r.cols(); ++a) {
        for (std::size_t j = 0; j < samples; ++j) {
            const auto jj = static_cast<Eigen::Index>(j);
            regret[j] = best(jj) - r(jj, a);
        }
        const double v = empirical_var(regret, level);
        if (v < out.objective) out = {Policy::one_hot(domain.k(), static_cast<std::size_t>(a)), v, SolveStatus::Optimal};
    }
    return out;
}

inline std::size_t default_worst_case_samples(double delta) {
    require_delta(delta);
    return 2 * static_cast<std::size_t>(std::ceil(1.0 / delta - 1e-9));
}

/// min over policies of the largest regret across a few posterior scenarios.
inline ScenarioPolicy scenario_worst_case(const BanditDomain& domain, const GaussianPosterior& post, double delta,
                                          std::size_t samples, std::uint64_t seed, const SolveOptions& opt = {}) {
    require_delta(delta);
    require(samples >= 1, ErrorKind::InsufficientSamples, "worst-case scenarios need at least one sample");
    const auto r = solve_worst_case_lp(scenario_rewards(domain, post, samples, seed), opt);
    return {r.argmin, r.objective, r.status};
}

/// CVaR_{1-delta} of scenario regret minimized over randomized policies.
inline ScenarioPolicy scenario_cvar(const BanditDomain& domain, const GaussianPosterior& post, double delta,
                                    std::size_t samples, std::uint64_t seed, const SolveOptions& opt = {}) {
    require_delta(delta);
    require(static_cast<double>(samples) * delta >= 10.0 - 1e-9, ErrorKind::InsufficientSamples,
            "scenario CVaR needs samples * delta >= 10");
    const Vector probs = Vector::Constant(static_cast<Eigen::Index>(samples), 1.0 / static_cast<double>(samples));
    const auto r = solve_cvar_lp(scenario_rewards(domain, post, samples, seed), probs, delta, opt);
    return {r.argmin, r.objective, r.status};
}

inline SolveReport<Policy> hc_return_policy(const BanditDomain& domain, const GaussianPosterior& post, double delta,
                                            const SolveOptions& opt = {}) {
    return solve_hc_return(domain, post, delta, opt);
}

struct ChebyshevData {
    Matrix arm_points;     // d x k, column a is Sigma^{1/2} phi_a
    Matrix policy_points;  // d x (number of policies), column i is sum_a pi_a h_a
};

inline ChebyshevData chebyshev_projection_data(const BanditDomain& domain, const GaussianPosterior& post,
                                               std::span<const Policy> policies) {
    require(domain.d() >= 1, ErrorKind::DimensionMismatch, "dimension must be positive");
    ChebyshevData out;
    out.arm_points = symmetric_sqrt(post.cov()) * domain.phi;
    out.policy_points.resize(out.arm_points.rows(), static_cast<Eigen::Index>(policies.size()));
    for (std::size_t i = 0; i < policies.size(); ++i) {
        require(policies[i].arms() == domain.k(), ErrorKind::DimensionMismatch, "policy has wrong arm count");
        out.policy_points.col(static_cast<Eigen::Index>(i)) = out.arm_points * policies[i].weights();
    }
    return out;
}

}  // namespace brmob
