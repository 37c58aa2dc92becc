#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "brmob/error.hpp"
#include "brmob/linalg.hpp"
#include "brmob/policy.hpp"
#include "brmob/posterior.hpp"
#include "brmob/risk.hpp"
#include "brmob/rng.hpp"

// Monte-Carlo estimates of the high-confidence Bayesian regret and the
// closed-form regret rates in terms of the coverage constant gamma.

namespace brmob {

inline constexpr int kBootstrapResamples = 50;

struct RegretEstimate {
    double var_estimate = 0.0;
    double mc_std_error = 0.0;
    std::size_t samples = 0;
    double delta = 0.0;
};

/// Regret samples max_a phi_a^T q - pi^T Phi^T q for posterior draws q.
inline std::vector<double> regret_samples(const BanditDomain& domain, const GaussianPosterior& post, const Policy& pi,
                                          std::size_t samples, std::uint64_t seed) {
    require(pi.arms() == domain.k(), ErrorKind::DimensionMismatch, "policy has wrong arm count");
    require(post.dim() == domain.d(), ErrorKind::DimensionMismatch, "posterior has wrong dimension");
    constexpr std::size_t kChunk = 4096;
    std::vector<double> out(samples);
    for (std::size_t first = 0; first < samples; first += kChunk) {
        const std::size_t count = std::min(kChunk, samples - first);
        const Matrix r = sample_posterior_range(post, first, count, seed) * domain.phi;
        const Vector chosen = r * pi.weights();
        for (std::size_t j = 0; j < count; ++j) {
            const auto jj = static_cast<Eigen::Index>(j);
            out[first + j] = std::max(0.0, r.row(jj).maxCoeff() - chosen(jj));
        }
    }
    return out;
}

/// Standard deviation of the empirical VaR across bootstrap resamples.
inline double bootstrap_var_std_error(const std::vector<double>& values, const RiskLevel& level, std::uint64_t seed,
                                      int resamples = kBootstrapResamples) {
    if (values.size() < 2) return 0.0;
    CounterRng rng(derive_seed(seed, "bootstrap"));
    std::vector<double> resample(values.size());
    std::vector<double> stats;
    stats.reserve(static_cast<std::size_t>(resamples));
    for (int b = 0; b < resamples; ++b) {
        for (double& v : resample) v = values[rng.next_below(values.size())];
        stats.push_back(empirical_var(resample, level));
    }
    double mean = 0.0;
    for (const double s : stats) mean += s;
    mean /= static_cast<double>(stats.size());
    double var = 0.0;
    for (const double s : stats) var += (s - mean) * (s - mean);
    return std::sqrt(var / static_cast<double>(stats.size() - 1));
}

inline RegretEstimate estimate_regret(const BanditDomain& domain, const GaussianPosterior& post, const Policy& pi,
                                      double delta, std::size_t samples, std::uint64_t seed) {
    require(delta > 0.0 && delta < 1.0, ErrorKind::OutOfRange, "delta must lie in (0, 1)");
    require(static_cast<double>(samples) * delta >= 100.0 - 1e-9, ErrorKind::InsufficientSamples,
            "regret estimation needs at least 100/delta samples");
    const RiskLevel level(1.0 - delta);
    const std::vector<double> regret = regret_samples(domain, post, pi, samples, seed);
    return {empirical_var(regret, level), bootstrap_var_std_error(regret, level, seed), samples, delta};
}

struct TheoreticalBounds {
    double brmob_bound = 0.0;
    double flatopo_bound = 0.0;
    double gamma = 0.0;
    std::size_t n = 0;
};

namespace evaluation_detail {

inline double rate_denominator(const BanditDomain& domain, const CoverageEstimate& coverage) {
    const double noise_precision = 1.0 / (domain.noise_std * domain.noise_std);
    return 1.0 / max_eigenvalue(domain.prior_cov) + noise_precision * coverage.gamma * static_cast<double>(coverage.n);
}

}  // namespace evaluation_detail

/// 2 sqrt(min{2 log(k/delta), 5 d log(1/delta)} / (lambda_max(Sigma_0)^{-1} + gamma n / s^2)).
inline double theorem4_bound(const BanditDomain& domain, const CoverageEstimate& coverage, double delta,
                             std::size_t k, std::size_t d) {
    require(delta > 0.0 && delta < 1.0, ErrorKind::OutOfRange, "delta must lie in (0, 1)");
    require(coverage.gamma >= 0.0, ErrorKind::OutOfRange, "gamma must be non-negative");
    if (coverage.gamma == 0.0) return std::numeric_limits<double>::infinity();
    const double numerator = std::min(2.0 * std::log(static_cast<double>(k) / delta),
                                      5.0 * static_cast<double>(d) * std::log(1.0 / delta));
    return 2.0 * std::sqrt(numerator / evaluation_detail::rate_denominator(domain, coverage));
}

/// 2 sqrt(5 d^2 log(1/delta) / (lambda_max(Sigma_0)^{-1} + gamma n / s^2)).
inline double flatopo_bound(const BanditDomain& domain, const CoverageEstimate& coverage, double delta,
                            std::size_t d) {
    require(delta > 0.0 && delta < 1.0, ErrorKind::OutOfRange, "delta must lie in (0, 1)");
    require(coverage.gamma >= 0.0, ErrorKind::OutOfRange, "gamma must be non-negative");
    if (coverage.gamma == 0.0) return std::numeric_limits<double>::infinity();
    const double dd = static_cast<double>(d);
    return 2.0 * std::sqrt(5.0 * dd * dd * std::log(1.0 / delta) / evaluation_detail::rate_denominator(domain, coverage));
}

inline TheoreticalBounds theoretical_bounds(const BanditDomain& domain, const CoverageEstimate& coverage,
                                            double delta) {
    return {theorem4_bound(domain, coverage, delta, domain.k(), domain.d()),
            flatopo_bound(domain, coverage, delta, domain.d()), coverage.gamma, coverage.n};
}

}  // namespace brmob
