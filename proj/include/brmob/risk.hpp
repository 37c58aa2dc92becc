#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "brmob/error.hpp"

// Risk functionals on costs: normal and chi-square quantiles, closed-form
// VaR/EVaR for Gaussian and sub-Gaussian scalars, and empirical VaR/CVaR.

namespace brmob {

/// Risk level alpha in [0, 1).
class RiskLevel {
public:
    explicit RiskLevel(double alpha) : alpha_(alpha) {
        require(alpha >= 0.0 && alpha < 1.0, ErrorKind::OutOfRange,
                "risk level must lie in [0, 1), got " + std::to_string(alpha));
    }
    double alpha() const noexcept { return alpha_; }

private:
    double alpha_;
};

struct GaussianScalar {
    double mean = 0.0;
    double std = 0.0;
};

namespace detail {

inline constexpr int kBisectionSteps = 200;

// Bisects a decreasing function f on [lo, hi] for f(x) = target.
template <class F>
double bisect_decreasing(F&& f, double target, double lo, double hi) {
    for (int it = 0; it < kBisectionSteps; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (f(mid) > target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Regularized lower incomplete gamma P(a, x) by its power series (x < a + 1).
inline double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < 10000; ++n) {
        term *= x / (a + n);
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-17) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Regularized upper incomplete gamma Q(a, x) by modified Lentz continued fraction (x >= a + 1).
inline double gamma_q_fraction(double a, double x) {
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 10000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-17) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace detail

/// Standard normal upper tail P[Z > x].
inline double normal_upper_tail(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// z with P[Z > z] = q. Taking the tail probability directly keeps tiny
/// tail levels exact.
inline double normal_upper_quantile(double q) {
    require(q > 0.0 && q < 1.0, ErrorKind::OutOfRange, "tail probability must lie in (0, 1)");
    if (q == 0.5) return 0.0;
    if (q > 0.5) return -normal_upper_quantile(1.0 - q);
    return detail::bisect_decreasing(normal_upper_tail, q, 0.0, 40.0);
}

inline double normal_quantile(double p) {
    require(p > 0.0 && p < 1.0, ErrorKind::OutOfRange, "probability must lie in (0, 1)");
    if (p == 0.5) return 0.0;
    if (p > 0.5) return normal_upper_quantile(1.0 - p);
    return -normal_upper_quantile(p);
}

/// Regularized lower incomplete gamma P(a, x).
inline double gamma_p(double a, double x) {
    if (x <= 0.0) return 0.0;
    if (x < a + 1.0) return detail::gamma_p_series(a, x);
    return 1.0 - detail::gamma_q_fraction(a, x);
}

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
inline double gamma_q(double a, double x) {
    if (x <= 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
    return detail::gamma_q_fraction(a, x);
}

inline double chi2_cdf(int dof, double x) { return gamma_p(0.5 * dof, 0.5 * x); }

/// x with P[chi2_dof > x] = q.
inline double chi2_upper_quantile(int dof, double q) {
    require(dof >= 1, ErrorKind::OutOfRange, "chi-square degrees of freedom must be positive");
    require(q > 0.0 && q < 1.0, ErrorKind::OutOfRange, "tail probability must lie in (0, 1)");
    const double a = 0.5 * dof;
    double hi = std::max(1.0, static_cast<double>(dof));
    while (gamma_q(a, 0.5 * hi) > q) hi *= 2.0;
    if (q > 0.5) {
        // Solve on the lower tail where P carries the precision.
        const auto lower = [a](double x) { return -gamma_p(a, 0.5 * x); };
        return detail::bisect_decreasing(lower, -(1.0 - q), 0.0, hi);
    }
    const auto upper = [a](double x) { return gamma_q(a, 0.5 * x); };
    return detail::bisect_decreasing(upper, q, 0.0, hi);
}

inline double chi2_quantile(int dof, double p) {
    require(p > 0.0 && p < 1.0, ErrorKind::OutOfRange, "probability must lie in (0, 1)");
    return chi2_upper_quantile(dof, 1.0 - p);
}

/// VaR of N(mean, std^2) at level alpha: mean + std * z_alpha.
inline double var_gaussian(const GaussianScalar& g, const RiskLevel& level) {
    if (g.std == 0.0 || level.alpha() == 0.0) {
        // alpha = 0 has no finite quantile unless the variable is degenerate.
        return g.std == 0.0 ? g.mean : -std::numeric_limits<double>::infinity();
    }
    return g.mean + g.std * normal_quantile(level.alpha());
}

/// EVaR of N(mean, std^2): mean + std * sqrt(-2 log(1 - alpha)).
inline double evar_gaussian(const GaussianScalar& g, const RiskLevel& level) {
    return g.mean + g.std * std::sqrt(-2.0 * std::log1p(-level.alpha()));
}

/// Upper bound on the EVaR of a sub-Gaussian variable with the given variance factor.
inline double subgaussian_evar_bound(double mean, double variance_factor, const RiskLevel& level) {
    require(variance_factor >= 0.0, ErrorKind::OutOfRange, "variance factor must be non-negative");
    return evar_gaussian({mean, std::sqrt(variance_factor)}, level);
}

namespace detail {

inline std::size_t order_statistic_index(std::size_t n, double alpha) {
    // ceil(alpha * n) with a guard against representation error in alpha * n.
    const double scaled = alpha * static_cast<double>(n);
    auto rank = static_cast<std::size_t>(std::ceil(scaled - 1e-9 * std::max(1.0, scaled)));
    rank = std::clamp<std::size_t>(rank, 1, n);
    return rank - 1;
}

}  // namespace detail

/// Empirical VaR: the ceil(alpha N)-th smallest sample (1-based, clamped to [1, N]).
inline double empirical_var(std::span<const double> samples, const RiskLevel& level) {
    require(!samples.empty(), ErrorKind::EmptySample, "empirical_var needs samples");
    std::vector<double> work(samples.begin(), samples.end());
    const std::size_t idx = detail::order_statistic_index(work.size(), level.alpha());
    std::nth_element(work.begin(), work.begin() + static_cast<std::ptrdiff_t>(idx), work.end());
    return work[idx];
}

/// Rockafellar-Uryasev CVaR of a discrete distribution,
/// min_z z + E[(x - z)_+] / (1 - alpha), minimised exactly over z in the support.
inline double weighted_cvar(std::span<const double> values, std::span<const double> probs, const RiskLevel& level) {
    require(!values.empty(), ErrorKind::EmptySample, "CVaR needs samples");
    require(values.size() == probs.size(), ErrorKind::DimensionMismatch, "CVaR: value/probability size mismatch");
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    // Suffix sums of p and p*x over the sorted order give E[(x - z)_+] in O(1) per candidate.
    std::vector<double> tail_p(n + 1, 0.0);
    std::vector<double> tail_px(n + 1, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        tail_p[i] = tail_p[i + 1] + probs[order[i]];
        tail_px[i] = tail_px[i + 1] + probs[order[i]] * values[order[i]];
    }
    const double inv_tail = 1.0 / (1.0 - level.alpha());
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const double z = values[order[i]];
        // Entries strictly after i (and ties) contribute (x - z); ties contribute zero either way.
        const double excess = tail_px[i + 1] - z * tail_p[i + 1];
        best = std::min(best, z + inv_tail * excess);
    }
    return best;
}

inline double empirical_cvar(std::span<const double> samples, const RiskLevel& level) {
    require(!samples.empty(), ErrorKind::EmptySample, "empirical_cvar needs samples");
    const std::vector<double> probs(samples.size(), 1.0 / static_cast<double>(samples.size()));
    return weighted_cvar(samples, probs, level);
}

}  // namespace brmob
