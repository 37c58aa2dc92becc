#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "brmob/bounds.hpp"
#include "brmob/error.hpp"
#include "brmob/evaluation.hpp"
#include "brmob/programs.hpp"
#include "brmob/report.hpp"
#include "brmob/risk.hpp"
#include "brmob/rng.hpp"

// Tail-allocation diagnostics on synthetic independent Gaussian regret
// components x_a ~ N(mu_a, s_a^2): the logarithmic action-set bound with
// uniform xi, the same bound at the tail levels chosen by the tightening
// program, and a Monte-Carlo VaR of max_a x_a.

namespace brmob {

enum class DiagnosticFamily { Iid, VaryingVariance, VaryingMean };

inline constexpr DiagnosticFamily kAllDiagnosticFamilies[] = {DiagnosticFamily::Iid, DiagnosticFamily::VaryingVariance,
                                                              DiagnosticFamily::VaryingMean};

inline std::string_view to_string(DiagnosticFamily f) {
    switch (f) {
        case DiagnosticFamily::Iid: return "iid";
        case DiagnosticFamily::VaryingVariance: return "varying_variance";
        case DiagnosticFamily::VaryingMean: return "varying_mean";
    }
    return "unknown";
}

/// mu = 0, Sigma = I; mu = 0, Sigma_aa = a^2/k; mu_a = a/k, Sigma_aa = a^2/k (a = 1..k).
inline RegretProjection diagnostic_family(DiagnosticFamily f, std::size_t k) {
    require(k >= 1, ErrorKind::ConfigInvalid, "k must be positive");
    const auto kk = static_cast<Eigen::Index>(k);
    RegretProjection p{Vector::Zero(kk), Vector::Ones(kk)};
    if (f == DiagnosticFamily::Iid) return p;
    for (Eigen::Index i = 0; i < kk; ++i) {
        const double a = static_cast<double>(i + 1);
        p.std(i) = a / std::sqrt(static_cast<double>(k));
        if (f == DiagnosticFamily::VaryingMean) p.mean(i) = a / static_cast<double>(k);
    }
    return p;
}

struct DiagnosticsConfig {
    std::uint64_t seed = 1;
    double delta = 0.1;
    std::vector<std::size_t> k_grid{2, 5, 10, 20, 50, 100};
    std::size_t samples = 100000;
    SolveOptions solve;

    void validate() const {
        require(delta > 0.0 && delta <= 0.5, ErrorKind::ConfigInvalid, "delta must lie in (0, 1/2]");
        require(!k_grid.empty(), ErrorKind::ConfigInvalid, "k grid must not be empty");
        for (const std::size_t k : k_grid) require(k >= 1, ErrorKind::ConfigInvalid, "k must be positive");
        require(static_cast<double>(samples) * delta >= 100.0 - 1e-9, ErrorKind::ConfigInvalid,
                "diagnostics need at least 100/delta samples");
    }
};

struct DiagnosticRow {
    std::string family;
    std::size_t k = 0;
    double uniform_bound = 0.0;
    double tightened_bound = 0.0;
    double mc_var = 0.0;
    double mc_std_error = 0.0;
    SolveStatus status = SolveStatus::Optimal;
};

/// Empirical VaR_{1-delta} of max_a x_a with its bootstrap standard error.
inline RegretEstimate max_var_estimate(const RegretProjection& p, double delta, std::size_t samples,
                                       std::uint64_t seed) {
    const std::uint64_t key = derive_seed(seed, "max-normals");
    const auto k = static_cast<std::uint64_t>(p.arms());
    std::vector<double> values(samples);
    for (std::size_t j = 0; j < samples; ++j) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::uint64_t a = 0; a < k; ++a) {
            const auto ai = static_cast<Eigen::Index>(a);
            best = std::max(best, p.mean(ai) + p.std(ai) * normal_at(key, j * k + a));
        }
        values[j] = best;
    }
    const RiskLevel level(1.0 - delta);
    return {empirical_var(values, level), bootstrap_var_std_error(values, level, seed), samples, delta};
}

inline std::vector<DiagnosticRow> bound_diagnostics(const DiagnosticsConfig& cfg) {
    cfg.validate();
    std::vector<DiagnosticRow> rows;
    for (const DiagnosticFamily f : kAllDiagnosticFamilies) {
        for (const std::size_t k : cfg.k_grid) {
            const RegretProjection p = diagnostic_family(f, k);
            const auto tight = solve_xi_tightening(p, cfg.delta, cfg.solve);
            const auto mc = max_var_estimate(p, cfg.delta, cfg.samples,
                                             derive_seed(cfg.seed, to_string(f), static_cast<std::uint64_t>(k)));
            rows.push_back({std::string(to_string(f)), k,
                            subgaussian_action_set_bound(p, cfg.delta, TailWeights::uniform(k)),
                            subgaussian_action_set_bound(p, cfg.delta, tight.argmin.weights()), mc.var_estimate,
                            mc.mc_std_error, tight.status});
        }
    }
    return rows;
}

inline void write_diagnostics_csv(const std::vector<DiagnosticRow>& rows, std::ostream& out) {
    out << "family,k,uniform_bound,tightened_bound,mc_var,mc_std_error\n";
    for (const DiagnosticRow& r : rows) {
        out << r.family << ',' << r.k << ',' << format_double(r.uniform_bound) << ',' << format_double(r.tightened_bound)
            << ',' << format_double(r.mc_var) << ',' << format_double(r.mc_std_error) << '\n';
    }
}

}  // namespace brmob
