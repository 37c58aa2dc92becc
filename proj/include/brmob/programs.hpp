#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "brmob/bounds.hpp"
#include "brmob/cone_solver.hpp"
#include "brmob/error.hpp"
#include "brmob/linalg.hpp"
#include "brmob/policy.hpp"
#include "brmob/posterior.hpp"
#include "brmob/risk.hpp"

// The convex programs behind the policy-computing algorithms. Each solve
// reports an objective evaluated exactly at the returned point together with
// a certified bound on the optimal value; their difference is the achieved
// tolerance.

namespace brmob {

enum class SolveStatus { Optimal, ToleranceNotMet };

inline std::string_view to_string(SolveStatus s) {
    return s == SolveStatus::Optimal ? "Optimal" : "ToleranceNotMet";
}

struct SolveOptions {
    double tolerance = 1e-7;
    int max_iterations = 100000;
};

template <class Argmin>
struct SolveReport {
    Argmin argmin;
    double objective = 0.0;
    double bound = 0.0;  // certified lower bound (upper bound for maximization)
    int iterations = 0;
    double achieved_tolerance = 0.0;
    SolveStatus status = SolveStatus::Optimal;

    bool optimal() const noexcept { return status == SolveStatus::Optimal; }
};

/// Absolute tail levels xi_a > 0 with sum delta.
struct TailLevels {
    Vector xi;
    double delta = 0.0;

    /// The same allocation on the k-simplex, xi / delta.
    TailWeights weights() const { return TailWeights(xi / delta); }
};

namespace program_detail {

inline ConeOptions cone_options(const SolveOptions& opt) {
    ConeOptions c;
    c.max_iterations = std::min(opt.max_iterations, 500);
    return c;
}

template <class Argmin>
SolveReport<Argmin> finish(Argmin argmin, double objective, double bound, int iterations, double tol) {
    SolveReport<Argmin> r{std::move(argmin), objective, bound, iterations, std::max(0.0, std::abs(objective - bound)),
                          SolveStatus::Optimal};
    if (!(r.achieved_tolerance <= tol)) r.status = SolveStatus::ToleranceNotMet;
    return r;
}

// Euclidean projection onto {0 <= l <= cap, sum l = 1}; cap may be infinite.
inline Vector project_capped_simplex(const Vector& v, const Vector& cap) {
    const auto total = [&](double tau) { return (v.array() - tau).max(0.0).min(cap.array()).sum(); };
    double lo = v.minCoeff() - 1.0;
    double hi = v.maxCoeff();
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (total(mid) > 1.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Vector out = (v.array() - 0.5 * (lo + hi)).max(0.0).min(cap.array()).matrix();
    const double sum = out.sum();
    return sum > 0.0 ? Vector(out / sum) : Vector(cap.cwiseMin(1.0) / cap.cwiseMin(1.0).sum());
}

// min over pi in the simplex of sum_j l_j (max_a R_ja - R_j pi).
inline double scenario_dual_bound(const Matrix& rewards, const Vector& lambda) {
    const Vector best = rewards.rowwise().maxCoeff();
    return lambda.dot(best) - (rewards.transpose() * lambda).maxCoeff();
}

inline Vector scenario_regrets(const Matrix& rewards, const Policy& pi) {
    return rewards.rowwise().maxCoeff() - rewards * pi.weights();
}

inline void add_simplex_rows(std::vector<Eigen::Triplet<double>>& trip, std::size_t k) {
    for (std::size_t a = 0; a < k; ++a) {
        trip.emplace_back(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a), -1.0);
    }
}

inline Matrix simplex_equality(std::size_t k, std::size_t n) {
    Matrix a = Matrix::Zero(1, static_cast<Eigen::Index>(n));
    a.leftCols(static_cast<Eigen::Index>(k)).setOnes();
    return a;
}

}  // namespace program_detail

/// Minimizes f(pi) = max_a mu^T Phi (1_a - pi) + nu_a ||Phi (1_a - pi)||_Sigma over the simplex.
inline SolveReport<Policy> solve_min_max_norm(const BanditDomain& domain, const GaussianPosterior& post,
                                              const Vector& nu, const SolveOptions& opt = {}) {
    using namespace program_detail;
    const std::size_t k = domain.k();
    const std::size_t d = domain.d();
    require(static_cast<std::size_t>(nu.size()) == k, ErrorKind::DimensionMismatch, "nu has wrong arm count");
    require(nu.minCoeff() > 0.0, ErrorKind::OutOfRange, "nu must be positive");
    require(post.dim() == d, ErrorKind::DimensionMismatch, "posterior has wrong dimension");
    require(opt.tolerance > 0.0, ErrorKind::OutOfRange, "tolerance must be positive");
    if (k == 1) return finish(Policy::one_hot(1, 0), 0.0, 0.0, 0, opt.tolerance);

    const Vector m = domain.phi.transpose() * post.mean();
    const Matrix b = post.factor().lower().transpose() * domain.phi;  // d x k
    const auto kk = static_cast<Eigen::Index>(k);
    const auto dd = static_cast<Eigen::Index>(d);

    // x = (pi, t). Rows: pi >= 0, then per arm the cone
    // (t - m_a + m^T pi, nu_a B (1_a - pi)).
    ConeProgram p;
    p.c = Vector::Zero(kk + 1);
    p.c(kk) = 1.0;
    p.orthant = k;
    p.soc.assign(k, d + 1);
    const Eigen::Index rows = kk + kk * (dd + 1);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(kk + kk * (dd + 1) * (kk + 1)));
    add_simplex_rows(trip, k);
    p.h = Vector::Zero(rows);
    for (Eigen::Index a = 0; a < kk; ++a) {
        const Eigen::Index off = kk + a * (dd + 1);
        for (Eigen::Index j = 0; j < kk; ++j) trip.emplace_back(off, j, -m(j));
        trip.emplace_back(off, kk, -1.0);
        p.h(off) = -m(a);
        for (Eigen::Index i = 0; i < dd; ++i) {
            for (Eigen::Index j = 0; j < kk; ++j) trip.emplace_back(off + 1 + i, j, nu(a) * b(i, j));
            p.h(off + 1 + i) = nu(a) * b(i, a);
        }
    }
    p.g = SparseMatrix(rows, kk + 1);
    p.g.setFromTriplets(trip.begin(), trip.end());
    p.a = simplex_equality(k, k + 1);
    p.b = Vector::Ones(1);

    const ConeSolution sol = solve_cone_program(p, cone_options(opt));
    const Policy pi = Policy::from_approximate(sol.x.head(kk).cwiseMax(0.0));

    // f(pi) exactly.
    const Vector b_pi = b * pi.weights();
    const double m_pi = m.dot(pi.weights());
    double objective = -std::numeric_limits<double>::infinity();
    for (Eigen::Index a = 0; a < kk; ++a) {
        objective = std::max(objective, m(a) - m_pi + nu(a) * (b.col(a) - b_pi).norm());
    }

    // Lagrangian bound from the cone multipliers (l_a, w_a) with ||w_a|| <= l_a, sum l = 1:
    // f(pi) >= sum_a l_a (m_a - m^T pi) + nu_a w_a^T B (1_a - pi) for every pi in the simplex.
    Vector lambda(kk);
    Matrix wv(dd, kk);
    for (Eigen::Index a = 0; a < kk; ++a) {
        const Eigen::Index off = kk + a * (dd + 1);
        lambda(a) = std::max(0.0, sol.z(off));
        wv.col(a) = -sol.z.segment(off + 1, dd);
    }
    double bound = -std::numeric_limits<double>::infinity();
    if (lambda.sum() > 0.0) {
        const double total = lambda.sum();
        lambda /= total;
        wv /= total;
        double constant = lambda.dot(m);
        Vector pooled = Vector::Zero(dd);
        for (Eigen::Index a = 0; a < kk; ++a) {
            const double norm = wv.col(a).norm();
            if (norm > lambda(a)) wv.col(a) *= lambda(a) / norm;
            constant += nu(a) * wv.col(a).dot(b.col(a));
            pooled += nu(a) * wv.col(a);
        }
        const Vector coeff = -m - b.transpose() * pooled;
        bound = constant + coeff.minCoeff();
    }
    return finish(pi, objective, std::min(bound, objective), sol.iterations, opt.tolerance);
}

/// Minimizes max_a mu_a + sigma_a sqrt(2 log(1 / xi_a)) over xi >= floor with sum xi = delta.
/// For a target t the cheapest feasible xi_a is exp(-((t - mu_a) / sigma_a)^2 / 2), so the
/// optimum is the smallest t whose cheapest allocation fits in delta; found by bisection.
inline SolveReport<TailLevels> solve_xi_tightening(const RegretProjection& proj, double delta,
                                                   const SolveOptions& opt = {}) {
    require_program_delta(delta);
    const Eigen::Index k = proj.mean.size();
    require(k >= 1 && proj.std.size() == k, ErrorKind::DimensionMismatch, "projection is malformed");
    require(proj.std.minCoeff() >= 0.0, ErrorKind::OutOfRange, "sigma must be non-negative");
    require(static_cast<double>(k) * kTailFloor < delta, ErrorKind::OutOfRange, "too many arms for the tail floor");

    const auto value = [&](const Vector& xi) {
        double v = -std::numeric_limits<double>::infinity();
        for (Eigen::Index a = 0; a < k; ++a) {
            v = std::max(v, proj.mean(a) + proj.std(a) * std::sqrt(2.0 * std::log(1.0 / xi(a))));
        }
        return v;
    };
    if (k == 1) {
        Vector xi = Vector::Constant(1, delta);
        const double v = value(xi);
        return program_detail::finish(TailLevels{xi, delta}, v, v, 0, opt.tolerance);
    }

    // Cheapest allocation for target t; infinite when t is below some mean.
    const auto required = [&](double t, Vector& xi) {
        double total = 0.0;
        for (Eigen::Index a = 0; a < k; ++a) {
            if (t < proj.mean(a)) return std::numeric_limits<double>::infinity();
            double need = kTailFloor;
            if (proj.std(a) > 0.0) {
                const double r = (t - proj.mean(a)) / proj.std(a);
                need = std::max(kTailFloor, std::exp(-0.5 * r * r));
            }
            xi(a) = need;
            total += need;
        }
        return total;
    };

    Vector xi(k);
    double lo = proj.mean.maxCoeff();
    double hi = (proj.mean.array() + proj.std.array() * std::sqrt(2.0 * std::log(static_cast<double>(k) / delta))).maxCoeff();
    int iterations = 0;
    for (; iterations < 400 && hi > lo; ++iterations) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (required(mid, xi) <= delta) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    const double total = required(hi, xi);
    // Spread the unused budget in proportion to the allocation; it only lowers each term.
    if (total < delta) xi *= delta / total;
    const double objective = value(xi);
    // Any xi with sum delta forces value >= lo whenever lo is infeasible.
    Vector scratch(k);
    const double bound = required(lo, scratch) <= delta ? std::min(lo, objective) : lo;
    return program_detail::finish(TailLevels{xi, delta}, objective, std::min(bound, objective), iterations,
                                  opt.tolerance);
}

/// Weighted CVaR_{1-delta} of scenario regret, minimized over policies with the
/// Rockafellar-Uryasev linear program. rewards(j, a) is the reward of arm a in scenario j.
inline SolveReport<Policy> solve_cvar_lp(const Matrix& rewards, const Vector& probs, double delta,
                                         const SolveOptions& opt = {}, std::size_t max_scenarios = 10000) {
    using namespace program_detail;
    const Eigen::Index jj = rewards.rows();
    const Eigen::Index kk = rewards.cols();
    require(jj >= 1 && kk >= 1, ErrorKind::EmptySample, "CVaR program needs scenarios");
    require(static_cast<std::size_t>(jj) <= max_scenarios, ErrorKind::OutOfRange, "too many scenarios");
    require(probs.size() == jj, ErrorKind::DimensionMismatch, "probabilities have wrong size");
    require(probs.minCoeff() >= 0.0 && std::abs(probs.sum() - 1.0) <= kSimplexTolerance, ErrorKind::OutOfRange,
            "probabilities must lie on the simplex");
    require_delta(delta);
    const RiskLevel level(1.0 - delta);

    const auto cvar_of = [&](const Policy& pi) {
        const Vector regret = scenario_regrets(rewards, pi);
        return weighted_cvar(std::span<const double>(regret.data(), static_cast<std::size_t>(regret.size())),
                             std::span<const double>(probs.data(), static_cast<std::size_t>(probs.size())), level);
    };
    if (kk == 1) {
        const Policy pi = Policy::one_hot(1, 0);
        return finish(pi, cvar_of(pi), 0.0, 0, opt.tolerance);
    }

    // x = (pi, z, b). Rows: pi >= 0; b_j + R_j pi + z - M_j >= 0; b >= 0.
    const Vector best = rewards.rowwise().maxCoeff();
    ConeProgram p;
    const Eigen::Index n = kk + 1 + jj;
    p.c = Vector::Zero(n);
    p.c(kk) = 1.0;
    p.c.tail(jj) = probs / delta;
    p.orthant = static_cast<std::size_t>(kk + 2 * jj);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(kk + jj * (kk + 3)));
    add_simplex_rows(trip, static_cast<std::size_t>(kk));
    p.h = Vector::Zero(kk + 2 * jj);
    for (Eigen::Index j = 0; j < jj; ++j) {
        const Eigen::Index row = kk + j;
        for (Eigen::Index a = 0; a < kk; ++a) trip.emplace_back(row, a, -rewards(j, a));
        trip.emplace_back(row, kk, -1.0);
        trip.emplace_back(row, kk + 1 + j, -1.0);
        p.h(row) = -best(j);
        trip.emplace_back(kk + jj + j, kk + 1 + j, -1.0);
    }
    p.g = SparseMatrix(kk + 2 * jj, n);
    p.g.setFromTriplets(trip.begin(), trip.end());
    p.a = simplex_equality(static_cast<std::size_t>(kk), static_cast<std::size_t>(n));
    p.b = Vector::Ones(1);

    const ConeSolution sol = solve_cone_program(p, cone_options(opt));
    const Policy pi = Policy::from_approximate(sol.x.head(kk).cwiseMax(0.0));
    const double objective = cvar_of(pi);
    // Dual representation: CVaR = max over 0 <= l <= p / delta, sum l = 1 of E_l[regret].
    const Vector lambda = project_capped_simplex(sol.z.segment(kk, jj), probs / delta);
    const double bound = scenario_dual_bound(rewards, lambda);
    return finish(pi, objective, std::min(bound, objective), sol.iterations, opt.tolerance);
}

/// min over policies of the worst scenario regret max_j (max_a R_ja - R_j pi).
inline SolveReport<Policy> solve_worst_case_lp(const Matrix& rewards, const SolveOptions& opt = {}) {
    using namespace program_detail;
    const Eigen::Index jj = rewards.rows();
    const Eigen::Index kk = rewards.cols();
    require(jj >= 1 && kk >= 1, ErrorKind::EmptySample, "worst-case program needs scenarios");
    if (kk == 1) return finish(Policy::one_hot(1, 0), 0.0, 0.0, 0, opt.tolerance);

    // x = (pi, t). Rows: pi >= 0; t + R_j pi - M_j >= 0.
    const Vector best = rewards.rowwise().maxCoeff();
    ConeProgram p;
    p.c = Vector::Zero(kk + 1);
    p.c(kk) = 1.0;
    p.orthant = static_cast<std::size_t>(kk + jj);
    std::vector<Eigen::Triplet<double>> trip;
    add_simplex_rows(trip, static_cast<std::size_t>(kk));
    p.h = Vector::Zero(kk + jj);
    for (Eigen::Index j = 0; j < jj; ++j) {
        for (Eigen::Index a = 0; a < kk; ++a) trip.emplace_back(kk + j, a, -rewards(j, a));
        trip.emplace_back(kk + j, kk, -1.0);
        p.h(kk + j) = -best(j);
    }
    p.g = SparseMatrix(kk + jj, kk + 1);
    p.g.setFromTriplets(trip.begin(), trip.end());
    p.a = simplex_equality(static_cast<std::size_t>(kk), static_cast<std::size_t>(kk + 1));
    p.b = Vector::Ones(1);

    const ConeSolution sol = solve_cone_program(p, cone_options(opt));
    const Policy pi = Policy::from_approximate(sol.x.head(kk).cwiseMax(0.0));
    const double objective = scenario_regrets(rewards, pi).maxCoeff();
    const Vector lambda =
        project_capped_simplex(sol.z.segment(kk, jj), Vector::Constant(jj, std::numeric_limits<double>::infinity()));
    const double bound = scenario_dual_bound(rewards, lambda);
    return finish(pi, objective, std::min(bound, objective), sol.iterations, opt.tolerance);
}

/// Maximizes pi^T Phi^T mu - z_{1-delta} ||Phi pi||_Sigma over the simplex. The
/// reported bound is an upper bound on the optimal value.
inline SolveReport<Policy> solve_hc_return(const BanditDomain& domain, const GaussianPosterior& post, double delta,
                                           const SolveOptions& opt = {}) {
    using namespace program_detail;
    require_program_delta(delta);
    require(post.dim() == domain.d(), ErrorKind::DimensionMismatch, "posterior has wrong dimension");
    const std::size_t k = domain.k();
    const auto kk = static_cast<Eigen::Index>(k);
    const auto dd = static_cast<Eigen::Index>(domain.d());
    const Vector m = domain.phi.transpose() * post.mean();
    const Matrix b = post.factor().lower().transpose() * domain.phi;
    const double zq = normal_upper_quantile(delta);

    const auto value = [&](const Policy& pi) { return m.dot(pi.weights()) - zq * (b * pi.weights()).norm(); };
    // For any ||u|| <= 1, value(pi) <= max_a (m - zq B^T u)_a.
    const auto upper = [&](const Vector& u) { return (m - zq * b.transpose() * u).maxCoeff(); };

    if (k == 1 || zq <= 0.0) {
        const Policy pi = Policy::one_hot(k, argmax_lowest(m));
        const double v = value(pi);
        return finish(pi, v, std::max(v, upper(Vector::Zero(dd))), 0, opt.tolerance);
    }

    // x = (pi, s). minimize -m^T pi + zq s; rows: pi >= 0, then the cone (s, B pi).
    ConeProgram p;
    p.c = Vector::Zero(kk + 1);
    p.c.head(kk) = -m;
    p.c(kk) = zq;
    p.orthant = k;
    p.soc = {domain.d() + 1};
    std::vector<Eigen::Triplet<double>> trip;
    add_simplex_rows(trip, k);
    trip.emplace_back(kk, kk, -1.0);
    for (Eigen::Index i = 0; i < dd; ++i) {
        for (Eigen::Index j = 0; j < kk; ++j) trip.emplace_back(kk + 1 + i, j, -b(i, j));
    }
    p.g = SparseMatrix(kk + 1 + dd, kk + 1);
    p.g.setFromTriplets(trip.begin(), trip.end());
    p.h = Vector::Zero(kk + 1 + dd);
    p.a = simplex_equality(k, k + 1);
    p.b = Vector::Ones(1);

    const ConeSolution sol = solve_cone_program(p, cone_options(opt));
    const Policy pi = Policy::from_approximate(sol.x.head(kk).cwiseMax(0.0));
    const double objective = value(pi);

    double bound = std::numeric_limits<double>::infinity();
    const Vector b_pi = b * pi.weights();
    if (b_pi.norm() > 0.0) bound = upper(b_pi / b_pi.norm());
    Vector u = -sol.z.segment(kk + 1, dd) / zq;
    if (u.norm() > 1.0) u /= u.norm();
    bound = std::min(bound, upper(u));
    return finish(pi, objective, std::max(bound, objective), sol.iterations, opt.tolerance);
}

}  // namespace brmob
