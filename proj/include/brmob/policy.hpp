#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "brmob/error.hpp"
#include "brmob/linalg.hpp"

namespace brmob {

inline constexpr double kSimplexTolerance = 1e-9;

/// Euclidean projection onto the probability simplex (sort-based).
inline Vector project_to_simplex(const Vector& v) {
    const Eigen::Index n = v.size();
    std::vector<double> sorted(v.data(), v.data() + n);
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cumulative = 0.0;
    double shift = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        cumulative += sorted[static_cast<std::size_t>(i)];
        const double candidate = (cumulative - 1.0) / static_cast<double>(i + 1);
        if (sorted[static_cast<std::size_t>(i)] - candidate > 0.0) shift = candidate;
    }
    Vector out = (v.array() - shift).cwiseMax(0.0);
    return out / out.sum();
}

/// A randomized policy: a point of the k-simplex.
class Policy {
public:
    Policy() = default;

    explicit Policy(Vector weights) : w_(std::move(weights)) {
        require(w_.size() > 0, ErrorKind::DimensionMismatch, "policy needs at least one arm");
        require(w_.minCoeff() >= 0.0, ErrorKind::OutOfRange, "policy weights must be non-negative");
        require(std::abs(w_.sum() - 1.0) <= kSimplexTolerance, ErrorKind::OutOfRange,
                "policy weights must sum to one");
    }

    /// Projects an approximately feasible point (e.g. a solver iterate) onto the simplex.
    static Policy from_approximate(const Vector& weights) { return Policy(project_to_simplex(weights)); }

    static Policy one_hot(std::size_t k, std::size_t arm) {
        require(arm < k, ErrorKind::OutOfRange, "arm index out of range");
        Vector w = Vector::Zero(static_cast<Eigen::Index>(k));
        w(static_cast<Eigen::Index>(arm)) = 1.0;
        return Policy(std::move(w));
    }

    static Policy uniform(std::size_t k) {
        return Policy(Vector::Constant(static_cast<Eigen::Index>(k), 1.0 / static_cast<double>(k)));
    }

    std::size_t arms() const noexcept { return static_cast<std::size_t>(w_.size()); }
    const Vector& weights() const noexcept { return w_; }
    double operator[](std::size_t a) const { return w_(static_cast<Eigen::Index>(a)); }

    /// Index of the largest weight (lowest index on ties).
    std::size_t argmax() const {
        Eigen::Index best = 0;
        for (Eigen::Index i = 1; i < w_.size(); ++i) {
            if (w_(i) > w_(best)) best = i;
        }
        return static_cast<std::size_t>(best);
    }

private:
    Vector w_;
};

/// Index of the largest entry, lowest index on ties.
inline std::size_t argmax_lowest(const Vector& v) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i) {
        if (v(i) > v(best)) best = i;
    }
    return static_cast<std::size_t>(best);
}

}  // namespace brmob
