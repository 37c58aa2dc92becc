#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <string_view>

#include "brmob/error.hpp"
#include "brmob/linalg.hpp"
#include "brmob/policy.hpp"
#include "brmob/posterior.hpp"
#include "brmob/risk.hpp"

// Analytical VaR bounds on the regret max_a r(a) - r(pi) under a Gaussian
// posterior. The regret vector x_a = theta^T Phi (1_a - pi) is Gaussian with
// per-coordinate marginals N(mu_a^pi, (sigma_a^pi)^2).

namespace brmob {

/// Smallest tail weight passed to a normal quantile.
inline constexpr double kTailFloor = 1e-9;

enum class BoundFamily { Gaussian, SubGaussian };

inline std::string_view to_string(BoundFamily f) {
    return f == BoundFamily::Gaussian ? "gaussian" : "subgaussian";
}

inline BoundFamily parse_family(std::string_view text) {
    if (text == "gaussian") return BoundFamily::Gaussian;
    if (text == "subgaussian") return BoundFamily::SubGaussian;
    fail(ErrorKind::ConfigInvalid, "unknown bound family '" + std::string(text) + "'");
}

struct RegretProjection {
    Vector mean;  // mu_a^pi
    Vector std;   // sigma_a^pi

    std::size_t arms() const noexcept { return static_cast<std::size_t>(mean.size()); }
};

/// Tail allocation xi on the k-simplex; arm a gets tail level delta * xi_a.
class TailWeights {
public:
    explicit TailWeights(Vector xi) : xi_(std::move(xi)) {
        require(xi_.size() > 0, ErrorKind::DimensionMismatch, "tail weights need at least one arm");
        require(xi_.minCoeff() > 0.0, ErrorKind::OutOfRange, "tail weights must be positive");
        require(std::abs(xi_.sum() - 1.0) <= kSimplexTolerance, ErrorKind::OutOfRange,
                "tail weights must sum to one");
    }

    static TailWeights uniform(std::size_t k) {
        return TailWeights(Vector::Constant(static_cast<Eigen::Index>(k), 1.0 / static_cast<double>(k)));
    }

    std::size_t arms() const noexcept { return static_cast<std::size_t>(xi_.size()); }
    const Vector& values() const noexcept { return xi_; }

private:
    Vector xi_;
};

struct BoundCoefficients {
    Vector nu;
    BoundFamily family = BoundFamily::Gaussian;
};

/// Ellipsoid {theta : ||theta - center||^2_{shape^{-1}} <= radius_sq}.
struct CredibleEllipsoid {
    Vector center;
    SpdMatrix shape;
    double radius_sq = 0.0;

    bool contains(const Vector& theta) const {
        const double r = inverse_weighted_norm(theta - center, cholesky(shape));
        return r * r <= radius_sq;
    }
};

inline CredibleEllipsoid credible_ellipsoid(const GaussianPosterior& post, double delta) {
    require(delta > 0.0 && delta < 1.0, ErrorKind::OutOfRange, "delta must lie in (0, 1)");
    return {post.mean(), post.cov(), chi2_quantile(static_cast<int>(post.dim()), 1.0 - delta)};
}

inline void require_delta(double delta) {
    require(delta > 0.0 && delta < 1.0, ErrorKind::OutOfRange, "delta must lie in (0, 1)");
}

/// Delta accepted by the optimization programs: (0, 1/2].
inline void require_program_delta(double delta) {
    require(delta > 0.0 && delta <= 0.5, ErrorKind::OutOfRange, "delta must lie in (0, 1/2]");
}

/// mu_a^pi = mu^T Phi (1_a - pi), sigma_a^pi = ||Phi (1_a - pi)||_Sigma.
inline RegretProjection regret_projection(const BanditDomain& domain, const GaussianPosterior& post,
                                          const Policy& pi) {
    require(pi.arms() == domain.k(), ErrorKind::DimensionMismatch, "policy has wrong arm count");
    require(post.dim() == domain.d(), ErrorKind::DimensionMismatch, "posterior has wrong dimension");
    const Vector rewards = domain.phi.transpose() * post.mean();
    // B = L^T Phi, so ||Phi x||_Sigma = ||B x||.
    const Matrix b = post.factor().lower().transpose() * domain.phi;
    const Vector b_pi = b * pi.weights();
    const double mean_pi = rewards.dot(pi.weights());

    RegretProjection proj{Vector(rewards.size()), Vector(rewards.size())};
    for (Eigen::Index a = 0; a < rewards.size(); ++a) {
        proj.mean(a) = rewards(a) - mean_pi;
        proj.std(a) = (b.col(a) - b_pi).norm();
    }
    return proj;
}

/// max_a mu_a^pi + sigma_a^pi * z_{1 - delta xi_a}.
inline double action_set_bound(const RegretProjection& proj, double delta, const TailWeights& xi) {
    require_delta(delta);
    require(xi.arms() == proj.arms(), ErrorKind::DimensionMismatch, "tail weights have wrong arm count");
    double best = -std::numeric_limits<double>::infinity();
    for (Eigen::Index a = 0; a < proj.mean.size(); ++a) {
        const double level = delta * std::max(xi.values()(a), kTailFloor);
        const double coeff = proj.std(a) == 0.0 ? 0.0 : normal_upper_quantile(level);
        best = std::max(best, proj.mean(a) + proj.std(a) * coeff);
    }
    return best;
}

/// max_a mu_a^pi + sigma_a^pi * sqrt(2 log(1 / (delta xi_a))), the form the tightening program optimizes.
inline double subgaussian_action_set_bound(const RegretProjection& proj, double delta, const TailWeights& xi) {
    require_delta(delta);
    require(xi.arms() == proj.arms(), ErrorKind::DimensionMismatch, "tail weights have wrong arm count");
    double best = -std::numeric_limits<double>::infinity();
    for (Eigen::Index a = 0; a < proj.mean.size(); ++a) {
        const double level = delta * std::max(xi.values()(a), kTailFloor);
        best = std::max(best, proj.mean(a) + proj.std(a) * std::sqrt(2.0 * std::log(1.0 / level)));
    }
    return best;
}

/// max_a mu_a^pi + sigma_a^pi * sqrt(chi2_d(1 - delta)).
inline double parameter_space_bound(const RegretProjection& proj, double delta, std::size_t d) {
    require_delta(delta);
    require(d >= 1, ErrorKind::OutOfRange, "dimension must be positive");
    const double coeff = std::sqrt(chi2_quantile(static_cast<int>(d), 1.0 - delta));
    return (proj.mean + coeff * proj.std).maxCoeff();
}

inline BoundCoefficients combined_nu(double delta, std::size_t k, std::size_t d, BoundFamily family) {
    require_program_delta(delta);
    require(k >= 1 && d >= 1, ErrorKind::OutOfRange, "k and d must be positive");
    const auto kk = static_cast<Eigen::Index>(k);
    if (family == BoundFamily::SubGaussian) {
        return {Vector::Constant(kk, std::sqrt(2.0 * std::log(static_cast<double>(k) / delta))), family};
    }
    const double chi = std::sqrt(chi2_quantile(static_cast<int>(d), 1.0 - delta));
    const double z = normal_upper_quantile(delta / static_cast<double>(k));
    return {Vector::Constant(kk, std::min(chi, z)), family};
}

/// max_a mu_a^pi + sigma_a^pi * nu_a.
inline double bound_with_nu(const RegretProjection& proj, const Vector& nu) {
    require(nu.size() == proj.mean.size(), ErrorKind::DimensionMismatch, "nu has wrong arm count");
    return (proj.mean + proj.std.cwiseProduct(nu)).maxCoeff();
}

inline double bound_for_policy(const BanditDomain& domain, const GaussianPosterior& post, const Policy& pi,
                               double delta, BoundFamily family) {
    const BoundCoefficients nu = combined_nu(delta, domain.k(), domain.d(), family);
    return bound_with_nu(regret_projection(domain, post, pi), nu.nu);
}

}  // namespace brmob
