#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "brmob/error.hpp"
#include "brmob/linalg.hpp"
#include "brmob/policy.hpp"
#include "brmob/rng.hpp"

// Conjugate Bayesian linear regression over the reward parameter theta and
// the data-coverage constant gamma.

namespace brmob {

/// Linear bandit instance: features Phi (d x k, column a is phi_a), Gaussian
/// prior N(prior_mean, prior_cov) on theta and Gaussian reward noise.
struct BanditDomain {
    Matrix phi;
    Vector prior_mean;
    SpdMatrix prior_cov;
    double noise_std = 1.0;

    std::size_t k() const noexcept { return static_cast<std::size_t>(phi.cols()); }
    std::size_t d() const noexcept { return static_cast<std::size_t>(phi.rows()); }

    Vector feature(std::size_t arm) const { return phi.col(static_cast<Eigen::Index>(arm)); }

    void validate() const {
        require(phi.rows() > 0 && phi.cols() > 0, ErrorKind::SpecInvalid, "feature matrix is empty");
        require(k() <= kMaxDimension && d() <= kMaxDimension, ErrorKind::SpecInvalid, "dimension exceeds limit");
        require(prior_mean.size() == phi.rows(), ErrorKind::DimensionMismatch, "prior mean has wrong dimension");
        require(prior_cov.dim() == d(), ErrorKind::DimensionMismatch, "prior covariance has wrong dimension");
        require(noise_std > 0.0 && std::isfinite(noise_std), ErrorKind::SpecInvalid, "noise std must be positive");
        for (Eigen::Index a = 0; a < phi.cols(); ++a) {
            require(phi.col(a).norm() <= 1.0 + 1e-12, ErrorKind::SpecInvalid,
                    "feature " + std::to_string(a + 1) + " has norm above one");
        }
        (void)cholesky(prior_cov);
    }
};

struct LoggedRecord {
    std::size_t action = 0;  // zero-based arm index
    double reward = 0.0;
};

struct LoggedDataset {
    std::vector<LoggedRecord> records;

    std::size_t size() const noexcept { return records.size(); }
    bool empty() const noexcept { return records.empty(); }

    LoggedDataset prefix(std::size_t n) const {
        require(n <= records.size(), ErrorKind::OutOfRange, "prefix longer than dataset");
        return LoggedDataset{{records.begin(), records.begin() + static_cast<std::ptrdiff_t>(n)}};
    }

    void validate(std::size_t k) const {
        for (const auto& r : records) {
            require(r.action < k, ErrorKind::OutOfRange, "logged action out of range");
            require(std::isfinite(r.reward), ErrorKind::OutOfRange, "logged reward is not finite");
        }
    }
};

class GaussianPosterior {
public:
    GaussianPosterior(Vector mean, SpdMatrix cov)
        : mean_(std::move(mean)), cov_(std::move(cov)), factor_(cholesky(cov_)) {
        require(static_cast<std::size_t>(mean_.size()) == cov_.dim(), ErrorKind::DimensionMismatch,
                "posterior mean and covariance disagree");
    }

    std::size_t dim() const noexcept { return cov_.dim(); }
    const Vector& mean() const noexcept { return mean_; }
    const SpdMatrix& cov() const noexcept { return cov_; }
    const SpdFactor& factor() const noexcept { return factor_; }

private:
    Vector mean_;
    SpdMatrix cov_;
    SpdFactor factor_;
};

/// Running sufficient statistics of a dataset: G_n = sum phi phi^T and
/// B_n y_n = sum phi y. Memory is O(d^2) regardless of n.
class DataSummary {
public:
    explicit DataSummary(std::size_t d)
        : gram_(Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d))),
          feature_reward_(Vector::Zero(static_cast<Eigen::Index>(d))) {}

    void add(const BanditDomain& domain, const LoggedRecord& r) {
        require(r.action < domain.k(), ErrorKind::OutOfRange, "logged action out of range");
        const auto phi = domain.phi.col(static_cast<Eigen::Index>(r.action));
        gram_.noalias() += phi * phi.transpose();
        feature_reward_.noalias() += r.reward * phi;
        ++n_;
    }

    std::size_t n() const noexcept { return n_; }
    const Matrix& gram() const noexcept { return gram_; }
    const Vector& feature_reward() const noexcept { return feature_reward_; }

private:
    Matrix gram_;
    Vector feature_reward_;
    std::size_t n_ = 0;
};

inline DataSummary summarize(const BanditDomain& domain, const LoggedDataset& data) {
    DataSummary s(domain.d());
    for (const auto& r : data.records) s.add(domain, r);
    return s;
}

/// Sigma_n = (Sigma_0^{-1} + G_n / s^2)^{-1},
/// mu_n = Sigma_n (Sigma_0^{-1} mu_0 + B_n y_n / s^2).
inline GaussianPosterior posterior_update(const BanditDomain& domain, const DataSummary& summary) {
    if (summary.n() == 0) return GaussianPosterior(domain.prior_mean, domain.prior_cov);
    const double inv_noise = 1.0 / (domain.noise_std * domain.noise_std);
    const SpdMatrix prior_precision = spd_inverse(domain.prior_cov);
    const SpdMatrix precision(prior_precision.matrix() + inv_noise * summary.gram());
    const SpdMatrix cov = spd_inverse(precision);
    const Vector rhs = prior_precision.matrix() * domain.prior_mean + inv_noise * summary.feature_reward();
    Vector mean = cholesky(precision).solve(rhs);
    return GaussianPosterior(std::move(mean), cov);
}

inline GaussianPosterior posterior_update(const BanditDomain& domain, const LoggedDataset& data) {
    data.validate(domain.k());
    return posterior_update(domain, summarize(domain, data));
}

struct CoverageEstimate {
    double gamma = 0.0;
    std::size_t n = 0;
};

/// Largest gamma with G_n >= gamma n phi_a phi_a^T for every arm:
/// min_a 1 / (n phi_a^T G_n^+ phi_a), and 0 when some phi_a leaves the range of G_n.
inline CoverageEstimate coverage_gamma(const BanditDomain& domain, const DataSummary& summary) {
    require(summary.n() > 0, ErrorKind::EmptyDataset, "coverage needs at least one record");
    Eigen::SelfAdjointEigenSolver<Matrix> eig(summary.gram());
    const Vector& lambda = eig.eigenvalues();
    const double range_tol = 1e-10 * std::max(1.0, lambda.maxCoeff());
    const double n = static_cast<double>(summary.n());

    double gamma = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < domain.k(); ++a) {
        const Vector coeff = eig.eigenvectors().transpose() * domain.feature(a);
        double outside = 0.0;
        double quad = 0.0;
        for (Eigen::Index i = 0; i < lambda.size(); ++i) {
            if (lambda(i) > range_tol) {
                quad += coeff(i) * coeff(i) / lambda(i);
            } else {
                outside += coeff(i) * coeff(i);
            }
        }
        if (outside > 1e-12 * std::max(1e-300, coeff.squaredNorm())) return {0.0, summary.n()};
        if (quad > 0.0) gamma = std::min(gamma, 1.0 / (n * quad));
    }
    return {gamma, summary.n()};
}

inline CoverageEstimate coverage_gamma(const BanditDomain& domain, const LoggedDataset& data) {
    require(!data.empty(), ErrorKind::EmptyDataset, "coverage needs at least one record");
    data.validate(domain.k());
    return coverage_gamma(domain, summarize(domain, data));
}

/// Draws first .. first + count - 1 of the stream keyed by `seed`, as rows of
/// mu + L z; entry (j, i) of z is standard normal number j*d + i of the stream.
inline Matrix sample_posterior_range(const GaussianPosterior& post, std::size_t first, std::size_t count,
                                     std::uint64_t seed) {
    const auto d = static_cast<Eigen::Index>(post.dim());
    const auto rows = static_cast<Eigen::Index>(count);
    Matrix z(rows, d);
    for (Eigen::Index j = 0; j < rows; ++j) {
        const auto base = (static_cast<std::uint64_t>(first) + static_cast<std::uint64_t>(j)) * static_cast<std::uint64_t>(d);
        for (Eigen::Index i = 0; i < d; ++i) z(j, i) = normal_at(seed, base + static_cast<std::uint64_t>(i));
    }
    Matrix draws = z * post.factor().lower().transpose();
    draws.rowwise() += post.mean().transpose();
    return draws;
}

/// count x d matrix of posterior draws; identical inputs give identical output.
inline Matrix sample_posterior(const GaussianPosterior& post, std::size_t count, std::uint64_t seed) {
    require(count >= 1, ErrorKind::OutOfRange, "sample count must be positive");
    return sample_posterior_range(post, 0, count, seed);
}

/// Logged data with actions drawn from `logging` and rewards N(phi_a^T theta*, noise^2).
/// Record i depends only on (seed, i), so shorter datasets are prefixes of longer ones.
inline LoggedDataset simulate_logged_data(const BanditDomain& domain, const Vector& theta_star,
                                          const Policy& logging, std::size_t n, std::uint64_t seed) {
    require(logging.arms() == domain.k(), ErrorKind::DimensionMismatch, "logging policy has wrong arm count");
    require(static_cast<std::size_t>(theta_star.size()) == domain.d(), ErrorKind::DimensionMismatch,
            "theta* has wrong dimension");
    const std::uint64_t action_key = derive_seed(seed, "actions");
    const std::uint64_t noise_key = derive_seed(seed, "noise");
    const Vector means = domain.phi.transpose() * theta_star;

    LoggedDataset data;
    data.records.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = to_unit(counter_bits(action_key, i));
        std::size_t arm = domain.k() - 1;
        double cumulative = 0.0;
        for (std::size_t a = 0; a < domain.k(); ++a) {
            cumulative += logging[a];
            if (u < cumulative && logging[a] > 0.0) {
                arm = a;
                break;
            }
        }
        while (logging[arm] <= 0.0 && arm > 0) --arm;
        const double reward = means(static_cast<Eigen::Index>(arm)) + domain.noise_std * normal_at(noise_key, i);
        data.records.push_back({arm, reward});
    }
    return data;
}

}  // namespace brmob
