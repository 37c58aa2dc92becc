#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "brmob/error.hpp"
#include "brmob/linalg.hpp"
#include "brmob/posterior.hpp"
#include "brmob/rng.hpp"

namespace brmob {

enum class DomainKind { IdentityZeroMean, IdentitySqrtMean, RandomLinfBall };

inline std::string_view to_string(DomainKind kind) {
    switch (kind) {
        case DomainKind::IdentityZeroMean: return "identity_zero_mean";
        case DomainKind::IdentitySqrtMean: return "identity_sqrt_mean";
        case DomainKind::RandomLinfBall: return "random_linf_ball";
    }
    return "unknown";
}

inline DomainKind parse_domain_kind(std::string_view text) {
    for (const DomainKind k : {DomainKind::IdentityZeroMean, DomainKind::IdentitySqrtMean, DomainKind::RandomLinfBall}) {
        if (text == to_string(k)) return k;
    }
    fail(ErrorKind::ConfigInvalid, "unknown domain kind '" + std::string(text) + "'");
}

struct DomainSpec {
    DomainKind kind = DomainKind::IdentityZeroMean;
    std::size_t k = 5;
    std::size_t d = 5;
    std::uint64_t feature_seed = 0;
    double noise_std = 1.0;

    void validate() const {
        require(k >= 1 && d >= 1, ErrorKind::SpecInvalid, "k and d must be positive");
        require(k <= kMaxDimension && d <= kMaxDimension, ErrorKind::SpecInvalid, "dimension exceeds limit");
        require(noise_std > 0.0, ErrorKind::SpecInvalid, "noise std must be positive");
        if (kind != DomainKind::RandomLinfBall) {
            require(k == d, ErrorKind::SpecInvalid, "identity domains need k == d");
        }
    }

    std::string label() const {
        return std::string(to_string(kind)) + "_k" + std::to_string(k) + "_d" + std::to_string(d);
    }
};

/// Prior N(mu_0, I) with Phi = I (identity kinds) or uniform draws from
/// [-1, 1]^d scaled by 1/sqrt(d) into the unit ball.
inline BanditDomain build_domain(const DomainSpec& spec) {
    spec.validate();
    const auto k = static_cast<Eigen::Index>(spec.k);
    const auto d = static_cast<Eigen::Index>(spec.d);
    BanditDomain domain{Matrix::Identity(d, k), Vector::Zero(d), SpdMatrix::identity(spec.d), spec.noise_std};
    switch (spec.kind) {
        case DomainKind::IdentityZeroMean:
            break;
        case DomainKind::IdentitySqrtMean:
            for (Eigen::Index a = 0; a < d; ++a) domain.prior_mean(a) = std::sqrt(static_cast<double>(a + 1));
            break;
        case DomainKind::RandomLinfBall: {
            const std::uint64_t key = derive_seed(spec.feature_seed, "features");
            const double scale = 1.0 / std::sqrt(static_cast<double>(spec.d));
            for (Eigen::Index a = 0; a < k; ++a) {
                for (Eigen::Index i = 0; i < d; ++i) {
                    const auto idx = static_cast<std::uint64_t>(a * d + i);
                    domain.phi(i, a) = scale * (2.0 * to_unit(counter_bits(key, idx)) - 1.0);
                }
            }
            break;
        }
    }
    domain.validate();
    return domain;
}

}  // namespace brmob
