#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <string_view>

// Counter-based random numbers. A stream is identified by a 64-bit key; the
// i-th output of a stream is a pure function of (key, i), so draws never
// depend on scheduling or on how many values other streams consumed.
//
// Seed derivation: derive_seed(master, label) = mix(master ^ mix(fnv1a(label))),
// where mix is the SplitMix64 finalizer. Nested labels are chained.

namespace brmob {

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t finalize64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace detail

/// SplitMix64 output i of the stream keyed by `key`.
constexpr std::uint64_t counter_bits(std::uint64_t key, std::uint64_t index) {
    return detail::finalize64(key + (index + 1) * detail::kGolden);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view label) {
    return detail::finalize64(master ^ detail::finalize64(detail::fnv1a(label) + detail::kGolden));
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view label, std::uint64_t index) {
    return derive_seed(derive_seed(master, label), "#") ^ detail::finalize64(index + detail::kGolden);
}

/// Uniform in [0, 1) with 53 random bits.
constexpr double to_unit(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

/// Standard normal number `index` of stream `key` (Box-Muller, cosine branch).
inline double normal_at(std::uint64_t key, std::uint64_t index) {
    const double u1 = (static_cast<double>(counter_bits(key, 2 * index) >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = to_unit(counter_bits(key, 2 * index + 1));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Sequential view over one counter stream.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t key) : key_(key), normal_key_(derive_seed(key, "normal")) {}

    std::uint64_t next_bits() { return counter_bits(key_, counter_++); }
    double next_uniform() { return to_unit(next_bits()); }
    double next_normal() { return normal_at(normal_key_, normal_counter_++); }
    std::uint64_t next_below(std::uint64_t bound) { return static_cast<std::uint64_t>(next_uniform() * bound) % bound; }

    std::uint64_t key() const noexcept { return key_; }

private:
    std::uint64_t key_;
    std::uint64_t normal_key_;
    std::uint64_t counter_ = 0;
    std::uint64_t normal_counter_ = 0;
};

}  // namespace brmob
