#include <cmath>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "brmob/rng.hpp"

using namespace brmob;

TEST(CounterRng, OutputsArePureFunctionsOfKeyAndIndex) {
    EXPECT_EQ(counter_bits(42, 7), counter_bits(42, 7));
    EXPECT_NE(counter_bits(42, 7), counter_bits(42, 8));
    EXPECT_NE(counter_bits(42, 7), counter_bits(43, 7));
    EXPECT_EQ(normal_at(5, 100), normal_at(5, 100));
}

TEST(CounterRng, SequentialViewMatchesCounters) {
    CounterRng rng(99);
    for (std::uint64_t i = 0; i < 10; ++i) EXPECT_EQ(rng.next_bits(), counter_bits(99, i));
}

TEST(DeriveSeed, LabelsAndIndicesSeparateStreams) {
    std::set<std::uint64_t> seen;
    for (const char* label : {"run", "eval", "data", "theta", "noise", "actions"}) {
        for (std::uint64_t i = 0; i < 50; ++i) seen.insert(derive_seed(1, label, i));
        seen.insert(derive_seed(1, label));
    }
    EXPECT_EQ(seen.size(), 6u * 51u);
    EXPECT_NE(derive_seed(1, "run"), derive_seed(2, "run"));
}

TEST(ToUnit, RangeAndMoments) {
    double sum = 0.0, sum_sq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = to_unit(counter_bits(3, static_cast<std::uint64_t>(i)));
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
        sum_sq += u * u;
    }
    EXPECT_NEAR(sum / n, 0.5, 0.005);
    EXPECT_NEAR(sum_sq / n - std::pow(sum / n, 2), 1.0 / 12.0, 0.002);
}

TEST(NormalAt, MomentsOfStandardNormal) {
    const int n = 400000;
    double m1 = 0, m2 = 0, m4 = 0;
    for (int i = 0; i < n; ++i) {
        const double z = normal_at(17, static_cast<std::uint64_t>(i));
        ASSERT_TRUE(std::isfinite(z));
        m1 += z;
        m2 += z * z;
        m4 += z * z * z * z;
    }
    EXPECT_NEAR(m1 / n, 0.0, 0.01);
    EXPECT_NEAR(m2 / n, 1.0, 0.01);
    EXPECT_NEAR(m4 / n, 3.0, 0.06);
}

TEST(CounterRng, NextBelowStaysInRange) {
    CounterRng rng(8);
    std::vector<int> counts(7, 0);
    for (int i = 0; i < 70000; ++i) {
        const auto v = rng.next_below(7);
        ASSERT_LT(v, 7u);
        ++counts[v];
    }
    for (int c : counts) EXPECT_NEAR(c, 10000, 500);
}
