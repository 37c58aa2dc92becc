#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "brmob/diagnostics.hpp"
#include "oracles.hpp"

using namespace brmob;

TEST(DiagnosticFamilies, Shapes) {
    const RegretProjection iid = diagnostic_family(DiagnosticFamily::Iid, 4);
    EXPECT_EQ(iid.mean, Vector::Zero(4));
    EXPECT_EQ(iid.std, Vector::Ones(4));
    const RegretProjection var = diagnostic_family(DiagnosticFamily::VaryingVariance, 4);
    EXPECT_DOUBLE_EQ(var.std(3), 2.0);
    EXPECT_DOUBLE_EQ(var.std(0), 0.5);
    EXPECT_EQ(var.mean, Vector::Zero(4));
    const RegretProjection mean = diagnostic_family(DiagnosticFamily::VaryingMean, 4);
    EXPECT_DOUBLE_EQ(mean.mean(1), 0.5);
    EXPECT_DOUBLE_EQ(mean.std(1), 1.0);
}

TEST(MaxVar, IidClosedForm) {
    // P(max of k standard normals <= t) = Phi(t)^k
    const std::size_t k = 5;
    const double closed = oracle::normal_quantile(std::pow(0.9, 1.0 / static_cast<double>(k)));
    const RegretEstimate e = max_var_estimate(diagnostic_family(DiagnosticFamily::Iid, k), 0.1, 200000, 4);
    EXPECT_NEAR(e.var_estimate, closed, 4 * e.mc_std_error + 1e-3);
    EXPECT_LT(e.mc_std_error, 0.01);
}

TEST(BoundDiagnostics, BoundsDominateMonteCarlo) {
    DiagnosticsConfig cfg;
    cfg.k_grid = {2, 10, 50};
    cfg.samples = 20000;
    const auto rows = bound_diagnostics(cfg);
    ASSERT_EQ(rows.size(), 9u);
    for (const DiagnosticRow& r : rows) {
        EXPECT_EQ(r.status, SolveStatus::Optimal);
        EXPECT_LE(r.tightened_bound, r.uniform_bound + 1e-9) << r.family << ' ' << r.k;
        EXPECT_GT(r.mc_var, 0.0);
        EXPECT_LE(r.mc_var, r.tightened_bound + 3 * r.mc_std_error) << r.family << ' ' << r.k;
        if (r.family == "iid") {
            EXPECT_NEAR(r.uniform_bound, std::sqrt(2.0 * std::log(static_cast<double>(r.k) / 0.1)), 1e-12);
            EXPECT_NEAR(r.tightened_bound, r.uniform_bound, 1e-6);
        }
        if (r.family == "varying_variance" && r.k == 50) {
            EXPECT_LT(r.tightened_bound, r.uniform_bound - 1e-3);
        }
    }
}

TEST(BoundDiagnostics, Csv) {
    DiagnosticsConfig cfg;
    cfg.k_grid = {2};
    cfg.samples = 1000;
    std::ostringstream out;
    write_diagnostics_csv(bound_diagnostics(cfg), out);
    const std::string text = out.str();
    EXPECT_EQ(text.rfind("family,k,uniform_bound,tightened_bound,mc_var,mc_std_error\n", 0), 0u);
    std::size_t lines = 0;
    for (const char c : text) lines += c == '\n';
    EXPECT_EQ(lines, 4u);
}

TEST(BoundDiagnostics, Validation) {
    DiagnosticsConfig cfg;
    cfg.samples = 999;
    EXPECT_THROW(cfg.validate(), Error);
    cfg.samples = 1000;
    cfg.k_grid = {0};
    EXPECT_THROW(cfg.validate(), Error);
}
