#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "brmob/io.hpp"

using namespace brmob;

namespace {

ErrorKind kind_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorKind::Io;
}

}  // namespace

TEST(ConfigJson, DefaultsAndOverrides) {
    const ExperimentConfig cfg = experiment_config_from_json(Json::parse(R"({
        "seed": 9, "runs": 4, "n_grid": [0, 20], "algorithms": ["brmob", "scenario_worst"],
        "domain": {"kind": "random_linf_ball", "k": 4, "d": 3, "feature_seed": 5},
        "family": "subgaussian"
    })"));
    EXPECT_EQ(cfg.seed, 9u);
    EXPECT_EQ(cfg.runs, 4u);
    EXPECT_EQ(cfg.delta, 0.1);
    EXPECT_EQ(cfg.n_grid, (std::vector<std::size_t>{0, 20}));
    EXPECT_EQ(cfg.algorithms, (std::vector<Algorithm>{Algorithm::Brmob, Algorithm::ScenarioWorst}));
    EXPECT_EQ(cfg.domain.kind, DomainKind::RandomLinfBall);
    EXPECT_EQ(cfg.domain.k, 4u);
    EXPECT_EQ(cfg.domain.feature_seed, 5u);
    EXPECT_EQ(cfg.family, BoundFamily::SubGaussian);
    EXPECT_EQ(cfg.tighten_m, 3);
}

TEST(ConfigJson, RoundTrip) {
    ExperimentConfig cfg;
    cfg.runs = 7;
    cfg.delta = 0.05;
    cfg.eval_samples = 4000;
    cfg.domain = {DomainKind::IdentitySqrtMean, 6, 6, 2, 0.5};
    const ExperimentConfig back = experiment_config_from_json(to_json(cfg));
    EXPECT_EQ(to_json(back), to_json(cfg));
}

TEST(ConfigJson, Rejections) {
    EXPECT_EQ(kind_of([] { (void)experiment_config_from_json(Json::parse(R"({"runz": 3})")); }),
              ErrorKind::ConfigInvalid);
    EXPECT_EQ(kind_of([] { (void)experiment_config_from_json(Json::parse(R"({"runs": "three"})")); }),
              ErrorKind::ConfigInvalid);
    EXPECT_EQ(kind_of([] { (void)experiment_config_from_json(Json::parse(R"({"algorithms": ["magic"]})")); }),
              ErrorKind::ConfigInvalid);
    EXPECT_EQ(kind_of([] { (void)experiment_config_from_json(Json::parse(R"({"family": "cauchy"})")); }),
              ErrorKind::ConfigInvalid);
    EXPECT_EQ(kind_of([] { (void)experiment_config_from_json(Json::parse(R"({"delta": 0.9})")); }),
              ErrorKind::ConfigInvalid);
    EXPECT_EQ(kind_of([] { (void)experiment_config_from_json(Json::parse(R"({"domain": {"kind": "identity_zero_mean", "q": 1}})")); }),
              ErrorKind::ConfigInvalid);
    EXPECT_EQ(kind_of([] { (void)io_detail::parse_json("{not json", "x"); }), ErrorKind::ConfigInvalid);
    EXPECT_EQ(kind_of([] { (void)load_experiment_config("/nonexistent/brmob.json"); }), ErrorKind::Io);
}

TEST(DomainJson, GeneratorForm) {
    const BanditDomain d = domain_from_json(Json::parse(R"({"kind": "identity_zero_mean", "k": 3, "d": 3})"));
    EXPECT_EQ(d.k(), 3u);
    EXPECT_EQ(d.phi, Matrix::Identity(3, 3));
}

TEST(DomainJson, ExplicitForm) {
    const BanditDomain d = domain_from_json(Json::parse(R"({
        "features": [[1, 0], [0, 1], [0.5, 0.5]],
        "prior_mean": [0.1, -0.2],
        "prior_cov": [[2, 0.5], [0.5, 1]],
        "noise_std": 0.3
    })"));
    EXPECT_EQ(d.k(), 3u);
    EXPECT_EQ(d.d(), 2u);
    EXPECT_EQ(d.phi(0, 2), 0.5);
    EXPECT_EQ(d.prior_mean(1), -0.2);
    EXPECT_EQ(d.prior_cov.matrix()(0, 1), 0.5);
    EXPECT_EQ(d.noise_std, 0.3);
}

TEST(DomainJson, Rejections) {
    EXPECT_EQ(kind_of([] { (void)domain_from_json(Json::parse(R"({"features": [[1, 0], [1]]})")); }),
              ErrorKind::SpecInvalid);
    EXPECT_EQ(kind_of([] { (void)domain_from_json(Json::parse(R"({"features": [[1]], "extra": 1})")); }),
              ErrorKind::ConfigInvalid);
    EXPECT_EQ(kind_of([] { (void)domain_from_json(Json::parse(R"({"features": [[1, 0]], "prior_cov": [[1, 2], [2, 1]]})")); }),
              ErrorKind::NotPositiveDefinite);
}

TEST(DatasetCsv, OneBasedActions) {
    std::istringstream in("action,reward\n1,0.5\n3,-1.25\r\n\n2,0\n");
    const LoggedDataset data = read_dataset_csv(in, 3);
    ASSERT_EQ(data.records.size(), 3u);
    EXPECT_EQ(data.records[0].action, 0u);
    EXPECT_EQ(data.records[1].action, 2u);
    EXPECT_EQ(data.records[1].reward, -1.25);
    std::ostringstream out;
    write_dataset_csv(data, out);
    EXPECT_EQ(out.str(), "action,reward\n1,0.5\n3,-1.25\n2,0\n");
}

TEST(DatasetCsv, Rejections) {
    std::istringstream zero("action,reward\n0,1\n");
    EXPECT_EQ(kind_of([&] { (void)read_dataset_csv(zero, 3); }), ErrorKind::OutOfRange);
    std::istringstream high("action,reward\n4,1\n");
    EXPECT_EQ(kind_of([&] { (void)read_dataset_csv(high, 3); }), ErrorKind::OutOfRange);
    std::istringstream header("arm,reward\n1,1\n");
    EXPECT_EQ(kind_of([&] { (void)read_dataset_csv(header, 3); }), ErrorKind::Io);
    std::istringstream junk("action,reward\n1,abc\n");
    EXPECT_EQ(kind_of([&] { (void)read_dataset_csv(junk, 3); }), ErrorKind::Io);
}

TEST(PolicyJson, BothForms) {
    EXPECT_EQ(policy_from_json(Json::parse("[0.25, 0.75]")).weights()(1), 0.75);
    EXPECT_EQ(policy_from_json(Json::parse(R"({"policy": [1, 0, 0]})")).argmax(), 0u);
    EXPECT_EQ(to_json(Policy::uniform(2)), Json::parse("[0.5, 0.5]"));
    EXPECT_EQ(kind_of([] { (void)policy_from_json(Json::parse("[0.5, 0.6]")); }), ErrorKind::OutOfRange);
    EXPECT_EQ(kind_of([] { (void)policy_from_json(Json::parse(R"(["a"])")); }), ErrorKind::ConfigInvalid);
}

TEST(PolicyJson, FileRoundTrip) {
    const auto path = std::filesystem::temp_directory_path() / "brmob_io_test_policy.json";
    {
        std::ofstream out(path);
        out << R"({"policy": [0.2, 0.8]})";
    }
    EXPECT_EQ(load_policy(path.string()).weights()(0), 0.2);
    {
        std::ofstream out(path);
        out << R"({"policy": [0.2, 0.8], "note": 1})";
    }
    EXPECT_EQ(kind_of([&] { (void)load_policy(path.string()); }), ErrorKind::ConfigInvalid);
    std::filesystem::remove(path);
}
