#pragma once

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "brmob/bounds.hpp"
#include "brmob/diagnostics.hpp"
#include "brmob/domains.hpp"
#include "brmob/error.hpp"
#include "brmob/experiment.hpp"
#include "brmob/policy.hpp"
#include "brmob/posterior.hpp"
#include "brmob/report.hpp"

// File formats:
//   experiment config  JSON object with ExperimentConfig fields, unknown keys rejected
//   domain file        JSON, either a generator spec {"kind", "k", "d", ...} or an
//                      explicit instance {"features": [[phi_1], ...], "prior_mean",
//                      "prior_cov", "noise_std"}
//   dataset            CSV with header "action,reward", actions numbered from 1
//   policy             JSON {"policy": [p_1, ..., p_k]}, a bare array, or solve output

namespace brmob {

using Json = nlohmann::json;

namespace io_detail {

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorKind::Io, "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline Json parse_json(const std::string& text, const std::string& what) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        fail(ErrorKind::ConfigInvalid, what + ": " + e.what());
    }
}

inline void check_keys(const Json& obj, std::initializer_list<std::string_view> allowed, const std::string& what) {
    require(obj.is_object(), ErrorKind::ConfigInvalid, what + " must be a JSON object");
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const std::string_view key : allowed) known = known || item.key() == key;
        require(known, ErrorKind::ConfigInvalid, "unknown key '" + item.key() + "' in " + what);
    }
}

/// Typed field access that reports a ConfigInvalid error instead of a json exception.
template <class T>
T get(const Json& obj, const char* key) {
    try {
        return obj.at(key).get<T>();
    } catch (const Json::exception& e) {
        fail(ErrorKind::ConfigInvalid, std::string("field '") + key + "': " + e.what());
    }
}

template <class T>
void get_if(const Json& obj, const char* key, T& out) {
    if (obj.contains(key)) out = get<T>(obj, key);
}

inline Vector to_vector(const std::vector<double>& v) {
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace io_detail

inline DomainSpec domain_spec_from_json(const Json& j) {
    io_detail::check_keys(j, {"kind", "k", "d", "feature_seed", "noise_std"}, "domain spec");
    DomainSpec spec;
    spec.kind = parse_domain_kind(io_detail::get<std::string>(j, "kind"));
    io_detail::get_if(j, "k", spec.k);
    io_detail::get_if(j, "d", spec.d);
    io_detail::get_if(j, "feature_seed", spec.feature_seed);
    io_detail::get_if(j, "noise_std", spec.noise_std);
    return spec;
}

inline Json to_json(const DomainSpec& s) {
    return {{"kind", std::string(to_string(s.kind))}, {"k", s.k}, {"d", s.d}, {"feature_seed", s.feature_seed},
            {"noise_std", s.noise_std}};
}

inline ExperimentConfig experiment_config_from_json(const Json& j) {
    io_detail::check_keys(j,
                          {"seed", "delta", "runs", "n_grid", "eval_samples", "algorithms", "domain", "tighten_m",
                           "family", "scenario_samples", "worst_case_samples", "threads"},
                          "experiment config");
    ExperimentConfig cfg;
    io_detail::get_if(j, "seed", cfg.seed);
    io_detail::get_if(j, "delta", cfg.delta);
    io_detail::get_if(j, "runs", cfg.runs);
    io_detail::get_if(j, "n_grid", cfg.n_grid);
    io_detail::get_if(j, "eval_samples", cfg.eval_samples);
    if (j.contains("algorithms")) {
        cfg.algorithms.clear();
        for (const auto& name : io_detail::get<std::vector<std::string>>(j, "algorithms")) {
            cfg.algorithms.push_back(parse_algorithm(name));
        }
    }
    if (j.contains("domain")) cfg.domain = domain_spec_from_json(j.at("domain"));
    io_detail::get_if(j, "tighten_m", cfg.tighten_m);
    if (j.contains("family")) {
        try {
            cfg.family = parse_family(io_detail::get<std::string>(j, "family"));
        } catch (const Error& e) {
            fail(ErrorKind::ConfigInvalid, e.what());
        }
    }
    io_detail::get_if(j, "scenario_samples", cfg.scenario_samples);
    io_detail::get_if(j, "worst_case_samples", cfg.worst_case_samples);
    io_detail::get_if(j, "threads", cfg.threads);
    cfg.validate();
    return cfg;
}

inline Json to_json(const ExperimentConfig& cfg) {
    Json algs = Json::array();
    for (const Algorithm a : cfg.algorithms) algs.push_back(std::string(to_string(a)));
    return {{"seed", cfg.seed},
            {"delta", cfg.delta},
            {"runs", cfg.runs},
            {"n_grid", cfg.n_grid},
            {"eval_samples", cfg.eval_samples},
            {"algorithms", algs},
            {"domain", to_json(cfg.domain)},
            {"tighten_m", cfg.tighten_m},
            {"family", std::string(to_string(cfg.family))},
            {"scenario_samples", cfg.scenario_samples},
            {"worst_case_samples", cfg.worst_case_samples},
            {"threads", cfg.threads}};
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
    return experiment_config_from_json(io_detail::parse_json(io_detail::read_text(path), path));
}

inline BanditDomain domain_from_json(const Json& j) {
    require(j.is_object(), ErrorKind::ConfigInvalid, "domain must be a JSON object");
    if (j.contains("kind")) return build_domain(domain_spec_from_json(j));
    io_detail::check_keys(j, {"features", "prior_mean", "prior_cov", "noise_std"}, "domain");
    const auto features = io_detail::get<std::vector<std::vector<double>>>(j, "features");
    require(!features.empty(), ErrorKind::SpecInvalid, "domain needs at least one feature vector");
    const std::size_t d = features.front().size();
    Matrix phi(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(features.size()));
    for (std::size_t a = 0; a < features.size(); ++a) {
        require(features[a].size() == d, ErrorKind::SpecInvalid, "feature vectors differ in length");
        phi.col(static_cast<Eigen::Index>(a)) = io_detail::to_vector(features[a]);
    }
    Vector mean = Vector::Zero(static_cast<Eigen::Index>(d));
    if (j.contains("prior_mean")) mean = io_detail::to_vector(io_detail::get<std::vector<double>>(j, "prior_mean"));
    Matrix cov = Matrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    if (j.contains("prior_cov")) {
        const auto rows = io_detail::get<std::vector<std::vector<double>>>(j, "prior_cov");
        require(rows.size() == d, ErrorKind::SpecInvalid, "prior covariance has wrong size");
        for (std::size_t i = 0; i < d; ++i) {
            require(rows[i].size() == d, ErrorKind::SpecInvalid, "prior covariance has wrong size");
            cov.row(static_cast<Eigen::Index>(i)) = io_detail::to_vector(rows[i]).transpose();
        }
    }
    double noise = 1.0;
    io_detail::get_if(j, "noise_std", noise);
    require(mean.size() == static_cast<Eigen::Index>(d), ErrorKind::SpecInvalid, "prior mean has wrong size");
    BanditDomain domain{phi, mean, SpdMatrix(cov), noise};
    domain.validate();
    return domain;
}

inline BanditDomain load_domain(const std::string& path) {
    return domain_from_json(io_detail::parse_json(io_detail::read_text(path), path));
}

inline LoggedDataset read_dataset_csv(std::istream& in, std::size_t k) {
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), ErrorKind::Io, "dataset is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    require(line == "action,reward", ErrorKind::Io, "dataset header must be 'action,reward'");
    LoggedDataset data;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = report_detail::split(line, ',');
        require(f.size() == 2, ErrorKind::Io, "dataset line " + std::to_string(lineno) + " needs two fields");
        const auto action = report_detail::parse_number<std::size_t>(f[0], "action");
        require(action >= 1 && action <= k, ErrorKind::OutOfRange,
                "dataset line " + std::to_string(lineno) + ": action out of range");
        data.records.push_back({action - 1, report_detail::parse_number<double>(f[1], "reward")});
    }
    data.validate(k);
    return data;
}

inline LoggedDataset load_dataset(const std::string& path, std::size_t k) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorKind::Io, "cannot open '" + path + "'");
    return read_dataset_csv(in, k);
}

inline void write_dataset_csv(const LoggedDataset& data, std::ostream& out) {
    out << "action,reward\n";
    for (const LoggedRecord& r : data.records) out << r.action + 1 << ',' << format_double(r.reward) << '\n';
}

inline Policy policy_from_json(const Json& j) {
    const Json& arr = j.is_object() ? j.at("policy") : j;
    require(arr.is_array(), ErrorKind::ConfigInvalid, "policy must be an array of probabilities");
    std::vector<double> w;
    try {
        w = arr.get<std::vector<double>>();
    } catch (const Json::exception& e) {
        fail(ErrorKind::ConfigInvalid, std::string("policy: ") + e.what());
    }
    return Policy(io_detail::to_vector(w));
}

inline Policy load_policy(const std::string& path) {
    const Json j = io_detail::parse_json(io_detail::read_text(path), path);
    // the solve command's output is accepted as a policy file
    if (j.is_object()) {
        io_detail::check_keys(j, {"policy", "algorithm", "rho", "best_step", "status", "trace"}, "policy file");
    }
    return policy_from_json(j);
}

inline Json to_json(const Policy& pi) {
    return Json(std::vector<double>(pi.weights().data(), pi.weights().data() + pi.weights().size()));
}

}  // namespace brmob
