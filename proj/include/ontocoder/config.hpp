// Copyright 2026 The Ontocoder Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "ontocoder/error.hpp"
#include "ontocoder/eval.hpp"
#include "ontocoder/hash.hpp"
#include "ontocoder/search.hpp"

namespace ontocoder {

struct BackendConfig {
    std::string kind = "http"; // http | replay | oracle
    std::string endpoint;
    std::string model_id = "gpt-4";
    std::string credential_env_var;
    double temperature = 0.0;
    int max_output_tokens = 1024;
    int max_in_flight = 4;
    // oracle backend only
    double oracle_false_negative_rate = 0.0;
    double oracle_false_positive_rate = 0.0;
};

/// A run configuration, loaded from a single JSON file. Credentials never
/// live here; the config names an environment variable instead.
struct RunConfig {
    std::string ontology_path;
    std::string documents_dir;
    std::string gold_labels_path; // optional unless the backend is the oracle
    std::string template_path;
    std::string cache_dir;   // cache for http/oracle; recording source for replay
    std::string output_dir = "out";
    BackendConfig backend;
    std::size_t budget = 50;
    int workers = 1;
    std::string class_set_policy = "gold";
    std::string frontier_discipline = "fifo";
    std::uint64_t rng_seed = 0;
};

inline RunConfig run_config_from_json(const nlohmann::json& j) {
    RunConfig cfg;
    try {
        cfg.ontology_path = j.value("ontology_path", "");
        cfg.documents_dir = j.value("documents_dir", "");
        cfg.gold_labels_path = j.value("gold_labels_path", "");
        cfg.template_path = j.value("template_path", "");
        cfg.cache_dir = j.value("cache_dir", "");
        cfg.output_dir = j.value("output_dir", "out");
        if (j.contains("budget")) {
            const auto& b = j.at("budget");
            if (b.is_string() && b.get<std::string>() == "unlimited") {
                cfg.budget = kUnlimitedBudget;
            } else {
                long long v = b.get<long long>();
                if (v < 1) throw ValidationError("config: budget must be >= 1 or \"unlimited\"");
                cfg.budget = static_cast<std::size_t>(v);
            }
        }
        cfg.workers = j.value("workers", 1);
        cfg.class_set_policy = j.value("class_set_policy", "gold");
        cfg.frontier_discipline = j.value("frontier_discipline", "fifo");
        cfg.rng_seed = j.value("rng_seed", std::uint64_t{0});
        if (j.contains("backend")) {
            const auto& b = j.at("backend");
            cfg.backend.kind = b.value("kind", "http");
            cfg.backend.endpoint = b.value("endpoint", "");
            cfg.backend.model_id = b.value("model_id", "gpt-4");
            cfg.backend.credential_env_var = b.value("credential_env_var", "");
            cfg.backend.temperature = b.value("temperature", 0.0);
            cfg.backend.max_output_tokens = b.value("max_output_tokens", 1024);
            cfg.backend.max_in_flight = b.value("max_in_flight", 4);
            cfg.backend.oracle_false_negative_rate = b.value("oracle_false_negative_rate", 0.0);
            cfg.backend.oracle_false_positive_rate = b.value("oracle_false_positive_rate", 0.0);
        }
    } catch (const nlohmann::json::exception& ex) {
        throw ValidationError(std::string("config: ") + ex.what());
    }
    return cfg;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open config file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& ex) {
        throw ValidationError("config file is not valid JSON (" + path.string() + "): " + ex.what());
    }
    return run_config_from_json(j);
}

/// Validate a config before running; error messages name the offending
/// field.
inline void validate_run_config(const RunConfig& cfg) {
    namespace fs = std::filesystem;
    auto require_file = [](const std::string& value, const char* field) {
        if (value.empty()) throw ValidationError(std::string("config: ") + field + " is required");
        if (!fs::exists(value)) {
            throw ValidationError(std::string("config: ") + field + " does not exist: " + value);
        }
    };
    require_file(cfg.ontology_path, "ontology_path");
    if (cfg.documents_dir.empty() || !fs::is_directory(cfg.documents_dir)) {
        throw ValidationError("config: documents_dir is not a directory: " + cfg.documents_dir);
    }
    require_file(cfg.template_path, "template_path");
    if (!cfg.gold_labels_path.empty()) require_file(cfg.gold_labels_path, "gold_labels_path");
    if (cfg.budget < 1) throw ValidationError("config: budget must be >= 1");
    if (cfg.workers < 1) throw ValidationError("config: workers must be >= 1");
    if (cfg.backend.temperature < 0) throw ValidationError("config: backend.temperature must be >= 0");
    if (cfg.backend.max_output_tokens < 1) {
        throw ValidationError("config: backend.max_output_tokens must be >= 1");
    }
    class_set_policy_from(cfg.class_set_policy);
    frontier_discipline_from(cfg.frontier_discipline);

    const std::string& kind = cfg.backend.kind;
    if (kind == "http") {
        if (cfg.backend.endpoint.empty()) {
            throw ValidationError("config: backend.endpoint is required for the http backend");
        }
    } else if (kind == "replay") {
        if (cfg.cache_dir.empty() || !fs::is_directory(cfg.cache_dir)) {
            throw ValidationError("config: cache_dir must be an existing directory for the replay backend");
        }
    } else if (kind == "oracle") {
        if (cfg.gold_labels_path.empty()) {
            throw ValidationError("config: gold_labels_path is required for the oracle backend");
        }
        if (cfg.backend.oracle_false_negative_rate < 0 || cfg.backend.oracle_false_negative_rate > 1 ||
            cfg.backend.oracle_false_positive_rate < 0 || cfg.backend.oracle_false_positive_rate > 1) {
            throw ValidationError("config: oracle rates must lie in [0,1]");
        }
    } else {
        throw ValidationError("config: backend.kind must be http, replay or oracle (got '" + kind + "')");
    }
}

inline nlohmann::json run_config_to_json(const RunConfig& cfg) {
    return {{"ontology_path", cfg.ontology_path},
            {"documents_dir", cfg.documents_dir},
            {"gold_labels_path", cfg.gold_labels_path},
            {"template_path", cfg.template_path},
            {"cache_dir", cfg.cache_dir},
            {"output_dir", cfg.output_dir},
            {"budget", cfg.budget == kUnlimitedBudget ? nlohmann::json("unlimited")
                                                      : nlohmann::json(cfg.budget)},
            {"workers", cfg.workers},
            {"class_set_policy", cfg.class_set_policy},
            {"frontier_discipline", cfg.frontier_discipline},
            {"rng_seed", cfg.rng_seed},
            {"backend",
             {{"kind", cfg.backend.kind},
              {"endpoint", cfg.backend.endpoint},
              {"model_id", cfg.backend.model_id},
              {"credential_env_var", cfg.backend.credential_env_var},
              {"temperature", cfg.backend.temperature},
              {"max_output_tokens", cfg.backend.max_output_tokens},
              {"max_in_flight", cfg.backend.max_in_flight},
              {"oracle_false_negative_rate", cfg.backend.oracle_false_negative_rate},
              {"oracle_false_positive_rate", cfg.backend.oracle_false_positive_rate}}}};
}

/// Stable hash of the canonical config serialization; recorded in the run
/// manifest so a replay can be tied to the exact configuration.
inline std::string config_hash(const RunConfig& cfg) {
    return hex64(fnv1a64(run_config_to_json(cfg).dump()));
}

/// The manifest written next to every run's outputs. With the recorded
/// cache a manifest is enough to reproduce a replay run bit-exactly.
inline nlohmann::json run_manifest(const RunConfig& cfg, const std::string& template_id,
                                   const std::string& backend_id, const CorpusRunResult& run) {
    nlohmann::json failures = nlohmann::json::array();
    for (const auto& [doc, result] : run.by_doc) {
        if (result.error) failures.push_back({{"doc_id", doc}, {"error", *result.error}});
    }
    return {{"config_hash", config_hash(cfg)},
            {"config", run_config_to_json(cfg)},
            {"template_id", template_id},
            {"backend_id", backend_id},
            {"n_documents", run.by_doc.size()},
            {"total_prompts", run.total_prompts},
            {"parse_warnings", run.parse_warnings},
            {"failures", failures}};
}

} // namespace ontocoder
