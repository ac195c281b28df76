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
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ontocoder/corpus.hpp"
#include "ontocoder/error.hpp"
#include "ontocoder/hash.hpp"
#include "ontocoder/ontology.hpp"

namespace ontocoder {

/// Backend-agnostic completion request. One prompt in, one text out; no
/// streaming, no tool calls.
struct CompletionRequest {
    std::optional<std::string> system_text;
    std::string user_text;
    std::string model_id;
    double temperature = 0.0;
    int max_output_tokens = 1024;
};

struct CompletionResponse {
    std::string text;
    std::string backend_id;
    bool cached = false;
    std::int64_t latency_ms = 0;
};

/// What the engine knows about a prompt beyond its text. Test doubles
/// (the ground-truth oracle) answer from this; real backends ignore it.
struct QueryContext {
    std::string doc_id;
    std::vector<std::string> candidate_codes;
};

inline void validate_request(const CompletionRequest& req) {
    if (req.user_text.empty()) throw ValidationError("completion request has empty user_text");
    if (req.temperature < 0) throw ValidationError("completion request has negative temperature");
    if (req.max_output_tokens <= 0) throw ValidationError("completion request needs max_output_tokens > 0");
}

/// Completion backend interface. Implementations must tolerate concurrent
/// complete() calls.
class Backend {
public:
    virtual ~Backend() = default;
    virtual std::string id() const = 0;
    virtual CompletionResponse complete(const CompletionRequest& req, const QueryContext& ctx) = 0;

    CompletionResponse complete(const CompletionRequest& req) { return complete(req, QueryContext{}); }
};

/// Configuration of the ground-truth oracle backend.
///
/// The oracle answers a relevance prompt from gold labels: a candidate is
/// truly relevant iff it is a gold code of the document or an ancestor of
/// one. Each truly relevant candidate is reported relevant with
/// probability (1 - false_negative_rate); each irrelevant candidate with
/// probability false_positive_rate.
struct OracleConfig {
    std::map<std::string, GoldLabelSet> gold;
    double false_negative_rate = 0.0;
    double false_positive_rate = 0.0;
    std::uint64_t rng_seed = 0;
    // Text emitted after each description; must be covered by the
    // template's marker lists for the parser to read polarity back.
    std::string affirmative_text = "relevant";
    std::string negative_text = "not relevant";
};

/// Synthetic backend that renders oracle decisions in the bullet-line
/// format the description matcher accepts.
///
/// Decisions are drawn from an RNG seeded per (rng_seed, doc_id,
/// candidate set), so a run's output does not depend on how documents are
/// interleaved across workers.
class OracleBackend : public Backend {
public:
    OracleBackend(OracleConfig config, const Ontology& onto)
        : config_(std::move(config)), onto_(&onto) {
        if (config_.false_negative_rate < 0 || config_.false_negative_rate > 1 ||
            config_.false_positive_rate < 0 || config_.false_positive_rate > 1) {
            throw ValidationError("oracle rates must lie in [0,1]");
        }
        for (const auto& [doc_id, labels] : config_.gold) {
            auto& relevant = relevant_by_doc_[doc_id];
            for (const auto& code : labels.codes) {
                const ConceptNode* n = &onto.node(code);
                while (n->code != kRootCode) {
                    relevant.insert(n->code);
                    n = &onto.node(*n->parent);
                }
            }
        }
    }

    using Backend::complete;

    std::string id() const override { return "oracle"; }

    CompletionResponse complete(const CompletionRequest& req, const QueryContext& ctx) override {
        validate_request(req);
        if (ctx.doc_id.empty()) throw BackendError("oracle backend needs a doc_id in the query context");
        auto it = relevant_by_doc_.find(ctx.doc_id);
        if (it == relevant_by_doc_.end()) {
            throw BackendError("oracle backend has no gold labels for doc '" + ctx.doc_id + "'");
        }
        const auto& relevant = it->second;

        std::string material = ctx.doc_id;
        for (const auto& code : ctx.candidate_codes) {
            material.push_back('\x1f');
            material += code;
        }
        std::mt19937_64 rng(mix64(config_.rng_seed ^ fnv1a64(material)));
        std::uniform_real_distribution<double> unit(0.0, 1.0);

        std::string text;
        for (const auto& code : ctx.candidate_codes) {
            bool truth = relevant.count(code) > 0;
            double u = unit(rng);
            bool reported = truth ? (u >= config_.false_negative_rate)
                                  : (u < config_.false_positive_rate);
            text += "- " + onto_->description(code) + ": " +
                    (reported ? config_.affirmative_text : config_.negative_text) + "\n";
        }
        return CompletionResponse{text, id(), false, 0};
    }

    /// True relevance used by the oracle, exposed for verification.
    bool truly_relevant(const std::string& doc_id, const std::string& code) const {
        auto it = relevant_by_doc_.find(doc_id);
        return it != relevant_by_doc_.end() && it->second.count(code) > 0;
    }

private:
    OracleConfig config_;
    const Ontology* onto_;
    std::map<std::string, std::unordered_set<std::string>> relevant_by_doc_;
};

} // namespace ontocoder
