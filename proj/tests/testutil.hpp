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

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "ontocoder/llm.hpp"
#include "ontocoder/ontology.hpp"
#include "ontocoder/prompting.hpp"

namespace ontocoder::testutil {

/// Self-deleting temp directory for cache/output tests.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<unsigned> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("ontocoder_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

/// Three-level fixture tree used across the unit tests.
///
///   ROOT -> C1 "Infectious diseases chapter"  -> B1 -> {L1, L2}
///                                             -> B2 -> {L3}
///        -> C2 "Neoplasms chapter"            -> B3 -> {L4}
///
/// L1/L2 reproduce the description-substring pair (one description is a
/// proper substring of its sibling's).
inline std::string toy_ontology_text() {
    return "ROOT\t\t0\t0\t\n"
           "C1\tROOT\t1\t0\tInfectious diseases chapter\n"
           "B1\tC1\t2\t0\tBacterial infections block\n"
           "L1\tB1\t3\t1\tLegionnaires' disease\n"
           "L2\tB1\t3\t1\tNonpneumonic Legionnaires' disease\n"
           "B2\tC1\t2\t0\tViral infections block\n"
           "L3\tB2\t3\t1\tInfectious mononucleosis\n"
           "C2\tROOT\t1\t0\tNeoplasms chapter\n"
           "B3\tC2\t2\t0\tMale genital neoplasms block\n"
           "L4\tB3\t3\t1\tMalignant neoplasm of scrotum\n";
}

inline Ontology toy_ontology() { return Ontology::parse(toy_ontology_text()); }

inline PromptTemplate test_template() {
    return parse_template(
        "family: test\n"
        "affirmative: relevant || yes\n"
        "negative: not relevant || no mention\n"
        "line: - {description}\n"
        "---\n"
        "Case note:\n{case_note}\n\nCandidates:\n{code_descriptions}\n");
}

/// Backend driven by a lambda; the workhorse of the search tests.
class ScriptedBackend : public Backend {
public:
    using Fn = std::function<std::string(const CompletionRequest&, const QueryContext&)>;
    explicit ScriptedBackend(Fn fn) : fn_(std::move(fn)) {}
    using Backend::complete;

    std::string id() const override { return "scripted"; }
    CompletionResponse complete(const CompletionRequest& req, const QueryContext& ctx) override {
        validate_request(req);
        return CompletionResponse{fn_(req, ctx), id(), false, 0};
    }

private:
    Fn fn_;
};

/// Random tree in the flat-file format. Node codes are N0, N1, ...; the
/// first branch is forced down to `depth` so every level is populated.
/// Leaves are assignable, internal nodes are not.
struct RandomTreeSpec {
    int depth = 4;          // max level
    int max_nodes = 120;
    int max_children = 4;
};

struct RandomTree {
    std::string flat_text;
    std::vector<std::string> leaves;          // all assignable codes
    std::vector<std::string> deepest_leaves;  // leaves at level == depth
};

inline RandomTree make_random_tree(std::mt19937_64& rng, const RandomTreeSpec& spec = {}) {
    struct Node {
        int id;
        int level;
        int parent; // -1 for root
        bool leaf = true;
    };
    std::vector<Node> nodes{{0, 0, -1, false}};
    std::uniform_int_distribution<int> n_children(1, spec.max_children);

    // Forced spine to full depth.
    int prev = 0;
    for (int level = 1; level <= spec.depth; ++level) {
        nodes.push_back({static_cast<int>(nodes.size()), level, prev});
        nodes[static_cast<std::size_t>(prev)].leaf = false;
        prev = nodes.back().id;
    }
    // Random expansion, breadth-first over a working queue.
    std::vector<int> frontier;
    for (const auto& n : nodes) frontier.push_back(n.id);
    std::size_t cursor = 0;
    while (cursor < frontier.size() && static_cast<int>(nodes.size()) < spec.max_nodes) {
        int parent_id = frontier[cursor++];
        int parent_level = nodes[static_cast<std::size_t>(parent_id)].level;
        if (parent_level >= spec.depth) continue;
        int want = n_children(rng);
        for (int k = 0; k < want && static_cast<int>(nodes.size()) < spec.max_nodes; ++k) {
            Node child{static_cast<int>(nodes.size()), parent_level + 1, parent_id, true};
            nodes[static_cast<std::size_t>(parent_id)].leaf = false;
            nodes.push_back(child);
            frontier.push_back(child.id);
        }
    }

    RandomTree out;
    out.flat_text = "ROOT\t\t0\t0\t\n";
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        const Node& n = nodes[i];
        std::string code = "N" + std::to_string(n.id);
        std::string parent = n.parent == 0 ? "ROOT" : "N" + std::to_string(n.parent);
        bool assignable = n.leaf;
        out.flat_text += code + "\t" + parent + "\t" + std::to_string(n.level) + "\t" +
                         (assignable ? "1" : "0") + "\tconcept " + std::to_string(n.id) +
                         " level " + std::to_string(n.level) + "\n";
        if (assignable) {
            out.leaves.push_back(code);
            if (n.level == spec.depth) out.deepest_leaves.push_back(code);
        }
    }
    return out;
}

/// k distinct random leaves.
inline std::set<std::string> pick_gold(std::mt19937_64& rng, const std::vector<std::string>& leaves,
                                       std::size_t k) {
    std::vector<std::string> shuffled = leaves;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    k = std::min(k, shuffled.size());
    return std::set<std::string>(shuffled.begin(), shuffled.begin() + static_cast<long>(k));
}

} // namespace ontocoder::testutil
