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

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ontocoder/error.hpp"
#include "ontocoder/text.hpp"

namespace ontocoder {

/// Well-known sentinel code of the tree root.
inline constexpr std::string_view kRootCode = "ROOT";

/// Display name of an ontology level. Levels follow the ICD-10-CM
/// convention: 1=Chapter .. 6=Extension II; deeper levels fall back to a
/// generic name.
inline std::string level_name(int level) {
    switch (level) {
        case 1: return "Chapter";
        case 2: return "Block";
        case 3: return "Category";
        case 4: return "Subcategory";
        case 5: return "Extension I";
        case 6: return "Extension II";
        default: return "Level " + std::to_string(level);
    }
}

/// One node of the concept tree.
struct ConceptNode {
    std::string code;
    std::string description;
    int level = 0;                        // root is 0, chapters are 1
    std::optional<std::string> parent;    // empty only for the root
    std::vector<std::string> children;    // file order
    bool assignable = false;
};

struct OntologyLoadOptions {
    /// When set (the default), a node may be assignable iff it is a leaf.
    /// Relax for ontologies whose internal nodes are legal labels.
    bool require_assignable_leaf_equivalence = true;
};

/// Immutable in-memory model of a hierarchical code ontology.
///
/// Built from a flat file, one record per line:
///
///     code<TAB>parent_code<TAB>level<TAB>assignable(0|1)<TAB>description
///
/// The root sentinel is the literal code ROOT with an empty parent and
/// level 0. Lines starting with '#' are comments. Line order defines
/// child order, which in turn fixes candidate order in prompts.
/// Immutable after load; safe for concurrent reads.
class Ontology {
public:
    static Ontology load_file(const std::filesystem::path& path,
                              const OntologyLoadOptions& options = {}) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw ValidationError("cannot open ontology file: " + path.string());
        std::ostringstream buf;
        buf << in.rdbuf();
        return parse(buf.str(), options);
    }

    static Ontology parse(std::string_view text, const OntologyLoadOptions& options = {}) {
        Ontology onto;
        std::vector<std::string> order; // codes in file order, root included

        int lineno = 0;
        for (std::string_view line : split_lines(text)) {
            ++lineno;
            if (line.empty() || trim(line).empty() || line.front() == '#') continue;
            auto fields = split(line, "\t");
            if (fields.size() != 5) {
                throw ValidationError(row_err(lineno, line, "expected 5 tab-separated fields"));
            }
            ConceptNode node;
            node.code = std::string(trim(fields[0]));
            std::string parent = std::string(trim(fields[1]));
            std::string level_s = std::string(trim(fields[2]));
            std::string assign_s = std::string(trim(fields[3]));
            node.description = std::string(trim(fields[4]));

            if (node.code.empty()) throw ValidationError(row_err(lineno, line, "empty code"));
            try {
                std::size_t pos = 0;
                node.level = std::stoi(level_s, &pos);
                if (pos != level_s.size()) throw std::invalid_argument("");
            } catch (const std::exception&) {
                throw ValidationError(row_err(lineno, line, "level is not an integer"));
            }
            if (assign_s != "0" && assign_s != "1") {
                throw ValidationError(row_err(lineno, line, "assignable flag must be 0 or 1"));
            }
            node.assignable = assign_s == "1";

            bool is_root = node.code == kRootCode;
            if (is_root) {
                if (!parent.empty()) throw ValidationError(row_err(lineno, line, "root must have an empty parent"));
                if (node.level != 0) throw ValidationError(row_err(lineno, line, "root must be level 0"));
                if (onto.nodes_.count(node.code)) throw ValidationError(row_err(lineno, line, "duplicate root"));
            } else {
                if (parent.empty()) throw ValidationError(row_err(lineno, line, "missing parent code"));
                if (node.level < 1) throw ValidationError(row_err(lineno, line, "non-root level must be >= 1"));
                if (node.description.empty()) throw ValidationError(row_err(lineno, line, "empty description"));
                node.parent = parent;
            }
            if (!onto.nodes_.emplace(node.code, node).second) {
                throw ValidationError(row_err(lineno, line, "duplicate code '" + node.code + "'"));
            }
            order.push_back(node.code);
        }

        if (!onto.nodes_.count(std::string(kRootCode))) {
            throw ValidationError("ontology has no ROOT row");
        }

        // Link children in file order; forward parent references are legal.
        for (const auto& code : order) {
            const ConceptNode& node = onto.nodes_.at(code);
            if (!node.parent) continue;
            auto it = onto.nodes_.find(*node.parent);
            if (it == onto.nodes_.end()) {
                throw ValidationError("orphan parent reference: node '" + code +
                                      "' names missing parent '" + *node.parent + "'");
            }
            if (node.level != it->second.level + 1) {
                throw ValidationError("level mismatch: node '" + code + "' has level " +
                                      std::to_string(node.level) + " but parent '" + *node.parent +
                                      "' has level " + std::to_string(it->second.level));
            }
            it->second.children.push_back(code);
        }

        // Every non-root parent chain must reach the root; with per-edge
        // level checks a cycle cannot slip through, but verify anyway.
        std::size_t reached = 1;
        std::vector<const ConceptNode*> frontier{&onto.nodes_.at(std::string(kRootCode))};
        while (!frontier.empty()) {
            const ConceptNode* n = frontier.back();
            frontier.pop_back();
            for (const auto& c : n->children) {
                ++reached;
                frontier.push_back(&onto.nodes_.at(c));
            }
        }
        if (reached != onto.nodes_.size()) {
            throw ValidationError("cycle detected: " + std::to_string(onto.nodes_.size() - reached) +
                                  " node(s) unreachable from ROOT");
        }

        if (options.require_assignable_leaf_equivalence) {
            for (const auto& code : order) {
                const ConceptNode& node = onto.nodes_.at(code);
                if (code == kRootCode) continue;
                bool leaf = node.children.empty();
                if (node.assignable != leaf) {
                    throw ValidationError("node '" + code + "' violates assignable<=>leaf: " +
                                          (leaf ? "leaf marked non-assignable" : "internal node marked assignable"));
                }
            }
        }

        // Description index for the baseline matcher. Collisions make the
        // index ambiguous, so collect them all and abort.
        std::map<std::string, std::vector<std::string>> collisions;
        for (const auto& code : order) {
            if (code == kRootCode) continue;
            const ConceptNode& node = onto.nodes_.at(code);
            std::string key = normalize_text(node.description);
            auto [it, inserted] = onto.description_index_.emplace(key, code);
            if (!inserted) {
                auto& bucket = collisions[key];
                if (bucket.empty()) bucket.push_back(it->second);
                bucket.push_back(code);
            }
            onto.max_level_ = std::max(onto.max_level_, node.level);
        }
        if (!collisions.empty()) {
            std::string msg = "duplicate normalized descriptions:";
            for (const auto& [key, codes] : collisions) {
                msg += "\n  '" + key + "':";
                for (const auto& c : codes) msg += " " + c;
            }
            throw ValidationError(msg);
        }

        return onto;
    }

    const ConceptNode& node(std::string_view code) const {
        auto it = nodes_.find(std::string(code));
        if (it == nodes_.end()) throw ValidationError("unknown code '" + std::string(code) + "'");
        return it->second;
    }

    bool contains(std::string_view code) const { return nodes_.count(std::string(code)) > 0; }

    const std::string& root() const { return root_; }

    /// Child nodes in file order; empty for leaves.
    std::vector<const ConceptNode*> children(std::string_view code) const {
        const ConceptNode& n = node(code);
        std::vector<const ConceptNode*> out;
        out.reserve(n.children.size());
        for (const auto& c : n.children) out.push_back(&nodes_.at(c));
        return out;
    }

    const std::vector<std::string>& child_codes(std::string_view code) const {
        return node(code).children;
    }

    bool is_assignable(std::string_view code) const { return node(code).assignable; }

    /// The unique ancestor-or-self of `code` at `level`, or nullopt when the
    /// code sits above that level (it is "dropped" there).
    std::optional<std::string> ancestor_at_level(std::string_view code, int level) const {
        if (level < 1) throw ValidationError("level must be >= 1");
        const ConceptNode* n = &node(code);
        if (n->level < level) return std::nullopt;
        while (n->level > level) n = &nodes_.at(*n->parent);
        return n->code;
    }

    const std::string& description(std::string_view code) const {
        const ConceptNode& n = node(code);
        if (n.code == kRootCode) throw ValidationError("root has no description");
        return n.description;
    }

    /// normalized description -> code; injective by construction.
    const std::unordered_map<std::string, std::string>& description_index() const {
        return description_index_;
    }

    std::optional<std::string> code_for_description(std::string_view normalized) const {
        auto it = description_index_.find(std::string(normalized));
        if (it == description_index_.end()) return std::nullopt;
        return it->second;
    }

    const std::unordered_map<std::string, ConceptNode>& nodes() const { return nodes_; }

    int max_level() const { return max_level_; }

    std::size_t size() const { return nodes_.size(); }

    std::vector<std::string> assignable_codes() const {
        std::vector<std::string> out;
        for (const auto& [code, n] : nodes_)
            if (n.assignable) out.push_back(code);
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    static std::string row_err(int lineno, std::string_view line, const std::string& why) {
        return "malformed ontology row (line " + std::to_string(lineno) + "): " + why +
               " in \"" + std::string(line) + "\"";
    }

    std::unordered_map<std::string, ConceptNode> nodes_;
    std::unordered_map<std::string, std::string> description_index_;
    std::string root_{kRootCode};
    int max_level_ = 0;
};

} // namespace ontocoder
