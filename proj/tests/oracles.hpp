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

// Independent reference implementations used only to check the library.
// They share no code with the implementation paths they verify: metrics
// are recomputed by explicit pair/class counting, and the line matcher
// scans all candidates instead of using the ordered-pool algorithm.

#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ontocoder/text.hpp"

namespace ontocoder::oracles {

using LabelSets = std::map<std::string, std::set<std::string>>;

struct Triple {
    double precision = 0, recall = 0, f1 = 0;
};

inline Triple brute_micro(const LabelSets& gold, const LabelSets& pred) {
    // Enumerate every (doc, code) pair from both sides, one by one.
    long tp = 0, fp = 0, fn = 0;
    std::set<std::string> docs;
    for (const auto& [d, _] : gold) docs.insert(d);
    for (const auto& [d, _] : pred) docs.insert(d);
    for (const auto& doc : docs) {
        std::set<std::string> g, p;
        if (auto it = gold.find(doc); it != gold.end()) g = it->second;
        if (auto it = pred.find(doc); it != pred.end()) p = it->second;
        for (const auto& c : p) tp += g.count(c) ? 1 : 0;
        for (const auto& c : p) fp += g.count(c) ? 0 : 1;
        for (const auto& c : g) fn += p.count(c) ? 0 : 1;
    }
    Triple t;
    t.precision = (tp + fp) == 0 ? 0.0 : double(tp) / double(tp + fp);
    t.recall = (tp + fn) == 0 ? 0.0 : double(tp) / double(tp + fn);
    t.f1 = (t.precision + t.recall) == 0 ? 0.0 : 2 * t.precision * t.recall / (t.precision + t.recall);
    return t;
}

inline Triple brute_macro(const LabelSets& gold, const LabelSets& pred, bool include_pred_classes) {
    std::set<std::string> classes, docs;
    for (const auto& [d, cs] : gold) {
        docs.insert(d);
        classes.insert(cs.begin(), cs.end());
    }
    for (const auto& [d, cs] : pred) {
        docs.insert(d);
        if (include_pred_classes) classes.insert(cs.begin(), cs.end());
    }
    Triple sum;
    for (const auto& cls : classes) {
        long tp = 0, fp = 0, fn = 0;
        for (const auto& doc : docs) {
            bool g = gold.count(doc) && gold.at(doc).count(cls);
            bool p = pred.count(doc) && pred.at(doc).count(cls);
            if (g && p) ++tp;
            if (!g && p) ++fp;
            if (g && !p) ++fn;
        }
        double prec = (tp + fp) == 0 ? 0.0 : double(tp) / double(tp + fp);
        double rec = (tp + fn) == 0 ? 0.0 : double(tp) / double(tp + fn);
        double f1 = (prec + rec) == 0 ? 0.0 : 2 * prec * rec / (prec + rec);
        sum.precision += prec;
        sum.recall += rec;
        sum.f1 += f1;
    }
    double n = double(classes.size());
    return Triple{sum.precision / n, sum.recall / n, sum.f1 / n};
}

/// Reference line matcher: consider every still-unmatched candidate whose
/// normalized description is contained in the line, and take the longest
/// (prompt order on ties) by direct comparison over all of them.
inline std::optional<std::size_t> brute_match_line(
    const std::string& norm_line, const std::vector<std::string>& norm_descs,
    const std::vector<bool>& consumed) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < norm_descs.size(); ++i) {
        if (consumed[i] || norm_descs[i].empty()) continue;
        if (norm_line.find(norm_descs[i]) == std::string::npos) continue;
        if (!best || norm_descs[i].size() > norm_descs[*best].size()) best = i;
    }
    return best;
}

} // namespace ontocoder::oracles
