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
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "ontocoder/error.hpp"
#include "ontocoder/ontology.hpp"
#include "ontocoder/search.hpp"

namespace ontocoder {

struct MetricTriple {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Zero-denominator convention: 0, never NaN or skip. An empty prediction
// set is a legitimate outcome and must penalize recall deterministically.
inline double safe_ratio(long num, long den) { return den == 0 ? 0.0 : static_cast<double>(num) / den; }

inline double f1_of(double precision, double recall) {
    return (precision + recall) == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
}

inline MetricTriple triple_from_counts(long tp, long fp, long fn) {
    MetricTriple t;
    t.precision = safe_ratio(tp, tp + fp);
    t.recall = safe_ratio(tp, tp + fn);
    t.f1 = f1_of(t.precision, t.recall);
    return t;
}

/// Which classes the macro average runs over. Default: classes present in
/// gold, so hallucinated classes outside the evaluation set cannot move
/// macro precision. The union policy is kept for sensitivity analysis.
enum class ClassSetPolicy { gold_classes, gold_union_pred };

inline ClassSetPolicy class_set_policy_from(std::string_view name) {
    if (name == "gold" || name == "gold-classes") return ClassSetPolicy::gold_classes;
    if (name == "union" || name == "gold-union-pred") return ClassSetPolicy::gold_union_pred;
    throw ValidationError("unknown class_set_policy '" + std::string(name) + "' (want gold|union)");
}

inline std::string_view to_string(ClassSetPolicy p) {
    return p == ClassSetPolicy::gold_classes ? "gold" : "union";
}

struct Support {
    long n_docs = 0;
    long n_gold_pairs = 0;
    long n_pred_pairs = 0;
    long n_classes = 0;
};

struct MetricsReport {
    MetricTriple micro;
    MetricTriple macro;
    Support support;
};

namespace detail {

inline std::set<std::string> doc_universe(const LabelMap& gold, const LabelMap& pred) {
    std::set<std::string> docs;
    for (const auto& [d, _] : gold) docs.insert(d);
    for (const auto& [d, _] : pred) docs.insert(d);
    return docs;
}

inline const std::set<std::string>& codes_or_empty(const LabelMap& m, const std::string& doc) {
    static const std::set<std::string> empty;
    auto it = m.find(doc);
    return it == m.end() ? empty : it->second;
}

inline std::set<std::string> class_set(const LabelMap& gold, const LabelMap& pred,
                                       ClassSetPolicy policy) {
    std::set<std::string> classes;
    for (const auto& [_, codes] : gold) classes.insert(codes.begin(), codes.end());
    if (policy == ClassSetPolicy::gold_union_pred) {
        for (const auto& [_, codes] : pred) classes.insert(codes.begin(), codes.end());
    }
    return classes;
}

} // namespace detail

/// Micro-averaged precision/recall/F1: TP/FP/FN pooled over every
/// (document, code) pair. A document missing from one side counts as an
/// empty set.
inline MetricTriple micro_metrics(const LabelMap& gold, const LabelMap& pred) {
    long tp = 0, fp = 0, fn = 0;
    for (const auto& doc : detail::doc_universe(gold, pred)) {
        const auto& g = detail::codes_or_empty(gold, doc);
        const auto& p = detail::codes_or_empty(pred, doc);
        for (const auto& code : p) {
            if (g.count(code)) ++tp;
            else ++fp;
        }
        for (const auto& code : g) {
            if (!p.count(code)) ++fn;
        }
    }
    return triple_from_counts(tp, fp, fn);
}

/// Macro-averaged precision/recall/F1: per-class triples from that
/// class's per-document TP/FP/FN, then an unweighted mean over the class
/// set chosen by the policy. Per-class zero-denominator conventions match
/// the micro ones.
inline MetricTriple macro_metrics(const LabelMap& gold, const LabelMap& pred,
                                  ClassSetPolicy policy = ClassSetPolicy::gold_classes) {
    const auto classes = detail::class_set(gold, pred, policy);
    if (classes.empty()) throw ValidationError("macro metrics: empty class set");

    const auto docs = detail::doc_universe(gold, pred);
    MetricTriple sum;
    for (const auto& cls : classes) {
        long tp = 0, fp = 0, fn = 0;
        for (const auto& doc : docs) {
            bool in_gold = detail::codes_or_empty(gold, doc).count(cls) > 0;
            bool in_pred = detail::codes_or_empty(pred, doc).count(cls) > 0;
            if (in_gold && in_pred) ++tp;
            else if (in_pred) ++fp;
            else if (in_gold) ++fn;
        }
        MetricTriple t = triple_from_counts(tp, fp, fn);
        sum.precision += t.precision;
        sum.recall += t.recall;
        sum.f1 += t.f1;
    }
    const double n = static_cast<double>(classes.size());
    return MetricTriple{sum.precision / n, sum.recall / n, sum.f1 / n};
}

inline MetricsReport compute_metrics(const LabelMap& gold, const LabelMap& pred,
                                     ClassSetPolicy policy = ClassSetPolicy::gold_classes) {
    MetricsReport report;
    report.micro = micro_metrics(gold, pred);
    report.macro = macro_metrics(gold, pred, policy);
    report.support.n_docs = static_cast<long>(detail::doc_universe(gold, pred).size());
    for (const auto& [_, codes] : gold) report.support.n_gold_pairs += static_cast<long>(codes.size());
    for (const auto& [_, codes] : pred) report.support.n_pred_pairs += static_cast<long>(codes.size());
    report.support.n_classes = static_cast<long>(detail::class_set(gold, pred, policy).size());
    return report;
}

/// Map each label to its ancestor at `level`; labels sitting above that
/// level are dropped. Many-to-one collapses are allowed (set semantics).
inline std::set<std::string> project_to_level(const std::set<std::string>& labels, int level,
                                              const Ontology& onto) {
    std::set<std::string> out;
    for (const auto& code : labels) {
        if (auto a = onto.ancestor_at_level(code, level)) out.insert(*a);
    }
    return out;
}

struct LevelRow {
    int level = 0;
    std::string name;
    MetricTriple micro;
    MetricTriple macro;
    long dropped_gold = 0; // (doc, gold code) pairs with no ancestor at this level
};

struct LevelReport {
    std::vector<LevelRow> rows;
};

/// Cumulative level-wise analysis over search traces.
///
/// At level L the prediction set of a document is the set of codes the
/// search deemed relevant at that level; the gold set is the gold labels
/// projected to L. Cumulative semantics are inherent: a node is only ever
/// judged at level L if its ancestors were judged relevant at L-1 and
/// above, so failures high in the tree propagate downward.
///
/// Every document carrying gold labels must have a trace; documents with
/// a trace but no gold evaluate against an empty gold set. Levels whose
/// class set comes up empty report zero macro values instead of erroring.
inline LevelReport level_analysis(const LabelMap& gold, const TraceRelevance& traces,
                                  const Ontology& onto,
                                  ClassSetPolicy policy = ClassSetPolicy::gold_classes) {
    for (const auto& [doc, _] : gold) {
        if (!traces.by_doc.count(doc)) {
            throw ValidationError("level analysis: no trace for gold doc '" + doc + "'");
        }
    }
    LevelReport report;
    for (int level = 1; level <= onto.max_level(); ++level) {
        LabelMap gold_at, pred_at;
        long dropped = 0;
        for (const auto& [doc, codes] : gold) {
            gold_at[doc] = project_to_level(codes, level, onto);
            for (const auto& c : codes) {
                if (onto.node(c).level < level) ++dropped;
            }
        }
        for (const auto& [doc, by_level] : traces.by_doc) {
            auto it = by_level.find(level);
            pred_at[doc] = it == by_level.end() ? std::set<std::string>{} : it->second;
        }
        LevelRow row;
        row.level = level;
        row.name = level_name(level);
        row.dropped_gold = dropped;
        row.micro = micro_metrics(gold_at, pred_at);
        row.macro = detail::class_set(gold_at, pred_at, policy).empty()
                        ? MetricTriple{}
                        : macro_metrics(gold_at, pred_at, policy);
        report.rows.push_back(std::move(row));
    }
    return report;
}

// ---------------------------------------------------------------------------
// Report rendering: JSON, aligned plain text, CSV

inline nlohmann::json triple_to_json(const MetricTriple& t) {
    return {{"precision", t.precision}, {"recall", t.recall}, {"f1", t.f1}};
}

inline nlohmann::json metrics_to_json(const MetricsReport& r) {
    return {{"micro", triple_to_json(r.micro)},
            {"macro", triple_to_json(r.macro)},
            {"support",
             {{"n_docs", r.support.n_docs},
              {"n_gold_pairs", r.support.n_gold_pairs},
              {"n_pred_pairs", r.support.n_pred_pairs},
              {"n_classes", r.support.n_classes}}}};
}

inline nlohmann::json level_report_to_json(const LevelReport& r) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : r.rows) {
        rows.push_back({{"level", row.level},
                        {"level_name", row.name},
                        {"micro", triple_to_json(row.micro)},
                        {"macro", triple_to_json(row.macro)},
                        {"dropped_gold", row.dropped_gold}});
    }
    return {{"rows", rows}};
}

namespace detail {

inline std::string fixed3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

inline std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

inline std::string table_header(const std::string& row_label) {
    std::string out;
    out += pad("", 14) + pad("Micro", 24) + "Macro\n";
    out += pad(row_label, 14);
    for (int i = 0; i < 2; ++i) {
        out += pad("Rec.", 8) + pad("Prec.", 8) + pad("F1", 8);
    }
    out += "\n";
    return out;
}

inline std::string table_row(const std::string& label, const MetricTriple& micro,
                             const MetricTriple& macro) {
    std::string out = pad(label, 14);
    out += pad(fixed3(micro.recall), 8) + pad(fixed3(micro.precision), 8) + pad(fixed3(micro.f1), 8);
    out += pad(fixed3(macro.recall), 8) + pad(fixed3(macro.precision), 8) + pad(fixed3(macro.f1), 8);
    out += "\n";
    return out;
}

} // namespace detail

/// Aligned one-row table: Rec./Prec./F1 under Micro and Macro headings.
inline std::string render_metrics_table(const std::string& label, const MetricsReport& r) {
    std::string out = detail::table_header("Model");
    out += detail::table_row(label, r.micro, r.macro);
    return out;
}

/// Aligned level-wise table, one row per ontology level.
inline std::string render_level_table(const LevelReport& r) {
    std::string out = detail::table_header("Level");
    for (const auto& row : r.rows) out += detail::table_row(row.name, row.micro, row.macro);
    return out;
}

inline std::string metrics_to_csv(const std::string& label, const MetricsReport& r) {
    std::string out = "label,micro_recall,micro_precision,micro_f1,macro_recall,macro_precision,macro_f1\n";
    out += label + "," + detail::fixed3(r.micro.recall) + "," + detail::fixed3(r.micro.precision) + "," +
           detail::fixed3(r.micro.f1) + "," + detail::fixed3(r.macro.recall) + "," +
           detail::fixed3(r.macro.precision) + "," + detail::fixed3(r.macro.f1) + "\n";
    return out;
}

inline std::string level_report_to_csv(const LevelReport& r) {
    std::string out =
        "level,level_name,micro_recall,micro_precision,micro_f1,macro_recall,macro_precision,macro_f1,dropped_gold\n";
    for (const auto& row : r.rows) {
        out += std::to_string(row.level) + "," + row.name + "," + detail::fixed3(row.micro.recall) + "," +
               detail::fixed3(row.micro.precision) + "," + detail::fixed3(row.micro.f1) + "," +
               detail::fixed3(row.macro.recall) + "," + detail::fixed3(row.macro.precision) + "," +
               detail::fixed3(row.macro.f1) + "," + std::to_string(row.dropped_gold) + "\n";
    }
    return out;
}

} // namespace ontocoder
