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

#include <atomic>
#include <cstddef>
#include <deque>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "ontocoder/corpus.hpp"
#include "ontocoder/error.hpp"
#include "ontocoder/llm.hpp"
#include "ontocoder/ontology.hpp"
#include "ontocoder/parsing.hpp"
#include "ontocoder/prompting.hpp"

namespace ontocoder {

/// Sentinel for "no prompt limit".
inline constexpr std::size_t kUnlimitedBudget = std::numeric_limits<std::size_t>::max();

/// Per-request parameters the engine stamps onto every prompt.
struct RequestOptions {
    std::string model_id = "default";
    double temperature = 0.0;
    int max_output_tokens = 1024;
    std::optional<std::string> system_text;
};

/// Order in which queued parents are expanded. FIFO gives the
/// breadth-first flavor of the reference procedure; LIFO is available
/// for experiments.
enum class FrontierDiscipline { fifo, lifo };

inline FrontierDiscipline frontier_discipline_from(std::string_view name) {
    if (name == "fifo") return FrontierDiscipline::fifo;
    if (name == "lifo") return FrontierDiscipline::lifo;
    throw ValidationError("unknown frontier discipline '" + std::string(name) + "' (want fifo|lifo)");
}

struct ParseWarning {
    std::string doc_id;
    int prompt_index = 0;
    std::string reason;
};

/// One prompt/response exchange of a search.
struct SearchStep {
    int prompt_index = 0;
    std::string parent_code;
    std::vector<std::string> candidate_codes;
    std::string raw_response;
    std::vector<ParsedDecision> decisions;
};

/// Assigned leaf codes that share a parent. The engine never suppresses
/// these; it flags them so the failure mode can be measured.
struct SiblingConflict {
    std::string parent;
    std::vector<std::string> codes;
};

struct SearchTrace {
    std::vector<SearchStep> steps;
    int prompts_used = 0;
    std::map<int, std::set<std::string>> relevant_by_level;
    std::vector<ParseWarning> warnings;
    std::vector<SiblingConflict> sibling_conflicts;
};

struct SearchResult {
    std::string doc_id;
    std::set<std::string> assigned_codes;
    SearchTrace trace;
    bool truncated = false;
    /// Set when a backend failure aborted this document's search; the
    /// trace then holds the steps completed before the failure.
    std::optional<std::string> error;
};

/// Budget-limited frontier exploration of the ontology from the root.
///
/// Each iteration prompts with one parent's children: render the
/// candidates' descriptions, complete, parse. Relevant assignable codes
/// are collected; relevant internal codes join a queue of parents to
/// expand (FIFO by default, giving breadth-first flavor). The loop stops
/// when the queue drains or the prompt budget is hit, whichever comes
/// first; `truncated` records whether work was still pending.
/// Unparseable responses contribute nothing and the loop continues; a
/// backend failure stops the document and preserves the partial trace.
inline SearchResult search_tree(const CaseNote& note, const Ontology& onto, Backend& backend,
                                const PromptTemplate& tpl, std::size_t budget,
                                const RequestOptions& request = {},
                                FrontierDiscipline discipline = FrontierDiscipline::fifo) {
    if (budget < 1) throw ValidationError("search budget must be >= 1");
    SearchResult result;
    result.doc_id = note.doc_id;

    std::deque<std::string> parent_queue;
    std::unordered_set<std::string> queued_parents; // re-enqueue guard
    std::string parent = onto.root();
    std::vector<std::string> candidates = onto.child_codes(parent);
    if (candidates.empty()) return result;

    for (;;) {
        std::vector<std::pair<std::string, std::string>> described;
        described.reserve(candidates.size());
        for (const auto& code : candidates) described.emplace_back(code, onto.description(code));

        CompletionRequest req;
        req.system_text = request.system_text;
        req.user_text = render_tree_prompt(tpl, note, described);
        req.model_id = request.model_id;
        req.temperature = request.temperature;
        req.max_output_tokens = request.max_output_tokens;

        SearchStep step;
        step.prompt_index = result.trace.prompts_used;
        step.parent_code = parent;
        step.candidate_codes = candidates;

        CompletionResponse resp;
        try {
            resp = backend.complete(req, QueryContext{note.doc_id, candidates});
        } catch (const Error& ex) {
            result.error = ex.what();
            break;
        }
        ++result.trace.prompts_used;
        step.raw_response = resp.text;
        step.decisions = match_code_descriptions(resp.text, described, tpl);
        if (step.decisions.empty()) {
            result.trace.warnings.push_back(
                {note.doc_id, step.prompt_index,
                 resp.text.empty() ? "empty response" : "no candidate description matched"});
        }
        for (const ParsedDecision& d : step.decisions) {
            if (d.polarity != Polarity::relevant) continue;
            const ConceptNode& n = onto.node(d.code);
            result.trace.relevant_by_level[n.level].insert(d.code);
            if (n.assignable) {
                result.assigned_codes.insert(d.code);
            } else if (queued_parents.insert(d.code).second) {
                parent_queue.push_back(d.code);
            }
        }
        result.trace.steps.push_back(std::move(step));

        // Next parent with something to expand.
        std::string next;
        bool have_next = false;
        while (!parent_queue.empty()) {
            std::string picked;
            if (discipline == FrontierDiscipline::fifo) {
                picked = std::move(parent_queue.front());
                parent_queue.pop_front();
            } else {
                picked = std::move(parent_queue.back());
                parent_queue.pop_back();
            }
            if (!onto.child_codes(picked).empty()) {
                next = std::move(picked);
                have_next = true;
                break;
            }
        }
        if (!have_next) break;
        if (budget != kUnlimitedBudget &&
            static_cast<std::size_t>(result.trace.prompts_used) >= budget) {
            result.truncated = true;
            break;
        }
        parent = std::move(next);
        candidates = onto.child_codes(parent);
    }

    // Sibling-conflict diagnostics over the final assignment.
    std::map<std::string, std::vector<std::string>> by_parent;
    for (const auto& code : result.assigned_codes) {
        const ConceptNode& n = onto.node(code);
        if (n.parent) by_parent[*n.parent].push_back(code);
    }
    for (auto& [p, codes] : by_parent) {
        if (codes.size() >= 2) result.trace.sibling_conflicts.push_back({p, codes});
    }
    return result;
}

// ---------------------------------------------------------------------------
// Corpus runs

struct RunOptions {
    std::size_t budget = 50;
    int workers = 1;
    RequestOptions request;
    FrontierDiscipline frontier = FrontierDiscipline::fifo;
};

struct CorpusRunResult {
    std::map<std::string, SearchResult> by_doc;
    long total_prompts = 0;
    long failed_docs = 0;
    long parse_warnings = 0;
};

namespace detail {

template <typename PerDoc>
inline CorpusRunResult run_over_docs(const std::vector<CaseNote>& notes, int workers, PerDoc per_doc) {
    if (workers < 1) throw ValidationError("workers must be >= 1");
    std::vector<SearchResult> slots(notes.size());
    std::atomic<std::size_t> cursor{0};
    auto worker = [&]() {
        for (;;) {
            std::size_t i = cursor.fetch_add(1);
            if (i >= notes.size()) return;
            try {
                slots[i] = per_doc(notes[i]);
            } catch (const Error& ex) {
                SearchResult failed;
                failed.doc_id = notes[i].doc_id;
                failed.error = ex.what();
                slots[i] = std::move(failed);
            }
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    CorpusRunResult out;
    for (auto& r : slots) {
        out.total_prompts += r.trace.prompts_used;
        out.parse_warnings += static_cast<long>(r.trace.warnings.size());
        if (r.error) ++out.failed_docs;
        out.by_doc.emplace(r.doc_id, std::move(r));
    }
    return out;
}

} // namespace detail

/// Run search_tree over a corpus, up to `workers` documents in flight;
/// a single document's search stays strictly sequential. Results are
/// independent of the worker count.
inline CorpusRunResult run_corpus(const std::vector<CaseNote>& notes, const Ontology& onto,
                                  Backend& backend, const PromptTemplate& tpl,
                                  const RunOptions& options) {
    return detail::run_over_docs(notes, options.workers, [&](const CaseNote& note) {
        return search_tree(note, onto, backend, tpl, options.budget, options.request,
                           options.frontier);
    });
}

enum class BaselineMode { match_codes, match_descriptions };

inline std::string_view to_string(BaselineMode m) {
    return m == BaselineMode::match_codes ? "match-codes" : "match-descriptions";
}

/// Single-prompt clinical-coder baseline: one coder prompt per document,
/// predictions recovered from the raw completion by code-ID matching or
/// by description matching. Traces carry one step per document.
inline CorpusRunResult run_baseline_corpus(const std::vector<CaseNote>& notes, const Ontology& onto,
                                           Backend& backend, const PromptTemplate& tpl,
                                           BaselineMode mode, const RunOptions& options) {
    return detail::run_over_docs(notes, options.workers, [&](const CaseNote& note) {
        SearchResult result;
        result.doc_id = note.doc_id;

        CompletionRequest req;
        req.system_text = options.request.system_text;
        req.user_text = render_coder_prompt(tpl, note);
        req.model_id = options.request.model_id;
        req.temperature = options.request.temperature;
        req.max_output_tokens = options.request.max_output_tokens;

        SearchStep step;
        step.prompt_index = 0;
        step.parent_code = onto.root();
        try {
            CompletionResponse resp = backend.complete(req, QueryContext{note.doc_id, {}});
            result.trace.prompts_used = 1;
            step.raw_response = resp.text;
        } catch (const Error& ex) {
            result.error = ex.what();
            result.trace.steps.push_back(std::move(step));
            return result;
        }

        std::set<std::string> codes = mode == BaselineMode::match_codes
                                          ? extract_codes_by_id(step.raw_response, onto)
                                          : extract_codes_by_description(step.raw_response, onto);
        for (const auto& code : codes) {
            step.decisions.push_back({code, Polarity::relevant, std::string()});
            result.trace.relevant_by_level[onto.node(code).level].insert(code);
        }
        if (codes.empty()) {
            result.trace.warnings.push_back({note.doc_id, 0,
                                             step.raw_response.empty() ? "empty response"
                                                                       : "no codes recovered"});
        }
        result.assigned_codes = std::move(codes);
        result.trace.steps.push_back(std::move(step));
        return result;
    });
}

// ---------------------------------------------------------------------------
// Artifact I/O: predictions TSV and per-document trace JSON

using LabelMap = std::map<std::string, std::set<std::string>>;

inline LabelMap predictions_of(const CorpusRunResult& run) {
    LabelMap out;
    for (const auto& [doc, result] : run.by_doc) {
        if (result.error) continue;
        out[doc] = result.assigned_codes;
    }
    return out;
}

/// TSV `doc_id<TAB>code`, one row per pair, sorted by (doc_id, code).
inline void write_predictions(const std::filesystem::path& path, const LabelMap& predictions) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write predictions file: " + path.string());
    for (const auto& [doc, codes] : predictions) {
        for (const auto& code : codes) out << doc << "\t" << code << "\n";
    }
}

/// Read a predictions TSV. Codes are canonicalized; they are not filtered
/// against any ontology, so externally produced predictions keep their
/// false positives.
inline LabelMap read_predictions(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open predictions file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    LabelMap out;
    int lineno = 0;
    for (std::string_view line : split_lines(text)) {
        ++lineno;
        if (line.empty() || trim(line).empty() || line.front() == '#') continue;
        auto fields = split(line, "\t");
        if (fields.size() != 2 || trim(fields[0]).empty() || trim(fields[1]).empty()) {
            throw ValidationError("malformed predictions row (line " + std::to_string(lineno) +
                                  ") in " + path.string());
        }
        out[std::string(trim(fields[0]))].insert(canonicalize_code(fields[1]));
    }
    return out;
}

inline nlohmann::json trace_to_json(const SearchResult& result) {
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& step : result.trace.steps) {
        nlohmann::json decisions = nlohmann::json::array();
        for (const auto& d : step.decisions) {
            decisions.push_back({{"code", d.code},
                                 {"polarity", std::string(to_string(d.polarity))},
                                 {"matched_line", d.matched_line}});
        }
        steps.push_back({{"prompt_index", step.prompt_index},
                         {"parent_code", step.parent_code},
                         {"candidate_codes", step.candidate_codes},
                         {"raw_response", step.raw_response},
                         {"decisions", decisions}});
    }
    nlohmann::json conflicts = nlohmann::json::array();
    for (const auto& c : result.trace.sibling_conflicts) {
        conflicts.push_back({{"parent", c.parent}, {"codes", c.codes}});
    }
    nlohmann::json warnings = nlohmann::json::array();
    for (const auto& w : result.trace.warnings) {
        warnings.push_back({{"doc_id", w.doc_id}, {"prompt_index", w.prompt_index}, {"reason", w.reason}});
    }
    nlohmann::json by_level = nlohmann::json::object();
    for (const auto& [level, codes] : result.trace.relevant_by_level) {
        by_level[std::to_string(level)] = codes;
    }
    nlohmann::json j{{"doc_id", result.doc_id},
                     {"steps", steps},
                     {"prompts_used", result.trace.prompts_used},
                     {"truncated", result.truncated},
                     {"sibling_conflicts", conflicts},
                     {"relevant_by_level", by_level},
                     {"parse_warnings", warnings}};
    if (result.error) j["error"] = *result.error;
    return j;
}

inline void write_trace_archive(const std::filesystem::path& dir, const CorpusRunResult& run) {
    std::filesystem::create_directories(dir);
    for (const auto& [doc, result] : run.by_doc) {
        std::ofstream out(dir / (doc + ".json"), std::ios::binary | std::ios::trunc);
        if (!out) throw ValidationError("cannot write trace for doc " + doc);
        out << trace_to_json(result).dump(2) << "\n";
    }
}

/// Per-document relevance-by-level sets, as read back from a trace
/// archive. This is the input of the level-wise analysis.
struct TraceRelevance {
    std::map<std::string, std::map<int, std::set<std::string>>> by_doc;
};

inline TraceRelevance load_trace_relevance(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw ValidationError("trace directory does not exist: " + dir.string());
    }
    TraceRelevance out;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
        std::ifstream in(entry.path(), std::ios::binary);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& ex) {
            throw ValidationError("corrupt trace file " + entry.path().string() + ": " + ex.what());
        }
        std::string doc = j.at("doc_id").get<std::string>();
        auto& levels = out.by_doc[doc];
        for (const auto& [key, codes] : j.at("relevant_by_level").items()) {
            auto& set = levels[std::stoi(key)];
            for (const auto& c : codes) set.insert(c.get<std::string>());
        }
    }
    if (out.by_doc.empty()) throw ValidationError("no trace files in " + dir.string());
    return out;
}

} // namespace ontocoder
