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
#include <regex>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ontocoder/ontology.hpp"
#include "ontocoder/prompting.hpp"
#include "ontocoder/text.hpp"

namespace ontocoder {

enum class Polarity { relevant, not_relevant };

inline std::string_view to_string(Polarity p) {
    return p == Polarity::relevant ? "relevant" : "not_relevant";
}

/// One resolved line of model output: which candidate it names and with
/// which polarity.
struct ParsedDecision {
    std::string code;
    Polarity polarity = Polarity::relevant;
    std::string matched_line;
};

/// Resolve a completion against the candidate descriptions that were in
/// the prompt.
///
/// The response is processed line by line. Within a line, candidates are
/// tried in strictly decreasing normalized-description length (ties in
/// prompt order) with substring containment on normalized text, so a
/// description that is a substring of a longer sibling description can
/// never steal the longer one's mention. The first hit consumes both the
/// line and the candidate. Polarity comes from scanning the residual of
/// the line: negative markers win over affirmative ones, and a bare
/// restated description reads as a retrieved mention (relevant).
/// Candidates never matched yield no decision.
inline std::vector<ParsedDecision> match_code_descriptions(
    std::string_view response,
    const std::vector<std::pair<std::string, std::string>>& candidates,
    const PromptTemplate& tpl) {
    struct Cand {
        const std::string* code;
        std::string norm_desc;
        std::size_t prompt_index;
        bool alive = true;
    };
    std::vector<Cand> pool;
    pool.reserve(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        pool.push_back({&candidates[i].first, normalize_text(candidates[i].second), i, true});
    }
    // Longest description first; prompt order breaks ties.
    std::vector<std::size_t> by_length(pool.size());
    for (std::size_t i = 0; i < by_length.size(); ++i) by_length[i] = i;
    std::sort(by_length.begin(), by_length.end(), [&](std::size_t a, std::size_t b) {
        if (pool[a].norm_desc.size() != pool[b].norm_desc.size()) {
            return pool[a].norm_desc.size() > pool[b].norm_desc.size();
        }
        return pool[a].prompt_index < pool[b].prompt_index;
    });

    std::vector<std::string> neg, aff;
    for (const auto& m : tpl.negative_markers) neg.push_back(normalize_text(m));
    for (const auto& m : tpl.affirmative_markers) aff.push_back(normalize_text(m));

    std::vector<ParsedDecision> decisions;
    for (std::string_view raw_line : split_lines(response)) {
        std::string norm_line = normalize_text(raw_line);
        if (norm_line.empty()) continue;
        for (std::size_t idx : by_length) {
            Cand& cand = pool[idx];
            if (!cand.alive || cand.norm_desc.empty()) continue;
            std::size_t pos = norm_line.find(cand.norm_desc);
            if (pos == std::string::npos) continue;
            cand.alive = false;
            std::string residual = norm_line.substr(0, pos) + norm_line.substr(pos + cand.norm_desc.size());
            auto contains_any = [&](const std::vector<std::string>& markers) {
                return std::any_of(markers.begin(), markers.end(), [&](const std::string& m) {
                    return !m.empty() && residual.find(m) != std::string::npos;
                });
            };
            Polarity polarity = contains_any(neg)   ? Polarity::not_relevant
                                : contains_any(aff) ? Polarity::relevant
                                                    : Polarity::relevant;
            decisions.push_back({*cand.code, polarity, std::string(raw_line)});
            break; // line consumed
        }
    }
    return decisions;
}

namespace detail {

// letter + two alphanumerics + optional (".XXXX" | "XXXX") tail; the
// undotted tail covers raw corpus spellings like "b2789".
inline const std::regex& code_token_re() {
    static const std::regex re(R"(\b[A-Za-z][A-Za-z0-9]{2}(?:\.[A-Za-z0-9]{1,4}|[A-Za-z0-9]{1,4})?\b)");
    return re;
}

// "1." / "2)" / "-" / "*" list prefixes on a normalized line.
inline std::string strip_list_markers(const std::string& line) {
    static const std::regex re(R"(^\s*(?:[-*]+|\(?\d{1,3}[.)])\s*)");
    return std::regex_replace(line, re, "", std::regex_constants::format_first_only);
}

// "C63.2 - " / "C63.2: " style prefix; only stripped when an explicit
// separator follows, so ordinary words are left alone.
inline std::string strip_leading_code_token(const std::string& line) {
    static const std::regex re(R"(^\s*[A-Za-z][A-Za-z0-9]{2}(?:\.[A-Za-z0-9]{1,4}|[A-Za-z0-9]{1,4})?\s*[-:]+\s*)");
    return std::regex_replace(line, re, "", std::regex_constants::format_first_only);
}

} // namespace detail

/// Baseline (a): collect ICD-shaped tokens anywhere in the response,
/// canonicalize them, and keep the ones that exist and are assignable.
/// The code wins even when the model paired it with a wrong description.
inline std::set<std::string> extract_codes_by_id(std::string_view response, const Ontology& onto) {
    std::set<std::string> out;
    std::string text(response);
    auto begin = std::sregex_iterator(text.begin(), text.end(), detail::code_token_re());
    for (auto it = begin; it != std::sregex_iterator(); ++it) {
        std::string code = canonicalize_code(it->str());
        if (onto.contains(code) && onto.is_assignable(code)) out.insert(std::move(code));
    }
    return out;
}

/// Baseline (b): look each response line up in the ontology's description
/// index (exact match on normalized text, after shedding list markers and
/// any leading code token). A descriptive phrase that is not a real
/// ontology description matches nothing.
inline std::set<std::string> extract_codes_by_description(std::string_view response,
                                                          const Ontology& onto) {
    std::set<std::string> out;
    auto keep = [&](const std::string& normalized) {
        if (auto code = onto.code_for_description(normalized)) {
            if (onto.is_assignable(*code)) {
                out.insert(*code);
                return true;
            }
        }
        return false;
    };
    for (std::string_view raw_line : split_lines(response)) {
        std::string line = detail::strip_list_markers(normalize_text(raw_line));
        if (line.empty()) continue;
        if (keep(line)) continue;
        std::string without_code = detail::strip_leading_code_token(line);
        if (without_code != line) keep(std::string(trim(without_code)));
    }
    return out;
}

} // namespace ontocoder
