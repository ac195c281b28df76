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
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ontocoder/corpus.hpp"
#include "ontocoder/error.hpp"
#include "ontocoder/hash.hpp"
#include "ontocoder/text.hpp"

namespace ontocoder {

/// A prompt template plus the response-marker vocabulary tied to it.
/// Templates are data: they ship as editable files so prompt experiments
/// never require a rebuild. The same template body is rendered at every
/// tree level.
struct PromptTemplate {
    std::string family;                            // e.g. "gpt-style", "llama-style"
    std::string body;                              // carries {case_note} / {code_descriptions}
    std::vector<std::string> affirmative_markers;  // e.g. "relevant"
    std::vector<std::string> negative_markers;     // e.g. "not relevant"
    std::string candidate_line_format = "- {description}";
    std::string id;                                // family + content hash, recorded in traces

    void validate() const {
        if (family.empty()) throw ValidationError("template: missing family");
        if (affirmative_markers.empty() || negative_markers.empty()) {
            throw ValidationError("template: marker lists must be non-empty");
        }
        for (const auto& a : affirmative_markers) {
            for (const auto& n : negative_markers) {
                if (normalize_text(a) == normalize_text(n)) {
                    throw ValidationError("template: marker lists overlap on '" + a + "'");
                }
            }
        }
        if (candidate_line_format.find("{description}") == std::string::npos) {
            throw ValidationError("template: candidate line format lacks {description}");
        }
    }
};

/// Parse a template file: a front-matter header of `key: value` lines
/// terminated by `---`, followed by the body. List values are separated
/// by `||`. Keys: family, affirmative, negative, line, note (free text,
/// ignored). '#' lines in the header are comments.
inline PromptTemplate parse_template(std::string_view text) {
    PromptTemplate tpl;
    std::size_t body_start = std::string_view::npos;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::size_t next = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        std::string_view line = text.substr(pos, (eol == std::string_view::npos ? text.size() : eol) - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        pos = next;
        std::string_view t = trim(line);
        if (t == "---") {
            body_start = next;
            break;
        }
        if (t.empty() || t.front() == '#') continue;
        std::size_t colon = t.find(':');
        if (colon == std::string_view::npos) {
            throw ValidationError("template header: expected 'key: value' at \"" + std::string(t) + "\"");
        }
        std::string key(trim(t.substr(0, colon)));
        std::string value(trim(t.substr(colon + 1)));
        auto as_list = [&]() {
            std::vector<std::string> items;
            for (const auto& part : split(value, "||")) {
                std::string item(trim(part));
                if (!item.empty()) items.push_back(item);
            }
            return items;
        };
        if (key == "family") tpl.family = value;
        else if (key == "affirmative") tpl.affirmative_markers = as_list();
        else if (key == "negative") tpl.negative_markers = as_list();
        else if (key == "line") tpl.candidate_line_format = value;
        else if (key == "note") { /* free-text annotation */ }
        else throw ValidationError("template header: unknown key '" + key + "'");
    }
    if (body_start == std::string_view::npos) {
        throw ValidationError("template: missing '---' separator between header and body");
    }
    tpl.body = std::string(text.substr(std::min(body_start, text.size())));
    tpl.validate();
    tpl.id = tpl.family + "-" + hex64(fnv1a64(std::string(text))).substr(0, 8);
    return tpl;
}

inline PromptTemplate load_template(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open template file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_template(buf.str());
}

namespace detail {

// Single-pass placeholder substitution. Placeholder counts are checked on
// the template body itself, so values containing placeholder-like text
// never get re-expanded.
inline std::string substitute(const std::string& body,
                              const std::vector<std::pair<std::string_view, const std::string*>>& slots) {
    struct Hit {
        std::size_t pos;
        std::size_t len;
        const std::string* value;
    };
    std::vector<Hit> hits;
    for (const auto& [placeholder, value] : slots) {
        std::size_t count = 0;
        std::size_t pos = body.find(placeholder);
        while (pos != std::string::npos) {
            ++count;
            hits.push_back({pos, placeholder.size(), value});
            pos = body.find(placeholder, pos + placeholder.size());
        }
        if (count == 0) {
            throw ValidationError("template body lacks required placeholder " + std::string(placeholder));
        }
        if (count > 1) {
            throw ValidationError("template body repeats placeholder " + std::string(placeholder));
        }
    }
    std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) { return a.pos < b.pos; });
    std::string out;
    std::size_t cursor = 0;
    for (const Hit& h : hits) {
        out.append(body, cursor, h.pos - cursor);
        out.append(*h.value);
        cursor = h.pos + h.len;
    }
    out.append(body, cursor, body.size() - cursor);
    return out;
}

} // namespace detail

/// Render one candidate description line.
inline std::string render_candidate_line(const PromptTemplate& tpl, std::string_view code,
                                         const std::string& description) {
    std::string line = tpl.candidate_line_format;
    std::size_t pos = line.find("{description}");
    line.replace(pos, std::string_view("{description}").size(), description);
    pos = line.find("{code}");
    if (pos != std::string::npos) line.replace(pos, std::string_view("{code}").size(), code);
    return line;
}

/// Render the tree-search prompt: the case note plus the candidate
/// descriptions, one line per candidate, in the given order. Rendering is
/// deterministic; identical inputs give identical bytes.
inline std::string render_tree_prompt(const PromptTemplate& tpl, const CaseNote& note,
                                      const std::vector<std::pair<std::string, std::string>>& candidates) {
    if (candidates.empty()) throw ValidationError("render_tree_prompt: no candidates");
    std::string block;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (i) block.push_back('\n');
        block += render_candidate_line(tpl, candidates[i].first, candidates[i].second);
    }
    return detail::substitute(tpl.body, {{"{code_descriptions}", &block}, {"{case_note}", &note.text}});
}

/// Render the single-prompt clinical-coder baseline. The coder template
/// must carry {case_note} only.
inline std::string render_coder_prompt(const PromptTemplate& tpl, const CaseNote& note) {
    if (tpl.body.find("{code_descriptions}") != std::string::npos) {
        throw ValidationError("coder template must not contain {code_descriptions}");
    }
    return detail::substitute(tpl.body, {{"{case_note}", &note.text}});
}

} // namespace ontocoder
