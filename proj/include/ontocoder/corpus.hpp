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
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ontocoder/error.hpp"
#include "ontocoder/ontology.hpp"
#include "ontocoder/text.hpp"

namespace ontocoder {

/// One free-text document.
struct CaseNote {
    std::string doc_id;
    std::string text;
};

/// Ground-truth assignable codes for one document.
struct GoldLabelSet {
    std::string doc_id;
    std::set<std::string> codes;
};

/// Audit counts for the label-assignability filter. Filtering changes the
/// denominator of every downstream metric, so the counts are always
/// reported alongside the labels.
struct LabelFilterReport {
    long unknown = 0;        // dropped: code not in the ontology
    long non_assignable = 0; // dropped: code exists but is not assignable
    long kept = 0;           // (doc, code) pairs surviving, after dedup
};

struct GoldLabels {
    std::map<std::string, GoldLabelSet> by_doc;
    LabelFilterReport filter;
};

/// Load every UTF-8 `.txt` in `dir`; the filename stem is the doc_id.
/// Returns documents sorted by doc_id.
inline std::vector<CaseNote> load_documents(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) {
        throw ValidationError("documents directory does not exist: " + dir.string());
    }
    std::vector<CaseNote> notes;
    std::set<std::string> seen;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
        CaseNote note;
        note.doc_id = entry.path().stem().string();
        if (!seen.insert(note.doc_id).second) {
            throw ValidationError("duplicate doc_id '" + note.doc_id + "' in " + dir.string());
        }
        std::ifstream in(entry.path(), std::ios::binary);
        if (!in) throw ValidationError("cannot read document: " + entry.path().string());
        std::ostringstream buf;
        buf << in.rdbuf();
        note.text = buf.str();
        if (note.text.empty()) {
            throw ValidationError("document is empty: " + entry.path().string());
        }
        notes.push_back(std::move(note));
    }
    if (notes.empty()) throw ValidationError("no .txt documents in " + dir.string());
    std::sort(notes.begin(), notes.end(),
              [](const CaseNote& a, const CaseNote& b) { return a.doc_id < b.doc_id; });
    return notes;
}

/// Parse a 2-column TSV of `doc_id<TAB>code` rows into per-document label
/// sets. Codes are canonicalized on ingest; codes unknown to the ontology
/// or not assignable are dropped and counted in the filter report.
/// Order-insensitive over input rows.
inline GoldLabels load_gold_labels(std::string_view text, const Ontology& onto) {
    GoldLabels out;
    int lineno = 0;
    for (std::string_view line : split_lines(text)) {
        ++lineno;
        if (line.empty() || trim(line).empty() || line.front() == '#') continue;
        auto fields = split(line, "\t");
        if (fields.size() != 2 || trim(fields[0]).empty() || trim(fields[1]).empty()) {
            throw ValidationError("malformed label row (line " + std::to_string(lineno) +
                                  "): expected doc_id<TAB>code in \"" + std::string(line) + "\"");
        }
        std::string doc_id(trim(fields[0]));
        std::string code = canonicalize_code(fields[1]);
        if (!onto.contains(code)) {
            ++out.filter.unknown;
            continue;
        }
        if (!onto.is_assignable(code)) {
            ++out.filter.non_assignable;
            continue;
        }
        auto& set = out.by_doc[doc_id];
        set.doc_id = doc_id;
        set.codes.insert(std::move(code));
    }
    for (const auto& [doc, labels] : out.by_doc) out.filter.kept += static_cast<long>(labels.codes.size());
    return out;
}

inline GoldLabels load_gold_labels_file(const std::filesystem::path& path, const Ontology& onto) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open gold labels file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_gold_labels(buf.str(), onto);
}

} // namespace ontocoder
