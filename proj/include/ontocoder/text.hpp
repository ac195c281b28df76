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

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace ontocoder {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) {
            lines.push_back(text.substr(start));
            break;
        }
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        start = end + 1;
    }
    return lines;
}

inline std::vector<std::string> split(std::string_view text, std::string_view sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        std::size_t end = text.find(sep, start);
        if (end == std::string_view::npos) {
            parts.emplace_back(text.substr(start));
            return parts;
        }
        parts.emplace_back(text.substr(start, end - start));
        start = end + sep.size();
    }
}

/// Canonical text form used for all description matching: case-folded,
/// whitespace runs collapsed to single spaces, trimmed, typographic
/// apostrophes/quotes/dashes mapped to their ASCII forms. Punctuation is
/// otherwise preserved. Idempotent.
///
/// Case folding covers ASCII; the target ontologies carry plain English
/// descriptions where the typographic characters above are the only
/// non-ASCII content seen in practice.
inline std::string normalize_text(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    std::size_t i = 0;
    auto emit = [&](char c) {
        if (pending_space) {
            if (!out.empty()) out.push_back(' ');
            pending_space = false;
        }
        out.push_back(c);
    };
    while (i < text.size()) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        // Multi-byte sequences we care about, by UTF-8 prefix.
        if (c == 0xe2 && i + 2 < text.size()) {
            unsigned char b1 = static_cast<unsigned char>(text[i + 1]);
            unsigned char b2 = static_cast<unsigned char>(text[i + 2]);
            if (b1 == 0x80) {
                if (b2 == 0x98 || b2 == 0x99) { emit('\''); i += 3; continue; } // ‘ ’
                if (b2 == 0x9c || b2 == 0x9d) { emit('"'); i += 3; continue; }  // “ ”
                if (b2 == 0x93 || b2 == 0x94) { emit('-'); i += 3; continue; }  // – —
                if (b2 == 0xa2) { emit('-'); i += 3; continue; }                // •
            }
        }
        if (c == 0xc2 && i + 1 < text.size() &&
            static_cast<unsigned char>(text[i + 1]) == 0xa0) { // NBSP
            pending_space = true;
            i += 2;
            continue;
        }
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v') {
            pending_space = true;
            ++i;
            continue;
        }
        if (c < 0x80) {
            emit(static_cast<char>(std::tolower(c)));
        } else {
            emit(static_cast<char>(c));
        }
        ++i;
    }
    return out;
}

/// Canonical code form: trimmed, upper-cased, with a dot inserted after
/// the third character when the code is longer than three characters and
/// carries no dot. "b2789" -> "B27.89".
inline std::string canonicalize_code(std::string_view raw) {
    std::string_view t = trim(raw);
    std::string code;
    code.reserve(t.size() + 1);
    for (char c : t) code.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    if (code.size() > 3 && code.find('.') == std::string::npos) {
        code.insert(3, 1, '.');
    }
    return code;
}

} // namespace ontocoder
