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

#include "ontocoder/corpus.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <random>

#include "testutil.hpp"

namespace ontocoder {
namespace {

using testutil::TempDir;
using testutil::toy_ontology;

void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    out << content;
}

TEST(LoadDocuments, SortedByDocId) {
    TempDir dir("docs");
    write_file(dir.path() / "b-doc.txt", "second document");
    write_file(dir.path() / "a-doc.txt", "first document");
    write_file(dir.path() / "notes.md", "ignored, wrong extension");
    auto notes = load_documents(dir.path());
    ASSERT_EQ(notes.size(), 2u);
    EXPECT_EQ(notes[0].doc_id, "a-doc");
    EXPECT_EQ(notes[1].doc_id, "b-doc");
    EXPECT_EQ(notes[0].text, "first document");
}

TEST(LoadDocuments, CodiespStyleFilename) {
    TempDir dir("docs");
    write_file(dir.path() / "S0212-71992006000100006-1.txt", "case note text");
    auto notes = load_documents(dir.path());
    ASSERT_EQ(notes.size(), 1u);
    EXPECT_EQ(notes[0].doc_id, "S0212-71992006000100006-1");
}

TEST(LoadDocuments, EmptyDirectoryIsAnError) {
    TempDir dir("docs");
    EXPECT_THROW(load_documents(dir.path()), ValidationError);
    EXPECT_THROW(load_documents(dir.path() / "missing"), ValidationError);
}

TEST(LoadDocuments, EmptyFileIsAnError) {
    TempDir dir("docs");
    write_file(dir.path() / "empty.txt", "");
    EXPECT_THROW(load_documents(dir.path()), ValidationError);
}

TEST(LoadGoldLabels, DeduplicatesRows) {
    Ontology onto = toy_ontology();
    GoldLabels gold = load_gold_labels("d1\tL1\nd1\tL1\n", onto);
    ASSERT_EQ(gold.by_doc.size(), 1u);
    EXPECT_EQ(gold.by_doc.at("d1").codes, (std::set<std::string>{"L1"}));
    EXPECT_EQ(gold.filter.kept, 1);
}

TEST(LoadGoldLabels, DropsNonAssignableAndUnknown) {
    Ontology onto = toy_ontology();
    GoldLabels gold = load_gold_labels("d1\tL1\nd1\tB1\nd1\tZZZ\n", onto);
    EXPECT_EQ(gold.by_doc.at("d1").codes, (std::set<std::string>{"L1"}));
    EXPECT_EQ(gold.filter.non_assignable, 1);
    EXPECT_EQ(gold.filter.unknown, 1);
    EXPECT_EQ(gold.filter.kept, 1);
}

TEST(LoadGoldLabels, CanonicalizesCodes) {
    Ontology onto = Ontology::parse(
        "ROOT\t\t0\t0\t\n"
        "B27\tROOT\t1\t0\tInfectious mononucleosis\n"
        "B27.89\tB27\t2\t1\tInfectious mononucleosis with other complications\n");
    GoldLabels gold = load_gold_labels("d1\tb2789\n", onto);
    EXPECT_EQ(gold.by_doc.at("d1").codes, (std::set<std::string>{"B27.89"}));
}

TEST(LoadGoldLabels, MalformedRowThrows) {
    Ontology onto = toy_ontology();
    EXPECT_THROW(load_gold_labels("only-one-column\n", onto), ValidationError);
    EXPECT_THROW(load_gold_labels("d1\t\n", onto), ValidationError);
}

TEST(LoadGoldLabels, OrderInsensitive) {
    Ontology onto = toy_ontology();
    std::vector<std::string> rows = {"d1\tL1", "d2\tL3", "d1\tL4", "d2\tB1", "d1\tNOPE"};
    std::mt19937_64 rng(99);
    GoldLabels first;
    for (int trial = 0; trial < 10; ++trial) {
        std::shuffle(rows.begin(), rows.end(), rng);
        std::string text;
        for (const auto& r : rows) text += r + "\n";
        GoldLabels gold = load_gold_labels(text, onto);
        if (trial == 0) {
            first = gold;
            continue;
        }
        ASSERT_EQ(gold.by_doc.size(), first.by_doc.size());
        for (const auto& [doc, labels] : gold.by_doc) {
            EXPECT_EQ(labels.codes, first.by_doc.at(doc).codes);
        }
        EXPECT_EQ(gold.filter.kept, first.filter.kept);
        EXPECT_EQ(gold.filter.unknown, first.filter.unknown);
        EXPECT_EQ(gold.filter.non_assignable, first.filter.non_assignable);
    }
}

TEST(LoadGoldLabels, AllKeptCodesAreAssignable) {
    Ontology onto = toy_ontology();
    GoldLabels gold = load_gold_labels("d1\tL1\nd1\tC1\nd2\tL3\nd2\tL4\nd3\tB3\n", onto);
    for (const auto& [doc, labels] : gold.by_doc) {
        for (const auto& code : labels.codes) EXPECT_TRUE(onto.is_assignable(code));
    }
}

} // namespace
} // namespace ontocoder
