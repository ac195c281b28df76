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

// Drives the installed binary over the committed replay fixture and
// byte-compares its outputs with the golden files.

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "testutil.hpp"

namespace ontocoder {
namespace {

namespace fs = std::filesystem;
using testutil::TempDir;

const fs::path kFixtures = ONTOCODER_FIXTURES_DIR;
const std::string kCli = ONTOCODER_CLI_PATH;

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

CliResult run_cli(const std::string& args, const TempDir& scratch) {
    const fs::path out = scratch.path() / "stdout.txt";
    const fs::path err = scratch.path() / "stderr.txt";
    std::string cmd = kCli + " " + args + " >" + out.string() + " 2>" + err.string();
    int raw = std::system(cmd.c_str());
    CliResult r;
    r.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

fs::path write_replay_config(const TempDir& dir, const std::string& output_dir) {
    nlohmann::json cfg = {
        {"ontology_path", (kFixtures / "mini_icd10.tsv").string()},
        {"documents_dir", (kFixtures / "docs").string()},
        {"gold_labels_path", (kFixtures / "gold.tsv").string()},
        {"template_path", (fs::path(ONTOCODER_TEMPLATES_DIR) / "tree_gpt.prompt").string()},
        {"cache_dir", (kFixtures / "replay").string()},
        {"output_dir", output_dir},
        {"budget", 50},
        {"workers", 2},
        {"backend", {{"kind", "replay"}, {"model_id", "gpt-4"}, {"temperature", 0.0}}},
    };
    fs::path path = dir.path() / "config.json";
    std::ofstream(path) << cfg.dump(2);
    return path;
}

fs::path coder_config(const TempDir& dir, const std::string& output_dir) {
    nlohmann::json cfg = {
        {"ontology_path", (kFixtures / "mini_icd10.tsv").string()},
        {"documents_dir", (kFixtures / "docs").string()},
        {"template_path", (fs::path(ONTOCODER_TEMPLATES_DIR) / "coder.prompt").string()},
        {"cache_dir", (kFixtures / "replay").string()},
        {"output_dir", output_dir},
        {"backend", {{"kind", "replay"}, {"model_id", "gpt-4"}, {"temperature", 0.0}}},
    };
    fs::path path = dir.path() / "coder_config.json";
    std::ofstream(path) << cfg.dump(2);
    return path;
}

bool fixtures_ready() { return fs::exists(kFixtures / "replay") && fs::exists(kFixtures / "golden"); }

TEST(Cli, SearchReplayMatchesGolden) {
    if (!fixtures_ready()) GTEST_SKIP() << "fixtures not generated";
    TempDir scratch("cli_search");
    fs::path out_dir = scratch.path() / "out";
    fs::path config = write_replay_config(scratch, out_dir.string());
    CliResult r = run_cli("search --config " + config.string(), scratch);
    ASSERT_EQ(r.exit_code, 0) << r.err;

    EXPECT_EQ(slurp(out_dir / "predictions.tsv"), slurp(kFixtures / "golden" / "predictions.tsv"));
    EXPECT_EQ(slurp(out_dir / "filter_report.json"), slurp(kFixtures / "golden" / "filter_report.json"));
    EXPECT_TRUE(fs::exists(out_dir / "manifest.json"));
    EXPECT_TRUE(fs::exists(out_dir / "traces"));
    // The manifest records enough to reproduce the run.
    nlohmann::json manifest = nlohmann::json::parse(slurp(out_dir / "manifest.json"));
    EXPECT_EQ(manifest.at("backend_id"), "replay");
    EXPECT_FALSE(manifest.at("config_hash").get<std::string>().empty());
    EXPECT_GT(manifest.at("total_prompts").get<int>(), 0);
    // Template/family pairing is explicit in the run record.
    EXPECT_EQ(manifest.at("template_id").get<std::string>().rfind("gpt-style-", 0), 0u);
}

TEST(Cli, EvalMatchesGolden) {
    if (!fixtures_ready()) GTEST_SKIP() << "fixtures not generated";
    TempDir scratch("cli_eval");
    fs::path report_dir = scratch.path() / "report";
    CliResult r = run_cli("eval --predictions " + (kFixtures / "golden" / "predictions.tsv").string() +
                              " --gold " + (kFixtures / "gold.tsv").string() + " --ontology " +
                              (kFixtures / "mini_icd10.tsv").string() + " --output-dir " +
                              report_dir.string() + " --csv",
                          scratch);
    ASSERT_EQ(r.exit_code, 0) << r.err;
    EXPECT_EQ(slurp(report_dir / "metrics.json"), slurp(kFixtures / "golden" / "metrics.json"));
    EXPECT_EQ(slurp(report_dir / "metrics.txt"), slurp(kFixtures / "golden" / "metrics.txt"));
    EXPECT_TRUE(fs::exists(report_dir / "metrics.csv"));
    // The table goes to stdout too.
    EXPECT_NE(r.out.find("Micro"), std::string::npos);
}

TEST(Cli, LevelsMatchesGolden) {
    if (!fixtures_ready()) GTEST_SKIP() << "fixtures not generated";
    TempDir scratch("cli_levels");
    fs::path out_dir = scratch.path() / "out";
    fs::path config = write_replay_config(scratch, out_dir.string());
    ASSERT_EQ(run_cli("search --config " + config.string(), scratch).exit_code, 0);

    fs::path report_dir = scratch.path() / "report";
    CliResult r = run_cli("levels --traces " + (out_dir / "traces").string() + " --gold " +
                              (kFixtures / "gold.tsv").string() + " --ontology " +
                              (kFixtures / "mini_icd10.tsv").string() + " --output-dir " +
                              report_dir.string(),
                          scratch);
    ASSERT_EQ(r.exit_code, 0) << r.err;
    EXPECT_EQ(slurp(report_dir / "levels.json"), slurp(kFixtures / "golden" / "levels.json"));
    EXPECT_EQ(slurp(report_dir / "levels.txt"), slurp(kFixtures / "golden" / "levels.txt"));
    EXPECT_NE(r.out.find("Chapter"), std::string::npos);
    EXPECT_NE(r.out.find("Extension II"), std::string::npos);
}

TEST(Cli, BaselineModesDivergeAndMatchGolden) {
    if (!fixtures_ready()) GTEST_SKIP() << "fixtures not generated";
    TempDir scratch("cli_baseline");
    fs::path codes_dir = scratch.path() / "codes";
    fs::path descs_dir = scratch.path() / "descs";
    fs::path config_codes = coder_config(scratch, codes_dir.string());
    CliResult r1 = run_cli("baseline --mode match-codes --config " + config_codes.string(), scratch);
    ASSERT_EQ(r1.exit_code, 0) << r1.err;
    CliResult r2 = run_cli("baseline --mode match-descriptions --config " + config_codes.string() +
                               " --output-dir " + descs_dir.string(),
                           scratch);
    ASSERT_EQ(r2.exit_code, 0) << r2.err;

    std::string codes_tsv = slurp(codes_dir / "predictions.tsv");
    std::string descs_tsv = slurp(descs_dir / "predictions.tsv");
    EXPECT_EQ(codes_tsv, slurp(kFixtures / "golden" / "baseline_match_codes.tsv"));
    EXPECT_EQ(descs_tsv, slurp(kFixtures / "golden" / "baseline_match_descriptions.tsv"));
    EXPECT_NE(codes_tsv, descs_tsv); // mismatched code/description pairs diverge
}

TEST(Cli, PerfectOracleRunRecoversGoldFile) {
    TempDir scratch("cli_oracle");
    fs::path out_dir = scratch.path() / "out";
    nlohmann::json cfg = {
        {"ontology_path", (kFixtures / "mini_icd10.tsv").string()},
        {"documents_dir", (kFixtures / "docs").string()},
        {"gold_labels_path", (kFixtures / "gold.tsv").string()},
        {"template_path", (fs::path(ONTOCODER_TEMPLATES_DIR) / "tree_gpt.prompt").string()},
        {"output_dir", out_dir.string()},
        {"budget", "unlimited"},
        {"backend", {{"kind", "oracle"}, {"model_id", "oracle"}}},
    };
    fs::path config = scratch.path() / "oracle.json";
    std::ofstream(config) << cfg.dump(2);
    CliResult r = run_cli("search --config " + config.string(), scratch);
    ASSERT_EQ(r.exit_code, 0) << r.err;

    // With zero noise rates the predictions file equals the gold file
    // after canonicalization, filtering and sorting.
    std::string expected =
        "S0004-06142005000900014-1\tC63.2\n"
        "S0210-48062005000800011-1\tA48.1\n"
        "S0212-71992006000100006-1\tB27.80\n"
        "S0376-78922009000400008-1\tS52.521\n"
        "S1130-05582008000500007-1\tB27.00\n"
        "S1130-05582008000500007-1\tJ00\n"
        "S1889-836X2016000100006-1\tJ00\n";
    EXPECT_EQ(slurp(out_dir / "predictions.tsv"), expected);
}

TEST(Cli, ValidationFailureNamesFieldAndExitsNonzero) {
    TempDir scratch("cli_badcfg");
    nlohmann::json cfg = {
        {"ontology_path", (scratch.path() / "missing.tsv").string()},
        {"documents_dir", (kFixtures / "docs").string()},
        {"template_path", (fs::path(ONTOCODER_TEMPLATES_DIR) / "tree_gpt.prompt").string()},
        {"backend", {{"kind", "replay"}}},
    };
    fs::path config = scratch.path() / "bad.json";
    std::ofstream(config) << cfg.dump();
    CliResult r = run_cli("search --config " + config.string(), scratch);
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_NE(r.err.find("ontology_path"), std::string::npos);
}

TEST(Cli, CacheStatsAndClear) {
    if (!fixtures_ready()) GTEST_SKIP() << "fixtures not generated";
    TempDir scratch("cli_cache");
    // stats over the committed archive
    CliResult stats = run_cli("cache stats --dir " + (kFixtures / "replay").string(), scratch);
    ASSERT_EQ(stats.exit_code, 0);
    EXPECT_NE(stats.out.find("entries:"), std::string::npos);
    EXPECT_EQ(stats.out.find("entries: 0"), std::string::npos);
    // clear a scratch copy
    fs::path copy = scratch.path() / "cache_copy";
    fs::create_directories(copy);
    for (const auto& e : fs::directory_iterator(kFixtures / "replay")) {
        fs::copy_file(e.path(), copy / e.path().filename());
    }
    CliResult clear = run_cli("cache clear --dir " + copy.string(), scratch);
    ASSERT_EQ(clear.exit_code, 0);
    CliResult after = run_cli("cache stats --dir " + copy.string(), scratch);
    EXPECT_NE(after.out.find("entries: 0"), std::string::npos);
}

TEST(Cli, HelpAndBadUsage) {
    TempDir scratch("cli_help");
    EXPECT_EQ(run_cli("--help", scratch).exit_code, 0);
    EXPECT_NE(run_cli("", scratch).exit_code, 0);        // subcommand required
    EXPECT_NE(run_cli("search", scratch).exit_code, 0);  // --config required
    CliResult help = run_cli("--help", scratch);
    EXPECT_NE(help.out.find("budget"), std::string::npos); // config schema documented
}

} // namespace
} // namespace ontocoder
