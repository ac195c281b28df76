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

// Operator surface: `search` (LLM-guided tree-search over a corpus),
// `baseline` (single-prompt clinical coder), `eval` and `levels`
// (metrics), `cache` (response-cache management).

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "ontocoder/cache.hpp"
#include "ontocoder/config.hpp"
#include "ontocoder/corpus.hpp"
#include "ontocoder/eval.hpp"
#include "ontocoder/http_backend.hpp"
#include "ontocoder/llm.hpp"
#include "ontocoder/ontology.hpp"
#include "ontocoder/prompting.hpp"
#include "ontocoder/search.hpp"

namespace fs = std::filesystem;
using namespace ontocoder;

namespace {

constexpr const char* kConfigSchema = R"(Config file (JSON):
  ontology_path        ontology flat file (TSV; see README)
  documents_dir        directory of UTF-8 .txt case notes, stem = doc_id
  gold_labels_path     TSV doc_id<TAB>code; required for the oracle backend
  template_path        prompt template file
  cache_dir            response cache (http/oracle); recording source (replay)
  output_dir           where predictions/traces/reports go (default "out")
  budget               prompt limit per document, integer >= 1 or "unlimited" (default 50)
  workers              concurrent documents (default 1)
  class_set_policy     macro-average class set: "gold" or "union" (default "gold")
  frontier_discipline  parent expansion order: "fifo" (default) or "lifo"
  rng_seed             seed for the oracle backend's noise
  backend.kind         http | replay | oracle
  backend.endpoint     chat-completions URL (http backend)
  backend.model_id     model name sent on the wire and used in cache keys
  backend.credential_env_var  env var holding the bearer token; never stored
  backend.temperature  sampling temperature (default 0; use 0.001 for Llama-style backends)
  backend.max_output_tokens   completion cap (default 1024)
  backend.max_in_flight       concurrent http requests (default 4)
  backend.oracle_false_negative_rate / oracle_false_positive_rate  in [0,1])";

struct BackendStack {
    std::unique_ptr<Backend> base;
    std::unique_ptr<Backend> cache;
    Backend* active = nullptr;
};

BackendStack build_backend(const RunConfig& cfg, const Ontology& onto, const GoldLabels* gold) {
    BackendStack stack;
    if (cfg.backend.kind == "http") {
        HttpBackendConfig hc;
        hc.endpoint = cfg.backend.endpoint;
        hc.credential_env_var = cfg.backend.credential_env_var;
        hc.max_in_flight = cfg.backend.max_in_flight;
        stack.base = std::make_unique<HttpBackend>(hc);
    } else if (cfg.backend.kind == "replay") {
        stack.base = std::make_unique<ReplayBackend>(fs::path(cfg.cache_dir));
    } else { // oracle; kind already validated
        OracleConfig oc;
        if (gold == nullptr) throw ValidationError("oracle backend needs gold labels");
        oc.gold = gold->by_doc;
        oc.false_negative_rate = cfg.backend.oracle_false_negative_rate;
        oc.false_positive_rate = cfg.backend.oracle_false_positive_rate;
        oc.rng_seed = cfg.rng_seed;
        stack.base = std::make_unique<OracleBackend>(std::move(oc), onto);
    }
    stack.active = stack.base.get();
    if (cfg.backend.kind != "replay" && !cfg.cache_dir.empty()) {
        stack.cache = std::make_unique<CachedBackend>(*stack.base, cfg.cache_dir);
        stack.active = stack.cache.get();
    }
    return stack;
}

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << content;
}

nlohmann::json filter_report_json(const LabelFilterReport& r) {
    return {{"unknown", r.unknown}, {"non_assignable", r.non_assignable}, {"kept", r.kept}};
}

int run_pipeline(const RunConfig& cfg, bool baseline, BaselineMode mode) {
    validate_run_config(cfg);
    Ontology onto = Ontology::load_file(cfg.ontology_path);
    PromptTemplate tpl = load_template(cfg.template_path);
    std::vector<CaseNote> notes = load_documents(cfg.documents_dir);

    std::unique_ptr<GoldLabels> gold;
    if (!cfg.gold_labels_path.empty()) {
        gold = std::make_unique<GoldLabels>(load_gold_labels_file(cfg.gold_labels_path, onto));
        std::cerr << "gold labels: kept " << gold->filter.kept << ", dropped "
                  << gold->filter.unknown << " unknown + " << gold->filter.non_assignable
                  << " non-assignable\n";
    }

    BackendStack backend = build_backend(cfg, onto, gold.get());

    RunOptions options;
    options.budget = cfg.budget;
    options.workers = cfg.workers;
    options.request.model_id = cfg.backend.model_id;
    options.request.temperature = cfg.backend.temperature;
    options.request.max_output_tokens = cfg.backend.max_output_tokens;
    options.frontier = frontier_discipline_from(cfg.frontier_discipline);

    CorpusRunResult run = baseline
                              ? run_baseline_corpus(notes, onto, *backend.active, tpl, mode, options)
                              : run_corpus(notes, onto, *backend.active, tpl, options);

    fs::create_directories(cfg.output_dir);
    const fs::path out_dir(cfg.output_dir);
    write_predictions(out_dir / "predictions.tsv", predictions_of(run));
    write_trace_archive(out_dir / "traces", run);
    if (gold) {
        write_text(out_dir / "filter_report.json", filter_report_json(gold->filter).dump(2) + "\n");
    }
    nlohmann::json manifest = run_manifest(cfg, tpl.id, backend.active->id(), run);
    if (baseline) manifest["baseline_mode"] = std::string(to_string(mode));
    write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");

    std::cout << (baseline ? "baseline" : "search") << ": " << run.by_doc.size() << " documents, "
              << run.total_prompts << " prompts, " << run.parse_warnings << " parse warnings, "
              << run.failed_docs << " failures\n"
              << "outputs in " << out_dir.string() << "\n";
    if (run.failed_docs > 0) {
        for (const auto& [doc, result] : run.by_doc) {
            if (result.error) std::cerr << "failed: " << doc << ": " << *result.error << "\n";
        }
        return 1;
    }
    return 0;
}

int cmd_eval(const std::string& predictions_path, const std::string& gold_path,
             const std::string& ontology_path, const std::string& policy_name,
             const std::string& label, const std::string& output_dir, bool csv) {
    Ontology onto = Ontology::load_file(ontology_path);
    GoldLabels gold = load_gold_labels_file(gold_path, onto);
    LabelMap gold_map;
    for (const auto& [doc, labels] : gold.by_doc) gold_map[doc] = labels.codes;
    LabelMap pred = read_predictions(predictions_path);
    ClassSetPolicy policy = class_set_policy_from(policy_name);

    MetricsReport report = compute_metrics(gold_map, pred, policy);
    std::string table = render_metrics_table(label, report);
    std::cout << table;
    if (!output_dir.empty()) {
        fs::create_directories(output_dir);
        write_text(fs::path(output_dir) / "metrics.json", metrics_to_json(report).dump(2) + "\n");
        write_text(fs::path(output_dir) / "metrics.txt", table);
        if (csv) write_text(fs::path(output_dir) / "metrics.csv", metrics_to_csv(label, report));
    }
    return 0;
}

int cmd_levels(const std::string& traces_dir, const std::string& gold_path,
               const std::string& ontology_path, const std::string& policy_name,
               const std::string& output_dir, bool csv) {
    Ontology onto = Ontology::load_file(ontology_path);
    GoldLabels gold = load_gold_labels_file(gold_path, onto);
    LabelMap gold_map;
    for (const auto& [doc, labels] : gold.by_doc) gold_map[doc] = labels.codes;
    TraceRelevance traces = load_trace_relevance(traces_dir);
    ClassSetPolicy policy = class_set_policy_from(policy_name);

    LevelReport report = level_analysis(gold_map, traces, onto, policy);
    std::string table = render_level_table(report);
    std::cout << table;
    if (!output_dir.empty()) {
        fs::create_directories(output_dir);
        write_text(fs::path(output_dir) / "levels.json", level_report_to_json(report).dump(2) + "\n");
        write_text(fs::path(output_dir) / "levels.txt", table);
        if (csv) write_text(fs::path(output_dir) / "levels.csv", level_report_to_csv(report));
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hierarchical code assignment from free text via LLM-guided tree search"};
    app.require_subcommand(1);
    app.footer(kConfigSchema);

    // search / baseline
    std::string config_path, output_dir_override, template_override, mode_name = "match-codes";
    long long budget_override = -1;
    int workers_override = -1;

    auto add_run_options = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "Run configuration JSON file")->required();
        cmd->add_option("--output-dir", output_dir_override, "Override output_dir from the config");
        cmd->add_option("--template", template_override, "Override template_path from the config");
        cmd->add_option("--budget", budget_override, "Override prompt budget per document");
        cmd->add_option("--workers", workers_override, "Override worker count");
    };

    CLI::App* search = app.add_subcommand("search", "Run LLM-guided tree-search over a corpus");
    add_run_options(search);

    CLI::App* baseline = app.add_subcommand("baseline", "Run the single-prompt clinical-coder baseline");
    add_run_options(baseline);
    baseline->add_option("--mode", mode_name, "Prediction recovery: match-codes | match-descriptions")
        ->check(CLI::IsMember({"match-codes", "match-descriptions"}));

    // eval
    std::string predictions_path, gold_path, ontology_path, policy = "gold", label = "run";
    std::string report_dir;
    bool csv = false;
    CLI::App* eval = app.add_subcommand("eval", "Score a predictions file against gold labels");
    eval->add_option("--predictions", predictions_path, "Predictions TSV (doc_id<TAB>code)")->required();
    eval->add_option("--gold", gold_path, "Gold labels TSV")->required();
    eval->add_option("--ontology", ontology_path, "Ontology flat file")->required();
    eval->add_option("--policy", policy, "Macro class set: gold | union");
    eval->add_option("--label", label, "Row label in the rendered table");
    eval->add_option("--output-dir", report_dir, "Write metrics.json/.txt here");
    eval->add_flag("--csv", csv, "Also write CSV");

    // levels
    std::string traces_dir;
    CLI::App* levels = app.add_subcommand("levels", "Cumulative level-wise analysis of search traces");
    levels->add_option("--traces", traces_dir, "Trace archive directory")->required();
    levels->add_option("--gold", gold_path, "Gold labels TSV")->required();
    levels->add_option("--ontology", ontology_path, "Ontology flat file")->required();
    levels->add_option("--policy", policy, "Macro class set: gold | union");
    levels->add_option("--output-dir", report_dir, "Write levels.json/.txt here");
    levels->add_flag("--csv", csv, "Also write CSV");

    // cache
    std::string cache_dir;
    CLI::App* cache = app.add_subcommand("cache", "Response cache management");
    cache->require_subcommand(1);
    CLI::App* cache_stats_cmd = cache->add_subcommand("stats", "Entry count and total size");
    cache_stats_cmd->add_option("--dir", cache_dir, "Cache directory")->required();
    CLI::App* cache_clear_cmd = cache->add_subcommand("clear", "Delete all cache entries");
    cache_clear_cmd->add_option("--dir", cache_dir, "Cache directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*search || *baseline) {
            RunConfig cfg = load_run_config(config_path);
            if (!output_dir_override.empty()) cfg.output_dir = output_dir_override;
            if (!template_override.empty()) cfg.template_path = template_override;
            if (budget_override > 0) cfg.budget = static_cast<std::size_t>(budget_override);
            if (workers_override > 0) cfg.workers = workers_override;
            BaselineMode mode = mode_name == "match-codes" ? BaselineMode::match_codes
                                                           : BaselineMode::match_descriptions;
            return run_pipeline(cfg, baseline->parsed(), mode);
        }
        if (*eval) return cmd_eval(predictions_path, gold_path, ontology_path, policy, label, report_dir, csv);
        if (*levels) return cmd_levels(traces_dir, gold_path, ontology_path, policy, report_dir, csv);
        if (*cache_stats_cmd) {
            CacheStats stats = cache_stats(cache_dir);
            std::cout << "entries: " << stats.entries << "\nbytes: " << stats.bytes << "\n";
            return 0;
        }
        if (*cache_clear_cmd) {
            std::cout << "removed " << cache_clear(cache_dir) << " entries\n";
            return 0;
        }
    } catch (const Error& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    } catch (const std::exception& ex) {
        std::cerr << "internal error: " << ex.what() << "\n";
        return 1;
    }
    return 0;
}
