// rca — rule-learning disease prediction pipeline over an LLM gateway.
//
// Subcommands: ingest, train, predict, perturb, judge, report.
// Config precedence everywhere: CLI flag > environment > config file > default.

#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rca/artifacts.hpp"
#include "rca/dataset.hpp"
#include "rca/distribution.hpp"
#include "rca/gateway.hpp"
#include "rca/judge.hpp"
#include "rca/metrics.hpp"
#include "rca/perturb.hpp"
#include "rca/predict.hpp"
#include "rca/prompts.hpp"
#include "rca/rules.hpp"
#include "rca/split.hpp"
#include "rca/text.hpp"
#include "rca/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string utc_now() {
    std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

json load_json_file(const std::string& path) { return json::parse(rca::read_file(path)); }

std::string env_or(const char* name, const std::string& fallback) {
    const char* value = std::getenv(name);
    return value && *value ? value : fallback;
}

struct CommonArgs {
    std::string config_path;
    std::string table, schema;
    std::string templates_dir;
    std::string backend_kind;  // http | mock
    std::string mock_script;
    std::string base_url;
    std::string model;
    int concurrency = 0;  // 0 = unset
    json config;          // parsed config file ("" -> empty object)

    void load_config() { config = config_path.empty() ? json::object() : load_json_file(config_path); }

    std::string pick(const std::string& flag_value, const char* key, const std::string& fallback) const {
        if (!flag_value.empty()) return flag_value;
        if (config.contains(key)) return config.at(key).get<std::string>();
        return fallback;
    }

    rca::LoadResult load() const {
        std::string table_path = pick(table, "table", "");
        std::string schema_path = pick(schema, "schema", "");
        if (table_path.empty() || schema_path.empty())
            throw std::runtime_error("need --table and --schema (or config entries)");
        return rca::load_dataset_files(table_path, schema_path);
    }

    rca::BackendConfig backend_config() const {
        rca::BackendConfig bc;
        json cfg = config.value("backend", json::object());
        std::string kind = !backend_kind.empty() ? backend_kind : cfg.value("kind", std::string("mock"));
        if (kind == "mock") bc.kind = rca::BackendKind::scripted_mock;
        else if (kind == "http") bc.kind = rca::BackendKind::http_openai_compatible;
        else throw std::runtime_error("unknown backend kind: " + kind);
        bc.script_path = !mock_script.empty() ? mock_script : cfg.value("script", std::string());
        bc.base_url = !base_url.empty() ? base_url
                                        : env_or("RCA_BASE_URL", cfg.value("base_url", std::string()));
        bc.model_id = !model.empty() ? model : cfg.value("model", std::string("mock-model"));
        if (cfg.contains("models"))
            bc.role_models = cfg.at("models").get<std::map<std::string, std::string>>();
        bc.concurrency_limit = concurrency > 0 ? concurrency : cfg.value("concurrency", 4);
        if (cfg.contains("retry")) {
            const json& r = cfg.at("retry");
            bc.retry.max_attempts = r.value("max_attempts", bc.retry.max_attempts);
            bc.retry.backoff_base_ms = r.value("backoff_base_ms", bc.retry.backoff_base_ms);
            bc.retry.jitter = r.value("jitter", bc.retry.jitter);
        }
        if (bc.kind == rca::BackendKind::scripted_mock) {
            if (bc.script_path.empty()) throw std::runtime_error("mock backend needs --mock PATH");
            // Scripted runs should not sleep between retries unless asked to.
            if (!cfg.contains("retry")) {
                bc.retry.backoff_base_ms = 0;
                bc.retry.jitter = false;
            }
        } else if (bc.base_url.empty()) {
            throw std::runtime_error("http backend needs --base-url or RCA_BASE_URL");
        }
        return bc;
    }

    rca::TemplateLibrary templates() const {
        std::string dir = pick(templates_dir, "templates_dir", rca::default_template_dir());
        return rca::TemplateLibrary::load_dir(dir);
    }
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_dataset = true) {
    cmd->add_option("--config", args.config_path, "JSON config file");
    if (with_dataset) {
        cmd->add_option("--table", args.table, "dataset CSV");
        cmd->add_option("--schema", args.schema, "schema JSON");
    }
    cmd->add_option("--templates", args.templates_dir, "prompt template directory");
    cmd->add_option("--backend", args.backend_kind, "backend kind: http | mock")
        ->check(CLI::IsMember({"http", "mock"}));
    cmd->add_option("--mock", args.mock_script, "mock script (JSON lines)");
    cmd->add_option("--base-url", args.base_url, "OpenAI-compatible base url");
    cmd->add_option("--model", args.model, "model id");
    cmd->add_option("--concurrency", args.concurrency, "gateway in-flight limit");
}

json read_perturbation_note(const std::string& table_path) {
    fs::path note = fs::path(table_path).parent_path() / "perturbation.json";
    if (fs::exists(note)) return load_json_file(note.string());
    return json();
}

// ---------------------------------------------------------------------------

struct IngestArgs {
    CommonArgs common;
    std::string report_path;
};

int cmd_ingest(IngestArgs& args) {
    args.common.load_config();
    rca::LoadResult lr = args.common.load();
    json out{{"rows", lr.dataset.size()},
             {"positives", lr.dataset.positive_count()},
             {"variant", lr.dataset.variant},
             {"fingerprint", rca::dataset_fingerprint(lr.dataset)},
             {"ingest_report", lr.report.to_json()}};
    if (!args.report_path.empty()) rca::write_file(args.report_path, out.dump(2) + "\n");
    std::cout << out.dump(2) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
    CommonArgs common;
    std::string run_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int epochs = 0;
    int batch_capacity = 0;
    int parallelism = 0;
    bool no_distribution = false, no_reflection = false, no_check = false;
    bool stratified = false;
    std::string selection;
};

int cmd_train(TrainArgs& args) {
    args.common.load_config();
    const json& cfg = args.common.config;

    rca::TrainConfig tc = rca::TrainConfig::from_json(cfg);
    if (args.seed_set) tc.seed = args.seed;
    if (args.epochs > 0) tc.epochs = args.epochs;
    if (args.batch_capacity > 0) tc.batch_capacity = args.batch_capacity;
    if (args.parallelism > 0) tc.val_parallelism = args.parallelism;
    if (args.no_distribution) tc.use_distribution = false;
    if (args.no_reflection) tc.use_reflection = false;
    if (args.no_check) tc.use_check = false;
    if (args.selection == "best_val_mcc") tc.selection = rca::TrainConfig::Selection::best_val_mcc;
    else if (args.selection == "last_epoch") tc.selection = rca::TrainConfig::Selection::last_epoch;
    else if (!args.selection.empty()) throw std::runtime_error("unknown --selection " + args.selection);
    bool stratified = args.stratified || cfg.value("stratified_split", false);

    std::string run_dir = !args.run_dir.empty() ? args.run_dir
                                                : cfg.value("run_dir", std::string("runs/") + utc_now());
    rca::LoadResult lr = args.common.load();
    const rca::Dataset& ds = lr.dataset;
    rca::BackendConfig bc = args.common.backend_config();

    rca::RunWriter writer(run_dir);
    json manifest{{"run_id", fs::path(run_dir).filename().string()},
                  {"created_utc", utc_now()},
                  {"dataset",
                   json{{"table", fs::absolute(args.common.pick(args.common.table, "table", "")).string()},
                        {"schema",
                         fs::absolute(args.common.pick(args.common.schema, "schema", "")).string()},
                        {"fingerprint", rca::dataset_fingerprint(ds)},
                        {"variant", ds.variant},
                        {"rows", ds.size()},
                        {"positives", ds.positive_count()}}},
                  {"perturbation", read_perturbation_note(args.common.pick(args.common.table, "table", ""))},
                  {"config", tc.to_json()},
                  {"stratified_split", stratified},
                  {"backend", json{{"kind", bc.kind == rca::BackendKind::scripted_mock ? "mock" : "http"},
                                   {"model", bc.model_id}}},
                  {"artifacts", json::array({"config.json", "split.json", "distribution.json",
                                             "rules.jsonl", "calls.jsonl", "epochs.jsonl",
                                             "final_rulebase.json"})}};
    // The manifest lands before any backend traffic.
    writer.write_json("manifest.json", manifest);
    writer.write_json("ingest_report.json", lr.report.to_json());

    rca::DatasetSplit split = rca::split_dataset(ds, tc.seed, stratified);
    writer.write_json("split.json", json{{"seed", split.seed},
                                         {"train_ids", split.train_ids},
                                         {"val_ids", split.val_ids},
                                         {"test_ids", split.test_ids}});
    rca::DistributionSummary dist = rca::summarize(ds, split.train_ids);
    writer.write_json("distribution.json", rca::distribution_to_json(dist));

    rca::TemplateLibrary lib = args.common.templates();
    rca::Gateway gateway(rca::make_backend(bc), bc, writer.call_log());

    rca::TrainRun run = rca::train(ds, split, dist, tc, gateway, lib, &writer);

    std::cout << "run " << run_dir << ": " << run.epochs.size() << " epochs, final rule base v"
              << run.final_rulebase.version() << " (" << run.selection_rationale << ")\n";
    return 0;
}

// ---------------------------------------------------------------------------

struct PredictArgs {
    CommonArgs common;
    std::string run_dir;
    std::string split_name = "test";
    int parallelism = 1;
};

int cmd_predict(PredictArgs& args) {
    args.common.load_config();
    json manifest = load_json_file((fs::path(args.run_dir) / "manifest.json").string());
    json train_cfg = load_json_file((fs::path(args.run_dir) / "config.json").string());
    rca::TrainConfig tc = rca::TrainConfig::from_json(train_cfg);

    std::string table = !args.common.table.empty()
                            ? args.common.table
                            : manifest.at("dataset").at("table").get<std::string>();
    std::string schema = !args.common.schema.empty()
                             ? args.common.schema
                             : manifest.at("dataset").at("schema").get<std::string>();
    rca::LoadResult lr = rca::load_dataset_files(table, schema);
    const rca::Dataset& ds = lr.dataset;

    bool stratified = manifest.value("stratified_split", false);
    rca::DatasetSplit split = rca::split_dataset(ds, tc.seed, stratified);
    const std::vector<std::string>* ids = &split.test_ids;
    if (args.split_name == "val") ids = &split.val_ids;
    else if (args.split_name == "train") ids = &split.train_ids;
    else if (args.split_name != "test") throw std::runtime_error("unknown --split " + args.split_name);

    rca::DistributionSummary dist = rca::summarize(ds, split.train_ids);
    rca::RuleBase rb =
        rca::restore(load_json_file((fs::path(args.run_dir) / "final_rulebase.json").string()));

    rca::RunWriter writer(args.run_dir);
    rca::BackendConfig bc = args.common.backend_config();
    rca::Gateway gateway(rca::make_backend(bc), bc, writer.call_log());
    rca::TemplateLibrary lib = args.common.templates();

    rca::PredictOptions opts;
    opts.parallelism = args.parallelism;
    opts.parse_retry_limit = tc.parse_retry_limit;
    opts.use_distribution = tc.use_distribution;
    opts.temperature = tc.temperature;
    opts.max_tokens = tc.max_tokens;
    opts.llm_seed = tc.seed;

    std::vector<rca::Prediction> preds = rca::predict_split(*ids, ds, rb, dist, gateway, lib, opts);

    std::string pred_file = "predictions_" + args.split_name + ".jsonl";
    std::ofstream pred_out(writer.path(pred_file), std::ios::binary);
    std::vector<int> labels, truths;
    long parse_failures = 0;
    for (const auto& p : preds) {
        pred_out << json{{"id", p.id},
                         {"label", p.label},
                         {"explanation", p.explanation},
                         {"parse_failed", p.parse_failed}}
                        .dump()
                 << "\n";
        labels.push_back(p.label);
        truths.push_back(ds.record_by_id(p.id).label);
        if (p.parse_failed) ++parse_failures;
    }
    pred_out.close();

    rca::MetricsReport metrics = rca::compute_metrics(labels, truths, parse_failures);
    writer.write_json("metrics_" + args.split_name + ".json", metrics.to_json());
    writer.write_text("metrics_" + args.split_name + ".txt", metrics.to_table());
    std::cout << metrics.to_table();
    return 0;
}

// ---------------------------------------------------------------------------

struct PerturbArgs {
    CommonArgs common;
    std::string kind;
    std::string feature;
    double rate = 0.1;
    double magnitude = 10.0;
    std::uint64_t seed = 0;
    std::uint64_t split_seed = 0;
    bool split_seed_set = false;
    std::string scope = "all";
    std::string out_dir;
};

int cmd_perturb(PerturbArgs& args) {
    args.common.load_config();
    rca::LoadResult lr = args.common.load();
    const rca::Dataset& ds = lr.dataset;

    rca::PerturbationSpec spec;
    if (args.kind == "drop_feature") spec = rca::PerturbationSpec::drop(args.feature);
    else if (args.kind == "missing") spec = rca::PerturbationSpec::missing_cells(args.rate, args.seed);
    else if (args.kind == "abnormal")
        spec = rca::PerturbationSpec::abnormal_cells(args.rate, args.magnitude, args.seed);
    else throw std::runtime_error("unknown --kind " + args.kind);

    std::uint64_t split_seed = args.split_seed_set ? args.split_seed : args.seed;
    rca::DatasetSplit split = rca::split_dataset(ds, split_seed);

    const std::vector<std::string>* scope_ids = nullptr;
    if (args.scope == "train") scope_ids = &split.train_ids;
    else if (args.scope == "val") scope_ids = &split.val_ids;
    else if (args.scope == "test") scope_ids = &split.test_ids;
    else if (args.scope != "all") throw std::runtime_error("unknown --scope " + args.scope);

    std::optional<rca::DistributionSummary> dist;
    if (spec.kind == rca::PerturbationSpec::Kind::abnormal)
        dist = rca::summarize(ds, split.train_ids);  // clean training statistics

    rca::Dataset out = rca::apply_perturbation(ds, spec, dist ? &*dist : nullptr, scope_ids);

    fs::create_directories(args.out_dir);
    std::ofstream csv(fs::path(args.out_dir) / "data.csv", std::ios::binary);
    rca::write_dataset_csv(out, csv);
    csv.close();
    rca::write_file((fs::path(args.out_dir) / "schema.json").string(),
                    rca::schema_to_json(out).dump(2) + "\n");
    json note{{"kind", args.kind},
              {"feature", args.feature},
              {"rate", args.rate},
              {"magnitude", args.magnitude},
              {"seed", args.seed},
              {"split_seed", split_seed},
              {"scope", args.scope},
              {"describe", spec.describe()},
              {"source_fingerprint", rca::dataset_fingerprint(ds)},
              {"fingerprint", rca::dataset_fingerprint(out)}};
    rca::write_file((fs::path(args.out_dir) / "perturbation.json").string(), note.dump(2) + "\n");
    std::cout << note.dump(2) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------

struct JudgeArgs {
    CommonArgs common;
    std::string run_dir;
    std::string split_name = "test";
    int repeats = 3;
    int parallelism = 1;
    bool no_features_context = false;
};

int cmd_judge(JudgeArgs& args) {
    args.common.load_config();
    json manifest = load_json_file((fs::path(args.run_dir) / "manifest.json").string());
    std::string table = !args.common.table.empty()
                            ? args.common.table
                            : manifest.at("dataset").at("table").get<std::string>();
    std::string schema = !args.common.schema.empty()
                             ? args.common.schema
                             : manifest.at("dataset").at("schema").get<std::string>();
    rca::LoadResult lr = rca::load_dataset_files(table, schema);

    std::string pred_path =
        (fs::path(args.run_dir) / ("predictions_" + args.split_name + ".jsonl")).string();
    std::vector<rca::JudgeItem> items;
    std::size_t skipped_empty = 0;
    for (const std::string& line : rca::split_lines(rca::read_file(pred_path))) {
        if (rca::trim(line).empty()) continue;
        json doc = json::parse(line);
        rca::JudgeItem item;
        item.id = doc.at("id").get<std::string>();
        item.explanation = doc.at("explanation").get<std::string>();
        if (rca::trim(item.explanation).empty()) {
            ++skipped_empty;
            continue;
        }
        item.features_context = rca::render_narrative(lr.dataset.record_by_id(item.id), lr.dataset);
        items.push_back(std::move(item));
    }
    if (items.empty()) throw std::runtime_error("no scorable explanations in " + pred_path);

    rca::RunWriter writer(args.run_dir);
    rca::BackendConfig bc = args.common.backend_config();
    rca::Gateway gateway(rca::make_backend(bc), bc, writer.call_log());
    rca::TemplateLibrary lib = args.common.templates();

    rca::JudgeConfig jc;
    jc.model_id = bc.model_for(rca::LlmRole::judge);
    jc.repeats = args.repeats;
    jc.include_features = !args.no_features_context;
    jc.parallelism = args.parallelism;

    rca::CorpusJudgement corpus = rca::judge_corpus(items, jc, gateway, lib);

    std::ofstream scores(writer.path("judge_scores_" + args.split_name + ".jsonl"), std::ios::binary);
    for (const auto& item : corpus.items) {
        json line{{"id", item.id}, {"cl", item.cl}, {"la", item.la}, {"ebm", item.ebm}, {"cb", item.cb}};
        if (item.failed) {
            line["failed"] = true;
            line["error"] = item.error;
        }
        scores << line.dump() << "\n";
    }
    scores.close();

    json summary = corpus.summary_json();
    summary["split"] = args.split_name;
    summary["repeats"] = jc.repeats;
    summary["skipped_empty"] = skipped_empty;
    writer.write_json("judge_summary_" + args.split_name + ".json", summary);
    std::cout << summary.dump(2) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------

struct ReportArgs {
    std::vector<std::string> runs;
    std::string out_path;
    std::string split_name = "test";
};

int cmd_report(ReportArgs& args) {
    std::ostringstream csv;
    csv << "run_id,dataset,perturbation,accuracy,mcc,f1,cl,la,ebm,cb\n";
    auto fmt = [](const json& doc, const char* key) {
        if (!doc.contains(key)) return std::string();
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.4f", doc.at(key).get<double>());
        return std::string(buf);
    };
    for (const std::string& run : args.runs) {
        json manifest = load_json_file((fs::path(run) / "manifest.json").string());
        json metrics, judged;
        fs::path metrics_path = fs::path(run) / ("metrics_" + args.split_name + ".json");
        if (fs::exists(metrics_path)) metrics = load_json_file(metrics_path.string());
        fs::path judge_path = fs::path(run) / ("judge_summary_" + args.split_name + ".json");
        if (fs::exists(judge_path)) judged = load_json_file(judge_path.string());

        std::string perturbation = "none";
        if (manifest.contains("perturbation") && manifest["perturbation"].is_object() &&
            manifest["perturbation"].contains("describe"))
            perturbation = manifest["perturbation"]["describe"].get<std::string>();

        csv << manifest.value("run_id", run) << ','
            << manifest.at("dataset").value("variant", std::string()) << ',' << perturbation << ','
            << fmt(metrics, "accuracy") << ',' << fmt(metrics, "mcc") << ',' << fmt(metrics, "f1") << ','
            << fmt(judged, "mean_cl") << ',' << fmt(judged, "mean_la") << ',' << fmt(judged, "mean_ebm")
            << ',' << fmt(judged, "mean_cb") << '\n';
    }
    if (args.out_path.empty()) std::cout << csv.str();
    else rca::write_file(args.out_path, csv.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rule-learning disease prediction pipeline"};
    app.require_subcommand(1);

    IngestArgs ingest_args;
    auto* ingest = app.add_subcommand("ingest", "validate a dataset and emit the ingest report");
    add_common(ingest, ingest_args.common);
    ingest->add_option("--report", ingest_args.report_path, "write the report JSON here");

    TrainArgs train_args;
    auto* train = app.add_subcommand("train", "run the training loop and select the final rule base");
    add_common(train, train_args.common);
    train->add_option("--run-dir", train_args.run_dir, "run directory");
    train->add_option("--seed", train_args.seed, "master seed")->each([&](const std::string&) {
        train_args.seed_set = true;
    });
    train->add_option("--epochs", train_args.epochs, "training epochs");
    train->add_option("--batch-capacity", train_args.batch_capacity, "error batch capacity");
    train->add_option("--parallelism", train_args.parallelism, "validation fan-out");
    train->add_flag("--no-distribution", train_args.no_distribution, "ablation: drop the distribution block");
    train->add_flag("--no-reflection", train_args.no_reflection, "ablation: disable rule learning");
    train->add_flag("--no-check", train_args.no_check, "ablation: disable the per-epoch check");
    train->add_flag("--stratified", train_args.stratified, "stratify the split by label");
    train->add_option("--selection", train_args.selection, "final rule base: best_val_mcc | last_epoch")
        ->check(CLI::IsMember({"best_val_mcc", "last_epoch"}));

    PredictArgs predict_args;
    auto* predict = app.add_subcommand("predict", "predict a split with a run's final rule base");
    add_common(predict, predict_args.common);
    predict->add_option("--run", predict_args.run_dir, "run directory")->required();
    predict->add_option("--split", predict_args.split_name, "train | val | test");
    predict->add_option("--parallelism", predict_args.parallelism, "prediction fan-out");

    PerturbArgs perturb_args;
    auto* perturb = app.add_subcommand("perturb", "write a degraded copy of a dataset");
    add_common(perturb, perturb_args.common);
    perturb->add_option("--kind", perturb_args.kind, "drop_feature | missing | abnormal")->required();
    perturb->add_option("--feature", perturb_args.feature, "feature to drop");
    perturb->add_option("--rate", perturb_args.rate, "cell fraction");
    perturb->add_option("--magnitude", perturb_args.magnitude, "abnormal: std multiples");
    perturb->add_option("--seed", perturb_args.seed, "perturbation seed");
    perturb->add_option("--split-seed", perturb_args.split_seed, "seed for the clean-train statistics split")
        ->each([&](const std::string&) { perturb_args.split_seed_set = true; });
    perturb->add_option("--scope", perturb_args.scope, "all | train | val | test");
    perturb->add_option("--out", perturb_args.out_dir, "output directory")->required();

    JudgeArgs judge_args;
    auto* judge = app.add_subcommand("judge", "score explanations with the rubric judge");
    add_common(judge, judge_args.common);
    judge->add_option("--run", judge_args.run_dir, "run directory")->required();
    judge->add_option("--split", judge_args.split_name, "which predictions file");
    judge->add_option("--repeats", judge_args.repeats, "scorings per explanation");
    judge->add_option("--parallelism", judge_args.parallelism, "judge fan-out");
    judge->add_flag("--no-features-context", judge_args.no_features_context,
                    "omit the patient narrative from judge prompts");

    ReportArgs report_args;
    auto* report = app.add_subcommand("report", "merge runs into one CSV row each");
    report->add_option("--runs", report_args.runs, "run directories")->required()->expected(-1);
    report->add_option("--out", report_args.out_path, "CSV path (default stdout)");
    report->add_option("--split", report_args.split_name, "which metrics/judge files");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*ingest) return cmd_ingest(ingest_args);
        if (*train) return cmd_train(train_args);
        if (*predict) return cmd_predict(predict_args);
        if (*perturb) return cmd_perturb(perturb_args);
        if (*judge) return cmd_judge(judge_args);
        if (*report) return cmd_report(report_args);
    } catch (const std::exception& e) {
        std::cerr << json{{"error", e.what()}}.dump() << "\n";
        return 1;
    }
    return 0;
}
