#include "rca/trainer.hpp"

#include <iostream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "rca/rng.hpp"

namespace rca {

using nlohmann::json;

json TrainConfig::to_json() const {
    return json{{"epochs", epochs},
                {"batch_capacity", batch_capacity},
                {"seed", seed},
                {"use_distribution", use_distribution},
                {"use_reflection", use_reflection},
                {"use_check", use_check},
                {"shuffle_per_epoch", shuffle_per_epoch},
                {"parse_retry_limit", parse_retry_limit},
                {"selection", selection == Selection::best_val_mcc ? "best_val_mcc" : "last_epoch"},
                {"temperature", temperature},
                {"max_tokens", max_tokens},
                {"val_parallelism", val_parallelism}};
}

TrainConfig TrainConfig::from_json(const json& doc) {
    TrainConfig cfg;
    cfg.epochs = doc.value("epochs", cfg.epochs);
    cfg.batch_capacity = doc.value("batch_capacity", cfg.batch_capacity);
    cfg.seed = doc.value("seed", cfg.seed);
    cfg.use_distribution = doc.value("use_distribution", cfg.use_distribution);
    cfg.use_reflection = doc.value("use_reflection", cfg.use_reflection);
    cfg.use_check = doc.value("use_check", cfg.use_check);
    cfg.shuffle_per_epoch = doc.value("shuffle_per_epoch", cfg.shuffle_per_epoch);
    cfg.parse_retry_limit = doc.value("parse_retry_limit", cfg.parse_retry_limit);
    std::string selection = doc.value("selection", std::string("best_val_mcc"));
    if (selection == "best_val_mcc") cfg.selection = Selection::best_val_mcc;
    else if (selection == "last_epoch") cfg.selection = Selection::last_epoch;
    else throw std::runtime_error("unknown selection strategy: " + selection);
    cfg.temperature = doc.value("temperature", cfg.temperature);
    cfg.max_tokens = doc.value("max_tokens", cfg.max_tokens);
    cfg.val_parallelism = doc.value("val_parallelism", cfg.val_parallelism);
    return cfg;
}

json EpochReport::to_json() const {
    return json{{"epoch", epoch},
                {"train_errors", train_errors},
                {"reflections", reflections},
                {"check_invoked", check_invoked},
                {"rulebase_version", rulebase_version},
                {"parse_failures", parse_failures},
                {"val_metrics", val_metrics.to_json()}};
}

RuleBase reflect_step(const RuleBase& rb, const std::string& error_batch_text,
                      const std::string& distribution_text, Gateway& gateway, const TemplateLibrary& lib,
                      const StepOptions& opts) {
    if (error_batch_text.empty()) throw std::runtime_error("reflect_step: empty error batch");
    const std::string prompt = build_reflection_prompt(lib, opts.variant, error_batch_text,
                                                       render_rules(rb), distribution_text,
                                                       opts.use_distribution);
    for (int attempt = 0; attempt < 2; ++attempt) {
        CompletionResult result =
            gateway.complete_role(LlmRole::reflect, prompt, opts.temperature, opts.max_tokens, opts.llm_seed);
        try {
            return replace_rules(rb, parse_rules(result.text), UpdateCause::reflect, opts.epoch,
                                 opts.batch_index);
        } catch (const EmptyReflectionError&) {
            // retry once, then keep the prior rule base
        }
    }
    std::cerr << "[rca] warning: reflection returned no rules twice (epoch " << opts.epoch << ", batch "
              << opts.batch_index << "); keeping rule base v" << rb.version() << "\n";
    return rb;
}

RuleBase check_step(const RuleBase& rb, const std::string& distribution_text, Gateway& gateway,
                    const TemplateLibrary& lib, const StepOptions& opts) {
    const std::string prompt = build_check_prompt(lib, opts.variant, render_rules(rb), distribution_text,
                                                  opts.use_distribution);
    CompletionResult result =
        gateway.complete_role(LlmRole::check, prompt, opts.temperature, opts.max_tokens, opts.llm_seed);
    std::vector<std::string> texts;
    try {
        texts = parse_rules(result.text);
    } catch (const EmptyReflectionError&) {
        // The check may legitimately delete every rule.
    }
    return replace_rules(rb, texts, UpdateCause::check, opts.epoch, -1);
}

std::size_t select_best_epoch(const TrainRun& run) {
    if (run.snapshots.empty()) throw std::runtime_error("select_final_rulebase: no snapshots");
    std::size_t best = 0;
    for (std::size_t i = 1; i < run.epochs.size(); ++i) {
        const MetricsReport& candidate = run.epochs[i].val_metrics;
        const MetricsReport& incumbent = run.epochs[best].val_metrics;
        if (candidate.mcc > incumbent.mcc ||
            (candidate.mcc == incumbent.mcc && candidate.accuracy > incumbent.accuracy) ||
            (candidate.mcc == incumbent.mcc && candidate.accuracy == incumbent.accuracy)) {
            best = i;  // exact ties go to the later epoch
        }
    }
    return best;
}

const RuleBase& select_final_rulebase(const TrainRun& run) {
    return run.snapshots.at(select_best_epoch(run));
}

TrainRun train(const Dataset& ds, const DatasetSplit& splits, const DistributionSummary& dist,
               const TrainConfig& cfg, Gateway& gateway, const TemplateLibrary& lib, RunWriter* writer) {
    if (cfg.epochs < 1) throw std::runtime_error("train: epochs must be >= 1");
    if (cfg.batch_capacity < 1) throw std::runtime_error("train: batch capacity must be >= 1");

    TrainRun run;
    run.config = cfg;

    // With reflection ablated no rules ever exist, so the per-epoch check
    // has nothing to review and is not invoked.
    const bool check_enabled = cfg.use_check && cfg.use_reflection;

    const std::string distribution_text = render_distribution(dist);

    PredictOptions predict_opts;
    predict_opts.parse_retry_limit = cfg.parse_retry_limit;
    predict_opts.use_distribution = cfg.use_distribution;
    predict_opts.temperature = cfg.temperature;
    predict_opts.max_tokens = cfg.max_tokens;
    predict_opts.llm_seed = cfg.seed;

    RuleBase rb;
    if (writer) {
        writer->write_json("config.json", cfg.to_json());
        append_snapshot(writer->path("rules.jsonl"), rb);
    }

    std::vector<int> val_truths;
    val_truths.reserve(splits.val_ids.size());
    for (const auto& id : splits.val_ids) val_truths.push_back(ds.record_by_id(id).label);

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::vector<std::string> order = splits.train_ids;
        if (cfg.shuffle_per_epoch) {
            SplitMix64 rng(derive_seed(cfg.seed, "epoch-shuffle", static_cast<std::uint64_t>(epoch)));
            fisher_yates(order, rng);
        }

        EpochReport report;
        report.epoch = epoch;

        StepOptions step;
        step.variant = ds.variant;
        step.use_distribution = cfg.use_distribution;
        step.epoch = epoch;
        step.temperature = cfg.temperature;
        step.max_tokens = cfg.max_tokens;
        step.llm_seed = cfg.seed;

        std::vector<std::string> buffer;
        int batch_index = 0;

        auto flush_reflection = [&] {
            step.batch_index = batch_index;
            RuleBase next = reflect_step(rb, concat_error_batch(buffer), distribution_text, gateway, lib,
                                         step);
            ++report.reflections;
            ++batch_index;
            buffer.clear();
            if (next.version() != rb.version()) {
                rb = std::move(next);
                if (writer) append_snapshot(writer->path("rules.jsonl"), rb);
            }
        };

        for (const std::string& id : order) {
            const PatientRecord& rec = ds.record_by_id(id);
            // Online: each prediction sees the rule base as of this moment.
            Prediction pred =
                predict_record(rec, ds, render_rules(rb), distribution_text, gateway, lib, predict_opts);
            if (pred.parse_failed) ++report.parse_failures;
            bool wrong = pred.parse_failed || pred.label != rec.label;
            if (!wrong) continue;
            ++report.train_errors;
            if (!cfg.use_reflection) continue;
            buffer.push_back(render_error_sample(rec, ds));
            if (static_cast<int>(buffer.size()) == cfg.batch_capacity) flush_reflection();
        }
        if (cfg.use_reflection && !buffer.empty()) flush_reflection();

        if (check_enabled) {
            step.batch_index = -1;
            rb = check_step(rb, distribution_text, gateway, lib, step);
            report.check_invoked = true;
            if (writer) append_snapshot(writer->path("rules.jsonl"), rb);
        }

        // Validation with the epoch's frozen rule base. These predictions
        // never feed the error buffer.
        PredictOptions val_opts = predict_opts;
        val_opts.parallelism = cfg.val_parallelism;
        std::vector<Prediction> val_preds =
            predict_split(splits.val_ids, ds, rb, dist, gateway, lib, val_opts);
        std::vector<int> labels;
        labels.reserve(val_preds.size());
        long val_parse_failures = 0;
        for (const auto& p : val_preds) {
            labels.push_back(p.label);
            if (p.parse_failed) ++val_parse_failures;
        }
        report.val_metrics = compute_metrics(labels, val_truths, val_parse_failures);
        report.rulebase_version = rb.version();

        run.snapshots.push_back(rb);
        run.epochs.push_back(report);
        if (writer) writer->append_jsonl("epochs.jsonl", report.to_json());
    }

    std::size_t chosen;
    if (cfg.selection == TrainConfig::Selection::last_epoch) {
        chosen = run.snapshots.size() - 1;
        run.selection_rationale = "last_epoch: epoch " + std::to_string(run.epochs[chosen].epoch);
    } else {
        chosen = select_best_epoch(run);
        char buf[160];
        std::snprintf(buf, sizeof(buf), "best_val_mcc: epoch %d (mcc=%.4f, accuracy=%.4f)",
                      run.epochs[chosen].epoch, run.epochs[chosen].val_metrics.mcc,
                      run.epochs[chosen].val_metrics.accuracy);
        run.selection_rationale = buf;
    }
    run.final_rulebase = run.snapshots[chosen];

    if (writer) {
        json final_doc = snapshot(run.final_rulebase);
        final_doc["selection_rationale"] = run.selection_rationale;
        final_doc["selected_epoch"] = run.epochs[chosen].epoch;
        writer->write_json("final_rulebase.json", final_doc);
    }
    return run;
}

}  // namespace rca
