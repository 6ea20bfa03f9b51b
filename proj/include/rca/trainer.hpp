#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "rca/artifacts.hpp"
#include "rca/dataset.hpp"
#include "rca/distribution.hpp"
#include "rca/gateway.hpp"
#include "rca/metrics.hpp"
#include "rca/predict.hpp"
#include "rca/prompts.hpp"
#include "rca/rules.hpp"
#include "rca/split.hpp"

namespace rca {

struct TrainConfig {
    int epochs = 15;
    int batch_capacity = 25;  // error batch capacity
    std::uint64_t seed = 0;
    bool use_distribution = true;
    bool use_reflection = true;
    bool use_check = true;
    bool shuffle_per_epoch = true;
    int parse_retry_limit = 3;
    enum class Selection { best_val_mcc, last_epoch };
    Selection selection = Selection::best_val_mcc;
    double temperature = 0.0;
    int max_tokens = 1024;
    int val_parallelism = 1;

    nlohmann::json to_json() const;
    static TrainConfig from_json(const nlohmann::json& doc);
};

struct EpochReport {
    int epoch = 0;  // 1-based
    int train_errors = 0;
    int reflections = 0;  // invocations, ceil(errors / capacity) when enabled
    bool check_invoked = false;
    int rulebase_version = 0;  // after the epoch
    int parse_failures = 0;    // train-phase
    MetricsReport val_metrics;

    nlohmann::json to_json() const;
};

struct TrainRun {
    TrainConfig config;
    std::vector<EpochReport> epochs;
    std::vector<RuleBase> snapshots;  // one per epoch
    RuleBase final_rulebase;
    std::string selection_rationale;
};

struct StepOptions {
    std::string variant;
    bool use_distribution = true;
    int epoch = 0;
    int batch_index = 0;  // -1 for check
    double temperature = 0.0;
    int max_tokens = 1024;
    std::optional<std::uint64_t> llm_seed;
};

/// Reflection over one error batch: full rule replacement. An empty LLM
/// output is retried once; if it stays empty the prior rule base is kept
/// and a warning goes to stderr.
RuleBase reflect_step(const RuleBase& rb, const std::string& error_batch_text,
                      const std::string& distribution_text, Gateway& gateway, const TemplateLibrary& lib,
                      const StepOptions& opts);

/// Per-epoch rule review; the check LLM may delete everything (empty output
/// replaces the rule base with zero rules).
RuleBase check_step(const RuleBase& rb, const std::string& distribution_text, Gateway& gateway,
                    const TemplateLibrary& lib, const StepOptions& opts);

/// Pick the per-epoch snapshot with the best validation MCC; ties broken by
/// accuracy, then the latest epoch.
std::size_t select_best_epoch(const TrainRun& run);
const RuleBase& select_final_rulebase(const TrainRun& run);

/// The full training loop: predict the train split in seeded shuffled order
/// with the live rule base, batch wrong samples to capacity, reflect, run
/// the per-epoch check, evaluate on the validation split, snapshot, and
/// select the final rule base. Strictly sequential except validation
/// fan-out. When `writer` is given, artifacts stream to the run directory
/// as they are produced, so an aborted run keeps its partial snapshots.
TrainRun train(const Dataset& ds, const DatasetSplit& splits, const DistributionSummary& dist,
               const TrainConfig& cfg, Gateway& gateway, const TemplateLibrary& lib,
               RunWriter* writer = nullptr);

}  // namespace rca
