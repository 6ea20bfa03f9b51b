#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "rca/gateway.hpp"
#include "rca/prompts.hpp"

namespace rca {

/// Four-criterion explanation scores, each an integer in [1,10]:
/// cognitive load, logical argumentation, evidence-based medicine,
/// cognitive biasing.
struct RubricScores {
    int cl = 0;
    int la = 0;
    int ebm = 0;
    int cb = 0;

    bool operator==(const RubricScores&) const = default;
};

struct JudgeConfig {
    std::string model_id;  // informational; the gateway resolves per role
    int repeats = 3;       // scorings per explanation, aggregated by mean
    bool include_features = true;
    int parallelism = 1;
    double temperature = 0.0;
    int max_tokens = 256;
};

/// "CL: 9\nLA: 10\nEBM: 10\nCB: 9"
std::string format_scores(const RubricScores& s);

/// Extract the four labeled integers (any order). Missing criteria and
/// out-of-range values are errors, never clamped.
RubricScores parse_scores(const std::string& judge_output);

struct JudgeItem {
    std::string id;
    std::string explanation;
    std::optional<std::string> features_context;
};

struct ItemJudgement {
    std::string id;
    double cl = 0.0, la = 0.0, ebm = 0.0, cb = 0.0;  // mean over repeats
    bool failed = false;
    std::string error;
};

struct CorpusJudgement {
    std::vector<ItemJudgement> items;
    double mean_cl = 0.0, mean_la = 0.0, mean_ebm = 0.0, mean_cb = 0.0;  // 2 d.p.
    std::size_t judged = 0;

    nlohmann::json summary_json() const;
};

/// Score every explanation `repeats` times and aggregate by mean; corpus
/// means are rounded to two decimals. Backend/parse failures are recorded
/// per item and excluded from corpus means. These scores automate a human
/// scoring protocol and are labeled accordingly in the summary.
CorpusJudgement judge_corpus(const std::vector<JudgeItem>& items, const JudgeConfig& cfg,
                             Gateway& gateway, const TemplateLibrary& lib);

}  // namespace rca
