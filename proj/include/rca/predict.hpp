#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rca/dataset.hpp"
#include "rca/distribution.hpp"
#include "rca/gateway.hpp"
#include "rca/prompts.hpp"
#include "rca/rules.hpp"

namespace rca {

struct Prediction {
    std::string id;
    int label = 0;
    std::string explanation;
    bool parse_failed = false;
};

/// Extract (label, explanation) from prediction-LLM output. The negative
/// label text is searched before the positive one because the positive
/// string is a substring of the negative in every shipped lexicon.
/// Returns nullopt when neither label text occurs.
std::optional<std::pair<int, std::string>> parse_prediction(const std::string& llm_output,
                                                            const LabelLexicon& lexicon);

struct PredictOptions {
    int parallelism = 1;
    int parse_retry_limit = 3;
    bool use_distribution = true;
    double temperature = 0.0;
    int max_tokens = 1024;
    std::optional<std::uint64_t> llm_seed;
};

/// Predict one record with a frozen rule base. Retries the completion on
/// parse failure up to parse_retry_limit, then falls back to the negative
/// class with the sample flagged.
Prediction predict_record(const PatientRecord& rec, const Dataset& ds, const std::string& rules_text,
                          const std::string& distribution_text, Gateway& gateway,
                          const TemplateLibrary& lib, const PredictOptions& opts);

/// Predict every id (order-aligned) with bounded fan-out.
std::vector<Prediction> predict_split(const std::vector<std::string>& ids, const Dataset& ds,
                                      const RuleBase& rb, const DistributionSummary& dist,
                                      Gateway& gateway, const TemplateLibrary& lib,
                                      const PredictOptions& opts);

}  // namespace rca
