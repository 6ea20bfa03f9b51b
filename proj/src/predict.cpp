#include "rca/predict.hpp"

#include <atomic>
#include <thread>

#include "rca/text.hpp"

namespace rca {

std::optional<std::pair<int, std::string>> parse_prediction(const std::string& llm_output,
                                                            const LabelLexicon& lexicon) {
    std::size_t pos = ifind(llm_output, lexicon.negative_text);
    int label;
    std::size_t label_end;
    if (pos != std::string::npos) {
        label = 0;
        label_end = pos + lexicon.negative_text.size();
    } else {
        pos = ifind(llm_output, lexicon.positive_text);
        if (pos == std::string::npos) return std::nullopt;
        label = 1;
        label_end = pos + lexicon.positive_text.size();
    }

    std::string explanation;
    std::size_t marker = ifind(llm_output, "explanation");
    if (marker != std::string::npos) {
        std::size_t start = marker + std::string("explanation").size();
        while (start < llm_output.size() &&
               (llm_output[start] == ':' || std::isspace(static_cast<unsigned char>(llm_output[start]))))
            ++start;
        explanation = trim(llm_output.substr(start));
    } else {
        explanation = trim(llm_output.substr(label_end));
    }
    return std::make_pair(label, explanation);
}

Prediction predict_record(const PatientRecord& rec, const Dataset& ds, const std::string& rules_text,
                          const std::string& distribution_text, Gateway& gateway,
                          const TemplateLibrary& lib, const PredictOptions& opts) {
    std::string prompt = build_prediction_prompt(lib, ds.variant, render_narrative(rec, ds), rules_text,
                                                 distribution_text, opts.use_distribution);
    Prediction prediction;
    prediction.id = rec.id;
    for (int attempt = 0; attempt < opts.parse_retry_limit; ++attempt) {
        CompletionResult result =
            gateway.complete_role(LlmRole::predict, prompt, opts.temperature, opts.max_tokens, opts.llm_seed);
        auto parsed = parse_prediction(result.text, ds.lexicon);
        if (parsed) {
            prediction.label = parsed->first;
            prediction.explanation = parsed->second;
            return prediction;
        }
    }
    // Unparseable after all retries: count as the negative class, flagged.
    prediction.label = 0;
    prediction.parse_failed = true;
    return prediction;
}

std::vector<Prediction> predict_split(const std::vector<std::string>& ids, const Dataset& ds,
                                      const RuleBase& rb, const DistributionSummary& dist,
                                      Gateway& gateway, const TemplateLibrary& lib,
                                      const PredictOptions& opts) {
    std::vector<Prediction> predictions(ids.size());
    if (ids.empty()) return predictions;

    const std::string rules_text = render_rules(rb);
    const std::string distribution_text = opts.use_distribution ? render_distribution(dist) : std::string();

    int workers = opts.parallelism < 1 ? 1 : opts.parallelism;
    if (workers == 1) {
        for (std::size_t i = 0; i < ids.size(); ++i)
            predictions[i] =
                predict_record(ds.record_by_id(ids[i]), ds, rules_text, distribution_text, gateway, lib, opts);
        return predictions;
    }

    std::atomic<std::size_t> cursor{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (;;) {
                    std::size_t i = cursor.fetch_add(1);
                    if (i >= ids.size()) return;
                    predictions[i] = predict_record(ds.record_by_id(ids[i]), ds, rules_text,
                                                    distribution_text, gateway, lib, opts);
                }
            } catch (...) {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& err : errors)
        if (err) std::rethrow_exception(err);
    return predictions;
}

}  // namespace rca
