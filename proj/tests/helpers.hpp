#pragma once

// Shared fixtures and independent oracles for the test suites. Oracles here
// must stay independent of the library code paths they check.

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rca/dataset.hpp"
#include "rca/gateway.hpp"
#include "rca/split.hpp"
#include "rca/synthetic.hpp"
#include "rca/text.hpp"

namespace rca::test {

inline const char* kMiniSchema = R"({
  "variant": "crt",
  "label_column": "CRT",
  "label_tokens": {"positive": ["1"], "negative": ["0"]},
  "label_lexicon": {
    "positive_text": "catheter-related thrombosis",
    "negative_text": "no catheter-related thrombosis",
    "disease_name": "CRT"
  },
  "features": [
    {"name": "Granulocyte-to-lymphocyte ratio", "kind": "numerical",
     "narrative_template": "Granulocyte-to-lymphocyte ratio is {value}"},
    {"name": "D-dimer", "kind": "numerical", "narrative_template": "D-dimer is {value}",
     "missing_phrasing": "D-dimer is unknown"},
    {"name": "chemotherapy", "kind": "categorical",
     "boolean_phrasing": {"present": "chemotherapy", "absent": "no chemotherapy"}},
    {"name": "catheterization", "kind": "categorical",
     "narrative_template": "catheterization is {value}"}
  ]
})";

inline const char* kMiniCsv =
    "Granulocyte-to-lymphocyte ratio,D-dimer,chemotherapy,catheterization,CRT\n"
    "4.88,3.16,0,CVC,1\n"
    "1.44,0.19,1,CVC,0\n"
    "2.73,0.1,1,PICC,1\n"
    "3.88,0.84,1,PICC,0\n";

inline LoadResult mini_dataset() {
    std::istringstream table(kMiniCsv);
    std::istringstream schema(kMiniSchema);
    return load_dataset(table, schema);
}

inline LoadResult load_synthetic_shape(const std::string& shape, std::size_t rows = 0,
                                       std::uint64_t seed = 7) {
    SyntheticDataset fixture = make_synthetic(SyntheticSpec{shape, rows, seed});
    std::istringstream table(fixture.csv);
    std::istringstream schema(fixture.schema.dump());
    return load_dataset(table, schema);
}

inline nlohmann::json golden_bindings() {
    return nlohmann::json::parse(read_file(std::string(RCA_GOLDEN_DIR) + "/bindings.json"));
}

// Independent type-7 quantile: sort a fresh copy, h = (n-1)p, interpolate.
inline double oracle_quantile(std::vector<double> values, double p) {
    std::sort(values.begin(), values.end());
    const double h = p * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(h);
    const double w = h - static_cast<double>(lo);
    if (lo + 1 == values.size()) return values[lo];
    return (1.0 - w) * values[lo] + w * values[lo + 1];
}

inline BackendConfig mock_config(int max_attempts = 3, int concurrency = 4) {
    BackendConfig cfg;
    cfg.kind = BackendKind::scripted_mock;
    cfg.retry.max_attempts = max_attempts;
    cfg.retry.backoff_base_ms = 0;
    cfg.retry.jitter = false;
    cfg.concurrency_limit = concurrency;
    return cfg;
}

inline Gateway make_mock_gateway(std::vector<MockScriptEntry> entries, BackendConfig cfg = mock_config(),
                                 std::shared_ptr<CallLog> log = nullptr) {
    return Gateway(std::make_unique<ScriptedMockBackend>(std::move(entries)), std::move(cfg),
                   std::move(log));
}

/// Builds the mock script for a whole training run by walking the documented
/// call order (shuffle off): per epoch, one predict per train id in split
/// order, a reflect after every `capacity` errors plus a residual flush,
/// one check when enabled, then one predict per validation id.
class TrainScript {
public:
    TrainScript(const Dataset& ds, const DatasetSplit& split) : ds_(ds), split_(split) {}

    /// error_plan[e] = number of leading train samples answered wrongly in
    /// epoch e (the rest answer correctly).
    std::vector<MockScriptEntry> generate(const std::vector<int>& error_plan, int capacity,
                                          bool with_check, bool with_reflection = true) {
        std::vector<MockScriptEntry> entries;
        const std::string right_pos = prediction_text(1);
        const std::string right_neg = prediction_text(0);
        for (std::size_t epoch = 0; epoch < error_plan.size(); ++epoch) {
            int wrong_left = error_plan[epoch];
            int errors = 0;
            for (const std::string& id : split_.train_ids) {
                int truth = ds_.record_by_id(id).label;
                bool wrong = wrong_left > 0;
                if (wrong) --wrong_left;
                int answered = wrong ? 1 - truth : truth;
                entries.push_back(predict_entry(answered == 1 ? right_pos : right_neg));
                if (wrong && with_reflection) {
                    ++errors;
                    if (errors % capacity == 0) entries.push_back(reflect_entry());
                }
            }
            if (with_reflection && errors % capacity != 0) entries.push_back(reflect_entry());
            if (with_check && with_reflection) entries.push_back(check_entry());
            for (const std::string& id : split_.val_ids) {
                int truth = ds_.record_by_id(id).label;
                entries.push_back(predict_entry(truth == 1 ? right_pos : right_neg));
            }
        }
        return entries;
    }

    std::string prediction_text(int label) const {
        const std::string& text = label == 1 ? ds_.lexicon.positive_text : ds_.lexicon.negative_text;
        return ds_.lexicon.disease_name + " Prediction: " + text + "\n\nExplanation: scripted.";
    }

    MockScriptEntry predict_entry(const std::string& response) {
        MockScriptEntry e;
        e.role = "predict";
        e.ordinal = predict_ordinal_++;
        e.response = response;
        return e;
    }

    MockScriptEntry reflect_entry() {
        MockScriptEntry e;
        e.role = "reflect";
        e.ordinal = reflect_ordinal_++;
        e.response = "Rules:\n1. Elevated D-dimer raises the predicted risk.\n2. Central venous catheters "
                     "carry more risk than peripheral lines.";
        return e;
    }

    MockScriptEntry check_entry() {
        MockScriptEntry e;
        e.role = "check";
        e.ordinal = check_ordinal_++;
        e.response = "1. Elevated D-dimer raises the predicted risk.";
        return e;
    }

private:
    const Dataset& ds_;
    const DatasetSplit& split_;
    long predict_ordinal_ = 0;
    long reflect_ordinal_ = 0;
    long check_ordinal_ = 0;
};

inline void write_script(const std::string& path, const std::vector<MockScriptEntry>& entries) {
    std::ostringstream out;
    for (const auto& e : entries) {
        nlohmann::json line{{"role", e.role}, {"ordinal", e.ordinal}};
        if (e.require_substring) line["require_substring"] = *e.require_substring;
        if (e.fail) line["fail"] = e.fail_message;
        else line["response"] = *e.response;
        if (e.delay_ms) line["delay_ms"] = e.delay_ms;
        out << line.dump() << "\n";
    }
    write_file(path, out.str());
}

}  // namespace rca::test
