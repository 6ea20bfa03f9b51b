#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace rca {

struct ConfusionMatrix {
    long tp = 0;
    long fp = 0;
    long tn = 0;
    long fn = 0;

    long total() const { return tp + fp + tn + fn; }
};

struct MetricsReport {
    double accuracy = 0.0;
    double mcc = 0.0;
    double f1 = 0.0;
    long parse_failures = 0;
    long n = 0;

    nlohmann::json to_json() const;
    std::string to_table() const;  // aligned plain-text table
};

/// Positive class is label 1. Throws on length mismatch or empty input.
ConfusionMatrix confusion(const std::vector<int>& preds, const std::vector<int>& truths);

double accuracy(const ConfusionMatrix& cm);

/// (tp*tn - fp*fn) / sqrt((tp+fp)(tp+fn)(tn+fp)(tn+fn)); any zero factor -> 0.
double mcc(const ConfusionMatrix& cm);

/// 2tp / (2tp + fp + fn); zero denominator -> 0.
double f1(const ConfusionMatrix& cm);

MetricsReport compute_metrics(const std::vector<int>& preds, const std::vector<int>& truths,
                              long parse_failures = 0);

}  // namespace rca
