#include "rca/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace rca {

using nlohmann::json;

ConfusionMatrix confusion(const std::vector<int>& preds, const std::vector<int>& truths) {
    if (preds.size() != truths.size())
        throw std::runtime_error("confusion: prediction/truth length mismatch");
    if (preds.empty()) throw std::runtime_error("confusion: empty input");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (preds[i] == 1 && truths[i] == 1) ++cm.tp;
        else if (preds[i] == 1 && truths[i] == 0) ++cm.fp;
        else if (preds[i] == 0 && truths[i] == 0) ++cm.tn;
        else ++cm.fn;
    }
    return cm;
}

double accuracy(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw std::runtime_error("accuracy: empty confusion matrix");
    return static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
}

double mcc(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw std::runtime_error("mcc: empty confusion matrix");
    double a = static_cast<double>(cm.tp + cm.fp);
    double b = static_cast<double>(cm.tp + cm.fn);
    double c = static_cast<double>(cm.tn + cm.fp);
    double d = static_cast<double>(cm.tn + cm.fn);
    if (a == 0.0 || b == 0.0 || c == 0.0 || d == 0.0) return 0.0;
    double numerator = static_cast<double>(cm.tp) * static_cast<double>(cm.tn) -
                       static_cast<double>(cm.fp) * static_cast<double>(cm.fn);
    return numerator / std::sqrt(a * b * c * d);
}

double f1(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw std::runtime_error("f1: empty confusion matrix");
    double denominator = static_cast<double>(2 * cm.tp + cm.fp + cm.fn);
    if (denominator == 0.0) return 0.0;
    return 2.0 * static_cast<double>(cm.tp) / denominator;
}

MetricsReport compute_metrics(const std::vector<int>& preds, const std::vector<int>& truths,
                              long parse_failures) {
    ConfusionMatrix cm = confusion(preds, truths);
    MetricsReport report;
    report.accuracy = accuracy(cm);
    report.mcc = mcc(cm);
    report.f1 = f1(cm);
    report.parse_failures = parse_failures;
    report.n = cm.total();
    return report;
}

json MetricsReport::to_json() const {
    return json{{"accuracy", accuracy}, {"mcc", mcc},           {"f1", f1},
                {"parse_failures", parse_failures}, {"n", n}};
}

std::string MetricsReport::to_table() const {
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "metric          value\n"
                  "--------------  ------\n"
                  "accuracy        %.4f\n"
                  "mcc             %.4f\n"
                  "f1              %.4f\n"
                  "parse_failures  %ld\n"
                  "n               %ld\n",
                  accuracy, mcc, f1, parse_failures, n);
    return buf;
}

}  // namespace rca
