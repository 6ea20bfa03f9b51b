#include "rca/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "rca/text.hpp"

namespace rca {

using nlohmann::json;

namespace {

// Type-7 quantile: h = (n-1)p, linear interpolation between order statistics.
double quantile_type7(const std::vector<double>& sorted, double p) {
    std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    double h = static_cast<double>(n - 1) * p;
    std::size_t lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= n) return sorted[n - 1];
    double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

NumericSummary summarize_numeric(std::vector<double> values, std::size_t missing) {
    NumericSummary s;
    s.missing = missing;
    s.count = values.size();
    if (values.empty()) return s;

    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(sq / static_cast<double>(values.size()));
    s.min = values.front();
    s.max = values.back();
    s.q25 = quantile_type7(values, 0.25);
    s.median = quantile_type7(values, 0.5);
    s.q75 = quantile_type7(values, 0.75);
    return s;
}

}  // namespace

const FeatureSummary& DistributionSummary::by_name(const std::string& name) const {
    for (const auto& f : features)
        if (f.name == name) return f;
    throw std::runtime_error("no summary for feature: " + name);
}

DistributionSummary summarize(const Dataset& ds, const std::vector<std::string>& train_ids) {
    if (train_ids.empty()) throw std::runtime_error("summarize: empty train id list");

    std::unordered_set<std::string> wanted(train_ids.begin(), train_ids.end());
    std::vector<const PatientRecord*> rows;
    rows.reserve(train_ids.size());
    for (const auto& rec : ds.records)
        if (wanted.count(rec.id)) rows.push_back(&rec);
    if (rows.size() != train_ids.size())
        throw std::runtime_error("summarize: train ids not all present in dataset");

    DistributionSummary out;
    out.train_size = rows.size();
    for (std::size_t i = 0; i < ds.schema.size(); ++i) {
        const FeatureSchema& fs = ds.schema[i];
        FeatureSummary summary;
        summary.name = fs.name;
        if (fs.kind == FeatureKind::numerical) {
            std::vector<double> values;
            std::size_t missing = 0;
            for (const auto* rec : rows) {
                const CellValue& cell = rec->values[i];
                if (cell.missing()) ++missing;
                else values.push_back(cell.number);
            }
            summary.stats = summarize_numeric(std::move(values), missing);
        } else {
            CategoricalSummary cs;
            for (const auto* rec : rows) {
                const CellValue& cell = rec->values[i];
                if (cell.missing()) ++cs.missing;
                else ++cs.counts[cell.text];
            }
            std::size_t observed = 0;
            for (const auto& [_, n] : cs.counts) observed += n;
            for (const auto& [token, n] : cs.counts)
                cs.frequencies[token] = static_cast<double>(n) / static_cast<double>(observed);
            summary.stats = std::move(cs);
        }
        out.features.push_back(std::move(summary));
    }
    return out;
}

std::string render_distribution(const DistributionSummary& d) {
    std::string out;
    for (std::size_t i = 0; i < d.features.size(); ++i) {
        const FeatureSummary& f = d.features[i];
        if (i) out += "\n";
        out += f.name;
        out += ": ";
        if (f.is_numeric()) {
            const NumericSummary& s = f.numeric();
            if (!s.defined()) {
                out += "count=0, no data, missing=" + std::to_string(s.missing);
            } else {
                out += "count=" + std::to_string(s.count);
                out += ", mean=" + format_sig4(s.mean);
                out += ", std=" + format_sig4(s.std);
                out += ", min=" + format_sig4(s.min);
                out += ", q25=" + format_sig4(s.q25);
                out += ", median=" + format_sig4(s.median);
                out += ", q75=" + format_sig4(s.q75);
                out += ", max=" + format_sig4(s.max);
                out += ", missing=" + std::to_string(s.missing);
            }
        } else {
            const CategoricalSummary& s = f.categorical();
            bool first = true;
            for (const auto& [token, n] : s.counts) {
                if (!first) out += ", ";
                first = false;
                out += token + "=" + std::to_string(n);
                out += " (" + format_sig4(s.frequencies.at(token) * 100.0) + "%)";
            }
            if (!first) out += ", ";
            out += "missing=" + std::to_string(s.missing);
        }
    }
    return out;
}

bool is_outlier(double value, const NumericSummary& s, double k) {
    if (s.count < 2) throw std::runtime_error("is_outlier: summary needs count >= 2");
    double iqr = s.iqr();
    return value < s.q25 - k * iqr || value > s.q75 + k * iqr;
}

json distribution_to_json(const DistributionSummary& d) {
    json features = json::array();
    for (const auto& f : d.features) {
        json entry{{"name", f.name}};
        if (f.is_numeric()) {
            const NumericSummary& s = f.numeric();
            entry["kind"] = "numerical";
            entry["count"] = s.count;
            entry["missing"] = s.missing;
            if (s.defined()) {
                entry["mean"] = s.mean;
                entry["std"] = s.std;
                entry["min"] = s.min;
                entry["q25"] = s.q25;
                entry["median"] = s.median;
                entry["q75"] = s.q75;
                entry["max"] = s.max;
            }
        } else {
            const CategoricalSummary& s = f.categorical();
            entry["kind"] = "categorical";
            entry["counts"] = s.counts;
            entry["frequencies"] = s.frequencies;
            entry["missing"] = s.missing;
        }
        features.push_back(std::move(entry));
    }
    return json{{"train_size", d.train_size}, {"features", features}};
}

}  // namespace rca
