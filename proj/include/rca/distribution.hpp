#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "rca/dataset.hpp"

namespace rca {

/// Per-feature numeric statistics over the training split. Population
/// (n-denominator) std; quantiles are type-7 linear interpolation
/// h = (n-1)p between order statistics. A feature with zero observed
/// values keeps count == 0 and renders as "no data".
struct NumericSummary {
    std::size_t count = 0;
    std::size_t missing = 0;
    double mean = 0.0;
    double std = 0.0;
    double min = 0.0;
    double q25 = 0.0;
    double median = 0.0;
    double q75 = 0.0;
    double max = 0.0;

    bool defined() const { return count > 0; }
    double iqr() const { return q75 - q25; }
};

struct CategoricalSummary {
    std::map<std::string, std::size_t> counts;   // token-ordered
    std::map<std::string, double> frequencies;   // over observed tokens
    std::size_t missing = 0;
};

struct FeatureSummary {
    std::string name;
    std::variant<NumericSummary, CategoricalSummary> stats;

    bool is_numeric() const { return std::holds_alternative<NumericSummary>(stats); }
    const NumericSummary& numeric() const { return std::get<NumericSummary>(stats); }
    const CategoricalSummary& categorical() const { return std::get<CategoricalSummary>(stats); }
};

struct DistributionSummary {
    std::vector<FeatureSummary> features;  // schema order
    std::size_t train_size = 0;

    const FeatureSummary& by_name(const std::string& name) const;  // throws on unknown
};

/// Compute statistics over the records named by train_ids only.
DistributionSummary summarize(const Dataset& ds, const std::vector<std::string>& train_ids);

/// Deterministic text block, one line per feature, reals with 4 significant
/// digits. Fills the {distribution} prompt placeholder.
std::string render_distribution(const DistributionSummary& d);

/// Tukey fence: value < q25 - k*IQR or value > q75 + k*IQR. Requires a
/// defined summary with count >= 2.
bool is_outlier(double value, const NumericSummary& s, double k = 1.5);

nlohmann::json distribution_to_json(const DistributionSummary& d);

}  // namespace rca
