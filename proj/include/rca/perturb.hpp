#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rca/dataset.hpp"
#include "rca/distribution.hpp"

namespace rca {

/// Robustness degradations: remove a feature entirely, blank a fixed
/// fraction of cells, or inject extreme numeric values.
struct PerturbationSpec {
    enum class Kind { drop_feature, missing, abnormal };
    Kind kind = Kind::missing;
    std::string feature;      // drop_feature
    double rate = 0.1;        // fraction of cells, in (0,1]
    double magnitude = 10.0;  // abnormal: value = mean +/- magnitude * std
    std::uint64_t seed = 0;

    static PerturbationSpec drop(std::string feature_name);
    static PerturbationSpec missing_cells(double rate, std::uint64_t seed);
    static PerturbationSpec abnormal_cells(double rate, double magnitude, std::uint64_t seed);

    std::string describe() const;  // e.g. "missing(0.1,seed=7)"
};

/// Apply a perturbation. Labels and record count are never touched.
///   drop_feature: removed from schema and every record.
///   missing: exactly floor(rate * records*features) cells (labels excluded)
///     chosen uniformly without replacement become missing.
///   abnormal: exactly floor(rate * records*numeric_features) numeric cells
///     replaced by mean +/- magnitude*std from `train_summary` (clean
///     training statistics; required), sign by seeded coin flip.
/// scope_ids, when given, restricts the perturbed cells to those records.
Dataset apply_perturbation(const Dataset& ds, const PerturbationSpec& spec,
                           const DistributionSummary* train_summary = nullptr,
                           const std::vector<std::string>* scope_ids = nullptr);

}  // namespace rca
