#include "rca/perturb.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <unordered_set>

#include "rca/rng.hpp"
#include "rca/text.hpp"

namespace rca {

PerturbationSpec PerturbationSpec::drop(std::string feature_name) {
    PerturbationSpec spec;
    spec.kind = Kind::drop_feature;
    spec.feature = std::move(feature_name);
    return spec;
}

PerturbationSpec PerturbationSpec::missing_cells(double rate, std::uint64_t seed) {
    PerturbationSpec spec;
    spec.kind = Kind::missing;
    spec.rate = rate;
    spec.seed = seed;
    return spec;
}

PerturbationSpec PerturbationSpec::abnormal_cells(double rate, double magnitude, std::uint64_t seed) {
    PerturbationSpec spec;
    spec.kind = Kind::abnormal;
    spec.rate = rate;
    spec.magnitude = magnitude;
    spec.seed = seed;
    return spec;
}

std::string PerturbationSpec::describe() const {
    char buf[128];
    switch (kind) {
        case Kind::drop_feature:
            return "drop_feature(" + feature + ")";
        case Kind::missing:
            std::snprintf(buf, sizeof(buf), "missing(%g,seed=%llu)", rate,
                          static_cast<unsigned long long>(seed));
            return buf;
        case Kind::abnormal:
            std::snprintf(buf, sizeof(buf), "abnormal(%g,x%g,seed=%llu)", rate, magnitude,
                          static_cast<unsigned long long>(seed));
            return buf;
    }
    return "?";
}

namespace {

struct Cell {
    std::size_t record;
    std::size_t feature;
};

std::vector<std::size_t> scoped_records(const Dataset& ds, const std::vector<std::string>* scope_ids) {
    std::vector<std::size_t> indices;
    if (!scope_ids) {
        indices.resize(ds.records.size());
        for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
        return indices;
    }
    std::unordered_set<std::string> wanted(scope_ids->begin(), scope_ids->end());
    for (std::size_t i = 0; i < ds.records.size(); ++i)
        if (wanted.count(ds.records[i].id)) indices.push_back(i);
    return indices;
}

// Seeded uniform choice of exactly k cells, without replacement: full
// Fisher-Yates over the cell list, take the first k.
std::vector<Cell> choose_cells(std::vector<Cell> cells, std::size_t k, SplitMix64& rng) {
    fisher_yates(cells, rng);
    cells.resize(k);
    return cells;
}

}  // namespace

Dataset apply_perturbation(const Dataset& ds, const PerturbationSpec& spec,
                           const DistributionSummary* train_summary,
                           const std::vector<std::string>* scope_ids) {
    Dataset out = ds;

    if (spec.kind == PerturbationSpec::Kind::drop_feature) {
        std::size_t idx = out.feature_index(spec.feature);  // throws on unknown name
        out.schema.erase(out.schema.begin() + static_cast<std::ptrdiff_t>(idx));
        for (auto& rec : out.records)
            rec.values.erase(rec.values.begin() + static_cast<std::ptrdiff_t>(idx));
        return out;
    }

    if (!(spec.rate > 0.0 && spec.rate <= 1.0))
        throw std::runtime_error("perturbation rate must be in (0,1]");

    std::vector<std::size_t> records = scoped_records(out, scope_ids);
    SplitMix64 rng(spec.seed);

    if (spec.kind == PerturbationSpec::Kind::missing) {
        std::vector<Cell> cells;
        cells.reserve(records.size() * out.schema.size());
        for (std::size_t r : records)
            for (std::size_t f = 0; f < out.schema.size(); ++f) cells.push_back(Cell{r, f});
        std::size_t k = static_cast<std::size_t>(std::floor(spec.rate * static_cast<double>(cells.size())));
        for (const Cell& cell : choose_cells(std::move(cells), k, rng))
            out.records[cell.record].values[cell.feature] = CellValue::make_missing();
        return out;
    }

    // abnormal
    if (!train_summary)
        throw std::runtime_error("abnormal perturbation needs clean training statistics");
    std::vector<std::size_t> numeric_features;
    for (std::size_t f = 0; f < out.schema.size(); ++f)
        if (out.schema[f].kind == FeatureKind::numerical) numeric_features.push_back(f);

    std::vector<Cell> cells;
    cells.reserve(records.size() * numeric_features.size());
    for (std::size_t r : records)
        for (std::size_t f : numeric_features) cells.push_back(Cell{r, f});
    std::size_t k = static_cast<std::size_t>(std::floor(spec.rate * static_cast<double>(cells.size())));

    for (const Cell& cell : choose_cells(std::move(cells), k, rng)) {
        const FeatureSummary& summary = train_summary->by_name(out.schema[cell.feature].name);
        if (!summary.is_numeric() || !summary.numeric().defined())
            throw std::runtime_error("abnormal perturbation: no numeric statistics for feature '" +
                                     out.schema[cell.feature].name + "'");
        const NumericSummary& stats = summary.numeric();
        double sign = rng.flip() ? 1.0 : -1.0;
        double value = stats.mean + sign * spec.magnitude * stats.std;
        out.records[cell.record].values[cell.feature] =
            CellValue::make_numeric(value, format_roundtrip(value));
    }
    return out;
}

}  // namespace rca
