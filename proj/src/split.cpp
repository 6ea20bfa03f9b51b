#include "rca/split.hpp"

#include <stdexcept>

#include "rca/rng.hpp"

namespace rca {

std::tuple<std::size_t, std::size_t, std::size_t> split_sizes(std::size_t n) {
    std::size_t train = 3 * n / 5;
    std::size_t val = n / 5;
    return {train, val, n - train - val};
}

namespace {

void assign(DatasetSplit& split, std::vector<std::string> ids, SplitMix64& rng) {
    fisher_yates(ids, rng);
    auto [train_n, val_n, test_n] = split_sizes(ids.size());
    (void)test_n;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i < train_n) split.train_ids.push_back(std::move(ids[i]));
        else if (i < train_n + val_n) split.val_ids.push_back(std::move(ids[i]));
        else split.test_ids.push_back(std::move(ids[i]));
    }
}

}  // namespace

DatasetSplit split_dataset(const Dataset& ds, std::uint64_t seed, bool stratified) {
    if (ds.records.size() < 5)
        throw std::runtime_error("split_dataset: need at least 5 records, got " +
                                 std::to_string(ds.records.size()));
    DatasetSplit split;
    split.seed = seed;
    SplitMix64 rng(seed);

    if (!stratified) {
        std::vector<std::string> ids;
        ids.reserve(ds.records.size());
        for (const auto& rec : ds.records) ids.push_back(rec.id);
        assign(split, std::move(ids), rng);
    } else {
        std::vector<std::string> positives, negatives;
        for (const auto& rec : ds.records)
            (rec.label == 1 ? positives : negatives).push_back(rec.id);
        assign(split, std::move(positives), rng);
        assign(split, std::move(negatives), rng);
    }
    return split;
}

}  // namespace rca
