#pragma once

#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

#include "rca/dataset.hpp"

namespace rca {

struct DatasetSplit {
    std::vector<std::string> train_ids;
    std::vector<std::string> val_ids;
    std::vector<std::string> test_ids;
    std::uint64_t seed = 0;
};

/// 3:1:1 sizes: (floor(3N/5), floor(N/5), remainder).
std::tuple<std::size_t, std::size_t, std::size_t> split_sizes(std::size_t n);

/// Deterministic 3:1:1 split: Fisher-Yates over record ids seeded with
/// splitmix64(seed). Stratified mode shuffles and splits each label class
/// separately (config convenience; per-class sizes use the same floor rule).
/// Requires N >= 5.
DatasetSplit split_dataset(const Dataset& ds, std::uint64_t seed, bool stratified = false);

}  // namespace rca
