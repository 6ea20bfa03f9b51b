#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

namespace rca {

/// Shape-faithful synthetic fixtures. The private clinical data cannot be
/// shipped, so tests and demos run on generated tables with the published
/// shape: crt 315x17 (32 positive), diabetes 415x8 (153 positive),
/// heart_disease 965x19 (193 positive).
struct SyntheticSpec {
    std::string shape = "crt";  // crt | diabetes | heart_disease
    std::size_t rows = 0;       // 0 -> the shape's default
    std::uint64_t seed = 7;
};

struct SyntheticDataset {
    std::string csv;
    nlohmann::json schema;
};

SyntheticDataset make_synthetic(const SyntheticSpec& spec);

}  // namespace rca
