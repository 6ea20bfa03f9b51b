#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "rca/text.hpp"

namespace rca {

/// splitmix64 (Steele, Lea & Flood 2014). This is the project's named,
/// versioned PRNG: splits, shuffles and perturbations must stay reproducible
/// across implementations, so the algorithm and constants are pinned here.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform draw in [0, n). Plain modulo: bias is negligible for the
    /// sizes involved and the mapping stays trivially portable.
    std::uint64_t bounded(std::uint64_t n) { return next() % n; }

    /// Coin flip used for perturbation sign choices.
    bool flip() { return (next() & 1u) != 0; }

private:
    std::uint64_t state_;
};

/// Derive an independent sub-seed from a master seed and a purpose tag.
/// All randomness in a run flows from one seed through this split.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag, std::uint64_t index = 0) {
    SplitMix64 mixer(seed ^ fnv1a64(tag) ^ (0x6a09e667f3bcc909ULL * (index + 1)));
    return mixer.next();
}

/// Fisher-Yates (Durstenfeld) shuffle driven by splitmix64.
template <typename T>
void fisher_yates(std::vector<T>& items, SplitMix64& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.bounded(i));
        std::swap(items[i - 1], items[j]);
    }
}

}  // namespace rca
