#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace fluxbench {

/// SplitMix64 (Steele, Lea & Flood 2014). Chosen because its output sequence is fully
/// specified, so seeded splits reproduce bit-for-bit in any implementation.
///
/// Derived draws:
///   bounded(n)  - rejection sampling on the top of the 64-bit range, unbiased.
///   uniform()   - (next() >> 11) * 2^-53, in [0, 1).
///   normal()    - Box-Muller on two uniform() draws, cosine branch only.
class SplitMix64 {
public:
    static constexpr std::string_view kName = "splitmix64";

    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next();
    std::uint64_t bounded(std::uint64_t n);
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal();

private:
    std::uint64_t state_;
};

/// Counter-based child seed: mix(master + 0x9E37...*(stream+1)) xor mix(counter).
/// Distinct (stream, counter) pairs give statistically independent SplitMix64 streams.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t counter);

/// Partial Fisher-Yates: the first k entries of `items` become a uniform sample.
template <typename T>
void partial_shuffle(std::vector<T>& items, std::size_t k, SplitMix64& rng) {
    const std::size_t n = items.size();
    for (std::size_t i = 0; i < k && i + 1 < n; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.bounded(n - i));
        std::swap(items[i], items[j]);
    }
}

/// Random permutation of 0..n-1.
std::vector<std::size_t> permutation(std::size_t n, SplitMix64& rng);

/// Randomly partition 0..n-1 into `parts` groups of (near) equal size; each group is sorted.
std::vector<std::vector<std::size_t>> random_parts(std::size_t n, std::size_t parts, SplitMix64& rng);

}  // namespace fluxbench
