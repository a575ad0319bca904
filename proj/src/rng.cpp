#include "fluxbench/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace fluxbench {

namespace {
std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}
}  // namespace

std::uint64_t SplitMix64::next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix64(state_);
}

std::uint64_t SplitMix64::bounded(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
    std::uint64_t x = next();
    while (x >= limit) x = next();
    return x % n;
}

double SplitMix64::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double SplitMix64::normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t counter) {
    return mix64(master + 0x9E3779B97F4A7C15ULL * (stream + 1)) ^ mix64(counter + 0xD1B54A32D192ED03ULL);
}

std::vector<std::size_t> permutation(std::size_t n, SplitMix64& rng) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    partial_shuffle(idx, n, rng);
    return idx;
}

std::vector<std::vector<std::size_t>> random_parts(std::size_t n, std::size_t parts, SplitMix64& rng) {
    const auto perm = permutation(n, rng);
    std::vector<std::vector<std::size_t>> out(parts);
    for (std::size_t p = 0; p < parts; ++p) {
        const std::size_t begin = n * p / parts;
        const std::size_t end = n * (p + 1) / parts;
        out[p].assign(perm.begin() + begin, perm.begin() + end);
        std::sort(out[p].begin(), out[p].end());
    }
    return out;
}

}  // namespace fluxbench
