#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace vidtome {

// Deterministic pseudo-random source used for every randomized step in the
// engine. The generator is std::mt19937_64, whose output stream is fully
// specified by the C++ standard, so a given seed produces the same draws on
// every platform. Bounded integer and real draws are implemented here instead
// of the standard distributions, which are not portable across libraries.
//
// A SeededRng is single-owner. Code that needs an independent stream derives
// one with child(), which mixes a stream id into the original seed; the child
// stream does not depend on how many draws the parent has consumed.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed);

    std::uint64_t seed() const { return seed_; }

    // Raw 64-bit engine output.
    std::uint64_t next_u64();

    // Uniform integer in [lo, hi], inclusive. Unbiased (rejection sampling).
    std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi);

    // Uniform index in [0, count). count must be >= 1.
    int uniform_index(int count);

    // Uniform double in [0, 1) with 53 random bits.
    double uniform_real();

    // Independent stream derived from (seed, stream id).
    SeededRng child(std::uint64_t stream) const;

    // In-place Fisher-Yates shuffle driven by this stream.
    template <typename T>
    void shuffle(std::vector<T>& values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_int(0, i - 1));
            std::swap(values[i - 1], values[j]);
        }
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

// SplitMix64 finalizer; used for child-seed derivation.
std::uint64_t splitmix64(std::uint64_t x);

} // namespace vidtome
