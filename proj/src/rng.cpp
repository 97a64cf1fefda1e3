#include "vidtome/rng.hpp"

#include "vidtome/errors.hpp"

#include <limits>

namespace vidtome {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

SeededRng::SeededRng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

std::uint64_t SeededRng::next_u64() {
    return engine_();
}

std::uint64_t SeededRng::uniform_int(std::uint64_t lo, std::uint64_t hi) {
    if (lo > hi) {
        throw ParameterError("uniform_int: lo > hi");
    }
    const std::uint64_t span = hi - lo;
    if (span == std::numeric_limits<std::uint64_t>::max()) {
        return next_u64();
    }
    const std::uint64_t bound = span + 1;
    // Reject the low partial bucket so every residue is equally likely.
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        const std::uint64_t x = next_u64();
        if (x >= threshold) {
            return lo + x % bound;
        }
    }
}

int SeededRng::uniform_index(int count) {
    if (count < 1) {
        throw ParameterError("uniform_index: count must be >= 1");
    }
    return static_cast<int>(uniform_int(0, static_cast<std::uint64_t>(count) - 1));
}

double SeededRng::uniform_real() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

SeededRng SeededRng::child(std::uint64_t stream) const {
    return SeededRng(splitmix64(seed_ + 0x9E3779B97F4A7C15ULL * (stream + 1)));
}

} // namespace vidtome
