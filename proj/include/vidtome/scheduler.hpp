#pragma once

#include "vidtome/rng.hpp"

#include <cstdint>
#include <vector>

namespace vidtome {

enum class OrderPolicyKind {
    Sequential, // process chunks in video order
    Random,     // uniform permutation of chunks
    Mixed,      // a random fraction of chunks permuted, the rest in sequence
};

struct OrderPolicy {
    OrderPolicyKind kind = OrderPolicyKind::Sequential;
    double fraction_random = 0.5; // used by Mixed only

    static OrderPolicy sequential() { return {OrderPolicyKind::Sequential, 0.0}; }
    static OrderPolicy random() { return {OrderPolicyKind::Random, 1.0}; }
    static OrderPolicy mixed(double fraction) { return {OrderPolicyKind::Mixed, fraction}; }
};

// Half-open frame range [begin, end).
struct ChunkRange {
    int begin = 0;
    int end = 0;

    int length() const { return end - begin; }
};

// Ordered partition of [0, n) into consecutive chunks plus the order in which
// they are processed.
struct ChunkPlan {
    std::vector<ChunkRange> chunks;
    std::vector<int> processing_order; // permutation of chunk indices
    OrderPolicy policy;

    int chunk_count() const { return static_cast<int>(chunks.size()); }
};

// Partition n frames into chunks of `chunk_size` with a first chunk of random
// length in [1, min(chunk_size, n)] and a possibly shorter final chunk, then
// attach a processing order per policy.
ChunkPlan plan_chunks(int frame_count, int chunk_size, const OrderPolicy& policy, SeededRng& rng);

// Empirical frequencies of the first-chunk length over repeated plans.
// Index b holds the number of draws with first-chunk length b; index 0 is
// unused.
std::vector<std::uint64_t> first_chunk_distribution(int frame_count, int chunk_size,
                                                    std::uint64_t trials, SeededRng& rng);

} // namespace vidtome
