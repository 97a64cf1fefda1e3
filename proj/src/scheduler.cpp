#include "vidtome/scheduler.hpp"

#include "vidtome/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace vidtome {

ChunkPlan plan_chunks(int frame_count, int chunk_size, const OrderPolicy& policy, SeededRng& rng) {
    if (frame_count < 1) {
        throw EmptyInputError("plan_chunks: frame count must be >= 1");
    }
    if (chunk_size < 1) {
        throw ParameterError("plan_chunks: chunk size must be >= 1");
    }
    if (policy.kind == OrderPolicyKind::Mixed &&
        (policy.fraction_random < 0.0 || policy.fraction_random > 1.0)) {
        throw ParameterError("plan_chunks: mixed fraction must be in [0, 1]");
    }

    ChunkPlan plan;
    plan.policy = policy;

    // First chunk length is uniform in [1, min(chunk_size, frame_count)];
    // the rest are full runs with a possibly shorter tail.
    const int first_max = std::min(chunk_size, frame_count);
    const int first_len = static_cast<int>(rng.uniform_int(1, static_cast<std::uint64_t>(first_max)));
    int begin = 0;
    plan.chunks.push_back({0, first_len});
    begin = first_len;
    while (begin < frame_count) {
        const int end = std::min(begin + chunk_size, frame_count);
        plan.chunks.push_back({begin, end});
        begin = end;
    }

    const int m = plan.chunk_count();
    plan.processing_order.resize(static_cast<std::size_t>(m));
    std::iota(plan.processing_order.begin(), plan.processing_order.end(), 0);

    switch (policy.kind) {
    case OrderPolicyKind::Sequential:
        break;
    case OrderPolicyKind::Random:
        rng.shuffle(plan.processing_order);
        break;
    case OrderPolicyKind::Mixed: {
        const int k = static_cast<int>(std::floor(policy.fraction_random * m));
        if (k >= 2) {
            // Uniform k-subset of chunk positions (partial Fisher-Yates),
            // then a random permutation of the chosen chunks among those
            // positions; everything else stays in sequence.
            std::vector<int> pool(static_cast<std::size_t>(m));
            std::iota(pool.begin(), pool.end(), 0);
            for (int i = 0; i < k; ++i) {
                const int j = i + rng.uniform_index(m - i);
                std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
            }
            std::vector<int> positions(pool.begin(), pool.begin() + k);
            std::sort(positions.begin(), positions.end());
            std::vector<int> values = positions;
            rng.shuffle(values);
            for (int i = 0; i < k; ++i) {
                plan.processing_order[static_cast<std::size_t>(positions[i])] = values[i];
            }
        }
        break;
    }
    }
    return plan;
}

std::vector<std::uint64_t> first_chunk_distribution(int frame_count, int chunk_size,
                                                    std::uint64_t trials, SeededRng& rng) {
    if (trials < 1) {
        throw ParameterError("first_chunk_distribution: trials must be >= 1");
    }
    std::vector<std::uint64_t> histogram(static_cast<std::size_t>(chunk_size) + 1, 0);
    for (std::uint64_t i = 0; i < trials; ++i) {
        const ChunkPlan plan = plan_chunks(frame_count, chunk_size, OrderPolicy::sequential(), rng);
        ++histogram[static_cast<std::size_t>(plan.chunks.front().length())];
    }
    return histogram;
}

} // namespace vidtome
