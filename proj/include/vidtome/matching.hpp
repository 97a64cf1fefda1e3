#pragma once

#include "vidtome/tokens.hpp"

#include <cstdint>
#include <vector>

namespace vidtome {

// One directed merge edge: src token index -> dst token index (flat indices
// into the two partitions).
struct MatchEdge {
    std::int32_t src = 0;
    std::int32_t dst = 0;
    double similarity = 0.0;
};

// Result of bipartite soft matching. Edges are sorted by non-increasing
// similarity (ties by ascending src index); src indices are distinct, dst
// indices may repeat.
struct MatchMap {
    std::vector<MatchEdge> edges;
    std::int32_t src_size = 0;
    std::int32_t dst_size = 0;

    int edge_count() const { return static_cast<int>(edges.size()); }

    // Throws ConsistencyError if any structural invariant is broken.
    void validate() const;
};

// Bipartite soft matching: link every src token to its most similar dst
// token, then keep the kept_edges strongest links. Deterministic: argmax
// ties resolve to the smallest dst index, the keep cut resolves to the
// smallest src index.
MatchMap match(const TokenArray& src, const TokenArray& dst, int kept_edges);

// Reference implementation of the same contract via full similarity matrix
// and a full sort. Kept deliberately naive and separate from match() so the
// two can be checked against each other.
MatchMap match_oracle(const TokenArray& src, const TokenArray& dst, int kept_edges);

} // namespace vidtome
