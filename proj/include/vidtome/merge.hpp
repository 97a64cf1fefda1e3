#pragma once

#include "vidtome/matching.hpp"
#include "vidtome/tokens.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace vidtome {

enum class MergeMode {
    Replace, // merged-away src tokens are dropped, dst values unchanged
    Mean,    // each dst token becomes the mean of itself and its absorbed src tokens
};

// Merge output plus the provenance needed to invert it. Token order is
// [surviving src tokens in original order, then dst tokens in original order].
struct MergedTokens {
    TokenArray tokens;
    MatchMap map;
    std::vector<std::int32_t> src_order; // original indices of surviving src tokens, ascending

    int count() const { return tokens.count(); }
};

// Merge src into dst along the map. Output size is |src| + |dst| - edges.
MergedTokens merge_tokens(const TokenArray& src, const TokenArray& dst, const MatchMap& map,
                          MergeMode mode);

// Restore the original (src, dst) counts and ordering from post-merge token
// values. Each merged-away src position receives the current value of its
// dst target; all other positions receive their current values.
std::pair<TokenArray, TokenArray> unmerge_tokens(const TokenArray& merged_values,
                                                 const MatchMap& map);

inline std::pair<TokenArray, TokenArray> unmerge_tokens(const MergedTokens& merged) {
    return unmerge_tokens(merged.tokens, merged.map);
}

} // namespace vidtome
