#include "vidtome/merge.hpp"

#include "vidtome/errors.hpp"

#include <cstring>

namespace vidtome {

namespace {

// Flags src indices that are merged away, bounds-checking the map.
std::vector<bool> merged_src_flags(const MatchMap& map) {
    std::vector<bool> merged(static_cast<std::size_t>(map.src_size), false);
    for (const MatchEdge& e : map.edges) {
        if (e.src < 0 || e.src >= map.src_size || e.dst < 0 || e.dst >= map.dst_size) {
            throw ConsistencyError("merge: edge index out of range");
        }
        if (merged[static_cast<std::size_t>(e.src)]) {
            throw ConsistencyError("merge: duplicate src index in map");
        }
        merged[static_cast<std::size_t>(e.src)] = true;
    }
    return merged;
}

} // namespace

MergedTokens merge_tokens(const TokenArray& src, const TokenArray& dst, const MatchMap& map,
                          MergeMode mode) {
    if (src.count() != map.src_size || dst.count() != map.dst_size) {
        throw ConsistencyError("merge_tokens: map was built for different set sizes");
    }
    if (!src.empty() && src.channels() != dst.channels()) {
        throw DimensionError("merge_tokens: channel counts differ");
    }
    const int channels = dst.channels();
    const std::vector<bool> merged_away = merged_src_flags(map);

    MergedTokens out;
    out.map = map;
    const int kept_src = map.src_size - map.edge_count();
    out.tokens = TokenArray(kept_src + map.dst_size, channels);
    out.src_order.reserve(static_cast<std::size_t>(kept_src));

    int cursor = 0;
    for (int i = 0; i < map.src_size; ++i) {
        if (merged_away[static_cast<std::size_t>(i)]) {
            continue;
        }
        auto slot = out.tokens.token(cursor);
        std::memcpy(slot.data(), src.token(i).data(), sizeof(float) * channels);
        out.src_order.push_back(i);
        ++cursor;
    }
    for (int j = 0; j < map.dst_size; ++j) {
        auto slot = out.tokens.token(cursor + j);
        std::memcpy(slot.data(), dst.token(j).data(), sizeof(float) * channels);
    }

    if (mode == MergeMode::Mean && !map.edges.empty()) {
        // Accumulate absorbed src tokens into their dst targets in double.
        std::vector<double> sums(static_cast<std::size_t>(map.dst_size) * channels, 0.0);
        std::vector<int> absorbed(static_cast<std::size_t>(map.dst_size), 0);
        for (const MatchEdge& e : map.edges) {
            const auto v = src.token(e.src);
            double* acc = sums.data() + static_cast<std::size_t>(e.dst) * channels;
            for (int c = 0; c < channels; ++c) {
                acc[c] += v[c];
            }
            ++absorbed[static_cast<std::size_t>(e.dst)];
        }
        for (int j = 0; j < map.dst_size; ++j) {
            const int n = absorbed[static_cast<std::size_t>(j)];
            if (n == 0) {
                continue;
            }
            auto slot = out.tokens.token(cursor + j);
            const double* acc = sums.data() + static_cast<std::size_t>(j) * channels;
            for (int c = 0; c < channels; ++c) {
                slot[c] = static_cast<float>((acc[c] + slot[c]) / (n + 1));
            }
        }
    }
    return out;
}

std::pair<TokenArray, TokenArray> unmerge_tokens(const TokenArray& merged_values,
                                                 const MatchMap& map) {
    const int kept_src = map.src_size - map.edge_count();
    if (merged_values.count() != kept_src + map.dst_size) {
        throw ConsistencyError("unmerge_tokens: merged token count does not fit the map");
    }
    const int channels = merged_values.channels();
    const std::vector<bool> merged_away = merged_src_flags(map);

    TokenArray src(map.src_size, channels);
    TokenArray dst(map.dst_size, channels);

    // Dst block sits after the surviving src block.
    for (int j = 0; j < map.dst_size; ++j) {
        std::memcpy(dst.token(j).data(), merged_values.token(kept_src + j).data(),
                    sizeof(float) * channels);
    }
    int cursor = 0;
    for (int i = 0; i < map.src_size; ++i) {
        if (merged_away[static_cast<std::size_t>(i)]) {
            continue;
        }
        std::memcpy(src.token(i).data(), merged_values.token(cursor).data(),
                    sizeof(float) * channels);
        ++cursor;
    }
    // Merged-away positions are broadcast copies of their dst target.
    for (const MatchEdge& e : map.edges) {
        std::memcpy(src.token(e.src).data(), dst.token(e.dst).data(), sizeof(float) * channels);
    }
    return {std::move(src), std::move(dst)};
}

} // namespace vidtome
