#include "vidtome/vidtome.hpp"

#include "vidtome/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace vidtome {

void VidToMeConfig::validate() const {
    if (chunk_size < 1) {
        throw ParameterError("VidToMeConfig: chunk_size must be >= 1");
    }
    if (local_ratio < 0.0 || local_ratio > 1.0) {
        throw ParameterError("VidToMeConfig: local_ratio must be in [0, 1]");
    }
    if (global_ratio < 0.0 || global_ratio > 1.0) {
        throw ParameterError("VidToMeConfig: global_ratio must be in [0, 1]");
    }
    if (merge_to_local_probability < 0.0 || merge_to_local_probability > 1.0) {
        throw ParameterError("VidToMeConfig: merge_to_local_probability must be in [0, 1]");
    }
}

namespace {

int ratio_to_count(double ratio, int set_size) {
    // Flooring everywhere a ratio becomes a count.
    return static_cast<int>(std::floor(ratio * set_size));
}

} // namespace

LocalMergeResult local_merge(const TokenMatrix& chunk, const VidToMeConfig& cfg, SeededRng& rng) {
    cfg.validate();
    const int frames = chunk.frames();
    const int n = chunk.tokens_per_frame();

    LocalMergeResult out;
    out.record.frames = frames;
    out.record.tokens_per_frame = n;
    out.record.channels = chunk.channels();
    out.record.target_frame = rng.uniform_index(frames);

    const TokenArray dst = chunk.frame_tokens(out.record.target_frame);
    const TokenArray src = frames > 1 ? chunk.flatten_excluding(out.record.target_frame)
                                      : TokenArray(0, chunk.channels());
    const int budget = ratio_to_count(cfg.local_ratio, (frames - 1) * n);

    out.record.local_map = match(src, dst, budget);
    MergedTokens merged = merge_tokens(src, dst, out.record.local_map, cfg.merge_mode);
    out.tokens = std::move(merged.tokens);
    return out;
}

TokenArray global_merge(const TokenArray& local, GlobalTokenState& state, MergeRecord& record,
                        const VidToMeConfig& cfg, SeededRng& rng) {
    cfg.validate();
    if (local.empty()) {
        throw EmptyInputError("global_merge: local token set is empty");
    }
    if (!cfg.global_merging) {
        record.global_map.reset();
        return local;
    }
    if (state.empty()) {
        // First chunk of the iteration seeds the global set.
        state.tokens = local;
        record.global_map.reset();
        return local;
    }

    const bool local_is_dst = rng.uniform_real() < cfg.merge_to_local_probability;
    const TokenArray& src = local_is_dst ? state.tokens : local;
    const TokenArray& dst = local_is_dst ? local : state.tokens;
    const int budget = ratio_to_count(cfg.global_ratio, src.count());

    MatchMap map = match(src, dst, budget);
    MergedTokens merged = merge_tokens(src, dst, map, cfg.merge_mode);

    // Refresh the global set from the pre-attention unmerge: the local part
    // of U(merged, map) becomes the next chunk's global tokens.
    auto [src_restored, dst_restored] = unmerge_tokens(merged);
    state.tokens = local_is_dst ? std::move(dst_restored) : std::move(src_restored);

    record.global_map = std::move(map);
    record.local_is_dst = local_is_dst;
    return std::move(merged.tokens);
}

TokenMatrix unmerge_all(const TokenArray& attention_output, const MergeRecord& record) {
    const int frames = record.frames;
    const int n = record.tokens_per_frame;
    const int channels = record.channels;
    if (attention_output.channels() != channels) {
        throw ConsistencyError("unmerge_all: channel count does not match the record");
    }

    TokenArray local_part = attention_output;
    if (record.global_map) {
        auto [src_restored, dst_restored] = unmerge_tokens(attention_output, *record.global_map);
        // The global half is discarded; the state was refreshed pre-attention.
        local_part = record.local_is_dst ? std::move(dst_restored) : std::move(src_restored);
    }

    auto [src_tokens, dst_tokens] = unmerge_tokens(local_part, record.local_map);
    if (dst_tokens.count() != n || src_tokens.count() != (frames - 1) * n) {
        throw ConsistencyError("unmerge_all: restored counts do not match the chunk shape");
    }

    std::vector<float> data(static_cast<std::size_t>(frames) * n * channels);
    const std::size_t frame_len = static_cast<std::size_t>(n) * channels;
    int src_frame = 0;
    for (int f = 0; f < frames; ++f) {
        float* into = data.data() + f * frame_len;
        if (f == record.target_frame) {
            std::memcpy(into, dst_tokens.data().data(), frame_len * sizeof(float));
        } else {
            std::memcpy(into, src_tokens.data().data() + src_frame * frame_len,
                        frame_len * sizeof(float));
            ++src_frame;
        }
    }
    return TokenMatrix(frames, n, channels, std::move(data));
}

MatchMap match_shared(const TokenArray& src_a, const TokenArray& dst_a, const TokenArray& src_b,
                      const TokenArray& dst_b, int kept_edges) {
    if (src_a.count() != src_b.count() || dst_a.count() != dst_b.count()) {
        throw ConsistencyError("match_shared: stream set sizes differ");
    }
    if (dst_a.empty()) {
        throw EmptyInputError("match_shared: dst sets are empty");
    }
    if (kept_edges < 0 || kept_edges > src_a.count()) {
        throw ParameterError("match_shared: kept edge count must be in [0, |src|]");
    }

    MatchMap map;
    map.src_size = src_a.count();
    map.dst_size = dst_a.count();
    if (kept_edges == 0 || src_a.empty()) {
        return map;
    }

    // Candidate per src token: the strongest edge across both streams,
    // smallest dst index on ties.
    std::vector<MatchEdge> candidates;
    candidates.reserve(static_cast<std::size_t>(map.src_size));
    for (int i = 0; i < map.src_size; ++i) {
        MatchEdge best{static_cast<std::int32_t>(i), 0, -2.0};
        for (int j = 0; j < map.dst_size; ++j) {
            const double sim = std::max(cosine_similarity(src_a.token(i), dst_a.token(j)),
                                        cosine_similarity(src_b.token(i), dst_b.token(j)));
            if (sim > best.similarity) {
                best.dst = j;
                best.similarity = sim;
            }
        }
        candidates.push_back(best);
    }

    std::sort(candidates.begin(), candidates.end(), [](const MatchEdge& a, const MatchEdge& b) {
        if (a.similarity != b.similarity) {
            return a.similarity > b.similarity;
        }
        return a.src < b.src;
    });
    candidates.resize(static_cast<std::size_t>(kept_edges));
    map.edges = std::move(candidates);
    return map;
}

} // namespace vidtome
