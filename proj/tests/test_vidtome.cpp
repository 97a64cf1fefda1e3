#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "vidtome/errors.hpp"
#include "vidtome/rng.hpp"
#include "vidtome/vidtome.hpp"

#include <cmath>
#include <cstring>
#include <vector>

using namespace vidtome;

namespace {

TokenMatrix random_chunk(int frames, int tokens, int channels, SeededRng& rng) {
    std::vector<float> data(static_cast<std::size_t>(frames) * tokens * channels);
    for (float& v : data) {
        v = static_cast<float>(rng.uniform_real() * 2.0 - 1.0);
    }
    return TokenMatrix(frames, tokens, channels, std::move(data));
}

TokenArray random_tokens(int count, int channels, SeededRng& rng) {
    std::vector<float> data(static_cast<std::size_t>(count) * channels);
    for (float& v : data) {
        v = static_cast<float>(rng.uniform_real() * 2.0 - 1.0);
    }
    return TokenArray(count, channels, std::move(data));
}

bool spans_equal(std::span<const float> a, std::span<const float> b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0;
}

} // namespace

TEST_CASE("VidToMeConfig validates its ranges") {
    VidToMeConfig cfg;
    CHECK_NOTHROW(cfg.validate());

    cfg.chunk_size = 0;
    CHECK_THROWS_AS(cfg.validate(), ParameterError);
    cfg = {};
    cfg.local_ratio = 1.5;
    CHECK_THROWS_AS(cfg.validate(), ParameterError);
    cfg = {};
    cfg.global_ratio = -0.1;
    CHECK_THROWS_AS(cfg.validate(), ParameterError);
    cfg = {};
    cfg.merge_to_local_probability = 2.0;
    CHECK_THROWS_AS(cfg.validate(), ParameterError);
}

TEST_CASE("local_merge keeps B*N - floor(p*(B-1)*N) tokens") {
    SeededRng rng(3);
    VidToMeConfig cfg;
    cfg.local_ratio = 0.9;
    for (const int frames : {2, 3, 4, 8}) {
        for (const int n : {5, 16, 33}) {
            const TokenMatrix chunk = random_chunk(frames, n, 8, rng);
            SeededRng mrng(static_cast<std::uint64_t>(frames * 100 + n));
            const LocalMergeResult res = local_merge(chunk, cfg, mrng);
            const int budget =
                static_cast<int>(std::floor(cfg.local_ratio * (frames - 1) * n));
            CHECK(res.tokens.count() == frames * n - budget);
            CHECK(res.record.frames == frames);
            CHECK(res.record.tokens_per_frame == n);
            CHECK(res.record.local_map.edge_count() == budget);
            CHECK(res.record.target_frame >= 0);
            CHECK(res.record.target_frame < frames);
            CHECK_FALSE(res.record.global_map.has_value());
        }
    }
}

TEST_CASE("local_merge on a single-frame chunk passes tokens through") {
    SeededRng rng(4);
    const TokenMatrix chunk = random_chunk(1, 10, 4, rng);
    SeededRng mrng(1);
    const LocalMergeResult res = local_merge(chunk, VidToMeConfig{}, mrng);
    REQUIRE(res.tokens.count() == 10);
    CHECK(res.record.target_frame == 0);
    CHECK(res.record.local_map.edge_count() == 0);
    for (int i = 0; i < 10; ++i) {
        CHECK(spans_equal(res.tokens.token(i), chunk.token(0, i)));
    }
}

TEST_CASE("local_merge target frame follows the rng uniformly") {
    SeededRng data_rng(5);
    const TokenMatrix chunk = random_chunk(4, 6, 4, data_rng);
    std::vector<int> counts(4, 0);
    SeededRng mrng(99);
    for (int i = 0; i < 400; ++i) {
        const LocalMergeResult res = local_merge(chunk, VidToMeConfig{}, mrng);
        ++counts[static_cast<std::size_t>(res.record.target_frame)];
    }
    for (const int c : counts) {
        CHECK(c > 50); // each frame drawn roughly 100 times out of 400
    }
}

TEST_CASE("global_merge seeds the state from the first chunk") {
    SeededRng rng(6);
    const TokenArray local = random_tokens(12, 4, rng);
    GlobalTokenState state;
    state.reset(0);
    MergeRecord record;
    SeededRng mrng(7);
    const TokenArray out = global_merge(local, state, record, VidToMeConfig{}, mrng);
    REQUIRE(out.count() == 12);
    CHECK_FALSE(record.global_map.has_value());
    REQUIRE(state.tokens.count() == 12);
    for (int i = 0; i < 12; ++i) {
        CHECK(spans_equal(out.token(i), local.token(i)));
        CHECK(spans_equal(state.tokens.token(i), local.token(i)));
    }
}

TEST_CASE("global_merge merges later chunks with budget floor(p_g * |src|)") {
    SeededRng rng(8);
    VidToMeConfig cfg;
    cfg.global_ratio = 0.8;
    for (int trial = 0; trial < 50; ++trial) {
        GlobalTokenState state;
        state.reset(trial);
        MergeRecord r0, r1;
        const TokenArray first = random_tokens(10 + trial % 5, 4, rng);
        const TokenArray second = random_tokens(8 + trial % 7, 4, rng);
        SeededRng mrng(static_cast<std::uint64_t>(trial));
        global_merge(first, state, r0, cfg, mrng);
        const TokenArray merged = global_merge(second, state, r1, cfg, mrng);

        REQUIRE(r1.global_map.has_value());
        const int src_size = r1.local_is_dst ? first.count() : second.count();
        const int budget = static_cast<int>(std::floor(cfg.global_ratio * src_size));
        CHECK(r1.global_map->edge_count() == budget);
        CHECK(merged.count() == first.count() + second.count() - budget);
        // The state is refreshed to local length for the next chunk.
        CHECK(state.tokens.count() == second.count());
    }
}

TEST_CASE("global_merge refreshes state from the pre-attention unmerge") {
    // With Replace mode and local as dst, the local tokens survive unchanged,
    // so the refreshed state must be bit-identical to the local set.
    SeededRng rng(10);
    VidToMeConfig cfg;
    cfg.merge_to_local_probability = 1.0; // force local as dst
    GlobalTokenState state;
    state.reset(0);
    MergeRecord r0, r1;
    const TokenArray first = random_tokens(9, 4, rng);
    const TokenArray second = random_tokens(11, 4, rng);
    SeededRng mrng(11);
    global_merge(first, state, r0, cfg, mrng);
    global_merge(second, state, r1, cfg, mrng);
    REQUIRE(r1.local_is_dst);
    REQUIRE(state.tokens.count() == second.count());
    for (int i = 0; i < second.count(); ++i) {
        CHECK(spans_equal(state.tokens.token(i), second.token(i)));
    }
}

TEST_CASE("global_merge respects the src/dst coin") {
    SeededRng rng(12);
    int local_dst = 0;
    const int trials = 200;
    for (int trial = 0; trial < trials; ++trial) {
        VidToMeConfig cfg;
        cfg.merge_to_local_probability = 0.5;
        GlobalTokenState state;
        state.reset(trial);
        MergeRecord r0, r1;
        const TokenArray first = random_tokens(10, 4, rng);
        const TokenArray second = random_tokens(10, 4, rng);
        SeededRng mrng(static_cast<std::uint64_t>(trial) + 999);
        global_merge(first, state, r0, cfg, mrng);
        global_merge(second, state, r1, cfg, mrng);
        if (r1.local_is_dst) {
            ++local_dst;
        }
    }
    CHECK(local_dst > trials / 4);
    CHECK(local_dst < 3 * trials / 4);
}

TEST_CASE("global_merge can be disabled for ablations") {
    SeededRng rng(13);
    VidToMeConfig cfg;
    cfg.global_merging = false;
    GlobalTokenState state;
    state.reset(0);
    MergeRecord r0, r1;
    const TokenArray first = random_tokens(10, 4, rng);
    const TokenArray second = random_tokens(10, 4, rng);
    SeededRng mrng(14);
    const TokenArray out0 = global_merge(first, state, r0, cfg, mrng);
    CHECK(state.empty()); // never seeded
    const TokenArray out1 = global_merge(second, state, r1, cfg, mrng);
    CHECK(out0.count() == first.count());
    CHECK(out1.count() == second.count());
    CHECK_FALSE(r0.global_map.has_value());
    CHECK_FALSE(r1.global_map.has_value());
}

TEST_CASE("global_merge rejects an empty local set") {
    GlobalTokenState state;
    MergeRecord record;
    SeededRng rng(1);
    CHECK_THROWS_AS(global_merge(TokenArray(0, 4), state, record, VidToMeConfig{}, rng),
                    EmptyInputError);
}

TEST_CASE("unmerge_all restores the chunk shape with dst values broadcast") {
    SeededRng rng(15);
    VidToMeConfig cfg;
    // Keep the local set on the dst side of the global merge so every local
    // token survives that stage with its value intact; the bit-identity
    // assertions below are only meaningful in that orientation.
    cfg.merge_to_local_probability = 1.0;
    for (int trial = 0; trial < 40; ++trial) {
        const int frames = 2 + trial % 4;
        const int n = 4 + trial % 9;
        const TokenMatrix chunk = random_chunk(frames, n, 4, rng);
        SeededRng mrng(static_cast<std::uint64_t>(trial));

        GlobalTokenState state;
        state.reset(trial);
        LocalMergeResult first = local_merge(chunk, cfg, mrng);
        global_merge(first.tokens, state, first.record, cfg, mrng);

        const TokenMatrix next_chunk = random_chunk(frames, n, 4, rng);
        LocalMergeResult second = local_merge(next_chunk, cfg, mrng);
        const TokenArray merged = global_merge(second.tokens, state, second.record, cfg, mrng);

        // Identity "attention": pass the merged values straight back.
        const TokenMatrix restored = unmerge_all(merged, second.record);
        REQUIRE(restored.frames() == frames);
        REQUIRE(restored.tokens_per_frame() == n);

        // The target frame comes back bit-identical (Replace keeps dst).
        const int k = second.record.target_frame;
        for (int i = 0; i < n; ++i) {
            REQUIRE(spans_equal(restored.token(k, i), next_chunk.token(k, i)));
        }
        // Unmerged non-target tokens come back bit-identical; merged ones
        // carry their local dst value from the target frame.
        std::vector<int> merged_to(static_cast<std::size_t>((frames - 1) * n), -1);
        for (const MatchEdge& e : second.record.local_map.edges) {
            merged_to[static_cast<std::size_t>(e.src)] = e.dst;
        }
        int flat = 0;
        for (int f = 0; f < frames; ++f) {
            if (f == k) {
                continue;
            }
            for (int i = 0; i < n; ++i, ++flat) {
                const int to = merged_to[static_cast<std::size_t>(flat)];
                if (to >= 0) {
                    REQUIRE(spans_equal(restored.token(f, i), next_chunk.token(k, to)));
                } else {
                    REQUIRE(spans_equal(restored.token(f, i), next_chunk.token(f, i)));
                }
            }
        }
    }
}

TEST_CASE("unmerge_all rejects mismatched channel counts") {
    SeededRng rng(16);
    const TokenMatrix chunk = random_chunk(2, 4, 4, rng);
    SeededRng mrng(1);
    const LocalMergeResult res = local_merge(chunk, VidToMeConfig{}, mrng);
    const TokenArray wrong(res.tokens.count(), 8);
    CHECK_THROWS_AS(unmerge_all(wrong, res.record), ConsistencyError);
}

TEST_CASE("match_shared uses the strongest edge across both streams") {
    // Stream a: src 0 matches dst 0 perfectly. Stream b: src 0 matches dst 1.
    // The shared map must pick, per src, the best edge over both streams.
    TokenArray src_a(2, 2, {1.0f, 0.0f, 0.0f, 1.0f});
    TokenArray dst_a(2, 2, {1.0f, 0.0f, 0.5f, 0.5f});
    TokenArray src_b(2, 2, {0.3f, 0.7f, 1.0f, 0.0f});
    TokenArray dst_b(2, 2, {-0.7f, 0.3f, 0.3f, 0.7f});

    const MatchMap map = match_shared(src_a, dst_a, src_b, dst_b, 2);
    REQUIRE(map.edge_count() == 2);
    for (const MatchEdge& e : map.edges) {
        double best = -2.0;
        int best_j = 0;
        for (int j = 0; j < 2; ++j) {
            const double s =
                std::max(cosine_similarity(src_a.token(e.src), dst_a.token(j)),
                         cosine_similarity(src_b.token(e.src), dst_b.token(j)));
            if (s > best) {
                best = s;
                best_j = j;
            }
        }
        CHECK(e.dst == best_j);
        CHECK(e.similarity == best);
    }
}

TEST_CASE("match_shared validates set sizes and parameters") {
    SeededRng rng(17);
    const TokenArray a4 = random_tokens(4, 2, rng);
    const TokenArray a3 = random_tokens(3, 2, rng);
    const TokenArray b4 = random_tokens(4, 2, rng);
    CHECK_THROWS_AS(match_shared(a4, a3, a3, a3, 1), ConsistencyError);
    CHECK_THROWS_AS(match_shared(a4, TokenArray(0, 2), b4, TokenArray(0, 2), 0),
                    EmptyInputError);
    CHECK_THROWS_AS(match_shared(a4, a3, b4, a3, 5), ParameterError);
}

TEST_CASE("match_shared equals match when both streams are identical") {
    SeededRng rng(18);
    for (int trial = 0; trial < 50; ++trial) {
        const int s = 1 + rng.uniform_index(20);
        const int d = 1 + rng.uniform_index(20);
        const TokenArray src = random_tokens(s, 4, rng);
        const TokenArray dst = random_tokens(d, 4, rng);
        const int kept = rng.uniform_index(s + 1);
        const MatchMap shared = match_shared(src, dst, src, dst, kept);
        const MatchMap plain = match(src, dst, kept);
        REQUIRE(shared.edge_count() == plain.edge_count());
        for (int i = 0; i < shared.edge_count(); ++i) {
            CHECK(shared.edges[static_cast<std::size_t>(i)].src ==
                  plain.edges[static_cast<std::size_t>(i)].src);
            CHECK(shared.edges[static_cast<std::size_t>(i)].dst ==
                  plain.edges[static_cast<std::size_t>(i)].dst);
        }
    }
}
