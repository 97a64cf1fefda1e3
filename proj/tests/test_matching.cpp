#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "vidtome/errors.hpp"
#include "vidtome/matching.hpp"
#include "vidtome/rng.hpp"

#include <cstring>
#include <vector>

using namespace vidtome;

namespace {

TokenArray random_tokens(int count, int channels, SeededRng& rng) {
    std::vector<float> data(static_cast<std::size_t>(count) * channels);
    for (float& v : data) {
        v = static_cast<float>(rng.uniform_real() * 2.0 - 1.0);
    }
    return TokenArray(count, channels, std::move(data));
}

bool same_map(const MatchMap& a, const MatchMap& b) {
    if (a.src_size != b.src_size || a.dst_size != b.dst_size ||
        a.edges.size() != b.edges.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.edges.size(); ++i) {
        if (a.edges[i].src != b.edges[i].src || a.edges[i].dst != b.edges[i].dst ||
            a.edges[i].similarity != b.edges[i].similarity) {
            return false;
        }
    }
    return true;
}

} // namespace

TEST_CASE("match links each kept src token to its most similar dst token") {
    // dst: two unit axes. src tokens point near one axis each.
    TokenArray dst(2, 2, {1.0f, 0.0f, 0.0f, 1.0f});
    TokenArray src(3, 2, {0.9f, 0.1f, 0.2f, 0.8f, -1.0f, -0.1f});
    const MatchMap map = match(src, dst, 3);
    map.validate();
    REQUIRE(map.edge_count() == 3);

    int dst_of[3] = {-1, -1, -1};
    for (const MatchEdge& e : map.edges) {
        dst_of[e.src] = e.dst;
    }
    CHECK(dst_of[0] == 0); // near x-axis
    CHECK(dst_of[1] == 1); // near y-axis
    CHECK(dst_of[2] == 1); // anti-parallel to x: y-axis is less bad
}

TEST_CASE("match keeps the strongest edges ordered by similarity") {
    TokenArray dst(1, 2, {1.0f, 0.0f});
    // Similarities to dst: 1.0, ~0.707, 0.0.
    TokenArray src(3, 2, {2.0f, 0.0f, 1.0f, 1.0f, 0.0f, 5.0f});
    const MatchMap map = match(src, dst, 2);
    map.validate();
    REQUIRE(map.edge_count() == 2);
    CHECK(map.edges[0].src == 0);
    CHECK(map.edges[0].similarity == doctest::Approx(1.0));
    CHECK(map.edges[1].src == 1);
    CHECK(map.edges[1].similarity == doctest::Approx(0.7071067811865475));
}

TEST_CASE("match breaks argmax ties toward the smallest dst index") {
    // Both dst tokens identical: every src token ties across them.
    TokenArray dst(2, 2, {3.0f, 4.0f, 3.0f, 4.0f});
    TokenArray src(2, 2, {3.0f, 4.0f, 6.0f, 8.0f});
    const MatchMap map = match(src, dst, 2);
    for (const MatchEdge& e : map.edges) {
        CHECK(e.dst == 0);
    }
}

TEST_CASE("match breaks keep-cut ties toward the smallest src index") {
    // Four identical src tokens, one dst: all four edges tie at similarity 1.
    TokenArray dst(1, 2, {1.0f, 2.0f});
    TokenArray src(4, 2, {1.0f, 2.0f, 1.0f, 2.0f, 1.0f, 2.0f, 1.0f, 2.0f});
    const MatchMap map = match(src, dst, 2);
    REQUIRE(map.edge_count() == 2);
    CHECK(map.edges[0].src == 0);
    CHECK(map.edges[1].src == 1);
}

TEST_CASE("match with zero kept edges returns an empty map") {
    SeededRng rng(7);
    const TokenArray src = random_tokens(5, 3, rng);
    const TokenArray dst = random_tokens(4, 3, rng);
    const MatchMap map = match(src, dst, 0);
    CHECK(map.edge_count() == 0);
    CHECK(map.src_size == 5);
    CHECK(map.dst_size == 4);
}

TEST_CASE("match accepts an empty src set") {
    SeededRng rng(8);
    const TokenArray dst = random_tokens(4, 3, rng);
    const MatchMap map = match(TokenArray(0, 3), dst, 0);
    CHECK(map.edge_count() == 0);
    CHECK(map.src_size == 0);
}

TEST_CASE("match rejects bad arguments") {
    SeededRng rng(9);
    const TokenArray src = random_tokens(3, 2, rng);
    const TokenArray dst = random_tokens(3, 2, rng);
    CHECK_THROWS_AS(match(src, TokenArray(0, 2), 1), EmptyInputError);
    CHECK_THROWS_AS(match(src, dst, -1), ParameterError);
    CHECK_THROWS_AS(match(src, dst, 4), ParameterError);
    const TokenArray wide = random_tokens(3, 5, rng);
    CHECK_THROWS_AS(match(wide, dst, 1), DimensionError);
}

TEST_CASE("MatchMap::validate rejects structural corruption") {
    MatchMap map;
    map.src_size = 2;
    map.dst_size = 2;

    map.edges = {{0, 5, 0.5}};
    CHECK_THROWS_AS(map.validate(), ConsistencyError);

    map.edges = {{0, 1, 0.5}, {0, 0, 0.4}};
    CHECK_THROWS_AS(map.validate(), ConsistencyError);

    map.edges = {{0, 1, 0.4}, {1, 0, 0.5}};
    CHECK_THROWS_AS(map.validate(), ConsistencyError);

    map.edges = {{1, 0, 0.5}, {0, 1, 0.4}};
    CHECK_NOTHROW(map.validate());
}

TEST_CASE("match equals the oracle on random instances") {
    SeededRng rng(1234);
    for (int trial = 0; trial < 200; ++trial) {
        const int channels = 1 + rng.uniform_index(6);
        const int s = 1 + rng.uniform_index(40);
        const int d = 1 + rng.uniform_index(40);
        TokenArray src = random_tokens(s, channels, rng);
        const TokenArray dst = random_tokens(d, channels, rng);
        // Inject duplicates to exercise tie-breaking.
        if (s >= 2 && d >= 1) {
            std::memcpy(src.token(1).data(), dst.token(0).data(),
                        sizeof(float) * static_cast<std::size_t>(channels));
        }
        const int kept = rng.uniform_index(s + 1);
        const MatchMap fast = match(src, dst, kept);
        const MatchMap slow = match_oracle(src, dst, kept);
        fast.validate();
        slow.validate();
        REQUIRE(same_map(fast, slow));
    }
}

TEST_CASE("match edges are non-increasing in similarity with distinct src indices") {
    SeededRng rng(77);
    const TokenArray src = random_tokens(50, 4, rng);
    const TokenArray dst = random_tokens(20, 4, rng);
    const MatchMap map = match(src, dst, 30);
    REQUIRE(map.edge_count() == 30);
    map.validate(); // sortedness + distinct src + index ranges
    for (const MatchEdge& e : map.edges) {
        // Each edge really is the argmax over dst for its src token.
        const double got = e.similarity;
        for (int j = 0; j < dst.count(); ++j) {
            CHECK(cosine_similarity(src.token(e.src), dst.token(j)) <= got);
        }
    }
}
