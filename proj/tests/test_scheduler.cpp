#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "vidtome/errors.hpp"
#include "vidtome/rng.hpp"
#include "vidtome/scheduler.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <vector>

using namespace vidtome;

namespace {

// Chunks must tile [0, frame_count) in order; the first chunk may be short,
// interior chunks are full, the tail may be short.
void check_plan_structure(const ChunkPlan& plan, int frame_count, int chunk_size) {
    REQUIRE(plan.chunk_count() >= 1);
    REQUIRE(plan.chunks.front().begin == 0);
    REQUIRE(plan.chunks.back().end == frame_count);
    const int first_max = std::min(chunk_size, frame_count);
    REQUIRE(plan.chunks.front().length() >= 1);
    REQUIRE(plan.chunks.front().length() <= first_max);
    for (int i = 1; i < plan.chunk_count(); ++i) {
        REQUIRE(plan.chunks[static_cast<std::size_t>(i)].begin ==
                plan.chunks[static_cast<std::size_t>(i - 1)].end);
        const bool last = i == plan.chunk_count() - 1;
        const int len = plan.chunks[static_cast<std::size_t>(i)].length();
        if (last) {
            REQUIRE(len >= 1);
            REQUIRE(len <= chunk_size);
        } else {
            REQUIRE(len == chunk_size);
        }
    }

    std::vector<int> order = plan.processing_order;
    REQUIRE(static_cast<int>(order.size()) == plan.chunk_count());
    std::sort(order.begin(), order.end());
    for (int i = 0; i < plan.chunk_count(); ++i) {
        REQUIRE(order[static_cast<std::size_t>(i)] == i);
    }
}

} // namespace

TEST_CASE("plan_chunks tiles frames for every size combination") {
    for (int n = 1; n <= 64; ++n) {
        for (int b = 1; b <= 8; ++b) {
            for (const std::uint64_t seed : {0ULL, 1ULL, 2ULL}) {
                SeededRng rng(seed);
                const ChunkPlan plan = plan_chunks(n, b, OrderPolicy::sequential(), rng);
                check_plan_structure(plan, n, b);
            }
        }
    }
}

TEST_CASE("sequential policy keeps chunks in video order") {
    SeededRng rng(5);
    const ChunkPlan plan = plan_chunks(32, 4, OrderPolicy::sequential(), rng);
    for (int i = 0; i < plan.chunk_count(); ++i) {
        CHECK(plan.processing_order[static_cast<std::size_t>(i)] == i);
    }
}

TEST_CASE("random policy yields a permutation and differs across seeds") {
    int displaced = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        SeededRng rng(seed);
        const ChunkPlan plan = plan_chunks(40, 4, OrderPolicy::random(), rng);
        check_plan_structure(plan, 40, 4);
        for (int i = 0; i < plan.chunk_count(); ++i) {
            if (plan.processing_order[static_cast<std::size_t>(i)] != i) {
                ++displaced;
            }
        }
    }
    CHECK(displaced > 0); // 20 shuffles of ~11 chunks cannot all be identity
}

TEST_CASE("mixed policy displaces at most floor(fraction * chunks) positions") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        SeededRng rng(seed);
        const double fraction = 0.5;
        const ChunkPlan plan = plan_chunks(33, 4, OrderPolicy::mixed(fraction), rng);
        check_plan_structure(plan, 33, 4);
        const int k = static_cast<int>(fraction * plan.chunk_count());
        int displaced = 0;
        for (int i = 0; i < plan.chunk_count(); ++i) {
            if (plan.processing_order[static_cast<std::size_t>(i)] != i) {
                ++displaced;
            }
        }
        CHECK(displaced <= k);
    }
}

TEST_CASE("mixed policy with zero fraction is sequential") {
    SeededRng rng(6);
    const ChunkPlan plan = plan_chunks(32, 4, OrderPolicy::mixed(0.0), rng);
    for (int i = 0; i < plan.chunk_count(); ++i) {
        CHECK(plan.processing_order[static_cast<std::size_t>(i)] == i);
    }
}

TEST_CASE("plan_chunks is deterministic under a fixed seed") {
    SeededRng a(42), b(42);
    const ChunkPlan pa = plan_chunks(37, 5, OrderPolicy::random(), a);
    const ChunkPlan pb = plan_chunks(37, 5, OrderPolicy::random(), b);
    REQUIRE(pa.chunk_count() == pb.chunk_count());
    for (int i = 0; i < pa.chunk_count(); ++i) {
        CHECK(pa.chunks[static_cast<std::size_t>(i)].begin ==
              pb.chunks[static_cast<std::size_t>(i)].begin);
        CHECK(pa.processing_order[static_cast<std::size_t>(i)] ==
              pb.processing_order[static_cast<std::size_t>(i)]);
    }
}

TEST_CASE("plan_chunks validates its arguments") {
    SeededRng rng(1);
    CHECK_THROWS_AS(plan_chunks(0, 4, OrderPolicy::sequential(), rng), EmptyInputError);
    CHECK_THROWS_AS(plan_chunks(8, 0, OrderPolicy::sequential(), rng), ParameterError);
    CHECK_THROWS_AS(plan_chunks(8, 4, OrderPolicy::mixed(1.5), rng), ParameterError);
    CHECK_THROWS_AS(plan_chunks(8, 4, OrderPolicy::mixed(-0.1), rng), ParameterError);
}

TEST_CASE("first chunk length saturates at the frame count") {
    // With fewer frames than the chunk size the first draw caps at the frame
    // count; a shorter first chunk leaves a tail chunk behind it.
    std::set<int> seen;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        SeededRng rng(seed);
        const ChunkPlan plan = plan_chunks(3, 8, OrderPolicy::sequential(), rng);
        const int first = plan.chunks.front().length();
        CHECK(first >= 1);
        CHECK(first <= 3);
        CHECK(plan.chunks.back().end == 3);
        CHECK(plan.chunk_count() == (first == 3 ? 1 : 2));
        seen.insert(first);
    }
    CHECK(seen.size() == 3); // every admissible first length shows up
}

TEST_CASE("first_chunk_distribution counts lengths and covers [1, B]") {
    SeededRng rng(7);
    const std::uint64_t trials = 4000;
    const std::vector<std::uint64_t> hist = first_chunk_distribution(32, 4, trials, rng);
    REQUIRE(hist.size() == 5);
    CHECK(hist[0] == 0);
    std::uint64_t total = 0;
    for (int b = 1; b <= 4; ++b) {
        CHECK(hist[static_cast<std::size_t>(b)] > 0);
        total += hist[static_cast<std::size_t>(b)];
    }
    CHECK(total == trials);
    // Coarse uniformity: each bucket within 4 sigma of trials / 4.
    for (int b = 1; b <= 4; ++b) {
        const double freq = static_cast<double>(hist[static_cast<std::size_t>(b)]) / trials;
        CHECK(freq > 0.25 - 0.03);
        CHECK(freq < 0.25 + 0.03);
    }
}

TEST_CASE("first_chunk_distribution rejects zero trials") {
    SeededRng rng(8);
    CHECK_THROWS_AS(first_chunk_distribution(8, 4, 0, rng), ParameterError);
}

TEST_CASE("SeededRng reproduces the same stream per seed") {
    SeededRng a(123), b(123), c(124);
    bool all_equal = true;
    bool any_differs = false;
    for (int i = 0; i < 100; ++i) {
        const std::uint64_t x = a.next_u64();
        all_equal = all_equal && x == b.next_u64();
        any_differs = any_differs || x != c.next_u64();
    }
    CHECK(all_equal);
    CHECK(any_differs);
}

TEST_CASE("SeededRng matches the standard mt19937_64 reference output") {
    // The C++ standard fixes this engine's output: the 10000th draw from the
    // default seed 5489 is 9981545732273789042.
    SeededRng rng(5489);
    std::uint64_t x = 0;
    for (int i = 0; i < 10000; ++i) {
        x = rng.next_u64();
    }
    CHECK(x == 9981545732273789042ULL);
}

TEST_CASE("uniform_int covers its inclusive range without bias artifacts") {
    SeededRng rng(9);
    std::vector<int> counts(6, 0);
    for (int i = 0; i < 6000; ++i) {
        const std::uint64_t x = rng.uniform_int(2, 7);
        REQUIRE(x >= 2);
        REQUIRE(x <= 7);
        ++counts[static_cast<std::size_t>(x - 2)];
    }
    for (const int c : counts) {
        CHECK(c > 800);
        CHECK(c < 1200);
    }
    CHECK(rng.uniform_int(5, 5) == 5);
    CHECK_THROWS_AS(rng.uniform_int(6, 5), ParameterError);
}

TEST_CASE("uniform_index and uniform_real stay in range") {
    SeededRng rng(10);
    for (int i = 0; i < 1000; ++i) {
        const int idx = rng.uniform_index(7);
        REQUIRE(idx >= 0);
        REQUIRE(idx < 7);
        const double u = rng.uniform_real();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
    }
    CHECK_THROWS_AS(rng.uniform_index(0), ParameterError);
}

TEST_CASE("child streams are independent of parent consumption") {
    SeededRng parent1(55);
    SeededRng parent2(55);
    parent2.next_u64();
    parent2.next_u64();
    SeededRng c1 = parent1.child(3);
    SeededRng c2 = parent2.child(3);
    for (int i = 0; i < 20; ++i) {
        CHECK(c1.next_u64() == c2.next_u64());
    }
    SeededRng other = parent1.child(4);
    bool differs = false;
    SeededRng c3 = parent1.child(3);
    for (int i = 0; i < 20; ++i) {
        differs = differs || other.next_u64() != c3.next_u64();
    }
    CHECK(differs);
}

TEST_CASE("shuffle permutes in place deterministically") {
    std::vector<int> v(10);
    std::iota(v.begin(), v.end(), 0);
    SeededRng rng(77);
    rng.shuffle(v);
    std::vector<int> w = v;
    std::sort(w.begin(), w.end());
    for (int i = 0; i < 10; ++i) {
        CHECK(w[static_cast<std::size_t>(i)] == i);
    }
    std::vector<int> again(10);
    std::iota(again.begin(), again.end(), 0);
    SeededRng rng2(77);
    rng2.shuffle(again);
    CHECK(again == v);
}
