#include "vidtome/matching.hpp"

#include "vidtome/errors.hpp"

#include <algorithm>
#include <vector>

namespace vidtome {

void MatchMap::validate() const {
    std::vector<bool> seen(static_cast<std::size_t>(src_size), false);
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const MatchEdge& e = edges[i];
        if (e.src < 0 || e.src >= src_size || e.dst < 0 || e.dst >= dst_size) {
            throw ConsistencyError("MatchMap: edge index out of range");
        }
        if (seen[static_cast<std::size_t>(e.src)]) {
            throw ConsistencyError("MatchMap: duplicate src index");
        }
        seen[static_cast<std::size_t>(e.src)] = true;
        if (i > 0 && edges[i - 1].similarity < e.similarity) {
            throw ConsistencyError("MatchMap: similarities not sorted");
        }
    }
}

namespace {

void check_match_args(const TokenArray& src, const TokenArray& dst, int kept_edges) {
    if (dst.empty()) {
        throw EmptyInputError("match: dst set is empty");
    }
    if (kept_edges < 0 || kept_edges > src.count()) {
        throw ParameterError("match: kept edge count must be in [0, |src|]");
    }
    if (!src.empty() && src.channels() != dst.channels()) {
        throw DimensionError("match: channel counts differ");
    }
}

// Total order on candidate edges: stronger first, ties by smaller src index.
bool stronger(const MatchEdge& a, const MatchEdge& b) {
    if (a.similarity != b.similarity) {
        return a.similarity > b.similarity;
    }
    return a.src < b.src;
}

} // namespace

MatchMap match(const TokenArray& src, const TokenArray& dst, int kept_edges) {
    check_match_args(src, dst, kept_edges);

    MatchMap map;
    map.src_size = src.count();
    map.dst_size = dst.count();
    if (kept_edges == 0 || src.empty()) {
        return map;
    }

    // Best dst per src, streaming over the similarity row.
    std::vector<MatchEdge> candidates;
    candidates.reserve(static_cast<std::size_t>(src.count()));
    for (int i = 0; i < src.count(); ++i) {
        const auto row = src.token(i);
        int best_j = 0;
        double best_sim = cosine_similarity(row, dst.token(0));
        for (int j = 1; j < dst.count(); ++j) {
            const double sim = cosine_similarity(row, dst.token(j));
            if (sim > best_sim) {
                best_sim = sim;
                best_j = j;
            }
        }
        candidates.push_back({i, best_j, best_sim});
    }

    std::sort(candidates.begin(), candidates.end(), stronger);
    candidates.resize(static_cast<std::size_t>(kept_edges));
    map.edges = std::move(candidates);
    return map;
}

MatchMap match_oracle(const TokenArray& src, const TokenArray& dst, int kept_edges) {
    check_match_args(src, dst, kept_edges);

    MatchMap map;
    map.src_size = src.count();
    map.dst_size = dst.count();
    if (kept_edges == 0 || src.empty()) {
        return map;
    }

    const SimilarityMatrix sims = similarity_matrix(src, dst);

    // One candidate edge per src row: the argmax, smallest dst index on ties.
    std::vector<MatchEdge> candidates;
    for (int i = 0; i < sims.rows; ++i) {
        MatchEdge best{static_cast<std::int32_t>(i), 0, sims.at(i, 0)};
        for (int j = 1; j < sims.cols; ++j) {
            if (sims.at(i, j) > best.similarity) {
                best.dst = j;
                best.similarity = sims.at(i, j);
            }
        }
        candidates.push_back(best);
    }

    // Full stable sort on similarity alone; candidates are already in
    // ascending src order, so ties stay ordered by src index.
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const MatchEdge& a, const MatchEdge& b) { return a.similarity > b.similarity; });

    candidates.resize(static_cast<std::size_t>(kept_edges));
    map.edges = std::move(candidates);
    return map;
}

} // namespace vidtome
