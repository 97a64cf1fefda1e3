#pragma once

#include "vidtome/tokens.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace vidtome {

// Learned projections of one self-attention site. All four are channels x
// channels, row-major, applied as row-vector times matrix.
struct AttentionWeights {
    int channels = 0;
    int head_count = 1;
    std::vector<float> wq, wk, wv, wo;

    // Deterministic uniform init in [-1, 1] / sqrt(channels).
    static AttentionWeights seeded(int channels, int head_count, std::uint64_t seed);
};

// Attention cost accounting.
//   score_entries: attention-score matrix elements computed (heads * L^2 per item)
//   macs:          multiply-accumulates in the four projections and the two
//                  score/context products (4*L*C^2 + 2*L^2*C per item)
//   peak_buffer:   max simultaneously live intermediate elements; the
//                  implementation keeps Q, K, V, one per-head score matrix
//                  and the context buffer, so per item this is 4*L*C + L^2
// Totals over a batch: entries and macs add up, peak takes the max (items
// run sequentially, buffers are released in between).
struct CostReport {
    std::uint64_t score_entries = 0;
    std::uint64_t macs = 0;
    std::uint64_t peak_buffer = 0;

    void absorb(const CostReport& other) {
        score_entries += other.score_entries;
        macs += other.macs;
        peak_buffer = peak_buffer > other.peak_buffer ? peak_buffer : other.peak_buffer;
    }

    bool operator==(const CostReport&) const = default;
};

// Scaled dot-product self-attention with max-subtracted softmax, per head,
// output projected by wo. Permutation-equivariant over tokens. When `cost`
// is non-null the executing loops count every score entry and MAC and track
// live buffer sizes.
TokenArray self_attention(const TokenArray& tokens, const AttentionWeights& weights,
                          CostReport* cost = nullptr);

// Row-stochastic softmax over each row of a row-major L x L matrix, with
// max subtraction. Exposed for direct checking.
void softmax_rows(std::vector<double>& scores, int rows, int cols);

// exp(x) for x <= 0 built from plain IEEE-754 arithmetic only (Cody-Waite
// range reduction, degree-13 Taylor kernel), so results are identical on
// every platform and the softmax loop vectorizes. Arguments below about
// -708 saturate to exp(-708). Accurate to a few ulp against the libm exp.
double softmax_exp(double x);

// Analytic cost of attending to a batch of sequences. Must agree exactly
// with the instrumented counters of self_attention.
CostReport cost_of(std::span<const int> batch_shape, int channels, int head_count);

} // namespace vidtome
