#pragma once

#include "vidtome/attention.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace vidtome {

// One (B, p, N) grid point of the attention-cost comparison.
struct BenchPoint {
    int chunk_size = 1;   // B
    double ratio = 0.0;   // p, applied to both merge stages
    int tokens = 0;       // N per frame
};

struct BenchRow {
    BenchPoint point;
    int merged_length = 0; // post-merge sequence length M
    CostReport per_frame;  // B separate length-N attentions
    CostReport extended;   // one length-B*N attention
    CostReport merged;     // one length-M attention
    bool instrumented = false;
};

// Steady-state sequence length after both merge stages: the local stage
// keeps L = B*N - floor(p*(B-1)*N), the global stage merges two length-L
// sets into 2L - floor(p*L). A single-frame chunk merges nothing.
int merged_sequence_length(int chunk_size, double ratio, int tokens);

// Analytic cost rows for the grid; every point with N <= instrument_limit is
// additionally executed for real (including the merge pipeline for the
// merged mode) and the instrumented counters must agree exactly.
std::vector<BenchRow> run_benchmark(const std::vector<BenchPoint>& grid, int channels,
                                    int head_count, std::uint64_t seed,
                                    int instrument_limit = 64);

std::string render_bench_table(const std::vector<BenchRow>& rows);
std::string render_bench_csv(const std::vector<BenchRow>& rows);

} // namespace vidtome
