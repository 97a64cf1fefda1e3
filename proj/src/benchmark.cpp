#include "vidtome/benchmark.hpp"

#include "vidtome/errors.hpp"
#include "vidtome/rng.hpp"
#include "vidtome/tokens.hpp"
#include "vidtome/vidtome.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>

namespace vidtome {

namespace {

TokenMatrix random_chunk(int frames, int tokens, int channels, SeededRng& rng) {
    std::vector<float> data(static_cast<std::size_t>(frames) * tokens * channels);
    for (float& v : data) {
        v = static_cast<float>(rng.uniform_real() * 2.0 - 1.0);
    }
    return TokenMatrix(frames, tokens, channels, std::move(data));
}

void append_number(std::string& out, std::uint64_t v) {
    char buf[24];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
}

void append_number(std::string& out, int v) {
    char buf[16];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
}

void append_number(std::string& out, double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
}

void append_mode_row(std::string& out, const BenchRow& row, const char* mode, int length,
                     const CostReport& report) {
    append_number(out, row.point.chunk_size);
    out.push_back(',');
    append_number(out, row.point.ratio);
    out.push_back(',');
    append_number(out, row.point.tokens);
    out.push_back(',');
    out.append(mode);
    out.push_back(',');
    append_number(out, length);
    out.push_back(',');
    append_number(out, report.score_entries);
    out.push_back(',');
    append_number(out, report.macs);
    out.push_back(',');
    append_number(out, report.peak_buffer);
    out.push_back(',');
    out.push_back(row.instrumented ? '1' : '0');
    out.push_back('\n');
}

} // namespace

int merged_sequence_length(int chunk_size, double ratio, int tokens) {
    if (chunk_size < 1 || tokens < 1) {
        throw ParameterError("merged_sequence_length: sizes must be positive");
    }
    if (ratio < 0.0 || ratio > 1.0) {
        throw ParameterError("merged_sequence_length: ratio must lie in [0, 1]");
    }
    if (chunk_size == 1) {
        return tokens;
    }
    const int cross = (chunk_size - 1) * tokens;
    const int local = chunk_size * tokens - static_cast<int>(std::floor(ratio * cross));
    return 2 * local - static_cast<int>(std::floor(ratio * local));
}

std::vector<BenchRow> run_benchmark(const std::vector<BenchPoint>& grid, int channels,
                                    int head_count, std::uint64_t seed, int instrument_limit) {
    if (grid.empty()) {
        throw EmptyInputError("run_benchmark: empty grid");
    }
    const AttentionWeights weights = AttentionWeights::seeded(channels, head_count, seed);
    const SeededRng master(seed);

    std::vector<BenchRow> rows;
    rows.reserve(grid.size());
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        const BenchPoint& pt = grid[gi];
        BenchRow row;
        row.point = pt;
        row.merged_length = merged_sequence_length(pt.chunk_size, pt.ratio, pt.tokens);
        row.per_frame =
            cost_of(std::vector<int>(static_cast<std::size_t>(pt.chunk_size), pt.tokens),
                    channels, head_count);
        const std::vector<int> extended_shape = {pt.chunk_size * pt.tokens};
        row.extended = cost_of(extended_shape, channels, head_count);
        const std::vector<int> merged_shape = {row.merged_length};
        row.merged = cost_of(merged_shape, channels, head_count);

        if (pt.tokens <= instrument_limit) {
            SeededRng rng = master.child(gi);
            const TokenMatrix chunk = random_chunk(pt.chunk_size, pt.tokens, channels, rng);

            CostReport per_frame_run;
            for (int f = 0; f < pt.chunk_size; ++f) {
                self_attention(chunk.frame_tokens(f), weights, &per_frame_run);
            }
            if (!(per_frame_run == row.per_frame)) {
                throw ConsistencyError(
                    "benchmark: per-frame instrumented cost diverges from the analytic row");
            }

            CostReport extended_run;
            self_attention(chunk.flatten(), weights, &extended_run);
            if (!(extended_run == row.extended)) {
                throw ConsistencyError(
                    "benchmark: extended instrumented cost diverges from the analytic row");
            }

            CostReport merged_run;
            if (pt.chunk_size == 1) {
                self_attention(chunk.frame_tokens(0), weights, &merged_run);
            } else {
                VidToMeConfig mc;
                mc.chunk_size = pt.chunk_size;
                mc.local_ratio = pt.ratio;
                mc.global_ratio = pt.ratio;
                mc.global_merging = true;
                GlobalTokenState state;
                state.reset(0);
                // First chunk seeds the global set; the second one shows the
                // steady-state merged length.
                LocalMergeResult first = local_merge(chunk, mc, rng);
                global_merge(first.tokens, state, first.record, mc, rng);
                const TokenMatrix next = random_chunk(pt.chunk_size, pt.tokens, channels, rng);
                LocalMergeResult second = local_merge(next, mc, rng);
                const TokenArray merged =
                    global_merge(second.tokens, state, second.record, mc, rng);
                if (merged.count() != row.merged_length) {
                    throw ConsistencyError(
                        "benchmark: merged sequence length diverges from the analytic count");
                }
                self_attention(merged, weights, &merged_run);
            }
            if (!(merged_run == row.merged)) {
                throw ConsistencyError(
                    "benchmark: merged instrumented cost diverges from the analytic row");
            }
            row.instrumented = true;
        }
        rows.push_back(row);
    }
    return rows;
}

std::string render_bench_table(const std::vector<BenchRow>& rows) {
    std::string out;
    out += "   B      p      N      M   entries(frame)     entries(ext)  entries(merged)  "
           "merged/frame\n";
    char line[256];
    for (const BenchRow& r : rows) {
        const double ratio = r.per_frame.score_entries == 0
                                 ? 0.0
                                 : static_cast<double>(r.merged.score_entries) /
                                       static_cast<double>(r.per_frame.score_entries);
        std::snprintf(line, sizeof(line), "%4d  %5.3f  %5d  %5d  %15llu  %15llu  %15llu  %12.4f\n",
                      r.point.chunk_size, r.point.ratio, r.point.tokens, r.merged_length,
                      static_cast<unsigned long long>(r.per_frame.score_entries),
                      static_cast<unsigned long long>(r.extended.score_entries),
                      static_cast<unsigned long long>(r.merged.score_entries), ratio);
        out += line;
    }
    return out;
}

std::string render_bench_csv(const std::vector<BenchRow>& rows) {
    std::string out = "chunk_size,ratio,tokens,mode,length,score_entries,macs,peak_buffer,"
                      "instrumented\n";
    for (const BenchRow& r : rows) {
        append_mode_row(out, r, "per_frame", r.point.tokens, r.per_frame);
        append_mode_row(out, r, "extended", r.point.chunk_size * r.point.tokens, r.extended);
        append_mode_row(out, r, "merged", r.merged_length, r.merged);
    }
    return out;
}

} // namespace vidtome
