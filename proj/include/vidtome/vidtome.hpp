#pragma once

#include "vidtome/matching.hpp"
#include "vidtome/merge.hpp"
#include "vidtome/rng.hpp"
#include "vidtome/tokens.hpp"

#include <cstdint>
#include <optional>

namespace vidtome {

// Knobs of the cross-frame merging pipeline. Defaults follow the reference
// setting: chunks of 4 frames, local ratio 0.9, global ratio 0.8, and a fair
// coin for the global src/dst assignment.
struct VidToMeConfig {
    int chunk_size = 4;                       // B
    double local_ratio = 0.9;                 // fraction of cross-frame tokens merged into the target frame
    double global_ratio = 0.8;                // fraction of the global-merge src set merged
    double merge_to_local_probability = 0.5;  // probability that local tokens act as dst in the global merge
    MergeMode merge_mode = MergeMode::Replace;
    bool global_merging = true;               // ablation switch: skip the cross-chunk merge entirely
    std::uint64_t seed = 0;

    void validate() const;
};

// Cross-chunk token set carried through one denoising iteration. Empty until
// the first chunk seeds it; reset between iterations.
struct GlobalTokenState {
    TokenArray tokens;
    int iteration = 0;

    bool empty() const { return tokens.count() == 0; }
    void reset(int it) {
        tokens = TokenArray();
        iteration = it;
    }
};

// Everything needed to exactly invert one chunk's local + global merge.
struct MergeRecord {
    int frames = 0;
    int tokens_per_frame = 0;
    int channels = 0;
    int target_frame = 0;                // frame used as local dst
    MatchMap local_map;
    std::optional<MatchMap> global_map;  // absent for the first chunk or when global merging is off
    bool local_is_dst = false;           // global merge orientation (valid when global_map is set)
};

struct LocalMergeResult {
    TokenArray tokens;
    MergeRecord record;
};

// Merge the chunk's non-target frames into a uniformly drawn target frame.
// The src set is flattened frame-major in ascending frame order; the edge
// budget is floor(local_ratio * (B-1) * N). A single-frame chunk passes
// through unchanged with an empty map.
LocalMergeResult local_merge(const TokenMatrix& chunk, const VidToMeConfig& cfg, SeededRng& rng);

// Merge locally merged tokens with the running global token set and refresh
// that set. The first chunk of an iteration seeds the state and passes its
// tokens through. Later chunks draw the src/dst assignment (local as dst with
// probability merge_to_local_probability), merge with budget
// floor(global_ratio * |src set|), and replace the state with the local part
// of the pre-attention unmerge. Updates `record` with the global map.
TokenArray global_merge(const TokenArray& local, GlobalTokenState& state, MergeRecord& record,
                        const VidToMeConfig& cfg, SeededRng& rng);

// Two-stage unmerge of a post-attention token sequence back to the chunk's
// original frames x tokens shape. The global part of the first unmerge is
// dropped; the state was already refreshed inside global_merge.
TokenMatrix unmerge_all(const TokenArray& attention_output, const MergeRecord& record);

// One matching map shared by two parallel token streams (e.g. a source and an
// edit stream whose attention maps must stay aligned). Each src token's
// candidate edge is the strongest across both streams, and the keep cut uses
// that per-edge maximum.
MatchMap match_shared(const TokenArray& src_a, const TokenArray& dst_a, const TokenArray& src_b,
                      const TokenArray& dst_b, int kept_edges);

} // namespace vidtome
