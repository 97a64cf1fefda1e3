#pragma once

#include "vidtome/attention.hpp"
#include "vidtome/rng.hpp"
#include "vidtome/scheduler.hpp"
#include "vidtome/tokens.hpp"
#include "vidtome/vidtome.hpp"

#include <cstdint>
#include <vector>

namespace vidtome {

// Diffusion noise levels alpha_1..alpha_T; alpha(0) is defined as 1.
struct NoiseSchedule {
    std::vector<double> alphas;

    // alpha_t = 1 - t / (steps + 1).
    static NoiseSchedule linear(int steps);

    int steps() const { return static_cast<int>(alphas.size()); }
    double alpha(int t) const;

    // Every level in (0, 1], strictly decreasing, at least one step.
    void validate() const;
};

enum class DiffusionDirection {
    Denoise, // t -> t-1
    Invert,  // t -> t+1
};

// A fixed-shape stack of frame latents (frames x H x W x C, frame-major).
// All values must be finite.
class VideoLatents {
public:
    VideoLatents() = default;
    VideoLatents(int frames, int height, int width, int channels);
    VideoLatents(int frames, int height, int width, int channels, std::vector<float> data);

    int frames() const { return frames_; }
    int height() const { return height_; }
    int width() const { return width_; }
    int channels() const { return channels_; }
    std::size_t frame_size() const {
        return static_cast<std::size_t>(height_) * width_ * channels_;
    }

    std::span<const float> frame(int f) const;
    std::span<float> frame(int f);
    const std::vector<float>& data() const { return data_; }
    std::vector<float>& data() { return data_; }

private:
    int frames_ = 0;
    int height_ = 0;
    int width_ = 0;
    int channels_ = 0;
    std::vector<float> data_;
};

// One self-attention block of the toy model.
struct AttentionSite {
    AttentionWeights weights;
    bool merge_enabled = true;
};

// Deterministic toy noise predictor: per-position linear embed into token
// space, additive conditioning vector, a stack of residual self-attention
// sites, and a small-gain linear read-out. No nonlinearity beyond softmax;
// the interesting behaviour lives entirely in the attention sites.
class ToyDenoiser {
public:
    ToyDenoiser(int latent_channels, int token_channels, int head_count,
                std::vector<bool> site_merge_flags, std::uint64_t seed,
                double output_gain = 0.02);

    // 4 latent channels, 16 token channels, one head, six sites with the
    // first two and last two merge-enabled.
    static ToyDenoiser standard(std::uint64_t seed);

    int latent_channels() const { return latent_channels_; }
    int token_channels() const { return token_channels_; }
    int site_count() const { return static_cast<int>(sites_.size()); }
    const AttentionSite& site(int i) const { return sites_[static_cast<std::size_t>(i)]; }
    const std::vector<float>& conditioning() const { return conditioning_; }

    // Embed the frames [chunk.begin, chunk.end) into token space and add the
    // conditioning vector to every token.
    TokenMatrix embed_chunk(const VideoLatents& z, ChunkRange chunk,
                            const std::vector<float>& conditioning) const;

    // Project tokens back to latent space (scaled by the output gain) and
    // write them into the chunk's frames of `out`.
    void unembed_chunk(const TokenMatrix& tokens, ChunkRange chunk, VideoLatents& out) const;

private:
    int latent_channels_ = 0;
    int token_channels_ = 0;
    std::vector<float> embed_;     // latent_channels x token_channels
    std::vector<float> unembed_;   // token_channels x latent_channels
    std::vector<float> conditioning_;
    std::vector<AttentionSite> sites_;
    double output_gain_ = 0.0;
};

// Full run description for the denoising loop.
struct HarnessConfig {
    VidToMeConfig merge;
    OrderPolicy order;
    bool merging = true;                 // master switch; false = per-frame attention everywhere
    bool merge_during_inversion = false; // inversion runs per-frame unless asked otherwise

    void validate() const;
};

// Aggregate over every merged attention call: post-merge sequence length vs
// the token count entering the merge.
struct MergeStats {
    std::uint64_t merged_tokens = 0;
    std::uint64_t original_tokens = 0;

    double ratio() const {
        return original_tokens == 0
                   ? 1.0
                   : static_cast<double>(merged_tokens) / static_cast<double>(original_tokens);
    }
};

// Decides whether a site applies the merge path for the given run config.
// Zero ratios fall back to plain per-frame attention so that disabling both
// merges is exactly the per-frame pipeline.
bool site_merge_active(bool site_enabled, const HarnessConfig& cfg);

// One residual attention site over one chunk. With merging: local merge into
// a random target frame, merge with the running global set, attend, two-stage
// unmerge, add. Without: per-frame attention, add.
TokenMatrix apply_site(const TokenMatrix& tokens, const AttentionWeights& weights,
                       bool merge_active, const VidToMeConfig& cfg, GlobalTokenState& state,
                       SeededRng& rng, CostReport* cost = nullptr, MergeStats* stats = nullptr);

// One full noise prediction over all frames: draw a chunk plan from
// `iteration_rng`, reset one global token set per site, run every chunk in
// processing order through the model, and assemble the per-frame outputs.
VideoLatents predict_epsilon(const VideoLatents& z, const ToyDenoiser& model,
                             const std::vector<float>& conditioning, const HarnessConfig& cfg,
                             SeededRng& iteration_rng, int iteration, CostReport* cost = nullptr,
                             MergeStats* stats = nullptr);

// One deterministic DDIM update of all frames. Denoise steps t -> t-1
// (valid for t in [1, T]); Invert steps t -> t+1 (valid for t in [0, T-1]).
VideoLatents ddim_step(const VideoLatents& z, const VideoLatents& noise_prediction, int t,
                       const NoiseSchedule& schedule, DiffusionDirection direction);

// Map clean latents to their generating noise by walking the schedule
// upward. Each step solves for the latent whose own noise prediction maps
// back to the current one (fixed-point refinement), so a following
// generate_video pass retraces the trajectory almost exactly. Merging is
// applied only when the config enables it for inversion.
VideoLatents invert_video(const VideoLatents& video, const ToyDenoiser& model,
                          const NoiseSchedule& schedule, const HarnessConfig& cfg,
                          CostReport* cost = nullptr);

// Denoise from t = T down to 1. Per-iteration randomness comes from
// rng.child(t), which is what invert_video assumes when matching plans; pass
// SeededRng(cfg.merge.seed) to reproduce an inversion's trajectory.
VideoLatents generate_video(const VideoLatents& noisy, const ToyDenoiser& model,
                            const NoiseSchedule& schedule, const HarnessConfig& cfg,
                            const std::vector<float>& conditioning, SeededRng& rng,
                            CostReport* cost = nullptr, MergeStats* stats = nullptr);

// Mean squared difference between consecutive frames, averaged over all
// positions. Needs at least two frames.
double temporal_variance(const VideoLatents& video);

// Mean squared difference between two frames.
double frame_mse(const VideoLatents& a, int frame_a, const VideoLatents& b, int frame_b);

// ||a - b||_2 / ||b||_2 over all elements.
double relative_error(const VideoLatents& a, const VideoLatents& b);

// Synthetic inputs.
VideoLatents make_constant_video(int frames, int height, int width, int channels, float value);
VideoLatents make_noise_video(int frames, int height, int width, int channels, std::uint64_t seed);
// One noise frame repeated n times.
VideoLatents make_static_video(int frames, int height, int width, int channels, std::uint64_t seed);
// Smooth pattern translating by `drift` token columns per frame plus optional
// per-frame jitter.
VideoLatents make_drifting_video(int frames, int height, int width, int channels,
                                 std::uint64_t seed, double drift, double jitter = 0.0);

} // namespace vidtome
