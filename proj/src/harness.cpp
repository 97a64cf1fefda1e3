#include "vidtome/harness.hpp"

#include "vidtome/errors.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>

namespace vidtome {

namespace {

constexpr int kMaxInversionRefinements = 8;
constexpr double kInversionTolerance = 1e-9;

void check_same_shape(const VideoLatents& a, const VideoLatents& b, const char* what) {
    if (a.frames() != b.frames() || a.height() != b.height() || a.width() != b.width() ||
        a.channels() != b.channels()) {
        throw DimensionError(std::string(what) + ": latent shapes do not match");
    }
}

} // namespace

NoiseSchedule NoiseSchedule::linear(int steps) {
    if (steps < 1) {
        throw ParameterError("NoiseSchedule: need at least one step");
    }
    NoiseSchedule s;
    s.alphas.reserve(static_cast<std::size_t>(steps));
    for (int t = 1; t <= steps; ++t) {
        s.alphas.push_back(1.0 - static_cast<double>(t) / (steps + 1));
    }
    return s;
}

double NoiseSchedule::alpha(int t) const {
    if (t == 0) {
        return 1.0;
    }
    if (t < 0 || t > steps()) {
        throw ScheduleError("NoiseSchedule: step index out of range");
    }
    return alphas[static_cast<std::size_t>(t) - 1];
}

void NoiseSchedule::validate() const {
    if (alphas.empty()) {
        throw ScheduleError("NoiseSchedule: empty schedule");
    }
    double prev = std::numeric_limits<double>::infinity();
    for (const double a : alphas) {
        if (!(a > 0.0) || a > 1.0) {
            throw ScheduleError("NoiseSchedule: noise levels must lie in (0, 1]");
        }
        if (a >= prev) {
            throw ScheduleError("NoiseSchedule: noise levels must be strictly decreasing");
        }
        prev = a;
    }
}

VideoLatents::VideoLatents(int frames, int height, int width, int channels)
    : frames_(frames), height_(height), width_(width), channels_(channels) {
    if (frames < 1 || height < 1 || width < 1 || channels < 1) {
        throw DimensionError("VideoLatents: all dimensions must be positive");
    }
    data_.assign(static_cast<std::size_t>(frames) * frame_size(), 0.0f);
}

VideoLatents::VideoLatents(int frames, int height, int width, int channels,
                           std::vector<float> data)
    : frames_(frames), height_(height), width_(width), channels_(channels),
      data_(std::move(data)) {
    if (frames < 1 || height < 1 || width < 1 || channels < 1) {
        throw DimensionError("VideoLatents: all dimensions must be positive");
    }
    if (data_.size() != static_cast<std::size_t>(frames) * frame_size()) {
        throw DimensionError("VideoLatents: payload size does not match the shape");
    }
    for (const float v : data_) {
        if (!std::isfinite(v)) {
            throw NumericError("VideoLatents: non-finite value");
        }
    }
}

std::span<const float> VideoLatents::frame(int f) const {
    if (f < 0 || f >= frames_) {
        throw ParameterError("VideoLatents: frame index out of range");
    }
    return {data_.data() + static_cast<std::size_t>(f) * frame_size(), frame_size()};
}

std::span<float> VideoLatents::frame(int f) {
    if (f < 0 || f >= frames_) {
        throw ParameterError("VideoLatents: frame index out of range");
    }
    return {data_.data() + static_cast<std::size_t>(f) * frame_size(), frame_size()};
}

ToyDenoiser::ToyDenoiser(int latent_channels, int token_channels, int head_count,
                         std::vector<bool> site_merge_flags, std::uint64_t seed,
                         double output_gain)
    : latent_channels_(latent_channels), token_channels_(token_channels),
      output_gain_(output_gain) {
    if (latent_channels < 1 || token_channels < 1) {
        throw ParameterError("ToyDenoiser: channel counts must be positive");
    }
    if (head_count < 1 || token_channels % head_count != 0) {
        throw ParameterError("ToyDenoiser: head count must divide token channels");
    }
    SeededRng rng(seed);
    const double embed_scale = 1.0 / std::sqrt(static_cast<double>(latent_channels));
    embed_.resize(static_cast<std::size_t>(latent_channels) * token_channels);
    for (float& v : embed_) {
        v = static_cast<float>((rng.uniform_real() * 2.0 - 1.0) * embed_scale);
    }
    const double unembed_scale = 1.0 / std::sqrt(static_cast<double>(token_channels));
    unembed_.resize(static_cast<std::size_t>(token_channels) * latent_channels);
    for (float& v : unembed_) {
        v = static_cast<float>((rng.uniform_real() * 2.0 - 1.0) * unembed_scale);
    }
    conditioning_.resize(static_cast<std::size_t>(token_channels));
    for (float& v : conditioning_) {
        v = static_cast<float>((rng.uniform_real() * 2.0 - 1.0) * 0.5);
    }
    sites_.reserve(site_merge_flags.size());
    for (const bool enabled : site_merge_flags) {
        AttentionSite site;
        site.weights = AttentionWeights::seeded(token_channels, head_count, rng.next_u64());
        site.merge_enabled = enabled;
        sites_.push_back(std::move(site));
    }
}

ToyDenoiser ToyDenoiser::standard(std::uint64_t seed) {
    return ToyDenoiser(4, 16, 1, {true, true, false, false, true, true}, seed);
}

TokenMatrix ToyDenoiser::embed_chunk(const VideoLatents& z, ChunkRange chunk,
                                     const std::vector<float>& conditioning) const {
    if (chunk.begin < 0 || chunk.end > z.frames() || chunk.length() < 1) {
        throw ParameterError("ToyDenoiser: chunk range out of bounds");
    }
    if (z.channels() != latent_channels_) {
        throw DimensionError("ToyDenoiser: latent channels do not match the model");
    }
    if (static_cast<int>(conditioning.size()) != token_channels_) {
        throw DimensionError("ToyDenoiser: conditioning length must equal token channels");
    }
    const int positions = z.height() * z.width();
    std::vector<float> out(static_cast<std::size_t>(chunk.length()) * positions * token_channels_);
    std::size_t w = 0;
    for (int f = chunk.begin; f < chunk.end; ++f) {
        const std::span<const float> frame = z.frame(f);
        for (int p = 0; p < positions; ++p) {
            const float* pixel = frame.data() + static_cast<std::size_t>(p) * latent_channels_;
            for (int co = 0; co < token_channels_; ++co) {
                double acc = conditioning[static_cast<std::size_t>(co)];
                for (int ci = 0; ci < latent_channels_; ++ci) {
                    acc += static_cast<double>(pixel[ci]) *
                           embed_[static_cast<std::size_t>(ci) * token_channels_ + co];
                }
                out[w++] = static_cast<float>(acc);
            }
        }
    }
    return TokenMatrix(chunk.length(), positions, token_channels_, std::move(out));
}

void ToyDenoiser::unembed_chunk(const TokenMatrix& tokens, ChunkRange chunk,
                                VideoLatents& out) const {
    if (chunk.begin < 0 || chunk.end > out.frames() || chunk.length() != tokens.frames()) {
        throw ParameterError("ToyDenoiser: chunk range does not match the token stack");
    }
    if (tokens.channels() != token_channels_ || out.channels() != latent_channels_ ||
        tokens.tokens_per_frame() != out.height() * out.width()) {
        throw DimensionError("ToyDenoiser: token stack shape does not match the latents");
    }
    for (int f = 0; f < tokens.frames(); ++f) {
        const std::span<float> frame = out.frame(chunk.begin + f);
        for (int p = 0; p < tokens.tokens_per_frame(); ++p) {
            const std::span<const float> token = tokens.token(f, p);
            for (int co = 0; co < latent_channels_; ++co) {
                double acc = 0.0;
                for (int ci = 0; ci < token_channels_; ++ci) {
                    acc += static_cast<double>(token[static_cast<std::size_t>(ci)]) *
                           unembed_[static_cast<std::size_t>(ci) * latent_channels_ + co];
                }
                frame[static_cast<std::size_t>(p) * latent_channels_ + co] =
                    static_cast<float>(acc * output_gain_);
            }
        }
    }
}

void HarnessConfig::validate() const {
    merge.validate();
    if (order.kind == OrderPolicyKind::Mixed &&
        (order.fraction_random < 0.0 || order.fraction_random > 1.0)) {
        throw ParameterError("HarnessConfig: mixed-order fraction must lie in [0, 1]");
    }
}

bool site_merge_active(bool site_enabled, const HarnessConfig& cfg) {
    if (!cfg.merging || !site_enabled) {
        return false;
    }
    return cfg.merge.local_ratio > 0.0 ||
           (cfg.merge.global_merging && cfg.merge.global_ratio > 0.0);
}

TokenMatrix apply_site(const TokenMatrix& tokens, const AttentionWeights& weights,
                       bool merge_active, const VidToMeConfig& cfg, GlobalTokenState& state,
                       SeededRng& rng, CostReport* cost, MergeStats* stats) {
    if (merge_active) {
        LocalMergeResult lm = local_merge(tokens, cfg, rng);
        TokenArray merged = global_merge(lm.tokens, state, lm.record, cfg, rng);
        if (stats) {
            stats->merged_tokens += static_cast<std::uint64_t>(merged.count());
            stats->original_tokens +=
                static_cast<std::uint64_t>(tokens.frames()) * tokens.tokens_per_frame();
        }
        TokenArray attended = self_attention(merged, weights, cost);
        TokenMatrix delta = unmerge_all(attended, lm.record);
        return add(tokens, delta);
    }
    std::vector<float> delta;
    delta.reserve(tokens.data().size());
    for (int f = 0; f < tokens.frames(); ++f) {
        TokenArray out = self_attention(tokens.frame_tokens(f), weights, cost);
        delta.insert(delta.end(), out.data().begin(), out.data().end());
    }
    return add(tokens, TokenMatrix(tokens.frames(), tokens.tokens_per_frame(), tokens.channels(),
                                   std::move(delta)));
}

VideoLatents predict_epsilon(const VideoLatents& z, const ToyDenoiser& model,
                             const std::vector<float>& conditioning, const HarnessConfig& cfg,
                             SeededRng& iteration_rng, int iteration, CostReport* cost,
                             MergeStats* stats) {
    if (z.frames() < 1) {
        throw EmptyInputError("predict_epsilon: no frames");
    }
    const ChunkPlan plan = plan_chunks(z.frames(), cfg.merge.chunk_size, cfg.order, iteration_rng);
    std::vector<GlobalTokenState> states(static_cast<std::size_t>(model.site_count()));
    for (GlobalTokenState& s : states) {
        s.reset(iteration);
    }
    VideoLatents eps(z.frames(), z.height(), z.width(), z.channels());
    for (const int ci : plan.processing_order) {
        const ChunkRange chunk = plan.chunks[static_cast<std::size_t>(ci)];
        TokenMatrix tokens = model.embed_chunk(z, chunk, conditioning);
        for (int s = 0; s < model.site_count(); ++s) {
            const AttentionSite& site = model.site(s);
            const bool active = site_merge_active(site.merge_enabled, cfg);
            tokens = apply_site(tokens, site.weights, active, cfg.merge,
                                states[static_cast<std::size_t>(s)], iteration_rng, cost, stats);
        }
        model.unembed_chunk(tokens, chunk, eps);
    }
    return eps;
}

VideoLatents ddim_step(const VideoLatents& z, const VideoLatents& noise_prediction, int t,
                       const NoiseSchedule& schedule, DiffusionDirection direction) {
    check_same_shape(z, noise_prediction, "ddim_step");
    const int steps = schedule.steps();
    int next = 0;
    if (direction == DiffusionDirection::Denoise) {
        if (t < 1 || t > steps) {
            throw ScheduleError("ddim_step: denoise step needs t in [1, T]");
        }
        next = t - 1;
    } else {
        if (t < 0 || t >= steps) {
            throw ScheduleError("ddim_step: invert step needs t in [0, T-1]");
        }
        next = t + 1;
    }
    const double alpha_t = schedule.alpha(t);
    const double alpha_next = schedule.alpha(next);
    if (alpha_t <= 0.0 || alpha_t > 1.0 || alpha_next <= 0.0 || alpha_next > 1.0) {
        throw ScheduleError("ddim_step: noise levels must lie in (0, 1]");
    }
    const double sqrt_at = std::sqrt(alpha_t);
    const double sqrt_1mat = std::sqrt(1.0 - alpha_t);
    const double sqrt_an = std::sqrt(alpha_next);
    const double sqrt_1man = std::sqrt(1.0 - alpha_next);

    std::vector<float> out(z.data().size());
    const std::vector<float>& zs = z.data();
    const std::vector<float>& es = noise_prediction.data();
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double x0 = (static_cast<double>(zs[i]) - sqrt_1mat * es[i]) / sqrt_at;
        out[i] = static_cast<float>(sqrt_an * x0 + sqrt_1man * es[i]);
    }
    return VideoLatents(z.frames(), z.height(), z.width(), z.channels(), std::move(out));
}

VideoLatents invert_video(const VideoLatents& video, const ToyDenoiser& model,
                          const NoiseSchedule& schedule, const HarnessConfig& cfg,
                          CostReport* cost) {
    cfg.validate();
    schedule.validate();
    HarnessConfig inversion_cfg = cfg;
    inversion_cfg.merging = cfg.merging && cfg.merge_during_inversion;
    const SeededRng master(cfg.merge.seed);

    VideoLatents z = video;
    for (int t = 0; t < schedule.steps(); ++t) {
        const int target = t + 1;
        auto predict = [&](const VideoLatents& at) {
            SeededRng iter_rng = master.child(static_cast<std::uint64_t>(target));
            return predict_epsilon(at, model, model.conditioning(), inversion_cfg, iter_rng,
                                   target, cost, nullptr);
        };
        // First guess evaluates the model at the current level, then the
        // estimate is refined until the inverted latent is self-consistent:
        // its own prediction must reproduce it through the same step.
        VideoLatents next = ddim_step(z, predict(z), t, schedule, DiffusionDirection::Invert);
        for (int k = 0; k < kMaxInversionRefinements; ++k) {
            VideoLatents refined =
                ddim_step(z, predict(next), t, schedule, DiffusionDirection::Invert);
            const double change = relative_error(refined, next);
            next = std::move(refined);
            if (change <= kInversionTolerance) {
                break;
            }
        }
        z = std::move(next);
    }
    return z;
}

VideoLatents generate_video(const VideoLatents& noisy, const ToyDenoiser& model,
                            const NoiseSchedule& schedule, const HarnessConfig& cfg,
                            const std::vector<float>& conditioning, SeededRng& rng,
                            CostReport* cost, MergeStats* stats) {
    cfg.validate();
    schedule.validate();
    VideoLatents z = noisy;
    for (int t = schedule.steps(); t >= 1; --t) {
        SeededRng iter_rng = rng.child(static_cast<std::uint64_t>(t));
        VideoLatents eps = predict_epsilon(z, model, conditioning, cfg, iter_rng, t, cost, stats);
        z = ddim_step(z, eps, t, schedule, DiffusionDirection::Denoise);
    }
    return z;
}

double temporal_variance(const VideoLatents& video) {
    if (video.frames() < 2) {
        throw EmptyInputError("temporal_variance: needs at least two frames");
    }
    const std::size_t fs = video.frame_size();
    double sum = 0.0;
    for (int f = 0; f + 1 < video.frames(); ++f) {
        const std::span<const float> a = video.frame(f);
        const std::span<const float> b = video.frame(f + 1);
        for (std::size_t i = 0; i < fs; ++i) {
            const double d = static_cast<double>(b[i]) - a[i];
            sum += d * d;
        }
    }
    return sum / (static_cast<double>(video.frames() - 1) * static_cast<double>(fs));
}

double frame_mse(const VideoLatents& a, int frame_a, const VideoLatents& b, int frame_b) {
    if (a.frame_size() != b.frame_size()) {
        throw DimensionError("frame_mse: frame shapes do not match");
    }
    const std::span<const float> fa = a.frame(frame_a);
    const std::span<const float> fb = b.frame(frame_b);
    double sum = 0.0;
    for (std::size_t i = 0; i < fa.size(); ++i) {
        const double d = static_cast<double>(fa[i]) - fb[i];
        sum += d * d;
    }
    return sum / static_cast<double>(fa.size());
}

double relative_error(const VideoLatents& a, const VideoLatents& b) {
    check_same_shape(a, b, "relative_error");
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) {
        const double d = static_cast<double>(a.data()[i]) - b.data()[i];
        num += d * d;
        den += static_cast<double>(b.data()[i]) * b.data()[i];
    }
    if (den == 0.0) {
        return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    return std::sqrt(num / den);
}

VideoLatents make_constant_video(int frames, int height, int width, int channels, float value) {
    VideoLatents v(frames, height, width, channels);
    for (float& x : v.data()) {
        x = value;
    }
    return v;
}

VideoLatents make_noise_video(int frames, int height, int width, int channels,
                              std::uint64_t seed) {
    VideoLatents v(frames, height, width, channels);
    SeededRng rng(seed);
    for (float& x : v.data()) {
        x = static_cast<float>(rng.uniform_real() * 2.0 - 1.0);
    }
    return v;
}

VideoLatents make_static_video(int frames, int height, int width, int channels,
                               std::uint64_t seed) {
    VideoLatents v(frames, height, width, channels);
    SeededRng rng(seed);
    const std::span<float> first = v.frame(0);
    for (float& x : first) {
        x = static_cast<float>(rng.uniform_real() * 2.0 - 1.0);
    }
    for (int f = 1; f < frames; ++f) {
        const std::span<float> dst = v.frame(f);
        for (std::size_t i = 0; i < dst.size(); ++i) {
            dst[i] = first[i];
        }
    }
    return v;
}

VideoLatents make_drifting_video(int frames, int height, int width, int channels,
                                 std::uint64_t seed, double drift, double jitter) {
    VideoLatents v(frames, height, width, channels);
    SeededRng rng(seed);
    std::size_t w = 0;
    for (int f = 0; f < frames; ++f) {
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) {
                for (int c = 0; c < channels; ++c) {
                    const double u = x + drift * f;
                    double val = std::sin(0.37 * u + 1.1 * c) * std::cos(0.23 * y - 0.6 * c);
                    if (jitter != 0.0) {
                        val += jitter * (rng.uniform_real() * 2.0 - 1.0);
                    }
                    v.data()[w++] = static_cast<float>(val);
                }
            }
        }
    }
    return v;
}

} // namespace vidtome
