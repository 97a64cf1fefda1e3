#include "vidtome/cli.hpp"

#include "vidtome/benchmark.hpp"
#include "vidtome/errors.hpp"
#include "vidtome/flowmap.hpp"
#include "vidtome/harness.hpp"
#include "vidtome/latent_io.hpp"
#include "vidtome/log.hpp"
#include "vidtome/run_config.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>

namespace vidtome {

namespace {

int guarded(const std::function<void()>& body) {
    try {
        body();
        return kExitOk;
    } catch (const NumericError& e) {
        log_line(LogLevel::Error, e.what());
        return kExitNumeric;
    } catch (const ConsistencyError& e) {
        log_line(LogLevel::Error, e.what());
        return kExitNumeric;
    } catch (const Error& e) {
        log_line(LogLevel::Error, e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        log_line(LogLevel::Error, e.what());
        return kExitNumeric;
    }
}

VideoLatents load_input(const RunConfig& cfg) {
    const std::uint64_t seed = cfg.harness.merge.seed;
    if (cfg.input == "synthetic:noise") {
        return make_noise_video(cfg.frames, cfg.height, cfg.width, cfg.latent_channels, seed);
    }
    if (cfg.input == "synthetic:static") {
        return make_static_video(cfg.frames, cfg.height, cfg.width, cfg.latent_channels, seed);
    }
    if (cfg.input == "synthetic:drift") {
        return make_drifting_video(cfg.frames, cfg.height, cfg.width, cfg.latent_channels, seed,
                                   cfg.drift, cfg.jitter);
    }
    VideoLatents v = read_latents(cfg.input);
    if (v.channels() != cfg.latent_channels) {
        throw ConfigError("input latents have " + std::to_string(v.channels()) +
                          " channels but latent_channels is " +
                          std::to_string(cfg.latent_channels));
    }
    return v;
}

} // namespace

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed_override,
            std::optional<std::string> out_override) {
    return guarded([&] {
        RunConfig cfg = load_run_config(config_path);
        if (seed_override) {
            cfg.harness.merge.seed = *seed_override;
        }
        if (out_override) {
            cfg.output = *out_override;
        }
        const ToyDenoiser model(cfg.latent_channels, cfg.token_channels, cfg.head_count,
                                cfg.site_merge_flags, cfg.model_seed, cfg.output_gain);
        const NoiseSchedule schedule = cfg.schedule();
        const VideoLatents input = load_input(cfg);
        log_line(LogLevel::Info, "run: " + std::to_string(input.frames()) + " frames, " +
                                     std::to_string(schedule.steps()) + " steps, seed " +
                                     std::to_string(cfg.harness.merge.seed));

        const auto start = std::chrono::steady_clock::now();
        CostReport cost;
        MergeStats stats;
        log_line(LogLevel::Debug, "inverting to noise");
        const VideoLatents noisy = invert_video(input, model, schedule, cfg.harness, &cost);
        log_line(LogLevel::Debug, "generating from noise");
        SeededRng rng(cfg.harness.merge.seed);
        const VideoLatents output = generate_video(noisy, model, schedule, cfg.harness,
                                                   model.conditioning(), rng, &cost, &stats);
        const auto end = std::chrono::steady_clock::now();
        const double wall_ms =
            std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(end - start)
                .count();

        write_latents(cfg.output, output);

        nlohmann::json report;
        report["frames"] = output.frames();
        report["steps"] = schedule.steps();
        report["merging"] = cfg.harness.merging;
        report["per_frame_baseline"] = !cfg.harness.merging;
        report["merged_token_ratio"] = stats.ratio();
        report["reconstruction_error"] = relative_error(output, input);
        report["temporal_variance"] =
            output.frames() >= 2 ? nlohmann::json(temporal_variance(output)) : nlohmann::json();
        report["score_entries"] = cost.score_entries;
        report["macs"] = cost.macs;
        report["peak_buffer"] = cost.peak_buffer;
        report["wall_ms"] = wall_ms;
        report["output"] = cfg.output;
        std::cout << report.dump(2) << "\n";
    });
}

int cmd_bench(const std::string& config_path, const std::string& csv_path) {
    return guarded([&] {
        const RunConfig cfg = load_run_config(config_path);
        std::vector<BenchPoint> grid;
        for (const int b : cfg.bench_chunk_sizes) {
            for (const double p : cfg.bench_ratios) {
                for (const int n : cfg.bench_tokens) {
                    grid.push_back({b, p, n});
                }
            }
        }
        log_line(LogLevel::Info,
                 "bench: " + std::to_string(grid.size()) + " grid points, channels " +
                     std::to_string(cfg.token_channels));
        const std::vector<BenchRow> rows =
            run_benchmark(grid, cfg.token_channels, cfg.head_count, cfg.harness.merge.seed);
        std::cout << render_bench_table(rows);
        std::ofstream csv(csv_path, std::ios::trunc);
        if (!csv) {
            throw IoError("cannot open for writing: " + csv_path);
        }
        csv << render_bench_csv(rows);
        if (!csv) {
            throw IoError("write failed: " + csv_path);
        }
    });
}

int cmd_flowmap(const std::string& latents_path, int frame_a, int frame_b, double ratio,
                const std::string& out_path) {
    return guarded([&] {
        const VideoLatents v = read_latents(latents_path);
        const int tokens = v.height() * v.width();
        const std::span<const float> fa = v.frame(frame_a);
        const std::span<const float> fb = v.frame(frame_b);
        const TokenArray src(tokens, v.channels(), std::vector<float>(fa.begin(), fa.end()));
        const TokenArray dst(tokens, v.channels(), std::vector<float>(fb.begin(), fb.end()));
        const std::vector<FlowPixel> raster =
            flow_map_raster(src, dst, v.height(), v.width(), ratio);
        write_ppm(out_path, raster, v.height(), v.width());
        log_line(LogLevel::Info, "flowmap: wrote " + out_path);
    });
}

} // namespace vidtome
