#pragma once

#include "vidtome/harness.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace vidtome {

// Complete, deterministic description of a run. Parsed from a flat JSON
// object; unknown keys are rejected so typos fail loudly.
struct RunConfig {
    HarnessConfig harness;

    // Video / model shape.
    int frames = 8;
    int height = 16;
    int width = 16;
    int latent_channels = 4;
    int token_channels = 16;
    int head_count = 1;
    std::vector<bool> site_merge_flags = {true, true, false, false, true, true};
    std::uint64_t model_seed = 7;
    double output_gain = 0.02;

    // Schedule: explicit levels win over the linear default.
    int steps = 50;
    std::vector<double> alphas;

    // Input source: a latent file path or one of the synthetic directives
    // synthetic:noise, synthetic:static, synthetic:drift.
    std::string input = "synthetic:drift";
    double drift = 0.15;
    double jitter = 0.0;
    std::string output = "out.vtml";

    // Benchmark grid (bench command only).
    std::vector<int> bench_chunk_sizes = {1, 2, 4, 8};
    std::vector<double> bench_ratios = {0.5, 0.9};
    std::vector<int> bench_tokens = {16, 64, 256, 1000};

    NoiseSchedule schedule() const;
    void validate() const; // throws ConfigError with a specific message
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

} // namespace vidtome
