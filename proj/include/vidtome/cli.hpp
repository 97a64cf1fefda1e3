#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace vidtome {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;   // bad arguments, config or input files
inline constexpr int kExitNumeric = 3; // numeric or internal-consistency failure

// Invert the input video to noise and regenerate it with merging per the
// config; writes the output latent file and prints a JSON metrics report.
int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed_override,
            std::optional<std::string> out_override);

// Attention-cost comparison over the config's (B, p, N) grid; prints a table
// and writes the CSV.
int cmd_bench(const std::string& config_path, const std::string& csv_path);

// Render the token-matching flow map between two frames of a latent file.
int cmd_flowmap(const std::string& latents_path, int frame_a, int frame_b, double ratio,
                const std::string& out_path);

} // namespace vidtome
