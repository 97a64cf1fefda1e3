#include "vidtome/cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>

namespace {

// "i,j" -> two frame indices.
bool parse_frame_pair(const std::string& arg, int& a, int& b) {
    const std::size_t comma = arg.find(',');
    if (comma == std::string::npos) {
        return false;
    }
    const char* first = arg.data();
    const char* second = arg.data() + comma + 1;
    const auto ra = std::from_chars(first, first + comma, a);
    const auto rb = std::from_chars(second, arg.data() + arg.size(), b);
    return ra.ec == std::errc() && ra.ptr == first + comma && rb.ec == std::errc() &&
           rb.ptr == arg.data() + arg.size();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cross-frame token merging engine: DDIM harness, benchmarks, flow maps"};
    app.require_subcommand(1);

    std::string run_config;
    std::uint64_t run_seed = 0;
    std::string run_out;
    CLI::App* run = app.add_subcommand("run", "Invert and regenerate a video, write edited latents");
    run->add_option("--config", run_config, "JSON run configuration")->required();
    CLI::Option* seed_opt = run->add_option("--seed", run_seed, "Override the config seed");
    CLI::Option* out_opt = run->add_option("--out", run_out, "Override the output latent path");

    std::string bench_config;
    std::string bench_csv;
    CLI::App* bench = app.add_subcommand("bench", "Attention-cost grid: per-frame vs extended vs merged");
    bench->add_option("--config", bench_config, "JSON run configuration")->required();
    bench->add_option("--csv", bench_csv, "CSV output path")->required();

    std::string fm_in;
    std::string fm_frames;
    double fm_ratio = 0.9;
    std::string fm_out;
    CLI::App* flowmap = app.add_subcommand("flowmap", "Render the token-matching flow map of a frame pair");
    flowmap->add_option("--in", fm_in, "Input latent file")->required();
    flowmap->add_option("--frames", fm_frames, "src,dst frame pair, e.g. 0,1")->required();
    flowmap->add_option("--ratio", fm_ratio, "Merge ratio in [0, 1]")->required();
    flowmap->add_option("--out", fm_out, "Output PPM path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? vidtome::kExitOk : vidtome::kExitUsage;
    }

    if (run->parsed()) {
        return vidtome::cmd_run(run_config,
                                seed_opt->count() > 0 ? std::optional<std::uint64_t>(run_seed)
                                                      : std::nullopt,
                                out_opt->count() > 0 ? std::optional<std::string>(run_out)
                                                     : std::nullopt);
    }
    if (bench->parsed()) {
        return vidtome::cmd_bench(bench_config, bench_csv);
    }
    if (flowmap->parsed()) {
        int a = 0;
        int b = 0;
        if (!parse_frame_pair(fm_frames, a, b)) {
            std::fprintf(stderr, "--frames expects two comma-separated indices, e.g. 0,1\n");
            return vidtome::kExitUsage;
        }
        return vidtome::cmd_flowmap(fm_in, a, b, fm_ratio, fm_out);
    }
    return vidtome::kExitUsage;
}
