#include "vidtome/run_config.hpp"

#include "vidtome/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>

namespace vidtome {

namespace {

using nlohmann::json;

[[noreturn]] void bad_key(const std::string& key, const std::string& expected) {
    throw ConfigError("config key '" + key + "' must be " + expected);
}

int as_int(const std::string& key, const json& v) {
    if (!v.is_number_integer()) {
        bad_key(key, "an integer");
    }
    const std::int64_t x = v.get<std::int64_t>();
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
        throw ConfigError("config key '" + key + "' is out of range");
    }
    return static_cast<int>(x);
}

double as_double(const std::string& key, const json& v) {
    if (!v.is_number()) {
        bad_key(key, "a number");
    }
    const double x = v.get<double>();
    if (!std::isfinite(x)) {
        throw ConfigError("config key '" + key + "' must be finite");
    }
    return x;
}

bool as_bool(const std::string& key, const json& v) {
    if (!v.is_boolean()) {
        bad_key(key, "a boolean");
    }
    return v.get<bool>();
}

std::string as_string(const std::string& key, const json& v) {
    if (!v.is_string()) {
        bad_key(key, "a string");
    }
    return v.get<std::string>();
}

std::uint64_t as_u64(const std::string& key, const json& v) {
    if (v.is_number_unsigned()) {
        return v.get<std::uint64_t>();
    }
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
        return static_cast<std::uint64_t>(v.get<std::int64_t>());
    }
    bad_key(key, "a non-negative integer");
}

std::vector<int> as_int_array(const std::string& key, const json& v) {
    if (!v.is_array()) {
        bad_key(key, "an array of integers");
    }
    std::vector<int> out;
    for (const json& e : v) {
        out.push_back(as_int(key, e));
    }
    return out;
}

std::vector<double> as_double_array(const std::string& key, const json& v) {
    if (!v.is_array()) {
        bad_key(key, "an array of numbers");
    }
    std::vector<double> out;
    for (const json& e : v) {
        out.push_back(as_double(key, e));
    }
    return out;
}

std::vector<bool> as_bool_array(const std::string& key, const json& v) {
    if (!v.is_array()) {
        bad_key(key, "an array of booleans");
    }
    std::vector<bool> out;
    for (const json& e : v) {
        out.push_back(as_bool(key, e));
    }
    return out;
}

MergeMode as_merge_mode(const std::string& key, const json& v) {
    const std::string s = as_string(key, v);
    if (s == "replace") {
        return MergeMode::Replace;
    }
    if (s == "mean") {
        return MergeMode::Mean;
    }
    throw ConfigError("config key '" + key + "' must be \"replace\" or \"mean\"");
}

OrderPolicyKind as_order_kind(const std::string& key, const json& v) {
    const std::string s = as_string(key, v);
    if (s == "sequential") {
        return OrderPolicyKind::Sequential;
    }
    if (s == "random") {
        return OrderPolicyKind::Random;
    }
    if (s == "mixed") {
        return OrderPolicyKind::Mixed;
    }
    throw ConfigError("config key '" + key + "' must be \"sequential\", \"random\" or \"mixed\"");
}

void check_unit_interval(double x, const char* name) {
    if (x < 0.0 || x > 1.0) {
        throw ConfigError(std::string(name) + " must lie in [0, 1]");
    }
}

void check_positive(int x, const char* name) {
    if (x < 1) {
        throw ConfigError(std::string(name) + " must be at least 1");
    }
}

} // namespace

NoiseSchedule RunConfig::schedule() const {
    if (!alphas.empty()) {
        NoiseSchedule s;
        s.alphas = alphas;
        return s;
    }
    return NoiseSchedule::linear(steps);
}

void RunConfig::validate() const {
    check_positive(harness.merge.chunk_size, "chunk_size");
    check_unit_interval(harness.merge.local_ratio, "local_ratio");
    check_unit_interval(harness.merge.global_ratio, "global_ratio");
    check_unit_interval(harness.merge.merge_to_local_probability, "merge_to_local_probability");
    check_unit_interval(harness.order.fraction_random, "order_fraction_random");
    check_positive(frames, "frames");
    check_positive(height, "height");
    check_positive(width, "width");
    check_positive(latent_channels, "latent_channels");
    check_positive(token_channels, "token_channels");
    check_positive(head_count, "head_count");
    if (token_channels % head_count != 0) {
        throw ConfigError("head_count must divide token_channels");
    }
    if (site_merge_flags.empty()) {
        throw ConfigError("site_merge_flags must not be empty");
    }
    if (!std::isfinite(output_gain)) {
        throw ConfigError("output_gain must be finite");
    }
    check_positive(steps, "steps");
    if (!alphas.empty()) {
        double prev = std::numeric_limits<double>::infinity();
        for (const double a : alphas) {
            if (!(a > 0.0) || a > 1.0) {
                throw ConfigError("alphas must lie in (0, 1]");
            }
            if (a >= prev) {
                throw ConfigError("alphas must be strictly decreasing");
            }
            prev = a;
        }
    }
    if (input.empty()) {
        throw ConfigError("input must not be empty");
    }
    if (output.empty()) {
        throw ConfigError("output must not be empty");
    }
    if (bench_chunk_sizes.empty() || bench_ratios.empty() || bench_tokens.empty()) {
        throw ConfigError("benchmark grid arrays must not be empty");
    }
    for (const int b : bench_chunk_sizes) {
        check_positive(b, "bench_chunk_sizes entries");
    }
    for (const double p : bench_ratios) {
        check_unit_interval(p, "bench_ratios entries");
    }
    for (const int n : bench_tokens) {
        check_positive(n, "bench_tokens entries");
    }
}

RunConfig parse_run_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        // Covers malformed text and values the parser cannot represent,
        // e.g. a number overflowing double.
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) {
        throw ConfigError("config must be a JSON object");
    }
    RunConfig cfg;
    for (const auto& [key, value] : j.items()) {
        if (key == "chunk_size") {
            cfg.harness.merge.chunk_size = as_int(key, value);
        } else if (key == "local_ratio") {
            cfg.harness.merge.local_ratio = as_double(key, value);
        } else if (key == "global_ratio") {
            cfg.harness.merge.global_ratio = as_double(key, value);
        } else if (key == "merge_to_local_probability") {
            cfg.harness.merge.merge_to_local_probability = as_double(key, value);
        } else if (key == "merge_mode") {
            cfg.harness.merge.merge_mode = as_merge_mode(key, value);
        } else if (key == "global_merging") {
            cfg.harness.merge.global_merging = as_bool(key, value);
        } else if (key == "seed") {
            cfg.harness.merge.seed = as_u64(key, value);
        } else if (key == "merging") {
            cfg.harness.merging = as_bool(key, value);
        } else if (key == "merge_during_inversion") {
            cfg.harness.merge_during_inversion = as_bool(key, value);
        } else if (key == "order") {
            cfg.harness.order.kind = as_order_kind(key, value);
        } else if (key == "order_fraction_random") {
            cfg.harness.order.fraction_random = as_double(key, value);
        } else if (key == "frames") {
            cfg.frames = as_int(key, value);
        } else if (key == "height") {
            cfg.height = as_int(key, value);
        } else if (key == "width") {
            cfg.width = as_int(key, value);
        } else if (key == "latent_channels") {
            cfg.latent_channels = as_int(key, value);
        } else if (key == "token_channels") {
            cfg.token_channels = as_int(key, value);
        } else if (key == "head_count") {
            cfg.head_count = as_int(key, value);
        } else if (key == "site_merge_flags") {
            cfg.site_merge_flags = as_bool_array(key, value);
        } else if (key == "model_seed") {
            cfg.model_seed = as_u64(key, value);
        } else if (key == "output_gain") {
            cfg.output_gain = as_double(key, value);
        } else if (key == "steps") {
            cfg.steps = as_int(key, value);
        } else if (key == "alphas") {
            cfg.alphas = as_double_array(key, value);
        } else if (key == "input") {
            cfg.input = as_string(key, value);
        } else if (key == "drift") {
            cfg.drift = as_double(key, value);
        } else if (key == "jitter") {
            cfg.jitter = as_double(key, value);
        } else if (key == "output") {
            cfg.output = as_string(key, value);
        } else if (key == "bench_chunk_sizes") {
            cfg.bench_chunk_sizes = as_int_array(key, value);
        } else if (key == "bench_ratios") {
            cfg.bench_ratios = as_double_array(key, value);
        } else if (key == "bench_tokens") {
            cfg.bench_tokens = as_int_array(key, value);
        } else {
            throw ConfigError("unknown config key: '" + key + "'");
        }
    }
    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) {
        throw IoError("read failed: " + path);
    }
    return parse_run_config(buf.str());
}

} // namespace vidtome
