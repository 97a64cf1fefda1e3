#include "vidtome/flowmap.hpp"

#include "vidtome/errors.hpp"
#include "vidtome/matching.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

namespace vidtome {

namespace {

std::uint8_t to_byte(double x) {
    const double v = x * 255.0;
    const double clamped = v < 0.0 ? 0.0 : (v > 255.0 ? 255.0 : v);
    return static_cast<std::uint8_t>(std::lround(clamped));
}

} // namespace

double flow_max_magnitude(int height, int width) {
    if (height < 1 || width < 1) {
        throw ParameterError("flow_max_magnitude: grid dimensions must be positive");
    }
    const double m = std::hypot(static_cast<double>(width - 1), static_cast<double>(height - 1));
    return m > 0.0 ? m : 1.0;
}

FlowPixel encode_flow(double dx, double dy, double max_magnitude) {
    if (!(max_magnitude > 0.0)) {
        throw ParameterError("encode_flow: max magnitude must be positive");
    }
    const double mag = std::hypot(dx, dy);
    if (mag == 0.0) {
        return {255, 255, 255};
    }
    double angle = std::atan2(dy, dx);
    if (angle < 0.0) {
        angle += 2.0 * std::numbers::pi;
    }
    double hue = angle * 3.0 / std::numbers::pi; // six sectors
    if (hue >= 6.0) {
        hue = 0.0;
    }
    double sat = mag / max_magnitude;
    sat = sat > 1.0 ? 1.0 : sat;

    const int sector = static_cast<int>(hue);
    const double f = hue - sector;
    const double p = 1.0 - sat;
    const double q = 1.0 - sat * f;
    const double t = 1.0 - sat * (1.0 - f);
    double r = 0.0, g = 0.0, b = 0.0;
    switch (sector) {
    case 0: r = 1.0; g = t; b = p; break;
    case 1: r = q; g = 1.0; b = p; break;
    case 2: r = p; g = 1.0; b = t; break;
    case 3: r = p; g = q; b = 1.0; break;
    case 4: r = t; g = p; b = 1.0; break;
    default: r = 1.0; g = p; b = q; break;
    }
    return {to_byte(r), to_byte(g), to_byte(b)};
}

std::optional<std::pair<double, double>> decode_flow(FlowPixel px, double max_magnitude) {
    if (!(max_magnitude > 0.0)) {
        throw ParameterError("decode_flow: max magnitude must be positive");
    }
    if (px == kUnmatchedPixel) {
        return std::nullopt;
    }
    const double r = px.r / 255.0;
    const double g = px.g / 255.0;
    const double b = px.b / 255.0;
    const double hi = r > g ? (r > b ? r : b) : (g > b ? g : b);
    const double lo = r < g ? (r < b ? r : b) : (g < b ? g : b);
    const double delta = hi - lo;
    if (delta == 0.0) {
        return std::make_pair(0.0, 0.0); // white: zero displacement
    }
    double hue = 0.0;
    if (hi == r) {
        hue = (g - b) / delta;
        if (hue < 0.0) {
            hue += 6.0;
        }
    } else if (hi == g) {
        hue = 2.0 + (b - r) / delta;
    } else {
        hue = 4.0 + (r - g) / delta;
    }
    const double sat = delta / hi;
    const double mag = sat * max_magnitude;
    const double angle = hue * std::numbers::pi / 3.0;
    return std::make_pair(std::cos(angle) * mag, std::sin(angle) * mag);
}

std::vector<FlowPixel> flow_map_raster(const TokenArray& src_frame, const TokenArray& dst_frame,
                                       int height, int width, double ratio) {
    if (height < 1 || width < 1) {
        throw ParameterError("flow_map_raster: grid dimensions must be positive");
    }
    if (src_frame.count() != height * width || dst_frame.count() != height * width) {
        throw DimensionError("flow_map_raster: token counts do not match the grid");
    }
    if (ratio < 0.0 || ratio > 1.0) {
        throw ParameterError("flow_map_raster: ratio must lie in [0, 1]");
    }
    const int kept = static_cast<int>(ratio * src_frame.count());
    const MatchMap map = match(src_frame, dst_frame, kept);
    const double max_mag = flow_max_magnitude(height, width);

    std::vector<FlowPixel> raster(static_cast<std::size_t>(height) * width, kUnmatchedPixel);
    for (const MatchEdge& e : map.edges) {
        const int sx = e.src % width;
        const int sy = e.src / width;
        const int dx = e.dst % width - sx;
        const int dy = e.dst / width - sy;
        raster[static_cast<std::size_t>(e.src)] = encode_flow(dx, dy, max_mag);
    }
    return raster;
}

void write_ppm(const std::string& path, const std::vector<FlowPixel>& raster, int height,
               int width) {
    if (height < 1 || width < 1 ||
        raster.size() != static_cast<std::size_t>(height) * width) {
        throw DimensionError("write_ppm: raster size does not match the dimensions");
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open for writing: " + path);
    }
    char header[64];
    const int len = std::snprintf(header, sizeof(header), "P6\n%d %d\n255\n", width, height);
    out.write(header, len);
    for (const FlowPixel& p : raster) {
        const char rgb[3] = {static_cast<char>(p.r), static_cast<char>(p.g),
                             static_cast<char>(p.b)};
        out.write(rgb, 3);
    }
    if (!out) {
        throw IoError("write failed: " + path);
    }
}

std::vector<FlowPixel> read_ppm(const std::string& path, int& height, int& width) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open for reading: " + path);
    }
    std::string magic;
    int w = 0, h = 0, maxval = 0;
    in >> magic >> w >> h >> maxval;
    if (!in || magic != "P6" || w < 1 || h < 1 || maxval != 255) {
        throw IoError("not a supported PPM file: " + path);
    }
    in.get(); // single whitespace after the header
    std::vector<FlowPixel> raster(static_cast<std::size_t>(w) * h);
    for (FlowPixel& p : raster) {
        char rgb[3];
        in.read(rgb, 3);
        if (!in) {
            throw IoError("PPM payload too short: " + path);
        }
        p = {static_cast<std::uint8_t>(rgb[0]), static_cast<std::uint8_t>(rgb[1]),
             static_cast<std::uint8_t>(rgb[2])};
    }
    height = h;
    width = w;
    return raster;
}

} // namespace vidtome
