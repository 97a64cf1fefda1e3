#pragma once

#include "vidtome/tokens.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace vidtome {

struct FlowPixel {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    bool operator==(const FlowPixel&) const = default;
};

// Unmatched token positions render as mid gray, zero displacement as white;
// everything else is a full-value HSV color whose hue is the displacement
// direction and whose saturation is magnitude / max_magnitude.
inline constexpr FlowPixel kUnmatchedPixel{128, 128, 128};

FlowPixel encode_flow(double dx, double dy, double max_magnitude);

// Inverse of encode_flow up to 8-bit quantization; nullopt for the unmatched
// sentinel, (0, 0) for white. Round the components to recover integer
// displacements.
std::optional<std::pair<double, double>> decode_flow(FlowPixel p, double max_magnitude);

// Displacement scale of a height x width token grid.
double flow_max_magnitude(int height, int width);

// Match the src frame's tokens against the dst frame's and color one pixel
// per src token position (row-major over the grid). kept_edges is
// floor(ratio * tokens); unmatched positions come out gray.
std::vector<FlowPixel> flow_map_raster(const TokenArray& src_frame, const TokenArray& dst_frame,
                                       int height, int width, double ratio);

void write_ppm(const std::string& path, const std::vector<FlowPixel>& raster, int height,
               int width);
std::vector<FlowPixel> read_ppm(const std::string& path, int& height, int& width);

} // namespace vidtome
