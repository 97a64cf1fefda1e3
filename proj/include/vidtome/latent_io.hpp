#pragma once

#include "vidtome/harness.hpp"

#include <cstdint>
#include <string>

namespace vidtome {

// On-disk frame-latent container: "VTML", format version, then n/H/W/C as
// little-endian u32, then the frame-major payload as little-endian float32.
// Byte layout is fixed regardless of host endianness.
inline constexpr char kLatentMagic[4] = {'V', 'T', 'M', 'L'};
inline constexpr std::uint32_t kLatentFormatVersion = 1;

void write_latents(const std::string& path, const VideoLatents& video);
VideoLatents read_latents(const std::string& path);

} // namespace vidtome
