#include "vidtome/latent_io.hpp"

#include "vidtome/errors.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <vector>

namespace vidtome {

namespace {

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
    out.push_back(static_cast<unsigned char>(v & 0xff));
    out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
    out.push_back(static_cast<unsigned char>((v >> 16) & 0xff));
    out.push_back(static_cast<unsigned char>((v >> 24) & 0xff));
}

std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

} // namespace

void write_latents(const std::string& path, const VideoLatents& video) {
    std::vector<unsigned char> bytes;
    bytes.reserve(24 + video.data().size() * 4);
    for (const char c : kLatentMagic) {
        bytes.push_back(static_cast<unsigned char>(c));
    }
    put_u32(bytes, kLatentFormatVersion);
    put_u32(bytes, static_cast<std::uint32_t>(video.frames()));
    put_u32(bytes, static_cast<std::uint32_t>(video.height()));
    put_u32(bytes, static_cast<std::uint32_t>(video.width()));
    put_u32(bytes, static_cast<std::uint32_t>(video.channels()));
    for (const float f : video.data()) {
        put_u32(bytes, std::bit_cast<std::uint32_t>(f));
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open for writing: " + path);
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError("write failed: " + path);
    }
}

VideoLatents read_latents(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open for reading: " + path);
    }
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    if (in.bad()) {
        throw IoError("read failed: " + path);
    }
    if (bytes.size() < 24) {
        throw IoError("latent file too short: " + path);
    }
    for (std::size_t i = 0; i < 4; ++i) {
        if (bytes[i] != static_cast<unsigned char>(kLatentMagic[i])) {
            throw IoError("not a latent file (bad magic): " + path);
        }
    }
    const std::uint32_t version = get_u32(bytes.data() + 4);
    if (version != kLatentFormatVersion) {
        throw IoError("unsupported latent file version: " + path);
    }
    const std::uint32_t n = get_u32(bytes.data() + 8);
    const std::uint32_t h = get_u32(bytes.data() + 12);
    const std::uint32_t w = get_u32(bytes.data() + 16);
    const std::uint32_t c = get_u32(bytes.data() + 20);
    const std::uint64_t count = static_cast<std::uint64_t>(n) * h * w * c;
    if (n == 0 || h == 0 || w == 0 || c == 0) {
        throw IoError("latent file header has a zero dimension: " + path);
    }
    if (bytes.size() != 24 + count * 4) {
        throw IoError("latent file payload does not match its header: " + path);
    }
    std::vector<float> data(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        data[i] = std::bit_cast<float>(get_u32(bytes.data() + 24 + i * 4));
    }
    try {
        return VideoLatents(static_cast<int>(n), static_cast<int>(h), static_cast<int>(w),
                            static_cast<int>(c), std::move(data));
    } catch (const Error& e) {
        throw IoError("latent file contents invalid (" + std::string(e.what()) + "): " + path);
    }
}

} // namespace vidtome
