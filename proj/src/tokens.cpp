#include "vidtome/tokens.hpp"

#include "vidtome/errors.hpp"

#include <cmath>
#include <cstring>
#include <string>

namespace vidtome {

namespace {

void check_shape(int count, int channels, const char* what) {
    if (count < 0 || channels < 1) {
        throw ParameterError(std::string(what) + ": invalid shape");
    }
}

// Validates before the element count is computed so a bad shape can never
// turn into an oversized allocation.
std::size_t checked_extent(int count, int channels, const char* what) {
    check_shape(count, channels, what);
    return static_cast<std::size_t>(count) * channels;
}

void check_finite(const std::vector<float>& data, const char* what) {
    for (float v : data) {
        if (!std::isfinite(v)) {
            throw NumericError(std::string(what) + ": non-finite value");
        }
    }
}

} // namespace

TokenArray::TokenArray(int count, int channels)
    : count_(count), channels_(channels),
      data_(checked_extent(count, channels, "TokenArray"), 0.0f) {}

TokenArray::TokenArray(int count, int channels, std::vector<float> data)
    : count_(count), channels_(channels), data_(std::move(data)) {
    check_shape(count, channels, "TokenArray");
    if (data_.size() != static_cast<std::size_t>(count_) * channels_) {
        throw DimensionError("TokenArray: data length does not match count * channels");
    }
}

std::span<const float> TokenArray::token(int i) const {
    return {data_.data() + static_cast<std::size_t>(i) * channels_, static_cast<std::size_t>(channels_)};
}

std::span<float> TokenArray::token(int i) {
    return {data_.data() + static_cast<std::size_t>(i) * channels_, static_cast<std::size_t>(channels_)};
}

TokenMatrix::TokenMatrix(int frames, int tokens_per_frame, int channels, std::vector<float> data)
    : frames_(frames), tokens_per_frame_(tokens_per_frame), channels_(channels), data_(std::move(data)) {
    if (frames_ < 1 || tokens_per_frame_ < 1 || channels_ < 1) {
        throw ParameterError("TokenMatrix: frames, tokens and channels must be >= 1");
    }
    const std::size_t expected =
        static_cast<std::size_t>(frames_) * tokens_per_frame_ * channels_;
    if (data_.size() != expected) {
        throw DimensionError("TokenMatrix: data length does not match frames * tokens * channels");
    }
    check_finite(data_, "TokenMatrix");
}

std::span<const float> TokenMatrix::token(int frame, int index) const {
    const std::size_t offset =
        (static_cast<std::size_t>(frame) * tokens_per_frame_ + index) * channels_;
    return {data_.data() + offset, static_cast<std::size_t>(channels_)};
}

TokenArray TokenMatrix::frame_tokens(int frame) const {
    if (frame < 0 || frame >= frames_) {
        throw ParameterError("TokenMatrix::frame_tokens: frame out of range");
    }
    const std::size_t frame_len = static_cast<std::size_t>(tokens_per_frame_) * channels_;
    std::vector<float> out(frame_len);
    std::memcpy(out.data(), data_.data() + frame * frame_len, frame_len * sizeof(float));
    return TokenArray(tokens_per_frame_, channels_, std::move(out));
}

TokenArray TokenMatrix::flatten() const {
    return TokenArray(frames_ * tokens_per_frame_, channels_, data_);
}

TokenArray TokenMatrix::flatten_excluding(int excluded) const {
    if (excluded < 0 || excluded >= frames_) {
        throw ParameterError("TokenMatrix::flatten_excluding: frame out of range");
    }
    const std::size_t frame_len = static_cast<std::size_t>(tokens_per_frame_) * channels_;
    std::vector<float> out;
    out.reserve(frame_len * (frames_ - 1));
    for (int f = 0; f < frames_; ++f) {
        if (f == excluded) {
            continue;
        }
        const float* begin = data_.data() + f * frame_len;
        out.insert(out.end(), begin, begin + frame_len);
    }
    return TokenArray((frames_ - 1) * tokens_per_frame_, channels_, std::move(out));
}

TokenMatrix add(const TokenMatrix& a, const TokenMatrix& b) {
    if (a.frames() != b.frames() || a.tokens_per_frame() != b.tokens_per_frame() ||
        a.channels() != b.channels()) {
        throw DimensionError("add(TokenMatrix): shape mismatch");
    }
    std::vector<float> out(a.data().size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = a.data()[i] + b.data()[i];
    }
    return TokenMatrix(a.frames(), a.tokens_per_frame(), a.channels(), std::move(out));
}

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size()) {
        throw DimensionError("cosine_similarity: vector lengths differ");
    }
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double x = a[i];
        const double y = b[i];
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    constexpr double kNormEpsilon = 1e-12;
    const double norm_a = std::sqrt(na);
    const double norm_b = std::sqrt(nb);
    if (norm_a < kNormEpsilon || norm_b < kNormEpsilon) {
        return 0.0;
    }
    return dot / (norm_a * norm_b);
}

SimilarityMatrix similarity_matrix(const TokenArray& src, const TokenArray& dst) {
    if (src.empty() || dst.empty()) {
        throw EmptyInputError("similarity_matrix: src and dst must be non-empty");
    }
    if (src.channels() != dst.channels()) {
        throw DimensionError("similarity_matrix: channel counts differ");
    }
    SimilarityMatrix m;
    m.rows = src.count();
    m.cols = dst.count();
    m.values.resize(static_cast<std::size_t>(m.rows) * m.cols);
    for (int i = 0; i < m.rows; ++i) {
        for (int j = 0; j < m.cols; ++j) {
            m.values[static_cast<std::size_t>(i) * m.cols + j] =
                cosine_similarity(src.token(i), dst.token(j));
        }
    }
    return m;
}

} // namespace vidtome
