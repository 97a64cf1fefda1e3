#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace vidtome {

// Flat sequence of token vectors sharing one channel count. Working buffer
// for everything that flows through matching, merging and attention.
class TokenArray {
public:
    TokenArray() = default;
    TokenArray(int count, int channels);
    TokenArray(int count, int channels, std::vector<float> data);

    int count() const { return count_; }
    int channels() const { return channels_; }
    bool empty() const { return count_ == 0; }

    std::span<const float> token(int i) const;
    std::span<float> token(int i);

    const std::vector<float>& data() const { return data_; }
    std::vector<float>& data() { return data_; }

private:
    int count_ = 0;
    int channels_ = 0;
    std::vector<float> data_;
};

// Frame-indexed token stack: frames x tokens_per_frame x channels, row-major.
// Immutable once constructed; safe to share across threads.
class TokenMatrix {
public:
    TokenMatrix(int frames, int tokens_per_frame, int channels, std::vector<float> data);

    int frames() const { return frames_; }
    int tokens_per_frame() const { return tokens_per_frame_; }
    int channels() const { return channels_; }

    std::span<const float> token(int frame, int index) const;
    const std::vector<float>& data() const { return data_; }

    // One frame's tokens as a flat array (copy).
    TokenArray frame_tokens(int frame) const;

    // All tokens flattened frame-major (copy).
    TokenArray flatten() const;

    // Tokens of every frame except `excluded`, flattened frame-major in
    // ascending frame order (copy).
    TokenArray flatten_excluding(int excluded) const;

private:
    int frames_ = 0;
    int tokens_per_frame_ = 0;
    int channels_ = 0;
    std::vector<float> data_;
};

// Elementwise sum; shapes must agree.
TokenMatrix add(const TokenMatrix& a, const TokenMatrix& b);

// Cosine similarity of two equal-length vectors, accumulated in double.
// Returns 0 when either norm falls below 1e-12 so degenerate tokens match
// nothing preferentially.
double cosine_similarity(std::span<const float> a, std::span<const float> b);

// Dense pairwise cosine similarity, row-major rows x cols.
struct SimilarityMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> values;

    double at(int r, int c) const { return values[static_cast<std::size_t>(r) * cols + c]; }
};

SimilarityMatrix similarity_matrix(const TokenArray& src, const TokenArray& dst);

} // namespace vidtome
