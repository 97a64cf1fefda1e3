#include "vidtome/attention.hpp"

#include "vidtome/errors.hpp"
#include "vidtome/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

namespace vidtome {

AttentionWeights AttentionWeights::seeded(int channels, int head_count, std::uint64_t seed) {
    if (channels < 1 || head_count < 1 || channels % head_count != 0) {
        throw ParameterError("AttentionWeights: head count must divide channels");
    }
    AttentionWeights w;
    w.channels = channels;
    w.head_count = head_count;
    SeededRng rng(seed);
    const double scale = 1.0 / std::sqrt(static_cast<double>(channels));
    auto fill = [&](std::vector<float>& m) {
        m.resize(static_cast<std::size_t>(channels) * channels);
        for (float& v : m) {
            v = static_cast<float>((rng.uniform_real() * 2.0 - 1.0) * scale);
        }
    };
    fill(w.wq);
    fill(w.wk);
    fill(w.wv);
    fill(w.wo);
    return w;
}

namespace {

// Tracks live intermediate elements while a report is requested.
struct BufferMeter {
    std::uint64_t current = 0;
    std::uint64_t peak = 0;

    void alloc(std::size_t n) {
        current += n;
        if (current > peak) {
            peak = current;
        }
    }
    void release(std::size_t n) { current -= n; }
};

// out[L x C] = in[L x C] * w[C x C], accumulating in double. Each output
// element sums over ci in ascending order; the fast path only reorders the
// loops so the compiler can vectorize across output columns.
void project(const float* in, const float* w, float* out, int length, int channels,
             std::uint64_t* macs) {
    std::vector<double> acc(static_cast<std::size_t>(channels));
    for (int i = 0; i < length; ++i) {
        const float* row = in + static_cast<std::size_t>(i) * channels;
        float* dst = out + static_cast<std::size_t>(i) * channels;
        if (macs) {
            for (int co = 0; co < channels; ++co) {
                double sum = 0.0;
                for (int ci = 0; ci < channels; ++ci) {
                    sum += static_cast<double>(row[ci]) *
                           w[static_cast<std::size_t>(ci) * channels + co];
                    ++*macs;
                }
                dst[co] = static_cast<float>(sum);
            }
            continue;
        }
        std::fill(acc.begin(), acc.end(), 0.0);
        for (int ci = 0; ci < channels; ++ci) {
            const double v = row[ci];
            const float* wrow = w + static_cast<std::size_t>(ci) * channels;
            for (int co = 0; co < channels; ++co) {
                acc[static_cast<std::size_t>(co)] += v * wrow[co];
            }
        }
        for (int co = 0; co < channels; ++co) {
            dst[co] = static_cast<float>(acc[static_cast<std::size_t>(co)]);
        }
    }
}

void check_finite(const float* data, std::size_t n, const char* step) {
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(data[i])) {
            throw NumericError(std::string("self_attention: non-finite value after ") + step);
        }
    }
}

} // namespace

double softmax_exp(double x) {
    constexpr double kInvLn2 = 1.4426950408889634074;
    constexpr double kLn2Hi = 6.93147180369123816490e-01;
    constexpr double kLn2Lo = 1.90821492927058770002e-10;
    constexpr double kRoundMagic = 6755399441055744.0; // 1.5 * 2^52, rounds to integer
    x = x < -708.0 ? -708.0 : x;                       // stays in the normal-exponent range
    const double shifted = x * kInvLn2 + kRoundMagic;
    const double n = shifted - kRoundMagic;
    const double r = (x - n * kLn2Hi) - n * kLn2Lo;
    double p = 1.6059043836821614e-10; // 1/13!
    p = p * r + 2.08767569878681e-09;  // 1/12!
    p = p * r + 2.505210838544172e-08; // 1/11!
    p = p * r + 2.7557319223985893e-07;
    p = p * r + 2.755731922398589e-06;
    p = p * r + 2.48015873015873e-05;
    p = p * r + 1.984126984126984e-04;
    p = p * r + 1.3888888888888889e-03;
    p = p * r + 8.333333333333333e-03;
    p = p * r + 4.1666666666666664e-02;
    p = p * r + 1.6666666666666666e-01;
    p = p * r + 0.5;
    p = p * r + 1.0;
    p = p * r + 1.0;
    // The magic-rounded value carries n in its low mantissa bits, so the
    // integer drops out of a bit-pattern subtraction; no float-int convert.
    const std::int64_t n_bits =
        std::bit_cast<std::int64_t>(shifted) - std::bit_cast<std::int64_t>(kRoundMagic);
    const double scale = std::bit_cast<double>((n_bits + 1023) << 52);
    return p * scale;
}

void softmax_rows(std::vector<double>& scores, int rows, int cols) {
    for (int i = 0; i < rows; ++i) {
        double* row = scores.data() + static_cast<std::size_t>(i) * cols;
        double row_max = row[0];
        for (int j = 1; j < cols; ++j) {
            row_max = row[j] > row_max ? row[j] : row_max;
        }
        for (int j = 0; j < cols; ++j) {
            row[j] = softmax_exp(row[j] - row_max);
        }
        double sum = 0.0;
        for (int j = 0; j < cols; ++j) {
            sum += row[j];
        }
        for (int j = 0; j < cols; ++j) {
            row[j] /= sum;
        }
    }
}

TokenArray self_attention(const TokenArray& tokens, const AttentionWeights& weights,
                          CostReport* cost) {
    const int length = tokens.count();
    const int channels = tokens.channels();
    if (length < 1) {
        throw EmptyInputError("self_attention: empty token sequence");
    }
    if (channels != weights.channels) {
        throw DimensionError("self_attention: token channels do not match the weights");
    }
    const int heads = weights.head_count;
    if (heads < 1 || channels % heads != 0) {
        throw ParameterError("self_attention: head count must divide channels");
    }
    const int head_dim = channels / heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));

    BufferMeter meter;
    std::uint64_t* macs = cost ? &cost->macs : nullptr;
    const std::size_t seq_elems = static_cast<std::size_t>(length) * channels;

    std::vector<float> q(seq_elems), k(seq_elems), v(seq_elems);
    meter.alloc(3 * seq_elems);
    project(tokens.data().data(), weights.wq.data(), q.data(), length, channels, macs);
    project(tokens.data().data(), weights.wk.data(), k.data(), length, channels, macs);
    project(tokens.data().data(), weights.wv.data(), v.data(), length, channels, macs);
    check_finite(q.data(), seq_elems, "input projection");
    check_finite(k.data(), seq_elems, "input projection");
    check_finite(v.data(), seq_elems, "input projection");

    // One score matrix, reused across heads.
    std::vector<double> scores(static_cast<std::size_t>(length) * length);
    meter.alloc(scores.size());
    std::vector<float> context(seq_elems);
    meter.alloc(seq_elems);

    // Scratch reused across heads: transposed K slice plus row accumulators.
    std::vector<float> k_t(static_cast<std::size_t>(head_dim) * length);
    std::vector<double> row_acc(static_cast<std::size_t>(length));
    std::vector<double> ctx_acc(static_cast<std::size_t>(head_dim));

    for (int h = 0; h < heads; ++h) {
        const int offset = h * head_dim;
        if (macs) {
            for (int i = 0; i < length; ++i) {
                const float* qi = q.data() + static_cast<std::size_t>(i) * channels + offset;
                for (int j = 0; j < length; ++j) {
                    const float* kj = k.data() + static_cast<std::size_t>(j) * channels + offset;
                    double acc = 0.0;
                    for (int c = 0; c < head_dim; ++c) {
                        acc += static_cast<double>(qi[c]) * kj[c];
                        ++*macs;
                    }
                    scores[static_cast<std::size_t>(i) * length + j] = acc * scale;
                    ++cost->score_entries;
                }
            }
        } else {
            for (int j = 0; j < length; ++j) {
                for (int c = 0; c < head_dim; ++c) {
                    k_t[static_cast<std::size_t>(c) * length + j] =
                        k[static_cast<std::size_t>(j) * channels + offset + c];
                }
            }
            for (int i = 0; i < length; ++i) {
                const float* qi = q.data() + static_cast<std::size_t>(i) * channels + offset;
                std::fill(row_acc.begin(), row_acc.end(), 0.0);
                for (int c = 0; c < head_dim; ++c) {
                    const double qv = qi[c];
                    const float* krow = k_t.data() + static_cast<std::size_t>(c) * length;
                    for (int j = 0; j < length; ++j) {
                        row_acc[static_cast<std::size_t>(j)] += qv * krow[j];
                    }
                }
                double* out_row = scores.data() + static_cast<std::size_t>(i) * length;
                for (int j = 0; j < length; ++j) {
                    out_row[j] = row_acc[static_cast<std::size_t>(j)] * scale;
                }
            }
        }
        for (const double s : scores) {
            if (!std::isfinite(s)) {
                throw NumericError("self_attention: non-finite value after scores");
            }
        }
        softmax_rows(scores, length, length);

        for (int i = 0; i < length; ++i) {
            const double* weights_row = scores.data() + static_cast<std::size_t>(i) * length;
            float* ctx = context.data() + static_cast<std::size_t>(i) * channels + offset;
            if (macs) {
                for (int c = 0; c < head_dim; ++c) {
                    double acc = 0.0;
                    for (int j = 0; j < length; ++j) {
                        acc += weights_row[j] *
                               v[static_cast<std::size_t>(j) * channels + offset + c];
                        ++*macs;
                    }
                    ctx[c] = static_cast<float>(acc);
                }
                continue;
            }
            std::fill(ctx_acc.begin(), ctx_acc.end(), 0.0);
            for (int j = 0; j < length; ++j) {
                const double sj = weights_row[j];
                const float* vj = v.data() + static_cast<std::size_t>(j) * channels + offset;
                for (int c = 0; c < head_dim; ++c) {
                    ctx_acc[static_cast<std::size_t>(c)] += sj * vj[c];
                }
            }
            for (int c = 0; c < head_dim; ++c) {
                ctx[c] = static_cast<float>(ctx_acc[static_cast<std::size_t>(c)]);
            }
        }
    }
    check_finite(context.data(), seq_elems, "context");

    TokenArray out(length, channels);
    project(context.data(), weights.wo.data(), out.data().data(), length, channels, macs);
    check_finite(out.data().data(), seq_elems, "output projection");

    meter.release(scores.size());
    meter.release(4 * seq_elems);
    if (cost) {
        cost->peak_buffer = cost->peak_buffer > meter.peak ? cost->peak_buffer : meter.peak;
    }
    return out;
}

CostReport cost_of(std::span<const int> batch_shape, int channels, int head_count) {
    if (channels < 1 || head_count < 1 || channels % head_count != 0) {
        throw ParameterError("cost_of: head count must divide channels");
    }
    CostReport total;
    for (const int length : batch_shape) {
        if (length < 1) {
            throw ParameterError("cost_of: sequence lengths must be >= 1");
        }
        const std::uint64_t l = static_cast<std::uint64_t>(length);
        const std::uint64_t c = static_cast<std::uint64_t>(channels);
        CostReport item;
        item.score_entries = static_cast<std::uint64_t>(head_count) * l * l;
        item.macs = 4 * l * c * c + 2 * l * l * c;
        item.peak_buffer = 4 * l * c + l * l;
        total.absorb(item);
    }
    return total;
}

} // namespace vidtome
