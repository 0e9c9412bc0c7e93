#include "fishdet/layers.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "fishdet/error.hpp"
#include "fishdet/parallel.hpp"

namespace fishdet {

namespace {

constexpr int kRowBlock = 4;
constexpr int kPanelWidth = 32;

struct ConvProblem {
    const Tensor* input = nullptr;
    ConvGeometry g;
    int out_h = 0;
    int out_w = 0;
    std::size_t k = 0;  // in_channels * size * size
    std::size_t n = 0;  // out_h * out_w
};

/// Gathers the im2col columns [n0, n0 + width) into a K x kPanelWidth block,
/// zero-filling columns past the end.
void pack_panel(const ConvProblem& p, std::size_t n0, int width, float* panel) {
    const Tensor& in = *p.input;
    const int size = p.g.size;
    int oy[kPanelWidth];
    int ox[kPanelWidth];
    for (int j = 0; j < width; ++j) {
        const auto n = n0 + static_cast<std::size_t>(j);
        oy[j] = static_cast<int>(n / static_cast<std::size_t>(p.out_w)) * p.g.stride - p.g.padding;
        ox[j] = static_cast<int>(n % static_cast<std::size_t>(p.out_w)) * p.g.stride - p.g.padding;
    }
    const bool pointwise = size == 1 && p.g.stride == 1 && p.g.padding == 0;
    std::size_t row = 0;
    for (int c = 0; c < in.channels(); ++c) {
        const auto plane = in.plane(c);
        if (pointwise) {
            float* dst = panel + row * kPanelWidth;
            std::memcpy(dst, plane.data() + n0, sizeof(float) * static_cast<std::size_t>(width));
            std::fill(dst + width, dst + kPanelWidth, 0.f);
            ++row;
            continue;
        }
        for (int ky = 0; ky < size; ++ky) {
            for (int kx = 0; kx < size; ++kx, ++row) {
                float* dst = panel + row * kPanelWidth;
                for (int j = 0; j < width; ++j) {
                    const int iy = oy[j] + ky;
                    const int ix = ox[j] + kx;
                    dst[j] = (iy >= 0 && iy < in.height() && ix >= 0 && ix < in.width())
                                 ? plane[static_cast<std::size_t>(iy) * in.width() + ix]
                                 : 0.f;
                }
                std::fill(dst + width, dst + kPanelWidth, 0.f);
            }
        }
    }
}

/// C[rows x width] = A[rows x K] * panel[K x kPanelWidth], summed over k in order.
template <int Rows>
void micro_kernel(const float* a, std::size_t lda, const float* panel, std::size_t k_total, float* c,
                  std::size_t ldc, int width) {
    float acc[Rows][kPanelWidth] = {};
    for (std::size_t k = 0; k < k_total; ++k) {
        const float* b = panel + k * kPanelWidth;
#pragma GCC unroll 4
        for (int r = 0; r < Rows; ++r) {
            const float av = a[static_cast<std::size_t>(r) * lda + k];
#pragma GCC ivdep
            for (int j = 0; j < kPanelWidth; ++j) acc[r][j] += av * b[j];
        }
    }
    for (int r = 0; r < Rows; ++r) {
        std::memcpy(c + static_cast<std::size_t>(r) * ldc, acc[r], sizeof(float) * static_cast<std::size_t>(width));
    }
}

void gemm_rows(const float* a, std::size_t m, std::size_t k, const float* panel, float* c, std::size_t ldc, int width) {
    std::size_t r = 0;
    for (; r + kRowBlock <= m; r += kRowBlock) {
        micro_kernel<kRowBlock>(a + r * k, k, panel, k, c + r * ldc, ldc, width);
    }
    switch (m - r) {
        case 3: micro_kernel<3>(a + r * k, k, panel, k, c + r * ldc, ldc, width); break;
        case 2: micro_kernel<2>(a + r * k, k, panel, k, c + r * ldc, ldc, width); break;
        case 1: micro_kernel<1>(a + r * k, k, panel, k, c + r * ldc, ldc, width); break;
        default: break;
    }
}

float leaky(float x) { return x > 0.f ? x : kLeakySlope * x; }

}  // namespace

void apply_activation(std::span<float> values, Activation activation) {
    if (activation == Activation::Leaky) {
        for (auto& v : values) v = leaky(v);
    }
}

Tensor conv_raw(const Tensor& input, const ConvParams& params, ConvGeometry geometry, const ExecOptions& options) {
    if (input.channels() != params.in_channels) {
        throw Error(Errc::ChannelMismatch, "convolution expects " + std::to_string(params.in_channels) +
                                               " input channels, got " + std::to_string(input.channels()));
    }
    if (geometry.size != params.size || geometry.stride <= 0) {
        throw Error(Errc::InvalidValue, "convolution geometry does not match its parameters");
    }
    ConvProblem p;
    p.input = &input;
    p.g = geometry;
    p.out_h = (input.height() + 2 * geometry.padding - geometry.size) / geometry.stride + 1;
    p.out_w = (input.width() + 2 * geometry.padding - geometry.size) / geometry.stride + 1;
    if (p.out_h <= 0 || p.out_w <= 0) throw Error(Errc::ShapeMismatch, "convolution output would be empty");
    p.k = params.kernel_volume();
    p.n = static_cast<std::size_t>(p.out_h) * p.out_w;

    Tensor out(params.filters, p.out_h, p.out_w);
    const auto panels = (p.n + kPanelWidth - 1) / kPanelWidth;
    const auto m = static_cast<std::size_t>(params.filters);
    float* c = out.data().data();
    const float* a = params.weights.data();

    // Work items are column panels; every output value is still reduced over
    // k = 0..K-1 by the same kernel, whichever worker claims its panel.
    const unsigned workers = resolve_workers(options.workers);
    const std::size_t chunk = std::max<std::size_t>(1, panels / (static_cast<std::size_t>(workers) * 4));
    const std::size_t items = (panels + chunk - 1) / chunk;
    parallel_for(items, workers, [&](std::size_t item) {
        std::vector<float> panel(p.k * kPanelWidth);
        const std::size_t first = item * chunk;
        const std::size_t last = std::min(panels, first + chunk);
        for (std::size_t pi = first; pi < last; ++pi) {
            const std::size_t n0 = pi * kPanelWidth;
            const int width = static_cast<int>(std::min<std::size_t>(kPanelWidth, p.n - n0));
            pack_panel(p, n0, width, panel.data());
            gemm_rows(a, m, p.k, panel.data(), c + n0, p.n, width);
        }
    });
    return out;
}

Tensor conv_forward(const Tensor& input, const ConvolutionalDef& def, const ConvParams& params,
                    const ExecOptions& options) {
    if (params.filters != def.filters || params.batch_normalize != def.batch_normalize) {
        throw Error(Errc::InvalidValue, "convolution parameters do not match the layer definition");
    }
    Tensor out = conv_raw(input, params, geometry_of(def), options);
    for (int f = 0; f < out.channels(); ++f) {
        auto plane = out.plane(f);
        const auto fi = static_cast<std::size_t>(f);
        if (def.batch_normalize) {
            const float inv_std = 1.f / std::sqrt(params.rolling_variance[fi] + kBatchNormEpsilon);
            const float mean = params.rolling_mean[fi];
            const float scale = params.scales[fi];
            const float bias = params.biases[fi];
            for (auto& v : plane) v = (v - mean) * inv_std * scale + bias;
        } else {
            const float bias = params.biases[fi];
            for (auto& v : plane) v += bias;
        }
    }
    apply_activation(out.data(), def.activation);
    if (!out.all_finite()) throw Error(Errc::NonFiniteActivation, "convolution produced a non-finite value");
    return out;
}

ConvParams fold_batch_norm(const ConvParams& params) {
    if (!params.batch_normalize) return params;
    ConvParams folded = params;
    folded.batch_normalize = false;
    folded.scales.clear();
    folded.rolling_mean.clear();
    folded.rolling_variance.clear();
    const auto kv = params.kernel_volume();
    for (std::size_t f = 0; f < static_cast<std::size_t>(params.filters); ++f) {
        const float g = params.scales[f] / std::sqrt(params.rolling_variance[f] + kBatchNormEpsilon);
        for (std::size_t i = 0; i < kv; ++i) folded.weights[f * kv + i] *= g;
        folded.biases[f] = params.biases[f] - params.rolling_mean[f] * g;
    }
    return folded;
}

Tensor shortcut_add(const Tensor& a, const Tensor& b, Activation activation) {
    if (a.shape() != b.shape()) throw Error(Errc::ShapeMismatch, "shortcut operands have different shapes");
    Tensor out = a;
    auto dst = out.data();
    const auto src = b.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    apply_activation(dst, activation);
    return out;
}

Tensor route_concat(std::span<const Tensor* const> inputs) {
    if (inputs.empty()) throw Error(Errc::InvalidValue, "route needs at least one input");
    const int h = inputs.front()->height();
    const int w = inputs.front()->width();
    int channels = 0;
    for (const auto* t : inputs) {
        if (t->height() != h || t->width() != w) {
            throw Error(Errc::ShapeMismatch, "route inputs must share spatial dims");
        }
        channels += t->channels();
    }
    std::vector<float> data;
    data.reserve(static_cast<std::size_t>(channels) * h * w);
    for (const auto* t : inputs) data.insert(data.end(), t->data().begin(), t->data().end());
    return Tensor(channels, h, w, std::move(data));
}

Tensor upsample_nearest(const Tensor& input, int factor) {
    if (factor <= 0) throw Error(Errc::InvalidValue, "upsample factor must be positive");
    Tensor out(input.channels(), input.height() * factor, input.width() * factor);
    for (int c = 0; c < input.channels(); ++c) {
        for (int y = 0; y < out.height(); ++y) {
            for (int x = 0; x < out.width(); ++x) out.at(c, y, x) = input.at(c, y / factor, x / factor);
        }
    }
    return out;
}

}  // namespace fishdet
