#pragma once

#include <span>

#include "fishdet/config.hpp"
#include "fishdet/tensor.hpp"
#include "fishdet/weights.hpp"

namespace fishdet {

inline constexpr float kBatchNormEpsilon = 1e-6f;
inline constexpr float kLeakySlope = 0.1f;

struct ExecOptions {
    /// 0 selects hardware concurrency. Results do not depend on this value.
    unsigned workers = 1;
};

struct ConvGeometry {
    int size = 1;
    int stride = 1;
    int padding = 0;
};

inline ConvGeometry geometry_of(const ConvolutionalDef& def) { return {def.size, def.stride, def.padding()}; }

/// Bare convolution sum (no bias, batch norm or activation), computed as
/// im2col followed by a row-partitioned GEMM. Each output value is summed
/// over the kernel in a fixed order, so the result is bitwise independent
/// of `options.workers`.
Tensor conv_raw(const Tensor& input, const ConvParams& params, ConvGeometry geometry,
                const ExecOptions& options = {});

/// Convolution, then batch norm (or bias), then activation.
Tensor conv_forward(const Tensor& input, const ConvolutionalDef& def, const ConvParams& params,
                    const ExecOptions& options = {});

/// Returns parameters whose plain conv+bias equals conv+batch-norm of `params`.
ConvParams fold_batch_norm(const ConvParams& params);

void apply_activation(std::span<float> values, Activation activation);

Tensor shortcut_add(const Tensor& a, const Tensor& b, Activation activation = Activation::Linear);

Tensor route_concat(std::span<const Tensor* const> inputs);

Tensor upsample_nearest(const Tensor& input, int factor);

inline Tensor upsample2x(const Tensor& input) { return upsample_nearest(input, 2); }

}  // namespace fishdet
