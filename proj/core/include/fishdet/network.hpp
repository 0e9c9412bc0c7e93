#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <vector>

#include "fishdet/layers.hpp"
#include "fishdet/tensor.hpp"
#include "fishdet/weights.hpp"

namespace fishdet {

struct ForwardResult {
    /// Raw (pre-decode) tensors feeding each YOLO layer, in network order.
    std::vector<Tensor> heads;
    /// Head layer indices (0-based) matching `heads`.
    std::vector<std::size_t> head_layers;
    /// Copies of the requested layer outputs, keyed by 0-based layer index.
    std::map<std::size_t, Tensor> probed;
};

/// Runs every layer in order. `probe` holds 0-based layer indices; user-facing
/// tools number layers from 1 and convert before calling.
ForwardResult forward(const WeightedNetwork& net, const Tensor& input, const std::set<std::size_t>& probe = {},
                      const ExecOptions& options = {});

}  // namespace fishdet
