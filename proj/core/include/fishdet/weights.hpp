#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fishdet/config.hpp"

namespace fishdet {

struct WeightsHeader {
    std::int32_t major = 0;
    std::int32_t minor = 2;
    std::int32_t revision = 0;
    std::uint64_t images_seen = 0;

    /// images_seen is stored as 64 bits from format version 0.2 on.
    bool wide_seen() const noexcept { return major * 10 + minor >= 2; }
    std::size_t byte_size() const noexcept { return 12 + (wide_seen() ? 8 : 4); }

    bool operator==(const WeightsHeader&) const = default;
};

/// Parameters of one convolutional layer. Kernel weights are laid out
/// [filters][in_channels][size][size], row-major.
struct ConvParams {
    int filters = 0;
    int in_channels = 0;
    int size = 0;
    bool batch_normalize = false;
    std::vector<float> biases;
    std::vector<float> scales;
    std::vector<float> rolling_mean;
    std::vector<float> rolling_variance;
    std::vector<float> weights;

    std::size_t float_count() const noexcept;
    std::size_t kernel_volume() const noexcept {
        return static_cast<std::size_t>(in_channels) * size * size;
    }

    bool operator==(const ConvParams&) const = default;
};

/// A parsed network plus its parameters. Immutable once loaded, so one
/// instance can be shared by any number of concurrent forward passes.
struct WeightedNetwork {
    NetworkDef def;
    WeightsHeader header;
    /// Indexed by layer; non-convolutional layers hold an empty block.
    std::vector<ConvParams> params;
    /// Number of convolutional layers actually read from the file.
    std::size_t loaded_conv_layers = 0;

    const ConvParams& conv(std::size_t layer) const { return params.at(layer); }
};

struct LoadOptions {
    /// Accept files that stop at a layer boundary (e.g. backbone-only files).
    bool allow_partial = false;
};

/// Zero kernels and biases, unit BN scales and variances, zero means.
WeightedNetwork make_initialized_network(const NetworkDef& def);

/// Float count (excluding the header) a complete weights file for `def` holds.
std::size_t expected_weight_count(const NetworkDef& def);

WeightedNetwork load_weights(const NetworkDef& def, std::span<const std::byte> bytes,
                             const LoadOptions& options = {});

WeightedNetwork load_weights_file(const NetworkDef& def, const std::string& path,
                                  const LoadOptions& options = {});

/// Writes the darknet binary layout; used to build fixtures and synthetic models.
std::vector<std::byte> serialize_weights(const WeightedNetwork& net);

void save_weights_file(const WeightedNetwork& net, const std::string& path);

/// Fills every parameter block from a seeded generator with fan-in scaled
/// kernel weights. Produces a deterministic network suited to smoke runs.
WeightedNetwork make_random_network(const NetworkDef& def, std::uint64_t seed);

}  // namespace fishdet
