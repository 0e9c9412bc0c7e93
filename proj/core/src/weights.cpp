#include "fishdet/weights.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <random>

#include "fishdet/error.hpp"

namespace fishdet {

namespace {

template <typename T>
T read_le(const std::byte* p) {
    T v;
    std::memcpy(&v, p, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
        auto* b = reinterpret_cast<unsigned char*>(&v);
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    }
    return v;
}

template <typename T>
void write_le(std::vector<std::byte>& out, T v) {
    if constexpr (std::endian::native == std::endian::big) {
        auto* b = reinterpret_cast<unsigned char*>(&v);
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    }
    const auto* p = reinterpret_cast<const std::byte*>(&v);
    out.insert(out.end(), p, p + sizeof(T));
}

ConvParams blank_params(const ConvolutionalDef& c, int in_channels) {
    ConvParams p;
    p.filters = c.filters;
    p.in_channels = in_channels;
    p.size = c.size;
    p.batch_normalize = c.batch_normalize;
    const auto f = static_cast<std::size_t>(c.filters);
    p.biases.assign(f, 0.f);
    if (c.batch_normalize) {
        p.scales.assign(f, 1.f);
        p.rolling_mean.assign(f, 0.f);
        p.rolling_variance.assign(f, 1.f);
    }
    p.weights.assign(f * p.kernel_volume(), 0.f);
    return p;
}

/// Sequential float reader over the payload that follows the header.
class FloatCursor {
public:
    FloatCursor(std::span<const std::byte> payload) : payload_(payload) {}

    std::size_t remaining() const { return (payload_.size() - offset_) / sizeof(float); }
    std::size_t consumed() const { return offset_ / sizeof(float); }

    void read_into(std::vector<float>& dst, std::size_t layer) {
        for (std::size_t i = 0; i < dst.size(); ++i) {
            const float v = read_le<float>(payload_.data() + offset_);
            offset_ += sizeof(float);
            if (!std::isfinite(v)) {
                throw WeightsError(Errc::NonFiniteWeight,
                                   "layer " + std::to_string(layer + 1) + " holds a non-finite value at index " +
                                       std::to_string(consumed() - 1),
                                   0, 0, layer, consumed() - 1);
            }
            dst[i] = v;
        }
    }

private:
    std::span<const std::byte> payload_;
    std::size_t offset_ = 0;
};

}  // namespace

std::size_t ConvParams::float_count() const noexcept {
    const auto f = static_cast<std::size_t>(filters);
    return f + (batch_normalize ? 3 * f : 0) + f * kernel_volume();
}

WeightedNetwork make_initialized_network(const NetworkDef& def) {
    WeightedNetwork net;
    net.def = def;
    net.params.resize(def.layers.size());
    const auto shapes = infer_shapes(def);
    for (std::size_t i = 0; i < def.layers.size(); ++i) {
        if (const auto* c = std::get_if<ConvolutionalDef>(&def.layers[i])) {
            const int in_c = i == 0 ? def.net.channels : shapes[i - 1].channels;
            net.params[i] = blank_params(*c, in_c);
        }
    }
    return net;
}

std::size_t expected_weight_count(const NetworkDef& def) {
    const auto shapes = infer_shapes(def);
    std::size_t total = 0;
    for (std::size_t i = 0; i < def.layers.size(); ++i) {
        if (const auto* c = std::get_if<ConvolutionalDef>(&def.layers[i])) {
            const auto in_c = static_cast<std::size_t>(i == 0 ? def.net.channels : shapes[i - 1].channels);
            const auto f = static_cast<std::size_t>(c->filters);
            total += f + (c->batch_normalize ? 3 * f : 0) + f * in_c * c->size * c->size;
        }
    }
    return total;
}

WeightedNetwork load_weights(const NetworkDef& def, std::span<const std::byte> bytes, const LoadOptions& options) {
    if (bytes.size() < 12) {
        throw WeightsError(Errc::TruncatedFile, "weights header needs at least 12 bytes, got " + std::to_string(bytes.size()),
                           12, bytes.size());
    }
    WeightsHeader header;
    header.major = read_le<std::int32_t>(bytes.data());
    header.minor = read_le<std::int32_t>(bytes.data() + 4);
    header.revision = read_le<std::int32_t>(bytes.data() + 8);
    if (header.major < 0 || header.minor < 0 || header.major >= 1000 || header.minor >= 1000) {
        throw WeightsError(Errc::UnsupportedHeader, "unsupported weights version " + std::to_string(header.major) + "." +
                                                       std::to_string(header.minor));
    }
    const std::size_t header_size = header.byte_size();
    if (bytes.size() < header_size) {
        throw WeightsError(Errc::TruncatedFile, "weights header is incomplete", header_size, bytes.size());
    }
    header.images_seen = header.wide_seen() ? read_le<std::uint64_t>(bytes.data() + 12)
                                            : static_cast<std::uint64_t>(read_le<std::uint32_t>(bytes.data() + 12));

    const auto payload = bytes.subspan(header_size);
    if (payload.size() % sizeof(float) != 0) {
        throw WeightsError(Errc::TrailingBytes,
                           std::to_string(payload.size() % sizeof(float)) + " bytes do not form a whole float",
                           0, payload.size() % sizeof(float));
    }

    WeightedNetwork net = make_initialized_network(def);
    net.header = header;
    const std::size_t expected = expected_weight_count(def);
    FloatCursor cursor(payload);

    for (std::size_t i = 0; i < def.layers.size(); ++i) {
        if (!std::holds_alternative<ConvolutionalDef>(def.layers[i])) continue;
        auto& p = net.params[i];
        if (cursor.remaining() == 0 && options.allow_partial) break;
        if (cursor.remaining() < p.float_count()) {
            throw WeightsError(Errc::TruncatedFile,
                               "weights end inside layer " + std::to_string(i + 1) + ": expected " +
                                   std::to_string(expected) + " floats, file holds " +
                                   std::to_string(payload.size() / sizeof(float)),
                               expected, payload.size() / sizeof(float), i);
        }
        cursor.read_into(p.biases, i);
        if (p.batch_normalize) {
            cursor.read_into(p.scales, i);
            cursor.read_into(p.rolling_mean, i);
            cursor.read_into(p.rolling_variance, i);
        }
        cursor.read_into(p.weights, i);
        ++net.loaded_conv_layers;
    }
    if (cursor.remaining() != 0) {
        throw WeightsError(Errc::TrailingBytes,
                           std::to_string(cursor.remaining() * sizeof(float)) + " bytes left after the last layer",
                           expected, payload.size() / sizeof(float));
    }
    return net;
}

WeightedNetwork load_weights_file(const NetworkDef& def, const std::string& path, const LoadOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::IoError, "cannot open weights file '" + path + "'");
    std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return load_weights(def, std::as_bytes(std::span<const char>(raw)), options);
}

std::vector<std::byte> serialize_weights(const WeightedNetwork& net) {
    std::vector<std::byte> out;
    write_le(out, net.header.major);
    write_le(out, net.header.minor);
    write_le(out, net.header.revision);
    if (net.header.wide_seen()) {
        write_le(out, net.header.images_seen);
    } else {
        write_le(out, static_cast<std::uint32_t>(net.header.images_seen));
    }
    for (std::size_t i = 0; i < net.def.layers.size(); ++i) {
        if (!std::holds_alternative<ConvolutionalDef>(net.def.layers[i])) continue;
        const auto& p = net.params[i];
        auto put = [&](const std::vector<float>& v) {
            for (float f : v) write_le(out, f);
        };
        put(p.biases);
        if (p.batch_normalize) {
            put(p.scales);
            put(p.rolling_mean);
            put(p.rolling_variance);
        }
        put(p.weights);
    }
    return out;
}

void save_weights_file(const WeightedNetwork& net, const std::string& path) {
    const auto bytes = serialize_weights(net);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoError, "cannot write weights file '" + path + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(Errc::IoError, "short write to '" + path + "'");
}

WeightedNetwork make_random_network(const NetworkDef& def, std::uint64_t seed) {
    WeightedNetwork net = make_initialized_network(def);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> unit(-1.f, 1.f);
    for (auto& p : net.params) {
        if (p.filters == 0) continue;
        // uniform(-a, a) has variance a^2/3; a = sqrt(3/fan_in) gives unit-gain kernels
        const float bound = std::sqrt(3.f / static_cast<float>(p.kernel_volume()));
        for (auto& w : p.weights) w = bound * unit(rng);
        for (auto& b : p.biases) b = 0.01f * unit(rng);
        for (auto& s : p.scales) s = 1.f + 0.1f * unit(rng);
        for (auto& m : p.rolling_mean) m = 0.05f * unit(rng);
        for (auto& v : p.rolling_variance) v = 1.f + 0.1f * unit(rng);
    }
    return net;
}

}  // namespace fishdet
