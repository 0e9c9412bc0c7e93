#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace fishdet {

enum class Activation { Linear, Leaky };

std::string_view to_string(Activation a) noexcept;

/// Keys kept verbatim from a section but not interpreted at inference time.
using PassThroughKeys = std::map<std::string, std::string>;

struct NetParams {
    int width = 0;
    int height = 0;
    int channels = 3;
    int batch = 1;
    int subdivisions = 1;
    PassThroughKeys extra;

    bool operator==(const NetParams&) const = default;
};

struct ConvolutionalDef {
    int filters = 0;
    int size = 1;
    int stride = 1;
    bool pad = false;
    bool batch_normalize = false;
    Activation activation = Activation::Linear;
    PassThroughKeys extra;

    /// Spatial padding in pixels: size/2 when the pad flag is set.
    int padding() const noexcept { return pad ? size / 2 : 0; }

    bool operator==(const ConvolutionalDef&) const = default;
};

struct ShortcutDef {
    /// Relative offset as written in the config (negative).
    int from = -3;
    Activation activation = Activation::Linear;
    PassThroughKeys extra;

    bool operator==(const ShortcutDef&) const = default;
};

struct RouteDef {
    /// As written: negative values are relative, non-negative are absolute 0-based.
    std::vector<int> layers;
    PassThroughKeys extra;

    bool operator==(const RouteDef&) const = default;
};

struct UpsampleDef {
    int stride = 2;
    PassThroughKeys extra;

    bool operator==(const UpsampleDef&) const = default;
};

struct Anchor {
    float w = 0.f;
    float h = 0.f;

    bool operator==(const Anchor&) const = default;
};

struct YoloDef {
    std::vector<int> mask;
    std::vector<Anchor> anchors;
    int classes = 0;
    PassThroughKeys extra;

    bool operator==(const YoloDef&) const = default;
};

using LayerDef = std::variant<ConvolutionalDef, ShortcutDef, RouteDef, UpsampleDef, YoloDef>;

std::string_view layer_type_name(const LayerDef& layer);

/// Output dimensions of a layer, channels x height x width.
struct Shape {
    int channels = 0;
    int height = 0;
    int width = 0;

    bool operator==(const Shape&) const = default;
};

struct NetworkDef {
    NetParams net;
    std::vector<LayerDef> layers;

    /// Absolute 0-based indices of the layers a shortcut/route at `index` reads.
    std::vector<std::size_t> inputs_of(std::size_t index) const;
    std::vector<std::size_t> yolo_layers() const;
    std::vector<std::size_t> conv_layers() const;

    bool operator==(const NetworkDef&) const = default;
};

struct ConfigWarning {
    std::size_t section = 0;
    std::string key;
    std::string message;
};

struct ParseOptions {
    /// When nonzero, the number of YOLO heads must equal this.
    std::size_t required_heads = 0;
};

/// Parses the `[section]` / `key=value` network format, validating layer
/// references, shortcut shapes and head filter counts. Unknown keys are kept
/// in `extra` and reported through `warnings` (and the log).
NetworkDef parse_network_config(std::string_view text, const ParseOptions& options = {},
                                std::vector<ConfigWarning>* warnings = nullptr);

NetworkDef load_network_config(const std::string& path, const ParseOptions& options = {},
                               std::vector<ConfigWarning>* warnings = nullptr);

/// Canonical text form; keys are written in sorted order.
std::string serialize_network_config(const NetworkDef& def);

/// Shape of every layer's output for the configured input dims.
/// Throws ConfigError on inconsistent graphs.
std::vector<Shape> infer_shapes(const NetworkDef& def);

struct HeadFilterIssue {
    std::size_t layer = 0;  // 0-based index of the conv feeding the head
    int expected = 0;
    int actual = 0;
};

struct HeadFilterReport {
    std::vector<HeadFilterIssue> mismatches;
    /// Set when classes == 0: the formula holds vacuously but no class can be detected.
    bool degenerate = false;
    int expected_filters = 0;

    bool ok() const noexcept { return mismatches.empty() && !degenerate; }
};

constexpr int head_filters_for(int classes) noexcept { return (classes + 5) * 3; }

HeadFilterReport validate_head_filters(const NetworkDef& def, int classes);

}  // namespace fishdet
