#include "fishdet/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "fishdet/error.hpp"

namespace fishdet {

std::string_view to_string(Activation a) noexcept {
    return a == Activation::Leaky ? "leaky" : "linear";
}

std::string_view layer_type_name(const LayerDef& layer) {
    struct Visitor {
        std::string_view operator()(const ConvolutionalDef&) const { return "convolutional"; }
        std::string_view operator()(const ShortcutDef&) const { return "shortcut"; }
        std::string_view operator()(const RouteDef&) const { return "route"; }
        std::string_view operator()(const UpsampleDef&) const { return "upsample"; }
        std::string_view operator()(const YoloDef&) const { return "yolo"; }
    };
    return std::visit(Visitor{}, layer);
}

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

struct RawSection {
    std::string name;
    std::size_t line = 0;
    std::map<std::string, std::string> kv;
};

std::vector<RawSection> tokenize(std::string_view text) {
    std::vector<RawSection> sections;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;

        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError(Errc::MalformedConfig, sections.size(), "",
                                  "line " + std::to_string(line_no) + ": unterminated section header");
            }
            sections.push_back({std::string(trim(line.substr(1, line.size() - 2))), line_no, {}});
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError(Errc::MalformedConfig, sections.empty() ? 0 : sections.size() - 1, "",
                              "line " + std::to_string(line_no) + ": expected key=value");
        }
        if (sections.empty()) {
            throw ConfigError(Errc::MalformedConfig, 0, std::string(trim(line.substr(0, eq))),
                              "key before any section header");
        }
        sections.back().kv[std::string(trim(line.substr(0, eq)))] = std::string(trim(line.substr(eq + 1)));
    }
    return sections;
}

int parse_int(std::string_view value, std::size_t section, const std::string& key) {
    int out = 0;
    value = trim(value);
    const auto* begin = value.data();
    const auto* end = value.data() + value.size();
    if (!value.empty() && *begin == '+') ++begin;
    const auto [ptr, ec] = std::from_chars(begin, end, out);
    if (ec != std::errc{} || ptr != end || begin == end) {
        throw ConfigError(Errc::InvalidValue, section, key, "expected an integer, got '" + std::string(value) + "'");
    }
    return out;
}

float parse_float(std::string_view value, std::size_t section, const std::string& key) {
    float out = 0.f;
    value = trim(value);
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size() || value.empty()) {
        throw ConfigError(Errc::InvalidValue, section, key, "expected a number, got '" + std::string(value) + "'");
    }
    return out;
}

template <typename T, typename Fn>
std::vector<T> parse_list(std::string_view value, Fn&& parse_one) {
    std::vector<T> out;
    std::size_t pos = 0;
    while (pos <= value.size()) {
        auto comma = value.find(',', pos);
        if (comma == std::string_view::npos) comma = value.size();
        const auto item = trim(value.substr(pos, comma - pos));
        if (!item.empty()) out.push_back(parse_one(item));
        pos = comma + 1;
    }
    return out;
}

/// Hands out typed values for known keys and returns whatever is left.
class SectionReader {
public:
    SectionReader(const RawSection& raw, std::size_t index) : raw_(raw), index_(index) {}

    std::size_t index() const { return index_; }

    bool has(const std::string& key) const { return raw_.kv.count(key) != 0; }

    const std::string& require(const std::string& key) {
        auto it = raw_.kv.find(key);
        if (it == raw_.kv.end()) {
            throw ConfigError(Errc::MissingRequiredKey, index_, key,
                              "[" + raw_.name + "] requires '" + key + "'");
        }
        used_.insert(key);
        return it->second;
    }

    int require_int(const std::string& key) { return parse_int(require(key), index_, key); }

    int get_int(const std::string& key, int fallback) {
        return has(key) ? parse_int(require(key), index_, key) : fallback;
    }

    bool get_flag(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        const int v = parse_int(require(key), index_, key);
        if (v != 0 && v != 1) throw ConfigError(Errc::InvalidValue, index_, key, "expected 0 or 1");
        return v == 1;
    }

    Activation get_activation(const std::string& key) {
        if (!has(key)) return Activation::Linear;
        const auto& v = require(key);
        if (v == "leaky") return Activation::Leaky;
        if (v == "linear") return Activation::Linear;
        throw ConfigError(Errc::InvalidValue, index_, key, "unsupported activation '" + v + "'");
    }

    /// Remaining keys; anything not in `quiet` is reported as unknown.
    PassThroughKeys leftovers(const std::set<std::string>& quiet, std::vector<ConfigWarning>* warnings) const {
        PassThroughKeys out;
        for (const auto& [k, v] : raw_.kv) {
            if (used_.count(k)) continue;
            out[k] = v;
            if (quiet.count(k)) continue;
            const std::string msg = "ignoring unknown key '" + k + "' in [" + raw_.name + "]";
            spdlog::warn("config section {}: {}", index_, msg);
            if (warnings) warnings->push_back({index_, k, msg});
        }
        return out;
    }

private:
    const RawSection& raw_;
    std::size_t index_;
    std::set<std::string> used_;
};

const std::set<std::string> kNetTrainingKeys = {
    "momentum", "decay",     "angle",       "saturation", "exposure", "hue",    "learning_rate",
    "burn_in",  "max_batches", "policy",    "steps",      "scales",   "mosaic", "max_epochs"};
const std::set<std::string> kYoloTrainingKeys = {"jitter", "ignore_thresh", "truth_thresh", "random", "num"};
const std::set<std::string> kNone = {};

NetParams parse_net(SectionReader& r, std::vector<ConfigWarning>* warnings) {
    NetParams p;
    p.width = r.require_int("width");
    p.height = r.require_int("height");
    p.channels = r.get_int("channels", 3);
    p.batch = r.get_int("batch", 1);
    p.subdivisions = r.get_int("subdivisions", 1);
    if (p.width <= 0 || p.height <= 0 || p.channels <= 0) {
        throw ConfigError(Errc::InvalidValue, r.index(), "width", "input dims must be positive");
    }
    p.extra = r.leftovers(kNetTrainingKeys, warnings);
    return p;
}

LayerDef parse_layer(const RawSection& raw, SectionReader& r, std::vector<ConfigWarning>* warnings) {
    const auto& name = raw.name;
    if (name == "convolutional" || name == "conv") {
        ConvolutionalDef c;
        c.filters = r.require_int("filters");
        c.size = r.require_int("size");
        c.stride = r.get_int("stride", 1);
        c.pad = r.get_flag("pad", false);
        c.batch_normalize = r.get_flag("batch_normalize", false);
        c.activation = r.get_activation("activation");
        if (c.filters <= 0) throw ConfigError(Errc::InvalidValue, r.index(), "filters", "must be positive");
        if (c.size <= 0) throw ConfigError(Errc::InvalidValue, r.index(), "size", "must be positive");
        if (c.stride <= 0) throw ConfigError(Errc::InvalidValue, r.index(), "stride", "must be positive");
        c.extra = r.leftovers(kNone, warnings);
        return c;
    }
    if (name == "shortcut") {
        ShortcutDef s;
        s.from = r.require_int("from");
        s.activation = r.get_activation("activation");
        s.extra = r.leftovers(kNone, warnings);
        return s;
    }
    if (name == "route") {
        RouteDef rt;
        const auto& value = r.require("layers");
        rt.layers = parse_list<int>(value, [&](std::string_view v) { return parse_int(v, r.index(), "layers"); });
        if (rt.layers.empty()) throw ConfigError(Errc::InvalidValue, r.index(), "layers", "empty layer list");
        rt.extra = r.leftovers(kNone, warnings);
        return rt;
    }
    if (name == "upsample") {
        UpsampleDef u;
        u.stride = r.get_int("stride", 2);
        if (u.stride <= 0) throw ConfigError(Errc::InvalidValue, r.index(), "stride", "must be positive");
        u.extra = r.leftovers(kNone, warnings);
        return u;
    }
    if (name == "yolo") {
        YoloDef y;
        y.classes = r.require_int("classes");
        const auto values = parse_list<float>(r.require("anchors"), [&](std::string_view v) {
            return parse_float(v, r.index(), "anchors");
        });
        if (values.empty() || values.size() % 2 != 0) {
            throw ConfigError(Errc::InvalidValue, r.index(), "anchors", "expected an even number of values");
        }
        for (std::size_t i = 0; i < values.size(); i += 2) {
            if (!(values[i] > 0.f) || !(values[i + 1] > 0.f)) {
                throw ConfigError(Errc::InvalidValue, r.index(), "anchors", "anchor sizes must be positive");
            }
            y.anchors.push_back({values[i], values[i + 1]});
        }
        if (r.has("mask")) {
            y.mask = parse_list<int>(r.require("mask"), [&](std::string_view v) { return parse_int(v, r.index(), "mask"); });
        } else {
            for (std::size_t i = 0; i < y.anchors.size(); ++i) y.mask.push_back(static_cast<int>(i));
        }
        if (y.mask.size() != 3) {
            throw ConfigError(Errc::InvalidValue, r.index(), "mask", "each head predicts exactly 3 boxes per cell");
        }
        for (int m : y.mask) {
            if (m < 0 || static_cast<std::size_t>(m) >= y.anchors.size()) {
                throw ConfigError(Errc::InvalidValue, r.index(), "mask", "anchor index " + std::to_string(m) + " out of range");
            }
        }
        if (r.has("num")) {
            const int num = parse_int(raw.kv.at("num"), r.index(), "num");
            if (num != static_cast<int>(y.anchors.size())) {
                throw ConfigError(Errc::InvalidValue, r.index(), "num", "does not match the anchor count");
            }
        }
        y.extra = r.leftovers(kYoloTrainingKeys, warnings);
        return y;
    }
    throw ConfigError(Errc::UnknownSection, r.index(), "", "unsupported section [" + name + "]");
}

std::size_t resolve(int ref, std::size_t index) {
    const long long abs = ref < 0 ? static_cast<long long>(index) + ref : ref;
    if (abs < 0 || abs >= static_cast<long long>(index)) return static_cast<std::size_t>(-1);
    return static_cast<std::size_t>(abs);
}

void validate_heads(const NetworkDef& def, const ParseOptions& options) {
    const auto heads = def.yolo_layers();
    for (auto h : heads) {
        const auto& y = std::get<YoloDef>(def.layers[h]);
        if (y.classes <= 0) {
            throw ConfigError(Errc::DegenerateClassCount, h + 1, "classes",
                              "a detection head needs at least one class");
        }
        if (h == 0 || !std::holds_alternative<ConvolutionalDef>(def.layers[h - 1])) {
            throw ConfigError(Errc::HeadFilterMismatch, h + 1, "", "a yolo layer must follow a convolutional layer");
        }
        const auto& conv = std::get<ConvolutionalDef>(def.layers[h - 1]);
        const int expected = head_filters_for(y.classes);
        if (conv.filters != expected) {
            throw ConfigError(Errc::HeadFilterMismatch, h, "filters",
                              "expected (classes+5)*3 = " + std::to_string(expected) + ", got " +
                                  std::to_string(conv.filters));
        }
        if (conv.activation != Activation::Linear) {
            throw ConfigError(Errc::HeadFilterMismatch, h, "activation", "head convolution must be linear");
        }
        if (conv.batch_normalize) {
            throw ConfigError(Errc::HeadFilterMismatch, h, "batch_normalize", "head convolution must not use batch norm");
        }
    }
    if (options.required_heads != 0 && heads.size() != options.required_heads) {
        throw ConfigError(Errc::InvalidValue, 0, "",
                          "expected " + std::to_string(options.required_heads) + " yolo heads, found " +
                              std::to_string(heads.size()));
    }
}

void write_extra(std::ostringstream& out, const PassThroughKeys& extra) {
    for (const auto& [k, v] : extra) out << k << '=' << v << '\n';
}

std::string format_float(float v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

template <typename T, typename Fmt>
std::string join(const std::vector<T>& items, Fmt&& fmt, const char* sep = ",") {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += sep;
        out += fmt(items[i]);
    }
    return out;
}

}  // namespace

std::vector<std::size_t> NetworkDef::inputs_of(std::size_t index) const {
    std::vector<std::size_t> out;
    const auto& layer = layers.at(index);
    if (const auto* s = std::get_if<ShortcutDef>(&layer)) {
        out.push_back(index - 1);
        out.push_back(resolve(s->from, index));
    } else if (const auto* r = std::get_if<RouteDef>(&layer)) {
        for (int ref : r->layers) out.push_back(resolve(ref, index));
    } else if (index > 0) {
        out.push_back(index - 1);
    }
    return out;
}

std::vector<std::size_t> NetworkDef::yolo_layers() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        if (std::holds_alternative<YoloDef>(layers[i])) out.push_back(i);
    }
    return out;
}

std::vector<std::size_t> NetworkDef::conv_layers() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        if (std::holds_alternative<ConvolutionalDef>(layers[i])) out.push_back(i);
    }
    return out;
}

std::vector<Shape> infer_shapes(const NetworkDef& def) {
    std::vector<Shape> shapes;
    shapes.reserve(def.layers.size());
    const Shape input{def.net.channels, def.net.height, def.net.width};
    for (std::size_t i = 0; i < def.layers.size(); ++i) {
        const std::size_t section = i + 1;
        const Shape prev = i == 0 ? input : shapes[i - 1];
        const auto& layer = def.layers[i];
        Shape out;
        if (const auto* c = std::get_if<ConvolutionalDef>(&layer)) {
            const int p = c->padding();
            out.channels = c->filters;
            out.height = (prev.height + 2 * p - c->size) / c->stride + 1;
            out.width = (prev.width + 2 * p - c->size) / c->stride + 1;
            if (prev.height + 2 * p < c->size || prev.width + 2 * p < c->size) {
                throw ConfigError(Errc::ShapeMismatch, section, "size", "kernel larger than padded input");
            }
        } else if (const auto* s = std::get_if<ShortcutDef>(&layer)) {
            const auto from = resolve(s->from, i);
            if (i == 0 || from == static_cast<std::size_t>(-1)) {
                throw ConfigError(Errc::DanglingLayerReference, section, "from",
                                  "offset " + std::to_string(s->from) + " does not name an earlier layer");
            }
            if (shapes[from] != prev) {
                throw ConfigError(Errc::ShapeMismatch, section, "from",
                                  "shortcut operands differ: layer " + std::to_string(from + 1) + " is " +
                                      std::to_string(shapes[from].channels) + "x" + std::to_string(shapes[from].height) +
                                      "x" + std::to_string(shapes[from].width) + ", previous is " +
                                      std::to_string(prev.channels) + "x" + std::to_string(prev.height) + "x" +
                                      std::to_string(prev.width));
            }
            out = prev;
        } else if (const auto* r = std::get_if<RouteDef>(&layer)) {
            for (std::size_t k = 0; k < r->layers.size(); ++k) {
                const auto src = resolve(r->layers[k], i);
                if (src == static_cast<std::size_t>(-1)) {
                    throw ConfigError(Errc::DanglingLayerReference, section, "layers",
                                      "reference " + std::to_string(r->layers[k]) + " does not name an earlier layer");
                }
                const Shape& s = shapes[src];
                if (k == 0) {
                    out = s;
                } else {
                    if (s.height != out.height || s.width != out.width) {
                        throw ConfigError(Errc::ShapeMismatch, section, "layers",
                                          "route inputs must share spatial dims");
                    }
                    out.channels += s.channels;
                }
            }
        } else if (const auto* u = std::get_if<UpsampleDef>(&layer)) {
            out = {prev.channels, prev.height * u->stride, prev.width * u->stride};
        } else {
            out = prev;
        }
        if (out.channels <= 0 || out.height <= 0 || out.width <= 0) {
            throw ConfigError(Errc::ShapeMismatch, section, "", "layer produces an empty output");
        }
        shapes.push_back(out);
    }
    return shapes;
}

NetworkDef parse_network_config(std::string_view text, const ParseOptions& options,
                                std::vector<ConfigWarning>* warnings) {
    const auto sections = tokenize(text);
    if (sections.empty() || (sections.front().name != "net" && sections.front().name != "network")) {
        throw ConfigError(Errc::MalformedConfig, 0, "", "the first section must be [net]");
    }
    NetworkDef def;
    {
        SectionReader reader(sections.front(), 0);
        def.net = parse_net(reader, warnings);
    }
    for (std::size_t s = 1; s < sections.size(); ++s) {
        SectionReader reader(sections[s], s);
        def.layers.push_back(parse_layer(sections[s], reader, warnings));
    }
    if (def.layers.empty()) throw ConfigError(Errc::MalformedConfig, 0, "", "network has no layers");
    infer_shapes(def);
    validate_heads(def, options);
    return def;
}

NetworkDef load_network_config(const std::string& path, const ParseOptions& options,
                               std::vector<ConfigWarning>* warnings) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::IoError, "cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_network_config(ss.str(), options, warnings);
}

std::string serialize_network_config(const NetworkDef& def) {
    std::ostringstream out;
    out << "[net]\n"
        << "batch=" << def.net.batch << '\n'
        << "channels=" << def.net.channels << '\n'
        << "height=" << def.net.height << '\n'
        << "subdivisions=" << def.net.subdivisions << '\n'
        << "width=" << def.net.width << '\n';
    write_extra(out, def.net.extra);

    for (const auto& layer : def.layers) {
        out << "\n[" << layer_type_name(layer) << "]\n";
        if (const auto* c = std::get_if<ConvolutionalDef>(&layer)) {
            out << "activation=" << to_string(c->activation) << '\n'
                << "batch_normalize=" << (c->batch_normalize ? 1 : 0) << '\n'
                << "filters=" << c->filters << '\n'
                << "pad=" << (c->pad ? 1 : 0) << '\n'
                << "size=" << c->size << '\n'
                << "stride=" << c->stride << '\n';
            write_extra(out, c->extra);
        } else if (const auto* s = std::get_if<ShortcutDef>(&layer)) {
            out << "activation=" << to_string(s->activation) << '\n' << "from=" << s->from << '\n';
            write_extra(out, s->extra);
        } else if (const auto* r = std::get_if<RouteDef>(&layer)) {
            out << "layers=" << join(r->layers, [](int v) { return std::to_string(v); }) << '\n';
            write_extra(out, r->extra);
        } else if (const auto* u = std::get_if<UpsampleDef>(&layer)) {
            out << "stride=" << u->stride << '\n';
            write_extra(out, u->extra);
        } else if (const auto* y = std::get_if<YoloDef>(&layer)) {
            out << "anchors="
                << join(y->anchors, [](const Anchor& a) { return format_float(a.w) + "," + format_float(a.h); }, ", ")
                << '\n'
                << "classes=" << y->classes << '\n'
                << "mask=" << join(y->mask, [](int v) { return std::to_string(v); }) << '\n';
            write_extra(out, y->extra);
        }
    }
    return out.str();
}

HeadFilterReport validate_head_filters(const NetworkDef& def, int classes) {
    HeadFilterReport report;
    report.expected_filters = head_filters_for(classes);
    report.degenerate = classes <= 0;
    for (auto h : def.yolo_layers()) {
        if (h == 0) continue;
        const auto* conv = std::get_if<ConvolutionalDef>(&def.layers[h - 1]);
        const int actual = conv ? conv->filters : 0;
        if (actual != report.expected_filters) report.mismatches.push_back({h - 1, report.expected_filters, actual});
    }
    return report;
}

}  // namespace fishdet
