#include "fishdet/network.hpp"

#include <variant>

#include "fishdet/error.hpp"

namespace fishdet {

namespace {

/// Index of the last layer that reads each layer's output.
std::vector<std::size_t> last_uses(const NetworkDef& def) {
    std::vector<std::size_t> last(def.layers.size());
    for (std::size_t i = 0; i < def.layers.size(); ++i) {
        last[i] = i;
        for (auto src : def.inputs_of(i)) last[src] = std::max(last[src], i);
    }
    return last;
}

}  // namespace

ForwardResult forward(const WeightedNetwork& net, const Tensor& input, const std::set<std::size_t>& probe,
                      const ExecOptions& options) {
    const auto& def = net.def;
    if (input.channels() != def.net.channels || input.height() != def.net.height || input.width() != def.net.width) {
        throw Error(Errc::InputShapeMismatch,
                    "network expects " + std::to_string(def.net.channels) + "x" + std::to_string(def.net.height) + "x" +
                        std::to_string(def.net.width) + " input, got " + std::to_string(input.channels()) + "x" +
                        std::to_string(input.height()) + "x" + std::to_string(input.width()));
    }
    for (auto p : probe) {
        if (p >= def.layers.size()) {
            throw Error(Errc::IndexOutOfRange, "probe layer " + std::to_string(p + 1) + " does not exist");
        }
    }
    const auto last = last_uses(def);
    std::vector<Tensor> outputs(def.layers.size());
    ForwardResult result;

    for (std::size_t i = 0; i < def.layers.size(); ++i) {
        const Tensor& prev = i == 0 ? input : outputs[i - 1];
        const auto& layer = def.layers[i];
        try {
            if (const auto* c = std::get_if<ConvolutionalDef>(&layer)) {
                outputs[i] = conv_forward(prev, *c, net.conv(i), options);
            } else if (const auto* s = std::get_if<ShortcutDef>(&layer)) {
                const auto srcs = def.inputs_of(i);
                outputs[i] = shortcut_add(outputs[srcs[0]], outputs[srcs[1]], s->activation);
            } else if (std::holds_alternative<RouteDef>(layer)) {
                std::vector<const Tensor*> parts;
                for (auto src : def.inputs_of(i)) parts.push_back(&outputs[src]);
                outputs[i] = route_concat(parts);
            } else if (const auto* u = std::get_if<UpsampleDef>(&layer)) {
                outputs[i] = upsample_nearest(prev, u->stride);
            } else {
                // Decoding happens downstream; the head passes its input through.
                outputs[i] = prev;
                const int classes = std::get<YoloDef>(layer).classes;
                if (prev.channels() != head_filters_for(classes)) {
                    throw Error(Errc::ChannelCountMismatch, "head expects " +
                                                                std::to_string(head_filters_for(classes)) + " channels");
                }
                result.heads.push_back(prev);
                result.head_layers.push_back(i);
            }
        } catch (const Error& e) {
            throw Error(e.code(), "layer " + std::to_string(i + 1) + " (" + std::string(layer_type_name(layer)) +
                                      "): " + e.detail());
        }
        if (probe.count(i)) result.probed.emplace(i, outputs[i]);
        // Release inputs whose last reader has now run.
        for (auto src : def.inputs_of(i)) {
            if (last[src] == i && src + 1 != def.layers.size()) outputs[src] = Tensor{};
        }
    }
    return result;
}

}  // namespace fishdet
