#include "fishdet/detector.hpp"

#include "fishdet/error.hpp"
#include "fishdet/letterbox.hpp"
#include "fishdet/network.hpp"

namespace fishdet {

Detector::Detector(std::shared_ptr<const WeightedNetwork> net, DetectOptions options)
    : net_(std::move(net)), options_(options) {
    if (!net_) throw Error(Errc::InvalidValue, "detector needs a network");
    if (net_->def.yolo_layers().empty()) throw Error(Errc::InvalidValue, "network has no detection heads");
}

DetectResult Detector::detect(const Image& image) const { return detect(image, options_.conf_threshold); }

DetectResult Detector::detect(const Image& image, float threshold) const {
    const auto& def = net_->def;
    auto [input, info] = letterbox_preprocess(image, def.net.width, def.net.height);
    const auto out = forward(*net_, input, {}, options_.exec);

    std::vector<std::vector<Detection>> per_head;
    DetectResult result;
    for (std::size_t h = 0; h < out.heads.size(); ++h) {
        const auto& yolo = std::get<YoloDef>(def.layers[out.head_layers[h]]);
        const auto preds = decode_head(out.heads[h], yolo, def.net.width, def.net.height);
        result.raw_predictions += preds.size();
        per_head.push_back(score_and_filter(preds, threshold));
    }
    auto merged = nms(merge_scales(per_head), options_.nms_threshold);
    result.detections = unletterbox(merged, info);
    result.letterbox = info;
    return result;
}

std::shared_ptr<const WeightedNetwork> load_model(const std::string& config_path, const std::string& weights_path,
                                                  const LoadOptions& options) {
    const auto def = load_network_config(config_path);
    return std::make_shared<const WeightedNetwork>(load_weights_file(def, weights_path, options));
}

}  // namespace fishdet
