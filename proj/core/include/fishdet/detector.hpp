#pragma once

#include <memory>
#include <string>
#include <vector>

#include "fishdet/detection.hpp"
#include "fishdet/image.hpp"
#include "fishdet/layers.hpp"
#include "fishdet/weights.hpp"

namespace fishdet {

struct DetectOptions {
    float conf_threshold = kDefaultConfThreshold;
    float nms_threshold = kDefaultNmsThreshold;
    ExecOptions exec;
};

struct DetectResult {
    /// Boxes in original-image pixels, selection order.
    std::vector<Detection> detections;
    LetterboxInfo letterbox;
    /// Predictions decoded across all heads before thresholding.
    std::size_t raw_predictions = 0;
};

/// letterbox -> forward -> decode -> threshold -> merge -> NMS -> unletterbox.
class Detector {
public:
    explicit Detector(std::shared_ptr<const WeightedNetwork> net, DetectOptions options = {});

    DetectResult detect(const Image& image) const;
    /// `threshold` overrides the configured confidence threshold.
    DetectResult detect(const Image& image, float threshold) const;

    const WeightedNetwork& network() const noexcept { return *net_; }
    const DetectOptions& options() const noexcept { return options_; }

private:
    std::shared_ptr<const WeightedNetwork> net_;
    DetectOptions options_;
};

/// Loads a config + weights pair from disk.
std::shared_ptr<const WeightedNetwork> load_model(const std::string& config_path, const std::string& weights_path,
                                                  const LoadOptions& options = {});

}  // namespace fishdet
