#pragma once

#include <span>
#include <string>
#include <vector>

#include "fishdet/box.hpp"
#include "fishdet/config.hpp"
#include "fishdet/letterbox.hpp"
#include "fishdet/tensor.hpp"

namespace fishdet {

inline constexpr float kDefaultConfThreshold = 0.25f;
inline constexpr float kDefaultNmsThreshold = 0.45f;

struct RawBoxPrediction {
    float t_x = 0.f, t_y = 0.f, t_w = 0.f, t_h = 0.f;
    float objectness_logit = 0.f;
    std::vector<float> class_logits;
    int cell_x = 0;
    int cell_y = 0;
    int anchor_index = 0;  // index into the full anchor list
    Anchor anchor;
};

/// A raw prediction with its activations applied; box in network-input pixels.
struct Prediction {
    RawBoxPrediction raw;
    Box box;
    float objectness = 0.f;
    std::vector<float> class_probs;
};

struct Detection {
    Box box;
    float objectness = 0.f;
    std::vector<float> class_probs;
    int class_id = 0;
    /// objectness * max class probability
    float score = 0.f;
};

float sigmoid(float x) noexcept;

/// Decodes every cell/anchor of one head tensor with channel layout
/// [anchor][tx, ty, tw, th, obj, class...]. Output order is row, column, anchor.
std::vector<Prediction> decode_head(const Tensor& head, const YoloDef& yolo, int input_w, int input_h);

/// Keeps predictions whose score reaches `threshold`, sorted by descending score.
std::vector<Detection> score_and_filter(std::span<const Prediction> preds, float threshold);

/// Greedy per-class suppression; output is in selection (score) order.
std::vector<Detection> nms(std::vector<Detection> dets, float iou_threshold);

/// Union of per-head lists re-sorted by score. Does not suppress duplicates.
std::vector<Detection> merge_scales(std::span<const std::vector<Detection>> heads);

/// Maps boxes from network input to original-image pixels, clamps them to the
/// image and drops boxes left with no area.
std::vector<Detection> unletterbox(std::span<const Detection> dets, const LetterboxInfo& info);

/// One `class score cx cy w h` line per detection.
std::string format_detections(std::span<const Detection> dets);

}  // namespace fishdet
