#include "fishdet/detection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "fishdet/error.hpp"

namespace fishdet {

namespace {

void sort_by_score(std::vector<Detection>& dets) {
    std::stable_sort(dets.begin(), dets.end(), [](const Detection& a, const Detection& b) { return a.score > b.score; });
}

}  // namespace

float sigmoid(float x) noexcept { return 1.f / (1.f + std::exp(-x)); }

std::vector<Prediction> decode_head(const Tensor& head, const YoloDef& yolo, int input_w, int input_h) {
    const int classes = yolo.classes;
    const int per_box = classes + 5;
    const int boxes = static_cast<int>(yolo.mask.size());
    if (head.channels() != boxes * per_box) {
        throw Error(Errc::ChannelCountMismatch, "head has " + std::to_string(head.channels()) + " channels, expected " +
                                                    std::to_string(boxes * per_box));
    }
    const double stride_x = static_cast<double>(input_w) / head.width();
    const double stride_y = static_cast<double>(input_h) / head.height();

    std::vector<Prediction> out;
    out.reserve(static_cast<std::size_t>(head.height()) * head.width() * boxes);
    for (int y = 0; y < head.height(); ++y) {
        for (int x = 0; x < head.width(); ++x) {
            for (int b = 0; b < boxes; ++b) {
                const int base = b * per_box;
                Prediction p;
                auto& r = p.raw;
                r.t_x = head.at(base + 0, y, x);
                r.t_y = head.at(base + 1, y, x);
                r.t_w = head.at(base + 2, y, x);
                r.t_h = head.at(base + 3, y, x);
                r.objectness_logit = head.at(base + 4, y, x);
                r.class_logits.resize(static_cast<std::size_t>(classes));
                for (int c = 0; c < classes; ++c) r.class_logits[static_cast<std::size_t>(c)] = head.at(base + 5 + c, y, x);
                r.cell_x = x;
                r.cell_y = y;
                r.anchor_index = yolo.mask[static_cast<std::size_t>(b)];
                r.anchor = yolo.anchors[static_cast<std::size_t>(r.anchor_index)];

                p.box.cx = (x + static_cast<double>(sigmoid(r.t_x))) * stride_x;
                p.box.cy = (y + static_cast<double>(sigmoid(r.t_y))) * stride_y;
                p.box.w = r.anchor.w * std::exp(static_cast<double>(r.t_w));
                p.box.h = r.anchor.h * std::exp(static_cast<double>(r.t_h));
                p.objectness = sigmoid(r.objectness_logit);
                p.class_probs.resize(r.class_logits.size());
                std::transform(r.class_logits.begin(), r.class_logits.end(), p.class_probs.begin(), sigmoid);
                out.push_back(std::move(p));
            }
        }
    }
    return out;
}

std::vector<Detection> score_and_filter(std::span<const Prediction> preds, float threshold) {
    if (!(threshold >= 0.f && threshold <= 1.f)) {
        throw Error(Errc::InvalidThreshold, "confidence threshold must lie in [0, 1]");
    }
    std::vector<Detection> out;
    for (const auto& p : preds) {
        if (p.class_probs.empty()) continue;
        // max_element returns the first maximum, so ties go to the lowest class id
        const auto best = std::max_element(p.class_probs.begin(), p.class_probs.end());
        const float score = p.objectness * *best;
        if (score < threshold) continue;
        Detection d;
        d.box = p.box;
        d.objectness = p.objectness;
        d.class_probs = p.class_probs;
        d.class_id = static_cast<int>(best - p.class_probs.begin());
        d.score = score;
        out.push_back(std::move(d));
    }
    sort_by_score(out);
    return out;
}

std::vector<Detection> nms(std::vector<Detection> dets, float iou_threshold) {
    sort_by_score(dets);
    std::vector<bool> suppressed(dets.size(), false);
    std::vector<Detection> kept;
    for (std::size_t i = 0; i < dets.size(); ++i) {
        if (suppressed[i]) continue;
        for (std::size_t j = i + 1; j < dets.size(); ++j) {
            if (!suppressed[j] && dets[j].class_id == dets[i].class_id && iou(dets[i].box, dets[j].box) > iou_threshold) {
                suppressed[j] = true;
            }
        }
        kept.push_back(std::move(dets[i]));
    }
    return kept;
}

std::vector<Detection> merge_scales(std::span<const std::vector<Detection>> heads) {
    std::vector<Detection> out;
    for (const auto& list : heads) out.insert(out.end(), list.begin(), list.end());
    sort_by_score(out);
    return out;
}

std::vector<Detection> unletterbox(std::span<const Detection> dets, const LetterboxInfo& info) {
    std::vector<Detection> out;
    out.reserve(dets.size());
    const double w = info.original_w;
    const double h = info.original_h;
    for (const auto& d : dets) {
        const double cx = (d.box.cx - info.pad_x) / info.scale;
        const double cy = (d.box.cy - info.pad_y) / info.scale;
        const double bw = d.box.w / info.scale;
        const double bh = d.box.h / info.scale;
        const double x0 = std::clamp(cx - bw / 2, 0.0, w);
        const double x1 = std::clamp(cx + bw / 2, 0.0, w);
        const double y0 = std::clamp(cy - bh / 2, 0.0, h);
        const double y1 = std::clamp(cy + bh / 2, 0.0, h);
        if (x1 <= x0 || y1 <= y0) continue;
        Detection m = d;
        m.box = Box::from_corners(x0, y0, x1, y1);
        out.push_back(std::move(m));
    }
    return out;
}

std::string format_detections(std::span<const Detection> dets) {
    std::string out;
    char line[160];
    for (const auto& d : dets) {
        std::snprintf(line, sizeof(line), "%d %.6f %.3f %.3f %.3f %.3f\n", d.class_id, static_cast<double>(d.score),
                      d.box.cx, d.box.cy, d.box.w, d.box.h);
        out += line;
    }
    return out;
}

}  // namespace fishdet
