#pragma once

#include <algorithm>

namespace fishdet {

/// Axis-aligned box by centre and size. Units depend on context: pixels for
/// detections, [0, 1] image fractions for labels.
struct Box {
    double cx = 0.0;
    double cy = 0.0;
    double w = 0.0;
    double h = 0.0;

    double left() const noexcept { return cx - w / 2; }
    double right() const noexcept { return cx + w / 2; }
    double top() const noexcept { return cy - h / 2; }
    double bottom() const noexcept { return cy + h / 2; }
    double area() const noexcept { return std::max(0.0, w) * std::max(0.0, h); }

    static Box from_corners(double x0, double y0, double x1, double y1) noexcept {
        return {(x0 + x1) / 2, (y0 + y1) / 2, x1 - x0, y1 - y0};
    }

    bool operator==(const Box&) const = default;
};

/// Intersection over union; 0 when the union is empty.
inline double iou(const Box& a, const Box& b) noexcept {
    const double iw = std::min(a.right(), b.right()) - std::max(a.left(), b.left());
    const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.top(), b.top());
    const double inter = (iw > 0 && ih > 0) ? iw * ih : 0.0;
    const double uni = a.area() + b.area() - inter;
    return uni > 0 ? inter / uni : 0.0;
}

}  // namespace fishdet
