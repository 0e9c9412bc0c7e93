#include "fishdet/letterbox.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "fishdet/error.hpp"

namespace fishdet {

namespace {

struct Tap {
    int lo = 0;
    int hi = 0;
    float frac = 0.f;
};

/// Pixel-centre aligned bilinear taps for resampling `src` samples to `dst`.
std::vector<Tap> make_taps(int src, int dst) {
    std::vector<Tap> taps(static_cast<std::size_t>(dst));
    const double ratio = static_cast<double>(src) / dst;
    for (int i = 0; i < dst; ++i) {
        double s = (i + 0.5) * ratio - 0.5;
        s = std::clamp(s, 0.0, static_cast<double>(src - 1));
        const int lo = static_cast<int>(std::floor(s));
        const int hi = std::min(lo + 1, src - 1);
        taps[static_cast<std::size_t>(i)] = {lo, hi, static_cast<float>(s - lo)};
    }
    return taps;
}

}  // namespace

LetterboxInfo letterbox_geometry(int image_w, int image_h, int target_w, int target_h) {
    if (image_w <= 0 || image_h <= 0) throw Error(Errc::EmptyImage, "image has no pixels");
    if (target_w <= 0 || target_h <= 0 || target_w % 32 != 0 || target_h % 32 != 0) {
        throw Error(Errc::TargetNotMultipleOf32, "letterbox target " + std::to_string(target_w) + "x" +
                                                     std::to_string(target_h) + " must be a positive multiple of 32");
    }
    LetterboxInfo info;
    info.original_w = image_w;
    info.original_h = image_h;
    info.target_w = target_w;
    info.target_h = target_h;
    const double sx = static_cast<double>(target_w) / image_w;
    const double sy = static_cast<double>(target_h) / image_h;
    if (sx <= sy) {
        info.scale = sx;
        info.content_w = target_w;
        info.content_h = std::max(1, static_cast<int>(static_cast<long long>(image_h) * target_w / image_w));
    } else {
        info.scale = sy;
        info.content_h = target_h;
        info.content_w = std::max(1, static_cast<int>(static_cast<long long>(image_w) * target_h / image_h));
    }
    info.pad_x = (target_w - info.content_w) / 2;
    info.pad_y = (target_h - info.content_h) / 2;
    return info;
}

std::pair<Tensor, LetterboxInfo> letterbox_preprocess(const Image& image, int target_w, int target_h) {
    if (image.empty()) throw Error(Errc::EmptyImage, "image has no pixels");
    const auto info = letterbox_geometry(image.width, image.height, target_w, target_h);
    Tensor out(3, target_h, target_w, kLetterboxFill);

    const auto xt = make_taps(image.width, info.content_w);
    const auto yt = make_taps(image.height, info.content_h);
    constexpr float inv255 = 1.f / 255.f;
    for (int y = 0; y < info.content_h; ++y) {
        const auto& ty = yt[static_cast<std::size_t>(y)];
        for (int x = 0; x < info.content_w; ++x) {
            const auto& tx = xt[static_cast<std::size_t>(x)];
            const auto* p00 = image.pixel(tx.lo, ty.lo);
            const auto* p01 = image.pixel(tx.hi, ty.lo);
            const auto* p10 = image.pixel(tx.lo, ty.hi);
            const auto* p11 = image.pixel(tx.hi, ty.hi);
            for (int c = 0; c < 3; ++c) {
                const float top = p00[c] + tx.frac * (p01[c] - p00[c]);
                const float bottom = p10[c] + tx.frac * (p11[c] - p10[c]);
                out.at(c, y + info.pad_y, x + info.pad_x) = (top + ty.frac * (bottom - top)) * inv255;
            }
        }
    }
    return {std::move(out), info};
}

}  // namespace fishdet
