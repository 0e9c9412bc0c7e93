#pragma once

#include "fishdet/image.hpp"
#include "fishdet/tensor.hpp"

namespace fishdet {

/// Mapping between original-image pixels and network-input pixels.
struct LetterboxInfo {
    double scale = 1.0;
    int pad_x = 0;
    int pad_y = 0;
    int content_w = 0;
    int content_h = 0;
    int original_w = 0;
    int original_h = 0;
    int target_w = 0;
    int target_h = 0;
};

inline constexpr float kLetterboxFill = 0.5f;

/// Geometry only: uniform scale min(tw/W, th/H), content centred, margins split
/// with the odd pixel (if any) on the right/bottom.
LetterboxInfo letterbox_geometry(int image_w, int image_h, int target_w, int target_h);

/// Aspect-preserving bilinear resize into a (3, th, tw) tensor with values in
/// [0, 1]; margins are filled with mid-gray.
std::pair<Tensor, LetterboxInfo> letterbox_preprocess(const Image& image, int target_w, int target_h);

}  // namespace fishdet
