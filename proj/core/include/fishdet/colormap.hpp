#pragma once

#include <array>
#include <cstdint>

#include "fishdet/image.hpp"
#include "fishdet/pca.hpp"

namespace fishdet {

/// The 256-entry viridis table as 8-bit RGB.
const std::array<Rgb, 256>& viridis_lut() noexcept;

/// LUT index for a normalized value: floor(v * 256) clamped to [0, 255].
std::uint8_t colormap_index(double normalized) noexcept;

/// Min-max normalizes to [0, 1] (a constant raster maps to 0.5) and applies viridis.
Image render(const Raster& raster);

}  // namespace fishdet
