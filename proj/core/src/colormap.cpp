#include "fishdet/colormap.hpp"

#include <algorithm>
#include <cmath>

#include "fishdet/error.hpp"

namespace fishdet {

namespace {

const std::array<Rgb, 256> kViridis = {{
#include "viridis_lut.inc"
}};

}  // namespace

const std::array<Rgb, 256>& viridis_lut() noexcept { return kViridis; }

std::uint8_t colormap_index(double normalized) noexcept {
    const double scaled = std::floor(normalized * 256.0);
    return static_cast<std::uint8_t>(std::clamp(scaled, 0.0, 255.0));
}

Image render(const Raster& raster) {
    if (raster.values.empty()) throw Error(Errc::EmptyImage, "cannot render an empty raster");
    for (double v : raster.values) {
        if (!std::isfinite(v)) throw Error(Errc::NonFiniteValue, "raster holds a non-finite value");
    }
    const auto [lo, hi] = std::minmax_element(raster.values.begin(), raster.values.end());
    const double range = *hi - *lo;
    Image img(raster.width, raster.height);
    for (std::size_t i = 0; i < raster.values.size(); ++i) {
        const double t = range > 0 ? (raster.values[i] - *lo) / range : 0.5;
        const Rgb c = kViridis[colormap_index(t)];
        img.rgb[i * 3 + 0] = c.r;
        img.rgb[i * 3 + 1] = c.g;
        img.rgb[i * 3 + 2] = c.b;
    }
    return img;
}

}  // namespace fishdet
