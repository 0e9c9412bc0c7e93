#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fishdet {

/// 8-bit interleaved RGB raster.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb;

    Image() = default;
    Image(int w, int h, std::uint8_t fill = 0);

    bool empty() const noexcept { return width <= 0 || height <= 0; }
    std::uint8_t* pixel(int x, int y) noexcept { return rgb.data() + (static_cast<std::size_t>(y) * width + x) * 3; }
    const std::uint8_t* pixel(int x, int y) const noexcept {
        return rgb.data() + (static_cast<std::size_t>(y) * width + x) * 3;
    }

    bool operator==(const Image&) const = default;
};

/// Binary PPM (P6, maxval 255).
Image decode_ppm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_ppm(const Image& image);

Image decode_png(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_png(const Image& image);

Image decode_jpeg(std::span<const std::uint8_t> bytes);

/// Picks the decoder from the leading magic bytes.
Image decode_image(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, std::span<const std::uint8_t> bytes);

Image read_image(const std::string& path);
/// Format chosen by extension: .png, otherwise PPM.
void write_image(const std::string& path, const Image& image);

bool is_image_path(const std::string& path);

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
};

/// Outline of the axis-aligned rectangle [x0, x1] x [y0, y1], clipped to the raster.
void draw_rectangle(Image& image, int x0, int y0, int x1, int y1, Rgb color, int thickness = 2);

}  // namespace fishdet
