#include "fishdet/image.hpp"

#include <algorithm>
#include <cctype>
#include <csetjmp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>

#include <jpeglib.h>
#include <png.h>

#include "fishdet/error.hpp"

namespace fishdet {

Image::Image(int w, int h, std::uint8_t fill) : width(w), height(h) {
    rgb.assign(static_cast<std::size_t>(std::max(w, 0)) * std::max(h, 0) * 3, fill);
}

namespace {

class PpmReader {
public:
    explicit PpmReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    int next_int() {
        skip_space_and_comments();
        if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
            throw Error(Errc::DecodeError, "malformed PPM header");
        }
        long v = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            v = v * 10 + (bytes_[pos_++] - '0');
            if (v > (1 << 24)) throw Error(Errc::DecodeError, "PPM dimension too large");
        }
        return static_cast<int>(v);
    }

    std::size_t pos() const { return pos_; }
    void advance() { ++pos_; }

private:
    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 2;
};

struct JpegErrorManager {
    jpeg_error_mgr base;
    std::jmp_buf jump;
    char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr info) {
    auto* err = reinterpret_cast<JpegErrorManager*>(info->err);
    (*info->err->format_message)(info, err->message);
    std::longjmp(err->jump, 1);
}

std::string lower_extension(const std::string& path) {
    auto ext = std::filesystem::path(path).extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext;
}

}  // namespace

Image decode_ppm(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') {
        throw Error(Errc::DecodeError, "not a binary PPM (P6) stream");
    }
    PpmReader reader(bytes);
    const int w = reader.next_int();
    const int h = reader.next_int();
    const int maxval = reader.next_int();
    if (maxval != 255) throw Error(Errc::DecodeError, "only 8-bit PPM (maxval 255) is supported");
    if (w <= 0 || h <= 0) throw Error(Errc::EmptyImage, "PPM has zero pixels");
    reader.advance();  // single whitespace byte before the raster
    const std::size_t need = static_cast<std::size_t>(w) * h * 3;
    if (reader.pos() + need > bytes.size()) throw Error(Errc::DecodeError, "PPM raster is truncated");
    Image img;
    img.width = w;
    img.height = h;
    img.rgb.assign(bytes.begin() + static_cast<std::ptrdiff_t>(reader.pos()),
                   bytes.begin() + static_cast<std::ptrdiff_t>(reader.pos() + need));
    return img;
}

std::vector<std::uint8_t> encode_ppm(const Image& image) {
    const std::string header =
        "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), image.rgb.begin(), image.rgb.end());
    return out;
}

Image decode_png(std::span<const std::uint8_t> bytes) {
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size())) {
        throw Error(Errc::DecodeError, std::string("PNG: ") + png.message);
    }
    png.format = PNG_FORMAT_RGB;
    Image img(static_cast<int>(png.width), static_cast<int>(png.height));
    if (img.empty()) {
        png_image_free(&png);
        throw Error(Errc::EmptyImage, "PNG has zero pixels");
    }
    if (!png_image_finish_read(&png, nullptr, img.rgb.data(), 0, nullptr)) {
        const std::string msg = png.message;
        png_image_free(&png);
        throw Error(Errc::DecodeError, "PNG: " + msg);
    }
    return img;
}

std::vector<std::uint8_t> encode_png(const Image& image) {
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(image.width);
    png.height = static_cast<png_uint_32>(image.height);
    png.format = PNG_FORMAT_RGB;
    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&png, nullptr, &size, 0, image.rgb.data(), 0, nullptr)) {
        throw Error(Errc::IoError, std::string("PNG encode: ") + png.message);
    }
    std::vector<std::uint8_t> out(size);
    if (!png_image_write_to_memory(&png, out.data(), &size, 0, image.rgb.data(), 0, nullptr)) {
        throw Error(Errc::IoError, std::string("PNG encode: ") + png.message);
    }
    out.resize(size);
    return out;
}

Image decode_jpeg(std::span<const std::uint8_t> bytes) {
    jpeg_decompress_struct info{};
    JpegErrorManager err{};
    info.err = jpeg_std_error(&err.base);
    err.base.error_exit = jpeg_error_exit;
    Image img;
    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&info);
        throw Error(Errc::DecodeError, std::string("JPEG: ") + err.message);
    }
    jpeg_create_decompress(&info);
    jpeg_mem_src(&info, bytes.data(), static_cast<unsigned long>(bytes.size()));
    jpeg_read_header(&info, TRUE);
    info.out_color_space = JCS_RGB;
    jpeg_start_decompress(&info);
    img.width = static_cast<int>(info.output_width);
    img.height = static_cast<int>(info.output_height);
    img.rgb.resize(static_cast<std::size_t>(img.width) * img.height * 3);
    while (info.output_scanline < info.output_height) {
        JSAMPROW row = img.rgb.data() + static_cast<std::size_t>(info.output_scanline) * img.width * 3;
        jpeg_read_scanlines(&info, &row, 1);
    }
    jpeg_finish_decompress(&info);
    jpeg_destroy_decompress(&info);
    if (img.empty()) throw Error(Errc::EmptyImage, "JPEG has zero pixels");
    return img;
}

Image decode_image(std::span<const std::uint8_t> bytes) {
    if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '6') return decode_ppm(bytes);
    if (bytes.size() >= 8 && bytes[0] == 0x89 && bytes[1] == 'P' && bytes[2] == 'N' && bytes[3] == 'G') {
        return decode_png(bytes);
    }
    if (bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF) return decode_jpeg(bytes);
    throw Error(Errc::DecodeError, "unrecognized image format");
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::IoError, "cannot open '" + path + "'");
    return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_file_bytes(const std::string& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoError, "cannot write '" + path + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(Errc::IoError, "short write to '" + path + "'");
}

Image read_image(const std::string& path) {
    const auto bytes = read_file_bytes(path);
    try {
        return decode_image(bytes);
    } catch (const Error& e) {
        throw Error(e.code(), path + ": " + e.detail());
    }
}

void write_image(const std::string& path, const Image& image) {
    const auto ext = lower_extension(path);
    write_file_bytes(path, ext == ".png" ? encode_png(image) : encode_ppm(image));
}

bool is_image_path(const std::string& path) {
    const auto ext = lower_extension(path);
    return ext == ".ppm" || ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

void draw_rectangle(Image& image, int x0, int y0, int x1, int y1, Rgb color, int thickness) {
    if (image.empty()) return;
    if (x0 > x1) std::swap(x0, x1);
    if (y0 > y1) std::swap(y0, y1);
    auto put = [&](int x, int y) {
        if (x < 0 || y < 0 || x >= image.width || y >= image.height) return;
        auto* p = image.pixel(x, y);
        p[0] = color.r;
        p[1] = color.g;
        p[2] = color.b;
    };
    for (int t = 0; t < thickness; ++t) {
        for (int x = x0; x <= x1; ++x) {
            put(x, y0 + t);
            put(x, y1 - t);
        }
        for (int y = y0; y <= y1; ++y) {
            put(x0 + t, y);
            put(x1 - t, y);
        }
    }
}

}  // namespace fishdet
