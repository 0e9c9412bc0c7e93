#include "fishdet/labels.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "fishdet/error.hpp"

namespace fishdet {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        const auto start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

std::vector<GroundTruthBox> parse_labels(std::string_view text) {
    std::vector<GroundTruthBox> out;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        const auto line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        const auto tokens = split_ws(line);
        if (tokens.empty()) continue;
        const auto where = "line " + std::to_string(line_no);
        if (tokens.size() != 5) throw Error(Errc::MalformedLine, where + ": expected 'class cx cy w h'");
        GroundTruthBox b;
        double v[4];
        if (!parse_number(tokens[0], b.class_id) || b.class_id < 0) {
            throw Error(Errc::MalformedLine, where + ": class must be a non-negative integer");
        }
        for (int k = 0; k < 4; ++k) {
            if (!parse_number(tokens[static_cast<std::size_t>(k) + 1], v[k])) {
                throw Error(Errc::MalformedLine, where + ": '" + std::string(tokens[static_cast<std::size_t>(k) + 1]) +
                                                     "' is not a number");
            }
            if (!(v[k] >= 0.0 && v[k] <= 1.0)) {
                throw Error(Errc::OutOfRangeCoordinate, where + ": coordinate outside [0, 1]");
            }
        }
        if (!(v[2] > 0.0 && v[3] > 0.0)) throw Error(Errc::OutOfRangeCoordinate, where + ": box has zero size");
        b.box = {v[0], v[1], v[2], v[3]};
        out.push_back(b);
    }
    return out;
}

std::string write_labels(std::span<const GroundTruthBox> boxes, std::vector<std::string>* warnings) {
    std::string out;
    char line[128];
    for (const auto& b : boxes) {
        Box box = b.box;
        if (box.left() < 0.0 || box.top() < 0.0 || box.right() > 1.0 || box.bottom() > 1.0) {
            const double x0 = std::clamp(box.left(), 0.0, 1.0);
            const double y0 = std::clamp(box.top(), 0.0, 1.0);
            const double x1 = std::clamp(box.right(), 0.0, 1.0);
            const double y1 = std::clamp(box.bottom(), 0.0, 1.0);
            const double moved = std::max({std::abs(x0 - box.left()), std::abs(y0 - box.top()),
                                           std::abs(x1 - box.right()), std::abs(y1 - box.bottom())});
            box = Box::from_corners(x0, y0, x1, y1);
            if (moved > 1e-6) {
                const std::string msg = "clipped a box to the image by " + std::to_string(moved);
                spdlog::warn("{}", msg);
                if (warnings) warnings->push_back(msg);
            }
        }
        std::snprintf(line, sizeof(line), "%d %.6f %.6f %.6f %.6f\n", b.class_id, box.cx, box.cy, box.w, box.h);
        if (std::round(box.w * 1e6) <= 0.0 || std::round(box.h * 1e6) <= 0.0) {
            if (warnings) warnings->push_back("dropped a box that rounds to zero size");
            continue;
        }
        out += line;
    }
    return out;
}

std::vector<GroundTruthBox> read_label_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::MissingLabelFile, "cannot open label file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_labels(ss.str());
    } catch (const Error& e) {
        throw Error(e.code(), path + ": " + e.detail());
    }
}

void write_file_atomic(const std::string& path, std::string_view contents) {
    static std::atomic<unsigned long> counter{0};
    const auto tmp = path + ".tmp." + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id())) + "." +
                     std::to_string(counter.fetch_add(1));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(Errc::IoError, "cannot write '" + tmp + "'");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        out.flush();
        if (!out) throw Error(Errc::IoError, "short write to '" + tmp + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error(Errc::IoError, "cannot replace '" + path + "'");
    }
}

void write_label_file(const std::string& path, std::span<const GroundTruthBox> boxes,
                      std::vector<std::string>* warnings) {
    write_file_atomic(path, write_labels(boxes, warnings));
}

std::vector<GroundTruthBox> detections_to_labels(std::span<const Detection> dets, int image_w, int image_h) {
    std::vector<GroundTruthBox> out;
    out.reserve(dets.size());
    for (const auto& d : dets) {
        out.push_back({d.class_id, {d.box.cx / image_w, d.box.cy / image_h, d.box.w / image_w, d.box.h / image_h}});
    }
    return out;
}

std::vector<ScoredBox> detections_to_scored(std::span<const Detection> dets, int image_w, int image_h) {
    std::vector<ScoredBox> out;
    out.reserve(dets.size());
    for (const auto& d : dets) {
        out.push_back({d.class_id, static_cast<double>(d.score),
                       {d.box.cx / image_w, d.box.cy / image_h, d.box.w / image_w, d.box.h / image_h}});
    }
    return out;
}

}  // namespace fishdet
