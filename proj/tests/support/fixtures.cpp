#include "fixtures.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <sstream>

#ifndef FISHDET_DATA_DIR
#error "FISHDET_DATA_DIR must be defined"
#endif

namespace fs = std::filesystem;

namespace fixture {

std::string data_dir() { return FISHDET_DATA_DIR; }
std::string yolov3_config_path() { return data_dir() + "/yolov3-fish.cfg"; }
std::string tiny_config_path() { return data_dir() + "/tiny-fixture.cfg"; }

TempDir::TempDir() {
    static std::atomic<unsigned> counter{0};
    std::random_device rd;
    for (;;) {
        auto candidate = fs::temp_directory_path() /
                         ("fishdet-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
        if (fs::create_directory(candidate)) {
            path_ = candidate;
            return;
        }
    }
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

fishdet::WeightedNetwork tiny_network() {
    const auto def = fishdet::load_network_config(tiny_config_path());
    auto net = fishdet::make_initialized_network(def);
    auto& gray = net.params[0];
    std::fill(gray.weights.begin(), gray.weights.end(), 1.f / 3.f);
    for (std::size_t l = 1; l <= 3; ++l) {
        std::fill(net.params[l].weights.begin(), net.params[l].weights.end(), 0.25f);
    }
    // Head: 3 anchors x (tx ty tw th obj cls); one input channel.
    auto& head = net.params[4];
    std::fill(head.weights.begin(), head.weights.end(), 0.f);
    std::fill(head.biases.begin(), head.biases.end(), 0.f);
    head.weights[4] = 40.f;
    head.biases[4] = -30.f;
    head.biases[5] = 10.f;
    head.biases[6 + 4] = -20.f;
    head.biases[12 + 4] = -20.f;
    return net;
}

fishdet::Image squares_image(const std::vector<std::pair<int, int>>& cells) {
    fishdet::Image img(kTinyInput, kTinyInput, 0);
    for (const auto& [cx, cy] : cells) {
        const int x0 = cx * kTinyCell + kTinyCell / 2 - kTinySquare / 2;
        const int y0 = cy * kTinyCell + kTinyCell / 2 - kTinySquare / 2;
        for (int y = std::max(0, y0); y < std::min(kTinyInput, y0 + kTinySquare); ++y) {
            for (int x = std::max(0, x0); x < std::min(kTinyInput, x0 + kTinySquare); ++x) {
                auto* p = img.pixel(x, y);
                p[0] = p[1] = p[2] = 255;
            }
        }
    }
    return img;
}

std::vector<std::pair<int, int>> random_cells(std::mt19937_64& rng, int max_count) {
    const int cells = kTinyInput / kTinyCell;
    std::vector<std::pair<int, int>> out;
    std::uniform_int_distribution<int> pos(0, cells - 1);
    for (int attempt = 0; attempt < 200 && static_cast<int>(out.size()) < max_count; ++attempt) {
        const std::pair<int, int> c{pos(rng), pos(rng)};
        const bool clear = std::all_of(out.begin(), out.end(), [&](const auto& o) {
            return std::max(std::abs(o.first - c.first), std::abs(o.second - c.second)) >= 3;
        });
        if (clear) out.push_back(c);
    }
    return out;
}

fishdet::Tensor random_tensor(std::mt19937_64& rng, int c, int h, int w, float lo, float hi) {
    std::uniform_real_distribution<float> dist(lo, hi);
    fishdet::Tensor t(c, h, w);
    for (auto& v : t.data()) v = dist(rng);
    return t;
}

fishdet::ConvParams random_conv_params(std::mt19937_64& rng, const fishdet::ConvolutionalDef& def, int in_channels) {
    std::uniform_real_distribution<float> w(-1.f, 1.f);
    std::uniform_real_distribution<float> pos(0.5f, 2.f);
    fishdet::ConvParams p;
    p.filters = def.filters;
    p.in_channels = in_channels;
    p.size = def.size;
    p.batch_normalize = def.batch_normalize;
    p.biases.resize(static_cast<std::size_t>(def.filters));
    for (auto& b : p.biases) b = w(rng);
    if (def.batch_normalize) {
        for (int f = 0; f < def.filters; ++f) {
            p.scales.push_back(pos(rng));
            p.rolling_mean.push_back(w(rng));
            p.rolling_variance.push_back(pos(rng));
        }
    }
    p.weights.resize(p.kernel_volume() * static_cast<std::size_t>(def.filters));
    for (auto& v : p.weights) v = w(rng);
    return p;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace fixture
