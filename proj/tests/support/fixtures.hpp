#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "fishdet/config.hpp"
#include "fishdet/image.hpp"
#include "fishdet/tensor.hpp"
#include "fishdet/weights.hpp"

namespace fixture {

/// Directory holding the shipped network configs.
std::string data_dir();
std::string yolov3_config_path();
std::string tiny_config_path();

/// Unique scratch directory, removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

/// Six-layer network: grayscale, three 2x2 mean pools (64 -> 8 cells),
/// then a head whose first anchor fires on cells with mean brightness > 0.75.
fishdet::WeightedNetwork tiny_network();

/// Cell size of the tiny network's head, in pixels.
inline constexpr int kTinyCell = 8;
inline constexpr int kTinyInput = 64;
inline constexpr int kTinySquare = 16;

/// Black 64x64 image with a white 16x16 square centred on each listed cell.
fishdet::Image squares_image(const std::vector<std::pair<int, int>>& cells);

/// Random cell sets whose squares keep every other cell's mean at or below 0.5.
std::vector<std::pair<int, int>> random_cells(std::mt19937_64& rng, int max_count);

fishdet::Tensor random_tensor(std::mt19937_64& rng, int c, int h, int w, float lo = -1.f, float hi = 1.f);

fishdet::ConvParams random_conv_params(std::mt19937_64& rng, const fishdet::ConvolutionalDef& def, int in_channels);

/// Writes `text` to `path`.
void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace fixture
