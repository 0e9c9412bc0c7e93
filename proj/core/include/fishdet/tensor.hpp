#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fishdet/config.hpp"

namespace fishdet {

/// Dense channels x height x width array of 32-bit reals, channel-major.
class Tensor {
public:
    Tensor() = default;
    Tensor(int channels, int height, int width, float fill = 0.f);
    Tensor(int channels, int height, int width, std::vector<float> data);

    int channels() const noexcept { return channels_; }
    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    Shape shape() const noexcept { return {channels_, height_, width_}; }
    std::size_t size() const noexcept { return data_.size(); }
    std::size_t plane_size() const noexcept { return static_cast<std::size_t>(height_) * width_; }
    bool empty() const noexcept { return data_.empty(); }

    float& at(int c, int y, int x) noexcept { return data_[index(c, y, x)]; }
    float at(int c, int y, int x) const noexcept { return data_[index(c, y, x)]; }

    std::span<float> data() noexcept { return data_; }
    std::span<const float> data() const noexcept { return data_; }
    std::span<float> plane(int c) noexcept { return std::span<float>(data_).subspan(c * plane_size(), plane_size()); }
    std::span<const float> plane(int c) const noexcept {
        return std::span<const float>(data_).subspan(c * plane_size(), plane_size());
    }

    bool all_finite() const noexcept;

    bool operator==(const Tensor&) const = default;

private:
    std::size_t index(int c, int y, int x) const noexcept {
        return (static_cast<std::size_t>(c) * height_ + y) * width_ + x;
    }

    int channels_ = 0;
    int height_ = 0;
    int width_ = 0;
    std::vector<float> data_;
};

}  // namespace fishdet
