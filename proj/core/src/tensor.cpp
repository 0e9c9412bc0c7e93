#include "fishdet/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "fishdet/error.hpp"

namespace fishdet {

Tensor::Tensor(int channels, int height, int width, float fill)
    : channels_(channels), height_(height), width_(width) {
    if (channels < 0 || height < 0 || width < 0) throw Error(Errc::InvalidValue, "negative tensor dimension");
    data_.assign(static_cast<std::size_t>(channels) * height * width, fill);
}

Tensor::Tensor(int channels, int height, int width, std::vector<float> data)
    : channels_(channels), height_(height), width_(width), data_(std::move(data)) {
    if (channels < 0 || height < 0 || width < 0 ||
        data_.size() != static_cast<std::size_t>(channels) * height * width) {
        throw Error(Errc::InvalidValue, "tensor data length does not match its dimensions");
    }
}

bool Tensor::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

}  // namespace fishdet
