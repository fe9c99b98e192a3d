#include "gcflow/tensor.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace gcflow {

namespace {

constexpr std::uint64_t kMaxElements = 1ull << 33;

std::size_t checked_size(int b, int c, int h, int w) {
    if (b < 0 || c < 0 || h < 0 || w < 0)
        throw std::invalid_argument("Tensor4: negative dimension");
    const std::uint64_t n = static_cast<std::uint64_t>(b) * static_cast<std::uint64_t>(c) *
                            static_cast<std::uint64_t>(h) * static_cast<std::uint64_t>(w);
    if (n > kMaxElements)
        throw std::invalid_argument("Tensor4: tensor too large (" + std::to_string(n) + " elements)");
    return static_cast<std::size_t>(n);
}

}  // namespace

Tensor4::Tensor4(int batch, int channels, int height, int width, float fill)
    : b_(batch), c_(channels), h_(height), w_(width),
      data_(checked_size(batch, channels, height, width), fill) {}

Tensor4::Tensor4(int batch, int channels, int height, int width, std::vector<float> data)
    : b_(batch), c_(channels), h_(height), w_(width), data_(std::move(data)) {
    if (data_.size() != checked_size(batch, channels, height, width))
        throw std::invalid_argument("Tensor4: data length does not match dims");
}

bool Tensor4::all_finite() const {
    for (float v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

FlowField::FlowField(int batch, int height, int width) : t_(batch, 2, height, width) {}

FlowField::FlowField(Tensor4 tensor) : t_(std::move(tensor)) {
    if (t_.channels() != 2)
        throw std::invalid_argument("FlowField: expected 2 channels, got " +
                                    std::to_string(t_.channels()));
    if (!t_.all_finite())
        throw std::invalid_argument("FlowField: non-finite flow value");
}

FlowField FlowField::negated() const {
    FlowField out(batch(), height(), width());
    const auto src = t_.values();
    auto dst = out.t_.values();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = -src[i];
    return out;
}

ImageFrame::ImageFrame(Tensor4 tensor) : t_(std::move(tensor)) {
    if (t_.batch() != 1)
        throw std::invalid_argument("ImageFrame: batch must be 1");
    if (t_.channels() != 1 && t_.channels() != 3)
        throw std::invalid_argument("ImageFrame: channels must be 1 or 3, got " +
                                    std::to_string(t_.channels()));
}

}  // namespace gcflow
