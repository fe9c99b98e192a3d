#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace gcflow {

// Dense rank-4 tensor of float32 values, dims (batch, channels, height,
// width), row-major with width fastest. Every carrier in the pipeline
// (frames, flow fields, features, attention maps) uses this layout;
// lower-rank data rides along with size-1 axes.
class Tensor4 {
public:
    Tensor4() = default;
    Tensor4(int batch, int channels, int height, int width, float fill = 0.0f);
    Tensor4(int batch, int channels, int height, int width, std::vector<float> data);

    int batch() const { return b_; }
    int channels() const { return c_; }
    int height() const { return h_; }
    int width() const { return w_; }
    std::array<int, 4> dims() const { return {b_, c_, h_, w_}; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    float at(int b, int c, int h, int w) const { return data_[offset(b, c, h, w)]; }
    float& at(int b, int c, int h, int w) { return data_[offset(b, c, h, w)]; }

    std::span<const float> values() const { return data_; }
    std::span<float> values() { return data_; }

    bool same_dims(const Tensor4& other) const {
        return b_ == other.b_ && c_ == other.c_ && h_ == other.h_ && w_ == other.w_;
    }
    bool all_finite() const;

    friend bool operator==(const Tensor4&, const Tensor4&) = default;

private:
    std::size_t offset(int b, int c, int h, int w) const {
        return ((static_cast<std::size_t>(b) * c_ + c) * h_ + h) * w_ + w;
    }

    int b_ = 0, c_ = 0, h_ = 0, w_ = 0;
    std::vector<float> data_;
};

// Per-pixel displacement field in pixel units, stored as (B, 2, H, W):
// channel 0 is horizontal u (positive rightward), channel 1 vertical v
// (positive downward).
class FlowField {
public:
    FlowField() = default;
    FlowField(int batch, int height, int width);  // zero field
    explicit FlowField(Tensor4 tensor);           // requires C == 2 and finite values

    int batch() const { return t_.batch(); }
    int height() const { return t_.height(); }
    int width() const { return t_.width(); }

    float u(int b, int h, int w) const { return t_.at(b, 0, h, w); }
    float& u(int b, int h, int w) { return t_.at(b, 0, h, w); }
    float v(int b, int h, int w) const { return t_.at(b, 1, h, w); }
    float& v(int b, int h, int w) { return t_.at(b, 1, h, w); }

    const Tensor4& tensor() const { return t_; }
    Tensor4& tensor() { return t_; }

    // componentwise sign flip; turns a forward-motion field into the
    // sampling offsets that pull frame t onto frame t+1
    FlowField negated() const;

    friend bool operator==(const FlowField&, const FlowField&) = default;

private:
    Tensor4 t_;
};

// Single image, (1, C, H, W) with C of 1 (gray) or 3 (RGB), values
// nominally in [0, 1] (loading scales 8-bit samples by 1/255).
class ImageFrame {
public:
    ImageFrame() = default;
    explicit ImageFrame(Tensor4 tensor);  // requires B == 1 and C in {1, 3}

    int channels() const { return t_.channels(); }
    int height() const { return t_.height(); }
    int width() const { return t_.width(); }

    float pixel(int c, int h, int w) const { return t_.at(0, c, h, w); }
    float& pixel(int c, int h, int w) { return t_.at(0, c, h, w); }

    const Tensor4& tensor() const { return t_; }
    Tensor4& tensor() { return t_; }

    friend bool operator==(const ImageFrame&, const ImageFrame&) = default;

private:
    Tensor4 t_;
};

}  // namespace gcflow
