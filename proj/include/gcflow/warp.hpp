#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gcflow/tensor.hpp"

namespace gcflow {

// Normalized sampling positions, one (x', y') pair per output pixel with
// both components in [-1, 1]. Layout (B, H, W, 2), x' first.
class SampleGrid {
public:
    SampleGrid() = default;
    SampleGrid(int batch, int height, int width)
        : b_(batch), h_(height), w_(width),
          xy_(static_cast<std::size_t>(batch) * height * width * 2, 0.0f) {}

    int batch() const { return b_; }
    int height() const { return h_; }
    int width() const { return w_; }

    float x(int b, int h, int w) const { return xy_[offset(b, h, w)]; }
    float& x(int b, int h, int w) { return xy_[offset(b, h, w)]; }
    float y(int b, int h, int w) const { return xy_[offset(b, h, w) + 1]; }
    float& y(int b, int h, int w) { return xy_[offset(b, h, w) + 1]; }

    std::span<const float> values() const { return xy_; }

    friend bool operator==(const SampleGrid&, const SampleGrid&) = default;

private:
    std::size_t offset(int b, int h, int w) const {
        return ((static_cast<std::size_t>(b) * h_ + h) * w_ + w) * 2;
    }

    int b_ = 0, h_ = 0, w_ = 0;
    std::vector<float> xy_;
};

struct PixelCoord {
    float x, y;
};

// Convex bilinear weights; w00 + w10 + w01 + w11 == 1. Index order is
// (x-neighbor, y-neighbor): w10 weights the pixel right of the base corner.
struct BilinearWeights {
    float w00, w10, w01, w11;
};

// x'(w) = 2w/(W-1) - 1, y'(h) = 2h/(H-1) - 1; identical across the batch.
// Requires height, width >= 2 (normalization divides by dim - 1).
SampleGrid make_grid(int height, int width, int batch = 1);

// x' <- clamp(x' + 2u/(W-1), -1, 1) and likewise for y' with v; a flow of
// k pixels moves the sample exactly k lattice steps.
SampleGrid offset_grid(const SampleGrid& grid, const FlowField& flow);

// Inverse of the normalization: x_real = (x' + 1)(W - 1)/2.
PixelCoord denormalize(float xn, float yn, int width, int height);

// Weights from the fractional parts of (x_real, y_real).
BilinearWeights bilinear_weights(float x_real, float y_real);

// Backward warp: out[b,c,h,w] samples `frame` bilinearly at the flow-offset
// grid position. The flow is applied as a sampling offset (sample at
// p + F(p)); coordinates are clamped so arbitrarily large flows never index
// outside the frame, with exact border replication at the edges. Zero flow
// reproduces the input bit-exactly.
Tensor4 reconstruct_frame(const Tensor4& frame, const FlowField& flow);

// Warps frame t forward along an estimated flow so it predicts frame t+1:
// samples at p - F(p). Estimators report forward motion, hence the sign
// flip relative to reconstruct_frame.
Tensor4 compensate_frame(const Tensor4& frame, const FlowField& forward_flow);

// Elementwise |a - b|.
Tensor4 residual(const Tensor4& recon, const Tensor4& next);

}  // namespace gcflow
