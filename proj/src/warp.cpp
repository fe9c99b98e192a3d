#include "gcflow/warp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gcflow {

SampleGrid make_grid(int height, int width, int batch) {
    if (height < 2 || width < 2)
        throw std::invalid_argument("make_grid: height and width must be >= 2, got " +
                                    std::to_string(height) + "x" + std::to_string(width));
    if (batch < 1) throw std::invalid_argument("make_grid: batch must be >= 1");

    SampleGrid grid(batch, height, width);
    for (int b = 0; b < batch; ++b)
        for (int h = 0; h < height; ++h) {
            const float yn = 2.0f * static_cast<float>(h) / static_cast<float>(height - 1) - 1.0f;
            for (int w = 0; w < width; ++w) {
                grid.x(b, h, w) =
                    2.0f * static_cast<float>(w) / static_cast<float>(width - 1) - 1.0f;
                grid.y(b, h, w) = yn;
            }
        }
    return grid;
}

SampleGrid offset_grid(const SampleGrid& grid, const FlowField& flow) {
    if (grid.batch() != flow.batch() || grid.height() != flow.height() ||
        grid.width() != flow.width())
        throw std::invalid_argument("offset_grid: grid/flow dimension mismatch");

    SampleGrid out = grid;
    const float dx = static_cast<float>(grid.width() - 1);
    const float dy = static_cast<float>(grid.height() - 1);
    for (int b = 0; b < grid.batch(); ++b)
        for (int h = 0; h < grid.height(); ++h)
            for (int w = 0; w < grid.width(); ++w) {
                out.x(b, h, w) =
                    std::clamp(grid.x(b, h, w) + 2.0f * flow.u(b, h, w) / dx, -1.0f, 1.0f);
                out.y(b, h, w) =
                    std::clamp(grid.y(b, h, w) + 2.0f * flow.v(b, h, w) / dy, -1.0f, 1.0f);
            }
    return out;
}

PixelCoord denormalize(float xn, float yn, int width, int height) {
    return {(xn + 1.0f) * static_cast<float>(width - 1) * 0.5f,
            (yn + 1.0f) * static_cast<float>(height - 1) * 0.5f};
}

BilinearWeights bilinear_weights(float x_real, float y_real) {
    const float fx = x_real - std::floor(x_real);
    const float fy = y_real - std::floor(y_real);
    return {(1.0f - fx) * (1.0f - fy), fx * (1.0f - fy), (1.0f - fx) * fy, fx * fy};
}

Tensor4 reconstruct_frame(const Tensor4& frame, const FlowField& flow) {
    if (frame.batch() != flow.batch() || frame.height() != flow.height() ||
        frame.width() != flow.width())
        throw std::invalid_argument("reconstruct_frame: frame/flow dimension mismatch");
    const int H = frame.height(), W = frame.width();
    if (H < 2 || W < 2)
        throw std::invalid_argument("reconstruct_frame: height and width must be >= 2");

    Tensor4 out(frame.batch(), frame.channels(), H, W);
    for (int b = 0; b < frame.batch(); ++b)
        for (int h = 0; h < H; ++h)
            for (int w = 0; w < W; ++w) {
                // Sample position in pixels. Equal to the normalized-grid
                // composition (make_grid, offset_grid with clamp,
                // denormalize) in exact arithmetic; the pixel-space form
                // keeps the zero-flow case bit-exact. The [-1, 1] clamp
                // maps to [0, dim-1] under the affine inverse.
                const float xr =
                    std::clamp(static_cast<float>(w) + flow.u(b, h, w), 0.0f,
                               static_cast<float>(W - 1));
                const float yr =
                    std::clamp(static_cast<float>(h) + flow.v(b, h, w), 0.0f,
                               static_cast<float>(H - 1));
                const int x0 = static_cast<int>(xr);
                const int y0 = static_cast<int>(yr);
                const int x1 = x0 + 1 < W ? x0 + 1 : W - 1;
                const int y1 = y0 + 1 < H ? y0 + 1 : H - 1;
                const BilinearWeights bw = bilinear_weights(xr, yr);
                for (int c = 0; c < frame.channels(); ++c)
                    out.at(b, c, h, w) = bw.w00 * frame.at(b, c, y0, x0) +
                                         bw.w10 * frame.at(b, c, y0, x1) +
                                         bw.w01 * frame.at(b, c, y1, x0) +
                                         bw.w11 * frame.at(b, c, y1, x1);
            }
    return out;
}

Tensor4 compensate_frame(const Tensor4& frame, const FlowField& forward_flow) {
    return reconstruct_frame(frame, forward_flow.negated());
}

Tensor4 residual(const Tensor4& recon, const Tensor4& next) {
    if (!recon.same_dims(next))
        throw std::invalid_argument("residual: dimension mismatch");
    Tensor4 out(recon.batch(), recon.channels(), recon.height(), recon.width());
    const auto a = recon.values();
    const auto b = next.values();
    auto o = out.values();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = std::fabs(a[i] - b[i]);
    return out;
}

}  // namespace gcflow
