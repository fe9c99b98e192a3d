#pragma once

#include "gcflow/tensor.hpp"

namespace gcflow {

inline constexpr int kOrientationBins = 9;

// Per-channel Sobel responses, same dims as the input.
struct GradientPair {
    Tensor4 gx, gy;
};

struct MagnitudePhase {
    Tensor4 norm;   // sqrt(gx^2 + gy^2)
    Tensor4 phase;  // full-quadrant angle of (gx, gy) in (-pi, pi], 0 at (0, 0)
};

// Cross-correlation of each channel with [[1,0,-1],[2,0,-2],[1,0,-1]] and
// its transpose, after reflection padding by one pixel (mirror without
// repeating the edge sample). Requires H, W >= 3.
GradientPair sobel_gradients(const Tensor4& x);

MagnitudePhase magnitude_phase(const GradientPair& gp);

// Orientation histogram: bin k = floor((phase + pi)/(2*pi) * 9) mod 9;
// each pixel's magnitude lands in exactly one bin. Output is
// (B, C*9, H, W): the logical (B, C, 9, H, W) with the (channel, bin) axes
// folded, bin fastest, so channel index = input_channel * 9 + bin.
Tensor4 orientation_histogram(const Tensor4& norm, const Tensor4& phase);

// Sums non-overlapping pool x pool blocks per bin, then divides each
// 9-vector by max(L2, 1e-12) so blocks have unit norm or stay exactly
// zero. Requires pool to divide H and W.
Tensor4 pool_normalize(const Tensor4& hist, int pool);

// Full chain: gradients, magnitude/phase, histogram, pooled + normalized.
// Output dims (B, C*9, H/pool, W/pool) — logical (B, C, 9, H/pool, W/pool).
Tensor4 hog(const Tensor4& x, int pool = 8);

}  // namespace gcflow
