#pragma once

#include "gcflow/tensor.hpp"

namespace gcflow {

struct FlowParams {
    float alpha = 15.0f;    // smoothness weight
    int iterations = 200;   // fixed Jacobi iteration count
    bool prefilter = true;  // 3x3 Gaussian, sigma 1, on the luminance
};

// Classical single-scale Horn-Schunck. Spatial derivatives are central
// differences averaged over the two frames, the temporal derivative is the
// forward difference, boundaries replicate edges. RGB input is reduced to
// luminance (0.299 R + 0.587 G + 0.114 B). The returned field is forward
// motion: a pattern translated by (+1, 0) pixels yields u near +1.
// Deterministic: identical inputs and params give bit-identical output.
FlowField horn_schunck(const ImageFrame& prev, const ImageFrame& next,
                       const FlowParams& params = {});

}  // namespace gcflow
