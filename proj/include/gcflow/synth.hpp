#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gcflow/flow.hpp"
#include "gcflow/tensor.hpp"

namespace gcflow {

struct Rect {
    int x0 = 0, y0 = 0, w = 0, h = 0;
};

// Deterministic description of a generated grayscale test sequence: a
// fixed sinusoid texture translating at `velocity` pixels per frame, with
// zero-mean uniform flicker of amplitude `perturb_amp` added inside
// `perturb_rect` (the stand-in for a tampered region).
struct SyntheticSpec {
    int width = 64;
    int height = 64;
    int frames = 8;
    float vx = 2.0f;
    float vy = 0.0f;
    Rect perturb_rect{24, 24, 16, 16};
    float perturb_amp = 0.3f;
    std::uint64_t seed = 7;

    static SyntheticSpec defaults() { return {}; }
};

struct SyntheticSequence {
    std::vector<ImageFrame> frames;
    FlowField true_flow;  // constant (vx, vy), the forward motion of the texture
};

// Background: three plane waves at 2, 5 and 11 cycles per frame width with
// amplitudes 0.30, 0.15, 0.05 around a 0.5 mean, directions 0/60/120
// degrees, phases drawn from PCG32(seed, 0). Frame t samples the field at
// (x - t*vx, y - t*vy) analytically, so translation is exact (no
// resampling blur). Flicker for frame t is drawn from PCG32(seed, 1 + t)
// in raster order over the rect; values are clamped to [0, 1].
SyntheticSequence gen_sequence(const SyntheticSpec& spec);

// Mean over frames of (mean squared residual inside rect) /
// (mean squared residual outside rect + 1e-12). Pixels within
// `border_margin` of the frame edge are excluded from both regions.
double energy_ratio(std::span<const Tensor4> residuals, const Rect& rect,
                    int border_margin = 0);

struct EnergyReport {
    struct PairEnergies {
        double plain_in, plain_out;  // |I_{t+1} - I_t|
        double true_in, true_out;    // compensated with the ground-truth flow
        double est_in, est_out;      // compensated with the estimated flow
    };
    std::vector<PairEnergies> pairs;  // mean-square energies per frame pair
    int border_margin = 0;
    double ratio_plain = 0.0;
    double ratio_compensated_true = 0.0;
    double ratio_compensated_est = 0.0;
};

// For each consecutive pair: the plain residual, the residual after
// compensating with the ground-truth flow, and the residual after
// compensating with the built-in estimator. Border pixels within
// ceil(max(|vx|, |vy|)) + 1 of the edge are excluded from the statistics
// (clamp-induced replication is not a signal).
EnergyReport run_experiment(const SyntheticSpec& spec, const FlowParams& flow_params = {});

}  // namespace gcflow
