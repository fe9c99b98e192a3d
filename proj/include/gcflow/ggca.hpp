#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "gcflow/tensor.hpp"

namespace gcflow {

// Inference weights for the grouped dual-axis attention module. One
// (C/G x C/G) kernel per pooling direction, applied as a 1x1 convolution
// within each channel group and shared across groups and across the
// avg/max branches.
struct GgcaWeights {
    int channels = 0;
    int groups = 0;
    std::vector<float> kernel_h;  // row-major (out, in), size (C/G)^2
    std::vector<float> bias_h;    // size C/G
    std::vector<float> kernel_w;
    std::vector<float> bias_w;

    int group_channels() const { return channels / groups; }

    friend bool operator==(const GgcaWeights&, const GgcaWeights&) = default;
};

// Kernels drawn uniformly from [-k, k] with k = (C/G)^(-1/2) using
// PCG32(seed); biases start at zero and consume no draws. Draw order is
// kernel_h row-major, then kernel_w row-major.
GgcaWeights init_weights(int channels, int groups, std::uint64_t seed = 42);

// GCFW container: magic "GCFW", u32 entry count, then per entry a u16
// name length, the UTF-8 name, and an embedded GCFT blob. Canonical
// entries: kernel_h (1,1,Cg,Cg), bias_h (1,1,1,Cg), kernel_w, bias_w and
// meta (1,1,1,2) holding (C, G).
GgcaWeights read_ggca_weights(const std::filesystem::path& path);
void write_ggca_weights(const GgcaWeights& weights, const std::filesystem::path& path);

// Dual-axis pooling of a grouped tensor (B*G, C/G, H, W): the h maps hold
// one value per height position (pooled over width), the w maps one per
// width position (pooled over height).
struct DirectionalPools {
    Tensor4 h_avg, h_max;  // (B*G, C/G, H, 1)
    Tensor4 w_avg, w_max;  // (B*G, C/G, 1, W)
};

struct AttentionPair {
    Tensor4 height;  // (B, C, H, 1), values in (0, 1)
    Tensor4 width;   // (B, C, 1, W)
};

// Reinterprets (B, C, H, W) as (B*G, C/G, H, W); the flat layout is
// unchanged. ungroup_channels is the inverse.
Tensor4 group_channels(const Tensor4& t, int groups);
Tensor4 ungroup_channels(const Tensor4& t, int groups);

DirectionalPools directional_pool(const Tensor4& grouped);

// Per group and direction: 1x1 convolution (kernel + bias) applied to the
// avg and the max map, branch outputs summed, then the logistic sigmoid.
// The G groups are concatenated back to C channels.
AttentionPair attention_weights(const DirectionalPools& pools, const GgcaWeights& weights);

// O[b,c,h,w] = R[b,c,h,w] * Att_h[b,c,h] * Att_w[b,c,w]; dims preserved.
Tensor4 ggca_forward(const Tensor4& input, const GgcaWeights& weights);

}  // namespace gcflow
