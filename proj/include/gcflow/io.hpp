#pragma once

#include <filesystem>

#include "gcflow/tensor.hpp"

namespace gcflow {

// GCFT tensor container: magic "GCFT", version u8 = 1, dtype u8 = 1
// (float32), ndim u8 = 4, pad u8 = 0, four u32 little-endian dims
// (B, C, H, W), then B*C*H*W float32 little-endian, width fastest.
// Reading rejects any file whose payload length disagrees with the header.
Tensor4 read_tensor(const std::filesystem::path& path);
void write_tensor(const Tensor4& tensor, const std::filesystem::path& path);

// Binary netpbm, P6 (RGB) or P5 (gray), maxval 255 only. Samples map to
// value/255 on load; writing rounds clamp(x, 0, 1) * 255.
ImageFrame read_image(const std::filesystem::path& path);
void write_image(const ImageFrame& frame, const std::filesystem::path& path);

// Middlebury .flo: magic bytes "PIEH", width i32, height i32, then
// interleaved (u, v) float32 per pixel, little-endian. Single batch.
FlowField read_flo(const std::filesystem::path& path);
void write_flo(const FlowField& flow, const std::filesystem::path& path);

enum class FileKind { Gcft, Pnm, Flo, Unknown };

// Looks at the magic bytes only.
FileKind sniff_file(const std::filesystem::path& path);

// Loads any of the three formats as a tensor (images scaled to [0, 1],
// flows as (1, 2, H, W)).
Tensor4 load_tensor_auto(const std::filesystem::path& path);

}  // namespace gcflow
