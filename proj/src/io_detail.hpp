#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gcflow/tensor.hpp"

// Shared byte-level plumbing for the binary container formats. Not part of
// the public surface.
namespace gcflow::detail {

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

// Forward-only view over a byte buffer; every failure message carries the
// source name and the byte offset it refers to.
class Cursor {
public:
    Cursor(std::span<const std::uint8_t> buf, std::string name)
        : buf_(buf), name_(std::move(name)) {}

    std::size_t pos() const { return pos_; }
    std::size_t remaining() const { return buf_.size() - pos_; }
    bool at_end() const { return pos_ == buf_.size(); }
    const std::string& name() const { return name_; }

    const std::uint8_t* take(std::size_t n, const char* what);
    std::uint8_t u8(const char* what);
    std::uint16_t u16le(const char* what);
    std::uint32_t u32le(const char* what);
    std::int32_t i32le(const char* what);
    float f32le(const char* what);

    [[noreturn]] void fail(const std::string& message) const { fail_at(pos_, message); }
    [[noreturn]] void fail_at(std::size_t offset, const std::string& message) const;

private:
    std::span<const std::uint8_t> buf_;
    std::size_t pos_ = 0;
    std::string name_;
};

void append_u8(std::vector<std::uint8_t>& out, std::uint8_t v);
void append_u16le(std::vector<std::uint8_t>& out, std::uint16_t v);
void append_u32le(std::vector<std::uint8_t>& out, std::uint32_t v);
void append_f32le(std::vector<std::uint8_t>& out, float v);

// One GCFT blob, usable standalone or embedded in a container.
std::vector<std::uint8_t> tensor_to_bytes(const Tensor4& tensor);
Tensor4 parse_tensor(Cursor& cur);

}  // namespace gcflow::detail
