#pragma once

#include <cstdint>

namespace gcflow {

// Minimal PCG32 (XSH-RR) generator. Used wherever randomness must be
// reproducible bit-for-bit across platforms: attention weight init,
// synthetic flicker, test data.
class Pcg32 {
public:
    explicit Pcg32(std::uint64_t initstate, std::uint64_t initseq = 0) {
        state_ = 0u;
        inc_ = (initseq << 1u) | 1u;
        next();
        state_ += initstate;
        next();
    }

    std::uint32_t next() {
        const std::uint64_t old = state_;
        state_ = old * 6364136223846793005ULL + inc_;
        const auto xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
        const auto rot = static_cast<std::uint32_t>(old >> 59u);
        return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
    }

    // [0, 1) with 24-bit resolution, exact in float
    float next_float() { return static_cast<float>(next() >> 8) * 0x1.0p-24f; }

    float uniform(float lo, float hi) { return lo + (hi - lo) * next_float(); }

    // small-range integer draw for test data; bias is irrelevant at these sizes
    int below(int n) { return static_cast<int>(next() % static_cast<std::uint32_t>(n)); }

private:
    std::uint64_t state_;
    std::uint64_t inc_;
};

}  // namespace gcflow
