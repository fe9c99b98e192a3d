#pragma once

#include <unistd.h>

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "gcflow/pcg32.hpp"
#include "gcflow/tensor.hpp"

namespace testing {

namespace fs = std::filesystem;

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::uint64_t counter = 0;
        path_ = fs::temp_directory_path() /
                ("gcflow-" + tag + "-" + std::to_string(::getpid()) + "-" +
                 std::to_string(counter++));
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path file(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

inline gcflow::Tensor4 random_tensor(gcflow::Pcg32& rng, int b, int c, int h, int w,
                                     float lo = 0.0f, float hi = 1.0f) {
    gcflow::Tensor4 t(b, c, h, w);
    for (float& v : t.values()) v = rng.uniform(lo, hi);
    return t;
}

inline gcflow::FlowField random_flow(gcflow::Pcg32& rng, int b, int h, int w, float mag) {
    gcflow::FlowField f(b, h, w);
    for (float& v : f.tensor().values()) v = rng.uniform(-mag, mag);
    return f;
}

inline double max_abs_diff(const gcflow::Tensor4& a, const gcflow::Tensor4& b) {
    double m = 0.0;
    const auto av = a.values();
    const auto bv = b.values();
    for (std::size_t i = 0; i < av.size(); ++i) {
        const double d = std::abs(static_cast<double>(av[i]) - static_cast<double>(bv[i]));
        if (d > m) m = d;
    }
    return m;
}

inline std::vector<std::uint8_t> slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
}

inline void spit(const fs::path& p, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

}  // namespace testing
