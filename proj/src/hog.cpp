#include "gcflow/hog.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace gcflow {

namespace {

constexpr double kSobelX[3][3] = {{1, 0, -1}, {2, 0, -2}, {1, 0, -1}};
constexpr float kPiF = static_cast<float>(std::numbers::pi);

// mirror index for pad-by-one reflection that excludes the edge sample
inline int reflect(int i, int n) {
    if (i < 0) return -i;
    if (i >= n) return 2 * n - 2 - i;
    return i;
}

inline int orientation_bin(float phase) {
    const double t =
        (static_cast<double>(phase) + std::numbers::pi) / (2.0 * std::numbers::pi) * 9.0;
    int k = static_cast<int>(std::floor(t)) % 9;
    return k < 0 ? k + 9 : k;
}

}  // namespace

GradientPair sobel_gradients(const Tensor4& x) {
    const int H = x.height(), W = x.width();
    if (H < 3 || W < 3)
        throw std::invalid_argument("sobel_gradients: height and width must be >= 3, got " +
                                    std::to_string(H) + "x" + std::to_string(W));

    GradientPair gp{Tensor4(x.batch(), x.channels(), H, W),
                    Tensor4(x.batch(), x.channels(), H, W)};
    for (int b = 0; b < x.batch(); ++b)
        for (int c = 0; c < x.channels(); ++c)
            for (int h = 0; h < H; ++h)
                for (int w = 0; w < W; ++w) {
                    // double accumulation is exact for float inputs with
                    // these integer weights; at reflected borders the
                    // opposing terms then cancel to a true zero instead of
                    // leaving a rounding residue with an arbitrary sign
                    double sx = 0.0, sy = 0.0;
                    for (int i = 0; i < 3; ++i) {
                        const int hh = reflect(h + i - 1, H);
                        for (int j = 0; j < 3; ++j) {
                            const int ww = reflect(w + j - 1, W);
                            const double v = x.at(b, c, hh, ww);
                            sx += kSobelX[i][j] * v;
                            sy += kSobelX[j][i] * v;  // weight_y = weight_x^T
                        }
                    }
                    gp.gx.at(b, c, h, w) = static_cast<float>(sx);
                    gp.gy.at(b, c, h, w) = static_cast<float>(sy);
                }
    return gp;
}

MagnitudePhase magnitude_phase(const GradientPair& gp) {
    if (!gp.gx.same_dims(gp.gy))
        throw std::invalid_argument("magnitude_phase: gx/gy dimension mismatch");
    MagnitudePhase mp{Tensor4(gp.gx.batch(), gp.gx.channels(), gp.gx.height(), gp.gx.width()),
                      Tensor4(gp.gx.batch(), gp.gx.channels(), gp.gx.height(), gp.gx.width())};
    const auto gx = gp.gx.values();
    const auto gy = gp.gy.values();
    auto norm = mp.norm.values();
    auto phase = mp.phase.values();
    for (std::size_t i = 0; i < gx.size(); ++i) {
        norm[i] = std::sqrt(gx[i] * gx[i] + gy[i] * gy[i]);
        if (gx[i] == 0.0f && gy[i] == 0.0f) {
            phase[i] = 0.0f;
        } else {
            float p = std::atan2(gy[i], gx[i]);
            if (p <= -kPiF) p = kPiF;  // keep the range half-open at -pi
            phase[i] = p;
        }
    }
    return mp;
}

Tensor4 orientation_histogram(const Tensor4& norm, const Tensor4& phase) {
    if (!norm.same_dims(phase))
        throw std::invalid_argument("orientation_histogram: norm/phase dimension mismatch");
    Tensor4 out(norm.batch(), norm.channels() * kOrientationBins, norm.height(), norm.width());
    for (int b = 0; b < norm.batch(); ++b)
        for (int c = 0; c < norm.channels(); ++c)
            for (int h = 0; h < norm.height(); ++h)
                for (int w = 0; w < norm.width(); ++w) {
                    const int k = orientation_bin(phase.at(b, c, h, w));
                    out.at(b, c * kOrientationBins + k, h, w) += norm.at(b, c, h, w);
                }
    return out;
}

Tensor4 pool_normalize(const Tensor4& hist, int pool) {
    if (pool < 1) throw std::invalid_argument("pool_normalize: pool must be >= 1");
    if (hist.channels() % kOrientationBins != 0)
        throw std::invalid_argument("pool_normalize: channel count is not a multiple of 9");
    const int H = hist.height(), W = hist.width();
    if (H % pool != 0 || W % pool != 0)
        throw std::invalid_argument("pool_normalize: pool " + std::to_string(pool) +
                                    " does not divide " + std::to_string(H) + "x" +
                                    std::to_string(W));

    const int channels = hist.channels() / kOrientationBins;
    const int bh = H / pool, bw = W / pool;
    Tensor4 out(hist.batch(), hist.channels(), bh, bw);
    for (int b = 0; b < hist.batch(); ++b)
        for (int c = 0; c < channels; ++c)
            for (int y = 0; y < bh; ++y)
                for (int x = 0; x < bw; ++x) {
                    double bins[kOrientationBins];
                    double sq = 0.0;
                    for (int k = 0; k < kOrientationBins; ++k) {
                        double s = 0.0;
                        for (int dh = 0; dh < pool; ++dh)
                            for (int dw = 0; dw < pool; ++dw)
                                s += hist.at(b, c * kOrientationBins + k, y * pool + dh,
                                             x * pool + dw);
                        bins[k] = s;
                        sq += s * s;
                    }
                    const double denom = std::max(std::sqrt(sq), 1e-12);
                    for (int k = 0; k < kOrientationBins; ++k)
                        out.at(b, c * kOrientationBins + k, y, x) =
                            static_cast<float>(bins[k] / denom);
                }
    return out;
}

Tensor4 hog(const Tensor4& x, int pool) {
    const MagnitudePhase mp = magnitude_phase(sobel_gradients(x));
    return pool_normalize(orientation_histogram(mp.norm, mp.phase), pool);
}

}  // namespace gcflow
