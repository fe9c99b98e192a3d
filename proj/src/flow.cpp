#include "gcflow/flow.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace gcflow {

namespace {

// The energy balance below assumes 8-bit-scale brightness; frames are
// stored in [0, 1], so luminance is rescaled by 255 to keep the default
// alpha in the classical operating range.
std::vector<float> luminance255(const ImageFrame& f) {
    const int H = f.height(), W = f.width();
    std::vector<float> out(static_cast<std::size_t>(H) * W);
    if (f.channels() == 1) {
        for (int h = 0; h < H; ++h)
            for (int w = 0; w < W; ++w)
                out[static_cast<std::size_t>(h) * W + w] = 255.0f * f.pixel(0, h, w);
    } else {
        for (int h = 0; h < H; ++h)
            for (int w = 0; w < W; ++w)
                out[static_cast<std::size_t>(h) * W + w] =
                    255.0f * (0.299f * f.pixel(0, h, w) + 0.587f * f.pixel(1, h, w) +
                              0.114f * f.pixel(2, h, w));
    }
    return out;
}

inline int clampi(int i, int lo, int hi) { return i < lo ? lo : (i > hi ? hi : i); }

std::vector<float> gaussian3(const std::vector<float>& src, int H, int W) {
    // 3x3 Gaussian, sigma 1, normalized over the support, replicated edges
    const double e = std::exp(-0.5);
    const double n = 1.0 + 2.0 * e;
    const float g0 = static_cast<float>(1.0 / n);
    const float g1 = static_cast<float>(e / n);
    const float k[3] = {g1, g0, g1};

    std::vector<float> out(src.size());
    for (int h = 0; h < H; ++h)
        for (int w = 0; w < W; ++w) {
            float s = 0.0f;
            for (int i = 0; i < 3; ++i) {
                const int hh = clampi(h + i - 1, 0, H - 1);
                for (int j = 0; j < 3; ++j) {
                    const int ww = clampi(w + j - 1, 0, W - 1);
                    s += k[i] * k[j] * src[static_cast<std::size_t>(hh) * W + ww];
                }
            }
            out[static_cast<std::size_t>(h) * W + w] = s;
        }
    return out;
}

}  // namespace

FlowField horn_schunck(const ImageFrame& prev, const ImageFrame& next, const FlowParams& params) {
    if (prev.height() != next.height() || prev.width() != next.width() ||
        prev.channels() != next.channels())
        throw std::invalid_argument("horn_schunck: frame dimensions differ");
    if (!(params.alpha > 0.0f))
        throw std::invalid_argument("horn_schunck: alpha must be positive");
    if (params.iterations < 1)
        throw std::invalid_argument("horn_schunck: iterations must be >= 1");

    const int H = prev.height(), W = prev.width();
    const std::size_t n = static_cast<std::size_t>(H) * W;

    std::vector<float> l1 = luminance255(prev);
    std::vector<float> l2 = luminance255(next);
    if (params.prefilter) {
        l1 = gaussian3(l1, H, W);
        l2 = gaussian3(l2, H, W);
    }

    std::vector<float> dx(n), dy(n), dt(n), denom(n);
    const float alpha2 = params.alpha * params.alpha;
    for (int h = 0; h < H; ++h)
        for (int w = 0; w < W; ++w) {
            const std::size_t i = static_cast<std::size_t>(h) * W + w;
            const int wl = clampi(w - 1, 0, W - 1), wr = clampi(w + 1, 0, W - 1);
            const int hu = clampi(h - 1, 0, H - 1), hd = clampi(h + 1, 0, H - 1);
            const float cx1 = 0.5f * (l1[static_cast<std::size_t>(h) * W + wr] -
                                      l1[static_cast<std::size_t>(h) * W + wl]);
            const float cx2 = 0.5f * (l2[static_cast<std::size_t>(h) * W + wr] -
                                      l2[static_cast<std::size_t>(h) * W + wl]);
            const float cy1 = 0.5f * (l1[static_cast<std::size_t>(hd) * W + w] -
                                      l1[static_cast<std::size_t>(hu) * W + w]);
            const float cy2 = 0.5f * (l2[static_cast<std::size_t>(hd) * W + w] -
                                      l2[static_cast<std::size_t>(hu) * W + w]);
            dx[i] = 0.5f * (cx1 + cx2);
            dy[i] = 0.5f * (cy1 + cy2);
            dt[i] = l2[i] - l1[i];
            denom[i] = alpha2 + dx[i] * dx[i] + dy[i] * dy[i];
        }

    // Jacobi iterations on the standard weighted 8-neighborhood average
    constexpr float kOrtho = 1.0f / 6.0f;
    constexpr float kDiag = 1.0f / 12.0f;
    std::vector<float> u(n, 0.0f), v(n, 0.0f), un(n), vn(n);
    for (int iter = 0; iter < params.iterations; ++iter) {
        for (int h = 0; h < H; ++h) {
            const int hu = clampi(h - 1, 0, H - 1), hd = clampi(h + 1, 0, H - 1);
            for (int w = 0; w < W; ++w) {
                const int wl = clampi(w - 1, 0, W - 1), wr = clampi(w + 1, 0, W - 1);
                const std::size_t i = static_cast<std::size_t>(h) * W + w;
                const std::size_t iu = static_cast<std::size_t>(hu) * W;
                const std::size_t id = static_cast<std::size_t>(hd) * W;
                const std::size_t ih = static_cast<std::size_t>(h) * W;
                const float ubar = kOrtho * (u[iu + w] + u[id + w] + u[ih + wl] + u[ih + wr]) +
                                   kDiag * (u[iu + wl] + u[iu + wr] + u[id + wl] + u[id + wr]);
                const float vbar = kOrtho * (v[iu + w] + v[id + w] + v[ih + wl] + v[ih + wr]) +
                                   kDiag * (v[iu + wl] + v[iu + wr] + v[id + wl] + v[id + wr]);
                const float t = (dx[i] * ubar + dy[i] * vbar + dt[i]) / denom[i];
                un[i] = ubar - dx[i] * t;
                vn[i] = vbar - dy[i] * t;
            }
        }
        u.swap(un);
        v.swap(vn);
    }

    FlowField flow(1, H, W);
    for (int h = 0; h < H; ++h)
        for (int w = 0; w < W; ++w) {
            const std::size_t i = static_cast<std::size_t>(h) * W + w;
            flow.u(0, h, w) = u[i];
            flow.v(0, h, w) = v[i];
        }
    return flow;
}

}  // namespace gcflow
