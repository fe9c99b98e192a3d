#include "gcflow/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "gcflow/pcg32.hpp"
#include "gcflow/warp.hpp"

namespace gcflow {

namespace {

void validate(const SyntheticSpec& s) {
    if (s.width < 16 || s.height < 16)
        throw std::invalid_argument("SyntheticSpec: width and height must be >= 16");
    if (s.frames < 2) throw std::invalid_argument("SyntheticSpec: frames must be >= 2");
    if (!(s.perturb_amp >= 0.0f && s.perturb_amp <= 1.0f))
        throw std::invalid_argument("SyntheticSpec: perturb_amp must be in [0, 1]");
    const Rect& r = s.perturb_rect;
    if (r.w < 1 || r.h < 1 || r.x0 < 0 || r.y0 < 0 || r.x0 + r.w > s.width ||
        r.y0 + r.h > s.height)
        throw std::invalid_argument("SyntheticSpec: perturb_rect must lie inside the frame");
    if (!std::isfinite(s.vx) || !std::isfinite(s.vy))
        throw std::invalid_argument("SyntheticSpec: velocity must be finite");
}

struct RegionStats {
    double inside_ms = 0.0, outside_ms = 0.0;
};

RegionStats region_mean_square(const Tensor4& r, const Rect& rect, int margin) {
    double in_sum = 0.0, out_sum = 0.0;
    long in_n = 0, out_n = 0;
    for (int b = 0; b < r.batch(); ++b)
        for (int c = 0; c < r.channels(); ++c)
            for (int h = margin; h < r.height() - margin; ++h)
                for (int w = margin; w < r.width() - margin; ++w) {
                    const double v = r.at(b, c, h, w);
                    const bool inside = w >= rect.x0 && w < rect.x0 + rect.w && h >= rect.y0 &&
                                        h < rect.y0 + rect.h;
                    if (inside) {
                        in_sum += v * v;
                        ++in_n;
                    } else {
                        out_sum += v * v;
                        ++out_n;
                    }
                }
    return {in_n > 0 ? in_sum / in_n : 0.0, out_n > 0 ? out_sum / out_n : 0.0};
}

constexpr double kEps = 1e-12;

}  // namespace

SyntheticSequence gen_sequence(const SyntheticSpec& spec) {
    validate(spec);

    // fixed texture: plane waves at 2, 5, 11 cycles per frame width,
    // amplitudes summing to 0.5 around a 0.5 mean, directions 0/60/120 deg
    constexpr double kFreq[3] = {2.0, 5.0, 11.0};
    constexpr double kAmp[3] = {0.30, 0.15, 0.05};
    constexpr double kDir[3] = {0.0, std::numbers::pi / 3.0, 2.0 * std::numbers::pi / 3.0};

    Pcg32 phase_rng(spec.seed, 0);
    double phase[3], cx[3], cy[3];
    for (int i = 0; i < 3; ++i) {
        phase[i] = 2.0 * std::numbers::pi * static_cast<double>(phase_rng.next_float());
        cx[i] = std::cos(kDir[i]);
        cy[i] = std::sin(kDir[i]);
    }

    auto field = [&](double x, double y) {
        double v = 0.5;
        for (int i = 0; i < 3; ++i)
            v += kAmp[i] *
                 std::sin(2.0 * std::numbers::pi * kFreq[i] * (cx[i] * x + cy[i] * y) / spec.width +
                          phase[i]);
        return v;
    };

    SyntheticSequence seq;
    seq.frames.reserve(spec.frames);
    for (int t = 0; t < spec.frames; ++t) {
        Tensor4 img(1, 1, spec.height, spec.width);
        for (int h = 0; h < spec.height; ++h)
            for (int w = 0; w < spec.width; ++w) {
                // the texture advances by +velocity per frame
                const double x = static_cast<double>(w) - static_cast<double>(t) * spec.vx;
                const double y = static_cast<double>(h) - static_cast<double>(t) * spec.vy;
                img.at(0, 0, h, w) = static_cast<float>(field(x, y));
            }
        if (spec.perturb_amp > 0.0f) {
            Pcg32 flicker(spec.seed, 1 + static_cast<std::uint64_t>(t));
            const Rect& r = spec.perturb_rect;
            for (int h = r.y0; h < r.y0 + r.h; ++h)
                for (int w = r.x0; w < r.x0 + r.w; ++w)
                    img.at(0, 0, h, w) +=
                        spec.perturb_amp * (2.0f * flicker.next_float() - 1.0f);
        }
        for (float& v : img.values()) v = std::clamp(v, 0.0f, 1.0f);
        seq.frames.emplace_back(std::move(img));
    }

    seq.true_flow = FlowField(1, spec.height, spec.width);
    for (int h = 0; h < spec.height; ++h)
        for (int w = 0; w < spec.width; ++w) {
            seq.true_flow.u(0, h, w) = spec.vx;
            seq.true_flow.v(0, h, w) = spec.vy;
        }
    return seq;
}

double energy_ratio(std::span<const Tensor4> residuals, const Rect& rect, int border_margin) {
    if (residuals.empty()) throw std::invalid_argument("energy_ratio: no residual frames");
    if (rect.w < 1 || rect.h < 1) throw std::invalid_argument("energy_ratio: degenerate rect");
    const Tensor4& first = residuals.front();
    if (rect.x0 < 0 || rect.y0 < 0 || rect.x0 + rect.w > first.width() ||
        rect.y0 + rect.h > first.height())
        throw std::invalid_argument("energy_ratio: rect outside the frame");
    if (border_margin < 0) throw std::invalid_argument("energy_ratio: negative margin");

    double acc = 0.0;
    for (const Tensor4& r : residuals) {
        if (!r.same_dims(first))
            throw std::invalid_argument("energy_ratio: residual dims differ across frames");
        const RegionStats s = region_mean_square(r, rect, border_margin);
        acc += s.inside_ms / (s.outside_ms + kEps);
    }
    return acc / static_cast<double>(residuals.size());
}

EnergyReport run_experiment(const SyntheticSpec& spec, const FlowParams& flow_params) {
    const SyntheticSequence seq = gen_sequence(spec);
    const int margin =
        static_cast<int>(std::ceil(std::max(std::fabs(spec.vx), std::fabs(spec.vy)))) + 1;

    EnergyReport report;
    report.border_margin = margin;
    double acc_plain = 0.0, acc_true = 0.0, acc_est = 0.0;
    const int pairs = spec.frames - 1;
    for (int t = 0; t < pairs; ++t) {
        const Tensor4& cur = seq.frames[t].tensor();
        const Tensor4& nxt = seq.frames[t + 1].tensor();

        const Tensor4 res_plain = residual(nxt, cur);
        const Tensor4 res_true = residual(compensate_frame(cur, seq.true_flow), nxt);
        const FlowField est = horn_schunck(seq.frames[t], seq.frames[t + 1], flow_params);
        const Tensor4 res_est = residual(compensate_frame(cur, est), nxt);

        const RegionStats sp = region_mean_square(res_plain, spec.perturb_rect, margin);
        const RegionStats st = region_mean_square(res_true, spec.perturb_rect, margin);
        const RegionStats se = region_mean_square(res_est, spec.perturb_rect, margin);
        report.pairs.push_back({sp.inside_ms, sp.outside_ms, st.inside_ms, st.outside_ms,
                                se.inside_ms, se.outside_ms});
        acc_plain += sp.inside_ms / (sp.outside_ms + kEps);
        acc_true += st.inside_ms / (st.outside_ms + kEps);
        acc_est += se.inside_ms / (se.outside_ms + kEps);
    }
    report.ratio_plain = acc_plain / pairs;
    report.ratio_compensated_true = acc_true / pairs;
    report.ratio_compensated_est = acc_est / pairs;
    return report;
}

}  // namespace gcflow
