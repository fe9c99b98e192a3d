#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "gcflow/flow.hpp"
#include "gcflow/pcg32.hpp"
#include "gcflow/synth.hpp"
#include "support/helpers.hpp"

using namespace gcflow;

namespace {

// interior mean of one flow component, skipping a border band
double interior_mean(const FlowField& f, int channel, int margin) {
    double sum = 0.0;
    long n = 0;
    for (int h = margin; h < f.height() - margin; ++h)
        for (int w = margin; w < f.width() - margin; ++w) {
            sum += channel == 0 ? f.u(0, h, w) : f.v(0, h, w);
            ++n;
        }
    return sum / n;
}

double interior_mean_abs(const FlowField& f, int channel, int margin) {
    double sum = 0.0;
    long n = 0;
    for (int h = margin; h < f.height() - margin; ++h)
        for (int w = margin; w < f.width() - margin; ++w) {
            sum += std::fabs(channel == 0 ? f.u(0, h, w) : f.v(0, h, w));
            ++n;
        }
    return sum / n;
}

SyntheticSpec translating_spec(float vx, float vy) {
    SyntheticSpec s;
    s.width = 64;
    s.height = 64;
    s.frames = 2;
    s.vx = vx;
    s.vy = vy;
    s.perturb_amp = 0.0f;
    s.seed = 7;
    return s;
}

}  // namespace

TEST_CASE("horn_schunck fixed points") {
    SUBCASE("identical frames give exactly zero flow") {
        Pcg32 rng(41);
        const ImageFrame f(testing::random_tensor(rng, 1, 3, 12, 12));
        const FlowField flow = horn_schunck(f, f);
        for (float v : flow.tensor().values()) CHECK(v == 0.0f);
    }
    SUBCASE("flat frames give zero flow") {
        const ImageFrame a(Tensor4(1, 1, 10, 10, 0.5f));
        const ImageFrame b(Tensor4(1, 1, 10, 10, 0.5f));
        const FlowField flow = horn_schunck(a, b);
        for (float v : flow.tensor().values()) CHECK(v == 0.0f);
    }
}

TEST_CASE("horn_schunck recovers a one-pixel translation") {
    const SyntheticSequence seq = gen_sequence(translating_spec(1.0f, 0.0f));
    const FlowField flow = horn_schunck(seq.frames[0], seq.frames[1]);
    const double mean_u = interior_mean(flow, 0, 2);
    const double mean_abs_v = interior_mean_abs(flow, 1, 2);
    INFO("mean u = ", mean_u, ", mean |v| = ", mean_abs_v);
    CHECK(std::fabs(mean_u - 1.0) <= 0.3);
    CHECK(mean_abs_v < 0.3);
}

TEST_CASE("horn_schunck is deterministic") {
    const SyntheticSequence seq = gen_sequence(translating_spec(1.0f, 0.5f));
    const FlowField a = horn_schunck(seq.frames[0], seq.frames[1]);
    const FlowField b = horn_schunck(seq.frames[0], seq.frames[1]);
    CHECK(a == b);
}

TEST_CASE("horn_schunck swap antisymmetry") {
    const SyntheticSequence seq = gen_sequence(translating_spec(1.0f, 0.0f));
    const FlowField fwd = horn_schunck(seq.frames[0], seq.frames[1]);
    const FlowField rev = horn_schunck(seq.frames[1], seq.frames[0]);
    double sum = 0.0;
    long n = 0;
    for (int h = 2; h < fwd.height() - 2; ++h)
        for (int w = 2; w < fwd.width() - 2; ++w) {
            sum += std::fabs(fwd.u(0, h, w) + rev.u(0, h, w));
            sum += std::fabs(fwd.v(0, h, w) + rev.v(0, h, w));
            n += 2;
        }
    CHECK(sum / n < 0.3);
}

TEST_CASE("horn_schunck without the prefilter still converges") {
    const SyntheticSequence seq = gen_sequence(translating_spec(1.0f, 0.0f));
    FlowParams p;
    p.prefilter = false;
    const FlowField flow = horn_schunck(seq.frames[0], seq.frames[1], p);
    CHECK(std::fabs(interior_mean(flow, 0, 2) - 1.0) <= 0.3);
}

TEST_CASE("horn_schunck rejects bad inputs") {
    const ImageFrame a(Tensor4(1, 1, 8, 8, 0.1f));
    const ImageFrame b(Tensor4(1, 1, 8, 9, 0.1f));
    CHECK_THROWS_AS(horn_schunck(a, b), std::invalid_argument);

    FlowParams bad_alpha;
    bad_alpha.alpha = 0.0f;
    CHECK_THROWS_AS(horn_schunck(a, a, bad_alpha), std::invalid_argument);

    FlowParams bad_iters;
    bad_iters.iterations = 0;
    CHECK_THROWS_AS(horn_schunck(a, a, bad_iters), std::invalid_argument);
}
