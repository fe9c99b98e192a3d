#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gcflow/flow.hpp"
#include "gcflow/ggca.hpp"
#include "gcflow/hog.hpp"
#include "gcflow/io.hpp"
#include "gcflow/synth.hpp"
#include "gcflow/tensor.hpp"
#include "gcflow/warp.hpp"

namespace fs = std::filesystem;
using namespace gcflow;

namespace {

// precondition problems that are really command-line mistakes
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<float> parse_floats(const std::string& text, std::size_t count, const char* what) {
    std::vector<float> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stof(item));
        } catch (const std::exception&) {
            throw UsageError(std::string("cannot parse ") + what + " '" + text + "'");
        }
    }
    if (out.size() != count)
        throw UsageError(std::string(what) + " expects " + std::to_string(count) +
                         " comma-separated values, got '" + text + "'");
    return out;
}

struct InitSpec {
    int channels = 0;
    int groups = 1;
    std::uint64_t seed = 42;
};

InitSpec parse_init(const std::string& text) {
    std::vector<long long> vals;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            vals.push_back(std::stoll(item));
        } catch (const std::exception&) {
            throw UsageError("cannot parse --init '" + text + "'");
        }
    }
    if (vals.size() < 2 || vals.size() > 3)
        throw UsageError("--init expects C,G[,seed], got '" + text + "'");
    InitSpec s;
    s.channels = static_cast<int>(vals[0]);
    s.groups = static_cast<int>(vals[1]);
    if (vals.size() == 3) s.seed = static_cast<std::uint64_t>(vals[2]);
    return s;
}

ImageFrame load_frame(const fs::path& path) {
    switch (sniff_file(path)) {
        case FileKind::Pnm: return read_image(path);
        case FileKind::Gcft: return ImageFrame(read_tensor(path));
        default:
            throw std::runtime_error(path.string() + ": expected an image (P5/P6) or GCFT tensor");
    }
}

FlowField load_flow(const fs::path& path) {
    switch (sniff_file(path)) {
        case FileKind::Flo: return read_flo(path);
        case FileKind::Gcft: return FlowField(read_tensor(path));
        default:
            throw std::runtime_error(path.string() + ": expected a .flo file or GCFT tensor");
    }
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

std::string dims_string(const Tensor4& t) {
    const auto d = t.dims();
    return std::to_string(d[0]) + "," + std::to_string(d[1]) + "," + std::to_string(d[2]) + "," +
           std::to_string(d[3]);
}

GgcaWeights resolve_ggca_weights(const std::string& weights_path, const std::string& init_text) {
    if (!weights_path.empty() && !init_text.empty())
        throw UsageError("give either --weights or --init, not both");
    if (!weights_path.empty()) return read_ggca_weights(weights_path);
    if (!init_text.empty()) {
        const InitSpec s = parse_init(init_text);
        return init_weights(s.channels, s.groups, s.seed);
    }
    throw UsageError("attention weights required: pass --weights FILE or --init C,G[,seed]");
}

Tensor4 nearest_upsample(const Tensor4& t, int factor) {
    Tensor4 out(t.batch(), t.channels(), t.height() * factor, t.width() * factor);
    for (int b = 0; b < out.batch(); ++b)
        for (int c = 0; c < out.channels(); ++c)
            for (int h = 0; h < out.height(); ++h)
                for (int w = 0; w < out.width(); ++w)
                    out.at(b, c, h, w) = t.at(b, c, h / factor, w / factor);
    return out;
}

Tensor4 concat_channels(const Tensor4& a, const Tensor4& b) {
    if (a.batch() != b.batch() || a.height() != b.height() || a.width() != b.width())
        throw std::invalid_argument("concat: spatial dimension mismatch");
    Tensor4 out(a.batch(), a.channels() + b.channels(), a.height(), a.width());
    for (int n = 0; n < out.batch(); ++n) {
        for (int c = 0; c < a.channels(); ++c)
            for (int h = 0; h < a.height(); ++h)
                for (int w = 0; w < a.width(); ++w) out.at(n, c, h, w) = a.at(n, c, h, w);
        for (int c = 0; c < b.channels(); ++c)
            for (int h = 0; h < a.height(); ++h)
                for (int w = 0; w < a.width(); ++w)
                    out.at(n, a.channels() + c, h, w) = b.at(n, c, h, w);
    }
    return out;
}

// ---------------------------------------------------------------- flow ---

struct FlowOpts {
    std::string prev, next, out;
    float alpha = 15.0f;
    int iters = 200;
    bool no_prefilter = false;

    FlowParams params() const { return {alpha, iters, !no_prefilter}; }
};

int run_flow(const FlowOpts& o) {
    const ImageFrame a = load_frame(o.prev);
    const ImageFrame b = load_frame(o.next);
    std::cerr << "[gcflow] estimating optical flow (horn-schunck alpha=" << o.alpha
              << " iterations=" << o.iters << ")\n";
    write_flo(horn_schunck(a, b, o.params()), o.out);
    return 0;
}

// ---------------------------------------------------------------- warp ---

struct WarpOpts {
    std::string frame, flow, out;
};

int run_warp(const WarpOpts& o) {
    const Tensor4 frame = load_tensor_auto(o.frame);
    const FlowField flow = load_flow(o.flow);
    write_tensor(reconstruct_frame(frame, flow), o.out);
    return 0;
}

// ------------------------------------------------------------ residual ---

struct ResidualOpts {
    std::string recon, next, out;
};

int run_residual(const ResidualOpts& o) {
    write_tensor(residual(load_tensor_auto(o.recon), load_tensor_auto(o.next)), o.out);
    return 0;
}

// ----------------------------------------------------------------- hog ---

struct HogOpts {
    std::string input, out;
    int pool = 8;
};

int run_hog(const HogOpts& o) {
    write_tensor(hog(load_tensor_auto(o.input), o.pool), o.out);
    return 0;
}

// ---------------------------------------------------------------- ggca ---

struct GgcaOpts {
    std::string input, out, weights, init, save_weights;
};

int run_ggca(const GgcaOpts& o) {
    const GgcaWeights w = resolve_ggca_weights(o.weights, o.init);
    if (!o.save_weights.empty()) write_ggca_weights(w, o.save_weights);
    write_tensor(ggca_forward(load_tensor_auto(o.input), w), o.out);
    return 0;
}

// --------------------------------------------------------------- synth ---

struct SynthOpts {
    std::string out;
    int width = 64, height = 64, frames = 8;
    std::string velocity = "2,0";
    std::string rect = "24,24,16,16";
    float amp = 0.3f;
    std::uint64_t seed = 7;
    std::string preset;  // only "default" is recognized

    SyntheticSpec spec() const {
        if (!preset.empty() && preset != "default")
            throw UsageError("unknown --spec preset '" + preset + "' (only 'default')");
        if (!preset.empty()) return SyntheticSpec::defaults();
        SyntheticSpec s;
        s.width = width;
        s.height = height;
        s.frames = frames;
        const auto v = parse_floats(velocity, 2, "--velocity");
        s.vx = v[0];
        s.vy = v[1];
        const auto r = parse_floats(rect, 4, "--rect");
        s.perturb_rect = {static_cast<int>(r[0]), static_cast<int>(r[1]),
                          static_cast<int>(r[2]), static_cast<int>(r[3])};
        s.perturb_amp = amp;
        s.seed = seed;
        return s;
    }
};

int run_synth(const SynthOpts& o) {
    const SyntheticSpec spec = o.spec();
    const SyntheticSequence seq = gen_sequence(spec);
    fs::create_directories(o.out);
    for (int t = 0; t < spec.frames; ++t)
        write_image(seq.frames[t], fs::path(o.out) / ("frame_" + std::to_string(t) + ".pgm"));
    write_flo(seq.true_flow, fs::path(o.out) / "true_flow.flo");
    std::cerr << "[gcflow] wrote " << spec.frames << " frames and true_flow.flo to " << o.out
              << "\n";
    return 0;
}

// ------------------------------------------------------------- analyze ---

struct AnalyzeOpts {
    SynthOpts synth;  // reuses the spec flags, --out unused
    std::string csv;
    float alpha = 15.0f;
    int iters = 200;
    bool no_prefilter = false;
};

int run_analyze(const AnalyzeOpts& o) {
    const SyntheticSpec spec = o.synth.spec();
    const EnergyReport rep = run_experiment(spec, {o.alpha, o.iters, !o.no_prefilter});

    std::ostringstream out;
    out << "width=" << spec.width << "\n";
    out << "height=" << spec.height << "\n";
    out << "frames=" << spec.frames << "\n";
    out << "velocity_x=" << fmt_double(spec.vx) << "\n";
    out << "velocity_y=" << fmt_double(spec.vy) << "\n";
    out << "rect=" << spec.perturb_rect.x0 << "," << spec.perturb_rect.y0 << ","
        << spec.perturb_rect.w << "," << spec.perturb_rect.h << "\n";
    out << "amp=" << fmt_double(spec.perturb_amp) << "\n";
    out << "seed=" << spec.seed << "\n";
    out << "border_margin=" << rep.border_margin << "\n";
    out << "ratio_plain=" << fmt_double(rep.ratio_plain) << "\n";
    out << "ratio_compensated_true=" << fmt_double(rep.ratio_compensated_true) << "\n";
    out << "ratio_compensated_est=" << fmt_double(rep.ratio_compensated_est) << "\n";
    for (std::size_t i = 0; i < rep.pairs.size(); ++i) {
        const auto& p = rep.pairs[i];
        out << "pair" << i << "_plain_in=" << fmt_double(p.plain_in) << "\n";
        out << "pair" << i << "_plain_out=" << fmt_double(p.plain_out) << "\n";
        out << "pair" << i << "_true_in=" << fmt_double(p.true_in) << "\n";
        out << "pair" << i << "_true_out=" << fmt_double(p.true_out) << "\n";
        out << "pair" << i << "_est_in=" << fmt_double(p.est_in) << "\n";
        out << "pair" << i << "_est_out=" << fmt_double(p.est_out) << "\n";
    }
    std::cout << out.str();

    if (!o.csv.empty()) {
        std::ofstream csv(o.csv, std::ios::trunc);
        if (!csv) throw std::runtime_error(o.csv + ": cannot open for writing");
        csv << "pair,plain_in,plain_out,true_in,true_out,est_in,est_out\n";
        for (std::size_t i = 0; i < rep.pairs.size(); ++i) {
            const auto& p = rep.pairs[i];
            csv << i << "," << fmt_double(p.plain_in) << "," << fmt_double(p.plain_out) << ","
                << fmt_double(p.true_in) << "," << fmt_double(p.true_out) << ","
                << fmt_double(p.est_in) << "," << fmt_double(p.est_out) << "\n";
        }
    }
    return 0;
}

// ------------------------------------------------------------ pipeline ---

struct PipelineOpts {
    std::vector<std::string> frames;
    std::string out;
    std::vector<std::string> flow_files;
    int pool = 8;
    std::string ggca_weights, ggca_init;
    bool concat = false;
    float alpha = 15.0f;
    int iters = 200;
    bool no_prefilter = false;
    bool no_flow_out = false, no_recon_out = false, no_residual_out = false, no_hog_out = false;
};

int run_pipeline(const PipelineOpts& o) {
    if (o.frames.size() < 2) throw UsageError("pipeline: need at least 2 frames");
    const std::size_t pairs = o.frames.size() - 1;
    if (!o.flow_files.empty() && o.flow_files.size() != pairs)
        throw UsageError("pipeline: --flow-files expects exactly " + std::to_string(pairs) +
                         " files for " + std::to_string(o.frames.size()) + " frames");

    std::vector<ImageFrame> frames;
    frames.reserve(o.frames.size());
    for (const auto& p : o.frames) frames.push_back(load_frame(p));
    for (const auto& f : frames)
        if (f.height() != frames[0].height() || f.width() != frames[0].width() ||
            f.channels() != frames[0].channels())
            throw std::runtime_error("pipeline: inconsistent frame dimensions");

    std::optional<GgcaWeights> gw;
    if (!o.ggca_weights.empty() || !o.ggca_init.empty())
        gw = resolve_ggca_weights(o.ggca_weights, o.ggca_init);

    const FlowParams fp{o.alpha, o.iters, !o.no_prefilter};
    const fs::path out_dir(o.out);
    fs::create_directories(out_dir);

    std::vector<fs::path> written;
    std::vector<std::pair<std::string, std::string>> manifest;  // name -> dims
    auto emit_tensor = [&](const std::string& name, const Tensor4& t) {
        const fs::path p = out_dir / name;
        write_tensor(t, p);
        written.push_back(p);
        manifest.emplace_back(name, dims_string(t));
    };
    auto emit_flow = [&](const std::string& name, const FlowField& f) {
        const fs::path p = out_dir / name;
        write_flo(f, p);
        written.push_back(p);
        manifest.emplace_back(name, dims_string(f.tensor()));
    };

    try {
        // hog features are reused by --concat, so compute them up front
        std::vector<Tensor4> hogs;
        if (!o.no_hog_out || o.concat) {
            hogs.reserve(frames.size());
            for (const auto& f : frames) hogs.push_back(hog(f.tensor(), o.pool));
        }

        for (std::size_t t = 0; t < pairs; ++t) {
            FlowField flow;
            if (!o.flow_files.empty()) {
                flow = load_flow(o.flow_files[t]);
                if (flow.height() != frames[t].height() || flow.width() != frames[t].width() ||
                    flow.batch() != 1)
                    throw std::runtime_error("pipeline: flow file dims do not match frames: " +
                                             o.flow_files[t]);
            } else {
                std::cerr << "[gcflow] estimating optical flow (horn-schunck alpha=" << o.alpha
                          << " iterations=" << o.iters << ") pair " << t << "\n";
                flow = horn_schunck(frames[t], frames[t + 1], fp);
                if (!o.no_flow_out) emit_flow("flow_" + std::to_string(t) + ".flo", flow);
            }
            const Tensor4 recon = compensate_frame(frames[t].tensor(), flow);
            if (!o.no_recon_out) emit_tensor("recon_" + std::to_string(t) + ".gcft", recon);
            const Tensor4 res = residual(recon, frames[t + 1].tensor());
            if (!o.no_residual_out)
                emit_tensor("residual_" + std::to_string(t) + ".gcft", res);
            if (o.concat)
                emit_tensor("concat_" + std::to_string(t) + ".gcft",
                            concat_channels(res, nearest_upsample(hogs[t], o.pool)));
        }

        if (!o.no_hog_out)
            for (std::size_t t = 0; t < frames.size(); ++t)
                emit_tensor("hog_" + std::to_string(t) + ".gcft", hogs[t]);

        if (gw)
            for (std::size_t t = 0; t < frames.size(); ++t)
                emit_tensor("ggca_" + std::to_string(t) + ".gcft",
                            ggca_forward(frames[t].tensor(), *gw));

        std::ofstream mf(out_dir / "manifest.txt", std::ios::trunc);
        if (!mf) throw std::runtime_error((out_dir / "manifest.txt").string() +
                                          ": cannot open for writing");
        for (const auto& [name, dims] : manifest) mf << name << "\t" << dims << "\n";
        mf.close();
    } catch (...) {
        // no partial output trees
        for (const auto& p : written) {
            std::error_code ec;
            fs::remove(p, ec);
        }
        throw;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"optical-flow residual and gradient feature toolkit"};
    app.require_subcommand(1);

    FlowOpts flow_opts;
    auto* flow_cmd = app.add_subcommand("flow", "estimate optical flow between two frames");
    flow_cmd->add_option("--prev", flow_opts.prev, "earlier frame (P5/P6 or GCFT)")->required();
    flow_cmd->add_option("--next", flow_opts.next, "later frame")->required();
    flow_cmd->add_option("--out", flow_opts.out, "output .flo path")->required();
    flow_cmd->add_option("--alpha", flow_opts.alpha, "smoothness weight");
    flow_cmd->add_option("--iters", flow_opts.iters, "Jacobi iteration count");
    flow_cmd->add_flag("--no-prefilter", flow_opts.no_prefilter, "skip the Gaussian prefilter");

    WarpOpts warp_opts;
    auto* warp_cmd = app.add_subcommand(
        "warp", "resample a frame along a flow field (sampling offset, p + F)");
    warp_cmd->add_option("--frame", warp_opts.frame, "source frame or tensor")->required();
    warp_cmd->add_option("--flow", warp_opts.flow, "flow field (.flo or GCFT)")->required();
    warp_cmd->add_option("--out", warp_opts.out, "output GCFT path")->required();

    ResidualOpts res_opts;
    auto* res_cmd = app.add_subcommand("residual", "elementwise absolute difference");
    res_cmd->add_option("--recon", res_opts.recon, "reconstructed frame")->required();
    res_cmd->add_option("--next", res_opts.next, "reference frame")->required();
    res_cmd->add_option("--out", res_opts.out, "output GCFT path")->required();

    HogOpts hog_opts;
    auto* hog_cmd = app.add_subcommand("hog", "histogram-of-oriented-gradients features");
    hog_cmd->add_option("--input", hog_opts.input, "image or tensor")->required();
    hog_cmd->add_option("--out", hog_opts.out, "output GCFT path")->required();
    hog_cmd->add_option("--pool", hog_opts.pool, "block size (must divide H and W)");

    GgcaOpts ggca_opts;
    auto* ggca_cmd = app.add_subcommand("ggca", "grouped dual-axis attention forward pass");
    ggca_cmd->add_option("--input", ggca_opts.input, "feature tensor")->required();
    ggca_cmd->add_option("--out", ggca_opts.out, "output GCFT path")->required();
    ggca_cmd->add_option("--weights", ggca_opts.weights, "GCFW weights file");
    ggca_cmd->add_option("--init", ggca_opts.init, "C,G[,seed] seeded weight init");
    ggca_cmd->add_option("--save-weights", ggca_opts.save_weights, "also write the weights used");

    SynthOpts synth_opts;
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic benchmark sequence");
    synth_cmd->add_option("--out", synth_opts.out, "output directory")->required();
    synth_cmd->add_option("--width", synth_opts.width, "frame width");
    synth_cmd->add_option("--height", synth_opts.height, "frame height");
    synth_cmd->add_option("--frames", synth_opts.frames, "frame count");
    synth_cmd->add_option("--velocity", synth_opts.velocity, "vx,vy pixels per frame");
    synth_cmd->add_option("--rect", synth_opts.rect, "x0,y0,w,h perturbed region");
    synth_cmd->add_option("--amp", synth_opts.amp, "flicker amplitude in [0,1]");
    synth_cmd->add_option("--seed", synth_opts.seed, "generator seed");
    synth_cmd->add_option("--spec", synth_opts.preset, "'default' preset");

    AnalyzeOpts an_opts;
    auto* an_cmd = app.add_subcommand("analyze", "residual energy report for a synthetic spec");
    an_cmd->add_option("--width", an_opts.synth.width, "frame width");
    an_cmd->add_option("--height", an_opts.synth.height, "frame height");
    an_cmd->add_option("--frames", an_opts.synth.frames, "frame count");
    an_cmd->add_option("--velocity", an_opts.synth.velocity, "vx,vy pixels per frame");
    an_cmd->add_option("--rect", an_opts.synth.rect, "x0,y0,w,h perturbed region");
    an_cmd->add_option("--amp", an_opts.synth.amp, "flicker amplitude in [0,1]");
    an_cmd->add_option("--seed", an_opts.synth.seed, "generator seed");
    an_cmd->add_option("--spec", an_opts.synth.preset, "'default' preset");
    an_cmd->add_option("--csv", an_opts.csv, "also write per-pair energies as CSV");
    an_cmd->add_option("--alpha", an_opts.alpha, "estimator smoothness weight");
    an_cmd->add_option("--iters", an_opts.iters, "estimator iteration count");
    an_cmd->add_flag("--no-prefilter", an_opts.no_prefilter, "skip the Gaussian prefilter");

    PipelineOpts pipe_opts;
    auto* pipe_cmd = app.add_subcommand(
        "pipeline", "frames -> flow -> reconstruction -> residual (+ HOG, optional GGCA)");
    pipe_cmd->add_option("--frames", pipe_opts.frames, "ordered input frames (>= 2)")
        ->required()
        ->expected(-2);
    pipe_cmd->add_option("--out", pipe_opts.out, "output directory")->required();
    pipe_cmd->add_option("--flow-files", pipe_opts.flow_files,
                         "precomputed forward flow per pair (.flo or GCFT)")
        ->expected(-1);
    pipe_cmd->add_option("--pool", pipe_opts.pool, "HOG block size");
    pipe_cmd->add_option("--ggca-weights", pipe_opts.ggca_weights, "GCFW weights file");
    pipe_cmd->add_option("--ggca-init", pipe_opts.ggca_init, "C,G[,seed] seeded weight init");
    pipe_cmd->add_flag("--concat", pipe_opts.concat,
                       "emit residual channels stacked with nearest-upsampled HOG");
    pipe_cmd->add_option("--alpha", pipe_opts.alpha, "estimator smoothness weight");
    pipe_cmd->add_option("--iters", pipe_opts.iters, "estimator iteration count");
    pipe_cmd->add_flag("--no-prefilter", pipe_opts.no_prefilter, "skip the Gaussian prefilter");
    pipe_cmd->add_flag("--no-flow-out", pipe_opts.no_flow_out, "do not write flow files");
    pipe_cmd->add_flag("--no-recon-out", pipe_opts.no_recon_out, "do not write reconstructions");
    pipe_cmd->add_flag("--no-residual-out", pipe_opts.no_residual_out, "do not write residuals");
    pipe_cmd->add_flag("--no-hog-out", pipe_opts.no_hog_out, "do not write HOG features");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (flow_cmd->parsed()) return run_flow(flow_opts);
        if (warp_cmd->parsed()) return run_warp(warp_opts);
        if (res_cmd->parsed()) return run_residual(res_opts);
        if (hog_cmd->parsed()) return run_hog(hog_opts);
        if (ggca_cmd->parsed()) return run_ggca(ggca_opts);
        if (synth_cmd->parsed()) return run_synth(synth_opts);
        if (an_cmd->parsed()) return run_analyze(an_opts);
        if (pipe_cmd->parsed()) return run_pipeline(pipe_opts);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
