#include "gcflow/ggca.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <stdexcept>
#include <string>

#include "gcflow/pcg32.hpp"
#include "io_detail.hpp"

namespace gcflow {

namespace {

void check_grouping(int channels, int groups, const char* who) {
    if (channels < 1) throw std::invalid_argument(std::string(who) + ": channels must be >= 1");
    if (groups < 1) throw std::invalid_argument(std::string(who) + ": groups must be >= 1");
    if (channels % groups != 0)
        throw std::invalid_argument(std::string(who) + ": groups must divide channels (C=" +
                                    std::to_string(channels) + ", G=" + std::to_string(groups) +
                                    ")");
}

inline float sigmoid(float x) { return 1.0f / (1.0f + std::exp(-x)); }

}  // namespace

GgcaWeights init_weights(int channels, int groups, std::uint64_t seed) {
    check_grouping(channels, groups, "init_weights");
    const int cg = channels / groups;
    const float k = 1.0f / std::sqrt(static_cast<float>(cg));

    GgcaWeights w;
    w.channels = channels;
    w.groups = groups;
    w.kernel_h.resize(static_cast<std::size_t>(cg) * cg);
    w.kernel_w.resize(static_cast<std::size_t>(cg) * cg);
    w.bias_h.assign(cg, 0.0f);
    w.bias_w.assign(cg, 0.0f);

    Pcg32 rng(seed);
    for (auto& v : w.kernel_h) v = rng.uniform(-k, k);
    for (auto& v : w.kernel_w) v = rng.uniform(-k, k);
    return w;
}

Tensor4 group_channels(const Tensor4& t, int groups) {
    check_grouping(t.channels(), groups, "group_channels");
    std::vector<float> data(t.values().begin(), t.values().end());
    return Tensor4(t.batch() * groups, t.channels() / groups, t.height(), t.width(),
                   std::move(data));
}

Tensor4 ungroup_channels(const Tensor4& t, int groups) {
    if (groups < 1 || t.batch() % groups != 0)
        throw std::invalid_argument("ungroup_channels: groups must divide batch");
    std::vector<float> data(t.values().begin(), t.values().end());
    return Tensor4(t.batch() / groups, t.channels() * groups, t.height(), t.width(),
                   std::move(data));
}

DirectionalPools directional_pool(const Tensor4& grouped) {
    const int N = grouped.batch(), C = grouped.channels();
    const int H = grouped.height(), W = grouped.width();
    if (H < 1 || W < 1)
        throw std::invalid_argument("directional_pool: empty spatial dimensions");

    DirectionalPools p{Tensor4(N, C, H, 1), Tensor4(N, C, H, 1), Tensor4(N, C, 1, W),
                       Tensor4(N, C, 1, W)};
    for (int n = 0; n < N; ++n)
        for (int c = 0; c < C; ++c) {
            for (int h = 0; h < H; ++h) {
                double sum = 0.0;
                float mx = grouped.at(n, c, h, 0);
                for (int w = 0; w < W; ++w) {
                    const float v = grouped.at(n, c, h, w);
                    sum += v;
                    mx = std::max(mx, v);
                }
                p.h_avg.at(n, c, h, 0) = static_cast<float>(sum / W);
                p.h_max.at(n, c, h, 0) = mx;
            }
            for (int w = 0; w < W; ++w) {
                double sum = 0.0;
                float mx = grouped.at(n, c, 0, w);
                for (int h = 0; h < H; ++h) {
                    const float v = grouped.at(n, c, h, w);
                    sum += v;
                    mx = std::max(mx, v);
                }
                p.w_avg.at(n, c, 0, w) = static_cast<float>(sum / H);
                p.w_max.at(n, c, 0, w) = mx;
            }
        }
    return p;
}

AttentionPair attention_weights(const DirectionalPools& pools, const GgcaWeights& w) {
    check_grouping(w.channels, w.groups, "attention_weights");
    const int cg = w.group_channels();
    const Tensor4& ha = pools.h_avg;
    if (ha.channels() != cg || !ha.same_dims(pools.h_max) ||
        pools.w_avg.channels() != cg || !pools.w_avg.same_dims(pools.w_max) ||
        ha.batch() != pools.w_avg.batch())
        throw std::invalid_argument("attention_weights: pools do not match weights metadata");
    const int N = ha.batch();
    if (N % w.groups != 0)
        throw std::invalid_argument("attention_weights: grouped batch not divisible by groups");
    const int B = N / w.groups;
    const int H = ha.height(), W = pools.w_avg.width();

    AttentionPair att{Tensor4(B, w.channels, H, 1), Tensor4(B, w.channels, 1, W)};
    for (int n = 0; n < N; ++n) {
        const int b = n / w.groups;
        const int g = n % w.groups;
        for (int co = 0; co < cg; ++co) {
            const int c = g * cg + co;
            for (int h = 0; h < H; ++h) {
                double sa = w.bias_h[co], sm = w.bias_h[co];
                for (int ci = 0; ci < cg; ++ci) {
                    const float kk = w.kernel_h[static_cast<std::size_t>(co) * cg + ci];
                    sa += kk * pools.h_avg.at(n, ci, h, 0);
                    sm += kk * pools.h_max.at(n, ci, h, 0);
                }
                att.height.at(b, c, h, 0) = sigmoid(static_cast<float>(sa + sm));
            }
            for (int x = 0; x < W; ++x) {
                double sa = w.bias_w[co], sm = w.bias_w[co];
                for (int ci = 0; ci < cg; ++ci) {
                    const float kk = w.kernel_w[static_cast<std::size_t>(co) * cg + ci];
                    sa += kk * pools.w_avg.at(n, ci, 0, x);
                    sm += kk * pools.w_max.at(n, ci, 0, x);
                }
                att.width.at(b, c, 0, x) = sigmoid(static_cast<float>(sa + sm));
            }
        }
    }
    return att;
}

Tensor4 ggca_forward(const Tensor4& input, const GgcaWeights& w) {
    if (input.channels() != w.channels)
        throw std::invalid_argument("ggca_forward: input has " +
                                    std::to_string(input.channels()) + " channels, weights expect " +
                                    std::to_string(w.channels));
    check_grouping(w.channels, w.groups, "ggca_forward");

    const AttentionPair att = attention_weights(directional_pool(group_channels(input, w.groups)), w);
    Tensor4 out(input.batch(), input.channels(), input.height(), input.width());
    for (int b = 0; b < input.batch(); ++b)
        for (int c = 0; c < input.channels(); ++c)
            for (int h = 0; h < input.height(); ++h) {
                const float ah = att.height.at(b, c, h, 0);
                for (int x = 0; x < input.width(); ++x)
                    out.at(b, c, h, x) = input.at(b, c, h, x) * ah * att.width.at(b, c, 0, x);
            }
    return out;
}

namespace {

Tensor4 vector_tensor(const std::vector<float>& v, int h, int w) {
    return Tensor4(1, 1, h, w, std::vector<float>(v.begin(), v.end()));
}

void append_entry(std::vector<std::uint8_t>& out, const char* name, const Tensor4& t) {
    const std::size_t len = std::strlen(name);
    detail::append_u16le(out, static_cast<std::uint16_t>(len));
    out.insert(out.end(), name, name + len);
    const auto blob = detail::tensor_to_bytes(t);
    out.insert(out.end(), blob.begin(), blob.end());
}

}  // namespace

void write_ggca_weights(const GgcaWeights& w, const std::filesystem::path& path) {
    check_grouping(w.channels, w.groups, "write_ggca_weights");
    const int cg = w.group_channels();
    std::vector<std::uint8_t> bytes;
    bytes.insert(bytes.end(), {'G', 'C', 'F', 'W'});
    detail::append_u32le(bytes, 5);
    append_entry(bytes, "kernel_h", vector_tensor(w.kernel_h, cg, cg));
    append_entry(bytes, "bias_h", vector_tensor(w.bias_h, 1, cg));
    append_entry(bytes, "kernel_w", vector_tensor(w.kernel_w, cg, cg));
    append_entry(bytes, "bias_w", vector_tensor(w.bias_w, 1, cg));
    append_entry(bytes, "meta",
                 Tensor4(1, 1, 1, 2,
                         std::vector<float>{static_cast<float>(w.channels),
                                            static_cast<float>(w.groups)}));
    detail::write_file_bytes(path, bytes);
}

GgcaWeights read_ggca_weights(const std::filesystem::path& path) {
    const auto bytes = detail::read_file_bytes(path);
    detail::Cursor cur(bytes, path.string());
    const std::uint8_t* magic = cur.take(4, "GCFW magic");
    if (std::memcmp(magic, "GCFW", 4) != 0) cur.fail_at(0, "bad magic (expected \"GCFW\")");
    const std::uint32_t count = cur.u32le("entry count");
    if (count > 64) cur.fail_at(4, "implausible entry count " + std::to_string(count));

    std::map<std::string, Tensor4> entries;
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::size_t name_pos = cur.pos();
        const std::uint16_t len = cur.u16le("entry name length");
        const std::uint8_t* p = cur.take(len, "entry name");
        std::string name(reinterpret_cast<const char*>(p), len);
        if (entries.count(name)) cur.fail_at(name_pos, "duplicate entry \"" + name + "\"");
        entries.emplace(std::move(name), detail::parse_tensor(cur));
    }
    if (!cur.at_end())
        cur.fail("payload size disagrees with file length (" +
                 std::to_string(cur.remaining()) + " trailing bytes)");

    auto fetch = [&](const char* name) -> const Tensor4& {
        auto it = entries.find(name);
        if (it == entries.end())
            throw std::runtime_error(path.string() + ": missing entry \"" + name + "\"");
        return it->second;
    };
    for (const auto& [name, t] : entries) {
        (void)t;
        if (name != "kernel_h" && name != "bias_h" && name != "kernel_w" && name != "bias_w" &&
            name != "meta")
            throw std::runtime_error(path.string() + ": unknown entry \"" + name + "\"");
    }

    const Tensor4& meta = fetch("meta");
    if (meta.dims() != std::array<int, 4>{1, 1, 1, 2})
        throw std::runtime_error(path.string() + ": meta tensor must have dims (1,1,1,2)");
    GgcaWeights w;
    w.channels = static_cast<int>(std::lround(meta.at(0, 0, 0, 0)));
    w.groups = static_cast<int>(std::lround(meta.at(0, 0, 0, 1)));
    check_grouping(w.channels, w.groups, path.string().c_str());
    const int cg = w.group_channels();

    auto fetch_vec = [&](const char* name, int h, int width) {
        const Tensor4& t = fetch(name);
        if (t.dims() != std::array<int, 4>{1, 1, h, width})
            throw std::runtime_error(path.string() + ": entry \"" + name +
                                     "\" has wrong dims for C/G = " + std::to_string(cg));
        return std::vector<float>(t.values().begin(), t.values().end());
    };
    w.kernel_h = fetch_vec("kernel_h", cg, cg);
    w.bias_h = fetch_vec("bias_h", 1, cg);
    w.kernel_w = fetch_vec("kernel_w", cg, cg);
    w.bias_w = fetch_vec("bias_w", 1, cg);
    return w;
}

}  // namespace gcflow
