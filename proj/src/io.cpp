#include "gcflow/io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "io_detail.hpp"

namespace gcflow {
namespace detail {

namespace {
constexpr std::uint64_t kMaxElements = 1ull << 33;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path.string() + ": cannot open for reading");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (in.bad()) throw std::runtime_error(path.string() + ": read failed");
    return bytes;
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error(path.string() + ": write failed");
}

const std::uint8_t* Cursor::take(std::size_t n, const char* what) {
    if (remaining() < n)
        fail_at(pos_, std::string("truncated ") + what + " (need " + std::to_string(n) +
                          " bytes, have " + std::to_string(remaining()) + ")");
    const std::uint8_t* p = buf_.data() + pos_;
    pos_ += n;
    return p;
}

std::uint8_t Cursor::u8(const char* what) { return *take(1, what); }

std::uint16_t Cursor::u16le(const char* what) {
    const std::uint8_t* p = take(2, what);
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t Cursor::u32le(const char* what) {
    const std::uint8_t* p = take(4, what);
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::int32_t Cursor::i32le(const char* what) { return static_cast<std::int32_t>(u32le(what)); }

float Cursor::f32le(const char* what) { return std::bit_cast<float>(u32le(what)); }

void Cursor::fail_at(std::size_t offset, const std::string& message) const {
    throw std::runtime_error(name_ + ": " + message + " at byte " + std::to_string(offset));
}

void append_u8(std::vector<std::uint8_t>& out, std::uint8_t v) { out.push_back(v); }

void append_u16le(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
}

void append_u32le(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xff));
}

void append_f32le(std::vector<std::uint8_t>& out, float v) {
    append_u32le(out, std::bit_cast<std::uint32_t>(v));
}

std::vector<std::uint8_t> tensor_to_bytes(const Tensor4& t) {
    std::vector<std::uint8_t> out;
    out.reserve(24 + t.size() * 4);
    out.insert(out.end(), {'G', 'C', 'F', 'T'});
    append_u8(out, 1);  // version
    append_u8(out, 1);  // dtype: float32
    append_u8(out, 4);  // rank
    append_u8(out, 0);  // pad
    for (int d : t.dims()) append_u32le(out, static_cast<std::uint32_t>(d));
    for (float v : t.values()) append_f32le(out, v);
    return out;
}

Tensor4 parse_tensor(Cursor& cur) {
    const std::size_t start = cur.pos();
    const std::uint8_t* magic = cur.take(4, "GCFT magic");
    if (std::memcmp(magic, "GCFT", 4) != 0) cur.fail_at(start, "bad magic (expected \"GCFT\")");

    std::size_t p = cur.pos();
    const std::uint8_t version = cur.u8("version");
    if (version != 1) cur.fail_at(p, "unsupported version " + std::to_string(version));
    p = cur.pos();
    const std::uint8_t dtype = cur.u8("dtype");
    if (dtype != 1) cur.fail_at(p, "unsupported dtype " + std::to_string(dtype));
    p = cur.pos();
    const std::uint8_t rank = cur.u8("rank");
    if (rank != 4) cur.fail_at(p, "unsupported rank " + std::to_string(rank));
    p = cur.pos();
    const std::uint8_t pad = cur.u8("pad");
    if (pad != 0) cur.fail_at(p, "nonzero pad byte");

    const std::size_t dim_pos = cur.pos();
    std::uint32_t dims[4];
    std::uint64_t count = 1;
    for (auto& d : dims) {
        d = cur.u32le("dims");
        if (d > 0x7fffffffu) cur.fail_at(dim_pos, "dim overflow (dimension exceeds int32)");
        count *= d;
        if (count > kMaxElements)
            cur.fail_at(dim_pos, "dim overflow (B*C*H*W too large)");
    }

    std::vector<float> data(static_cast<std::size_t>(count));
    const std::uint8_t* payload = cur.take(data.size() * 4, "payload");
    for (std::size_t i = 0; i < data.size(); ++i) {
        std::uint32_t bits = static_cast<std::uint32_t>(payload[4 * i]) |
                             (static_cast<std::uint32_t>(payload[4 * i + 1]) << 8) |
                             (static_cast<std::uint32_t>(payload[4 * i + 2]) << 16) |
                             (static_cast<std::uint32_t>(payload[4 * i + 3]) << 24);
        data[i] = std::bit_cast<float>(bits);
    }
    return Tensor4(static_cast<int>(dims[0]), static_cast<int>(dims[1]),
                   static_cast<int>(dims[2]), static_cast<int>(dims[3]), std::move(data));
}

}  // namespace detail

using detail::Cursor;

Tensor4 read_tensor(const std::filesystem::path& path) {
    const auto bytes = detail::read_file_bytes(path);
    Cursor cur(bytes, path.string());
    Tensor4 t = detail::parse_tensor(cur);
    if (!cur.at_end())
        cur.fail("payload size disagrees with file length (" +
                 std::to_string(cur.remaining()) + " trailing bytes)");
    return t;
}

void write_tensor(const Tensor4& tensor, const std::filesystem::path& path) {
    detail::write_file_bytes(path, detail::tensor_to_bytes(tensor));
}

namespace {

bool pnm_space(std::uint8_t c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f';
}

struct PnmHeader {
    int channels;
    long width, height, maxval;
    std::size_t raster_offset;
    std::size_t maxval_offset;
};

PnmHeader parse_pnm_header(std::span<const std::uint8_t> buf, const std::string& name) {
    auto fail = [&](std::size_t off, const std::string& msg) -> void {
        throw std::runtime_error(name + ": " + msg + " at byte " + std::to_string(off));
    };
    if (buf.size() < 2 || buf[0] != 'P' || (buf[1] != '5' && buf[1] != '6'))
        fail(0, "bad magic (expected P5 or P6)");
    const int channels = buf[1] == '6' ? 3 : 1;

    std::size_t i = 2;
    auto next_int = [&](const char* what) -> std::pair<long, std::size_t> {
        while (i < buf.size()) {
            if (pnm_space(buf[i])) {
                ++i;
            } else if (buf[i] == '#') {
                while (i < buf.size() && buf[i] != '\n') ++i;
            } else {
                break;
            }
        }
        const std::size_t start = i;
        if (i >= buf.size() || !std::isdigit(buf[i]))
            fail(i, std::string("malformed ") + what + " in header");
        long value = 0;
        while (i < buf.size() && std::isdigit(buf[i])) {
            value = value * 10 + (buf[i] - '0');
            if (value > 0x7fffffffL) fail(start, std::string(what) + " overflow");
            ++i;
        }
        return {value, start};
    };

    const auto [width, woff] = next_int("width");
    (void)woff;
    const auto [height, hoff] = next_int("height");
    (void)hoff;
    const auto [maxval, moff] = next_int("maxval");
    if (i >= buf.size() || !pnm_space(buf[i])) fail(i, "missing raster separator");
    ++i;  // exactly one whitespace byte before the raster
    return {channels, width, height, maxval, i, moff};
}

}  // namespace

ImageFrame read_image(const std::filesystem::path& path) {
    const auto bytes = detail::read_file_bytes(path);
    const std::string name = path.string();
    const PnmHeader hdr = parse_pnm_header(bytes, name);
    auto fail = [&](std::size_t off, const std::string& msg) -> void {
        throw std::runtime_error(name + ": " + msg + " at byte " + std::to_string(off));
    };
    if (hdr.maxval != 255) fail(hdr.maxval_offset, "unsupported maxval " + std::to_string(hdr.maxval));

    const std::uint64_t pixels = static_cast<std::uint64_t>(hdr.width) * hdr.height;
    if (pixels * hdr.channels > detail::kMaxElements) fail(2, "dim overflow (image too large)");
    const std::size_t need = static_cast<std::size_t>(pixels) * hdr.channels;
    const std::size_t have = bytes.size() - hdr.raster_offset;
    if (have < need)
        fail(hdr.raster_offset, "truncated raster (need " + std::to_string(need) +
                                    " bytes, have " + std::to_string(have) + ")");
    if (have > need)
        fail(hdr.raster_offset + need, "trailing bytes after raster (" +
                                           std::to_string(have - need) + ")");

    Tensor4 t(1, hdr.channels, static_cast<int>(hdr.height), static_cast<int>(hdr.width));
    const std::uint8_t* raster = bytes.data() + hdr.raster_offset;
    for (int h = 0; h < t.height(); ++h)
        for (int w = 0; w < t.width(); ++w)
            for (int c = 0; c < hdr.channels; ++c)
                t.at(0, c, h, w) =
                    static_cast<float>(raster[(static_cast<std::size_t>(h) * t.width() + w) *
                                                  hdr.channels +
                                              c]) /
                    255.0f;
    return ImageFrame(std::move(t));
}

void write_image(const ImageFrame& frame, const std::filesystem::path& path) {
    const Tensor4& t = frame.tensor();
    const char* magic = t.channels() == 3 ? "P6" : "P5";
    std::string header = std::string(magic) + "\n" + std::to_string(t.width()) + " " +
                         std::to_string(t.height()) + "\n255\n";
    std::vector<std::uint8_t> bytes(header.begin(), header.end());
    bytes.reserve(bytes.size() + t.size());
    for (int h = 0; h < t.height(); ++h)
        for (int w = 0; w < t.width(); ++w)
            for (int c = 0; c < t.channels(); ++c) {
                const float x = std::clamp(t.at(0, c, h, w), 0.0f, 1.0f);
                bytes.push_back(static_cast<std::uint8_t>(std::lround(x * 255.0f)));
            }
    detail::write_file_bytes(path, bytes);
}

FlowField read_flo(const std::filesystem::path& path) {
    const auto bytes = detail::read_file_bytes(path);
    Cursor cur(bytes, path.string());
    const std::uint8_t* magic = cur.take(4, "flo magic");
    if (std::memcmp(magic, "PIEH", 4) != 0) cur.fail_at(0, "bad magic (expected \"PIEH\")");
    const std::size_t dims_pos = cur.pos();
    const std::int32_t w = cur.i32le("width");
    const std::int32_t h = cur.i32le("height");
    if (w < 0 || h < 0) cur.fail_at(dims_pos, "size mismatch (negative dimensions)");
    const std::uint64_t pixels = static_cast<std::uint64_t>(w) * static_cast<std::uint64_t>(h);
    if (pixels * 2 > detail::kMaxElements) cur.fail_at(dims_pos, "size mismatch (dims too large)");

    Tensor4 t(1, 2, h, w);
    for (std::int32_t y = 0; y < h; ++y)
        for (std::int32_t x = 0; x < w; ++x) {
            const std::size_t at = cur.pos();
            const float fu = cur.f32le("flow payload");
            const float fv = cur.f32le("flow payload");
            if (!std::isfinite(fu) || !std::isfinite(fv))
                cur.fail_at(at, "non-finite flow value");
            t.at(0, 0, y, x) = fu;
            t.at(0, 1, y, x) = fv;
        }
    if (!cur.at_end())
        cur.fail("size mismatch (" + std::to_string(cur.remaining()) + " trailing bytes)");
    return FlowField(std::move(t));
}

void write_flo(const FlowField& flow, const std::filesystem::path& path) {
    if (flow.batch() != 1)
        throw std::invalid_argument("write_flo: flow batch must be 1, got " +
                                    std::to_string(flow.batch()));
    std::vector<std::uint8_t> bytes;
    bytes.reserve(12 + flow.tensor().size() * 4);
    bytes.insert(bytes.end(), {'P', 'I', 'E', 'H'});
    detail::append_u32le(bytes, static_cast<std::uint32_t>(flow.width()));
    detail::append_u32le(bytes, static_cast<std::uint32_t>(flow.height()));
    for (int h = 0; h < flow.height(); ++h)
        for (int w = 0; w < flow.width(); ++w) {
            detail::append_f32le(bytes, flow.u(0, h, w));
            detail::append_f32le(bytes, flow.v(0, h, w));
        }
    detail::write_file_bytes(path, bytes);
}

FileKind sniff_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path.string() + ": cannot open for reading");
    char magic[4] = {};
    in.read(magic, 4);
    if (in.gcount() < 2) return FileKind::Unknown;
    if (std::memcmp(magic, "GCFT", 4) == 0) return FileKind::Gcft;
    if (std::memcmp(magic, "PIEH", 4) == 0) return FileKind::Flo;
    if (magic[0] == 'P' && (magic[1] == '5' || magic[1] == '6')) return FileKind::Pnm;
    return FileKind::Unknown;
}

Tensor4 load_tensor_auto(const std::filesystem::path& path) {
    switch (sniff_file(path)) {
        case FileKind::Gcft: return read_tensor(path);
        case FileKind::Pnm: return read_image(path).tensor();
        case FileKind::Flo: return read_flo(path).tensor();
        default:
            throw std::runtime_error(path.string() +
                                     ": unrecognized file format (expected GCFT, P5/P6 or PIEH magic)");
    }
}

}  // namespace gcflow
