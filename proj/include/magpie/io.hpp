#pragma once

// On-disk formats.
//
//   CF2D / RF2D   magic (4 ASCII bytes), u32le width, u32le height, then
//                 row-major float64le samples; complex fields interleave
//                 re,im per sample.
//   MEAS          magic "MEAS", u32le N, u32le width, u32le height, then N
//                 consecutive sample blocks (row-major float64le, no per-block
//                 header) holding the measured intensity stack.
//   PGM (P5)      binary portable graymap; written 16-bit (maxval 65535,
//                 big-endian samples per the format), read at 8 or 16 bit.
//
// Everything is explicit little-endian on the wire regardless of host.

#include <bit>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "magpie/field.hpp"

namespace magpie {
namespace detail {

inline void put_u32le(std::ostream &os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>(v >> 8 & 0xff),
                          static_cast<unsigned char>(v >> 16 & 0xff),
                          static_cast<unsigned char>(v >> 24 & 0xff)};
    os.write(reinterpret_cast<const char *>(b), 4);
}

inline std::uint32_t get_u32le(std::istream &is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char *>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
           static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
}

inline void put_f64le(std::ostream &os, double v) {
    const std::uint64_t u = std::bit_cast<std::uint64_t>(v);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(u >> (8 * i) & 0xff);
    os.write(reinterpret_cast<const char *>(b), 8);
}

inline double get_f64le(std::istream &is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char *>(b), 8);
    std::uint64_t u = 0;
    for (int i = 0; i < 8; ++i) u |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return std::bit_cast<double>(u);
}

inline std::ofstream open_out(const std::string &path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    return os;
}

inline std::ifstream open_in(const std::string &path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open for reading: " + path);
    return is;
}

inline void check_magic(std::istream &is, const char *magic, const std::string &path) {
    char buf[4];
    is.read(buf, 4);
    if (!is || std::memcmp(buf, magic, 4) != 0)
        throw std::runtime_error(path + ": bad magic, expected \"" + magic + "\"");
}

inline void check_stream(std::istream &is, const std::string &path) {
    if (!is) throw std::runtime_error(path + ": truncated or unreadable payload");
}

} // namespace detail

// ---- complex / real field files --------------------------------------------

inline void write_cf2d(const std::string &path, const ComplexField2D &f) {
    auto os = detail::open_out(path);
    os.write("CF2D", 4);
    detail::put_u32le(os, static_cast<std::uint32_t>(f.width()));
    detail::put_u32le(os, static_cast<std::uint32_t>(f.height()));
    for (std::size_t i = 0; i < f.size(); ++i) {
        detail::put_f64le(os, f[i].real());
        detail::put_f64le(os, f[i].imag());
    }
    if (!os) throw std::runtime_error("write failed: " + path);
}

inline ComplexField2D read_cf2d(const std::string &path) {
    auto is = detail::open_in(path);
    detail::check_magic(is, "CF2D", path);
    const int w = static_cast<int>(detail::get_u32le(is));
    const int h = static_cast<int>(detail::get_u32le(is));
    detail::check_stream(is, path);
    if (w <= 0 || h <= 0) throw std::runtime_error(path + ": invalid dimensions");
    ComplexField2D f(w, h);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double re = detail::get_f64le(is);
        const double im = detail::get_f64le(is);
        f[i] = cplx(re, im);
    }
    detail::check_stream(is, path);
    return f;
}

inline void write_rf2d(const std::string &path, const RealField2D &f) {
    auto os = detail::open_out(path);
    os.write("RF2D", 4);
    detail::put_u32le(os, static_cast<std::uint32_t>(f.width()));
    detail::put_u32le(os, static_cast<std::uint32_t>(f.height()));
    for (std::size_t i = 0; i < f.size(); ++i) detail::put_f64le(os, f[i]);
    if (!os) throw std::runtime_error("write failed: " + path);
}

inline RealField2D read_rf2d(const std::string &path) {
    auto is = detail::open_in(path);
    detail::check_magic(is, "RF2D", path);
    const int w = static_cast<int>(detail::get_u32le(is));
    const int h = static_cast<int>(detail::get_u32le(is));
    detail::check_stream(is, path);
    if (w <= 0 || h <= 0) throw std::runtime_error(path + ": invalid dimensions");
    RealField2D f(w, h);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = detail::get_f64le(is);
    detail::check_stream(is, path);
    return f;
}

// ---- measurement stacks ------------------------------------------------------

inline void write_meas(const std::string &path, const std::vector<RealField2D> &stack) {
    if (stack.empty()) throw std::invalid_argument("write_meas: empty stack");
    const int w = stack.front().width();
    const int h = stack.front().height();
    for (const auto &f : stack)
        if (f.width() != w || f.height() != h)
            throw std::invalid_argument("write_meas: inconsistent field shapes");
    auto os = detail::open_out(path);
    os.write("MEAS", 4);
    detail::put_u32le(os, static_cast<std::uint32_t>(stack.size()));
    detail::put_u32le(os, static_cast<std::uint32_t>(w));
    detail::put_u32le(os, static_cast<std::uint32_t>(h));
    for (const auto &f : stack)
        for (std::size_t i = 0; i < f.size(); ++i) detail::put_f64le(os, f[i]);
    if (!os) throw std::runtime_error("write failed: " + path);
}

inline std::vector<RealField2D> read_meas(const std::string &path) {
    auto is = detail::open_in(path);
    detail::check_magic(is, "MEAS", path);
    const std::uint32_t n = detail::get_u32le(is);
    const int w = static_cast<int>(detail::get_u32le(is));
    const int h = static_cast<int>(detail::get_u32le(is));
    detail::check_stream(is, path);
    if (n == 0 || w <= 0 || h <= 0) throw std::runtime_error(path + ": invalid header");
    std::vector<RealField2D> stack;
    stack.reserve(n);
    for (std::uint32_t k = 0; k < n; ++k) {
        RealField2D f(w, h);
        for (std::size_t i = 0; i < f.size(); ++i) f[i] = detail::get_f64le(is);
        stack.push_back(std::move(f));
    }
    detail::check_stream(is, path);
    return stack;
}

// ---- portable graymaps -------------------------------------------------------

// Writes a 16-bit binary P5 graymap. Values are clamped to [0, 65535].
inline void write_pgm16(const std::string &path, const Field2D<std::uint16_t> &img) {
    auto os = detail::open_out(path);
    os << "P5\n" << img.width() << " " << img.height() << "\n65535\n";
    for (std::size_t i = 0; i < img.size(); ++i) {
        // PGM stores multi-byte samples most significant byte first
        const unsigned char b[2] = {static_cast<unsigned char>(img[i] >> 8 & 0xff),
                                    static_cast<unsigned char>(img[i] & 0xff)};
        os.write(reinterpret_cast<const char *>(b), 2);
    }
    if (!os) throw std::runtime_error("write failed: " + path);
}

struct Graymap {
    int width = 0;
    int height = 0;
    int maxval = 0;
    std::vector<std::uint32_t> samples; // row-major
};

namespace detail {

inline int next_pnm_int(std::istream &is, const std::string &path) {
    // skip whitespace and '#' comments between header tokens
    int c = is.get();
    while (is && (std::isspace(c) || c == '#')) {
        if (c == '#')
            while (is && c != '\n') c = is.get();
        c = is.get();
    }
    if (!is || !std::isdigit(c)) throw std::runtime_error(path + ": malformed graymap header");
    int v = 0;
    while (is && std::isdigit(c)) {
        v = v * 10 + (c - '0');
        c = is.get();
    }
    return v;
}

} // namespace detail

inline Graymap read_pgm(const std::string &path) {
    auto is = detail::open_in(path);
    char p, five;
    is.get(p);
    is.get(five);
    if (!is || p != 'P' || five != '5')
        throw std::runtime_error(path + ": not a binary P5 graymap");
    Graymap g;
    g.width = detail::next_pnm_int(is, path);
    g.height = detail::next_pnm_int(is, path);
    g.maxval = detail::next_pnm_int(is, path);
    if (g.width <= 0 || g.height <= 0 || g.maxval <= 0 || g.maxval > 65535)
        throw std::runtime_error(path + ": invalid graymap header");
    const std::size_t count = static_cast<std::size_t>(g.width) * g.height;
    g.samples.resize(count);
    if (g.maxval < 256) {
        std::vector<unsigned char> raw(count);
        is.read(reinterpret_cast<char *>(raw.data()), static_cast<std::streamsize>(count));
        detail::check_stream(is, path);
        for (std::size_t i = 0; i < count; ++i) g.samples[i] = raw[i];
    } else {
        std::vector<unsigned char> raw(count * 2);
        is.read(reinterpret_cast<char *>(raw.data()), static_cast<std::streamsize>(count * 2));
        detail::check_stream(is, path);
        for (std::size_t i = 0; i < count; ++i)
            g.samples[i] = static_cast<std::uint32_t>(raw[2 * i]) << 8 | raw[2 * i + 1];
    }
    return g;
}

// ---- checksums ----------------------------------------------------------------

// FNV-1a, used to fingerprint datasets in run manifests.
class Fnv64 {
  public:
    void add_bytes(const void *p, std::size_t n) {
        const unsigned char *b = static_cast<const unsigned char *>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h_ ^= b[i];
            h_ *= 0x100000001b3ull;
        }
    }
    void add_u32(std::uint32_t v) {
        unsigned char b[4];
        for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i) & 0xff);
        add_bytes(b, 4);
    }
    void add_f64(double v) {
        const std::uint64_t u = std::bit_cast<std::uint64_t>(v);
        unsigned char b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(u >> (8 * i) & 0xff);
        add_bytes(b, 8);
    }
    std::uint64_t value() const { return h_; }

  private:
    std::uint64_t h_ = 0xcbf29ce484222325ull;
};

} // namespace magpie
