#pragma once

// Radix-2 discrete Fourier transforms on square power-of-two fields.
//
// Convention: dft2 is the plain unnormalized DFT and idft2 carries the full
// 1/m^2 factor, so idft2(dft2(f)) = f and ||dft2(f)||^2 = m^2 ||f||^2. Library
// FFTs disagree on where the normalization lives, and every objective value
// and gradient here depends on this choice, so it is fixed in one place.
//
// All transform sizes in this code base are small powers of two (probe
// windows), so an iterative in-place radix-2 kernel with cached twiddle and
// bit-reversal tables is plenty; per-size tables live in thread_local storage
// so concurrent callers never share mutable state.

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "magpie/field.hpp"

namespace magpie {
namespace detail {

struct FftTables {
    std::vector<int> rev;  // bit-reversal permutation
    std::vector<cplx> tw;  // tw[k] = exp(-2 pi i k / n), k < n/2
};

inline const FftTables &fft_tables(int n) {
    thread_local std::map<int, FftTables> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    FftTables t;
    int lg = 0;
    while ((1 << lg) < n) ++lg;
    t.rev.resize(n);
    for (int i = 0; i < n; ++i) {
        int r = 0;
        for (int b = 0; b < lg; ++b)
            if (i >> b & 1) r |= 1 << (lg - 1 - b);
        t.rev[i] = r;
    }
    t.tw.resize(n / 2 > 0 ? n / 2 : 1);
    constexpr double two_pi = 6.283185307179586476925286766559;
    for (int k = 0; k < n / 2; ++k) {
        const double ang = -two_pi * k / n;
        t.tw[k] = cplx(std::cos(ang), std::sin(ang));
    }
    return cache.emplace(n, std::move(t)).first->second;
}

inline void fft_inplace(cplx *a, int n, bool inverse) {
    const FftTables &t = fft_tables(n);
    for (int i = 0; i < n; ++i) {
        const int r = t.rev[i];
        if (i < r) std::swap(a[i], a[r]);
    }
    for (int len = 2; len <= n; len <<= 1) {
        const int half = len >> 1;
        const int step = n / len;
        for (int i = 0; i < n; i += len) {
            int ti = 0;
            for (int j = 0; j < half; ++j, ti += step) {
                cplx w = t.tw[ti];
                if (inverse) w = cplx(w.real(), -w.imag());
                const cplx u = a[i + j];
                const cplx v = cmul(a[i + j + half], w);
                a[i + j] = u + v;
                a[i + j + half] = u - v;
            }
        }
    }
}

inline void require_square_pow2(const ComplexField2D &f, const char *what) {
    const int m = f.width();
    if (f.height() != m)
        throw std::invalid_argument(std::string(what) + ": field must be square, got " +
                                    std::to_string(f.width()) + "x" + std::to_string(f.height()));
    if (m <= 0 || (m & (m - 1)) != 0)
        throw std::invalid_argument(std::string(what) + ": size must be a power of two, got " +
                                    std::to_string(m));
}

} // namespace detail

// Forward transform, unnormalized, in place.
inline void dft2_inplace(ComplexField2D &f) {
    detail::require_square_pow2(f, "dft2");
    const int m = f.width();
    for (int i = 0; i < m; ++i) detail::fft_inplace(&f.at(i, 0), m, false);
    thread_local std::vector<cplx> col;
    col.resize(m);
    for (int j = 0; j < m; ++j) {
        for (int i = 0; i < m; ++i) col[i] = f.at(i, j);
        detail::fft_inplace(col.data(), m, false);
        for (int i = 0; i < m; ++i) f.at(i, j) = col[i];
    }
}

// Inverse transform including the 1/m^2 normalization, in place.
inline void idft2_inplace(ComplexField2D &f) {
    detail::require_square_pow2(f, "idft2");
    const int m = f.width();
    for (int i = 0; i < m; ++i) detail::fft_inplace(&f.at(i, 0), m, true);
    thread_local std::vector<cplx> col;
    col.resize(m);
    for (int j = 0; j < m; ++j) {
        for (int i = 0; i < m; ++i) col[i] = f.at(i, j);
        detail::fft_inplace(col.data(), m, true);
        for (int i = 0; i < m; ++i) f.at(i, j) = col[i];
    }
    const double s = 1.0 / (static_cast<double>(m) * static_cast<double>(m));
    for (std::size_t i = 0; i < f.size(); ++i) f[i] *= s;
}

inline ComplexField2D dft2(const ComplexField2D &f) {
    ComplexField2D out = f;
    dft2_inplace(out);
    return out;
}

inline ComplexField2D idft2(const ComplexField2D &f) {
    ComplexField2D out = f;
    idft2_inplace(out);
    return out;
}

} // namespace magpie
