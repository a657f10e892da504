#pragma once

// Dense row-major 2D field containers (real and complex) plus the region
// extraction / embedding primitives used by the scanning forward model.

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace magpie {

using cplx = std::complex<double>;

// Complex product spelled out in real arithmetic. std::complex operator* is
// routed through __muldc3 (the C99 Annex-G NaN/Inf fixup) at -O3 without
// -ffast-math, which is far too slow for FFT butterflies and elementwise
// kernels; this form compiles to plain mul/add and is deterministic.
inline cplx cmul(const cplx &a, const cplx &b) {
    return cplx(a.real() * b.real() - a.imag() * b.imag(),
                a.real() * b.imag() + a.imag() * b.real());
}

inline double abs2(const cplx &a) {
    return a.real() * a.real() + a.imag() * a.imag();
}

template <typename T>
class Field2D {
  public:
    Field2D() = default;

    Field2D(int width, int height, T fill = T()) : w_(width), h_(height) {
        if (width <= 0 || height <= 0)
            throw std::invalid_argument("Field2D: dimensions must be positive, got " +
                                        std::to_string(width) + "x" + std::to_string(height));
        data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
    }

    int width() const { return w_; }
    int height() const { return h_; }
    std::size_t size() const { return data_.size(); }

    T &at(int row, int col) { return data_[static_cast<std::size_t>(row) * w_ + col]; }
    const T &at(int row, int col) const { return data_[static_cast<std::size_t>(row) * w_ + col]; }

    T &operator[](std::size_t i) { return data_[i]; }
    const T &operator[](std::size_t i) const { return data_[i]; }

    T *data() { return data_.data(); }
    const T *data() const { return data_.data(); }

    auto begin() { return data_.begin(); }
    auto end() { return data_.end(); }
    auto begin() const { return data_.begin(); }
    auto end() const { return data_.end(); }

    bool same_shape(const Field2D &other) const { return w_ == other.w_ && h_ == other.h_; }

  private:
    int w_ = 0;
    int h_ = 0;
    std::vector<T> data_;
};

using ComplexField2D = Field2D<cplx>;
using RealField2D = Field2D<double>;

// One scanning position: region k covers rows [offset_row, offset_row+m) and
// columns [offset_col, offset_col+m) of the object grid.
struct RegionIndex {
    int k = 0;
    int offset_row = 0;
    int offset_col = 0;
};

namespace detail {

template <typename T>
inline void require_same_shape(const Field2D<T> &a, const Field2D<T> &b, const char *what) {
    if (!a.same_shape(b))
        throw std::invalid_argument(std::string(what) + ": shape mismatch " +
                                    std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                                    " vs " + std::to_string(b.width()) + "x" +
                                    std::to_string(b.height()));
}

inline void require_region_inside(const RegionIndex &r, int m, int obj_w, int obj_h,
                                  const char *what) {
    if (m <= 0 || r.offset_row < 0 || r.offset_col < 0 || r.offset_row + m > obj_h ||
        r.offset_col + m > obj_w)
        throw std::out_of_range(std::string(what) + ": region (" + std::to_string(r.offset_row) +
                                "," + std::to_string(r.offset_col) + ")+" + std::to_string(m) +
                                " outside " + std::to_string(obj_w) + "x" + std::to_string(obj_h) +
                                " object");
}

} // namespace detail

// ---- region extraction / embedding ----------------------------------------

// Copies the m-by-m window at region r out of the object (the action of the
// selection operator for scan position k).
inline ComplexField2D extract_region(const ComplexField2D &obj, const RegionIndex &r, int m) {
    detail::require_region_inside(r, m, obj.width(), obj.height(), "extract_region");
    ComplexField2D patch(m, m);
    for (int i = 0; i < m; ++i) {
        const cplx *src = &obj.at(r.offset_row + i, r.offset_col);
        cplx *dst = &patch.at(i, 0);
        for (int j = 0; j < m; ++j) dst[j] = src[j];
    }
    return patch;
}

// In-place variant used by the sweep loops to avoid reallocating per region.
inline void extract_region_into(ComplexField2D &patch, const ComplexField2D &obj,
                                const RegionIndex &r) {
    const int m = patch.width();
    if (patch.height() != m) throw std::invalid_argument("extract_region_into: patch not square");
    detail::require_region_inside(r, m, obj.width(), obj.height(), "extract_region_into");
    for (int i = 0; i < m; ++i) {
        const cplx *src = &obj.at(r.offset_row + i, r.offset_col);
        cplx *dst = &patch.at(i, 0);
        for (int j = 0; j < m; ++j) dst[j] = src[j];
    }
}

// Adds the patch into the window at region r (the transpose action of the
// selection operator); all other entries are left untouched.
inline void embed_add_region_into(ComplexField2D &obj, const ComplexField2D &patch,
                                  const RegionIndex &r) {
    const int m = patch.width();
    if (patch.height() != m) throw std::invalid_argument("embed_add_region: patch not square");
    detail::require_region_inside(r, m, obj.width(), obj.height(), "embed_add_region");
    for (int i = 0; i < m; ++i) {
        cplx *dst = &obj.at(r.offset_row + i, r.offset_col);
        const cplx *src = &patch.at(i, 0);
        for (int j = 0; j < m; ++j) dst[j] += src[j];
    }
}

inline ComplexField2D embed_add_region(const ComplexField2D &obj, const ComplexField2D &patch,
                                       const RegionIndex &r) {
    ComplexField2D out = obj;
    embed_add_region_into(out, patch, r);
    return out;
}

// Real-valued accumulation of the same shape, used to assemble per-pixel
// probe-energy totals.
inline void embed_add_region_into(RealField2D &obj, const RealField2D &patch,
                                  const RegionIndex &r) {
    const int m = patch.width();
    if (patch.height() != m) throw std::invalid_argument("embed_add_region: patch not square");
    detail::require_region_inside(r, m, obj.width(), obj.height(), "embed_add_region");
    for (int i = 0; i < m; ++i) {
        double *dst = &obj.at(r.offset_row + i, r.offset_col);
        const double *src = &patch.at(i, 0);
        for (int j = 0; j < m; ++j) dst[j] += src[j];
    }
}

// Overwrites the window at region r with the patch (used by the sweep solvers,
// which replace the current window contents with the updated estimate).
inline void write_region(ComplexField2D &obj, const ComplexField2D &patch, const RegionIndex &r) {
    const int m = patch.width();
    if (patch.height() != m) throw std::invalid_argument("write_region: patch not square");
    detail::require_region_inside(r, m, obj.width(), obj.height(), "write_region");
    for (int i = 0; i < m; ++i) {
        cplx *dst = &obj.at(r.offset_row + i, r.offset_col);
        const cplx *src = &patch.at(i, 0);
        for (int j = 0; j < m; ++j) dst[j] = src[j];
    }
}

// ---- elementwise algebra ---------------------------------------------------

inline RealField2D abs2_field(const ComplexField2D &f) {
    RealField2D out(f.width(), f.height());
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = abs2(f[i]);
    return out;
}

inline RealField2D abs_field(const ComplexField2D &f) {
    RealField2D out(f.width(), f.height());
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = std::abs(f[i]);
    return out;
}

inline ComplexField2D conj_field(const ComplexField2D &f) {
    ComplexField2D out(f.width(), f.height());
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = std::conj(f[i]);
    return out;
}

inline ComplexField2D hadamard(const ComplexField2D &a, const ComplexField2D &b) {
    detail::require_same_shape(a, b, "hadamard");
    ComplexField2D out(a.width(), a.height());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = cmul(a[i], b[i]);
    return out;
}

inline ComplexField2D hadamard(const RealField2D &a, const ComplexField2D &b) {
    if (a.width() != b.width() || a.height() != b.height())
        throw std::invalid_argument("hadamard: shape mismatch");
    ComplexField2D out(b.width(), b.height());
    for (std::size_t i = 0; i < b.size(); ++i) out[i] = a[i] * b[i];
    return out;
}

inline RealField2D hadamard(const RealField2D &a, const RealField2D &b) {
    detail::require_same_shape(a, b, "hadamard");
    RealField2D out(a.width(), a.height());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
    return out;
}

template <typename T>
inline Field2D<T> add(const Field2D<T> &a, const Field2D<T> &b) {
    detail::require_same_shape(a, b, "add");
    Field2D<T> out(a.width(), a.height());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
}

template <typename T>
inline Field2D<T> sub(const Field2D<T> &a, const Field2D<T> &b) {
    detail::require_same_shape(a, b, "sub");
    Field2D<T> out(a.width(), a.height());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

template <typename T>
inline Field2D<T> scaled(const Field2D<T> &a, double s) {
    Field2D<T> out(a.width(), a.height());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * s;
    return out;
}

// Elementwise quotient with the 0/0 -> 0 convention used for the multilevel
// weight vectors: wherever the denominator vanishes the quotient is defined
// as zero (those entries carry no probe energy and never enter an update).
inline RealField2D div_or_zero(const RealField2D &num, const RealField2D &den) {
    detail::require_same_shape(num, den, "div_or_zero");
    RealField2D out(num.width(), num.height());
    for (std::size_t i = 0; i < num.size(); ++i) out[i] = den[i] != 0.0 ? num[i] / den[i] : 0.0;
    return out;
}

inline ComplexField2D div_or_zero(const ComplexField2D &num, const RealField2D &den) {
    if (num.width() != den.width() || num.height() != den.height())
        throw std::invalid_argument("div_or_zero: shape mismatch");
    ComplexField2D out(num.width(), num.height());
    for (std::size_t i = 0; i < num.size(); ++i)
        out[i] = den[i] != 0.0 ? num[i] * (1.0 / den[i]) : cplx(0.0, 0.0);
    return out;
}

// ---- norms and inner products ----------------------------------------------

inline double norm2_sq(const ComplexField2D &f) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += abs2(f[i]);
    return s;
}

inline double norm2_sq(const RealField2D &f) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * f[i];
    return s;
}

template <typename T>
inline double norm2(const Field2D<T> &f) {
    return std::sqrt(norm2_sq(f));
}

inline double norm_inf(const RealField2D &f) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s = std::max(s, std::abs(f[i]));
    return s;
}

inline double norm_inf(const ComplexField2D &f) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s = std::max(s, std::abs(f[i]));
    return s;
}

// Real part of the Euclidean inner product <a, b> = sum conj(a) * b. This is
// the inner product of the underlying real embedding of the complex field,
// which is what gradient descent arguments are stated against.
inline double re_inner(const ComplexField2D &a, const ComplexField2D &b) {
    detail::require_same_shape(a, b, "re_inner");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    return s;
}

inline bool all_finite(const ComplexField2D &f) {
    for (std::size_t i = 0; i < f.size(); ++i)
        if (!std::isfinite(f[i].real()) || !std::isfinite(f[i].imag())) return false;
    return true;
}

inline bool all_finite(const RealField2D &f) {
    for (std::size_t i = 0; i < f.size(); ++i)
        if (!std::isfinite(f[i])) return false;
    return true;
}

} // namespace magpie
