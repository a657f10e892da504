#pragma once

// Forward simulation: scan geometry, probe and object synthesis, noiseless
// diffraction intensities, and photon-counting noise.

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "magpie/fft.hpp"
#include "magpie/field.hpp"
#include "magpie/io.hpp"
#include "magpie/rng.hpp"
#include "magpie/transfer.hpp"

namespace magpie {

struct ScanPlan {
    int n = 0;                 // object side length
    int m = 0;                 // probe window side length
    double overlap_ratio = 0;  // fraction of the window shared by neighbors
    std::vector<RegionIndex> regions;
};

struct Dataset {
    ComplexField2D probe;                  // m x m illumination
    ScanPlan plan;
    std::vector<RealField2D> measurements; // one intensity field per region
    double eta = 0.0;                      // photon-counting noise level
    std::optional<ComplexField2D> ground_truth;
    std::uint64_t seed = 0;
};

// Uniform raster of scan offsets covering the whole object: step is the
// rounded non-overlapping fraction of the window, and the final row/column
// is clamped to n-m so coverage never leaves a gap when n-m is not a
// multiple of the step.
inline ScanPlan scan_positions(int n, int m, double overlap_ratio) {
    if (m <= 0 || n <= 0 || m > n)
        throw std::invalid_argument("scan_positions: need 0 < m <= n, got m=" + std::to_string(m) +
                                    " n=" + std::to_string(n));
    if (!(overlap_ratio >= 0.0) || overlap_ratio >= 1.0)
        throw std::invalid_argument("scan_positions: overlap_ratio must lie in [0,1)");
    long step = std::lround(m * (1.0 - overlap_ratio));
    if (step < 1) step = 1; // sub-pixel steps collapse to one-pixel shifts

    std::vector<int> offsets;
    for (long v = 0;; v += step) {
        if (v >= n - m) {
            offsets.push_back(n - m);
            break;
        }
        offsets.push_back(static_cast<int>(v));
    }

    ScanPlan plan;
    plan.n = n;
    plan.m = m;
    plan.overlap_ratio = overlap_ratio;
    int k = 0;
    for (int r : offsets)
        for (int c : offsets) plan.regions.push_back(RegionIndex{k++, r, c});
    return plan;
}

// Probe defaults used by the harness: a 0.6-fraction aperture whose zone
// frequency gives ~14 zone boundaries at m = 128. The propagated field has a
// bright central core plus weak concentric structure reaching most of the
// window, so illumination strength varies over orders of magnitude across
// the footprint — the regime the per-pixel regularizer is designed for.
inline constexpr double default_aperture_fraction = 0.6;
inline constexpr double default_phase_coeff = 0.03;

// Zone-plate probe: a circular mask of radius aperture_fraction*m/2 that is
// transparent on the Fresnel zones where cos(phase_coeff*r^2) >= 0, with the
// open zones carrying the defocus phase exp(i*phase_coeff*r^2/2); propagated
// to the sample plane by one DFT (recentered so the focal structure sits
// mid-window) and normalized to total energy m^2. The half-rate defocus
// keeps every diffraction order of the zone mask spatially extended, so the
// illumination is a bright core with progressively weaker concentric
// structure instead of a single focal spike or a flat disk. At
// phase_coeff = 0 the construction degenerates to the plain disk transform.
inline ComplexField2D make_zone_plate_probe(int m, double aperture_fraction, double phase_coeff) {
    if (m <= 0 || (m & (m - 1)) != 0)
        throw std::invalid_argument("make_zone_plate_probe: m must be a power of two");
    if (!(aperture_fraction > 0.0) || aperture_fraction > 1.0)
        throw std::invalid_argument("make_zone_plate_probe: aperture_fraction must be in (0,1]");
    if (!std::isfinite(phase_coeff))
        throw std::invalid_argument("make_zone_plate_probe: phase_coeff must be finite");

    const double center = (m - 1) / 2.0;
    const double radius = aperture_fraction * m / 2.0;
    ComplexField2D aperture(m, m, cplx(0.0, 0.0));
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            const double dy = i - center;
            const double dx = j - center;
            const double r2 = dx * dx + dy * dy;
            if (r2 <= radius * radius && std::cos(phase_coeff * r2) >= 0.0)
                aperture.at(i, j) =
                    cplx(std::cos(0.5 * phase_coeff * r2), std::sin(0.5 * phase_coeff * r2));
        }
    }

    ComplexField2D far = dft2(aperture);
    ComplexField2D probe(m, m);
    const int h = m / 2;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) probe.at(i, j) = far.at((i + h) % m, (j + h) % m);

    const double energy = norm2_sq(probe);
    if (energy <= 0.0) throw std::runtime_error("make_zone_plate_probe: degenerate probe");
    const double scale = std::sqrt(static_cast<double>(m) * m / energy);
    for (std::size_t i = 0; i < probe.size(); ++i) probe[i] *= scale;
    return probe;
}

enum class ObjectKind { texture, circuit };

inline ObjectKind parse_object_kind(const std::string &s) {
    if (s == "texture") return ObjectKind::texture;
    if (s == "circuit") return ObjectKind::circuit;
    throw std::invalid_argument("unknown object kind: " + s + " (expected texture or circuit)");
}

namespace detail {

// Separable box blur with clamped borders; a few passes make seeded white
// noise into a smooth band-limited field.
inline void box_blur(RealField2D &f, int radius, int passes) {
    const int w = f.width(), h = f.height();
    RealField2D tmp(w, h);
    for (int pass = 0; pass < passes; ++pass) {
        for (int i = 0; i < h; ++i) {
            for (int j = 0; j < w; ++j) {
                double s = 0.0;
                for (int d = -radius; d <= radius; ++d) {
                    int c = j + d;
                    c = c < 0 ? 0 : (c >= w ? w - 1 : c);
                    s += f.at(i, c);
                }
                tmp.at(i, j) = s / (2 * radius + 1);
            }
        }
        for (int j = 0; j < w; ++j) {
            for (int i = 0; i < h; ++i) {
                double s = 0.0;
                for (int d = -radius; d <= radius; ++d) {
                    int r = i + d;
                    r = r < 0 ? 0 : (r >= h ? h - 1 : r);
                    s += tmp.at(r, j);
                }
                f.at(i, j) = s / (2 * radius + 1);
            }
        }
    }
}

inline void normalize01(RealField2D &f) {
    double lo = f[0], hi = f[0];
    for (std::size_t i = 0; i < f.size(); ++i) {
        lo = std::min(lo, f[i]);
        hi = std::max(hi, f[i]);
    }
    const double span = hi - lo;
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = span > 0.0 ? (f[i] - lo) / span : 0.0;
}

} // namespace detail

// Procedural test objects with magnitude in [0,1] and phase in [0, pi/2].
//   texture  - two independent smoothed random fields (magnitude and phase)
//   circuit  - axis-aligned rectangles on a near-zero background, kept away
//              from the border so edge pixels stay dark
inline ComplexField2D make_synthetic_object(int n, ObjectKind kind, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("make_synthetic_object: n must be >= 1");
    const double half_pi = 1.5707963267948966192313216916398;
    ComplexField2D obj(n, n);

    if (kind == ObjectKind::texture) {
        Rng rng(mix_seed(seed, 0x7e37));
        RealField2D mag(n, n), pha(n, n);
        for (std::size_t i = 0; i < mag.size(); ++i) mag[i] = rng.uniform01();
        for (std::size_t i = 0; i < pha.size(); ++i) pha[i] = rng.uniform01();
        const int radius = std::max(1, n / 32);
        detail::box_blur(mag, radius, 3);
        detail::box_blur(pha, radius, 3);
        detail::normalize01(mag);
        detail::normalize01(pha);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double a = mag.at(i, j);
                const double p = half_pi * pha.at(i, j);
                obj.at(i, j) = cplx(a * std::cos(p), a * std::sin(p));
            }
        return obj;
    }

    // circuit
    Rng rng(mix_seed(seed, 0xc1c0));
    const double background = 0.02;
    RealField2D mag(n, n, background), pha(n, n, 0.0);
    const int margin = std::max(1, static_cast<int>(std::lround(0.12 * n)));
    const int interior = n - 2 * margin;
    if (interior > 0) {
        const int count = std::max(4, n / 4);
        for (int t = 0; t < count; ++t) {
            const int hmax = std::max(1, interior / 4);
            const int rh = 1 + static_cast<int>(rng.bounded(static_cast<std::uint64_t>(hmax)));
            const int rw = 1 + static_cast<int>(rng.bounded(static_cast<std::uint64_t>(hmax)));
            const int r0 =
                margin + static_cast<int>(rng.bounded(static_cast<std::uint64_t>(
                             std::max(1, interior - rh + 1))));
            const int c0 =
                margin + static_cast<int>(rng.bounded(static_cast<std::uint64_t>(
                             std::max(1, interior - rw + 1))));
            const double a = 0.4 + 0.6 * rng.uniform01();
            const double p = half_pi * rng.uniform01();
            for (int i = r0; i < r0 + rh && i < n - margin; ++i)
                for (int j = c0; j < c0 + rw && j < n - margin; ++j) {
                    mag.at(i, j) = a;
                    pha.at(i, j) = p;
                }
        }
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            obj.at(i, j) =
                cplx(mag.at(i, j) * std::cos(pha.at(i, j)), mag.at(i, j) * std::sin(pha.at(i, j)));
    return obj;
}

// Builds an object from two graymaps: one supplies the magnitude (normalized
// to [0,1]), the other the phase (scaled to [0, pi/2]). Images larger than n
// are center-cropped; smaller images are an error.
inline ComplexField2D load_grayscale_object(const std::string &mag_path,
                                            const std::string &phase_path, int n) {
    if (n < 1) throw std::invalid_argument("load_grayscale_object: n must be >= 1");
    const Graymap mag = read_pgm(mag_path);
    const Graymap pha = read_pgm(phase_path);
    for (const Graymap *g : {&mag, &pha})
        if (g->width < n || g->height < n)
            throw std::runtime_error("load_grayscale_object: image smaller than requested size " +
                                     std::to_string(n));
    const double half_pi = 1.5707963267948966192313216916398;
    ComplexField2D obj(n, n);
    const int mr0 = (mag.height - n) / 2, mc0 = (mag.width - n) / 2;
    const int pr0 = (pha.height - n) / 2, pc0 = (pha.width - n) / 2;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double a =
                static_cast<double>(mag.samples[static_cast<std::size_t>(mr0 + i) * mag.width +
                                                (mc0 + j)]) /
                mag.maxval;
            const double p =
                half_pi *
                static_cast<double>(pha.samples[static_cast<std::size_t>(pr0 + i) * pha.width +
                                                (pc0 + j)]) /
                pha.maxval;
            obj.at(i, j) = cplx(a * std::cos(p), a * std::sin(p));
        }
    return obj;
}

// Noiseless diffraction intensities: the squared modulus of the DFT of each
// illuminated window.
inline std::vector<RealField2D> simulate_intensities(const ComplexField2D &obj,
                                                     const ComplexField2D &probe,
                                                     const ScanPlan &plan) {
    if (probe.width() != plan.m || probe.height() != plan.m)
        throw std::invalid_argument("simulate_intensities: probe does not match plan window size");
    if (obj.width() != plan.n || obj.height() != plan.n)
        throw std::invalid_argument("simulate_intensities: object does not match plan grid size");
    std::vector<RealField2D> out;
    out.reserve(plan.regions.size());
    ComplexField2D exit_wave(plan.m, plan.m);
    for (const RegionIndex &r : plan.regions) {
        extract_region_into(exit_wave, obj, r);
        for (std::size_t i = 0; i < exit_wave.size(); ++i)
            exit_wave[i] = cmul(exit_wave[i], probe[i]);
        dft2_inplace(exit_wave);
        out.push_back(abs2_field(exit_wave));
    }
    return out;
}

// Photon-counting noise: each intensity is replaced by eta * Poisson(d/eta),
// which preserves the mean and gives variance eta*d. eta = 0 is the
// noiseless passthrough.
inline RealField2D add_poisson_noise(const RealField2D &dtilde, double eta, std::uint64_t seed) {
    if (!(eta >= 0.0)) throw std::invalid_argument("add_poisson_noise: eta must be >= 0");
    for (std::size_t i = 0; i < dtilde.size(); ++i)
        if (dtilde[i] < 0.0) throw std::domain_error("add_poisson_noise: negative intensity");
    if (eta == 0.0) return dtilde;
    RealField2D out(dtilde.width(), dtilde.height());
    Rng rng(seed);
    for (std::size_t i = 0; i < dtilde.size(); ++i)
        out[i] = eta * static_cast<double>(rng.poisson(dtilde[i] / eta));
    return out;
}

// Full pipeline convenience: simulate, apply per-region noise streams (each
// region's stream is derived from the master seed, so region order does not
// matter), and pack the dataset.
inline Dataset make_dataset(const ComplexField2D &obj, const ComplexField2D &probe,
                            const ScanPlan &plan, double eta, std::uint64_t seed) {
    Dataset ds;
    ds.probe = probe;
    ds.plan = plan;
    ds.eta = eta;
    ds.seed = seed;
    ds.ground_truth = obj;
    std::vector<RealField2D> clean = simulate_intensities(obj, probe, plan);
    ds.measurements.reserve(clean.size());
    for (std::size_t k = 0; k < clean.size(); ++k)
        ds.measurements.push_back(add_poisson_noise(clean[k], eta, mix_seed(seed, k)));
    return ds;
}

inline std::uint64_t dataset_checksum(const Dataset &ds) {
    Fnv64 h;
    h.add_u32(static_cast<std::uint32_t>(ds.plan.n));
    h.add_u32(static_cast<std::uint32_t>(ds.plan.m));
    h.add_f64(ds.plan.overlap_ratio);
    h.add_f64(ds.eta);
    for (const RegionIndex &r : ds.plan.regions) {
        h.add_u32(static_cast<std::uint32_t>(r.offset_row));
        h.add_u32(static_cast<std::uint32_t>(r.offset_col));
    }
    for (std::size_t i = 0; i < ds.probe.size(); ++i) {
        h.add_f64(ds.probe[i].real());
        h.add_f64(ds.probe[i].imag());
    }
    for (const RealField2D &d : ds.measurements)
        for (std::size_t i = 0; i < d.size(); ++i) h.add_f64(d[i]);
    return h.value();
}

} // namespace magpie
