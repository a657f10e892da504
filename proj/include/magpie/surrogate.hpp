#pragma once

// The measurement-matching machinery shared by every solver: the revised
// exit wave (current Fourier phases married to measured magnitudes), the
// misfit objective, its complex gradient, and the quadratic surrogate model
// anchored at a reference iterate.
//
// Phase convention at zero Fourier coefficients: the phase of 0 is undefined,
// so each solver run carries a PhaseCache holding the last well-defined phase
// factor per frequency (initialized to 1). A cache entry changes only when
// the current coefficient is nonzero. The objective value itself does not
// depend on this choice (any unit factor gives the same distance to the
// measured magnitude), which is why objective-only code paths may use a
// fresh cache.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "magpie/fft.hpp"
#include "magpie/field.hpp"
#include "magpie/simulate.hpp"

namespace magpie {

class PhaseCache {
  public:
    PhaseCache() = default;
    PhaseCache(int num_regions, int m) : phases_(num_regions, ComplexField2D(m, m, cplx(1.0, 0.0))) {
        if (num_regions <= 0 || m <= 0)
            throw std::invalid_argument("PhaseCache: counts must be positive");
    }

    int num_regions() const { return static_cast<int>(phases_.size()); }

    ComplexField2D &region(int k) {
        if (k < 0 || k >= num_regions())
            throw std::out_of_range("PhaseCache: region index " + std::to_string(k));
        return phases_[k];
    }
    const ComplexField2D &region(int k) const {
        if (k < 0 || k >= num_regions())
            throw std::out_of_range("PhaseCache: region index " + std::to_string(k));
        return phases_[k];
    }

  private:
    std::vector<ComplexField2D> phases_;
};

// Working record for one scanning region during a sweep or metric pass.
struct RegionState {
    ComplexField2D z_k;   // current window estimate
    ComplexField2D rew;   // revised exit wave at z_k
    double grad_norm = 0; // ||conj(Q) (Q z_k - rew)||_2
};

inline RealField2D sqrt_field(const RealField2D &d) {
    RealField2D out(d.width(), d.height());
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d[i] < 0.0) throw std::domain_error("sqrt_field: negative entry");
        out[i] = std::sqrt(d[i]);
    }
    return out;
}

// Core revised-exit-wave kernel. `out` receives idft2(sqrt_d .* phase) where
// phase is the spectrum phase of Q .* z_k at nonzero coefficients and the
// cached factor elsewhere; the cache slice for region k is refreshed in the
// same pass. Expects sqrt(d_k), which callers precompute once per dataset.
inline void revised_exit_wave_into(ComplexField2D &out, const ComplexField2D &z_k,
                                   const ComplexField2D &Q, const RealField2D &sqrt_dk,
                                   PhaseCache &cache, int k) {
    detail::require_same_shape(z_k, Q, "revised_exit_wave");
    if (sqrt_dk.width() != Q.width() || sqrt_dk.height() != Q.height())
        throw std::invalid_argument("revised_exit_wave: measurement shape mismatch");
    if (!out.same_shape(z_k)) out = ComplexField2D(z_k.width(), z_k.height());

    for (std::size_t i = 0; i < out.size(); ++i) out[i] = cmul(Q[i], z_k[i]);
    dft2_inplace(out);

    ComplexField2D &phase = cache.region(k);
    detail::require_same_shape(phase, z_k, "revised_exit_wave cache");
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double a2 = abs2(out[i]);
        if (a2 != 0.0) phase[i] = out[i] * (1.0 / std::sqrt(a2));
        out[i] = sqrt_dk[i] * phase[i];
    }
    idft2_inplace(out);
}

inline ComplexField2D revised_exit_wave(const ComplexField2D &z_k, const ComplexField2D &Q,
                                        const RealField2D &d_k, PhaseCache &cache, int k) {
    ComplexField2D out;
    revised_exit_wave_into(out, z_k, Q, sqrt_field(d_k), cache, k);
    return out;
}

// Complex gradient of the region misfit at z_k, given the revised exit wave.
inline ComplexField2D region_gradient(const ComplexField2D &z_k, const ComplexField2D &Q,
                                      const ComplexField2D &R_k) {
    detail::require_same_shape(z_k, Q, "region_gradient");
    detail::require_same_shape(z_k, R_k, "region_gradient");
    ComplexField2D g(z_k.width(), z_k.height());
    for (std::size_t i = 0; i < g.size(); ++i)
        g[i] = cmul(std::conj(Q[i]), cmul(Q[i], z_k[i]) - R_k[i]);
    return g;
}

// Region misfit 1/2 ||Q z_k - R_k(z_k)||^2. The value is independent of the
// phase convention at zero coefficients, so a throwaway cache is used.
inline double region_objective(const ComplexField2D &z_k, const ComplexField2D &Q,
                               const RealField2D &d_k) {
    PhaseCache scratch(1, z_k.width());
    ComplexField2D rew;
    revised_exit_wave_into(rew, z_k, Q, sqrt_field(d_k), scratch, 0);
    double s = 0.0;
    for (std::size_t i = 0; i < rew.size(); ++i) s += abs2(cmul(Q[i], z_k[i]) - rew[i]);
    return 0.5 * s;
}

inline double global_objective(const ComplexField2D &z, const ComplexField2D &Q,
                               const ScanPlan &plan, const std::vector<RealField2D> &d) {
    if (d.size() != plan.regions.size())
        throw std::invalid_argument("global_objective: measurement count mismatch");
    double s = 0.0;
    ComplexField2D z_k(plan.m, plan.m);
    for (const RegionIndex &r : plan.regions) {
        extract_region_into(z_k, z, r);
        s += region_objective(z_k, Q, d[static_cast<std::size_t>(r.k)]);
    }
    return s;
}

// Quadratic surrogate anchored at `anchor`: the misfit with the revised exit
// wave frozen at the anchor. Dominates the true misfit everywhere and touches
// it at the anchor.
inline double surrogate_objective(const ComplexField2D &z_k, const ComplexField2D &R_anchor,
                                  const ComplexField2D &Q) {
    detail::require_same_shape(z_k, R_anchor, "surrogate_objective");
    double s = 0.0;
    for (std::size_t i = 0; i < z_k.size(); ++i) s += abs2(cmul(Q[i], z_k[i]) - R_anchor[i]);
    return 0.5 * s;
}

inline double surrogate_objective(const ComplexField2D &z_k, const ComplexField2D &anchor,
                                  const ComplexField2D &Q, const RealField2D &d_k) {
    PhaseCache scratch(1, anchor.width());
    ComplexField2D rew;
    revised_exit_wave_into(rew, anchor, Q, sqrt_field(d_k), scratch, 0);
    return surrogate_objective(z_k, rew, Q);
}

inline ComplexField2D surrogate_gradient(const ComplexField2D &z_k, const ComplexField2D &R_anchor,
                                         const ComplexField2D &Q) {
    return region_gradient(z_k, Q, R_anchor);
}

inline ComplexField2D surrogate_gradient(const ComplexField2D &z_k, const ComplexField2D &anchor,
                                         const ComplexField2D &Q, const RealField2D &d_k) {
    PhaseCache scratch(1, anchor.width());
    ComplexField2D rew;
    revised_exit_wave_into(rew, anchor, Q, sqrt_field(d_k), scratch, 0);
    return region_gradient(z_k, Q, rew);
}

} // namespace magpie
