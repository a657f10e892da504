#pragma once

// Per-level data for the multilevel solver: coarse probes, coarse
// regularization, and the three probe-adapted weight fields used to move
// window estimates, revised exit waves, and regularizers between levels.
//
// The weights are stored in their algebraically cancelled forms so that no
// division by the probe itself occurs (the probe vanishes outside its
// aperture). Bins whose probe energy is exactly zero get zero weights and a
// cleared illumination flag; the coarse update is identically zero there, so
// the convention is inert.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "magpie/field.hpp"
#include "magpie/transfer.hpp"

namespace magpie {

struct LevelData {
    ComplexField2D probe; // Q at this level (side m_l)
    RealField2D reg;      // u at this level, >= 0
    ComplexField2D gain;  // conj(Q) / (u + |Q|^2), 0 where the denominator is 0

    // Transfer data toward the next-coarser level; only meaningful when
    // has_coarse is set (every level except the deepest).
    bool has_coarse = false;
    RealField2D w_obj;                  // weight for window estimates (side m_l)
    ComplexField2D w_rew;               // weight for revised exit waves (side m_l)
    RealField2D w_reg;                  // weight for the regularizer (side m_l/2)
    Field2D<unsigned char> illuminated; // per-bin probe energy flag (side m_l/2)
};

class LevelStack {
  public:
    explicit LevelStack(std::vector<LevelData> levels) : levels_(std::move(levels)) {
        if (levels_.empty()) throw std::invalid_argument("LevelStack: no levels");
    }

    int depth() const { return static_cast<int>(levels_.size()); }

    const LevelData &level(int l) const {
        if (l < 0 || l >= depth())
            throw std::out_of_range("LevelStack: level " + std::to_string(l) + " of " +
                                    std::to_string(depth()));
        return levels_[static_cast<std::size_t>(l)];
    }

  private:
    std::vector<LevelData> levels_;
};

inline int max_levels_for(int m) {
    int lg = 0;
    while ((1 << lg) < m) ++lg;
    return lg + 1; // down to a 1x1 grid
}

namespace detail {

inline ComplexField2D make_prox_gain(const ComplexField2D &Q, const RealField2D &u) {
    ComplexField2D gain(Q.width(), Q.height());
    for (std::size_t i = 0; i < Q.size(); ++i) {
        const double den = u[i] + abs2(Q[i]);
        gain[i] = den > 0.0 ? std::conj(Q[i]) * (1.0 / den) : cplx(0.0, 0.0);
    }
    return gain;
}

} // namespace detail

// Precomputes the whole stack from the fine-level probe and regularizer.
// `levels` counts grids including the finest; levels = 1 keeps everything on
// the fine grid (no transfer data at all).
inline LevelStack build_level_stack(const ComplexField2D &Q, const RealField2D &u, int levels) {
    const int m = Q.width();
    if (Q.height() != m || m <= 0 || (m & (m - 1)) != 0)
        throw std::invalid_argument("build_level_stack: probe must be square power-of-two");
    if (u.width() != m || u.height() != m)
        throw std::invalid_argument("build_level_stack: regularizer shape mismatch");
    for (std::size_t i = 0; i < u.size(); ++i)
        if (!(u[i] >= 0.0)) throw std::invalid_argument("build_level_stack: regularizer must be >= 0");
    if (levels < 1 || levels > max_levels_for(m))
        throw std::invalid_argument("build_level_stack: levels must lie in [1, " +
                                    std::to_string(max_levels_for(m)) + "], got " +
                                    std::to_string(levels));

    std::vector<LevelData> out;
    ComplexField2D q = Q;
    RealField2D reg = u;
    for (int l = 0; l < levels; ++l) {
        LevelData L;
        L.probe = q;
        L.reg = reg;
        L.gain = detail::make_prox_gain(q, reg);
        if (l + 1 < levels) {
            const RealField2D energy = abs2_field(q);
            const RealField2D bin_energy = restrict_field(energy);        // coarse
            const RealField2D spread = prolong_field(bin_energy);         // fine
            const ComplexField2D q_coarse = restrict_field(q);

            L.has_coarse = true;
            L.w_obj = div_or_zero(energy, spread);
            L.w_rew = div_or_zero(hadamard(prolong_field(q_coarse), conj_field(q)), spread);
            L.w_reg = div_or_zero(abs2_field(q_coarse), bin_energy);
            L.illuminated = Field2D<unsigned char>(bin_energy.width(), bin_energy.height());
            for (std::size_t i = 0; i < bin_energy.size(); ++i)
                L.illuminated[i] = bin_energy[i] > 0.0 ? 1 : 0;

            reg = hadamard(L.w_reg, restrict_field(reg));
            q = q_coarse;
        }
        out.push_back(std::move(L));
    }
    return LevelStack(std::move(out));
}

// Probe-energy-weighted bin average of a window estimate: pixels where the
// probe is strong dominate their bin's coarse value.
inline ComplexField2D downsample_object(const ComplexField2D &z_k, const RealField2D &w_obj) {
    if (z_k.width() != w_obj.width() || z_k.height() != w_obj.height())
        throw std::invalid_argument("downsample_object: shape mismatch");
    return restrict_field(hadamard(w_obj, z_k));
}

inline ComplexField2D downsample_rew(const ComplexField2D &R_k, const ComplexField2D &w_rew) {
    detail::require_same_shape(R_k, w_rew, "downsample_rew");
    return restrict_field(hadamard(w_rew, R_k));
}

} // namespace magpie
