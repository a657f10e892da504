#pragma once

// The four reconstruction algorithms.
//
//   rpie             stochastic sweeps of regularized proximal window updates
//   magpie           same sweeps, but each window update recurses through a
//                    stack of coarser grids (rpie is exactly the depth-1 case)
//   exact_surrogate  full minimization of the anchored surrogate per step;
//                    slow but carries clean monotonicity/rate guarantees,
//                    kept as the reference the property tests lean on
//   lbfgs            limited-memory quasi-Newton on the real embedding of
//                    the misfit, with Armijo backtracking
//
// All runs are deterministic functions of (z0, dataset, config): the sweep
// order comes from a seeded generator and nothing else is stochastic.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <deque>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "magpie/field.hpp"
#include "magpie/levels.hpp"
#include "magpie/metrics.hpp"
#include "magpie/rng.hpp"
#include "magpie/simulate.hpp"
#include "magpie/surrogate.hpp"

namespace magpie {

enum class Algorithm { rpie, exact_surrogate, lbfgs, magpie };

inline Algorithm parse_algorithm(const std::string &s) {
    if (s == "rpie") return Algorithm::rpie;
    if (s == "exact_surrogate") return Algorithm::exact_surrogate;
    if (s == "lbfgs") return Algorithm::lbfgs;
    if (s == "magpie") return Algorithm::magpie;
    throw std::invalid_argument("unknown algorithm: " + s +
                                " (expected rpie, exact_surrogate, lbfgs, or magpie)");
}

inline const char *algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::rpie: return "rpie";
        case Algorithm::exact_surrogate: return "exact_surrogate";
        case Algorithm::lbfgs: return "lbfgs";
        case Algorithm::magpie: return "magpie";
    }
    return "?";
}

struct SolverConfig {
    Algorithm algorithm = Algorithm::rpie;
    double alpha = 0.01;          // proximal regularization strength
    int levels = 1;               // grid count for magpie (1 = fine grid only)
    double tol = 1e-4;            // threshold for the mean-gradient stopping rule
    int max_epochs = 100;
    std::uint64_t seed = 0;
    int lbfgs_history = 5;
};

struct RunLog {
    std::vector<MetricRow> rows;
    SolverConfig config;
    std::uint64_t seed = 0;
    std::string status; // "converged", "max_epochs", or "line_search_failed"
};

struct RunResult {
    ComplexField2D z;
    RunLog log;
};

// Validates a config against the dataset's window size. levels > 1 is only
// meaningful for magpie; the other algorithms must leave it at 1.
inline void validate_solver_config(const SolverConfig &cfg, int m) {
    if (!(cfg.alpha > 0.0)) throw std::invalid_argument("solver config: alpha must be positive");
    if (!(cfg.tol > 0.0)) throw std::invalid_argument("solver config: tol must be positive");
    if (cfg.max_epochs < 0) throw std::invalid_argument("solver config: max_epochs must be >= 0");
    if (cfg.lbfgs_history < 1)
        throw std::invalid_argument("solver config: lbfgs_history must be >= 1");
    if (cfg.levels < 1 || cfg.levels > max_levels_for(m))
        throw std::invalid_argument("solver config: levels must lie in [1, " +
                                    std::to_string(max_levels_for(m)) + "]");
    if (cfg.algorithm != Algorithm::magpie && cfg.levels != 1)
        throw std::invalid_argument("solver config: levels > 1 requires algorithm=magpie");
}

// Fine-grid regularizer alpha * (max|Q|^2 - |Q|^2): zero where the probe is
// strongest, largest where it vanishes, so weakly illuminated pixels are
// damped instead of divided by almost nothing.
inline RealField2D make_rpie_regularizer(const ComplexField2D &Q, double alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("make_rpie_regularizer: alpha must be positive");
    RealField2D u = abs2_field(Q);
    double peak = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) peak = std::max(peak, u[i]);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = alpha * (peak - u[i]);
    return u;
}

// One regularized proximal window update. Errors out if any denominator
// vanishes; that cannot happen with the regularizer above (alpha > 0 and a
// nonzero probe keep u + |Q|^2 bounded away from zero).
inline ComplexField2D rpie_region_update(const ComplexField2D &z_k, const ComplexField2D &Q,
                                         const ComplexField2D &R_k, const RealField2D &u) {
    detail::require_same_shape(z_k, Q, "rpie_region_update");
    detail::require_same_shape(z_k, R_k, "rpie_region_update");
    if (u.width() != z_k.width() || u.height() != z_k.height())
        throw std::invalid_argument("rpie_region_update: regularizer shape mismatch");
    ComplexField2D out(z_k.width(), z_k.height());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double den = u[i] + abs2(Q[i]);
        if (!(den > 0.0))
            throw std::runtime_error("rpie_region_update: zero denominator (no probe energy and "
                                     "no regularization at a pixel)");
        out[i] = z_k[i] + cmul(std::conj(Q[i]) * (1.0 / den), R_k[i] - cmul(Q[i], z_k[i]));
    }
    return out;
}

namespace detail {

// Same proximal step with the stack's precomputed gain kernel; zero-energy
// pixels (gain 0) are left untouched, which only occurs on coarse grids.
inline void prox_step_inplace(ComplexField2D &z, const LevelData &L, const ComplexField2D &R) {
    for (std::size_t i = 0; i < z.size(); ++i)
        z[i] += cmul(L.gain[i], R[i] - cmul(L.probe[i], z[i]));
}

inline double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

} // namespace detail

// Recursive multilevel window update: descend the residual problem through
// weighted bin averages, take the cheap proximal step at the coarsest grid,
// prolong the coarse correction back, and finish with one fine proximal step.
// The revised exit wave R_k is evaluated once by the caller and reused at
// every level, including the post-smoothing step.
inline ComplexField2D magps_update(const ComplexField2D &z_k, int level, const LevelStack &stack,
                                   const ComplexField2D &R_k) {
    const LevelData &L = stack.level(level);
    detail::require_same_shape(z_k, L.probe, "magps_update");
    detail::require_same_shape(z_k, R_k, "magps_update");

    if (level == stack.depth() - 1) {
        ComplexField2D out = z_k;
        detail::prox_step_inplace(out, L, R_k);
        return out;
    }

    const ComplexField2D z_coarse = downsample_object(z_k, L.w_obj);
    const ComplexField2D r_coarse = downsample_rew(R_k, L.w_rew);
    const ComplexField2D z_coarse_new = magps_update(z_coarse, level + 1, stack, r_coarse);

    ComplexField2D out = z_k;
    const int mc = z_coarse.width();
    for (int i = 0; i < mc; ++i) {
        for (int j = 0; j < mc; ++j) {
            const cplx dv = z_coarse_new.at(i, j) - z_coarse.at(i, j);
            out.at(2 * i, 2 * j) += dv;
            out.at(2 * i, 2 * j + 1) += dv;
            out.at(2 * i + 1, 2 * j) += dv;
            out.at(2 * i + 1, 2 * j + 1) += dv;
        }
    }
    detail::prox_step_inplace(out, L, R_k);
    return out;
}

// Mutable state threaded through sweeps: the object estimate plus the
// per-region phase cache.
struct SweepState {
    ComplexField2D z;
    PhaseCache cache;
};

// One shuffled pass of plain window updates. Self-contained (recomputes
// sqrt(d) per region); the run loops below use SweepRunner, which hoists
// that work out of the epoch.
inline void rpie_epoch(SweepState &state, const Dataset &ds, const RealField2D &u, Rng &rng) {
    const int m = ds.plan.m;
    std::vector<int> order(ds.plan.regions.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    rng.shuffle(order);
    ComplexField2D z_k(m, m), rew(m, m);
    for (int k : order) {
        const RegionIndex &r = ds.plan.regions[static_cast<std::size_t>(k)];
        extract_region_into(z_k, state.z, r);
        revised_exit_wave_into(rew, z_k, ds.probe,
                               sqrt_field(ds.measurements[static_cast<std::size_t>(k)]),
                               state.cache, k);
        write_region(state.z, rpie_region_update(z_k, ds.probe, rew, u), r);
    }
}

// Precomputed per-run machinery for the sweep algorithms: level stack,
// sqrt-measurements, and reusable window buffers.
class SweepRunner {
  public:
    SweepRunner(const Dataset &ds, const SolverConfig &cfg)
        : ds_(&ds),
          stack_(build_level_stack(ds.probe, make_rpie_regularizer(ds.probe, cfg.alpha),
                                   cfg.levels)),
          z_k_(ds.plan.m, ds.plan.m),
          rew_(ds.plan.m, ds.plan.m) {
        sqrt_d_.reserve(ds.measurements.size());
        for (const RealField2D &d : ds.measurements) sqrt_d_.push_back(sqrt_field(d));
        order_.resize(ds.plan.regions.size());
        for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = static_cast<int>(i);
    }

    const LevelStack &stack() const { return stack_; }

    void epoch(SweepState &state, Rng &rng) {
        // reset to identity before shuffling so an epoch permutes the same
        // way rpie_epoch does (depth-1 runs must replay plain sweeps exactly)
        for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = static_cast<int>(i);
        rng.shuffle(order_);
        for (int k : order_) {
            const RegionIndex &r = ds_->plan.regions[static_cast<std::size_t>(k)];
            extract_region_into(z_k_, state.z, r);
            revised_exit_wave_into(rew_, z_k_, stack_.level(0).probe,
                                   sqrt_d_[static_cast<std::size_t>(k)], state.cache, k);
            write_region(state.z, magps_update(z_k_, 0, stack_, rew_), r);
        }
    }

  private:
    const Dataset *ds_;
    LevelStack stack_;
    std::vector<RealField2D> sqrt_d_;
    std::vector<int> order_;
    ComplexField2D z_k_, rew_;
};

namespace detail {

inline void require_valid_start(const ComplexField2D &z0, const Dataset &ds, const char *what) {
    if (z0.width() != ds.plan.n || z0.height() != ds.plan.n)
        throw std::invalid_argument(std::string(what) + ": start does not match object grid");
    if (ds.measurements.size() != ds.plan.regions.size())
        throw std::invalid_argument(std::string(what) + ": measurement count mismatch");
}

} // namespace detail

// Shared run loop for the sweep algorithms (rpie is the depth-1 instance of
// the multilevel update, so one loop serves both).
inline RunResult magpie_run(const ComplexField2D &z0, const Dataset &ds, const SolverConfig &cfg) {
    detail::require_valid_start(z0, ds, "magpie_run");
    validate_solver_config(cfg, ds.plan.m);
    if (cfg.algorithm != Algorithm::magpie && cfg.algorithm != Algorithm::rpie)
        throw std::invalid_argument("magpie_run: algorithm must be magpie or rpie");

    SweepState state{z0, PhaseCache(static_cast<int>(ds.plan.regions.size()), ds.plan.m)};
    SweepRunner runner(ds, cfg);
    Rng rng(cfg.seed);

    RunLog log;
    log.config = cfg;
    log.seed = cfg.seed;
    log.status = "max_epochs";
    const auto t0 = std::chrono::steady_clock::now();

    MetricRow row = compute_metrics(state.z, ds);
    row.epoch = 0;
    row.wall_ms = detail::ms_since(t0);
    log.rows.push_back(row);

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        runner.epoch(state, rng);
        row = compute_metrics(state.z, ds);
        row.epoch = epoch;
        row.wall_ms = detail::ms_since(t0);
        log.rows.push_back(row);
        if (check_stop(row, cfg.tol)) {
            log.status = "converged";
            break;
        }
    }
    return RunResult{std::move(state.z), std::move(log)};
}

// ---- exact surrogate minimization -------------------------------------------

// Total probe energy deposited on each object pixel by the whole scan; the
// diagonal of the surrogate's normal equations.
inline RealField2D accumulate_probe_energy(const ScanPlan &plan, const ComplexField2D &probe) {
    RealField2D total(plan.n, plan.n, 0.0);
    const RealField2D energy = abs2_field(probe);
    for (const RegionIndex &r : plan.regions) embed_add_region_into(total, energy, r);
    return total;
}

namespace detail {

inline ComplexField2D exact_step_impl(const ComplexField2D &z, const Dataset &ds,
                                      PhaseCache &cache, const RealField2D &probe_energy,
                                      const std::vector<RealField2D> &sqrt_d) {
    const int m = ds.plan.m;
    ComplexField2D rhs(ds.plan.n, ds.plan.n, cplx(0.0, 0.0));
    ComplexField2D z_k(m, m), rew(m, m), patch(m, m);
    for (const RegionIndex &r : ds.plan.regions) {
        extract_region_into(z_k, z, r);
        revised_exit_wave_into(rew, z_k, ds.probe, sqrt_d[static_cast<std::size_t>(r.k)], cache,
                               r.k);
        for (std::size_t i = 0; i < patch.size(); ++i)
            patch[i] = cmul(std::conj(ds.probe[i]), rew[i]);
        embed_add_region_into(rhs, patch, r);
    }
    ComplexField2D out(ds.plan.n, ds.plan.n);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = probe_energy[i] > 0.0 ? rhs[i] * (1.0 / probe_energy[i]) : z[i];
    return out;
}

} // namespace detail

// Exact minimizer of the surrogate anchored at z: per-pixel normal equation
// (sum of probe energies) * z+ = sum of conj(Q)-weighted revised exit waves.
// Pixels never touched by the scan keep their previous value (their rows of
// the normal equations are identically zero and they do not enter the misfit).
inline ComplexField2D exact_surrogate_step(const ComplexField2D &z, const Dataset &ds) {
    detail::require_valid_start(z, ds, "exact_surrogate_step");
    PhaseCache cache(static_cast<int>(ds.plan.regions.size()), ds.plan.m);
    std::vector<RealField2D> sqrt_d;
    sqrt_d.reserve(ds.measurements.size());
    for (const RealField2D &d : ds.measurements) sqrt_d.push_back(sqrt_field(d));
    return detail::exact_step_impl(z, ds, cache, accumulate_probe_energy(ds.plan, ds.probe),
                                   sqrt_d);
}

inline RunResult exact_surrogate_run(const ComplexField2D &z0, const Dataset &ds,
                                     const SolverConfig &cfg) {
    detail::require_valid_start(z0, ds, "exact_surrogate_run");
    validate_solver_config(cfg, ds.plan.m);

    PhaseCache cache(static_cast<int>(ds.plan.regions.size()), ds.plan.m);
    std::vector<RealField2D> sqrt_d;
    sqrt_d.reserve(ds.measurements.size());
    for (const RealField2D &d : ds.measurements) sqrt_d.push_back(sqrt_field(d));
    const RealField2D probe_energy = accumulate_probe_energy(ds.plan, ds.probe);

    RunLog log;
    log.config = cfg;
    log.seed = cfg.seed;
    log.status = "max_epochs";
    const auto t0 = std::chrono::steady_clock::now();

    ComplexField2D z = z0;
    MetricRow row = compute_metrics(z, ds);
    row.epoch = 0;
    row.wall_ms = detail::ms_since(t0);
    log.rows.push_back(row);

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        z = detail::exact_step_impl(z, ds, cache, probe_energy, sqrt_d);
        row = compute_metrics(z, ds);
        row.epoch = epoch;
        row.wall_ms = detail::ms_since(t0);
        log.rows.push_back(row);
        if (check_stop(row, cfg.tol)) {
            log.status = "converged";
            break;
        }
    }
    return RunResult{std::move(z), std::move(log)};
}

// ---- L-BFGS -------------------------------------------------------------------

namespace detail {

// Misfit in the Fourier domain (one transform per region); used for the many
// objective-only evaluations inside the line search. Identical to the
// spatial-domain value by Parseval, independent of any phase convention.
inline double objective_only(const ComplexField2D &z, const Dataset &ds,
                             const std::vector<RealField2D> &sqrt_d) {
    const int m = ds.plan.m;
    const double inv_m2 = 1.0 / (static_cast<double>(m) * m);
    double total = 0.0;
    ComplexField2D w(m, m);
    for (const RegionIndex &r : ds.plan.regions) {
        for (int i = 0; i < m; ++i) {
            const cplx *src = &z.at(r.offset_row + i, r.offset_col);
            for (int j = 0; j < m; ++j) w.at(i, j) = cmul(ds.probe.at(i, j), src[j]);
        }
        dft2_inplace(w);
        const RealField2D &sd = sqrt_d[static_cast<std::size_t>(r.k)];
        double s = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double diff = std::abs(w[i]) - sd[i];
            s += diff * diff;
        }
        total += 0.5 * s * inv_m2;
    }
    return total;
}

// Misfit and its full complex gradient (assembled over all regions).
inline double objective_and_gradient(const ComplexField2D &z, const Dataset &ds,
                                     const std::vector<RealField2D> &sqrt_d, PhaseCache &cache,
                                     ComplexField2D &grad) {
    const int m = ds.plan.m;
    if (!grad.same_shape(z)) grad = ComplexField2D(z.width(), z.height());
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] = cplx(0.0, 0.0);
    double total = 0.0;
    ComplexField2D z_k(m, m), rew(m, m), patch(m, m);
    for (const RegionIndex &r : ds.plan.regions) {
        extract_region_into(z_k, z, r);
        revised_exit_wave_into(rew, z_k, ds.probe, sqrt_d[static_cast<std::size_t>(r.k)], cache,
                               r.k);
        double s = 0.0;
        for (std::size_t i = 0; i < patch.size(); ++i) {
            const cplx resid = cmul(ds.probe[i], z_k[i]) - rew[i];
            s += abs2(resid);
            patch[i] = cmul(std::conj(ds.probe[i]), resid);
        }
        total += 0.5 * s;
        embed_add_region_into(grad, patch, r);
    }
    return total;
}

} // namespace detail

// Limited-memory BFGS on the real embedding of the misfit. Inner products are
// the real parts of complex dot products (exactly the Euclidean products of
// the stacked real/imaginary coordinates). Curvature pairs with non-positive
// y.s are dropped; the line search is Armijo backtracking with halving.
inline RunResult lbfgs_run(const ComplexField2D &z0, const Dataset &ds, const SolverConfig &cfg) {
    detail::require_valid_start(z0, ds, "lbfgs_run");
    validate_solver_config(cfg, ds.plan.m);
    if (cfg.algorithm != Algorithm::lbfgs)
        throw std::invalid_argument("lbfgs_run: algorithm must be lbfgs");

    constexpr double armijo_c = 1e-4;
    constexpr int max_halvings = 40;

    PhaseCache cache(static_cast<int>(ds.plan.regions.size()), ds.plan.m);
    std::vector<RealField2D> sqrt_d;
    sqrt_d.reserve(ds.measurements.size());
    for (const RealField2D &d : ds.measurements) sqrt_d.push_back(sqrt_field(d));

    RunLog log;
    log.config = cfg;
    log.seed = cfg.seed;
    log.status = "max_epochs";
    const auto t0 = std::chrono::steady_clock::now();

    ComplexField2D z = z0, grad;
    double phi = detail::objective_and_gradient(z, ds, sqrt_d, cache, grad);

    MetricRow row = compute_metrics(z, ds);
    row.epoch = 0;
    row.wall_ms = detail::ms_since(t0);
    log.rows.push_back(row);

    std::deque<ComplexField2D> hist_s, hist_y;
    std::deque<double> hist_rho;
    ComplexField2D dir(z.width(), z.height()), trial(z.width(), z.height());
    ComplexField2D grad_new;

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        const double gnorm = norm2(grad);
        if (gnorm == 0.0) {
            // stationary point: nothing to do, report the unchanged iterate
            row = compute_metrics(z, ds);
            row.epoch = epoch;
            row.wall_ms = detail::ms_since(t0);
            log.rows.push_back(row);
            log.status = "converged";
            break;
        }

        // two-loop recursion for the quasi-Newton direction
        dir = grad;
        const int h = static_cast<int>(hist_s.size());
        std::vector<double> a(static_cast<std::size_t>(h), 0.0);
        for (int i = h - 1; i >= 0; --i) {
            a[static_cast<std::size_t>(i)] =
                hist_rho[static_cast<std::size_t>(i)] *
                re_inner(hist_s[static_cast<std::size_t>(i)], dir);
            const ComplexField2D &y = hist_y[static_cast<std::size_t>(i)];
            const double ai = a[static_cast<std::size_t>(i)];
            for (std::size_t p = 0; p < dir.size(); ++p) dir[p] -= ai * y[p];
        }
        if (h > 0) {
            const double ys = re_inner(hist_s.back(), hist_y.back());
            const double yy = norm2_sq(hist_y.back());
            const double gamma = yy > 0.0 ? ys / yy : 1.0;
            for (std::size_t p = 0; p < dir.size(); ++p) dir[p] *= gamma;
        }
        for (int i = 0; i < h; ++i) {
            const double b = hist_rho[static_cast<std::size_t>(i)] *
                             re_inner(hist_y[static_cast<std::size_t>(i)], dir);
            const ComplexField2D &s = hist_s[static_cast<std::size_t>(i)];
            const double coeff = a[static_cast<std::size_t>(i)] - b;
            for (std::size_t p = 0; p < dir.size(); ++p) dir[p] += coeff * s[p];
        }
        for (std::size_t p = 0; p < dir.size(); ++p) dir[p] = -dir[p];

        double slope = re_inner(grad, dir);
        if (!(slope < 0.0)) {
            // curvature information went bad; fall back to steepest descent
            for (std::size_t p = 0; p < dir.size(); ++p) dir[p] = -grad[p];
            slope = -gnorm * gnorm;
        }

        // Armijo backtracking; the very first step is scaled to unit length
        double step = h == 0 ? 1.0 / gnorm : 1.0;
        bool accepted = false;
        double phi_trial = phi;
        for (int halvings = 0; halvings <= max_halvings; ++halvings) {
            for (std::size_t p = 0; p < trial.size(); ++p) trial[p] = z[p] + step * dir[p];
            phi_trial = detail::objective_only(trial, ds, sqrt_d);
            if (phi_trial <= phi + armijo_c * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            log.status = "line_search_failed";
            break;
        }

        const double phi_new = detail::objective_and_gradient(trial, ds, sqrt_d, cache, grad_new);
        (void)phi_trial;

        ComplexField2D s_vec(z.width(), z.height()), y_vec(z.width(), z.height());
        for (std::size_t p = 0; p < z.size(); ++p) {
            s_vec[p] = trial[p] - z[p];
            y_vec[p] = grad_new[p] - grad[p];
        }
        const double ys = re_inner(y_vec, s_vec);
        if (ys > 0.0) {
            hist_s.push_back(std::move(s_vec));
            hist_y.push_back(std::move(y_vec));
            hist_rho.push_back(1.0 / ys);
            if (static_cast<int>(hist_s.size()) > cfg.lbfgs_history) {
                hist_s.pop_front();
                hist_y.pop_front();
                hist_rho.pop_front();
            }
        }

        z = trial;
        grad = grad_new;
        phi = phi_new;

        row = compute_metrics(z, ds);
        row.epoch = epoch;
        row.wall_ms = detail::ms_since(t0);
        log.rows.push_back(row);
        if (check_stop(row, cfg.tol)) {
            log.status = "converged";
            break;
        }
    }
    return RunResult{std::move(z), std::move(log)};
}

// Dispatch on the configured algorithm.
inline RunResult run_solver(const ComplexField2D &z0, const Dataset &ds, const SolverConfig &cfg) {
    switch (cfg.algorithm) {
        case Algorithm::rpie:
        case Algorithm::magpie: return magpie_run(z0, ds, cfg);
        case Algorithm::exact_surrogate: return exact_surrogate_run(z0, ds, cfg);
        case Algorithm::lbfgs: return lbfgs_run(z0, ds, cfg);
    }
    throw std::invalid_argument("run_solver: unknown algorithm");
}

} // namespace magpie
