#pragma once

// Property verification suite: every analytic guarantee the solver stack
// rests on, executed as a randomized numerical check, plus the full-scale
// behavioral checks (level speedup, noise robustness, determinism). The
// suite backs both the `verify` CLI subcommand and the acceptance test
// binary, which runs it at full scale and fails on any red check.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "magpie/experiment.hpp"
#include "magpie/field.hpp"
#include "magpie/levels.hpp"
#include "magpie/metrics.hpp"
#include "magpie/rng.hpp"
#include "magpie/simulate.hpp"
#include "magpie/solvers.hpp"
#include "magpie/surrogate.hpp"
#include "magpie/transfer.hpp"

namespace magpie {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct VerifyOptions {
    // Epoch cap for the full-scale level sweep. Calibrated so the slowest
    // configuration (plain sweeps, no coarse levels) still reaches the
    // stopping tolerance with margin.
    int speedup_max_epochs = 1200;
    // Fixed epoch budget for the noise-robustness comparison.
    int noise_epoch_budget = 100;
    // The two checks above run full-size reconstructions and take minutes;
    // they can be skipped for a quick pass over the analytic properties.
    bool run_reconstructions = true;
    std::ostream *progress = nullptr; // optional liveness output
};

namespace verify_detail {

inline void note(const VerifyOptions &opt, const std::string &msg) {
    if (opt.progress) *opt.progress << "  " << msg << std::endl;
}

inline std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline ComplexField2D random_cfield(Rng &rng, int m) {
    ComplexField2D f(m, m);
    for (std::size_t i = 0; i < f.size(); ++i)
        f[i] = cplx(2.0 * rng.uniform01() - 1.0, 2.0 * rng.uniform01() - 1.0);
    return f;
}

// Random probe with the kinds of zero structure a real aperture produces:
// mode 0 dense, mode 1 scattered zero pixels, mode 2 entire aligned 2x2 bins
// zeroed (the coarse-grid corner case).
inline ComplexField2D random_probe(Rng &rng, int m, int mode) {
    ComplexField2D q = random_cfield(rng, m);
    if (mode == 1) {
        for (std::size_t i = 0; i < q.size(); ++i)
            if (rng.uniform01() < 0.2) q[i] = cplx(0.0, 0.0);
    } else if (mode == 2) {
        const int bins = m / 2;
        const int count = 1 + static_cast<int>(rng.bounded(static_cast<std::uint64_t>(bins)));
        for (int t = 0; t < count; ++t) {
            const int bi = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(bins)));
            const int bj = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(bins)));
            q.at(2 * bi, 2 * bj) = q.at(2 * bi, 2 * bj + 1) = q.at(2 * bi + 1, 2 * bj) =
                q.at(2 * bi + 1, 2 * bj + 1) = cplx(0.0, 0.0);
        }
    }
    return q;
}

// Physically realizable intensities for a random window state.
inline RealField2D random_intensity(Rng &rng, const ComplexField2D &Q) {
    const ComplexField2D zdata = random_cfield(rng, Q.width());
    ComplexField2D w = hadamard(Q, zdata);
    dft2_inplace(w);
    return abs2_field(w);
}

inline ComplexField2D fresh_rew(const ComplexField2D &z, const ComplexField2D &Q,
                                const RealField2D &d) {
    PhaseCache cache(1, z.width());
    ComplexField2D out;
    revised_exit_wave_into(out, z, Q, sqrt_field(d), cache, 0);
    return out;
}

inline std::string read_file_bytes(const std::string &path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open: " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

// Small noiseless reference problem shared by the monotonicity and rate checks.
inline Dataset reference_problem(int n, int m, double eta, std::uint64_t seed) {
    const ComplexField2D obj = make_synthetic_object(n, ObjectKind::texture, mix_seed(seed, 0x0b7ec7));
    const ComplexField2D probe =
        make_zone_plate_probe(m, default_aperture_fraction, default_phase_coeff);
    return make_dataset(obj, probe, scan_positions(n, m, 0.5), eta, seed);
}

} // namespace verify_detail

// -- 1 ---------------------------------------------------------------------

inline CheckResult check_surrogate_majorization() {
    using namespace verify_detail;
    Rng rng(101);
    const int sizes[3] = {4, 8, 16};
    double worst_gap = 0.0, worst_agree = 0.0, worst_grad = 0.0;
    for (int t = 0; t < 200; ++t) {
        const int m = sizes[t % 3];
        const ComplexField2D Q = random_probe(rng, m, t % 3);
        const RealField2D d = random_intensity(rng, Q);
        const ComplexField2D anchor = random_cfield(rng, m);
        const ComplexField2D z = random_cfield(rng, m);

        const double phi = region_objective(z, Q, d);
        const double sur = surrogate_objective(z, anchor, Q, d);
        worst_gap = std::max(worst_gap, (phi - sur) / (1.0 + sur));

        const double phi_anchor = region_objective(anchor, Q, d);
        const double sur_anchor = surrogate_objective(anchor, anchor, Q, d);
        worst_agree = std::max(worst_agree,
                               std::abs(sur_anchor - phi_anchor) / (1.0 + std::abs(phi_anchor)));

        const ComplexField2D rew = fresh_rew(anchor, Q, d);
        const ComplexField2D g_sur = surrogate_gradient(anchor, anchor, Q, d);
        const ComplexField2D g_obj = region_gradient(anchor, Q, rew);
        double gd = 0.0, gs = 1.0;
        for (std::size_t i = 0; i < g_sur.size(); ++i) {
            gd = std::max(gd, std::abs(g_sur[i] - g_obj[i]));
            gs = std::max(gs, std::abs(g_obj[i]));
        }
        worst_grad = std::max(worst_grad, gd / gs);
    }
    CheckResult r;
    r.name = "surrogate majorization (dominance + anchor agreement)";
    r.pass = worst_gap <= 1e-9 && worst_agree <= 1e-12 && worst_grad <= 1e-12;
    r.detail = "200 instances; worst dominance gap " + fmt(worst_gap) + ", anchor value dev " +
               fmt(worst_agree) + ", anchor gradient dev " + fmt(worst_grad);
    return r;
}

// -- 2 ---------------------------------------------------------------------

inline CheckResult check_gradient_finite_differences() {
    using namespace verify_detail;
    Rng rng(202);
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
        const int m = t % 2 == 0 ? 4 : 8;
        const ComplexField2D Q = random_probe(rng, m, t % 3);
        const RealField2D d = random_intensity(rng, Q);
        ComplexField2D z = random_cfield(rng, m);

        const ComplexField2D rew = fresh_rew(z, Q, d);
        const ComplexField2D g = region_gradient(z, Q, rew);

        // central differences on the real embedding; the complex gradient
        // packs d/dx + i d/dy
        const double h = 1e-6;
        ComplexField2D g_fd(m, m);
        for (std::size_t i = 0; i < z.size(); ++i) {
            const cplx save = z[i];
            z[i] = save + h;
            const double fxp = region_objective(z, Q, d);
            z[i] = save - h;
            const double fxm = region_objective(z, Q, d);
            z[i] = save + cplx(0.0, h);
            const double fyp = region_objective(z, Q, d);
            z[i] = save - cplx(0.0, h);
            const double fym = region_objective(z, Q, d);
            z[i] = save;
            g_fd[i] = cplx((fxp - fxm) / (2.0 * h), (fyp - fym) / (2.0 * h));
        }
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < z.size(); ++i) {
            num += abs2(g_fd[i] - g[i]);
            den += abs2(g[i]);
        }
        worst = std::max(worst, std::sqrt(num / std::max(den, 1e-300)));
    }
    CheckResult r;
    r.name = "complex gradient vs central finite differences";
    r.pass = worst < 1e-5;
    r.detail = "50 instances; worst relative deviation " + fmt(worst);
    return r;
}

// -- 3 ---------------------------------------------------------------------

inline CheckResult check_weight_bounds() {
    using namespace verify_detail;
    Rng rng(303);
    const int sizes[3] = {4, 8, 16};
    double worst = 0.0;
    bool structural_ok = true;
    for (int t = 0; t < 1000; ++t) {
        const int m = sizes[t % 3];
        const ComplexField2D Q = random_probe(rng, m, t % 3);
        const double alpha = 0.005 + rng.uniform01();
        if (norm2_sq(Q) == 0.0) continue;
        const LevelStack stack = build_level_stack(Q, make_rpie_regularizer(Q, alpha), 2);
        const LevelData &L = stack.level(0);

        for (std::size_t i = 0; i < L.w_obj.size(); ++i) {
            worst = std::max(worst, -L.w_obj[i]);
            worst = std::max(worst, L.w_obj[i] - 4.0);
            worst = std::max(worst, std::abs(L.w_rew[i]) - 4.0);
        }
        for (std::size_t i = 0; i < L.w_reg.size(); ++i) {
            worst = std::max(worst, -L.w_reg[i]);
            worst = std::max(worst, L.w_reg[i] - 1.0);
        }
        const RealField2D bin_mean = restrict_field(L.w_obj);
        const RealField2D bin_energy = restrict_field(abs2_field(Q));
        for (std::size_t i = 0; i < bin_mean.size(); ++i) {
            if (L.illuminated[i]) {
                worst = std::max(worst, std::abs(bin_mean[i] - 1.0));
            } else {
                // dead bins: everything must be identically zero
                if (bin_mean[i] != 0.0 || L.w_reg[i] != 0.0 || stack.level(1).reg[i] != 0.0)
                    structural_ok = false;
            }
            if ((bin_energy[i] > 0.0) != (L.illuminated[i] != 0)) structural_ok = false;
        }
    }
    CheckResult r;
    r.name = "coarse weight bounds and illumination mask";
    r.pass = worst <= 1e-12 && structural_ok;
    r.detail = "1000 probes (dense / scattered zeros / dead bins); worst bound violation " +
               fmt(worst) + (structural_ok ? "" : "; dead-bin structure violated");
    return r;
}

// -- 4 ---------------------------------------------------------------------

inline CheckResult check_consistency_inequalities() {
    using namespace verify_detail;
    Rng rng(404);
    const int sizes[3] = {4, 8, 16};
    double worst1 = 0.0, worst2 = 0.0;
    for (int t = 0; t < 200; ++t) {
        const int m = sizes[t % 3];
        const ComplexField2D Q = random_probe(rng, m, t % 3);
        if (norm2_sq(Q) == 0.0) continue;
        const double alpha = 0.005 + rng.uniform01();
        const LevelStack stack = build_level_stack(Q, make_rpie_regularizer(Q, alpha), 2);
        const LevelData &L = stack.level(0);
        const ComplexField2D &Qh = stack.level(1).probe;

        const ComplexField2D z = random_cfield(rng, m);
        const ComplexField2D rew = random_cfield(rng, m); // any anchor surrogate target
        const ComplexField2D zh = downsample_object(z, L.w_obj);
        const ComplexField2D rh = downsample_rew(rew, L.w_rew);

        const double fine = surrogate_objective(z, rew, Q);
        const double coarse = surrogate_objective(zh, rh, Qh);
        const double wr_inf = norm_inf(L.w_rew);
        worst1 = std::max(worst1, (coarse - 0.25 * wr_inf * wr_inf * fine) / (1.0 + fine));

        const double gfine = norm2(region_gradient(z, Q, rew));
        const double gcoarse = norm2(region_gradient(zh, Qh, rh));
        const double wu_inf = norm_inf(L.w_reg);
        worst2 = std::max(worst2, (gcoarse - 0.5 * wu_inf * gfine) / (1.0 + gfine));
    }
    CheckResult r;
    r.name = "coarse objective/gradient consistency inequalities";
    r.pass = worst1 <= 1e-9 && worst2 <= 1e-9;
    r.detail = "200 instances; worst objective slack " + fmt(worst1) + ", worst gradient slack " +
               fmt(worst2);
    return r;
}

// -- 5 ---------------------------------------------------------------------

inline CheckResult check_coarse_descent_closed_form() {
    using namespace verify_detail;
    Rng rng(505);
    const int sizes[3] = {4, 8, 16};
    double worst_form = 0.0, worst_descent = 0.0;
    for (int t = 0; t < 200; ++t) {
        const int m = sizes[t % 3];
        const ComplexField2D Q = random_probe(rng, m, t % 3);
        if (norm2_sq(Q) == 0.0) continue;
        const double alpha = 0.005 + rng.uniform01();
        const LevelStack stack = build_level_stack(Q, make_rpie_regularizer(Q, alpha), 2);
        const LevelData &L = stack.level(0);
        const LevelData &C = stack.level(1);

        const ComplexField2D z = random_cfield(rng, m);
        const ComplexField2D rew = random_cfield(rng, m);
        const ComplexField2D zh = downsample_object(z, L.w_obj);
        const ComplexField2D rh = downsample_rew(rew, L.w_rew);

        // one coarse proximal step, as the recursion takes it
        ComplexField2D zh_new = magps_update(zh, 1, stack, rh);
        ComplexField2D step(zh.width(), zh.height());
        for (std::size_t i = 0; i < step.size(); ++i) step[i] = zh_new[i] - zh[i];

        // closed form: -(weighted, damped) bin average of the fine gradient
        const ComplexField2D gfine = region_gradient(z, Q, rew);
        const ComplexField2D gbin = restrict_field(gfine);
        ComplexField2D closed(zh.width(), zh.height());
        double scale = 0.0;
        for (std::size_t i = 0; i < closed.size(); ++i) {
            const double den = C.reg[i] + abs2(C.probe[i]);
            closed[i] = den > 0.0 ? cplx(-(L.w_reg[i] / den)) * gbin[i] : cplx(0.0, 0.0);
            scale = std::max(scale, std::abs(closed[i]));
        }
        double dev = 0.0;
        for (std::size_t i = 0; i < closed.size(); ++i)
            dev = std::max(dev, std::abs(step[i] - closed[i]));
        worst_form = std::max(worst_form, dev / std::max(1.0, scale));

        const ComplexField2D lifted = prolong_field(step);
        const double ip = re_inner(gfine, lifted);
        const double ip_scale = std::max(1.0, norm2(gfine) * norm2(lifted));
        worst_descent = std::max(worst_descent, ip / ip_scale);
    }
    CheckResult r;
    r.name = "coarse correction closed form and descent sign";
    r.pass = worst_form <= 1e-10 && worst_descent <= 1e-12;
    r.detail = "200 instances; worst closed-form deviation " + fmt(worst_form) +
               ", worst scaled inner product " + fmt(worst_descent);
    return r;
}

// -- 6 ---------------------------------------------------------------------

// Entrywise transfer identity for the reciprocal damping kernel, exactly as
// published: the bin average of 1/(u+|Q|^2) against the weighted coarse
// kernel. NOTE: the two sides agree only when u+|Q|^2 is constant on each
// 2x2 bin; for a varying probe the arithmetic-harmonic mean gap separates
// them, so this check measures how far the stated equality actually holds.
// The identity that does hold, 1/restrict(u+|Q|^2) = W_u/(u_H+|Q_H|^2), is
// covered by the unit tests.
inline CheckResult check_regularizer_reciprocal_transfer() {
    using namespace verify_detail;
    Rng rng(606);
    const int sizes[3] = {4, 8, 16};
    double worst = 0.0;
    int failing = 0;
    for (int t = 0; t < 200; ++t) {
        const int m = sizes[t % 3];
        const ComplexField2D Q = random_probe(rng, m, t % 3);
        if (norm2_sq(Q) == 0.0) continue;
        const double alpha = 0.005 + rng.uniform01();
        const RealField2D u = make_rpie_regularizer(Q, alpha);
        const LevelStack stack = build_level_stack(Q, u, 2);
        const LevelData &L = stack.level(0);
        const LevelData &C = stack.level(1);

        RealField2D recip(m, m);
        for (std::size_t i = 0; i < recip.size(); ++i) {
            const double den = u[i] + abs2(Q[i]);
            if (den <= 0.0) { recip[i] = 0.0; continue; }
            recip[i] = 1.0 / den;
        }
        const RealField2D lhs = restrict_field(recip);

        double dev = 0.0;
        for (std::size_t i = 0; i < lhs.size(); ++i) {
            if (!L.illuminated[i]) continue;
            const double den = C.reg[i] + abs2(C.probe[i]);
            const double rhs = den > 0.0 ? L.w_reg[i] / den : 0.0;
            dev = std::max(dev, std::abs(lhs[i] - rhs) / std::max(1.0, std::abs(rhs)));
        }
        worst = std::max(worst, dev);
        if (dev > 1e-12) ++failing;
    }
    CheckResult r;
    r.name = "regularizer reciprocal transfer identity (as published)";
    r.pass = worst <= 1e-12;
    r.detail = "200 instances; worst relative deviation " + fmt(worst) + " (" +
               std::to_string(failing) +
               " instances above 1e-12; equality requires bin-constant u+|Q|^2)";
    return r;
}

// -- 7 / 8 -------------------------------------------------------------------

inline CheckResult check_monotone_exact_surrogate() {
    using namespace verify_detail;
    const Dataset ds = reference_problem(32, 8, 0.0, 707);
    SolverConfig cfg;
    cfg.algorithm = Algorithm::exact_surrogate;
    cfg.max_epochs = 50;
    cfg.tol = 1e-300; // run the full budget
    const RunResult res = exact_surrogate_run(ComplexField2D(32, 32, cplx(1.0, 0.0)), ds, cfg);

    double worst = 0.0;
    for (std::size_t j = 1; j < res.log.rows.size(); ++j) {
        const double prev = res.log.rows[j - 1].residual;
        const double cur = res.log.rows[j].residual;
        worst = std::max(worst, (cur - prev) / (1.0 + prev));
    }
    CheckResult r;
    r.name = "monotone misfit under exact surrogate minimization";
    r.pass = res.log.rows.size() == 51 && worst <= 1e-12;
    r.detail = "50 noiseless steps; worst relative increase " + fmt(worst);
    return r;
}

inline CheckResult check_sublinear_rate() {
    using namespace verify_detail;
    const Dataset ds = reference_problem(32, 8, 0.0, 707);
    const int steps = 50;

    std::vector<RealField2D> sqrt_d;
    for (const RealField2D &d : ds.measurements) sqrt_d.push_back(sqrt_field(d));
    PhaseCache grad_cache(static_cast<int>(ds.plan.regions.size()), ds.plan.m);

    ComplexField2D z(32, 32, cplx(1.0, 0.0));
    ComplexField2D grad;
    std::vector<double> grad_sq;
    const double phi0 =
        magpie::detail::objective_and_gradient(z, ds, sqrt_d, grad_cache, grad);
    grad_sq.push_back(norm2_sq(grad));

    for (int j = 0; j < steps; ++j) {
        z = exact_surrogate_step(z, ds);
        magpie::detail::objective_and_gradient(z, ds, sqrt_d, grad_cache, grad);
        grad_sq.push_back(norm2_sq(grad));
    }

    const double lipschitz = norm_inf(accumulate_probe_energy(ds.plan, ds.probe));
    double worst = 0.0;
    double best_so_far = grad_sq[0];
    for (int t = 0; t <= steps; ++t) {
        best_so_far = std::min(best_so_far, grad_sq[static_cast<std::size_t>(t)]);
        const double bound = lipschitz * phi0 / (2.0 * (t + 1));
        worst = std::max(worst, (best_so_far - bound) / std::max(1.0, bound));
    }
    CheckResult r;
    r.name = "sublinear decay of the best gradient norm";
    r.pass = worst <= 1e-12;
    r.detail = "every prefix of 50 steps; worst bound violation " + fmt(worst);
    return r;
}

// -- 9 ---------------------------------------------------------------------

inline CheckResult check_transfer_identities() {
    using namespace verify_detail;
    Rng rng(909);
    const int sizes[5] = {2, 4, 8, 16, 32};
    double worst = 0.0;
    for (int t = 0; t < 500; ++t) {
        const int mc = sizes[t % 5];
        const int mf = 2 * mc;

        const ComplexField2D b = random_cfield(rng, mc);
        const ComplexField2D a = random_cfield(rng, mf);

        // round trip: bin averages of replicated values give the values back
        const ComplexField2D rt = restrict_field(prolong_field(b));
        for (std::size_t i = 0; i < b.size(); ++i)
            worst = std::max(worst, std::abs(rt[i] - b[i]));

        // commutation: coarse weights slide through the bin average
        const ComplexField2D lhs = hadamard(b, restrict_field(a));
        const ComplexField2D rhs = restrict_field(hadamard(prolong_field(b), a));
        for (std::size_t i = 0; i < lhs.size(); ++i)
            worst = std::max(worst, std::abs(lhs[i] - rhs[i]) / std::max(1.0, std::abs(lhs[i])));

        // norm bounds (2-norm contraction/expansion and max-norm behavior)
        const double na = norm2(a);
        worst = std::max(worst, (norm2(restrict_field(a)) - 0.5 * na) / std::max(1.0, na));
        const double nb = norm2(b);
        worst = std::max(worst, std::abs(norm2(prolong_field(b)) - 2.0 * nb) / std::max(1.0, nb));
        worst = std::max(worst, norm_inf(restrict_field(a)) - norm_inf(a));
        worst = std::max(worst, std::abs(norm_inf(prolong_field(b)) - norm_inf(b)));

        // equality witness for the contraction bound at the all-ones field
        const ComplexField2D ones(mf, mf, cplx(1.0, 0.0));
        worst = std::max(worst,
                         std::abs(norm2(restrict_field(ones)) - 0.5 * norm2(ones)) /
                             std::max(1.0, norm2(ones)));
    }
    CheckResult r;
    r.name = "transfer operator identities and norm bounds";
    r.pass = worst <= 1e-13;
    r.detail = "500 fields; worst deviation " + fmt(worst);
    return r;
}

// -- 10 ---------------------------------------------------------------------

// Epochs until the stopping rule fired; budget+1 when it never did, so an
// unconverged run always counts as strictly slower than any converged one.
inline int epochs_to_tol(const RunLog &log, int budget) {
    if (log.status == "converged") return log.rows.back().epoch;
    return budget + 1;
}

inline CheckResult check_level_speedup(const VerifyOptions &opt) {
    using namespace verify_detail;
    const int n = 512, m = 128;
    const std::uint64_t seed = 42;
    note(opt, "building 512x512 dataset (eta 0.05, overlap 0.5)");
    const Dataset ds = reference_problem(n, m, 0.05, seed);
    const ComplexField2D z0(n, n, cplx(1.0, 0.0));

    SolverConfig base;
    base.alpha = 0.01;
    base.tol = 1e-4;
    base.max_epochs = opt.speedup_max_epochs;
    base.seed = mix_seed(seed, 77);

    std::ostringstream detail;
    bool ok = true;
    const auto fmt_epochs = [&](int e) {
        return e > opt.speedup_max_epochs ? ">" + std::to_string(opt.speedup_max_epochs)
                                          : std::to_string(e);
    };

    base.algorithm = Algorithm::rpie;
    base.levels = 1;
    note(opt, "running plain sweeps (rpie)");
    const RunResult rpie = magpie_run(z0, ds, base);
    const int rpie_epochs = epochs_to_tol(rpie.log, base.max_epochs);
    const double rpie_error = rpie.log.rows.back().error;
    detail << "rpie " << fmt_epochs(rpie_epochs) << " epochs (err " << fmt(rpie_error) << ")";

    base.algorithm = Algorithm::magpie;
    int prev = 0;
    int last_epochs = 0;
    double last_error = 0.0;
    for (int levels = 1; levels <= 7; ++levels) {
        base.levels = levels;
        note(opt, "running multilevel sweeps, depth " + std::to_string(levels));
        const RunResult res = magpie_run(z0, ds, base);
        last_epochs = epochs_to_tol(res.log, base.max_epochs);
        last_error = res.log.rows.back().error;
        detail << "; L" << levels << " " << fmt_epochs(last_epochs) << " (err "
               << fmt(last_error) << ")";
        if (levels > 1 && last_epochs > prev + 1) {
            ok = false;
            detail << "(!)";
        }
        prev = last_epochs;
    }
    if (!(last_epochs < rpie_epochs)) {
        ok = false;
        detail << "; depth-7 not faster than rpie(!)";
    }
    if (!(last_error <= rpie_error)) {
        ok = false;
        detail << "; depth-7 error above rpie(!)";
    }

    CheckResult r;
    r.name = "level sweep speedup at full scale";
    r.pass = ok;
    r.detail = detail.str();
    return r;
}

// -- 11 ---------------------------------------------------------------------

inline CheckResult check_noise_robustness(const VerifyOptions &opt) {
    using namespace verify_detail;
    const int n = 512, m = 128;
    std::ostringstream detail;
    bool ok = true;
    for (const double eta : {0.05, 0.4}) {
        int wins = 0;
        for (const std::uint64_t seed : {11ull, 12ull, 13ull}) {
            note(opt, "noise trend: eta " + fmt(eta) + ", seed " + std::to_string(seed));
            const Dataset ds = reference_problem(n, m, eta, seed);
            const ComplexField2D z0(n, n, cplx(1.0, 0.0));
            SolverConfig cfg;
            cfg.alpha = 0.025;
            cfg.tol = 1e-300; // equal epoch budget, no early stop
            cfg.max_epochs = opt.noise_epoch_budget;
            cfg.seed = mix_seed(seed, 7001);

            cfg.algorithm = Algorithm::rpie;
            cfg.levels = 1;
            const double err_rpie = magpie_run(z0, ds, cfg).log.rows.back().error;
            cfg.algorithm = Algorithm::magpie;
            cfg.levels = 7;
            const double err_magpie = magpie_run(z0, ds, cfg).log.rows.back().error;
            if (err_magpie <= err_rpie) ++wins;
            detail << "eta " << fmt(eta) << " seed " << seed << ": " << fmt(err_magpie) << " vs "
                   << fmt(err_rpie) << "; ";
        }
        detail << "-> " << wins << "/3 wins at eta " << fmt(eta) << ". ";
        if (wins < 2) ok = false;
    }
    CheckResult r;
    r.name = "noise robustness trend (multilevel vs plain, equal budget)";
    r.pass = ok;
    r.detail = detail.str();
    return r;
}

// -- 12 ---------------------------------------------------------------------

inline CheckResult check_deterministic_reruns() {
    using namespace verify_detail;
    namespace fs = std::filesystem;
    const fs::path root = fs::temp_directory_path() / "magpie_verify_determinism";
    fs::remove_all(root);

    ExperimentConfig cfg;
    cfg.n = 64;
    cfg.m = 16;
    cfg.overlap = 0.5;
    cfg.eta = 0.05;
    cfg.seed = 5;
    SolverConfig s;
    s.seed = 5;
    s.tol = 1e-9;
    s.max_epochs = 4;
    s.alpha = 0.02;
    s.algorithm = Algorithm::rpie;
    cfg.solvers.emplace_back("rpie", s);
    s.algorithm = Algorithm::magpie;
    s.levels = 3;
    cfg.solvers.emplace_back("magpie3", s);
    s.algorithm = Algorithm::exact_surrogate;
    s.levels = 1;
    s.max_epochs = 3;
    cfg.solvers.emplace_back("exact", s);
    s.algorithm = Algorithm::lbfgs;
    cfg.solvers.emplace_back("lbfgs", s);

    bool ok = true;
    std::string mismatch;
    try {
        cfg.out_dir = (root / "run1").string();
        run_experiment(cfg);
        cfg.out_dir = (root / "run2").string();
        run_experiment(cfg);
        for (const auto &[name, unused] : cfg.solvers) {
            (void)unused;
            const std::string a = (root / "run1" / name / "log.csv").string();
            const std::string b = (root / "run2" / name / "log.csv").string();
            // all algorithmic columns must match byte for byte; wall_ms is
            // physical time and is excluded by construction
            if (csv_without_timing(a) != csv_without_timing(b)) {
                ok = false;
                mismatch += name + ":log.csv ";
            }
            if (read_file_bytes((root / "run1" / name / "recon.cf2d").string()) !=
                read_file_bytes((root / "run2" / name / "recon.cf2d").string())) {
                ok = false;
                mismatch += name + ":recon.cf2d ";
            }
        }
    } catch (const std::exception &ex) {
        ok = false;
        mismatch = ex.what();
    }
    fs::remove_all(root);

    CheckResult r;
    r.name = "deterministic reruns (logs and reconstructions)";
    r.pass = ok;
    r.detail = ok ? "4 solvers, identical logs (timing column excluded) and identical "
                    "reconstructions across two runs"
                  : "mismatch: " + mismatch;
    return r;
}

// ---- driver ---------------------------------------------------------------

inline std::vector<CheckResult> run_verification(const VerifyOptions &opt) {
    std::vector<CheckResult> out;
    const auto run = [&](CheckResult (*fn)()) { out.push_back(fn()); };
    run(&check_surrogate_majorization);
    run(&check_gradient_finite_differences);
    run(&check_weight_bounds);
    run(&check_consistency_inequalities);
    run(&check_coarse_descent_closed_form);
    run(&check_regularizer_reciprocal_transfer);
    run(&check_monotone_exact_surrogate);
    run(&check_sublinear_rate);
    run(&check_transfer_identities);
    if (opt.run_reconstructions) {
        out.push_back(check_level_speedup(opt));
        out.push_back(check_noise_robustness(opt));
    }
    out.push_back(check_deterministic_reruns());
    return out;
}

// Prints one line per check; returns the number of failures.
inline int report_verification(const std::vector<CheckResult> &results, std::ostream &os) {
    int failures = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const CheckResult &r = results[i];
        os << (r.pass ? "[PASS] " : "[FAIL] ") << "check " << i + 1 << ": " << r.name << " — "
           << r.detail << "\n";
        if (!r.pass) ++failures;
    }
    return failures;
}

} // namespace magpie
