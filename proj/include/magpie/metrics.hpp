#pragma once

// Per-epoch quality metrics and the stopping rule.
//
//   residual        total misfit over all regions
//   error           l2 distance between reconstructed and true magnitudes
//                   (phase-blind: the data cannot pin a global phase); NaN
//                   when the dataset carries no ground truth
//   grad_criterion  mean region gradient norm, (1/(N m)) sum_k ||grad_k||_2;
//                   note the normalization is N*m, not N*m^2, so tolerance
//                   values do not transfer directly across window sizes

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "magpie/fft.hpp"
#include "magpie/field.hpp"
#include "magpie/simulate.hpp"

namespace magpie {

struct MetricRow {
    int epoch = 0;
    double residual = 0.0;
    double error = 0.0;
    double grad_criterion = 0.0;
    double wall_ms = 0.0;
};

inline MetricRow compute_metrics(const ComplexField2D &z, const Dataset &ds) {
    const int m = ds.plan.m;
    const int n = ds.plan.n;
    if (z.width() != n || z.height() != n)
        throw std::invalid_argument("compute_metrics: estimate does not match object grid");
    if (ds.measurements.size() != ds.plan.regions.size())
        throw std::invalid_argument("compute_metrics: measurement count mismatch");

    double residual = 0.0;
    double grad_sum = 0.0;
    ComplexField2D exit_wave(m, m), spectrum(m, m);
    for (const RegionIndex &r : ds.plan.regions) {
        const RealField2D &d = ds.measurements[static_cast<std::size_t>(r.k)];
        for (int i = 0; i < m; ++i) {
            const cplx *src = &z.at(r.offset_row + i, r.offset_col);
            for (int j = 0; j < m; ++j)
                exit_wave.at(i, j) = cmul(ds.probe.at(i, j), src[j]);
        }
        spectrum = exit_wave;
        dft2_inplace(spectrum);
        // revised exit wave with a fresh phase convention (factor 1 at zero
        // coefficients); the metric values do not depend on that choice
        for (std::size_t i = 0; i < spectrum.size(); ++i) {
            const double a2 = abs2(spectrum[i]);
            const cplx phase = a2 > 0.0 ? spectrum[i] * (1.0 / std::sqrt(a2)) : cplx(1.0, 0.0);
            spectrum[i] = std::sqrt(d[i]) * phase;
        }
        idft2_inplace(spectrum);

        double phi2 = 0.0, g2 = 0.0;
        for (std::size_t i = 0; i < spectrum.size(); ++i) {
            const cplx e = exit_wave[i] - spectrum[i];
            const double ae = abs2(e);
            phi2 += ae;
            g2 += abs2(ds.probe[i]) * ae; // |conj(Q) e|^2 = |Q|^2 |e|^2
        }
        residual += 0.5 * phi2;
        grad_sum += std::sqrt(g2);
    }

    MetricRow row;
    row.residual = residual;
    row.grad_criterion = grad_sum / (static_cast<double>(ds.plan.regions.size()) * m);
    if (ds.ground_truth.has_value()) {
        const ComplexField2D &truth = *ds.ground_truth;
        if (truth.width() != n || truth.height() != n)
            throw std::invalid_argument("compute_metrics: ground truth does not match object grid");
        double e2 = 0.0;
        for (std::size_t i = 0; i < z.size(); ++i) {
            const double dmag = std::abs(z[i]) - std::abs(truth[i]);
            e2 += dmag * dmag;
        }
        row.error = std::sqrt(e2);
    } else {
        row.error = std::numeric_limits<double>::quiet_NaN();
    }
    return row;
}

// Stopping rule: strictly below tolerance.
inline bool check_stop(const MetricRow &row, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("check_stop: tol must be positive");
    return row.grad_criterion < tol;
}

} // namespace magpie
