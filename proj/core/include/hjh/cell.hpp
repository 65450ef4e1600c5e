#pragma once

#include <optional>

#include "hjh/geometry.hpp"
#include "hjh/model.hpp"

namespace hjh {

/** Options for the discounted corrector solver. */
struct CellOptions {
    double h = 0.25;
    double window_radius = 0.0;  // 0: auto = clamp(win_mult * max(Kp,1) / delta, ...)
    double win_mult = 4.0;
    double win_min = 8.0;
    double win_cap = 400.0;
    double tol_scale = 1e-8;  // residual target is tol_scale * (1 + |H| scale)
    int max_sweeps = 100000;
    int cascade_levels = 3;  // coarse-to-fine initialization levels
    bool periodic = false;   // solve on one period cell with wraparound
};

/** Maximizer found by the radial-comparison defect scan. */
struct PipWitness {
    Vec q;
    int sigma = 1;
    Vec y;
};

/**
 * Solution of delta v + H(p + Dv, y, omega) = 0 on a truncated window.
 * Values near the boundary are polluted by the barrier condition; interior
 * reporting starts at half the window (interior_radius).
 */
struct CellSolution {
    GridFunction values;        // v
    Vec p;
    double delta = 0.0;
    double residual = 0.0;      // max interior |delta v + H_num(p + Dv, y)|
    Box window;
    double Kp = 0.0;            // Lipschitz bound for Dv from coercivity
    double Pip = 0.0;           // radial comparison defect sup
    double interior_radius = 0.0;
    int sweeps = 0;

    double delta_v(const Vec& y) const { return delta * values.interp(y); }
    const GridSpec& grid() const { return values.grid(); }
    bool interior(const Vec& y) const {
        return std::abs(y.x) <= interior_radius && std::abs(y.y) <= interior_radius;
    }
};

/**
 * Gradient bound K_p: the largest |p - q| for which the q-levels of H can
 * dip below the p-levels, computed in closed form for the shipped kinds.
 * `v_sup` is the relevant sup of the potential (per-realization where a
 * bound is needed; model.v_max() for the family-level constant).
 */
double compute_Kp(const HamiltonianModel& model, double v_sup, const Vec& p);

/** As above with v_sup = the model's measured family constant. */
double compute_Kp(const HamiltonianModel& model, const RandomField& field, const Vec& p);

/**
 * Pi_p: max over sigma = +-1, |q| <= K_p and probe points y of
 * |H(p+q,y) - H(p+(1+sigma)q,y)|. Grid search over the q-ball crossed with
 * y probes; the witness reports the maximizing (q, sigma, y).
 */
double compute_Pip(const HamiltonianModel& model, const RandomField& field, const Vec& p,
                   int n_probes, PipWitness* witness = nullptr);

/** Monotone Lax-Friedrichs sweeping for the discounted corrector equation. */
CellSolution solve_cell(const RandomField& field, const HamiltonianModel& model, const Vec& p,
                        double delta, const CellOptions& opts = {});

/**
 * Max over interior nodes of |delta v^delta - eta v^eta| from two solves on
 * the delta-sized window. Contract: <= Pi_p (1 - delta/eta) + two solver
 * tolerances. Requires 0 < delta <= eta.
 */
double delta_consistency(const RandomField& field, const HamiltonianModel& model, const Vec& p,
                         double delta, double eta, const CellOptions& opts = {});

/**
 * Relative drift of interior values when the window is doubled: the
 * truncation-independence diagnostic. Drift is normalized by
 * max(1, interior |delta v| scale).
 */
double window_doubling_drift(const RandomField& field, const HamiltonianModel& model, const Vec& p,
                             double delta, const CellOptions& opts = {});

}  // namespace hjh
