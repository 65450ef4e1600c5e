#pragma once

#include <cstdint>
#include <vector>

#include "hjh/cell.hpp"
#include "hjh/hj.hpp"
#include "hjh/model.hpp"

namespace hjh {

/** Tabulated almost-periodicity moduli of a deterministic Hamiltonian. */
struct APModulus {
    double K = 0.0;  // p-ball radius the moduli were computed for
    std::vector<std::pair<double, double>> rho_table;  // (R, rho_K(R)), nonincreasing
    std::vector<std::pair<double, double>> eta_table;  // (delta, eta_K(delta)), nondecreasing
    std::vector<bool> eta_table_limited;               // crossing ran off the rho table
    double L = 0.0;  // gradient bound L(K) from the coercivity profile

    /** rho at R by monotone interpolation (constant beyond the table). */
    double rho(double R) const;
    /** eta at delta by interpolation of the eta table. */
    double eta(double delta) const;
};

struct APProbeBudget {
    int n_translations = 160;  // quasi-random outer sup over y
    double translation_range = 220.0;
    int n_shifts = 160;        // inner inf over z in B_R
    int n_base = 400;          // innermost sup over x
    double base_range = 40.0;
    int n_p = 8;               // p probes (collapses for kinetic kinds)
};

/**
 * Translation-compactness modulus rho_K(R): outer sup over sampled
 * translations y, inner inf over a z-grid in B_R, innermost sup over
 * (p, x) probes. Monotonicity in R is enforced by a running minimum.
 */
std::vector<std::pair<double, double>> compute_rho(const HamiltonianModel& model, double K,
                                                   const std::vector<double>& R_grid,
                                                   const APProbeBudget& budget = {});

/**
 * eta_K(delta) = 4 inf{ s > 0 : rho_K(s / (K delta)) <= s } by bisection on
 * the interpolated table; crossings beyond the table range are flagged.
 */
APModulus compute_eta(const std::vector<std::pair<double, double>>& rho_table, double K,
                      const std::vector<double>& delta_grid);

/** Gradient bound L(K) for the corrector, from the coercivity profile. */
double compute_LK(const HamiltonianModel& model, double K);

struct APOscillationCheck {
    double delta = 0.0;
    double osc = 0.0;       // oscillation of delta v^delta over the reported region
    double eta_bound = 0.0; // eta_L(delta)
    bool ok = false;
};

struct APRateReport {
    std::vector<APOscillationCheck> oscillation;   // per delta in the grid
    std::vector<double> eps_ladder;
    std::vector<double> errors;                    // deterministic E(eps)
    double envelope_C = 0.0;                       // anchored at the largest eps
    bool envelope_ok = false;                      // E <= C T (eps^{1/3} + eta_L(eps^{1/3}))
    bool all_ok = false;
};

struct APRateOptions {
    std::vector<double> osc_delta_grid = {0.2, 0.1, 0.05};
    CellOptions cell;
    HjOptions hj;
    double p_probe = 0.5;  // slope at which the corrector oscillation is checked
};

/**
 * Deterministic convergence-rate check for (almost) periodic media:
 * (a) osc of delta v^delta bounded by eta_L(delta); (b) homogenization
 * error dominated by C T (eps^{1/3} + eta_L(eps^{1/3})) with C anchored at
 * the largest eps. The effective table comes from the cell route.
 */
APRateReport ap_rate_check(const HamiltonianModel& model, const APModulus& modulus,
                           const HbarTable& hbar, const U0Spec& u0,
                           const std::vector<double>& eps_ladder, double T,
                           const APRateOptions& opts = {});

/** Effective-table construction for deterministic media via the cell route. */
HbarTable hbar_table_from_cell(const HamiltonianModel& model,
                               const std::vector<double>& delta_ladder, double r_max, int n_r,
                               const CellOptions& opts);

}  // namespace hjh
