#pragma once

#include <memory>
#include <vector>

#include "hjh/geometry.hpp"
#include "hjh/model.hpp"

namespace hjh {

/**
 * Solution of the metric problem |Dm| = f_mu(y) with m = 0 on the source:
 * the least cost of travel from the source through the sampled medium.
 */
struct MetricSolution {
    GridFunction values;
    std::vector<Vec> source;  // snapped source nodes
    double mu = 0.0;
    double f_min = 0.0;  // min of the eikonal gradient bound over the grid
    double f_max = 0.0;  // max over the grid
    double h = 0.0;

    // provenance, so dependent checks can re-solve on the same instance
    HamiltonianModel model = HamiltonianModel::unchecked(ModelSpec{}, 0.0);
    RandomField field;

    double at(const Vec& y) const { return values.interp(y); }
    const GridSpec& grid() const { return values.grid(); }
};

/** Sublevel set {m <= t}: the region reachable from the source by time t. */
struct ReachableSet {
    std::vector<std::uint8_t> mask;  // row-major over the solution grid
    GridSpec grid;
    double t = 0.0;
    double mu = 0.0;

    bool at(int i, int j) const { return mask[grid.index(i, j)] != 0; }
    std::size_t count() const;
};

/**
 * First-order upwind fast marching for the metric problem. Causal: each
 * accepted value depends only on smaller accepted values. Sources off the
 * grid are snapped to the nearest node. For a set source the result is the
 * pointwise minimum of the single-source solutions.
 */
MetricSolution solve_metric(const RandomField& field, const HamiltonianModel& model, double mu,
                            const std::vector<Vec>& source, const GridSpec& grid);

/**
 * Lattice shortest-path distance with edge weight = edge length x mean of
 * f_mu at the endpoints; an independent oracle for solve_metric. It
 * overestimates the continuum metric by at most the lattice metrication
 * factor plus O(h).
 */
GridFunction dijkstra_oracle(const RandomField& field, const HamiltonianModel& model, double mu,
                             const std::vector<Vec>& source, const GridSpec& grid,
                             int neighborhood);

/** Max over directions of lattice-norm / Euclidean for the 8- or 16-stencil. */
double lattice_metrication_constant(int neighborhood);

ReachableSet reachable_set(const MetricSolution& sol, double t);

/**
 * Re-solves after perturbing the medium outside {m <= t} dilated by
 * 1 + h and reports whether values on {m <= t} are unchanged. The
 * perturbation bumps are drawn from seed_perturb; candidates that would
 * overlap the dilated set are rejected, and if none can be placed the
 * precondition is violated.
 */
bool locality_check(const RandomField& field, const HamiltonianModel& model, double mu, double t,
                    std::uint64_t seed_perturb, const GridSpec& grid, int n_bumps = 6,
                    double bump_height = 1.0, double bump_radius = 0.35);

/**
 * Dynamic-programming residual across a separating shell of nodes:
 * |m(y,x) - min_z (m(y,z) + m(z,x))|. Requires an exact symmetric model
 * (all shipped kinds are even in p). Contract: residual <= C h.
 */
double dpp_check(const MetricSolution& sol, const std::vector<Vec>& shell, const Vec& y);

/** Nodes of the grid at distance in [r - h/2, r + h/2) from center. */
std::vector<Vec> circular_shell(const GridSpec& grid, const Vec& center, double r);

}  // namespace hjh
