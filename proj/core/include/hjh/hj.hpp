#pragma once

#include <cstdint>
#include <vector>

#include "hjh/geometry.hpp"
#include "hjh/model.hpp"
#include "hjh/stats.hpp"

namespace hjh {

enum class InitialData { quad, cone, plane };

/** Lipschitz initial datum from the catalogue. */
struct U0Spec {
    InitialData kind = InitialData::quad;
    double K = 1.0;  // Lipschitz bound; also the slope scale
    Vec p;           // slope for the plane datum

    double operator()(const Vec& x) const {
        switch (kind) {
            case InitialData::quad: {
                // |x|^2/2 clipped to the K-cone so the global Lipschitz bound is K
                double r = x.norm();
                return r <= K ? 0.5 * r * r : K * r - 0.5 * K * K;
            }
            case InitialData::cone:
                return K * x.norm();
            case InitialData::plane:
                return p.dot(x);
        }
        return 0.0;
    }
    double lipschitz() const { return kind == InitialData::plane ? p.norm() : K; }
};

/** Sampled radial profile of an effective Hamiltonian, linearly interpolated. */
struct HbarTable {
    std::vector<double> r;  // increasing, r[0] == 0
    std::vector<double> H;  // H(|p|)

    double value(double pr) const;
    double max_radius() const { return r.back(); }
    /** max |dH/dr| on the table: the information speed bound. */
    double max_slope() const;
    /** midpoint level-set quasiconvexity of the profile within tol. */
    bool level_set_convex(double tol) const;
};

struct SpaceTimeSolution {
    std::vector<double> times;
    std::vector<GridFunction> frames;
    double epsilon = 0.0;  // 0 for the homogenized problem
    double cfl = 0.0;
    double dt = 0.0;
    double lipschitz_bound = 0.0;     // the a-priori constant L
    std::vector<double> frame_lip;    // measured discrete Lipschitz constant per frame
    double sup_bound = 0.0;           // K + L T
    double report_radius = 0.0;       // boundary-cone exclusion applied

    const GridSpec& grid() const { return frames.front().grid(); }
    /** Value at (x, t) by bilinear space and linear time interpolation. */
    double at(const Vec& x, double t) const;
};

struct HjOptions {
    double h = 0.05;
    double cfl = 0.45;
    int n_frames = 8;
    double domain_pad = 1.0;
    std::size_t max_nodes = 26'000'000;
};

/**
 * Monotone Lax-Friedrichs time marching for u_t + H(Du, x/eps) = 0 on a
 * truncated box. Values are reported only inside the cone that boundary
 * influence (speed = the coercivity slope bound) cannot reach by time T.
 */
SpaceTimeSolution solve_hj_eps(const RandomField& field, const HamiltonianModel& model,
                               double epsilon, const U0Spec& u0, double T,
                               const HjOptions& opts = {});

/** Same scheme driven by an interpolated effective-Hamiltonian table. */
SpaceTimeSolution solve_hj_hbar(const HbarTable& hbar, const U0Spec& u0, double T,
                                const HjOptions& opts = {});

/**
 * Inf-convolution solution for a convex radial Hamiltonian profile and a
 * radial or affine initial datum; the solver's cross-check oracle.
 */
double hopf_lax_value(const HbarTable& hbar, const U0Spec& u0, const Vec& x, double t);

struct HomogenizationResult {
    std::vector<double> eps_ladder;
    std::vector<double> mean_error;  // seed-mean sup over the report region of |u_eps - u|
    std::vector<double> ses;
    std::vector<std::vector<double>> seed_errors;    // [rung][replica]
    std::vector<std::vector<double>> seed_runtimes;  // wall seconds per solve
    RateFit fit;
    bool envelope_ok = false;  // E <= C T eps^{1/8} |log eps|^{3/16}, anchored at the largest eps
    double envelope_C = 0.0;
    bool decreasing_beyond_2se = false;
};

/**
 * Homogenization error experiment: per (eps, seed), the sup over the
 * report region of |u^eps - u| against the effective-table reference
 * solved on a finer grid.
 */
HomogenizationResult homogenization_error(const HamiltonianModel& model, const HbarTable& hbar,
                                          const U0Spec& u0, const std::vector<double>& eps_ladder,
                                          double T, int n_seeds, std::uint64_t base_seed,
                                          const HjOptions& opts = {});

}  // namespace hjh
