#pragma once

#include <cstdint>
#include <vector>

#include "hjh/cell.hpp"
#include "hjh/metric.hpp"
#include "hjh/model.hpp"

namespace hjh {

/** Experiments clamp mu away from the degenerate bottom of the range. */
constexpr double kMuFloor = 1e-3;

enum class HbarRoute { metric, cell };

struct HbarEstimate {
    Vec p;
    double value = 0.0;
    HbarRoute route = HbarRoute::metric;
    double ci_low = 0.0;
    double ci_high = 0.0;
    int n_seeds = 0;
    std::uint64_t base_seed = 0;
    // route parameters actually used
    double bisect_tol = 0.0;            // metric route
    std::vector<double> delta_ladder;   // cell route
};

struct MbarEstimate {
    double mu = 0.0;
    Vec direction;
    double value = 0.0;         // mean of m(t e)/t at the largest t
    double fekete_upper = 0.0;  // min over the ladder of mean + SE (one-sided bound)
    std::vector<double> t_ladder;
    std::vector<double> means;  // per ladder entry, mean of m(t e)/t
    std::vector<double> ses;    // standard errors
    int n_seeds = 0;
};

struct MetricRunOptions {
    double h = 0.1;
    double window_factor = 1.35;  // window radius = factor * t + pad
    double window_pad = 3.0;
    std::size_t max_nodes = 26'000'000;
};

/**
 * Monte Carlo estimate of the rescaled point-to-point cost m_mu(t e, 0)/t
 * along a t-ladder. Subadditivity of the mean makes min_t (mean + SE) a
 * certified one-sided upper bound for the t -> infinity limit.
 */
MbarEstimate mbar_estimate(const HamiltonianModel& model, double mu, const Vec& direction,
                           const std::vector<double>& t_ladder, int n_seeds,
                           std::uint64_t base_seed, const MetricRunOptions& opts = {});

/**
 * Effective Hamiltonian through the metric route: bisection over mu of the
 * predicate min_e (mbar_mu(e) - p.e) >= 0 over sampled unit directions,
 * with one metric solve per seed per mu serving every direction. Returns 0
 * when the predicate already holds at the mu floor (flat spot).
 */
HbarEstimate hbar_from_metric(const HamiltonianModel& model, const Vec& p, double mu_lo,
                              double mu_hi, int n_directions, double t, int n_seeds,
                              std::uint64_t base_seed, const MetricRunOptions& opts = {});

/**
 * Effective Hamiltonian through the cell route: per delta, the Monte Carlo
 * mean of -delta v^delta(0); the value extrapolates the delta ladder
 * (Aitken on the last three rungs, with a linear-in-delta fallback).
 */
HbarEstimate hbar_from_cell(const HamiltonianModel& model, const Vec& p,
                            const std::vector<double>& delta_ladder, int n_seeds,
                            std::uint64_t base_seed, const CellOptions& opts = {});

/** Lower bounds for lim f(s)/s from almost-superadditive samples. */
struct FeketeBound {
    double t = 0.0;
    double lower_bound = 0.0;
};

/**
 * For f satisfying f(s+t) >= f(s) + f(t) - Delta(s+t) with nondecreasing
 * Delta of finite tail integral, returns per-sample lower bounds
 * f(t)/t + Delta(t)/t - 4 * integral_{2t}^inf Delta(s)/s^2 ds. The table
 * part of the integral is exact on the piecewise-linear interpolant; the
 * tail beyond the table uses the fitted power growth of Delta.
 */
std::vector<FeketeBound> fekete_extrapolate(const std::vector<std::pair<double, double>>& samples,
                                            const std::vector<std::pair<double, double>>& delta_table);

}  // namespace hjh
