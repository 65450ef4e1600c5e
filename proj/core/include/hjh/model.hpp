#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hjh/field.hpp"
#include "hjh/geometry.hpp"

namespace hjh {

enum class ModelKind {
    h1_potential,        // H(p,y) = |p|^2/2 - V(y)
    h2_speed,            // H(p,y) = a(y)|p|
    deterministic,       // y-independent H (quadratic or one-homogeneous)
    periodic_potential,  // kinetic Hamiltonian with periodic/quasi-periodic V
    slow_rate,           // H(p,y) = |p|^2/2 - phi(V(y)), thin-tailed phi(V)
};

enum class PotentialKind {
    zero,
    poisson,
    checker_uniform,
    periodic,
    quasiperiodic,
};

/** Declarative description of a Hamiltonian family; input to build_model. */
struct ModelSpec {
    ModelKind kind = ModelKind::h1_potential;
    int dimension = 2;

    // kinetic-family potential parameters
    PotentialKind potential = PotentialKind::zero;
    double intensity = 1.0;
    double bump_height = 1.0;
    double bump_radius = 0.35;
    double amp = 1.0;        // periodic amplitude (also quasiperiodic first weight)
    double amp2 = 1.0;       // quasiperiodic second weight
    double period = 1.0;

    // speed-family parameters
    double a_min = 1.0;
    double a_max = 1.0;
    bool a_random = false;   // modulate a(y) between [a_min, a_max] by a Poisson field

    // deterministic kind: H(p) = 0.5|p|^2 (quadratic) or a0|p| (one_homogeneous)
    bool one_homogeneous = false;
    double a0 = 1.0;
};

/** Fitted tail law P[H(0,0,.) > -lambda] ~ c lambda^theta. */
struct TailLaw {
    double theta = 0.0;
    double c = 0.0;
    std::vector<double> lambda_grid;
    std::vector<double> probabilities;  // empirical exceedance per lambda
    bool degenerate = false;            // no usable fit (all-zero or underdetermined)
};

class HamiltonianModel;

/** Pass/fail record of the structural assumption probes. */
struct AssumptionReport {
    bool midpoint_level_set_convexity = true;
    bool p_minimum_at_zero = true;
    bool potential_infimum_zero = true;  // only meaningful for kinetic kinds
    double worst_convexity_gap = 0.0;    // max of H(mid) - max(H(p),H(q)) over probes
    double worst_p_min_gap = 0.0;        // max of H(0,y) - H(p,y) over probes
    double potential_min_probe = 0.0;    // min of V over probes
    int n_probes = 0;
    bool all_pass() const {
        return midpoint_level_set_convexity && p_minimum_at_zero && potential_infimum_zero;
    }
};

/**
 * A parametrized Hamiltonian family together with its analytic metadata.
 * Construction goes through build_model(), which validates coercivity and
 * the normalization H(p,y,.) >= H(0,y,.), sup_omega H(0,0,.) = 0.
 */
class HamiltonianModel {
  public:
    ModelKind kind() const { return spec_.kind; }
    int dimension() const { return spec_.dimension; }
    const ModelSpec& spec() const { return spec_; }

    /** Sup of the (reshaped) potential, measured at build time on probe windows. */
    double v_max() const { return v_max_; }
    double a_min() const { return spec_.a_min; }
    double a_max() const { return spec_.a_max; }

    bool kinetic() const {
        return spec_.kind != ModelKind::h2_speed &&
               !(spec_.kind == ModelKind::deterministic && spec_.one_homogeneous);
    }

    /** Slow-rate reshaping, when present. */
    const TransformedField* reshaping() const { return reshaping_.get(); }

    friend HamiltonianModel build_model(const ModelSpec& spec);
    friend HamiltonianModel build_slow_rate_model(const std::vector<double>& rho_delta,
                                                  const std::vector<double>& rho_value,
                                                  const ModelSpec& base);

    /** Test hook: wrap a model around an explicit field, skipping validation. */
    static HamiltonianModel unchecked(const ModelSpec& spec, double v_max) {
        HamiltonianModel m;
        m.spec_ = spec;
        m.v_max_ = v_max;
        return m;
    }

  private:
    HamiltonianModel() = default;
    ModelSpec spec_;
    double v_max_ = 0.0;
    std::shared_ptr<const TransformedField> reshaping_;
};

/** Validates the spec and measures v_max for randomized potentials. */
HamiltonianModel build_model(const ModelSpec& spec);

/**
 * Thin-tailed kinetic Hamiltonian built from a modulus table rho (strictly
 * increasing, rho(0)=0): the potential is reshaped so the law of H(0,0,.)
 * near its maximum is thin enough that no rate faster than rho survives.
 */
HamiltonianModel build_slow_rate_model(const std::vector<double>& rho_delta,
                                       const std::vector<double>& rho_value,
                                       const ModelSpec& base);

/** One realization of the model's coefficient field on a window. */
RandomField sample_field(const HamiltonianModel& model, const Box& window, std::uint64_t seed);

/** H(p, y) for the sampled realization. Throws on out-of-window y. */
double eval_H(const HamiltonianModel& model, const RandomField& field, const Vec& p, const Vec& y);

/** As eval_H but without the window check; used by solvers on their own grids. */
double eval_H_unchecked(const HamiltonianModel& model, const RandomField& field, const Vec& p,
                        const Vec& y);

/**
 * The gradient magnitude f_mu(y) with H(f_mu e, y) = mu for unit e.
 * All supported kinds are isotropic in p. Requires mu > 0.
 */
double eikonal_speed(const HamiltonianModel& model, const RandomField& field, double mu,
                     const Vec& y);

/** Probe-based verification of level-set convexity and normalization. */
AssumptionReport check_assumptions(const HamiltonianModel& model, const RandomField& field,
                                   int n_probes);

/**
 * Empirical tail of H(0,0,.) across fresh realizations, with (theta, c)
 * from log-log least squares. Lambdas must be positive; n_samples >= 100.
 */
TailLaw estimate_tail(const HamiltonianModel& model, const std::vector<double>& lambda_grid,
                      int n_samples, std::uint64_t seed);

}  // namespace hjh
