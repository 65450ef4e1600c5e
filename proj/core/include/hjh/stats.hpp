#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hjh/cell.hpp"
#include "hjh/effective.hpp"
#include "hjh/model.hpp"

namespace hjh {

/** Log-log least-squares fit of value against scale. */
struct RateFit {
    double exponent = 0.0;
    double log_constant = 0.0;
    double r2 = 0.0;
    std::vector<std::pair<double, double>> points;
    // envelope dominance: value <= C * envelope(scale), C fitted at the anchor
    bool has_envelope = false;
    bool envelope_ok = false;
    double envelope_C = 0.0;
    std::string envelope_form;
};

RateFit rate_fit(const std::vector<std::pair<double, double>>& points,
                 const std::function<double(double)>& envelope = nullptr,
                 const std::string& envelope_form = "");

struct FluctuationRecord {
    double mu = 0.0;
    double t = 0.0;
    double mean = 0.0;
    double variance = 0.0;
    std::vector<std::pair<double, double>> tail_counts;  // (lambda, empirical exceedance)
    int n = 0;
};

struct FluctuationResult {
    std::vector<FluctuationRecord> records;
    std::vector<std::vector<double>> samples;  // [rung][replica] raw m(t e) draws
    RateFit variance_fit;          // variance vs t
    bool variance_envelope_ok = false;  // Var <= C t / mu, C fitted at smallest t, 3 sigma slack
    double variance_envelope_C = 0.0;
    bool tail_envelope_ok = false;      // P[|m - M| > l] <= exp(-mu l^2 / (C t)), one C
    double tail_envelope_C = 0.0;
};

/**
 * Samples m_mu(t e, 0, .) across seeds for every t in the ladder (one
 * metric solve per seed covers the whole ladder), then fits the variance
 * growth and checks the Gaussian-form exceedance envelope.
 */
FluctuationResult fluctuation_experiment(const HamiltonianModel& model, double mu, const Vec& e,
                                         const std::vector<double>& t_ladder, int n,
                                         std::uint64_t base_seed,
                                         const MetricRunOptions& opts = {});

struct BiasResult {
    std::vector<double> t_ladder;
    std::vector<std::vector<double>> samples;  // [rung][replica]
    std::vector<double> means;      // M_hat(t e)
    std::vector<double> ses;        // SE of the mean
    double mbar_ref = 0.0;          // Fekete one-sided reference
    std::vector<double> bias;       // M_hat(t e) - t * mbar_ref
    bool one_sided_ok = false;      // M_hat/t >= ref - 2 SE at every rung
    RateFit growth;                 // fit of positive bias values vs t
    bool growth_sublinear = false;  // fitted exponent < 1 (or bias within noise)
};

BiasResult bias_experiment(const HamiltonianModel& model, double mu,
                           const std::vector<double>& t_ladder, int n, std::uint64_t base_seed,
                           const MetricRunOptions& opts = {});

struct GSigmaRecord {
    double sigma = 0.0;
    double t = 0.0;
    double G_hat = 0.0;   // mean of the truncated exponential sum
    double g_hat = 0.0;   // -log(G)/sigma
    double Em_hat = 0.0;  // mean of min over the truncated plane of m
    int n = 0;
};

/** One Monte Carlo record of the softmin plane functional at (sigma, t). */
GSigmaRecord g_sigma_estimate(const HamiltonianModel& model, double mu, double sigma, double t,
                              int n, std::uint64_t base_seed, const MetricRunOptions& opts = {});

struct GSigmaSandwich {
    double C_upper = 0.0;  // fitted once: g <= E[m] + C
    double C_lower = 0.0;  // fitted once: g >= E[m] - C_lower * (sigma t / mu^2 + log(1+t/(sigma mu))/sigma)
    std::vector<bool> upper_ok;
    std::vector<bool> lower_ok;
    bool all_ok = false;
};

/** Fits both sandwich constants on the first record and tests the rest. */
GSigmaSandwich g_sigma_sandwich(const std::vector<GSigmaRecord>& records, double mu);

struct FlatSpotReport {
    double measured = 0.0;  // -delta v^delta(0, omega; 0)
    double lower = 0.0;     // sup_r (sup_{B_r} H(0,.) - K_0 r delta)
    double upper = 0.0;     // (-delta R) v (delta R / (C + delta R)) sup_{B_R} H(0,.)
    double sup_H0 = 0.0;    // sup_{B_R} H(0, ., omega)
    bool pass = false;
};

/**
 * Per-realization deterministic sandwich for the flat-spot value at p = 0.
 * C_cal is the constant of the upper bound, calibrated once by
 * calibrate_flat_spot_constant().
 */
FlatSpotReport flat_spot_sandwich(const RandomField& field, const HamiltonianModel& model,
                                  double delta, double R, double C_cal,
                                  const CellOptions& opts = {});

/**
 * Smallest admissible upper-bound constant measured on deterministic
 * plateau-with-distant-dip media, doubled for safety.
 */
double calibrate_flat_spot_constant(const CellOptions& opts = {});

struct SubballisticResult {
    std::vector<double> delta_ladder;
    std::vector<std::vector<double>> samples;  // [rung][replica] delta v at the origin
    std::vector<double> mean_magnitude;  // mean of |delta v^delta(0)| per delta
    std::vector<double> ses;
    RateFit fit;                         // magnitude vs delta (decay exponent)
    double theta = 0.0;                  // tail exponent used for the envelope
    double alpha_envelope = 0.0;         // min(1/6, d/(d+theta))
    bool envelope_ok = false;            // fitted exponent >= alpha - tolerance
};

/**
 * Decay of the flat-spot discounted value as delta -> 0, compared against
 * the algebraic-rate envelope implied by the tail law of H(0,0,.).
 */
SubballisticResult subballistic_rate(const HamiltonianModel& model,
                                     const std::vector<double>& delta_ladder, int n,
                                     std::uint64_t base_seed, const TailLaw& tail,
                                     const CellOptions& opts = {});

}  // namespace hjh
