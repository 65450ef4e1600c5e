#include "hjh/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace hjh {

namespace {

std::shared_ptr<const ScalarField> make_potential(const ModelSpec& s, std::uint64_t seed) {
    switch (s.potential) {
        case PotentialKind::zero:
            return std::make_shared<ZeroField>();
        case PotentialKind::poisson:
            return std::make_shared<PoissonBumpField>(seed, s.dimension, s.intensity,
                                                      s.bump_height, s.bump_radius);
        case PotentialKind::checker_uniform:
            return std::make_shared<CheckerUniformField>(seed, s.dimension);
        case PotentialKind::periodic:
            return std::make_shared<PeriodicField>(s.dimension, s.amp, s.period);
        case PotentialKind::quasiperiodic:
            return std::make_shared<QuasiPeriodicField>(s.dimension, s.amp, s.amp2);
    }
    throw std::logic_error("unknown potential kind");
}

/** Max of a field over a probe grid on a few windows; the measured sup. */
double measure_sup(const ScalarField& f, int dim, double probe_h, double radius) {
    double m = 0.0;
    int n = static_cast<int>(2 * radius / probe_h);
    for (int j = 0; j <= (dim == 2 ? n : 0); ++j)
        for (int i = 0; i <= n; ++i) {
            Vec y{-radius + i * probe_h, dim == 2 ? -radius + j * probe_h : 0.0};
            m = std::max(m, f.value(y));
        }
    return m;
}

}  // namespace

HamiltonianModel build_model(const ModelSpec& spec) {
    if (spec.dimension != 1 && spec.dimension != 2)
        throw std::invalid_argument("dimension must be 1 or 2");

    HamiltonianModel m;
    m.spec_ = spec;

    switch (spec.kind) {
        case ModelKind::h1_potential:
        case ModelKind::periodic_potential: {
            if (spec.bump_height < 0)
                throw std::invalid_argument(
                    "normalization violated: potential must be nonnegative (negative bump height)");
            if (spec.potential == PotentialKind::poisson) {
                if (spec.intensity <= 0) throw std::invalid_argument("poisson intensity must be > 0");
                if (spec.bump_radius <= 0 || spec.bump_radius > 0.5)
                    throw std::invalid_argument(
                        "bump radius must lie in (0, 1/2] to keep the dependence range at 1");
            }
            if (spec.potential == PotentialKind::periodic || spec.potential == PotentialKind::quasiperiodic) {
                if (spec.amp < 0 || spec.amp2 < 0)
                    throw std::invalid_argument(
                        "normalization violated: potential must be nonnegative (negative amplitude)");
            }
            // measure the potential sup on probe windows (for random fields the
            // per-realization sup is re-measured wherever a bound is needed)
            double vmax = 0.0;
            if (spec.potential == PotentialKind::zero) {
                vmax = 0.0;
            } else if (spec.potential == PotentialKind::periodic) {
                vmax = spec.amp * spec.dimension;
            } else if (spec.potential == PotentialKind::quasiperiodic) {
                vmax = (spec.amp + spec.amp2) * spec.dimension;
            } else {
                for (std::uint64_t probe_seed : {11ULL, 22ULL, 33ULL}) {
                    auto f = make_potential(spec, probe_seed);
                    vmax = std::max(vmax, measure_sup(*f, spec.dimension,
                                                      std::max(0.02, spec.bump_radius / 6), 8.0));
                }
            }
            m.v_max_ = vmax;
            break;
        }
        case ModelKind::h2_speed: {
            if (!(spec.a_min > 0))
                throw std::invalid_argument(
                    "coercivity violated: speed coefficient must be bounded below by a positive constant");
            if (spec.a_min > spec.a_max) throw std::invalid_argument("requires a_min <= a_max");
            m.v_max_ = 0.0;
            break;
        }
        case ModelKind::deterministic: {
            if (spec.one_homogeneous && !(spec.a0 > 0))
                throw std::invalid_argument("coercivity violated: a0 must be > 0");
            m.v_max_ = 0.0;
            break;
        }
        case ModelKind::slow_rate:
            throw std::invalid_argument("slow-rate models are built by build_slow_rate_model");
    }
    return m;
}

HamiltonianModel build_slow_rate_model(const std::vector<double>& rho_delta,
                                       const std::vector<double>& rho_value,
                                       const ModelSpec& base) {
    if (rho_delta.size() != rho_value.size() || rho_delta.size() < 2)
        throw std::invalid_argument("rho table needs matching delta/value columns, >= 2 rows");
    for (std::size_t k = 1; k < rho_delta.size(); ++k)
        if (!(rho_delta[k] > rho_delta[k - 1]) || !(rho_value[k] > rho_value[k - 1]))
            throw std::invalid_argument("rho must be strictly increasing on its table");
    if (rho_value.front() < 0)
        throw std::invalid_argument("rho must be nonnegative with rho(0) = 0");

    ModelSpec spec = base;
    spec.kind = ModelKind::slow_rate;
    spec.potential = PotentialKind::poisson;

    const int d = spec.dimension;

    // Empirical one-point law of the raw Poisson potential at the origin.
    std::vector<double> draws;
    const int n_draws = 4000;
    draws.reserve(n_draws);
    for (int i = 0; i < n_draws; ++i) {
        PoissonBumpField f(hash_mix(0x726573686170ULL, static_cast<std::uint64_t>(i)), d,
                           spec.intensity, spec.bump_height, spec.bump_radius);
        draws.push_back(f.value({0, 0}));
    }
    std::sort(draws.begin(), draws.end());
    auto quantile = [&](double q) {
        q = std::min(1.0, std::max(0.0, q));
        double pos = q * (draws.size() - 1);
        std::size_t k = static_cast<std::size_t>(pos);
        if (k + 1 >= draws.size()) return draws.back();
        double t = pos - k;
        return draws[k] * (1 - t) + draws[k + 1] * t;
    };

    // rho^{-1} on [0, rho(max)] by monotone interpolation of the table.
    auto rho_inv = [&](double s) {
        if (s <= rho_value.front()) return rho_delta.front();
        if (s >= rho_value.back()) return rho_delta.back();
        auto it = std::upper_bound(rho_value.begin(), rho_value.end(), s);
        std::size_t k = static_cast<std::size_t>(it - rho_value.begin());
        double t = (s - rho_value[k - 1]) / (rho_value[k] - rho_value[k - 1]);
        return rho_delta[k - 1] + t * (rho_delta[k] - rho_delta[k - 1]);
    };

    // Target tail P[phi(V) < sigma] <= sigma^d * rho^{-1}(sigma)^{d+2}: map the
    // upper quantiles of V onto sigma so the reshaped law is at least that thin.
    const double sigma_max = 1.0;
    const int n_knots = 60;
    std::vector<double> v_knots, phi_knots;
    double last_v = -1.0;
    for (int k = n_knots; k >= 1; --k) {
        double sigma = sigma_max * k / n_knots;
        double ri = rho_inv(sigma);
        double tail = std::pow(sigma, d) * std::pow(ri, d + 2);
        tail = std::min(0.9999, tail);
        double v = quantile(1.0 - tail);
        if (v <= last_v + 1e-12) continue;  // keep the table strictly increasing
        last_v = v;
        v_knots.push_back(v);
        phi_knots.push_back(sigma);  // decreasing as v increases
    }
    if (v_knots.size() < 2)
        throw std::invalid_argument("rho table too coarse to shape the potential tail");

    HamiltonianModel m;
    m.spec_ = spec;
    m.reshaping_ = std::make_shared<TransformedField>(nullptr, v_knots, phi_knots);
    m.v_max_ = phi_knots.front();  // phi is largest at the smallest potential value
    return m;
}

RandomField sample_field(const HamiltonianModel& model, const Box& window, std::uint64_t seed) {
    if (!(window.hi.x >= window.lo.x) ||
        (model.dimension() == 2 && !(window.hi.y >= window.lo.y)))
        throw std::invalid_argument("window must be nonempty");

    const ModelSpec& s = model.spec();
    RandomField f;
    f.seed = seed;
    f.window = window;
    f.dim = s.dimension;
    f.range_of_dependence = 1.0;
    f.bump_radius = s.bump_radius;

    switch (s.kind) {
        case ModelKind::h1_potential:
        case ModelKind::periodic_potential:
            f.values = make_potential(s, seed);
            break;
        case ModelKind::slow_rate: {
            auto inner = std::make_shared<PoissonBumpField>(seed, s.dimension, s.intensity,
                                                            s.bump_height, s.bump_radius);
            const TransformedField* shape = model.reshaping();
            f.values = std::make_shared<TransformedField>(inner, shape->v_knots(), shape->phi_knots());
            break;
        }
        case ModelKind::h2_speed: {
            if (s.a_random) {
                // a(y) = a_min + (a_max - a_min) * clamp(poisson field, 0, 1)
                f.values = std::make_shared<PoissonBumpField>(seed, s.dimension, s.intensity, 1.0,
                                                              s.bump_radius);
            } else {
                f.values = std::make_shared<ConstField>(0.0);
            }
            break;
        }
        case ModelKind::deterministic:
            f.values = std::make_shared<ZeroField>();
            break;
    }
    return f;
}

namespace {

double speed_coefficient(const HamiltonianModel& model, const RandomField& field, const Vec& y) {
    const ModelSpec& s = model.spec();
    if (!s.a_random) return s.a_min;
    double t = std::min(1.0, std::max(0.0, field.value(y)));
    return s.a_min + (s.a_max - s.a_min) * t;
}

}  // namespace

double eval_H_unchecked(const HamiltonianModel& model, const RandomField& field, const Vec& p,
                        const Vec& y) {
    const ModelSpec& s = model.spec();
    switch (s.kind) {
        case ModelKind::h1_potential:
        case ModelKind::periodic_potential:
        case ModelKind::slow_rate:
            return 0.5 * p.norm_sq() - field.value(y);
        case ModelKind::h2_speed:
            return speed_coefficient(model, field, y) * p.norm();
        case ModelKind::deterministic:
            return s.one_homogeneous ? s.a0 * p.norm() : 0.5 * p.norm_sq();
    }
    throw std::logic_error("unknown model kind");
}

double eval_H(const HamiltonianModel& model, const RandomField& field, const Vec& p, const Vec& y) {
    if (!field.in_window(y)) throw std::out_of_range("evaluation outside the sampled window");
    return eval_H_unchecked(model, field, p, y);
}

double eikonal_speed(const HamiltonianModel& model, const RandomField& field, double mu,
                     const Vec& y) {
    if (!(mu > 0)) throw std::invalid_argument("mu must be > 0 (degenerate eikonal)");
    const ModelSpec& s = model.spec();
    switch (s.kind) {
        case ModelKind::h1_potential:
        case ModelKind::periodic_potential:
        case ModelKind::slow_rate:
            return std::sqrt(2.0 * (mu + field.value(y)));
        case ModelKind::h2_speed:
            return mu / speed_coefficient(model, field, y);
        case ModelKind::deterministic:
            return s.one_homogeneous ? mu / s.a0 : std::sqrt(2.0 * mu);
    }
    throw std::logic_error("unknown model kind");
}

AssumptionReport check_assumptions(const HamiltonianModel& model, const RandomField& field,
                                   int n_probes) {
    AssumptionReport rep;
    rep.n_probes = n_probes;
    rep.potential_min_probe = std::numeric_limits<double>::infinity();
    RngStream rng(hash_mix(field.seed, 0x617373756d65ULL));
    const Box& w = field.window;
    const int dim = model.dimension();
    const double pr = 3.0;

    for (int k = 0; k < n_probes; ++k) {
        Vec y{rng.next_in(w.lo.x, w.hi.x), dim == 2 ? rng.next_in(w.lo.y, w.hi.y) : 0.0};
        Vec p{rng.next_in(-pr, pr), dim == 2 ? rng.next_in(-pr, pr) : 0.0};
        Vec q{rng.next_in(-pr, pr), dim == 2 ? rng.next_in(-pr, pr) : 0.0};
        double hp = eval_H_unchecked(model, field, p, y);
        double hq = eval_H_unchecked(model, field, q, y);
        double hm = eval_H_unchecked(model, field, (p + q) * 0.5, y);
        double h0 = eval_H_unchecked(model, field, {0, 0}, y);

        double cgap = hm - std::max(hp, hq);
        rep.worst_convexity_gap = std::max(rep.worst_convexity_gap, cgap);
        if (cgap > 1e-12) rep.midpoint_level_set_convexity = false;

        double pgap = h0 - hp;
        rep.worst_p_min_gap = std::max(rep.worst_p_min_gap, pgap);
        if (pgap > 1e-12) rep.p_minimum_at_zero = false;

        if (model.kinetic()) rep.potential_min_probe = std::min(rep.potential_min_probe, -h0);
    }

    if (model.kind() == ModelKind::h1_potential || model.kind() == ModelKind::periodic_potential) {
        // the infimum of the potential should vanish (probe tolerance 0.05)
        rep.potential_infimum_zero =
            rep.potential_min_probe >= -1e-12 && rep.potential_min_probe < 5e-2;
    } else if (!model.kinetic()) {
        rep.potential_min_probe = 0.0;
    }
    return rep;
}

TailLaw estimate_tail(const HamiltonianModel& model, const std::vector<double>& lambda_grid,
                      int n_samples, std::uint64_t seed) {
    for (double l : lambda_grid)
        if (!(l > 0)) throw std::invalid_argument("lambda grid must be positive");
    if (n_samples < 100) throw std::invalid_argument("tail estimation needs n_samples >= 100");

    std::vector<double> grid = lambda_grid;
    std::sort(grid.begin(), grid.end());

    std::vector<double> h00(n_samples);
    Box w{{-2, -2}, {2, 2}};
    for (int i = 0; i < n_samples; ++i) {
        RandomField f = sample_field(model, w, hash3(seed, 0x7461696cULL, static_cast<std::uint64_t>(i)));
        h00[i] = eval_H_unchecked(model, f, {0, 0}, {0, 0});
    }

    TailLaw law;
    law.lambda_grid = grid;
    law.probabilities.resize(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        int cnt = 0;
        for (double h : h00)
            if (h > -grid[k]) ++cnt;
        law.probabilities[k] = static_cast<double>(cnt) / n_samples;
    }

    // log-log least squares on entries with nonzero probability
    std::vector<double> lx, ly;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (law.probabilities[k] > 0) {
            lx.push_back(std::log(grid[k]));
            ly.push_back(std::log(law.probabilities[k]));
        }
    }
    bool all_one = !law.probabilities.empty() &&
                   std::all_of(law.probabilities.begin(), law.probabilities.end(),
                               [](double p) { return p == 1.0; });
    if (all_one) {
        law.theta = 0.0;
        law.c = 1.0;
        return law;
    }
    if (lx.size() < 2) {
        law.degenerate = true;
        return law;
    }
    double n = static_cast<double>(lx.size());
    double sx = std::accumulate(lx.begin(), lx.end(), 0.0);
    double sy = std::accumulate(ly.begin(), ly.end(), 0.0);
    double sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
        sxx += lx[k] * lx[k];
        sxy += lx[k] * ly[k];
    }
    double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-14) {
        law.degenerate = true;
        return law;
    }
    law.theta = (n * sxy - sx * sy) / denom;
    law.c = std::exp((sy - law.theta * sx) / n);
    return law;
}

}  // namespace hjh
