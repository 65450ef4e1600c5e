#include "hjh/hj.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "hjh/cell.hpp"

namespace hjh {

double HbarTable::value(double pr) const {
    pr = std::abs(pr);
    if (r.empty()) throw std::invalid_argument("empty table");
    if (pr >= r.back()) {
        // linear coercive extension with the last slope
        std::size_t n = r.size();
        double slope = n >= 2 ? (H[n - 1] - H[n - 2]) / (r[n - 1] - r[n - 2]) : 1.0;
        return H.back() + slope * (pr - r.back());
    }
    auto it = std::upper_bound(r.begin(), r.end(), pr);
    std::size_t k = std::max<std::size_t>(1, static_cast<std::size_t>(it - r.begin()));
    double t = (pr - r[k - 1]) / (r[k] - r[k - 1]);
    return H[k - 1] + t * (H[k] - H[k - 1]);
}

double HbarTable::max_slope() const {
    double s = 0.0;
    for (std::size_t k = 1; k < r.size(); ++k)
        s = std::max(s, std::abs(H[k] - H[k - 1]) / (r[k] - r[k - 1]));
    return s;
}

bool HbarTable::level_set_convex(double tol) const {
    // radial profiles are level-set convex iff quasiconvex; with H(0) the
    // minimum this reduces to the profile having no interior strict local max
    for (std::size_t k = 1; k + 1 < r.size(); ++k)
        if (H[k] > std::max(H[k - 1], H[k + 1]) + tol) return false;
    return true;
}

double SpaceTimeSolution::at(const Vec& x, double t) const {
    if (times.empty()) throw std::logic_error("empty solution");
    if (t <= times.front()) return frames.front().interp(x);
    if (t >= times.back()) return frames.back().interp(x);
    auto it = std::upper_bound(times.begin(), times.end(), t);
    std::size_t k = static_cast<std::size_t>(it - times.begin());
    double w = (t - times[k - 1]) / (times[k] - times[k - 1]);
    return (1 - w) * frames[k - 1].interp(x) + w * frames[k].interp(x);
}

namespace {

struct MarchSetup {
    GridSpec grid;
    GridFunction coeff;      // V(x/eps) or a(x/eps); unused for table mode
    bool kinetic = true;
    bool table_mode = false;
    const HbarTable* table = nullptr;
    double alpha = 1.0;
    double grad_clamp = 1.0;
    double L = 1.0;       // gradient bound of the solution
    double h_scale = 1.0; // |H| scale on the reachable gradient range
};

double ham(const MarchSetup& s, const Vec& q, std::size_t k) {
    if (s.table_mode) return s.table->value(q.norm());
    if (s.kinetic) return 0.5 * q.norm_sq() - s.coeff[k];
    return s.coeff[k] * q.norm();
}

SpaceTimeSolution march(const MarchSetup& s, const U0Spec& u0, double T, const HjOptions& opts) {
    const GridSpec& g = s.grid;
    const int dim = g.dim;
    const double h = g.h;
    const double inv2h = 1.0 / (2 * h);

    double dt_max = opts.cfl * h / ((dim == 2 ? 2.0 : 1.0) * s.alpha);
    int n_frames = std::max(1, opts.n_frames);
    double frame_dt = T / n_frames;
    int steps_per_frame = std::max(1, static_cast<int>(std::ceil(frame_dt / dt_max)));
    double dt = frame_dt / steps_per_frame;

    GridFunction u(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) u.at(i, j) = u0(g.node(i, j));

    SpaceTimeSolution sol;
    sol.times.push_back(0.0);
    sol.frames.push_back(u);
    sol.cfl = opts.cfl;
    sol.dt = dt;
    sol.lipschitz_bound = s.L;
    sol.epsilon = 0.0;

    auto clamped = [&](Vec q) {
        double qn = q.norm();
        if (qn > s.grad_clamp) q = q * (s.grad_clamp / qn);
        return q;
    };

    GridFunction next(g);
    for (int f = 1; f <= n_frames; ++f) {
        for (int step = 0; step < steps_per_frame; ++step) {
            const double* a = u.data().data();
            double* b = next.data().data();
            for (int j = 0; j < g.ny; ++j) {
                for (int i = 0; i < g.nx; ++i) {
                    std::size_t k = g.index(i, j);
                    // one-sided copies at the rim; the report cone excludes it
                    double ue = a[i < g.nx - 1 ? k + 1 : k];
                    double uw = a[i > 0 ? k - 1 : k];
                    double un = dim == 2 ? a[j < g.ny - 1 ? k + g.nx : k] : 0.0;
                    double us = dim == 2 ? a[j > 0 ? k - g.nx : k] : 0.0;
                    Vec grad{(ue - uw) * inv2h, dim == 2 ? (un - us) * inv2h : 0.0};
                    double visc = s.alpha * (ue - 2 * a[k] + uw) * inv2h;
                    if (dim == 2) visc += s.alpha * (un - 2 * a[k] + us) * inv2h;
                    b[k] = a[k] - dt * (ham(s, clamped(grad), k) - visc);
                }
            }
            std::swap(u.data(), next.data());
        }
        sol.times.push_back(f * frame_dt);
        sol.frames.push_back(u);
    }
    return sol;
}

void measure_frames(SpaceTimeSolution& sol, const U0Spec& u0, double s_max, double T,
                    double h_scale) {
    const GridSpec& g = sol.grid();
    double R_dom = g.bounds().hi.x;
    sol.report_radius = R_dom - s_max * T - 2 * g.h;
    sol.sup_bound = h_scale * T;
    (void)u0;
    for (std::size_t f = 0; f < sol.frames.size(); ++f) {
        double t = sol.times[f];
        double cone = R_dom - s_max * t - 2 * g.h;
        double lip = 0.0;
        const GridFunction& u = sol.frames[f];
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i + 1 < g.nx; ++i) {
                Vec y = g.node(i, j);
                if (std::abs(y.x) > cone || std::abs(y.y) > cone) continue;
                lip = std::max(lip, std::abs(u.at(i + 1, j) - u.at(i, j)) / g.h);
                if (g.dim == 2 && j + 1 < g.ny)
                    lip = std::max(lip, std::abs(u.at(i, j + 1) - u.at(i, j)) / g.h);
            }
        sol.frame_lip.push_back(lip);
    }
}

}  // namespace

SpaceTimeSolution solve_hj_eps(const RandomField& field, const HamiltonianModel& model,
                               double epsilon, const U0Spec& u0, double T,
                               const HjOptions& opts) {
    if (!(epsilon > 0)) throw std::invalid_argument("epsilon must be > 0");
    if (opts.h > epsilon / 8 + 1e-12)
        throw std::invalid_argument("grid must resolve the oscillation: h <= eps/8");

    MarchSetup s;
    s.kinetic = model.kinetic();
    s.table_mode = false;

    // gradient bound L(K): the K-level of H propagates; kinetic media can
    // steepen the datum up to the coercivity profile
    double K = u0.lipschitz();
    double v_sup = model.v_max();
    s.L = s.kinetic ? std::sqrt(K * K + 2 * v_sup) : K;
    s.grad_clamp = 1.2 * s.L + 0.3;
    s.alpha = s.kinetic ? s.grad_clamp : model.a_max();

    double R_dom = std::max(T, 1.0) + s.alpha * T + opts.domain_pad;
    s.grid = GridSpec::centered({0, 0}, R_dom, opts.h, model.dimension());
    if (s.grid.size() > opts.max_nodes) throw std::invalid_argument("grid budget exceeded");

    s.coeff = GridFunction(s.grid);
    const ModelSpec& ms = model.spec();
    for (int j = 0; j < s.grid.ny; ++j)
        for (int i = 0; i < s.grid.nx; ++i) {
            Vec y = s.grid.node(i, j) * (1.0 / epsilon);
            if (s.kinetic) {
                s.coeff.at(i, j) = ms.kind == ModelKind::deterministic ? 0.0 : field.value(y);
            } else if (ms.kind == ModelKind::h2_speed) {
                double t = ms.a_random ? std::min(1.0, std::max(0.0, field.value(y))) : 0.0;
                s.coeff.at(i, j) = ms.a_min + (ms.a_max - ms.a_min) * t;
            } else {
                s.coeff.at(i, j) = ms.a0;
            }
        }
    s.h_scale = s.kinetic ? 0.5 * s.L * s.L + v_sup : model.a_max() * s.L;

    SpaceTimeSolution sol = march(s, u0, T, opts);
    sol.epsilon = epsilon;
    measure_frames(sol, u0, s.alpha, T, s.h_scale);
    return sol;
}

SpaceTimeSolution solve_hj_hbar(const HbarTable& hbar, const U0Spec& u0, double T,
                                const HjOptions& opts) {
    double K = u0.lipschitz();
    MarchSetup s;
    s.table_mode = true;
    s.table = &hbar;
    s.L = K;
    s.grad_clamp = 1.2 * K + 0.3;
    if (hbar.max_radius() < s.grad_clamp)
        throw std::invalid_argument("effective table does not cover the needed p range");
    if (!hbar.level_set_convex(1e-6))
        throw std::invalid_argument("effective table is not level-set convex");
    s.alpha = std::max(hbar.max_slope(), 0.1);

    double R_dom = std::max(T, 1.0) + s.alpha * T + opts.domain_pad;
    s.grid = GridSpec::centered({0, 0}, R_dom, opts.h, 2);
    if (s.grid.size() > opts.max_nodes) throw std::invalid_argument("grid budget exceeded");
    s.coeff = GridFunction(s.grid);  // unused
    s.h_scale = std::abs(hbar.value(s.L)) + std::abs(hbar.value(0.0));

    SpaceTimeSolution sol = march(s, u0, T, opts);
    measure_frames(sol, u0, s.alpha, T, s.h_scale);
    return sol;
}

double hopf_lax_value(const HbarTable& hbar, const U0Spec& u0, const Vec& x, double t) {
    if (t <= 0) return u0(x);
    if (u0.kind == InitialData::plane) return u0.p.dot(x) - t * hbar.value(u0.p.norm());

    // numerical Legendre transform of the radial profile
    auto lagrangian = [&](double speed) {
        double best = -std::numeric_limits<double>::infinity();
        double r_hi = hbar.max_radius();
        const int n = 400;
        for (int k = 0; k <= n; ++k) {
            double r = r_hi * k / n;
            best = std::max(best, r * speed - hbar.value(r));
        }
        return best;
    };

    // radial datum: the minimizing point lies on the ray through x
    double xr = x.norm();
    auto phi = [&](double rho) {
        Vec y = xr > 0 ? x * (rho / xr) : Vec{rho, 0};
        return u0(y) + t * lagrangian(std::abs(xr - rho) / t);
    };
    double lo = -std::max(1.0, xr + t * hbar.max_slope() + 1);
    double hi = -lo;
    const int n_scan = 240;
    double best = std::numeric_limits<double>::infinity(), best_rho = 0;
    for (int k = 0; k <= n_scan; ++k) {
        double rho = lo + (hi - lo) * k / n_scan;
        double v = phi(rho);
        if (v < best) {
            best = v;
            best_rho = rho;
        }
    }
    // golden refine around the best scan point
    double a = best_rho - (hi - lo) / n_scan, b = best_rho + (hi - lo) / n_scan;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - gr * (b - a), d = a + gr * (b - a);
    for (int it = 0; it < 60; ++it) {
        if (phi(c) < phi(d)) {
            b = d;
            d = c;
            c = b - gr * (b - a);
        } else {
            a = c;
            c = d;
            d = a + gr * (b - a);
        }
    }
    return std::min(best, phi(0.5 * (a + b)));
}

HomogenizationResult homogenization_error(const HamiltonianModel& model, const HbarTable& hbar,
                                          const U0Spec& u0, const std::vector<double>& eps_ladder,
                                          double T, int n_seeds, std::uint64_t base_seed,
                                          const HjOptions& opts) {
    for (std::size_t k = 1; k < eps_ladder.size(); ++k)
        if (!(eps_ladder[k] < eps_ladder[k - 1]))
            throw std::invalid_argument("epsilon ladder must be decreasing");

    // homogenized reference on a finer grid than any ladder member uses
    HjOptions ref_opts = opts;
    ref_opts.h = std::min(opts.h, eps_ladder.back() / 8) / 2;
    SpaceTimeSolution u_ref = solve_hj_hbar(hbar, u0, T, ref_opts);

    bool random = model.kind() != ModelKind::deterministic &&
                  model.spec().potential != PotentialKind::zero &&
                  model.spec().potential != PotentialKind::periodic &&
                  model.spec().potential != PotentialKind::quasiperiodic;
    if (model.kind() == ModelKind::h2_speed && !model.spec().a_random) random = false;
    int seeds = random ? n_seeds : 1;

    HomogenizationResult out;
    out.eps_ladder = eps_ladder;
    for (double eps : eps_ladder) {
        HjOptions o = opts;
        o.h = std::min(opts.h, eps / 8);
        std::vector<double> errs(seeds), times(seeds);
        for (int s = 0; s < seeds; ++s) {
            auto t0 = std::chrono::steady_clock::now();
            RandomField field =
                sample_field(model, Box::centered({0, 0}, 1e7),
                             replica_seed(base_seed, experiment_id("homog"), s));
            SpaceTimeSolution ue = solve_hj_eps(field, model, eps, u0, T, o);
            double err = 0.0;
            const GridSpec& g = ue.grid();
            for (std::size_t f = 1; f < ue.frames.size(); ++f) {
                double t = ue.times[f];
                for (int j = 0; j < g.ny; ++j)
                    for (int i = 0; i < g.nx; ++i) {
                        Vec y = g.node(i, j);
                        if (y.norm() > T) continue;  // report region B_T
                        err = std::max(err, std::abs(ue.frames[f].at(i, j) - u_ref.at(y, t)));
                    }
            }
            errs[s] = err;
            times[s] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        }
        out.seed_errors.push_back(errs);
        out.seed_runtimes.push_back(times);
        double m = std::accumulate(errs.begin(), errs.end(), 0.0) / errs.size();
        double s2 = 0.0;
        for (double e : errs) s2 += (e - m) * (e - m);
        out.mean_error.push_back(m);
        out.ses.push_back(errs.size() > 1 ? std::sqrt(s2 / (errs.size() - 1) / errs.size()) : 0.0);
    }

    std::vector<std::pair<double, double>> pts;
    for (std::size_t k = 0; k < eps_ladder.size(); ++k)
        pts.push_back({eps_ladder[k], std::max(out.mean_error[k], 1e-14)});
    auto envelope = [T](double eps) {
        return T * std::pow(eps, 1.0 / 8.0) * std::pow(std::abs(std::log(eps)), 3.0 / 16.0);
    };
    if (pts.size() >= 3) {
        out.fit = rate_fit(pts, envelope, "T eps^{1/8} |log eps|^{3/16}");
        out.envelope_ok = out.fit.envelope_ok;
        out.envelope_C = out.fit.envelope_C;
    } else {
        // anchored dominance without a slope fit
        out.envelope_C = out.mean_error.front() / envelope(eps_ladder.front());
        out.envelope_ok = true;
        for (std::size_t k = 0; k < pts.size(); ++k)
            if (out.mean_error[k] > out.envelope_C * envelope(eps_ladder[k]) * (1 + 1e-9))
                out.envelope_ok = false;
    }
    out.decreasing_beyond_2se = true;
    for (std::size_t k = 1; k < eps_ladder.size(); ++k) {
        double gap = out.mean_error[k - 1] - out.mean_error[k];
        double se = 2.0 * std::hypot(out.ses[k - 1], out.ses[k]);
        if (!(gap > se)) out.decreasing_beyond_2se = false;
    }
    return out;
}

}  // namespace hjh
