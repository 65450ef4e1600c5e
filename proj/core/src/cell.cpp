#include "hjh/cell.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace hjh {

namespace {

/**
 * The y-dependence of every shipped Hamiltonian factors through one scalar
 * coefficient: the (reshaped) potential for kinetic kinds, the speed for
 * front-propagation ones. Precomputing it makes a sweep pure arithmetic.
 */
struct CoefficientGrid {
    GridFunction c;
    bool kinetic = true;

    double H(const Vec& q, std::size_t k) const {
        if (kinetic) return 0.5 * q.norm_sq() - c[k];
        return c[k] * q.norm();
    }
};

CoefficientGrid precompute_coefficients(const RandomField& field, const HamiltonianModel& model,
                                        const GridSpec& grid) {
    CoefficientGrid cg;
    const ModelSpec& s = model.spec();
    cg.kinetic = model.kinetic();
    cg.c = GridFunction(grid);
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i) {
            Vec y = grid.node(i, j);
            if (cg.kinetic) {
                cg.c.at(i, j) = (s.kind == ModelKind::deterministic) ? 0.0 : field.value(y);
            } else if (s.kind == ModelKind::h2_speed) {
                double t = s.a_random ? std::min(1.0, std::max(0.0, field.value(y))) : 0.0;
                cg.c.at(i, j) = s.a_min + (s.a_max - s.a_min) * t;
            } else {  // deterministic one-homogeneous
                cg.c.at(i, j) = s.a0;
            }
        }
    return cg;
}

int wrap(int i, int n) { return i < 0 ? i + n : (i >= n ? i - n : i); }

struct SweepResult {
    int sweeps = 0;
    double residual = 0.0;
};

/**
 * One Gauss-Seidel Lax-Friedrichs pass over the grid in the given ordering,
 * plus the discrete residual. The gradient argument of H is clamped at
 * grad_clamp: the continuum solution satisfies |Dv| <= K_p, so the clamp
 * keeps the update monotone through boundary layers and transients without
 * moving the interior fixed point.
 */
class LfSweeper {
  public:
    LfSweeper(const CoefficientGrid& cg, const Vec& p, double delta, double alpha,
              double grad_clamp, double barrier, bool periodic)
        : cg_(cg), g_(cg.c.grid()), p_(p), delta_(delta), alpha_(alpha), clamp_(grad_clamp),
          barrier_(barrier), periodic_(periodic) {
        inv2h_ = 1.0 / (2 * g_.h);
        double asum = (g_.dim == 2 ? 2.0 : 1.0) * alpha_;
        inv_denom_ = 1.0 / (delta_ + asum / g_.h);
    }

    void sweep(GridFunction& u, int ordering) const {
        if (periodic_) {
            sweep_periodic(u, ordering);
            return;
        }
        const int nx = g_.nx, ny = g_.ny;
        const bool irev = ordering == 1 || ordering == 3;
        const bool jrev = ordering == 2 || ordering == 3;
        double* a = u.data().data();
        if (g_.dim == 1) {
            for (int ii = 1; ii < nx - 1; ++ii) {
                int i = irev ? nx - 1 - ii : ii;
                a[i] = update(a[i - 1], a[i + 1], 0, 0, i, false);
            }
            return;
        }
        for (int jj = 1; jj < ny - 1; ++jj) {
            int j = jrev ? ny - 1 - jj : jj;
            double* row = a + static_cast<std::size_t>(j) * nx;
            const double* rs = row - nx;
            const double* rn = row + nx;
            for (int ii = 1; ii < nx - 1; ++ii) {
                int i = irev ? nx - 1 - ii : ii;
                row[i] = update(row[i - 1], row[i + 1], rs[i], rn[i],
                                static_cast<std::size_t>(j) * nx + i, true);
            }
        }
    }

    double residual(const GridFunction& u) const {
        double r = 0.0;
        const int nx = g_.nx, ny = g_.ny;
        const double* a = u.data().data();
        auto nb = [&](int i, int j) {
            if (periodic_) return a[static_cast<std::size_t>(wrap(j, ny)) * nx + wrap(i, nx)];
            if (i < 0 || i >= nx || j < 0 || j >= ny) return barrier_;
            return a[static_cast<std::size_t>(j) * nx + i];
        };
        const int lo = periodic_ ? 0 : 1;
        const int jl = g_.dim == 2 ? lo : 0, jh = g_.dim == 2 ? ny - lo : 1;
        for (int j = jl; j < jh; ++j)
            for (int i = lo; i < nx - lo; ++i) {
                double ue = nb(i + 1, j), uw = nb(i - 1, j);
                double un = g_.dim == 2 ? nb(i, j + 1) : 0.0;
                double us = g_.dim == 2 ? nb(i, j - 1) : 0.0;
                std::size_t k = static_cast<std::size_t>(j) * nx + i;
                Vec grad{(ue - uw) * inv2h_, g_.dim == 2 ? (un - us) * inv2h_ : 0.0};
                double visc = alpha_ * (ue - 2 * a[k] + uw) * inv2h_;
                if (g_.dim == 2) visc += alpha_ * (un - 2 * a[k] + us) * inv2h_;
                r = std::max(r, std::abs(delta_ * a[k] + cg_.H(p_ + clamped(grad), k) - visc));
            }
        return r;
    }

  private:
    Vec clamped(Vec q) const {
        double qn = q.norm();
        if (qn > clamp_) q = q * (clamp_ / qn);
        return q;
    }

    double update(double uw, double ue, double us, double un, std::size_t k, bool two_d) const {
        Vec grad{(ue - uw) * inv2h_, two_d ? (un - us) * inv2h_ : 0.0};
        double rhs = -cg_.H(p_ + clamped(grad), k) + alpha_ * (ue + uw) * inv2h_;
        if (two_d) rhs += alpha_ * (un + us) * inv2h_;
        return rhs * inv_denom_;
    }

    void sweep_periodic(GridFunction& u, int ordering) const {
        const int nx = g_.nx, ny = g_.ny;
        const bool irev = ordering == 1 || ordering == 3;
        const bool jrev = ordering == 2 || ordering == 3;
        const int jh = g_.dim == 2 ? ny : 1;
        for (int jj = 0; jj < jh; ++jj) {
            int j = jrev ? jh - 1 - jj : jj;
            for (int ii = 0; ii < nx; ++ii) {
                int i = irev ? nx - 1 - ii : ii;
                double ue = u.at(wrap(i + 1, nx), j), uw = u.at(wrap(i - 1, nx), j);
                double un = 0, us = 0;
                if (g_.dim == 2) {
                    un = u.at(i, wrap(j + 1, ny));
                    us = u.at(i, wrap(j - 1, ny));
                }
                u.at(i, j) = update(uw, ue, us, un, g_.index(i, j), g_.dim == 2);
            }
        }
    }

    const CoefficientGrid& cg_;
    const GridSpec& g_;
    Vec p_;
    double delta_, alpha_, clamp_, barrier_;
    bool periodic_;
    double inv2h_, inv_denom_;
};

/**
 * Anderson-accelerated fixed-point iteration over 4-sweep blocks. The true
 * discrete residual gates convergence, so acceleration can only change how
 * fast the fixed point is reached, never which one.
 */
SweepResult lf_solve(GridFunction& u, const LfSweeper& sw, int max_sweeps, double tol) {
    constexpr int kDepth = 4;
    std::vector<std::vector<double>> us, gs;  // iterates and their block images

    SweepResult out;
    int sweep = 0;
    while (sweep < max_sweeps) {
        std::vector<double> u_in = u.data();
        for (int d = 0; d < 4 && sweep < max_sweeps; ++d, ++sweep) sw.sweep(u, d);
        out.sweeps = sweep;
        out.residual = sw.residual(u);
        if (out.residual < tol) return out;

        // Anderson mixing on the block map G: minimize the combined update
        // difference over the history, then take the mixed image.
        us.push_back(std::move(u_in));
        gs.push_back(u.data());
        if (us.size() > kDepth) {
            us.erase(us.begin());
            gs.erase(gs.begin());
        }
        std::size_t m = us.size();
        if (m >= 2) {
            std::size_t n = u.size();
            // f_k = g_k - u_k; solve least squares for weights summing to 1
            auto f = [&](std::size_t k, std::size_t i) { return gs[k][i] - us[k][i]; };
            std::size_t mm = m - 1;
            std::vector<double> A(mm * mm, 0.0), b(mm, 0.0);
            for (std::size_t r = 0; r < mm; ++r) {
                for (std::size_t c = 0; c < mm; ++c) {
                    double s = 0;
                    for (std::size_t i = 0; i < n; ++i)
                        s += (f(r + 1, i) - f(0, i)) * (f(c + 1, i) - f(0, i));
                    A[r * mm + c] = s;
                }
                double s = 0;
                for (std::size_t i = 0; i < n; ++i) s += (f(r + 1, i) - f(0, i)) * f(0, i);
                b[r] = -s;
            }
            // tiny dense solve with partial pivoting
            std::vector<int> piv(mm);
            bool ok = true;
            for (std::size_t c = 0; c < mm && ok; ++c) {
                std::size_t pr = c;
                for (std::size_t r = c + 1; r < mm; ++r)
                    if (std::abs(A[r * mm + c]) > std::abs(A[pr * mm + c])) pr = r;
                if (std::abs(A[pr * mm + c]) < 1e-30) {
                    ok = false;
                    break;
                }
                if (pr != c) {
                    for (std::size_t cc = 0; cc < mm; ++cc) std::swap(A[pr * mm + cc], A[c * mm + cc]);
                    std::swap(b[pr], b[c]);
                }
                for (std::size_t r = c + 1; r < mm; ++r) {
                    double fmul = A[r * mm + c] / A[c * mm + c];
                    for (std::size_t cc = c; cc < mm; ++cc) A[r * mm + cc] -= fmul * A[c * mm + cc];
                    b[r] -= fmul * b[c];
                }
            }
            if (ok) {
                std::vector<double> th(mm);
                for (std::size_t r = mm; r-- > 0;) {
                    double s = b[r];
                    for (std::size_t c = r + 1; c < mm; ++c) s -= A[r * mm + c] * th[c];
                    th[r] = s / A[r * mm + r];
                }
                double th0 = 1.0;
                for (double t : th) th0 -= t;
                double magnitude = std::abs(th0);
                for (double t : th) magnitude += std::abs(t);
                if (magnitude < 50.0) {  // reject wild extrapolations
                    std::vector<double>& cur = u.data();
                    for (std::size_t i = 0; i < n; ++i) {
                        double v = th0 * gs[0][i];
                        for (std::size_t kk = 1; kk < m; ++kk) v += th[kk - 1] * gs[kk][i];
                        cur[i] = v;
                    }
                }
            }
        }
    }
    return out;
}

GridFunction prolong(const GridFunction& coarse, const GridSpec& fine) {
    GridFunction f(fine);
    for (int j = 0; j < fine.ny; ++j)
        for (int i = 0; i < fine.nx; ++i) f.at(i, j) = coarse.interp(fine.node(i, j));
    return f;
}

}  // namespace

double compute_Kp(const HamiltonianModel& model, double v_sup, const Vec& p) {
    const ModelSpec& s = model.spec();
    double pn = p.norm();
    if (model.kinetic()) {
        // |q|^2/2 - v_sup <= |p|^2/2  =>  |q| <= sqrt(|p|^2 + 2 v_sup)
        return pn + std::sqrt(pn * pn + 2.0 * std::max(0.0, v_sup));
    }
    if (s.kind == ModelKind::h2_speed) return pn + (s.a_max / s.a_min) * pn;
    return 2.0 * pn;  // deterministic one-homogeneous: a0|q| <= a0|p|
}

double compute_Kp(const HamiltonianModel& model, const RandomField& field, const Vec& p) {
    (void)field;
    return compute_Kp(model, model.v_max(), p);
}

double compute_Pip(const HamiltonianModel& model, const RandomField& field, const Vec& p,
                   int n_probes, PipWitness* witness) {
    double Kp = compute_Kp(model, field, p);
    PipWitness best;
    double worst = 0.0;
    const int dim = model.dimension();

    // kinetic kinds: the potential cancels in the difference, one probe point suffices
    int ny_probes = model.kinetic() ? 1 : std::max(1, n_probes);
    RngStream rng(hash_mix(field.seed, 0x706970ULL));
    const Box& w = field.window;

    const int n_rad = 48, n_ang = dim == 2 ? 64 : 2;
    for (int yi = 0; yi < ny_probes; ++yi) {
        Vec y = yi == 0 ? Vec{0, 0}
                        : Vec{rng.next_in(w.lo.x, w.hi.x), dim == 2 ? rng.next_in(w.lo.y, w.hi.y) : 0.0};
        for (int sigma : {-1, 1}) {
            for (int ir = 1; ir <= n_rad; ++ir) {
                double r = Kp * ir / n_rad;
                for (int ia = 0; ia < n_ang; ++ia) {
                    Vec q = dim == 2 ? r * unit(2 * M_PI * ia / n_ang)
                                     : Vec{ia == 0 ? r : -r, 0.0};
                    double d = std::abs(eval_H_unchecked(model, field, p + q, y) -
                                        eval_H_unchecked(model, field, p + (1.0 + sigma) * q, y));
                    if (d > worst) {
                        worst = d;
                        best = {q, sigma, y};
                    }
                }
            }
        }
    }
    if (witness) *witness = best;
    return worst;
}

CellSolution solve_cell(const RandomField& field, const HamiltonianModel& model, const Vec& p,
                        double delta, const CellOptions& opts) {
    if (!(delta > 0)) throw std::invalid_argument("delta must be > 0");

    const int dim = model.dimension();
    double R;
    if (opts.periodic) {
        R = opts.window_radius > 0 ? opts.window_radius : 0.5;
    } else if (opts.window_radius > 0) {
        R = opts.window_radius;
    } else {
        double Kp0 = compute_Kp(model, field, p);
        R = std::clamp(opts.win_mult * std::max(Kp0, 1.0) / delta, opts.win_min, opts.win_cap);
    }
    // snap the radius to the grid so doubling reuses node locations
    R = std::ceil(R / opts.h) * opts.h;

    auto make_grid = [&](double hl) {
        GridSpec gl = GridSpec::centered({0, 0}, R, hl, dim);
        if (opts.periodic) {
            gl.nx -= 1;  // drop the duplicate seam nodes of the period cell
            if (dim == 2) gl.ny -= 1;
        }
        return gl;
    };

    GridSpec grid = make_grid(opts.h);
    CoefficientGrid cg = precompute_coefficients(field, model, grid);

    // per-realization potential sup governs the gradient bound and viscosity
    double v_sup = cg.kinetic ? std::max(0.0, cg.c.max_value()) : 0.0;
    double Kp = compute_Kp(model, v_sup, p);
    double grad_clamp = 1.2 * Kp + 0.3;
    double alpha = cg.kinetic ? (p.norm() + grad_clamp) : cg.c.max_value();
    alpha = std::max(alpha, 1e-6);

    // sup/inf of H(p, .) over the window
    double h_min, h_max;
    if (cg.kinetic) {
        h_min = 0.5 * p.norm_sq() - cg.c.max_value();
        h_max = 0.5 * p.norm_sq() - cg.c.min_value();
    } else {
        h_min = cg.c.min_value() * p.norm();
        h_max = cg.c.max_value() * p.norm();
    }
    const double barrier = -h_min / delta;  // constant upper barrier
    const double h_scale = std::max(std::abs(h_min), std::abs(h_max));
    const double tol = opts.tol_scale * (1.0 + h_scale);

    // coarse-to-fine initialization, then converge on the target grid
    GridFunction u;
    int total_sweeps = 0;
    double final_residual = 0.0;
    int levels = std::max(1, opts.cascade_levels);
    for (int lev = levels - 1; lev >= 0; --lev) {
        double hl = opts.h * (1 << lev);
        GridSpec gl = lev == 0 ? grid : make_grid(hl);
        if (gl.nx < 8) continue;
        CoefficientGrid cgl = lev == 0 ? std::move(cg) : precompute_coefficients(field, model, gl);
        GridFunction ul = u.size() == 0 ? GridFunction(gl, barrier) : prolong(u, gl);
        if (!opts.periodic) {
            for (int j = 0; j < gl.ny; ++j)
                for (int i = 0; i < gl.nx; ++i)
                    if (i == 0 || i == gl.nx - 1 || (dim == 2 && (j == 0 || j == gl.ny - 1)))
                        ul.at(i, j) = barrier;
        }
        LfSweeper sw(cgl, p, delta, alpha, grad_clamp, barrier, opts.periodic);
        double ltol = lev == 0 ? tol : tol * 10;
        SweepResult sr = lf_solve(ul, sw, opts.max_sweeps, ltol);
        total_sweeps += sr.sweeps;
        final_residual = sr.residual;
        u = std::move(ul);
        if (lev == 0 && sr.residual >= tol) {
            throw std::runtime_error("cell solve did not converge: residual " +
                                     std::to_string(sr.residual) + " after " +
                                     std::to_string(total_sweeps) + " sweeps");
        }
    }

    CellSolution sol;
    sol.values = std::move(u);
    sol.p = p;
    sol.delta = delta;
    sol.residual = final_residual;
    sol.window = Box::centered({0, 0}, R);
    sol.Kp = Kp;
    sol.Pip = compute_Pip(model, field, p, 1);
    sol.interior_radius = opts.periodic ? R : 0.5 * R;
    sol.sweeps = total_sweeps;
    return sol;
}

double delta_consistency(const RandomField& field, const HamiltonianModel& model, const Vec& p,
                         double delta, double eta, const CellOptions& opts) {
    if (!(delta > 0) || delta > eta) throw std::invalid_argument("requires 0 < delta <= eta");
    CellOptions o = opts;
    if (o.window_radius <= 0 && !o.periodic) {
        double Kp0 = compute_Kp(model, field, p);
        o.window_radius = std::clamp(o.win_mult * std::max(Kp0, 1.0) / delta, o.win_min, o.win_cap);
    }
    CellSolution a = solve_cell(field, model, p, delta, o);
    CellSolution b = solve_cell(field, model, p, eta, o);
    const GridSpec& g = a.grid();
    double worst = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            Vec y = g.node(i, j);
            if (!a.interior(y)) continue;
            worst = std::max(worst,
                             std::abs(delta * a.values.at(i, j) - eta * b.values.at(i, j)));
        }
    return worst;
}

double window_doubling_drift(const RandomField& field, const HamiltonianModel& model, const Vec& p,
                             double delta, const CellOptions& opts) {
    CellOptions o1 = opts;
    if (o1.window_radius <= 0) {
        double Kp0 = compute_Kp(model, field, p);
        o1.window_radius = std::clamp(o1.win_mult * std::max(Kp0, 1.0) / delta, o1.win_min, o1.win_cap);
    }
    CellOptions o2 = o1;
    o2.window_radius = 2 * o1.window_radius;

    CellSolution a = solve_cell(field, model, p, delta, o1);
    CellSolution b = solve_cell(field, model, p, delta, o2);

    const GridSpec& g = a.grid();
    double drift = 0.0, scale = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            Vec y = g.node(i, j);
            if (!a.interior(y)) continue;
            double da = delta * a.values.at(i, j);
            double db = delta * b.values.interp(y);
            drift = std::max(drift, std::abs(da - db));
            scale = std::max(scale, std::abs(db));
        }
    return drift / std::max(1.0, scale);
}

}  // namespace hjh
