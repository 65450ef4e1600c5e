#include "hjh/metric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace hjh {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct HeapEntry {
    double value;
    int i, j;
    bool operator>(const HeapEntry& o) const { return value > o.value; }
};

using MinHeap = std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<HeapEntry>>;

/** Precompute the eikonal gradient bound f_mu on every node. */
GridFunction precompute_speed(const RandomField& field, const HamiltonianModel& model, double mu,
                              const GridSpec& grid) {
    GridFunction f(grid);
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i) f.at(i, j) = eikonal_speed(model, field, mu, grid.node(i, j));
    return f;
}

std::vector<Vec> snap_sources(const std::vector<Vec>& source, const GridSpec& grid) {
    if (source.empty()) throw std::invalid_argument("source must be nonempty");
    std::vector<Vec> snapped;
    snapped.reserve(source.size());
    for (const Vec& s : source) {
        if (!grid.bounds().contains(s, grid.dim))
            throw std::invalid_argument("source must intersect the grid");
        int i, j;
        grid.nearest(s, i, j);
        snapped.push_back(grid.node(i, j));
    }
    return snapped;
}

/** Godunov upwind update from the accepted neighbor values a (x) and b (y). */
double godunov_update(double a, double b, double fh) {
    if (a > b) std::swap(a, b);
    if (b == kInf || b - a >= fh) return a + fh;
    double s = a + b, d = a - b;
    return 0.5 * (s + std::sqrt(2.0 * fh * fh - d * d));
}

}  // namespace

std::size_t ReachableSet::count() const {
    std::size_t n = 0;
    for (auto m : mask) n += m != 0;
    return n;
}

MetricSolution solve_metric(const RandomField& field, const HamiltonianModel& model, double mu,
                            const std::vector<Vec>& source, const GridSpec& grid) {
    if (!(mu > 0)) throw std::invalid_argument("mu must be > 0");
    std::vector<Vec> sources = snap_sources(source, grid);

    GridFunction f = precompute_speed(field, model, mu, grid);
    GridFunction m(grid, kInf);
    std::vector<std::uint8_t> accepted(grid.size(), 0);
    MinHeap heap;

    const double h = grid.h;

    auto push_trial = [&](int i, int j, double v) {
        if (v < m.at(i, j)) {
            m.at(i, j) = v;
            heap.push({v, i, j});
        }
    };

    // source nodes are pinned to zero
    for (const Vec& s : sources) {
        int i, j;
        grid.nearest(s, i, j);
        m.at(i, j) = 0.0;
        heap.push({0.0, i, j});
    }

    // For an isolated point source, seed a near-field disc with ray-integrated
    // values; this keeps the corner singularity from polluting the first-order
    // scheme. The disc radius adapts to how much the speed varies locally, so
    // random media fall back to a small disc.
    if (sources.size() == 1) {
        const Vec s = sources[0];
        int si, sj;
        grid.nearest(s, si, sj);
        double f_src = eikonal_speed(model, field, mu, s);
        int r_cells = std::min({16, grid.nx / 4, grid.dim == 2 ? grid.ny / 4 : 16});
        while (r_cells > 2) {
            double fmin = f_src, fmax = f_src;
            for (int k = 0; k < 16; ++k) {
                Vec y = grid.dim == 2 ? s + (r_cells * h) * unit(2 * M_PI * k / 16)
                                      : s + Vec{(k % 2 ? 1.0 : -1.0) * r_cells * h, 0};
                double fy = eikonal_speed(model, field, mu, y);
                fmin = std::min(fmin, fy);
                fmax = std::max(fmax, fy);
            }
            if ((fmax - fmin) * r_cells * h <= 0.2 * h * f_src) break;
            r_cells /= 2;
        }
        for (int dj = -r_cells; dj <= r_cells; ++dj)
            for (int di = -r_cells; di <= r_cells; ++di) {
                if (di == 0 && dj == 0) continue;
                int i = si + di, j = sj + (grid.dim == 2 ? dj : 0);
                if (grid.dim == 1 && dj != 0) continue;
                if (!grid.in_range(i, j)) continue;
                Vec y = grid.node(i, j);
                double d = dist(y, s);
                if (d > r_cells * h + 1e-12) continue;
                double fm = eikonal_speed(model, field, mu, (y + s) * 0.5);
                double fe = eikonal_speed(model, field, mu, y);
                push_trial(i, j, d * (f_src + 4 * fm + fe) / 6.0);  // Simpson along the ray
            }
    }

    const int di[4] = {1, -1, 0, 0};
    const int dj[4] = {0, 0, 1, -1};
    const int n_nb = grid.dim == 2 ? 4 : 2;

    while (!heap.empty()) {
        HeapEntry e = heap.top();
        heap.pop();
        std::size_t k = grid.index(e.i, e.j);
        if (accepted[k] || e.value > m.at(e.i, e.j)) continue;  // stale entry
        accepted[k] = 1;

        for (int n = 0; n < n_nb; ++n) {
            int i = e.i + di[n], j = e.j + dj[n];
            if (!grid.in_range(i, j) || accepted[grid.index(i, j)]) continue;
            double a = kInf, b = kInf;
            if (i > 0 && accepted[grid.index(i - 1, j)]) a = std::min(a, m.at(i - 1, j));
            if (i < grid.nx - 1 && accepted[grid.index(i + 1, j)]) a = std::min(a, m.at(i + 1, j));
            if (grid.dim == 2) {
                if (j > 0 && accepted[grid.index(i, j - 1)]) b = std::min(b, m.at(i, j - 1));
                if (j < grid.ny - 1 && accepted[grid.index(i, j + 1)]) b = std::min(b, m.at(i, j + 1));
            }
            double v = godunov_update(a, b, f.at(i, j) * h);
            push_trial(i, j, v);
        }
    }

    MetricSolution sol;
    sol.values = std::move(m);
    sol.source = std::move(sources);
    sol.mu = mu;
    sol.f_min = f.min_value();
    sol.f_max = f.max_value();
    sol.h = h;
    sol.model = model;
    sol.field = field;
    return sol;
}

GridFunction dijkstra_oracle(const RandomField& field, const HamiltonianModel& model, double mu,
                             const std::vector<Vec>& source, const GridSpec& grid,
                             int neighborhood) {
    if (!(mu > 0)) throw std::invalid_argument("mu must be > 0");
    if (neighborhood != 8 && neighborhood != 16)
        throw std::invalid_argument("neighborhood must be 8 or 16");
    std::vector<Vec> sources = snap_sources(source, grid);

    GridFunction f = precompute_speed(field, model, mu, grid);
    GridFunction m(grid, kInf);
    std::vector<std::uint8_t> done(grid.size(), 0);
    MinHeap heap;

    for (const Vec& s : sources) {
        int i, j;
        grid.nearest(s, i, j);
        m.at(i, j) = 0.0;
        heap.push({0.0, i, j});
    }

    std::vector<std::pair<int, int>> steps;
    if (grid.dim == 1) {
        steps = {{1, 0}, {-1, 0}};
    } else {
        steps = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
        if (neighborhood == 16)
            for (auto [a, b] : {std::pair{2, 1}, {2, -1}, {-2, 1}, {-2, -1},
                                std::pair{1, 2}, {1, -2}, {-1, 2}, {-1, -2}})
                steps.push_back({a, b});
    }

    const double h = grid.h;
    while (!heap.empty()) {
        HeapEntry e = heap.top();
        heap.pop();
        std::size_t k = grid.index(e.i, e.j);
        if (done[k] || e.value > m.at(e.i, e.j)) continue;
        done[k] = 1;
        double fu = f.at(e.i, e.j);
        for (auto [di, dj] : steps) {
            int i = e.i + di, j = e.j + dj;
            if (!grid.in_range(i, j) || done[grid.index(i, j)]) continue;
            double len = h * std::hypot(static_cast<double>(di), static_cast<double>(dj));
            double w = len * 0.5 * (fu + f.at(i, j));
            double v = e.value + w;
            if (v < m.at(i, j)) {
                m.at(i, j) = v;
                heap.push({v, i, j});
            }
        }
    }
    return m;
}

double lattice_metrication_constant(int neighborhood) {
    std::vector<std::pair<int, int>> gen;
    if (neighborhood == 8)
        gen = {{1, 0}, {1, 1}, {0, 1}};
    else if (neighborhood == 16)
        gen = {{1, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 1}};
    else
        throw std::invalid_argument("neighborhood must be 8 or 16");

    // max over directions of the cheapest nonnegative two-step decomposition
    double worst = 1.0;
    const int n_angles = 4096;
    for (int k = 0; k <= n_angles; ++k) {
        double th = 0.5 * M_PI * k / n_angles;
        double ex = std::cos(th), ey = std::sin(th);
        double best = kInf;
        for (std::size_t a = 0; a < gen.size(); ++a)
            for (std::size_t b = 0; b < gen.size(); ++b) {
                if (a == b) continue;
                double ax = gen[a].first, ay = gen[a].second;
                double bx = gen[b].first, by = gen[b].second;
                double det = ax * by - ay * bx;
                if (std::abs(det) < 1e-12) continue;
                double s = (ex * by - ey * bx) / det;
                double t = (ax * ey - ay * ex) / det;
                if (s < -1e-15 || t < -1e-15) continue;
                best = std::min(best, s * std::hypot(ax, ay) + t * std::hypot(bx, by));
            }
        worst = std::max(worst, best);
    }
    return worst;
}

ReachableSet reachable_set(const MetricSolution& sol, double t) {
    if (t < 0) throw std::invalid_argument("t must be >= 0");
    ReachableSet r;
    r.grid = sol.grid();
    r.t = t;
    r.mu = sol.mu;
    r.mask.resize(r.grid.size(), 0);
    for (std::size_t k = 0; k < r.mask.size(); ++k) r.mask[k] = sol.values[k] <= t ? 1 : 0;
    return r;
}

bool locality_check(const RandomField& field, const HamiltonianModel& model, double mu, double t,
                    std::uint64_t seed_perturb, const GridSpec& grid, int n_bumps,
                    double bump_height, double bump_radius) {
    // source at the origin; grids used for this check are centered on it
    MetricSolution base = solve_metric(field, model, mu, {Vec{0, 0}}, grid);
    ReachableSet rt = reachable_set(base, t);

    // collect reachable nodes once; candidate bumps must clear them by 1+h
    std::vector<Vec> rt_nodes;
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i)
            if (rt.at(i, j)) rt_nodes.push_back(grid.node(i, j));

    const double clearance = 1.0 + grid.h + bump_radius;
    RngStream rng(seed_perturb);
    std::vector<BumpSetField::Bump> bumps;
    Box b = grid.bounds();
    int attempts = 0;
    while (static_cast<int>(bumps.size()) < n_bumps && attempts < 400) {
        ++attempts;
        Vec c{rng.next_in(b.lo.x, b.hi.x), grid.dim == 2 ? rng.next_in(b.lo.y, b.hi.y) : 0.0};
        double dmin = kInf;
        for (const Vec& y : rt_nodes) dmin = std::min(dmin, dist(c, y));
        if (dmin > clearance) bumps.push_back({c, bump_height, bump_radius});
    }
    if (bumps.empty())
        throw std::invalid_argument(
            "perturbation region overlaps the dilated reachable set; enlarge the grid or lower t");

    RandomField perturbed = field;
    perturbed.values = std::make_shared<SumField>(
        field.values, std::make_shared<BumpSetField>(std::move(bumps)));

    MetricSolution alt = solve_metric(perturbed, model, mu, base.source, grid);

    double tol = 1e-10 * (1.0 + t);
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i)
            if (rt.at(i, j) && std::abs(alt.values.at(i, j) - base.values.at(i, j)) > tol)
                return false;
    return true;
}

std::vector<Vec> circular_shell(const GridSpec& grid, const Vec& center, double r) {
    std::vector<Vec> shell;
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i) {
            double d = dist(grid.node(i, j), center);
            if (d >= r - grid.h * 0.5 && d < r + grid.h * 0.5) shell.push_back(grid.node(i, j));
        }
    return shell;
}

double dpp_check(const MetricSolution& sol, const std::vector<Vec>& shell, const Vec& y) {
    if (shell.empty()) throw std::invalid_argument("shell must be nonempty");
    if (sol.source.size() != 1)
        throw std::invalid_argument("the shell residual is defined for a point source");
    const Vec x = sol.source[0];

    // basic separation check for radial shells: x strictly inside, y outside
    double rmin = kInf, rmax = 0.0;
    for (const Vec& z : shell) {
        rmin = std::min(rmin, dist(z, x));
        rmax = std::max(rmax, dist(z, x));
    }
    if (!(dist(y, x) > rmax + sol.h) || rmin < sol.h)
        throw std::invalid_argument("shell does not separate the source from y");

    // m(y,z) = m(z,y) for even Hamiltonians; one extra solve from y serves all z
    MetricSolution from_y = solve_metric(sol.field, sol.model, sol.mu, {y}, sol.grid());

    double best = kInf;
    for (const Vec& z : shell) best = std::min(best, from_y.at(z) + sol.at(z));
    return std::abs(sol.at(y) - best);
}

}  // namespace hjh
