#include "hjh/effective.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace hjh {

namespace {

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

double se_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double m = mean_of(v);
    double s2 = 0.0;
    for (double x : v) s2 += (x - m) * (x - m);
    return std::sqrt(s2 / (v.size() - 1) / v.size());
}

/**
 * One metric solve from the origin sized to cover radius t_max; retries with
 * a wider window if the target values are not decided before the boundary.
 */
MetricSolution solve_covering(const HamiltonianModel& model, double mu, double t_max,
                              std::uint64_t seed, const MetricRunOptions& opts) {
    double factor = opts.window_factor;
    for (int attempt = 0; attempt < 4; ++attempt) {
        double radius = factor * t_max + opts.window_pad;
        GridSpec grid = GridSpec::centered({0, 0}, radius, opts.h, model.dimension());
        if (grid.size() > opts.max_nodes)
            throw std::invalid_argument("t ladder needs a window of radius " +
                                        std::to_string(radius) + " which exceeds the grid budget");
        Box window = Box::centered({0, 0}, radius + 2.0);
        RandomField field = sample_field(model, window, seed);
        MetricSolution sol = solve_metric(field, model, mu, {Vec{0, 0}}, grid);

        // values at |y| <= t_max are final iff no boundary node is cheaper
        double m_edge = std::numeric_limits<double>::infinity();
        const GridSpec& g = sol.grid();
        for (int i = 0; i < g.nx; ++i) {
            m_edge = std::min({m_edge, sol.values.at(i, 0), sol.values.at(i, g.ny - 1)});
        }
        for (int j = 0; j < g.ny; ++j) {
            m_edge = std::min({m_edge, sol.values.at(0, j), sol.values.at(g.nx - 1, j)});
        }
        double m_target = 0.0;
        for (double th = 0; th < 2 * M_PI; th += M_PI / 8)
            m_target = std::max(m_target, sol.at(t_max * unit(model.dimension() == 2 ? th : 0.0)));
        if (m_edge > m_target) return sol;
        factor *= 1.3;
    }
    throw std::runtime_error("could not contain the reachable set; speed contrast too large");
}

}  // namespace

MbarEstimate mbar_estimate(const HamiltonianModel& model, double mu, const Vec& direction,
                           const std::vector<double>& t_ladder, int n_seeds,
                           std::uint64_t base_seed, const MetricRunOptions& opts) {
    if (!(mu >= kMuFloor)) throw std::invalid_argument("mu must be >= the mu floor");
    if (n_seeds < 4) throw std::invalid_argument("need at least 4 seeds");
    for (std::size_t k = 1; k < t_ladder.size(); ++k)
        if (!(t_ladder[k] > t_ladder[k - 1]))
            throw std::invalid_argument("t ladder must be increasing");

    Vec e = direction * (1.0 / direction.norm());
    double t_max = t_ladder.back();

    std::vector<std::vector<double>> samples(t_ladder.size());
    for (int s = 0; s < n_seeds; ++s) {
        MetricSolution sol =
            solve_covering(model, mu, t_max, replica_seed(base_seed, experiment_id("mbar"), s), opts);
        for (std::size_t k = 0; k < t_ladder.size(); ++k)
            samples[k].push_back(sol.at(t_ladder[k] * e) / t_ladder[k]);
    }

    MbarEstimate est;
    est.mu = mu;
    est.direction = e;
    est.t_ladder = t_ladder;
    est.n_seeds = n_seeds;
    est.fekete_upper = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < t_ladder.size(); ++k) {
        est.means.push_back(mean_of(samples[k]));
        est.ses.push_back(se_of(samples[k]));
        est.fekete_upper = std::min(est.fekete_upper, est.means[k] + est.ses[k]);
    }
    est.value = est.means.back();
    return est;
}

HbarEstimate hbar_from_metric(const HamiltonianModel& model, const Vec& p, double mu_lo,
                              double mu_hi, int n_directions, double t, int n_seeds,
                              std::uint64_t base_seed, const MetricRunOptions& opts) {
    if (model.dimension() == 1) n_directions = 2;
    mu_lo = std::max(mu_lo, kMuFloor);

    // margin(mu) = min over directions of mean_seeds m_mu(t e)/t - p.e
    auto margin = [&](double mu, double* se_out = nullptr) {
        std::vector<std::vector<double>> per_dir(n_directions);
        for (int s = 0; s < n_seeds; ++s) {
            MetricSolution sol = solve_covering(
                model, mu, t, replica_seed(base_seed, experiment_id("hbar_metric"), s), opts);
            for (int k = 0; k < n_directions; ++k) {
                Vec e = model.dimension() == 2 ? unit(2 * M_PI * k / n_directions)
                                               : Vec{k == 0 ? 1.0 : -1.0, 0.0};
                per_dir[k].push_back(sol.at(t * e) / t);
            }
        }
        double worst = std::numeric_limits<double>::infinity();
        double worst_se = 0.0;
        for (int k = 0; k < n_directions; ++k) {
            Vec e = model.dimension() == 2 ? unit(2 * M_PI * k / n_directions)
                                           : Vec{k == 0 ? 1.0 : -1.0, 0.0};
            double g = mean_of(per_dir[k]) - p.dot(e);
            if (g < worst) {
                worst = g;
                worst_se = se_of(per_dir[k]);
            }
        }
        if (se_out) *se_out = worst_se;
        return worst;
    };

    HbarEstimate est;
    est.p = p;
    est.route = HbarRoute::metric;
    est.n_seeds = n_seeds;
    est.base_seed = base_seed;

    double se_lo = 0.0;
    double g_lo = margin(mu_lo, &se_lo);
    if (g_lo >= 0) {
        // flat spot: the predicate already holds at the floor
        est.value = 0.0;
        est.ci_low = 0.0;
        est.ci_high = mu_lo;
        est.bisect_tol = mu_lo;
        return est;
    }
    double g_hi = margin(mu_hi);
    if (g_hi < 0) throw std::invalid_argument("mu bracket does not contain a sign change");

    double lo = mu_lo, hi = mu_hi;
    double tol = 1e-3 * (hi - lo);
    est.bisect_tol = tol;
    double g_at_lo = g_lo, g_at_hi = g_hi;
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        double g = margin(mid);
        if (g >= 0) {
            hi = mid;
            g_at_hi = g;
        } else {
            lo = mid;
            g_at_lo = g;
        }
    }
    double se_m = 0.0;
    double g_final = margin(0.5 * (lo + hi), &se_m);
    (void)g_final;

    est.value = 0.5 * (lo + hi);
    // map margin noise and discretization slack through the local slope
    double slope = (g_at_hi - g_at_lo) / std::max(1e-12, hi - lo);
    if (!(slope > 1e-9)) slope = 1e-9;
    double disc = 0.009 * (std::abs(p.norm()) * t + est.value * t) / t;  // first-order solver slack
    double half_width = 0.5 * (hi - lo) + (se_m + disc) / slope;
    est.ci_low = std::max(0.0, est.value - half_width);
    est.ci_high = est.value + half_width;
    return est;
}

namespace {

/** Aitken extrapolation of a ladder tail; falls back to the last value. */
double extrapolate_ladder(const std::vector<double>& deltas, const std::vector<double>& ys,
                          double* correction = nullptr) {
    std::size_t n = ys.size();
    if (correction) *correction = 0.0;
    if (n >= 3) {
        double y1 = ys[n - 3], y2 = ys[n - 2], y3 = ys[n - 1];
        double d = (y1 - y2) - (y2 - y3);
        if (std::abs(d) > 1e-14 * (std::abs(y1) + 1)) {
            double ait = y3 - (y2 - y3) * (y2 - y3) / d;
            // only trust interpolation-like corrections
            if (std::abs(ait - y3) < std::abs(y1 - y3) + 1e-12) {
                if (correction) *correction = std::abs(ait - y3);
                return ait;
            }
        }
    }
    if (n >= 2) {
        // linear in delta through the last two rungs
        double d1 = deltas[n - 2], d2 = deltas[n - 1];
        double y0 = ys[n - 1] + (ys[n - 2] - ys[n - 1]) * (0.0 - d2) / (d1 - d2);
        if (correction) *correction = std::abs(y0 - ys[n - 1]);
        return y0;
    }
    return ys.back();
}

}  // namespace

HbarEstimate hbar_from_cell(const HamiltonianModel& model, const Vec& p,
                            const std::vector<double>& delta_ladder, int n_seeds,
                            std::uint64_t base_seed, const CellOptions& opts) {
    for (std::size_t k = 1; k < delta_ladder.size(); ++k)
        if (!(delta_ladder[k] < delta_ladder[k - 1]))
            throw std::invalid_argument("delta ladder must be decreasing");
    if (delta_ladder.empty()) throw std::invalid_argument("delta ladder must be nonempty");

    bool random = model.kind() != ModelKind::deterministic &&
                  model.spec().potential != PotentialKind::zero &&
                  model.spec().potential != PotentialKind::periodic &&
                  model.spec().potential != PotentialKind::quasiperiodic;
    if (model.kind() == ModelKind::h2_speed && !model.spec().a_random) random = false;
    int seeds = random ? n_seeds : 1;

    std::vector<double> extrapolated;
    double worst_corr = 0.0;
    for (int s = 0; s < seeds; ++s) {
        RandomField field = sample_field(
            model, Box::centered({0, 0}, 1e6), replica_seed(base_seed, experiment_id("hbar_cell"), s));
        std::vector<double> ys;
        for (double delta : delta_ladder) {
            CellSolution sol = solve_cell(field, model, p, delta, opts);
            ys.push_back(-sol.delta_v({0, 0}));
        }
        double corr = 0.0;
        extrapolated.push_back(extrapolate_ladder(delta_ladder, ys, &corr));
        worst_corr = std::max(worst_corr, corr);
    }

    HbarEstimate est;
    est.p = p;
    est.route = HbarRoute::cell;
    est.n_seeds = seeds;
    est.base_seed = base_seed;
    est.delta_ladder = delta_ladder;
    est.value = mean_of(extrapolated);
    double half = 2.0 * se_of(extrapolated) + 0.5 * worst_corr + 1e-4;
    est.ci_low = est.value - half;
    est.ci_high = est.value + half;
    return est;
}

std::vector<FeketeBound> fekete_extrapolate(
    const std::vector<std::pair<double, double>>& samples,
    const std::vector<std::pair<double, double>>& delta_table) {
    if (samples.empty()) throw std::invalid_argument("no samples");
    for (std::size_t k = 1; k < delta_table.size(); ++k) {
        if (!(delta_table[k].first > delta_table[k - 1].first))
            throw std::invalid_argument("Delta table abscissae must be increasing");
        if (delta_table[k].second < delta_table[k - 1].second - 1e-12)
            throw std::invalid_argument("Delta must be nondecreasing");
    }

    // Delta(t) from the table: linear inside, power-fit growth beyond
    double growth_C = 0.0, growth_q = 0.0;
    bool all_zero = true;
    for (auto& [s, d] : delta_table) all_zero = all_zero && d == 0.0;
    if (!delta_table.empty() && !all_zero) {
        std::vector<double> lx, ly;
        std::size_t half = delta_table.size() / 2;
        for (std::size_t k = half; k < delta_table.size(); ++k) {
            if (delta_table[k].second > 0 && delta_table[k].first > 0) {
                lx.push_back(std::log(delta_table[k].first));
                ly.push_back(std::log(delta_table[k].second));
            }
        }
        if (lx.size() >= 2) {
            double n = lx.size(), sx = 0, sy = 0, sxx = 0, sxy = 0;
            for (std::size_t k = 0; k < lx.size(); ++k) {
                sx += lx[k];
                sy += ly[k];
                sxx += lx[k] * lx[k];
                sxy += lx[k] * ly[k];
            }
            growth_q = (n * sxy - sx * sy) / (n * sxx - sx * sx);
            growth_C = std::exp((sy - growth_q * sx) / n);
        } else {
            growth_q = 0.0;
            growth_C = delta_table.back().second;
        }
        if (growth_q >= 0.95)
            throw std::invalid_argument(
                "Delta grows too fast: the tail integral of Delta(s)/s^2 diverges");
    }

    auto delta_at = [&](double t) -> double {
        if (delta_table.empty() || all_zero) return 0.0;
        if (t <= delta_table.front().first) return delta_table.front().second;
        if (t >= delta_table.back().first) return growth_C * std::pow(t, growth_q);
        auto it = std::lower_bound(delta_table.begin(), delta_table.end(), t,
                                   [](auto& a, double b) { return a.first < b; });
        std::size_t k = static_cast<std::size_t>(it - delta_table.begin());
        double t0 = delta_table[k - 1].first, t1 = delta_table[k].first;
        double d0 = delta_table[k - 1].second, d1 = delta_table[k].second;
        return d0 + (d1 - d0) * (t - t0) / (t1 - t0);
    };

    // exact integral of the piecewise-linear Delta(s)/s^2 on [a, b]
    auto segment_integral = [](double a, double b, double da, double db) {
        if (b <= a) return 0.0;
        double slope = (db - da) / (b - a);
        double inter = da - slope * a;  // Delta(s) = inter + slope s
        return inter * (1.0 / a - 1.0 / b) + slope * std::log(b / a);
    };

    auto tail_integral = [&](double from) -> double {
        if (delta_table.empty() || all_zero) return 0.0;
        double total = 0.0;
        double s_max = delta_table.back().first;
        if (from < s_max) {
            // table part
            double prev_s = from, prev_d = delta_at(from);
            for (auto& [s, d] : delta_table) {
                if (s <= from) continue;
                total += segment_integral(prev_s, s, prev_d, d);
                prev_s = s;
                prev_d = d;
            }
            from = s_max;
        }
        // power tail: integral of C s^{q-2} from `from`
        total += growth_C * std::pow(from, growth_q - 1.0) / (1.0 - growth_q);
        return total;
    };

    std::vector<FeketeBound> out;
    for (auto& [t, ft] : samples) {
        if (!(t > 0)) throw std::invalid_argument("sample abscissae must be positive");
        out.push_back({t, ft / t + delta_at(t) / t - 4.0 * tail_integral(2.0 * t)});
    }
    return out;
}

}  // namespace hjh
