#include <chrono>
#include <cstdio>

#include "hjh/cell.hpp"
#include "hjh/metric.hpp"
#include "hjh/model.hpp"

using namespace hjh;
using Clock = std::chrono::steady_clock;

static double secs(Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
}

int main() {
    // --- FMM vs Euclidean cone on 256^2 ---
    {
        ModelSpec ms;
        ms.kind = ModelKind::h2_speed;
        ms.a_min = ms.a_max = 1.0;
        HamiltonianModel m = build_model(ms);
        Box w = Box::centered({0, 0}, 8);
        RandomField f = sample_field(m, w, 1);
        GridSpec g = GridSpec::centered({0, 0}, 8, 16.0 / 256);
        auto t0 = Clock::now();
        MetricSolution sol = solve_metric(f, m, 1.0, {Vec{0, 0}}, g);
        auto t1 = Clock::now();
        double worst = 0;
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                Vec y = g.node(i, j);
                double r = y.norm();
                if (r < 0.8) continue;  // interior = away from source
                worst = std::max(worst, std::abs(sol.values.at(i, j) - r) / r);
            }
        printf("FMM cone 256^2: %.3fs, max rel err (r>0.8) = %.4f%%\n", secs(t0, t1), 100 * worst);
    }
    // --- 1D quadrature oracle convergence ---
    {
        ModelSpec ms;
        ms.kind = ModelKind::h1_potential;
        ms.dimension = 1;
        ms.potential = PotentialKind::periodic;
        ms.amp = 1.0;
        HamiltonianModel m = build_model(ms);
        for (double h : {0.01, 0.005, 0.0025}) {
            Box w{{-2, 0}, {2, 0}};
            RandomField f = sample_field(m, w, 1);
            GridSpec g = GridSpec::make_1d(-2, 2, h);
            MetricSolution sol = solve_metric(f, m, 1.0, {Vec{0, 0}}, g);
            // oracle: cumulative trapezoid of f at fine res
            double worst = 0;
            int K = 40000;
            double acc = 0, prev = eikonal_speed(m, f, 1.0, {0, 0});
            double step = 2.0 / K;
            std::vector<double> oracle(K + 1);
            for (int k = 1; k <= K; ++k) {
                double fy = eikonal_speed(m, f, 1.0, {k * step, 0});
                acc += 0.5 * (prev + fy) * step;
                oracle[k] = acc;
                prev = fy;
            }
            for (int i = 0; i < g.nx; ++i) {
                double x = g.node(i, 0).x;
                if (x < 0.05 || x > 1.95) continue;
                int k = (int)std::round(x / step);
                worst = std::max(worst, std::abs(sol.values.at(i, 0) - oracle[k]));
            }
            double at1 = sol.at({1, 0});
            printf("1D h=%.4f: max err=%.6f  err(1)=%.2e\n", h, worst, std::abs(at1 - 1.719693200204476));
        }
    }
    // --- cell solver: deterministic + Poisson, timing + window doubling ---
    {
        ModelSpec ms;
        ms.kind = ModelKind::deterministic;
        HamiltonianModel m = build_model(ms);
        RandomField f = sample_field(m, Box::centered({0, 0}, 50), 1);
        CellOptions co;
        co.h = 0.25;
        auto t0 = Clock::now();
        CellSolution c = solve_cell(f, m, {1, 0}, 0.1, co);
        auto t1 = Clock::now();
        printf("cell det: dv(0)=%.6f (want -0.5), res=%.2e sweeps=%d %.2fs R=%.0f\n",
               c.delta_v({0, 0}), c.residual, c.sweeps, secs(t0, t1), c.window.hi.x);
    }
    {
        ModelSpec ms;
        ms.kind = ModelKind::h1_potential;
        ms.potential = PotentialKind::poisson;
        ms.intensity = 1.0;
        ms.bump_height = 0.5;
        ms.bump_radius = 0.35;
        HamiltonianModel m = build_model(ms);
        printf("model v_max (measured) = %.3f\n", m.v_max());
        RandomField f = sample_field(m, Box::centered({0, 0}, 300), 7);
        CellOptions co;
        co.h = 0.25;
        for (double delta : {0.2, 0.1}) {
            for (Vec p : {Vec{0, 0}, Vec{1, 0}}) {
                auto t0 = Clock::now();
                CellSolution c = solve_cell(f, m, p, delta, co);
                auto t1 = Clock::now();
                printf("cell poisson d=%.2f p=(%.0f,%.0f): dv(0)=%.5f res=%.1e sweeps=%d %.2fs R=%.0f\n",
                       delta, p.x, p.y, c.delta_v({0, 0}), c.residual, c.sweeps, secs(t0, t1),
                       c.window.hi.x);
            }
        }
        auto t0 = Clock::now();
        double drift = window_doubling_drift(f, m, {1, 0}, 0.2, co);
        auto t1 = Clock::now();
        printf("window doubling drift (p=(1,0), d=0.2): %.2e  (%.1fs)\n", drift, secs(t0, t1));
    }
    return 0;
}
