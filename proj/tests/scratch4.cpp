#include <chrono>
#include <cstdio>
#include "hjh/cell.hpp"
using namespace hjh;
using Clock = std::chrono::steady_clock;
static double secs(Clock::time_point a, Clock::time_point b){return std::chrono::duration<double>(b-a).count();}
int main() {
    ModelSpec ms; ms.kind=ModelKind::h1_potential; ms.potential=PotentialKind::poisson;
    ms.intensity=1.0; ms.bump_height=0.5; ms.bump_radius=0.35;
    HamiltonianModel m = build_model(ms);
    RandomField f = sample_field(m, Box::centered({0,0},600), 7);
    CellOptions co; co.h=0.25;
    for (double delta : {0.2, 0.1, 0.05}) {
        for (Vec p : {Vec{0,0}, Vec{1,0}}) {
            auto t0=Clock::now();
            CellSolution c = solve_cell(f, m, p, delta, co);
            auto t1=Clock::now();
            printf("d=%.2f p=(%.0f,%.0f): dv0=%.5f res=%.1e sw=%d %.2fs R=%.0f\n",
                   delta, p.x, p.y, c.delta_v({0,0}), c.residual, c.sweeps, secs(t0,t1), c.window.hi.x);
        }
    }
    // drift vs window radius at delta=0.2, p=(1,0) and p=(0,0)
    for (Vec p : {Vec{1,0}, Vec{0,0}}) {
        for (double R : {30.0, 60.0, 90.0, 120.0}) {
            CellOptions o = co; o.window_radius = R;
            auto t0=Clock::now();
            double dr = window_doubling_drift(f, m, p, 0.2, o);
            auto t1=Clock::now();
            printf("drift p=(%.0f,%.0f) R=%.0f: %.3e (%.1fs)\n", p.x, p.y, R, dr, secs(t0,t1));
        }
    }
    return 0;
}
