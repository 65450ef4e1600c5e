#include <cstdio>
#include <cmath>
#include "hjh/metric.hpp"
#include "hjh/cell.hpp"
using namespace hjh;
int main() {
    // locate FMM cone error by angle/radius
    ModelSpec ms; ms.kind = ModelKind::h2_speed; ms.a_min = ms.a_max = 1.0;
    HamiltonianModel m = build_model(ms);
    RandomField f = sample_field(m, Box::centered({0,0},8), 1);
    GridSpec g = GridSpec::centered({0,0}, 8, 16.0/256);
    MetricSolution sol = solve_metric(f, m, 1.0, {Vec{0,0}}, g);
    double worst=0; Vec at;
    for (int j=0;j<g.ny;++j) for(int i=0;i<g.nx;++i){
        Vec y=g.node(i,j); double r=y.norm(); if(r<0.8) continue;
        double e=std::abs(sol.values.at(i,j)-r)/r;
        if(e>worst){worst=e; at=y;}
    }
    printf("worst %.4f%% at (%.3f,%.3f) r=%.3f ang=%.1fdeg m=%.4f\n",100*worst,at.x,at.y,at.norm(),
           std::atan2(at.y,at.x)*180/M_PI, sol.at(at));
    // error profile in radius bands
    for (double r0 : {0.3, 0.5, 0.8, 1.0, 1.5, 2.0, 3.0}) {
        double w2=0;
        for (int j=0;j<g.ny;++j) for(int i=0;i<g.nx;++i){
            Vec y=g.node(i,j); double r=y.norm(); if(r<r0||r>7.8) continue;
            w2=std::max(w2,std::abs(sol.values.at(i,j)-r)/r);
        }
        printf("max rel err for r in [%.1f, 7.8] = %.3f%%\n", r0, 100*w2);
    }
    // cell nan hunt: check coarse level directly
    ModelSpec ps; ps.kind=ModelKind::h1_potential; ps.potential=PotentialKind::poisson;
    ps.intensity=1.0; ps.bump_height=0.5; ps.bump_radius=0.35;
    HamiltonianModel pm = build_model(ps);
    RandomField pf = sample_field(pm, Box::centered({0,0},300), 7);
    CellOptions co; co.h=0.25; co.cascade_levels=1; co.max_sweeps=20000;
    CellSolution c = solve_cell(pf, pm, {0,0}, 0.2, co);
    printf("no-cascade: dv(0)=%.6f res=%.2e sweeps=%d\n", c.delta_v({0,0}), c.residual, c.sweeps);
    int nan_count=0; const GridSpec& cgr=c.grid();
    for (std::size_t k=0;k<c.values.size();++k) if(std::isnan(c.values[k])) nan_count++;
    printf("nan nodes: %d / %zu\n", nan_count, c.values.size());
    return 0;
}
