#include <cstdio>
#include <cmath>
#include "hjh/cell.hpp"
using namespace hjh;
int main() {
    ModelSpec ps; ps.kind=ModelKind::h1_potential; ps.potential=PotentialKind::poisson;
    ps.intensity=1.0; ps.bump_height=0.5; ps.bump_radius=0.35;
    HamiltonianModel pm = build_model(ps);
    RandomField pf = sample_field(pm, Box::centered({0,0},300), 7);
    // check field values directly
    double vmax=0; int nanv=0;
    for (double x=-35; x<=35; x+=0.25) for (double y=-35; y<=35; y+=0.25) {
        double v = pf.value({x,y});
        if (std::isnan(v)) { if(++nanv<4) printf("field nan at %.2f %.2f\n", x,y); }
        vmax = std::max(vmax, v);
    }
    printf("field: vmax=%.4f nan=%d\n", vmax, nanv);
    double Kp = compute_Kp(pm, pf, {0,0});
    printf("Kp=%.4f v_max(model)=%.4f\n", Kp, pm.v_max());
    double Pip = compute_Pip(pm, pf, {0,0}, 1);
    printf("Pip=%.4f\n", Pip);
    return 0;
}
