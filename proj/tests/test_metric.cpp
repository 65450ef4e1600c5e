#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hjh/metric.hpp"
#include "hjh/rng.hpp"

using namespace hjh;

namespace {

HamiltonianModel unit_speed_model() {
    ModelSpec s;
    s.kind = ModelKind::h2_speed;
    s.a_min = s.a_max = 1.0;
    return build_model(s);
}

HamiltonianModel poisson_model(double height = 0.8, double intensity = 1.0) {
    ModelSpec s;
    s.kind = ModelKind::h1_potential;
    s.potential = PotentialKind::poisson;
    s.bump_height = height;
    s.intensity = intensity;
    s.bump_radius = 0.35;
    return build_model(s);
}

HamiltonianModel periodic_1d_model() {
    ModelSpec s;
    s.kind = ModelKind::h1_potential;
    s.dimension = 1;
    s.potential = PotentialKind::periodic;
    s.amp = 1.0;
    s.period = 1.0;
    return build_model(s);
}

/** Cumulative trapezoid integral of the 1d eikonal speed, the test oracle. */
std::vector<double> quadrature_oracle_1d(const HamiltonianModel& m, const RandomField& f,
                                         double mu, double x_max, int n) {
    std::vector<double> I(n + 1, 0.0);
    double step = x_max / n;
    double prev = eikonal_speed(m, f, mu, {0, 0});
    for (int k = 1; k <= n; ++k) {
        double fk = eikonal_speed(m, f, mu, {k * step, 0});
        I[k] = I[k - 1] + 0.5 * (prev + fk) * step;
        prev = fk;
    }
    return I;
}

}  // namespace

TEST_CASE("unit speed point source: the Euclidean cone") {
    HamiltonianModel m = unit_speed_model();
    RandomField f = sample_field(m, Box::centered({0, 0}, 8), 1);
    GridSpec g = GridSpec::centered({0, 0}, 6, 6.0 / 128);
    MetricSolution sol = solve_metric(f, m, 1.0, {Vec{0, 0}}, g);
    CHECK(sol.at({3, 4}) == doctest::Approx(5.0).epsilon(0.02));
    CHECK(sol.at({0, 0}) == 0.0);
    CHECK(sol.f_min == doctest::Approx(1.0));
    CHECK(sol.f_max == doctest::Approx(1.0));
}

TEST_CASE("solver rejects bad inputs") {
    HamiltonianModel m = unit_speed_model();
    RandomField f = sample_field(m, Box::centered({0, 0}, 8), 1);
    GridSpec g = GridSpec::centered({0, 0}, 4, 0.1);
    CHECK_THROWS_AS(solve_metric(f, m, -1.0, {Vec{0, 0}}, g), std::invalid_argument);
    CHECK_THROWS_AS(solve_metric(f, m, 1.0, {}, g), std::invalid_argument);
    CHECK_THROWS_AS(solve_metric(f, m, 1.0, {Vec{100, 0}}, g), std::invalid_argument);
}

TEST_CASE("1d quadrature oracle: value, bounds and first-order convergence") {
    HamiltonianModel m = periodic_1d_model();
    Box w{{-3, 0}, {3, 0}};
    RandomField f = sample_field(m, w, 1);

    // reference value of the cost to reach y = 1, frozen from the oracle
    const double I1 = 1.719693200204476;
    auto oracle = quadrature_oracle_1d(m, f, 1.0, 2.0, 40000);
    CHECK(oracle[20000] == doctest::Approx(I1).epsilon(1e-9));

    std::vector<double> max_errs;
    for (double h : {0.02, 0.01, 0.005}) {
        GridSpec g = GridSpec::make_1d(-2, 2, h);
        MetricSolution sol = solve_metric(f, m, 1.0, {Vec{0, 0}}, g);
        CHECK(std::abs(sol.at({1, 0}) - I1) <= 3 * h);
        double worst = 0.0;
        for (int i = 0; i < g.nx; ++i) {
            double x = g.node(i, 0).x;
            if (x < 0.1 || x > 1.9) continue;
            int k = static_cast<int>(std::round(x / 2.0 * 40000));
            worst = std::max(worst, std::abs(sol.values.at(i, 0) - oracle[k]));
        }
        max_errs.push_back(worst);
    }
    // halving h halves the max error: a first-order scheme
    for (std::size_t k = 1; k < max_errs.size(); ++k) {
        double factor = max_errs[k - 1] / max_errs[k];
        CHECK(factor >= 1.7);
        CHECK(factor <= 2.3);
    }
}

TEST_CASE("dijkstra oracle basics") {
    HamiltonianModel m = unit_speed_model();
    RandomField f = sample_field(m, Box::centered({0, 0}, 8), 1);
    GridSpec g = GridSpec::centered({0, 0}, 4, 4.0 / 64);

    GridFunction d16 = dijkstra_oracle(f, m, 1.0, {Vec{0, 0}}, g, 16);
    int ci, cj;
    g.nearest({0, 0}, ci, cj);
    CHECK(d16.at(ci, cj) == 0.0);

    // overestimates Euclidean distance by at most the metrication constant
    double c16 = lattice_metrication_constant(16);
    CHECK(c16 == doctest::Approx(1.0274862967).epsilon(1e-6));
    CHECK(lattice_metrication_constant(8) == doctest::Approx(1.0823922).epsilon(1e-5));
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            double r = g.node(i, j).norm();
            if (r < 0.5) continue;
            CHECK(d16.at(i, j) >= r - 2 * g.h);
            CHECK(d16.at(i, j) <= c16 * r + 3 * g.h);
        }
}

TEST_CASE("1d dijkstra equals the cumulative trapezoid sum") {
    HamiltonianModel m = periodic_1d_model();
    RandomField f = sample_field(m, Box{{-3, 0}, {3, 0}}, 1);
    double h = 0.01;
    GridSpec g = GridSpec::make_1d(-2, 2, h);
    GridFunction d = dijkstra_oracle(f, m, 1.0, {Vec{0, 0}}, g, 8);
    // edge weights are exactly the trapezoid increments
    double acc = 0.0;
    for (int i = g.nx / 2; i + 1 < g.nx; ++i) {
        double x0 = g.node(i, 0).x, x1 = g.node(i + 1, 0).x;
        acc += 0.5 * (eikonal_speed(m, f, 1.0, {x0, 0}) + eikonal_speed(m, f, 1.0, {x1, 0})) * h;
        CHECK(d.at(i + 1, 0) == doctest::Approx(acc).epsilon(1e-12));
    }
}

TEST_CASE("fast marching matches the 16-neighbor oracle on random media") {
    HamiltonianModel m = poisson_model();
    double worst = 0.0;
    for (std::uint64_t seed : {11ULL, 12ULL}) {
        RandomField f = sample_field(m, Box::centered({0, 0}, 10), seed);
        GridSpec g = GridSpec::centered({0, 0}, 8, 0.0625);
        MetricSolution fmm = solve_metric(f, m, 1.0, {Vec{0, 0}}, g);
        GridFunction d16 = dijkstra_oracle(f, m, 1.0, {Vec{0, 0}}, g, 16);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                double r = g.node(i, j).norm();
                if (r < 1.0 || r > 7.0) continue;
                worst = std::max(worst, std::abs(fmm.values.at(i, j) - d16.at(i, j)) /
                                            std::max(d16.at(i, j), 1e-9));
            }
    }
    CHECK(worst <= 0.03);
}

TEST_CASE("reachable sets: source cells at t = 0, disc at t = 2, nesting") {
    HamiltonianModel m = unit_speed_model();
    RandomField f = sample_field(m, Box::centered({0, 0}, 8), 1);
    GridSpec g = GridSpec::centered({0, 0}, 4, 4.0 / 128);
    MetricSolution sol = solve_metric(f, m, 1.0, {Vec{0, 0}}, g);

    ReachableSet r0 = reachable_set(sol, 0.0);
    CHECK(r0.count() == 1);  // exactly the source cell

    ReachableSet r2 = reachable_set(sol, 2.0);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            double r = g.node(i, j).norm();
            if (r < 2.0 - 3 * g.h) CHECK(r2.at(i, j));
            if (r > 2.0 + 3 * g.h) CHECK_FALSE(r2.at(i, j));
        }

    HamiltonianModel mp = poisson_model();
    RandomField fp = sample_field(mp, Box::centered({0, 0}, 8), 5);
    MetricSolution sp = solve_metric(fp, mp, 1.0, {Vec{0, 0}}, g);
    ReachableSet a = reachable_set(sp, 1.0);
    ReachableSet b = reachable_set(sp, 2.0);
    for (std::size_t k = 0; k < a.mask.size(); ++k)
        if (a.mask[k]) CHECK(b.mask[k]);
    CHECK(b.count() > a.count());

    // ball sandwich B_{t/f_max} within R_t within B_{t/f_min}, up to h
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            double r = g.node(i, j).norm();
            if (r < 2.0 / sp.f_max - 3 * g.h) CHECK(b.at(i, j));
            if (b.at(i, j)) CHECK(r <= 2.0 / sp.f_min + 3 * g.h);
        }
}

TEST_CASE("set sources: the pointwise minimum over the source set") {
    HamiltonianModel m = unit_speed_model();
    RandomField f = sample_field(m, Box::centered({0, 0}, 8), 1);
    GridSpec g = GridSpec::centered({0, 0}, 4, 4.0 / 96);
    std::vector<Vec> K = {{-1, 0}, {1, 0}};
    MetricSolution sol = solve_metric(f, m, 1.0, K, g);
    CHECK(sol.at({-1, 0}) == 0.0);
    CHECK(sol.at({1, 0}) == 0.0);
    CHECK(sol.at({0, 0}) == doctest::Approx(1.0).epsilon(0.03));
    CHECK(sol.at({2, 0}) == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("locality: far perturbations leave the reachable set untouched") {
    HamiltonianModel m = poisson_model();
    RandomField f = sample_field(m, Box::centered({0, 0}, 14), 11);
    GridSpec g = GridSpec::centered({0, 0}, 12, 0.1);
    CHECK(locality_check(f, m, 1.0, 4.0, 77, g));

    // negative control: a bump inside the reachable set changes values
    MetricSolution base = solve_metric(f, m, 1.0, {Vec{0, 0}}, g);
    RandomField poked = f;
    poked.values = std::make_shared<SumField>(
        f.values,
        std::make_shared<BumpSetField>(std::vector<BumpSetField::Bump>{{{1.0, 0.5}, 2.0, 0.4}}));
    MetricSolution alt = solve_metric(poked, m, 1.0, {Vec{0, 0}}, g);
    double change = 0.0;
    ReachableSet rt = reachable_set(base, 4.0);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (rt.at(i, j)) change = std::max(change, std::abs(alt.values.at(i, j) -
                                                                base.values.at(i, j)));
    CHECK(change > 1e-3);

    // precondition violation: no room to place a disjoint perturbation
    CHECK_THROWS_AS(locality_check(f, m, 1.0, 40.0, 77, g), std::invalid_argument);
}

TEST_CASE("shell residual: cone additivity and two-resolution stability") {
    HamiltonianModel m = unit_speed_model();
    RandomField f = sample_field(m, Box::centered({0, 0}, 8), 1);
    for (double h : {4.0 / 96, 4.0 / 192}) {
        GridSpec g = GridSpec::centered({0, 0}, 4, h);
        MetricSolution sol = solve_metric(f, m, 1.0, {Vec{0, 0}}, g);
        auto shell = circular_shell(g, {0, 0}, 1.0);
        REQUIRE(!shell.empty());
        CHECK(dpp_check(sol, shell, {3, 0}) <= 2 * h);
    }

    HamiltonianModel mp = poisson_model(0.6);
    RandomField fp = sample_field(mp, Box::centered({0, 0}, 8), 3);
    double res_coarse, res_fine;
    {
        GridSpec g = GridSpec::centered({0, 0}, 6, 0.05);
        MetricSolution sol = solve_metric(fp, mp, 1.0, {Vec{0, 0}}, g);
        res_coarse = dpp_check(sol, circular_shell(g, {0, 0}, 1.5), {4, 1});
    }
    {
        GridSpec g = GridSpec::centered({0, 0}, 6, 0.025);
        MetricSolution sol = solve_metric(fp, mp, 1.0, {Vec{0, 0}}, g);
        res_fine = dpp_check(sol, circular_shell(g, {0, 0}, 1.5), {4, 1});
    }
    // residual <= C h with C stable under halving
    double C_coarse = res_coarse / 0.05, C_fine = res_fine / 0.025;
    CHECK(C_fine <= std::max(2.0 * C_coarse, 4.0));

    // a shell that does not separate is rejected
    GridSpec g = GridSpec::centered({0, 0}, 6, 0.05);
    MetricSolution sol = solve_metric(fp, mp, 1.0, {Vec{0, 0}}, g);
    CHECK_THROWS_AS(dpp_check(sol, circular_shell(g, {0, 0}, 5.0), {4, 1}),
                    std::invalid_argument);
}

TEST_CASE("metric structure on random instances") {
    HamiltonianModel m = poisson_model();
    GridSpec g = GridSpec::centered({0, 0}, 6, 0.08);
    RngStream rng(13);
    for (int inst = 0; inst < 3; ++inst) {
        RandomField f = sample_field(m, Box::centered({0, 0}, 8), 100 + inst);
        double mu = rng.next_in(0.5, 2.0);
        Vec x{rng.next_in(-2, 2), rng.next_in(-2, 2)};
        Vec z{rng.next_in(-2, 2), rng.next_in(-2, 2)};
        MetricSolution from_x = solve_metric(f, m, mu, {x}, g);
        MetricSolution from_z = solve_metric(f, m, mu, {z}, g);

        // subadditivity with the grid slack
        for (int k = 0; k < 40; ++k) {
            Vec y{rng.next_in(-4, 4), rng.next_in(-4, 4)};
            CHECK(from_x.at(y) <= from_z.at(y) + from_x.at(z) + 4 * g.h * from_x.f_max);
        }

        // symmetry of even Hamiltonians
        CHECK(from_x.at(z) == doctest::Approx(from_z.at(x)).epsilon(0.02));

        // monotonicity in mu with the stated margin
        double mu_hat = 0.5 * mu;
        MetricSolution smaller = solve_metric(f, m, mu_hat, {x}, g);
        double margin = std::numeric_limits<double>::infinity();
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                Vec y = g.node(i, j);
                double gap = eikonal_speed(m, f, mu, y) - eikonal_speed(m, f, mu_hat, y);
                margin = std::min(margin, gap);
            }
        for (int k = 0; k < 40; ++k) {
            Vec y{rng.next_in(-4, 4), rng.next_in(-4, 4)};
            double lhs = from_x.at(y) - smaller.at(y);
            CHECK(lhs >= margin * dist(y, x) - 6 * g.h * from_x.f_max);
        }

        // deterministic growth bounds
        for (int k = 0; k < 40; ++k) {
            Vec y{rng.next_in(-4, 4), rng.next_in(-4, 4)};
            double tol = 4 * g.h * from_x.f_max + from_x.f_max * g.h / M_SQRT2;
            CHECK(from_x.at(y) >= from_x.f_min * dist(y, x) - tol);
            CHECK(from_x.at(y) <= from_x.f_max * dist(y, x) + tol);
        }

        // Lipschitz bound
        for (int k = 0; k < 40; ++k) {
            Vec y{rng.next_in(-4, 4), rng.next_in(-4, 4)};
            Vec z2{rng.next_in(-4, 4), rng.next_in(-4, 4)};
            CHECK(std::abs(from_x.at(y) - from_x.at(z2)) <=
                  from_x.f_max * dist(y, z2) + 4 * g.h * from_x.f_max);
        }
    }
}
