#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hjh/model.hpp"
#include "hjh/rng.hpp"

using namespace hjh;

TEST_CASE("zero-potential model evaluates to the free Hamiltonian") {
    ModelSpec s;
    s.kind = ModelKind::h1_potential;
    s.potential = PotentialKind::zero;
    HamiltonianModel m = build_model(s);
    CHECK(m.v_max() == 0.0);
    RandomField f = sample_field(m, Box::centered({0, 0}, 4), 1);
    CHECK(eval_H(m, f, {1, 0}, {0.2, 0.2}) == doctest::Approx(0.5));
}

TEST_CASE("constant-speed model: H(p) = 2|p|") {
    ModelSpec s;
    s.kind = ModelKind::h2_speed;
    s.a_min = s.a_max = 2.0;
    HamiltonianModel m = build_model(s);
    RandomField f = sample_field(m, Box::centered({0, 0}, 4), 1);
    CHECK(eval_H(m, f, {3, 4}, {0, 0}) == doctest::Approx(10.0));
}

TEST_CASE("poisson potential: eval_H at p = 0 matches direct bump summation") {
    ModelSpec s;
    s.kind = ModelKind::h1_potential;
    s.potential = PotentialKind::poisson;
    s.intensity = 1.0;
    s.bump_height = 1.0;
    s.bump_radius = 0.4;
    HamiltonianModel m = build_model(s);
    CHECK(m.v_max() >= 1.0);  // at least one bump overlap was observed
    RandomField f = sample_field(m, Box::centered({0, 0}, 8), 7);
    Vec y{0.3, 0.7};
    auto* pf = dynamic_cast<const PoissonBumpField*>(f.values.get());
    REQUIRE(pf);
    double direct = 0.0;
    std::vector<Vec> pts;
    for (int cx = -2; cx <= 2; ++cx)
        for (int cy = -2; cy <= 2; ++cy) pf->cell_points(cx, cy, pts);
    for (const Vec& p : pts) direct += bump_profile(dist(p, y), 0.4, 1.0);
    CHECK(eval_H(m, f, {0, 0}, y) == doctest::Approx(-direct));
}

TEST_CASE("eval_H outside the sampled window is rejected") {
    ModelSpec s;
    s.kind = ModelKind::h1_potential;
    s.potential = PotentialKind::zero;
    HamiltonianModel m = build_model(s);
    RandomField f = sample_field(m, Box::centered({0, 0}, 4), 1);
    CHECK_THROWS_AS(eval_H(m, f, {1, 0}, {5, 0}), std::out_of_range);
}

TEST_CASE("invalid model parameters name the violated assumption") {
    ModelSpec bad;
    bad.kind = ModelKind::h2_speed;
    bad.a_min = 0.0;
    bad.a_max = 1.0;
    CHECK_THROWS_WITH_AS(build_model(bad), doctest::Contains("coercivity"), std::invalid_argument);

    ModelSpec neg;
    neg.kind = ModelKind::h1_potential;
    neg.potential = PotentialKind::poisson;
    neg.bump_height = -1.0;
    CHECK_THROWS_WITH_AS(build_model(neg), doctest::Contains("normalization"),
                         std::invalid_argument);

    ModelSpec dim;
    dim.dimension = 3;
    CHECK_THROWS_AS(build_model(dim), std::invalid_argument);

    ModelSpec radius;
    radius.kind = ModelKind::h1_potential;
    radius.potential = PotentialKind::poisson;
    radius.bump_radius = 0.7;  // breaks the unit range of dependence
    CHECK_THROWS_AS(build_model(radius), std::invalid_argument);
}

TEST_CASE("eikonal speed: closed forms and consistency with eval_H") {
    ModelSpec s1;
    s1.kind = ModelKind::h1_potential;
    s1.potential = PotentialKind::zero;
    HamiltonianModel m1 = build_model(s1);
    RandomField f1 = sample_field(m1, Box::centered({0, 0}, 4), 1);
    CHECK(eikonal_speed(m1, f1, 0.5, {0, 0}) == doctest::Approx(1.0));

    ModelSpec s2;
    s2.kind = ModelKind::h2_speed;
    s2.a_min = s2.a_max = 2.0;
    HamiltonianModel m2 = build_model(s2);
    RandomField f2 = sample_field(m2, Box::centered({0, 0}, 4), 1);
    CHECK(eikonal_speed(m2, f2, 1.0, {0, 0}) == doctest::Approx(0.5));

    CHECK_THROWS_AS(eikonal_speed(m2, f2, 0.0, {0, 0}), std::invalid_argument);

    // H(f_mu(y) e, y) = mu to 1e-10 relative at random probes, any unit e
    ModelSpec sp;
    sp.kind = ModelKind::h1_potential;
    sp.potential = PotentialKind::poisson;
    sp.bump_height = 0.8;
    HamiltonianModel mp = build_model(sp);
    RandomField fp = sample_field(mp, Box::centered({0, 0}, 8), 3);
    RngStream rng(5);
    for (int k = 0; k < 200; ++k) {
        Vec y{rng.next_in(-7, 7), rng.next_in(-7, 7)};
        double mu = rng.next_in(0.1, 3.0);
        Vec e = unit(rng.next_in(0, 2 * M_PI));
        double fmu = eikonal_speed(mp, fp, mu, y);
        CHECK(eval_H(mp, fp, fmu * e, y) == doctest::Approx(mu).epsilon(1e-10));
    }
}

TEST_CASE("assumption probes pass for shipped kinds and flag violations") {
    ModelSpec s1;
    s1.kind = ModelKind::h1_potential;
    s1.potential = PotentialKind::poisson;
    HamiltonianModel m1 = build_model(s1);
    RandomField f1 = sample_field(m1, Box::centered({0, 0}, 12), 17);
    AssumptionReport r1 = check_assumptions(m1, f1, 1500);
    CHECK(r1.midpoint_level_set_convexity);
    CHECK(r1.p_minimum_at_zero);
    CHECK(r1.potential_infimum_zero);

    ModelSpec s2;
    s2.kind = ModelKind::h2_speed;
    s2.a_min = 1.0;
    s2.a_max = 2.0;
    s2.a_random = true;
    HamiltonianModel m2 = build_model(s2);
    RandomField f2 = sample_field(m2, Box::centered({0, 0}, 12), 17);
    AssumptionReport r2 = check_assumptions(m2, f2, 1500);
    CHECK(r2.midpoint_level_set_convexity);
    CHECK(r2.p_minimum_at_zero);

    // adversarial: inject a negative potential through the test hook
    ModelSpec bad = s1;
    HamiltonianModel mb = HamiltonianModel::unchecked(bad, 1.0);
    RandomField fb;
    fb.seed = 1;
    fb.window = Box::centered({0, 0}, 8);
    fb.values = std::make_shared<ConstField>(-0.3);  // V < 0 everywhere
    AssumptionReport rb = check_assumptions(mb, fb, 500);
    CHECK_FALSE(rb.potential_infimum_zero);
}

TEST_CASE("tail law: constant-speed model fits theta = 0 exactly") {
    ModelSpec s;
    s.kind = ModelKind::h2_speed;
    s.a_min = s.a_max = 1.5;
    HamiltonianModel m = build_model(s);
    TailLaw law = estimate_tail(m, {0.1, 0.3, 0.5}, 200, 1);
    CHECK_FALSE(law.degenerate);
    CHECK(law.theta == doctest::Approx(0.0));
    for (double p : law.probabilities) CHECK(p == 1.0);
}

TEST_CASE("tail law: cell-uniform potential fits theta near 1") {
    ModelSpec s;
    s.kind = ModelKind::h1_potential;
    s.potential = PotentialKind::checker_uniform;
    HamiltonianModel m = build_model(s);
    TailLaw law = estimate_tail(m, {0.1, 0.2, 0.4, 0.6, 0.8}, 4000, 7);
    CHECK_FALSE(law.degenerate);
    // P[-V > -lambda] = lambda exactly; binomial noise at n = 4000
    for (std::size_t k = 0; k < law.lambda_grid.size(); ++k) {
        double l = law.lambda_grid[k];
        CHECK(std::abs(law.probabilities[k] - l) <= 3.0 * std::sqrt(l * (1 - l) / 4000.0) + 1e-12);
    }
    CHECK(law.theta == doctest::Approx(1.0).epsilon(0.12));
}

TEST_CASE("tail law: monotone exceedance and input validation") {
    ModelSpec s;
    s.kind = ModelKind::h1_potential;
    s.potential = PotentialKind::poisson;
    HamiltonianModel m = build_model(s);
    CHECK_THROWS_AS(estimate_tail(m, {0.1, -0.2}, 200, 1), std::invalid_argument);
    CHECK_THROWS_AS(estimate_tail(m, {0.1}, 50, 1), std::invalid_argument);
    TailLaw law = estimate_tail(m, {0.05, 0.1, 0.2, 0.5, 1.0}, 300, 5);
    for (std::size_t k = 1; k < law.probabilities.size(); ++k)
        CHECK(law.probabilities[k] >= law.probabilities[k - 1]);
}

TEST_CASE("slow-rate construction: thin tails ordered by the modulus") {
    ModelSpec base;
    base.dimension = 2;
    base.intensity = 2.0;
    base.bump_height = 1.0;
    base.bump_radius = 0.4;

    // rho(d) = d
    std::vector<double> xs, lin, sqrtv;
    for (int k = 0; k <= 10; ++k) {
        double x = k / 10.0;
        xs.push_back(x);
        lin.push_back(x);
        sqrtv.push_back(std::sqrt(x));
    }
    HamiltonianModel lin_model = build_slow_rate_model(xs, lin, base);
    HamiltonianModel sqrt_model = build_slow_rate_model(xs, sqrtv, base);

    // phi >= 0 keeps H(0, y) <= 0 everywhere
    RandomField f = sample_field(lin_model, Box::centered({0, 0}, 8), 9);
    RngStream rng(2);
    for (int k = 0; k < 300; ++k) {
        Vec y{rng.next_in(-7, 7), rng.next_in(-7, 7)};
        CHECK(eval_H(lin_model, f, {0, 0}, y) <= 0.0);
    }

    std::vector<double> grid = {0.35, 0.45, 0.55, 0.7, 0.85};
    TailLaw tl = estimate_tail(lin_model, grid, 3000, 3);
    TailLaw ts = estimate_tail(sqrt_model, grid, 3000, 3);
    CHECK_FALSE(tl.degenerate);
    CHECK(tl.theta > 4.0);            // beyond d + 2 = 4
    if (!ts.degenerate) {
        CHECK(ts.theta > tl.theta);   // thinner modulus, thinner tail
    } else {
        // so thin that no exceedance was observed on the grid at all
        double total = 0.0;
        for (double p : ts.probabilities) total += p;
        CHECK(total < 0.02);
    }

    // rejection of non-monotone tables
    std::vector<double> bad = lin;
    bad[5] = bad[4];
    CHECK_THROWS_AS(build_slow_rate_model(xs, bad, base), std::invalid_argument);
}

TEST_CASE("midpoint level-set convexity holds exactly for both families") {
    // quadratic: H(mid) <= max by convexity; one-homogeneous: by triangle ineq
    RngStream rng(31);
    for (int k = 0; k < 400; ++k) {
        Vec p{rng.next_in(-3, 3), rng.next_in(-3, 3)};
        Vec q{rng.next_in(-3, 3), rng.next_in(-3, 3)};
        Vec mid = (p + q) * 0.5;
        CHECK(0.5 * mid.norm_sq() <= std::max(0.5 * p.norm_sq(), 0.5 * q.norm_sq()) + 1e-12);
        CHECK(mid.norm() <= std::max(p.norm(), q.norm()) + 1e-12);
    }
}
