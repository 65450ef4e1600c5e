#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "hjh/field.hpp"
#include "hjh/model.hpp"
#include "hjh/rng.hpp"

using namespace hjh;

namespace {

ModelSpec poisson_spec(double intensity = 1.0, double height = 1.0, double radius = 0.4) {
    ModelSpec s;
    s.kind = ModelKind::h1_potential;
    s.potential = PotentialKind::poisson;
    s.intensity = intensity;
    s.bump_height = height;
    s.bump_radius = radius;
    return s;
}

}  // namespace

TEST_CASE("sampling is a pure function of (seed, location)") {
    HamiltonianModel m = build_model(poisson_spec());
    Box w = Box::centered({0, 0}, 16);
    RandomField a = sample_field(m, w, 42);
    RandomField b = sample_field(m, w, 42);
    RngStream rng(7);
    for (int k = 0; k < 1000; ++k) {
        Vec y{rng.next_in(-15, 15), rng.next_in(-15, 15)};
        CHECK(a.value(y) == b.value(y));
    }
}

TEST_CASE("zero potential evaluates to zero everywhere") {
    ModelSpec s;
    s.kind = ModelKind::h1_potential;
    s.potential = PotentialKind::zero;
    HamiltonianModel m = build_model(s);
    RandomField f = sample_field(m, Box::centered({0, 0}, 8), 3);
    CHECK(f.value({0.3, -2.7}) == 0.0);
    CHECK(f.value({5, 5}) == 0.0);
}

TEST_CASE("poisson point count on a 32x32 window is within 3 sigma of 1024") {
    HamiltonianModel m = build_model(poisson_spec());
    RandomField f = sample_field(m, Box::centered({0, 0}, 16), 2024);
    auto* pf = dynamic_cast<const PoissonBumpField*>(f.values.get());
    REQUIRE(pf != nullptr);
    std::vector<Vec> pts;
    for (int cx = -16; cx < 16; ++cx)
        for (int cy = -16; cy < 16; ++cy) pf->cell_points(cx, cy, pts);
    double n = static_cast<double>(pts.size());
    double expect = 32.0 * 32.0;
    CHECK(std::abs(n - expect) <= 3.0 * std::sqrt(expect));
}

TEST_CASE("stationary generator: shifted window, same seed, identical values") {
    HamiltonianModel m = build_model(poisson_spec());
    RandomField a = sample_field(m, Box::centered({0, 0}, 10), 5);
    RandomField b = sample_field(m, Box::centered({7.5, -3.25}, 10), 5);
    // the generator is global: common locations agree bit for bit
    RngStream rng(11);
    for (int k = 0; k < 500; ++k) {
        Vec y{rng.next_in(-2, 2), rng.next_in(-2, 2)};
        CHECK(a.value(y) == b.value(y));
    }
}

namespace {

/** Poisson field with one cell's stream rekeyed; the independence surrogate. */
class RekeyedField final : public PoissonBumpField {
  public:
    RekeyedField(std::uint64_t seed, double intensity, double height, double radius, int cx, int cy)
        : PoissonBumpField(seed, 2, intensity, height, radius), cx_(cx), cy_(cy) {}
    std::uint64_t cell_seed(int cx, int cy) const override {
        if (cx == cx_ && cy == cy_) return hash_mix(PoissonBumpField::cell_seed(cx, cy), 999);
        return PoissonBumpField::cell_seed(cx, cy);
    }

  private:
    int cx_, cy_;
};

}  // namespace

TEST_CASE("rekeying one cell leaves values in far cells bit-identical") {
    PoissonBumpField base(7, 2, 1.0, 1.0, 0.4);
    RekeyedField poked(7, 1.0, 1.0, 0.4, 0, 0);
    RngStream rng(3);
    bool near_changed = false;
    for (int k = 0; k < 4000; ++k) {
        Vec y{rng.next_in(-6, 6), rng.next_in(-6, 6)};
        // distance from y to the altered cell [0,1)^2
        double dx = std::max({0.0, 0.0 - y.x, y.x - 1.0});
        double dy = std::max({0.0, 0.0 - y.y, y.y - 1.0});
        double d = std::hypot(dx, dy);
        if (d > 1.0) {
            CHECK(base.value(y) == poked.value(y));
        } else if (base.value(y) != poked.value(y)) {
            near_changed = true;
        }
    }
    CHECK(near_changed);  // the perturbation is real
}

TEST_CASE("checker field: exactly the cell level at centers, uniform law") {
    CheckerUniformField f(99, 2);
    CHECK(f.value({3, -2}) == f.level(3, -2));
    int below_half = 0;
    const int n = 2000;
    for (int k = 0; k < n; ++k) {
        CheckerUniformField g(1000 + k, 2);
        double v = g.value({0, 0});
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        if (v < 0.5) ++below_half;
    }
    // binomial(n, 1/2) within 4 sigma
    CHECK(std::abs(below_half - n / 2) < 4.0 * std::sqrt(n * 0.25));
}

TEST_CASE("bump profile is compactly supported and bounded by its height") {
    CHECK(bump_profile(0.0, 0.4, 2.0) == 2.0);
    CHECK(bump_profile(0.4, 0.4, 2.0) == 0.0);
    CHECK(bump_profile(0.7, 0.4, 2.0) == 0.0);
    CHECK(bump_profile(0.2, 0.4, 2.0) > 0.0);
    CHECK(bump_profile(0.2, 0.4, 2.0) < 2.0);
}
