#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "hjh/geometry.hpp"
#include "hjh/rng.hpp"

namespace hjh {

/**
 * A scalar spatial coefficient: the potential V(y) of a kinetic-energy
 * Hamiltonian or the normalized speed modulation of a front-propagation one.
 * Implementations must be pure functions of (construction data, y).
 */
class ScalarField {
  public:
    virtual ~ScalarField() = default;
    virtual double value(const Vec& y) const = 0;
    virtual bool randomized() const { return false; }
};

class ZeroField final : public ScalarField {
  public:
    double value(const Vec&) const override { return 0.0; }
};

class ConstField final : public ScalarField {
  public:
    explicit ConstField(double c) : c_(c) {}
    double value(const Vec&) const override { return c_; }

  private:
    double c_;
};

/** C^1 compactly supported bump: height * (1 - (r/r0)^2)^2 for r < r0. */
inline double bump_profile(double r, double radius, double height) {
    if (r >= radius) return 0.0;
    double u = 1.0 - (r / radius) * (r / radius);
    return height * u * u;
}

/**
 * Sum of identical bumps attached to a unit-intensity-scaled Poisson cloud.
 * Points are generated per integer cell [k, k+1)^d from a keyed hash of
 * (seed, cell), so disjoint cells carry independent randomness and the value
 * at y reads only cells meeting B(y, radius). With radius <= 1/2 the field
 * has range of dependence exactly 1.
 */
class PoissonBumpField : public ScalarField {
  public:
    PoissonBumpField(std::uint64_t seed, int dim, double intensity, double height, double radius)
        : seed_(seed), dim_(dim), intensity_(intensity), height_(height), radius_(radius) {}

    double value(const Vec& y) const override {
        double v = 0.0;
        int cx0 = static_cast<int>(std::floor(y.x - radius_));
        int cx1 = static_cast<int>(std::floor(y.x + radius_));
        int cy0 = dim_ == 2 ? static_cast<int>(std::floor(y.y - radius_)) : 0;
        int cy1 = dim_ == 2 ? static_cast<int>(std::floor(y.y + radius_)) : 0;
        for (int cy = cy0; cy <= cy1; ++cy)
            for (int cx = cx0; cx <= cx1; ++cx) {
                RngStream rng(cell_seed(cx, cy));
                int n = rng.next_poisson(intensity_);
                for (int k = 0; k < n; ++k) {
                    double px = cx + rng.next_double();
                    double py = dim_ == 2 ? cy + rng.next_double() : 0.0;
                    double dx = px - y.x, dy = py - y.y;
                    v += bump_profile(std::sqrt(dx * dx + dy * dy), radius_, height_);
                }
            }
        return v;
    }

    bool randomized() const override { return true; }
    double intensity() const { return intensity_; }
    double height() const { return height_; }
    double radius() const { return radius_; }

    /** Poisson points of one integer cell. Exposed for count statistics. */
    void cell_points(int cx, int cy, std::vector<Vec>& out) const {
        RngStream rng(cell_seed(cx, cy));
        int n = rng.next_poisson(intensity_);
        for (int k = 0; k < n; ++k) {
            double px = cx + rng.next_double();
            double py = dim_ == 2 ? cy + rng.next_double() : 0.0;
            out.push_back({px, py});
        }
    }

    /** Keyed hash feeding one cell's point stream; overridable for tests. */
    virtual std::uint64_t cell_seed(int cx, int cy) const {
        return hash4(seed_, 0x706f6973736f6eULL, static_cast<std::uint64_t>(static_cast<std::int64_t>(cx)),
                     static_cast<std::uint64_t>(static_cast<std::int64_t>(cy)));
    }

  protected:
    std::uint64_t seed_;
    int dim_;
    double intensity_, height_, radius_;
};

/**
 * Cell-wise random plateau field: each integer-centered cell carries an
 * independent Uniform[0,1] level u_c, painted with a plateau bump so that
 * the value at a cell center is exactly u_c. The one-point law at cell
 * centers is therefore exactly uniform, and the field has range <= 1.
 */
class CheckerUniformField final : public ScalarField {
  public:
    CheckerUniformField(std::uint64_t seed, int dim) : seed_(seed), dim_(dim) {}

    double value(const Vec& y) const override {
        // plateau of radius 1/4, support 1/2, around each integer point
        double v = 0.0;
        int cx0 = static_cast<int>(std::floor(y.x - 0.5)) , cx1 = static_cast<int>(std::ceil(y.x + 0.5));
        int cy0 = dim_ == 2 ? static_cast<int>(std::floor(y.y - 0.5)) : 0;
        int cy1 = dim_ == 2 ? static_cast<int>(std::ceil(y.y + 0.5)) : 0;
        for (int cy = cy0; cy <= cy1; ++cy)
            for (int cx = cx0; cx <= cx1; ++cx) {
                double r = dist(y, {static_cast<double>(cx), dim_ == 2 ? static_cast<double>(cy) : 0.0});
                v += level(cx, cy) * plateau(r);
            }
        return v;
    }

    double level(int cx, int cy) const {
        RngStream rng(hash4(seed_, 0x636865636b6572ULL, static_cast<std::uint64_t>(static_cast<std::int64_t>(cx)),
                            static_cast<std::uint64_t>(static_cast<std::int64_t>(cy))));
        return rng.next_double();
    }

    bool randomized() const override { return true; }

  private:
    static double plateau(double r) {
        if (r <= 0.25) return 1.0;
        if (r >= 0.5) return 0.0;
        double t = (0.5 - r) / 0.25;  // 1 at r=0.25, 0 at r=0.5
        return t * t * (3 - 2 * t);
    }

    std::uint64_t seed_;
    int dim_;
};

/** V(y) = amp * sum_axes sin^2(pi u / period); 1-periodic for period = 1. */
class PeriodicField final : public ScalarField {
  public:
    PeriodicField(int dim, double amp, double period) : dim_(dim), amp_(amp), period_(period) {}
    double value(const Vec& y) const override {
        double sx = std::sin(M_PI * y.x / period_);
        double v = sx * sx;
        if (dim_ == 2) {
            double sy = std::sin(M_PI * y.y / period_);
            v += sy * sy;
        }
        return amp_ * v;
    }

  private:
    int dim_;
    double amp_, period_;
};

/** Two-frequency almost periodic potential, nonnegative with infimum 0. */
class QuasiPeriodicField final : public ScalarField {
  public:
    QuasiPeriodicField(int dim, double a1, double a2) : dim_(dim), a1_(a1), a2_(a2) {}
    double value(const Vec& y) const override {
        double v = eval_axis(y.x);
        if (dim_ == 2) v += eval_axis(y.y);
        return v;
    }

  private:
    double eval_axis(double u) const {
        double s1 = std::sin(M_PI * u);
        double s2 = std::sin(M_SQRT2 * M_PI * u);
        return a1_ * s1 * s1 + a2_ * s2 * s2;
    }
    int dim_;
    double a1_, a2_;
};

/** Explicit list of bumps; used for constructed-violation and locality tests. */
class BumpSetField final : public ScalarField {
  public:
    struct Bump {
        Vec center;
        double height;
        double radius;
    };
    explicit BumpSetField(std::vector<Bump> bumps) : bumps_(std::move(bumps)) {}
    double value(const Vec& y) const override {
        double v = 0.0;
        for (const Bump& b : bumps_) v += bump_profile(dist(y, b.center), b.radius, b.height);
        return v;
    }

  private:
    std::vector<Bump> bumps_;
};

/** Sum of two fields (baseline plus perturbation). */
class SumField final : public ScalarField {
  public:
    SumField(std::shared_ptr<const ScalarField> a, std::shared_ptr<const ScalarField> b)
        : a_(std::move(a)), b_(std::move(b)) {}
    double value(const Vec& y) const override { return a_->value(y) + b_->value(y); }
    bool randomized() const override { return a_->randomized() || b_->randomized(); }

  private:
    std::shared_ptr<const ScalarField> a_, b_;
};

/**
 * Monotone-decreasing reshaping phi applied to an inner field, tabulated as
 * (v_k increasing, phi_k decreasing) with an exponential tail beyond the
 * table. Used by the thin-tailed slow-rate construction.
 */
class TransformedField final : public ScalarField {
  public:
    TransformedField(std::shared_ptr<const ScalarField> inner, std::vector<double> v_knots,
                     std::vector<double> phi_knots)
        : inner_(std::move(inner)), v_(std::move(v_knots)), phi_(std::move(phi_knots)) {}

    double value(const Vec& y) const override { return apply(inner_->value(y)); }
    bool randomized() const override { return inner_->randomized(); }

    double apply(double v) const {
        if (v <= v_.front()) return phi_.front();
        if (v >= v_.back()) return phi_.back() * std::exp(-(v - v_.back()));
        auto it = std::upper_bound(v_.begin(), v_.end(), v);
        std::size_t k = static_cast<std::size_t>(it - v_.begin());
        double t = (v - v_[k - 1]) / (v_[k] - v_[k - 1]);
        return phi_[k - 1] + t * (phi_[k] - phi_[k - 1]);
    }

    const std::vector<double>& v_knots() const { return v_; }
    const std::vector<double>& phi_knots() const { return phi_; }

  private:
    std::shared_ptr<const ScalarField> inner_;
    std::vector<double> v_, phi_;
};

/**
 * One sampled realization of the spatial coefficient on a window.
 * Evaluation anywhere is a pure function of (seed, location); the window
 * only scopes which evaluations the solvers are allowed to make.
 */
struct RandomField {
    std::uint64_t seed = 0;
    Box window;
    int dim = 2;
    double range_of_dependence = 1.0;
    double bump_radius = 0.0;
    std::shared_ptr<const ScalarField> values;

    double value(const Vec& y) const { return values->value(y); }
    bool in_window(const Vec& y) const { return window.contains(y, dim); }
};

}  // namespace hjh
