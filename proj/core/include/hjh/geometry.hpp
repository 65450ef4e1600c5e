#pragma once

#include <array>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace hjh {

/** A point (or vector) in the plane. One-dimensional runs keep y == 0. */
struct Vec {
    double x = 0.0;
    double y = 0.0;

    Vec() = default;
    Vec(double x_, double y_) : x(x_), y(y_) {}

    Vec operator+(const Vec& o) const { return {x + o.x, y + o.y}; }
    Vec operator-(const Vec& o) const { return {x - o.x, y - o.y}; }
    Vec operator*(double s) const { return {x * s, y * s}; }
    Vec operator-() const { return {-x, -y}; }
    double dot(const Vec& o) const { return x * o.x + y * o.y; }
    double norm() const { return std::hypot(x, y); }
    double norm_sq() const { return x * x + y * y; }
};

inline Vec operator*(double s, const Vec& v) { return v * s; }

inline double dist(const Vec& a, const Vec& b) { return (a - b).norm(); }

/** Unit vector at angle theta (radians). */
inline Vec unit(double theta) { return {std::cos(theta), std::sin(theta)}; }

/** Axis-aligned box. In one dimension the y extent is ignored. */
struct Box {
    Vec lo;
    Vec hi;

    bool contains(const Vec& p, int dim) const {
        if (p.x < lo.x || p.x > hi.x) return false;
        if (dim == 2 && (p.y < lo.y || p.y > hi.y)) return false;
        return true;
    }
    static Box centered(const Vec& c, double radius) {
        return {{c.x - radius, c.y - radius}, {c.x + radius, c.y + radius}};
    }
};

/**
 * Uniform rectangular grid in d in {1,2} dimensions. Nodes sit at
 * origin + h*(i,j) for 0 <= i < nx, 0 <= j < ny (ny == 1 when dim == 1).
 */
struct GridSpec {
    int dim = 2;
    int nx = 0;
    int ny = 1;
    double h = 0.0;
    Vec origin;

    static GridSpec make_1d(double lo, double hi, double h) {
        GridSpec g;
        g.dim = 1;
        g.h = h;
        g.origin = {lo, 0.0};
        g.nx = static_cast<int>(std::round((hi - lo) / h)) + 1;
        g.ny = 1;
        return g;
    }
    static GridSpec make_2d(const Box& box, double h) {
        GridSpec g;
        g.dim = 2;
        g.h = h;
        g.origin = box.lo;
        g.nx = static_cast<int>(std::round((box.hi.x - box.lo.x) / h)) + 1;
        g.ny = static_cast<int>(std::round((box.hi.y - box.lo.y) / h)) + 1;
        return g;
    }
    /** Square grid of half-width `radius` about `center`. */
    static GridSpec centered(const Vec& center, double radius, double h, int dim = 2) {
        if (dim == 1) return make_1d(center.x - radius, center.x + radius, h);
        return make_2d(Box::centered(center, radius), h);
    }

    std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }
    Vec node(int i, int j) const { return {origin.x + h * i, origin.y + h * j}; }
    bool in_range(int i, int j) const { return i >= 0 && i < nx && j >= 0 && j < ny; }

    /** Index of the node nearest to p (clamped to the grid). */
    void nearest(const Vec& p, int& i, int& j) const {
        i = static_cast<int>(std::lround((p.x - origin.x) / h));
        j = dim == 2 ? static_cast<int>(std::lround((p.y - origin.y) / h)) : 0;
        i = std::max(0, std::min(nx - 1, i));
        j = std::max(0, std::min(ny - 1, j));
    }

    Box bounds() const {
        return {origin, {origin.x + h * (nx - 1), dim == 2 ? origin.y + h * (ny - 1) : origin.y}};
    }
};

/** Scalar field sampled on a GridSpec, stored row-major. */
class GridFunction {
  public:
    GridFunction() = default;
    explicit GridFunction(const GridSpec& g, double fill = 0.0)
        : grid_(g), a_(g.size(), fill) {}

    const GridSpec& grid() const { return grid_; }
    double& at(int i, int j) { return a_[grid_.index(i, j)]; }
    double at(int i, int j) const { return a_[grid_.index(i, j)]; }
    double& operator[](std::size_t k) { return a_[k]; }
    double operator[](std::size_t k) const { return a_[k]; }
    std::size_t size() const { return a_.size(); }
    const std::vector<double>& data() const { return a_; }
    std::vector<double>& data() { return a_; }

    /** Bilinear (linear in 1d) interpolation; clamps to the grid bounds. */
    double interp(const Vec& p) const {
        const GridSpec& g = grid_;
        double fx = (p.x - g.origin.x) / g.h;
        int i0 = static_cast<int>(std::floor(fx));
        i0 = std::max(0, std::min(g.nx - 2, i0));
        double tx = std::min(1.0, std::max(0.0, fx - i0));
        if (g.dim == 1 || g.ny == 1) {
            if (g.nx == 1) return at(0, 0);
            return (1 - tx) * at(i0, 0) + tx * at(i0 + 1, 0);
        }
        double fy = (p.y - g.origin.y) / g.h;
        int j0 = static_cast<int>(std::floor(fy));
        j0 = std::max(0, std::min(g.ny - 2, j0));
        double ty = std::min(1.0, std::max(0.0, fy - j0));
        return (1 - tx) * (1 - ty) * at(i0, j0) + tx * (1 - ty) * at(i0 + 1, j0) +
               (1 - tx) * ty * at(i0, j0 + 1) + tx * ty * at(i0 + 1, j0 + 1);
    }

    double max_value() const {
        double m = -std::numeric_limits<double>::infinity();
        for (double v : a_) m = std::max(m, v);
        return m;
    }
    double min_value() const {
        double m = std::numeric_limits<double>::infinity();
        for (double v : a_) m = std::min(m, v);
        return m;
    }

  private:
    GridSpec grid_;
    std::vector<double> a_;
};

}  // namespace hjh
