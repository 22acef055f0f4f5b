#pragma once

// Uniform periodic discretization of the unit torus R^2/Z^2.
//
// Scalar fields live at cell centres x = (i h, j h). Vector fields are
// staggered (MAC layout): the first component of face (i, j) sits at
// ((i + 1/2) h, j h), the second at (i h, (j + 1/2) h). With this layout
// `divergence` is the exact negative adjoint of `gradient`, so any
// diffusion operator div(A grad .) built from them is symmetric and
// conserves the discrete mass to round-off.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tdm/errors.hpp"

namespace tdm {

class Grid {
  public:
    Grid() = default;

    int n() const noexcept { return n_; }
    double h() const noexcept { return h_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_); }

    int wrap(int i) const noexcept
    {
        const int r = i % n_;
        return r < 0 ? r + n_ : r;
    }

    /// Row-major flat index; i runs along x1, j along x2.
    std::size_t index(int i, int j) const noexcept
    {
        return static_cast<std::size_t>(wrap(i)) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(wrap(j));
    }

    double coord(int i) const noexcept { return static_cast<double>(i) * h_; }
    double face_coord(int i) const noexcept { return (static_cast<double>(i) + 0.5) * h_; }

    friend bool operator==(const Grid& a, const Grid& b) noexcept { return a.n_ == b.n_; }

  private:
    friend Grid make_grid(int n);
    explicit Grid(int n) : n_(n), h_(1.0 / static_cast<double>(n)) {}

    int n_ = 4;
    double h_ = 0.25;
};

inline Grid make_grid(int n)
{
    if (n < 4) throw ConfigError("grid: n must be at least 4, got " + std::to_string(n));
    if (n % 2 != 0) throw ConfigError("grid: n must be even, got " + std::to_string(n));
    return Grid(n);
}

class ScalarField {
  public:
    ScalarField() = default;
    explicit ScalarField(const Grid& g, double value = 0.0) : grid_(g), values_(g.size(), value) {}

    ScalarField(const Grid& g, std::vector<double> values) : grid_(g), values_(std::move(values))
    {
        if (values_.size() != grid_.size())
            throw ConfigError("ScalarField: expected " + std::to_string(grid_.size()) + " values, got "
                              + std::to_string(values_.size()));
        for (double v : values_)
            if (!std::isfinite(v)) throw ConfigError("ScalarField: non-finite value");
    }

    template <class F>
    static ScalarField sample(const Grid& g, F&& f)
    {
        ScalarField out(g);
        for (int i = 0; i < g.n(); ++i)
            for (int j = 0; j < g.n(); ++j) out.values_[g.index(i, j)] = f(g.coord(i), g.coord(j));
        return out;
    }

    const Grid& grid() const noexcept { return grid_; }
    double& operator()(int i, int j) noexcept { return values_[grid_.index(i, j)]; }
    double operator()(int i, int j) const noexcept { return values_[grid_.index(i, j)]; }
    double& operator[](std::size_t k) noexcept { return values_[k]; }
    double operator[](std::size_t k) const noexcept { return values_[k]; }

    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }

    ScalarField& operator+=(const ScalarField& o)
    {
        for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += o.values_[k];
        return *this;
    }
    ScalarField& operator-=(const ScalarField& o)
    {
        for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= o.values_[k];
        return *this;
    }
    ScalarField& operator*=(double s)
    {
        for (double& v : values_) v *= s;
        return *this;
    }
    /// this += s * o
    ScalarField& axpy(double s, const ScalarField& o)
    {
        for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += s * o.values_[k];
        return *this;
    }

    friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
    friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
    friend ScalarField operator*(double s, ScalarField a) { return a *= s; }

  private:
    Grid grid_;
    std::vector<double> values_;
};

/// Face-staggered 2-vector field; also used for face-sampled diffusivities.
class VectorField {
  public:
    VectorField() = default;
    explicit VectorField(const Grid& g, double vx = 0.0, double vy = 0.0)
        : grid_(g), x_(g.size(), vx), y_(g.size(), vy)
    {
    }

    /// Samples f(x1, x2) -> {v1, v2} at the staggered face locations.
    template <class F>
    static VectorField sample(const Grid& g, F&& f)
    {
        VectorField out(g);
        for (int i = 0; i < g.n(); ++i)
            for (int j = 0; j < g.n(); ++j) {
                const auto k = g.index(i, j);
                out.x_[k] = f(g.face_coord(i), g.coord(j)).first;
                out.y_[k] = f(g.coord(i), g.face_coord(j)).second;
            }
        return out;
    }

    const Grid& grid() const noexcept { return grid_; }
    double& x(int i, int j) noexcept { return x_[grid_.index(i, j)]; }
    double& y(int i, int j) noexcept { return y_[grid_.index(i, j)]; }
    double x(int i, int j) const noexcept { return x_[grid_.index(i, j)]; }
    double y(int i, int j) const noexcept { return y_[grid_.index(i, j)]; }

    std::span<double> xs() noexcept { return x_; }
    std::span<double> ys() noexcept { return y_; }
    std::span<const double> xs() const noexcept { return x_; }
    std::span<const double> ys() const noexcept { return y_; }

    VectorField& operator*=(double s)
    {
        for (double& v : x_) v *= s;
        for (double& v : y_) v *= s;
        return *this;
    }

    bool finite() const noexcept
    {
        for (double v : x_)
            if (!std::isfinite(v)) return false;
        for (double v : y_)
            if (!std::isfinite(v)) return false;
        return true;
    }

  private:
    Grid grid_;
    std::vector<double> x_;
    std::vector<double> y_;
};

inline VectorField gradient(const ScalarField& f)
{
    const Grid& g = f.grid();
    const double inv_h = 1.0 / g.h();
    VectorField out(g);
    for (int i = 0; i < g.n(); ++i)
        for (int j = 0; j < g.n(); ++j) {
            const double c = f(i, j);
            out.x(i, j) = (f(i + 1, j) - c) * inv_h;
            out.y(i, j) = (f(i, j + 1) - c) * inv_h;
        }
    return out;
}

inline ScalarField divergence(const VectorField& v)
{
    const Grid& g = v.grid();
    const double inv_h = 1.0 / g.h();
    ScalarField out(g);
    for (int i = 0; i < g.n(); ++i)
        for (int j = 0; j < g.n(); ++j)
            out(i, j) = (v.x(i, j) - v.x(i - 1, j) + v.y(i, j) - v.y(i, j - 1)) * inv_h;
    return out;
}

/// div(a grad f) with `a` sampled on faces.
inline ScalarField flux_divergence(const VectorField& a, const ScalarField& f)
{
    VectorField flux = gradient(f);
    auto fx = flux.xs();
    auto fy = flux.ys();
    auto ax = a.xs();
    auto ay = a.ys();
    for (std::size_t k = 0; k < fx.size(); ++k) {
        fx[k] *= ax[k];
        fy[k] *= ay[k];
    }
    return divergence(flux);
}

inline double sum(const ScalarField& f)
{
    const auto v = f.values();
    return std::accumulate(v.begin(), v.end(), 0.0);
}

/// Discrete integral over the torus.
inline double mass(const ScalarField& f)
{
    const double h = f.grid().h();
    return h * h * sum(f);
}

/// Spatial mean; equals mass on the unit torus.
inline double mean(const ScalarField& f) { return mass(f); }

inline double inner(const ScalarField& a, const ScalarField& b)
{
    const auto va = a.values();
    const auto vb = b.values();
    return std::inner_product(va.begin(), va.end(), vb.begin(), 0.0);
}

inline double inner(const VectorField& a, const VectorField& b)
{
    const auto ax = a.xs(), ay = a.ys(), bx = b.xs(), by = b.ys();
    return std::inner_product(ax.begin(), ax.end(), bx.begin(), 0.0)
           + std::inner_product(ay.begin(), ay.end(), by.begin(), 0.0);
}

inline double norm_l2(const ScalarField& f)
{
    const double h = f.grid().h();
    return std::sqrt(h * h * inner(f, f));
}

inline double norm_l2_distance(const ScalarField& a, const ScalarField& b) { return norm_l2(a - b); }

inline double norm_max(const ScalarField& f)
{
    double m = 0.0;
    for (double v : f.values()) m = std::max(m, std::abs(v));
    return m;
}

inline void remove_mean(ScalarField& f)
{
    const double m = sum(f) / static_cast<double>(f.size());
    for (double& v : f.values()) v -= m;
}

}  // namespace tdm
