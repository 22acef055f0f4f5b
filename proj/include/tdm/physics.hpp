#pragma once

// Tidal forcing presets and assembly of the diffusivity A and source vector C
// of  dz/dt - s div(A grad z) = s div(C),  s = 1/eps (or 1/eps^2).

#include <array>
#include <cmath>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tdm/errors.hpp"
#include "tdm/grid.hpp"
#include "tdm/regime.hpp"
#include "tdm/transport_law.hpp"

namespace tdm {

using Vec2 = std::array<double, 2>;

inline double norm(const Vec2& v) { return std::hypot(v[0], v[1]); }

enum class ForcingPreset { rotating, unidirectional, tabulated };

inline std::string to_string(ForcingPreset p)
{
    switch (p) {
    case ForcingPreset::rotating: return "rotating";
    case ForcingPreset::unidirectional: return "unidirectional";
    case ForcingPreset::tabulated: return "tabulated";
    }
    return "?";
}

inline ForcingPreset parse_forcing_preset(const std::string& s)
{
    if (s == "rotating") return ForcingPreset::rotating;
    if (s == "unidirectional") return ForcingPreset::unidirectional;
    if (s == "tabulated") return ForcingPreset::tabulated;
    throw ConfigError("unknown forcing preset `" + s + "`");
}

/// Velocity and height samples on a theta lattice, node-sampled on a grid.
struct TabulatedForcing {
    std::vector<double> thetas;  ///< strictly increasing, in [0, 1)
    std::vector<ScalarField> u1;
    std::vector<ScalarField> u2;
    std::vector<ScalarField> m;  ///< empty: M defaults to zero

    void validate() const
    {
        if (thetas.empty()) throw ConfigError("tabulated forcing: no theta samples");
        if (u1.size() != thetas.size() || u2.size() != thetas.size())
            throw ConfigError("tabulated forcing: velocity files do not match theta list");
        if (!m.empty() && m.size() != thetas.size())
            throw ConfigError("tabulated forcing: height files do not match theta list");
        for (std::size_t k = 0; k < thetas.size(); ++k) {
            if (thetas[k] < 0.0 || thetas[k] >= 1.0) throw ConfigError("tabulated forcing: theta outside [0, 1)");
            if (k && !(thetas[k] > thetas[k - 1])) throw ConfigError("tabulated forcing: thetas not increasing");
            if (!(u1[k].grid() == u1[0].grid()) || !(u2[k].grid() == u1[0].grid()))
                throw ConfigError("tabulated forcing: mixed grids");
        }
    }
};

struct ForcingSample {
    Vec2 U{0.0, 0.0};
    double M = 0.0;
};

struct ForcingParams {
    ForcingPreset preset = ForcingPreset::rotating;
    double amplitude = 1.0;
    /// Relative spatial modulation of the amplitude along x1 + x2.
    double spatial_modulation = 0.25;
    /// Relative slow-time modulation of the spatial part.
    double slow_modulation = 0.0;
    /// Direction of the unidirectional tide (radians from the x1 axis).
    double direction_angle = 0.0;
    double m_amplitude = 1.0;
    double u1_amplitude = 0.0;
    double u2_amplitude = 0.0;
    double m2_amplitude = 0.0;
};

class Forcing {
  public:
    using Params = ForcingParams;

    Forcing() : Forcing(Params{}) {}

    explicit Forcing(Params p) : p_(p)
    {
        if (p_.preset == ForcingPreset::tabulated)
            throw ConfigError("tabulated forcing must be built from tabulated samples");
        if (!(p_.amplitude > 0.0)) throw ConfigError("forcing: amplitude must be > 0");
        if (!(std::abs(p_.spatial_modulation) * (1.0 + std::abs(p_.slow_modulation)) < 1.0))
            throw ConfigError("forcing: modulation must keep the amplitude positive");
    }

    explicit Forcing(TabulatedForcing table) : table_(std::make_shared<TabulatedForcing>(std::move(table)))
    {
        p_.preset = ForcingPreset::tabulated;
        table_->validate();
    }

    static Forcing rotating(Params p = {})
    {
        p.preset = ForcingPreset::rotating;
        return Forcing(p);
    }
    static Forcing unidirectional(Params p = {})
    {
        p.preset = ForcingPreset::unidirectional;
        return Forcing(p);
    }

    ForcingPreset preset() const noexcept { return p_.preset; }
    const Params& params() const noexcept { return p_; }

    /// Slowly varying amplitude amp(t, x) of the analytic presets.
    double amplitude(double t, double x1, double x2) const
    {
        constexpr double two_pi = 2.0 * std::numbers::pi;
        return p_.amplitude
               * (1.0 + p_.spatial_modulation * (1.0 + p_.slow_modulation * std::sin(two_pi * t))
                            * std::sin(two_pi * (x1 + x2)));
    }

    double amplitude_min() const
    {
        if (table_) return 0.0;
        return p_.amplitude * (1.0 - std::abs(p_.spatial_modulation) * (1.0 + std::abs(p_.slow_modulation)));
    }
    double amplitude_max() const
    {
        if (table_) {
            double m = 0.0;
            for (std::size_t k = 0; k < table_->thetas.size(); ++k)
                for (std::size_t q = 0; q < table_->u1[k].size(); ++q)
                    m = std::max(m, std::hypot(table_->u1[k][q], table_->u2[k][q]));
            return m;
        }
        return p_.amplitude * (1.0 + std::abs(p_.spatial_modulation) * (1.0 + std::abs(p_.slow_modulation)));
    }
    double height_max() const
    {
        if (table_) {
            double m = 0.0;
            for (const auto& f : table_->m) m = std::max(m, norm_max(f));
            return m;
        }
        return std::abs(p_.m_amplitude);
    }

    /// Main velocity U(t, theta, x) and height variation M(t, theta, x).
    ForcingSample eval(double t, double /*tau*/, double theta, double x1, double x2) const
    {
        constexpr double two_pi = 2.0 * std::numbers::pi;
        if (table_) return eval_table(theta, x1, x2);
        const double amp = amplitude(t, x1, x2);
        ForcingSample s;
        if (p_.preset == ForcingPreset::rotating) {
            s.U = {amp * std::cos(two_pi * theta), amp * std::sin(two_pi * theta)};
        } else {
            const double w = amp * std::sin(two_pi * theta);
            s.U = {w * std::cos(p_.direction_angle), w * std::sin(p_.direction_angle)};
        }
        s.M = p_.m_amplitude * std::cos(two_pi * theta);
        return s;
    }

    /// Lunar-month perturbation U1(t, tau, theta, x) of the mean-term model.
    Vec2 u1(double /*t*/, double tau, double theta, double /*x1*/, double /*x2*/) const
    {
        if (p_.u1_amplitude == 0.0) return {0.0, 0.0};
        constexpr double two_pi = 2.0 * std::numbers::pi;
        const double w = p_.u1_amplitude * std::cos(two_pi * tau);
        return {w * std::cos(two_pi * theta), w * std::sin(two_pi * theta)};
    }

    /// Slow perturbations U2, M2 of the long-term model.
    Vec2 u2(double t, double theta, double /*x1*/, double /*x2*/) const
    {
        if (p_.u2_amplitude == 0.0) return {0.0, 0.0};
        constexpr double two_pi = 2.0 * std::numbers::pi;
        const double w = p_.u2_amplitude * std::cos(two_pi * t);
        return {w * std::cos(two_pi * theta), w * std::sin(two_pi * theta)};
    }
    double m2(double t, double theta, double /*x1*/, double /*x2*/) const
    {
        if (p_.m2_amplitude == 0.0) return 0.0;
        constexpr double two_pi = 2.0 * std::numbers::pi;
        return p_.m2_amplitude * std::cos(two_pi * t) * std::sin(two_pi * theta);
    }

    /// Interval [theta_alpha, theta_omega] on which |U| >= U_thr everywhere.
    std::pair<double, double> threshold_window(double U_thr) const
    {
        if (U_thr <= 0.0) return {0.0, 1.0};
        const double amin = amplitude_min();
        if (table_ || amin < U_thr)
            throw ConfigError("forcing: no theta window with |U| >= U_thr = " + std::to_string(U_thr));
        if (p_.preset == ForcingPreset::rotating) return {0.0, 1.0};
        const double shift = std::asin(U_thr / amin) / (2.0 * std::numbers::pi);
        return {shift, 0.5 - shift};
    }

    /// Whether theta -> U has zero mean over a period.
    bool zero_theta_mean() const { return !table_; }

  private:
    ForcingSample eval_table(double theta, double x1, double x2) const
    {
        const auto& tb = *table_;
        const std::size_t count = tb.thetas.size();
        double th = theta - std::floor(theta);
        // Bracketing samples, periodic in theta.
        std::size_t hi = 0;
        while (hi < count && tb.thetas[hi] <= th) ++hi;
        const std::size_t lo = hi == 0 ? count - 1 : hi - 1;
        const std::size_t up = hi == count ? 0 : hi;
        double t0 = tb.thetas[lo];
        double t1 = tb.thetas[up];
        if (t1 <= t0) t1 += 1.0;
        if (th < t0) th += 1.0;
        const double w = count == 1 ? 0.0 : (th - t0) / (t1 - t0);
        auto bilinear = [&](const ScalarField& f) {
            const Grid& g = f.grid();
            const double sx = x1 / g.h();
            const double sy = x2 / g.h();
            const int i = static_cast<int>(std::floor(sx));
            const int j = static_cast<int>(std::floor(sy));
            const double fx = sx - i;
            const double fy = sy - j;
            return (1 - fx) * (1 - fy) * f(i, j) + fx * (1 - fy) * f(i + 1, j) + (1 - fx) * fy * f(i, j + 1)
                   + fx * fy * f(i + 1, j + 1);
        };
        ForcingSample s;
        s.U = {(1 - w) * bilinear(tb.u1[lo]) + w * bilinear(tb.u1[up]),
               (1 - w) * bilinear(tb.u2[lo]) + w * bilinear(tb.u2[up])};
        if (!tb.m.empty()) s.M = (1 - w) * bilinear(tb.m[lo]) + w * bilinear(tb.m[up]);
        return s;
    }

    Params p_;
    std::shared_ptr<const TabulatedForcing> table_;
};

/// Pointwise coefficients: the full model pair (A, C), its eps-free part
/// (A_hom, C_hom) and the first-order split A = A_hom + eps A1, C = C_hom + eps C1.
struct CoefficientSample {
    double A = 0.0;
    Vec2 C{0.0, 0.0};
    double A_hom = 0.0;
    Vec2 C_hom{0.0, 0.0};
    double A1 = 0.0;
    Vec2 C1{0.0, 0.0};
};

/// Below this speed the direction U/|U| is replaced by the zero vector.
inline constexpr double kSpeedFloor = 1e-12;

inline Vec2 direction(const Vec2& u)
{
    const double s = norm(u);
    if (s <= kSpeedFloor) return {0.0, 0.0};
    return {u[0] / s, u[1] / s};
}

inline CoefficientSample assemble_coefficients(const TransportLaw& law, const Forcing& f, const RegimeSpec& regime,
                                               double t, double tau, double theta, double x1, double x2)
{
    const ForcingSample base = f.eval(t, tau, theta, x1, x2);
    const double eps = regime.epsilon;
    const double a = regime.a, b = regime.b, c = regime.c;

    CoefficientSample s;
    const double speed = norm(base.U);
    const double ga = law.g(LawSide::a, speed);
    const double gc = law.g(LawSide::c, speed);
    const Vec2 dir = direction(base.U);
    s.A_hom = a * ga;
    s.C_hom = {c * gc * dir[0], c * gc * dir[1]};

    if (regime.structure() == TimeStructure::short_term) {
        s.A1 = -a * b * base.M * ga;
        s.C1 = {-c * b * base.M * gc * dir[0], -c * b * base.M * gc * dir[1]};
        s.A = s.A_hom + eps * s.A1;
        s.C = {s.C_hom[0] + eps * s.C1[0], s.C_hom[1] + eps * s.C1[1]};
        return s;
    }

    Vec2 u = base.U;
    double m = base.M;
    if (regime.structure() == TimeStructure::mean_term) {
        const Vec2 p = f.u1(t, tau, theta, x1, x2);
        const double r = std::sqrt(eps);
        u = {u[0] + r * p[0], u[1] + r * p[1]};
    } else {
        const Vec2 p = f.u2(t, theta, x1, x2);
        u = {u[0] + eps * eps * p[0], u[1] + eps * eps * p[1]};
        m += eps * eps * f.m2(t, theta, x1, x2);
    }
    const double height = 1.0 - b * regime.height_factor() * m;
    const double su = norm(u);
    const Vec2 du = direction(u);
    s.A = a * height * law.g(LawSide::a, su);
    const double cmag = c * height * law.g(LawSide::c, su);
    s.C = {cmag * du[0], cmag * du[1]};
    s.A1 = (s.A - s.A_hom) / eps;
    s.C1 = {(s.C[0] - s.C_hom[0]) / eps, (s.C[1] - s.C_hom[1]) / eps};
    return s;
}

/// Which part of the coefficient split to sample on the grid.
enum class CoefficientPart { full, homogenized, first_order };

/// Face-sampled coefficients of one frozen instant.
struct CoefficientField {
    VectorField A;  ///< diffusivity on x-faces (xs) and y-faces (ys)
    VectorField C;  ///< staggered source vector
};

inline CoefficientField assemble_field(const TransportLaw& law, const Forcing& f, const RegimeSpec& regime,
                                       const Grid& g, double t, double tau, double theta,
                                       CoefficientPart part = CoefficientPart::full)
{
    CoefficientField out{VectorField(g), VectorField(g)};
    auto pick = [part](const CoefficientSample& s) -> std::pair<double, Vec2> {
        switch (part) {
        case CoefficientPart::homogenized: return {s.A_hom, s.C_hom};
        case CoefficientPart::first_order: return {s.A1, s.C1};
        default: return {s.A, s.C};
        }
    };
    for (int i = 0; i < g.n(); ++i)
        for (int j = 0; j < g.n(); ++j) {
            const auto [ax, cx] = pick(assemble_coefficients(law, f, regime, t, tau, theta, g.face_coord(i), g.coord(j)));
            const auto [ay, cy] = pick(assemble_coefficients(law, f, regime, t, tau, theta, g.coord(i), g.face_coord(j)));
            out.A.x(i, j) = ax;
            out.A.y(i, j) = ay;
            out.C.x(i, j) = cx[0];
            out.C.y(i, j) = cy[1];
        }
    return out;
}

/// Constant gamma with |C|^2 <= gamma * A, from g_c <= g_a <= d on the forcing's speed range.
inline double gamma_bound(const TransportLaw& law, const Forcing& f, const RegimeSpec& regime)
{
    double u_max = f.amplitude_max();
    if (regime.structure() == TimeStructure::mean_term)
        u_max += std::sqrt(regime.epsilon) * std::abs(f.params().u1_amplitude);
    if (regime.structure() == TimeStructure::long_term)
        u_max += regime.epsilon * regime.epsilon * std::abs(f.params().u2_amplitude);
    const double d = law.bound(u_max);
    const double height_max = 1.0 + std::abs(regime.b) * regime.height_factor() * (f.height_max() + std::abs(f.params().m2_amplitude));
    return regime.c * regime.c * d * height_max / regime.a;
}

}  // namespace tdm
