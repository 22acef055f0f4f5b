#pragma once

// Sediment flux laws g_a (diffusive, slope-driven part) and g_c (current-driven
// part) as functions of the near-bed speed |u|.

#include <algorithm>
#include <cmath>
#include <string>

#include "tdm/errors.hpp"

namespace tdm {

/// Van Rijn threshold function: 0 below zero, sigma^(3/2) above.
inline double chi(double sigma) noexcept { return sigma < 0.0 ? 0.0 : sigma * std::sqrt(sigma); }

enum class LawKind { power3, vanrijn };
enum class LawSide { a, c };

inline std::string to_string(LawKind k) { return k == LawKind::power3 ? "power3" : "vanrijn"; }

inline LawKind parse_law_kind(const std::string& s)
{
    if (s == "power3") return LawKind::power3;
    if (s == "vanrijn") return LawKind::vanrijn;
    throw ConfigError("unknown transport law `" + s + "` (expected power3 or vanrijn)");
}

struct TransportLaw {
    LawKind kind = LawKind::power3;
    /// Squared nondimensional threshold velocity (vanrijn only).
    double u_c2 = 0.0;
    /// Speed above which g_a >= G_thr.
    double U_thr = 0.0;
    /// Diffusivity floor reached for u >= U_thr. Zero for power3: the cubic law
    /// has no positive floor at u = 0, the forcing amplitude supplies it.
    double G_thr = 0.0;

    static TransportLaw power3() { return {}; }

    static TransportLaw vanrijn(double u_c2, double G_thr = 0.01)
    {
        if (!(u_c2 >= 0.0)) throw ConfigError("vanrijn law: u_c^2 must be >= 0");
        if (!(G_thr > 0.0)) throw ConfigError("vanrijn law: G_thr must be > 0");
        TransportLaw law;
        law.kind = LawKind::vanrijn;
        law.u_c2 = u_c2;
        law.G_thr = G_thr;
        // chi(U^2 - u_c^2) = G_thr  <=>  U^2 = u_c^2 + G_thr^(2/3)
        law.U_thr = std::sqrt(u_c2 + std::cbrt(G_thr * G_thr));
        return law;
    }

    /// g_a or g_c at speed u >= 0. Both laws use the same function on each side.
    double g(LawSide /*side*/, double u) const
    {
        if (u < 0.0) throw ConfigError("transport law: negative speed " + std::to_string(u));
        if (kind == LawKind::power3) return u * u * u;
        return chi(u * u - u_c2);
    }

    double derivative(double u) const
    {
        if (kind == LawKind::power3) return 3.0 * u * u;
        const double s = u * u - u_c2;
        return s <= 0.0 ? 0.0 : 3.0 * u * std::sqrt(s);
    }

    /// Bound d on sup g + sup g' over speeds in [0, u_max].
    double bound(double u_max) const { return g(LawSide::a, u_max) + derivative(u_max); }
};

inline double eval_g(const TransportLaw& law, LawSide side, double u) { return law.g(side, u); }

}  // namespace tdm
