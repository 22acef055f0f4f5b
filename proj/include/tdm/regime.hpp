#pragma once

#include <cmath>
#include <string>

#include "tdm/errors.hpp"
#include "tdm/transport_law.hpp"

namespace tdm {

enum class RegimeKind { short_small, short_big, mean_small, long_small };

/// How the small parameter enters the model.
enum class TimeStructure {
    short_term,  ///< stiffness 1/eps, height factor eps
    mean_term,   ///< stiffness 1/eps, height factor sqrt(eps), extra lunar phase tau = t/sqrt(eps)
    long_term,   ///< stiffness 1/eps^2, height factor eps
};

inline std::string to_string(RegimeKind k)
{
    switch (k) {
    case RegimeKind::short_small: return "short_small";
    case RegimeKind::short_big: return "short_big";
    case RegimeKind::mean_small: return "mean_small";
    case RegimeKind::long_small: return "long_small";
    }
    return "?";
}

inline RegimeKind parse_regime_kind(const std::string& s)
{
    if (s == "short_small") return RegimeKind::short_small;
    if (s == "short_big") return RegimeKind::short_big;
    if (s == "mean_small") return RegimeKind::mean_small;
    if (s == "long_small") return RegimeKind::long_small;
    throw ConfigError("unknown regime `" + s + "` (expected short_small, short_big, mean_small or long_small)");
}

inline TimeStructure structure_of(RegimeKind k)
{
    switch (k) {
    case RegimeKind::mean_small: return TimeStructure::mean_term;
    case RegimeKind::long_small: return TimeStructure::long_term;
    default: return TimeStructure::short_term;
    }
}

struct RegimeSpec {
    RegimeKind kind = RegimeKind::short_small;
    double epsilon = 1.0 / 200.0;
    double a = 0.5;
    double b = 4.0;
    double c = 10.0;
    TransportLaw law;

    TimeStructure structure() const { return structure_of(kind); }

    /// Factor in front of the diffusion and source terms.
    double stiffness() const
    {
        return structure() == TimeStructure::long_term ? 1.0 / (epsilon * epsilon) : 1.0 / epsilon;
    }

    /// Factor multiplying b * M in (1 - b * factor * M).
    double height_factor() const
    {
        return structure() == TimeStructure::mean_term ? std::sqrt(epsilon) : epsilon;
    }

    void validate() const
    {
        if (!(epsilon > 0.0 && epsilon < 1.0))
            throw ConfigError("regime: epsilon must lie in (0, 1), got " + std::to_string(epsilon));
        if (!(a > 0.0)) throw ConfigError("regime: a must be > 0, got " + std::to_string(a));
        if (!std::isfinite(b) || !std::isfinite(c)) throw ConfigError("regime: b and c must be finite");
    }

    RegimeSpec with_epsilon(double eps) const
    {
        RegimeSpec r = *this;
        r.epsilon = eps;
        r.validate();
        return r;
    }
};

/// Rounded coefficients the short-term small-grain model is usually quoted with.
inline RegimeSpec snapped_regime(RegimeKind kind)
{
    RegimeSpec r;
    r.kind = kind;
    switch (kind) {
    case RegimeKind::short_small:
        r.epsilon = 1.0 / 200.0, r.a = 0.5, r.b = 4.0, r.c = 10.0;
        break;
    case RegimeKind::short_big:
        r.epsilon = 1.0 / 200.0, r.a = 0.5, r.b = 3.0, r.c = 5.0;
        r.law = TransportLaw::vanrijn(0.5);
        break;
    case RegimeKind::mean_small:
        r.epsilon = 1.0 / 3000.0, r.a = 1.0, r.b = 1.0, r.c = 20.0;
        break;
    case RegimeKind::long_small:
        r.epsilon = 1.0 / 192.0, r.a = 1.0, r.b = 4.0, r.c = 20.0;
        break;
    }
    return r;
}

}  // namespace tdm
