#pragma once

// Dimensional analysis of the Exner equation with a slope-corrected Van Rijn
// flux: from physical scales to the small parameter eps and the
// dimensionless coefficients a, b, c of each regime.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "tdm/errors.hpp"
#include "tdm/regime.hpp"

namespace tdm {

struct PhysicalParams {
    double u_bar = 1.0;            ///< characteristic velocity [m/s]
    double H = 50.0;               ///< mean water height [m]
    double M_bar = 5.0;            ///< tidal height variation [m]
    double D_G = 1e-4;             ///< grain diameter [m]
    double rho = 1000.0;           ///< water density [kg/m^3]
    double p = 0.5;                ///< porosity
    double lambda = 0.5;           ///< inverse of the maximal slope
    double alpha = 100.0;          ///< flux constant
    double u_c = 0.0;              ///< critical velocity [m/s]
    double t_bar = 8.6e6;          ///< observation time [s]
    double omega_bar_inv = 4.7e4;  ///< main tide period [s]
    double omega_c_bar_inv = 2.6e6;///< lunar-month period [s]
    double z_bar = 1.0;            ///< dune height [m]
    double L_bar = 10.0;           ///< dune wavelength [m]

    /// Inputs that were left at their default rather than set explicitly.
    bool rho_defaulted = true;
    bool alpha_defaulted = true;

    /// The characteristic values quoted for each regime.
    static PhysicalParams defaults_for(RegimeKind kind)
    {
        PhysicalParams p;
        switch (kind) {
        case RegimeKind::short_small: break;
        case RegimeKind::short_big:
            p.D_G = 5e-3, p.z_bar = 50.0, p.L_bar = 300.0, p.u_c = 0.5;
            break;
        case RegimeKind::mean_small:
            p.t_bar = 1.4e8, p.D_G = 5e-5;
            break;
        case RegimeKind::long_small:
            // 16 years ~ 1.4e5 hours
            p.t_bar = 1.4e5 * 3600.0, p.D_G = 7e-5;
            break;
        }
        return p;
    }

    void validate() const
    {
        auto positive = [](double v, const char* name) {
            if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string("physical parameter ") + name + " must be positive");
        };
        positive(u_bar, "u_bar");
        positive(H, "H");
        positive(M_bar, "M_bar");
        positive(D_G, "D_G");
        positive(rho, "rho");
        positive(lambda, "lambda");
        positive(alpha, "alpha");
        positive(t_bar, "t_bar");
        positive(omega_bar_inv, "omega_bar_inv");
        positive(omega_c_bar_inv, "omega_c_bar_inv");
        positive(z_bar, "z_bar");
        positive(L_bar, "L_bar");
        if (!(p >= 0.0 && p < 1.0)) throw ConfigError("physical parameter p (porosity) must lie in [0, 1)");
        if (!(u_c >= 0.0)) throw ConfigError("physical parameter u_c must be >= 0");
        if (!(D_G < 4.0 * H)) throw ConfigError("grain diameter D_G must be below 4H (log factor must be positive)");
        if (!(D_G < H)) throw ConfigError("grain diameter D_G must be below the water height H");
    }
};

/// A computed factor next to the rounded magnitude it is usually quoted with.
struct FactorCheck {
    std::string name;
    double computed = 0.0;
    double quoted = 0.0;

    double ratio() const { return computed / quoted; }
    bool within(double factor) const { return ratio() <= factor && ratio() >= 1.0 / factor; }
};

struct RegimeDerivation {
    RegimeKind kind = RegimeKind::short_small;
    double epsilon = 0.0;
    /// 1/(t_bar omega_c): the lunar phase rate (mean-term, where it should be ~ sqrt(eps)).
    double lunar_ratio = 0.0;
    double log_factor = 0.0;  ///< ln(4H/D_G)
    double F_diff = 0.0;
    double F_src = 0.0;
    double F_height = 0.0;
    RegimeSpec exact;
    RegimeSpec snapped;
    std::vector<FactorCheck> checks;
    std::vector<std::string> defaulted;
};

inline RegimeDerivation derive_regime(const PhysicalParams& params, RegimeKind kind)
{
    params.validate();
    RegimeDerivation d;
    d.kind = kind;
    const TimeStructure structure = structure_of(kind);

    d.epsilon = structure == TimeStructure::long_term ? params.omega_c_bar_inv / params.t_bar
                                                      : params.omega_bar_inv / params.t_bar;
    if (!(d.epsilon < 1.0))
        throw ConfigError("derived eps = " + std::to_string(d.epsilon) + " is not below 1");
    d.lunar_ratio = params.omega_c_bar_inv / params.t_bar;

    d.log_factor = std::log(4.0 * params.H / params.D_G);
    const double transport = params.alpha * params.t_bar * std::pow(params.u_bar, 3)
                             * std::pow(params.rho * params.D_G, 1.5) / std::pow(d.log_factor, 3);
    const double inv_solid = 1.0 / (1.0 - params.p);
    d.F_diff = params.lambda * inv_solid * transport / (params.L_bar * params.L_bar);
    d.F_src = inv_solid * transport / (params.L_bar * params.z_bar);
    d.F_height = 3.0 * params.M_bar / (params.H * d.log_factor);

    const double eps = d.epsilon;
    RegimeSpec r;
    r.kind = kind;
    r.epsilon = eps;
    switch (structure) {
    case TimeStructure::short_term:
        r.a = d.F_diff * eps, r.c = d.F_src * eps, r.b = d.F_height / eps;
        break;
    case TimeStructure::mean_term:
        r.a = d.F_diff * eps, r.c = d.F_src * eps, r.b = d.F_height / std::sqrt(eps);
        break;
    case TimeStructure::long_term:
        r.a = d.F_diff * eps * eps, r.c = d.F_src * eps * eps, r.b = d.F_height / eps;
        break;
    }
    const double uc = params.u_c / params.u_bar;
    r.law = uc > 0.0 ? TransportLaw::vanrijn(uc * uc) : TransportLaw::power3();
    r.validate();
    d.exact = r;
    d.snapped = snapped_regime(kind);

    switch (kind) {
    case RegimeKind::short_small:
        d.checks = {{"epsilon", eps, 1.0 / 200.0},
                    {"F_diff", d.F_diff, 90.0},
                    {"F_src", d.F_src, 1800.0},
                    {"F_height", d.F_height, 2e-2}};
        break;
    case RegimeKind::short_big:
        d.checks = {{"epsilon", eps, 1.0 / 200.0},
                    {"F_diff", d.F_diff, 90.0},
                    {"F_src", d.F_src, 1000.0},
                    {"F_height", d.F_height, 1.3e-2}};
        break;
    case RegimeKind::mean_small:
        d.checks = {{"epsilon", eps, 1.0 / 3000.0},
                    {"lunar_ratio", d.lunar_ratio, 1.0 / 54.0},
                    {"lunar_ratio_vs_sqrt_eps", d.lunar_ratio, std::sqrt(eps)}};
        break;
    case RegimeKind::long_small:
        d.checks = {{"epsilon", eps, 1.0 / 192.0}};
        break;
    }

    if (params.rho_defaulted) d.defaulted.emplace_back("rho");
    if (params.alpha_defaulted) d.defaulted.emplace_back("alpha");
    return d;
}

}  // namespace tdm
