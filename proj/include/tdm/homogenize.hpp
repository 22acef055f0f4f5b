#pragma once

// Homogenized profile U(t, theta, x) and first-order corrector U1, both as
// theta-periodic zero-mean fixed points, and the two-scale reconstruction
// U(t, t/eps, x) + eps U1(t, t/eps, x).

#include <cmath>
#include <optional>
#include <string>

#include "tdm/errors.hpp"
#include "tdm/model.hpp"
#include "tdm/profile.hpp"
#include "tdm/solver.hpp"

namespace tdm {

/// Periodic solution of  dU/dtheta - div(A_hom grad U) = div(C_hom)  at frozen t.
inline PeriodicProfile cell_solve(const Model& model, const Grid& g, double t, const SolverConfig& cfg,
                                  const std::optional<ScalarField>& initial = std::nullopt)
{
    return find_periodic(make_cell_problem(model, g, t, 0.0, cfg.dt_per_period, CoefficientPart::homogenized), cfg, initial);
}

/// (later - earlier) / delta, sample by sample.
inline PeriodicProfile slow_time_derivative(const PeriodicProfile& earlier, const PeriodicProfile& later, double delta)
{
    if (!(delta > 0.0)) throw ConfigError("slow_time_derivative: delta must be > 0");
    if (earlier.steps() != later.steps() || !(earlier.grid() == later.grid()))
        throw ConfigError("slow_time_derivative: profiles on different lattices");
    PeriodicProfile d = later - earlier;
    for (auto& f : d.samples) f *= 1.0 / delta;
    d.t = 0.5 * (earlier.t + later.t);
    d.tau = later.tau;
    d.report = {};
    return d;
}

struct CorrectorResult {
    PeriodicProfile profile;
    /// Largest |mean| of the assembled right-hand side over the theta steps.
    double rhs_mean_max = 0.0;
    bool solvable = true;
};

inline constexpr double kSolvabilityTol = 1e-8;

/// Builds the corrector cell problem. Step k (ending at theta_{k+1}) carries
///   div(C1_{k+1}) + div(A1_{k+1} grad U_{k+1}) - dU/dt(theta_k),
/// the O(eps) residual of the fine backward-Euler scheme along U.
inline CellProblem make_corrector_problem(const Model& model, const PeriodicProfile& U, const PeriodicProfile& dU_dt,
                                          double* rhs_mean_max = nullptr)
{
    const int steps = U.steps();
    if (dU_dt.steps() != steps || !(dU_dt.grid() == U.grid()))
        throw ConfigError("corrector: U and dU/dt on different lattices");
    const Grid& g = U.grid();
    CellProblem cp;
    cp.t = U.t;
    cp.tau = U.tau;
    double worst = 0.0;
    for (int k = 0; k < steps; ++k) {
        const double theta = static_cast<double>(k + 1) / steps;
        CoefficientField hom = model.sample(g, U.t, U.tau, theta, CoefficientPart::homogenized);
        const CoefficientField first = model.sample(g, U.t, U.tau, theta, CoefficientPart::first_order);
        ScalarField src = divergence(first.C);
        src += flux_divergence(first.A, U.sample(k + 1));
        src -= dU_dt.sample(k);
        worst = std::max(worst, std::abs(mean(src)));
        remove_mean(src);
        cp.source.push_back(std::move(src));
        cp.diffusivity.push_back(std::move(hom.A));
    }
    if (rhs_mean_max) *rhs_mean_max = worst;
    return cp;
}

inline CorrectorResult solve_corrector(const Model& model, const PeriodicProfile& U, const PeriodicProfile& dU_dt,
                                       const SolverConfig& cfg)
{
    if (model.regime.structure() != TimeStructure::short_term)
        throw ConfigError("corrector: only the short-term model has a first-order corrector");
    if (model.regime.law.U_thr != 0.0)
        throw ConfigError("corrector: requires a law with U_thr = 0 (power3)");
    CorrectorResult out;
    const CellProblem cp = make_corrector_problem(model, U, dU_dt, &out.rhs_mean_max);
    out.solvable = out.rhs_mean_max <= kSolvabilityTol;
    out.profile = find_periodic(cp, cfg);
    return out;
}

/// U(t, t/eps, .) (+ eps U1(t, t/eps, .) for order 1).
inline ScalarField reconstruct(const ProfileFamily& U, const ProfileFamily* U1, double epsilon, double t, int order)
{
    if (order != 0 && order != 1) throw ConfigError("reconstruct: order must be 0 or 1");
    if (!(epsilon > 0.0)) throw ConfigError("reconstruct: epsilon must be > 0");
    const double theta = t / epsilon;
    ScalarField out = U.eval(t, 0.0, theta);
    if (order == 1) {
        if (!U1) throw ConfigError("reconstruct: order 1 requires the corrector family");
        out.axpy(epsilon, U1->eval(t, 0.0, theta));
    }
    return out;
}

}  // namespace tdm
