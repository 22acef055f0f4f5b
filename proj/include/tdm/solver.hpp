#pragma once

// Implicit time stepping of  dz/dt - s div((A + nu) grad z) = s div(C)  on the
// torus, the penalized theta-evolution over one period, and the periodic fixed
// point of that period map.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tdm/errors.hpp"
#include "tdm/field_io.hpp"
#include "tdm/grid.hpp"
#include "tdm/model.hpp"
#include "tdm/physics.hpp"
#include "tdm/profile.hpp"
#include "tdm/regime.hpp"

namespace tdm {

struct ContinuationEntry {
    double mu = 0.0;
    double nu = 0.0;
};

inline std::vector<ContinuationEntry> default_continuation()
{
    return {{1.0, 1e-2}, {0.25, 1e-3}, {0.0, 1e-4}, {0.0, 0.0}};
}

struct SolverConfig {
    int dt_per_period = 64;
    double linear_tol = 1e-10;
    int linear_maxiter = 20000;
    /// Regularization added to A in fine runs and single period maps.
    double nu = 0.0;
    /// Penalization used by single period maps.
    double mu = 0.0;
    double fixed_point_tol = 1e-9;
    std::vector<ContinuationEntry> continuation = default_continuation();
    int max_fixed_point_iters = 1000;
    /// When the last stage (nu = 0) does not converge, keep the previous stage's
    /// fixed point instead of failing.
    bool skip_unconverged_final = true;
    /// Diagonal preconditioning of the linear solves.
    bool jacobi = false;

    void validate() const
    {
        if (dt_per_period < 16) throw ConfigError("solver: dt_per_period must be >= 16");
        if (!(linear_tol > 0.0 && linear_tol <= 1e-6)) throw ConfigError("solver: linear_tol must lie in (0, 1e-6]");
        if (linear_maxiter <= 0) throw ConfigError("solver: linear_maxiter must be positive");
        if (!(nu >= 0.0)) throw ConfigError("solver: nu must be >= 0");
        if (!(mu >= 0.0)) throw ConfigError("solver: mu must be >= 0");
        if (!(fixed_point_tol > 0.0)) throw ConfigError("solver: fixed_point_tol must be > 0");
        if (max_fixed_point_iters <= 0) throw ConfigError("solver: max_fixed_point_iters must be positive");
        if (continuation.empty()) throw ConfigError("solver: continuation schedule is empty");
        for (const auto& e : continuation)
            if (!(e.mu >= 0.0 && e.nu >= 0.0)) throw ConfigError("solver: continuation entries must be >= 0");
    }
};

/// Parses "mu:nu,mu:nu,...".
inline std::vector<ContinuationEntry> parse_continuation(const std::string& text)
{
    std::vector<ContinuationEntry> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto comma = text.find(',', pos);
        const std::string item = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw ConfigError("continuation entry `" + item + "` is not mu:nu");
        try {
            out.push_back({std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1))});
        } catch (const std::exception&) {
            throw ConfigError("continuation entry `" + item + "` is not numeric");
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (out.empty()) throw ConfigError("continuation schedule is empty");
    return out;
}

inline std::string format_continuation(const std::vector<ContinuationEntry>& c)
{
    std::string s;
    for (std::size_t k = 0; k < c.size(); ++k) {
        if (k) s += ',';
        s += detail::fmt(c[k].mu) + ":" + detail::fmt(c[k].nu);
    }
    return s;
}

/// y = x - kappa div(k grad x) with k = A + nu on faces.
class ImplicitOperator {
  public:
    ImplicitOperator(const VectorField& A, double nu, double kappa) : n_(A.grid().n()), kx_(A.xs().begin(), A.xs().end()),
                                                                      ky_(A.ys().begin(), A.ys().end())
    {
        const double h = A.grid().h();
        const double scale = kappa / (h * h);
        for (auto* faces : {&kx_, &ky_})
            for (auto& v : *faces) {
                if (!(v >= 0.0)) throw ConfigError("implicit step: diffusivity must be >= 0, got " + detail::fmt(v));
                v = (v + nu) * scale;
            }
    }

    void apply(const std::vector<double>& x, std::vector<double>& y) const
    {
        const int n = n_;
        for (int i = 0; i < n; ++i) {
            const int ip = i + 1 == n ? 0 : i + 1;
            const int im = i == 0 ? n - 1 : i - 1;
            for (int j = 0; j < n; ++j) {
                const int jp = j + 1 == n ? 0 : j + 1;
                const int jm = j == 0 ? n - 1 : j - 1;
                const std::size_t c = static_cast<std::size_t>(i * n + j);
                const double xc = x[c];
                const double flux = kx_[c] * (x[static_cast<std::size_t>(ip * n + j)] - xc)
                                    - kx_[static_cast<std::size_t>(im * n + j)] * (xc - x[static_cast<std::size_t>(im * n + j)])
                                    + ky_[c] * (x[static_cast<std::size_t>(i * n + jp)] - xc)
                                    - ky_[static_cast<std::size_t>(i * n + jm)] * (xc - x[static_cast<std::size_t>(i * n + jm)]);
                y[c] = xc - flux;
            }
        }
    }

    std::vector<double> diagonal() const
    {
        const int n = n_;
        std::vector<double> d(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const std::size_t c = static_cast<std::size_t>(i * n + j);
                const int im = i == 0 ? n - 1 : i - 1;
                const int jm = j == 0 ? n - 1 : j - 1;
                d[c] = 1.0 + kx_[c] + kx_[static_cast<std::size_t>(im * n + j)] + ky_[c]
                       + ky_[static_cast<std::size_t>(i * n + jm)];
            }
        return d;
    }

  private:
    int n_;
    std::vector<double> kx_;
    std::vector<double> ky_;
};

struct LinearSolveStats {
    int iterations = 0;
    double residual = 0.0;  ///< relative residual reached
};

/// Conjugate gradients for op x = b, starting from b itself. Without
/// preconditioning every search direction has zero sum, so sum(x) = sum(b)
/// to round-off.
inline LinearSolveStats solve_implicit(const ImplicitOperator& op, const ScalarField& b, ScalarField& x,
                                       const SolverConfig& cfg)
{
    const std::size_t size = b.size();
    std::vector<double> bv(b.values().begin(), b.values().end());
    double bnorm2 = 0.0;
    for (double v : bv) bnorm2 += v * v;
    x = b;
    if (bnorm2 == 0.0) return {};
    const double bnorm = std::sqrt(bnorm2);

    std::vector<double> xv = bv, r(size), z(size), p(size), q(size);
    op.apply(xv, q);
    double rnorm2 = 0.0;
    for (std::size_t k = 0; k < size; ++k) {
        r[k] = bv[k] - q[k];
        rnorm2 += r[k] * r[k];
    }
    std::vector<double> inv_diag;
    if (cfg.jacobi) {
        inv_diag = op.diagonal();
        for (double& v : inv_diag) v = 1.0 / v;
    }
    auto precondition = [&] {
        if (cfg.jacobi)
            for (std::size_t k = 0; k < size; ++k) z[k] = inv_diag[k] * r[k];
        else
            z = r;
    };

    LinearSolveStats stats;
    stats.residual = std::sqrt(rnorm2) / bnorm;
    precondition();
    p = z;
    double rz = 0.0;
    for (std::size_t k = 0; k < size; ++k) rz += r[k] * z[k];
    while (stats.residual > cfg.linear_tol) {
        if (stats.iterations >= cfg.linear_maxiter)
            throw StepError("conjugate gradients did not converge in " + std::to_string(cfg.linear_maxiter)
                                + " iterations (relative residual " + detail::fmt(stats.residual) + ")",
                            stats.residual);
        op.apply(p, q);
        double pq = 0.0;
        for (std::size_t k = 0; k < size; ++k) pq += p[k] * q[k];
        const double alpha = rz / pq;
        rnorm2 = 0.0;
        for (std::size_t k = 0; k < size; ++k) {
            xv[k] += alpha * p[k];
            r[k] -= alpha * q[k];
            rnorm2 += r[k] * r[k];
        }
        ++stats.iterations;
        stats.residual = std::sqrt(rnorm2) / bnorm;
        precondition();
        double rz_next = 0.0;
        for (std::size_t k = 0; k < size; ++k) rz_next += r[k] * z[k];
        const double beta = rz_next / rz;
        rz = rz_next;
        for (std::size_t k = 0; k < size; ++k) p[k] = z[k] + beta * p[k];
    }
    if (cfg.jacobi) {
        // Preconditioned directions do not sum to zero; put the exact mass back.
        double shift = 0.0;
        for (std::size_t k = 0; k < size; ++k) shift += bv[k] - xv[k];
        shift /= static_cast<double>(size);
        for (double& v : xv) v += shift;
    }
    x = ScalarField(b.grid(), std::move(xv));
    return stats;
}

struct State {
    double t = 0.0;
    ScalarField z;
};

/// One backward-Euler step: (I - dt s div((A + nu) grad)) z_new = z_old + dt s div(C).
inline State step_implicit(const State& state, double dt, const CoefficientField& coeffs, double stiffness,
                           const SolverConfig& cfg, LinearSolveStats* stats = nullptr)
{
    if (!(dt > 0.0)) throw ConfigError("step_implicit: dt must be > 0");
    const double kappa = dt * stiffness;
    ScalarField rhs = state.z;
    rhs.axpy(kappa, divergence(coeffs.C));
    const ImplicitOperator op(coeffs.A, cfg.nu, kappa);
    State next{state.t + dt, ScalarField()};
    const LinearSolveStats s = solve_implicit(op, rhs, next.z, cfg);
    if (stats) *stats = s;
    return next;
}

struct DiagnosticRow {
    long step = 0;
    double t = 0.0;
    double theta = 0.0;
    double mass = 0.0;
    double l2_norm = 0.0;
    int linear_iters = 0;
};

struct Trajectory {
    std::vector<double> times;  ///< snapshot times
    std::vector<ScalarField> snapshots;
    std::vector<long> snapshot_steps;
    /// Row 0 describes the initial state, row k the k-th accepted step.
    std::vector<DiagnosticRow> diagnostics;
};

/// Fast phase theta = t / eps and lunar phase tau = t / sqrt(eps).
inline double fast_phase(const RegimeSpec& r, double t) { return t / r.epsilon; }
inline double lunar_phase(const RegimeSpec& r, double t)
{
    return r.structure() == TimeStructure::mean_term ? t / std::sqrt(r.epsilon) : 0.0;
}

/// Integrates the fine model on [0, T]. Each step advances theta by
/// 1 / dt_per_period (the last step may be shorter to land on T). Snapshots
/// are kept every `stride` steps, plus the first and the last.
inline Trajectory solve_fine(const ScalarField& z0, const Model& model, const SolverConfig& cfg, double T, int stride = 1,
                             const std::function<void(const State&, long)>& observer = {})
{
    cfg.validate();
    model.regime.validate();
    if (!(T > 0.0)) throw ConfigError("solve_fine: T must be > 0");
    if (stride < 1) throw ConfigError("solve_fine: stride must be >= 1");
    const RegimeSpec& r = model.regime;
    const double dt = r.epsilon / cfg.dt_per_period;
    const long steps = static_cast<long>(std::ceil(T / dt - 1e-9));
    const double s = r.stiffness();
    const Grid& g = z0.grid();

    Trajectory traj;
    State state{0.0, z0};
    auto record_snapshot = [&](long k) {
        traj.times.push_back(state.t);
        traj.snapshots.push_back(state.z);
        traj.snapshot_steps.push_back(k);
    };
    record_snapshot(0);
    traj.diagnostics.push_back({0, 0.0, 0.0, mass(state.z), norm_l2(state.z), 0});
    if (observer) observer(state, 0);

    for (long k = 1; k <= steps; ++k) {
        const double t_next = k == steps ? T : static_cast<double>(k) * dt;
        const double h = t_next - state.t;
        const CoefficientField coeffs = model.sample(g, t_next, lunar_phase(r, t_next), fast_phase(r, t_next), CoefficientPart::full);
        LinearSolveStats stats;
        try {
            state = step_implicit(state, h, coeffs, s, cfg, &stats);
        } catch (const StepError& e) {
            throw StepError(std::string("step ") + std::to_string(k) + ": " + e.what(), e.residual, k);
        }
        state.t = t_next;
        traj.diagnostics.push_back({k, t_next, fast_phase(r, t_next), mass(state.z), norm_l2(state.z), stats.iterations});
        if (k % stride == 0 || k == steps) record_snapshot(k);
        if (observer) observer(state, k);
    }
    return traj;
}

/// Coefficients of a theta-periodic cell problem at frozen (t, tau). Entry k
/// belongs to the step ending at theta_{k+1} = (k + 1) / P: face diffusivity
/// and a scalar source already in divergence form.
struct CellProblem {
    double t = 0.0;
    double tau = 0.0;
    double stiffness = 1.0;
    std::vector<VectorField> diffusivity;
    std::vector<ScalarField> source;

    int steps() const noexcept { return static_cast<int>(diffusivity.size()); }
    const Grid& grid() const { return diffusivity.at(0).grid(); }
};

/// Samples the model at theta_1 .. theta_P (theta_P = 1 wraps to 0).
inline CellProblem make_cell_problem(const Model& model, const Grid& g, double t, double tau, int steps,
                                     CoefficientPart part = CoefficientPart::homogenized)
{
    CellProblem cp;
    cp.t = t;
    cp.tau = tau;
    for (int k = 0; k < steps; ++k) {
        const double theta = static_cast<double>(k + 1) / steps;
        CoefficientField f = model.sample(g, t, tau, theta, part);
        cp.source.push_back(divergence(f.C));
        cp.diffusivity.push_back(std::move(f.A));
    }
    if (part == CoefficientPart::full && model.regime.structure() == TimeStructure::long_term)
        cp.stiffness = 1.0 / model.regime.epsilon;
    return cp;
}

/// One period of  mu xi + d xi/d theta - s div((A + nu) grad xi) = s src  from
/// theta = 0. The mu term is integrated exactly:
///   xi_{k+1} = (I - dtheta s L_{A+nu})^{-1} (e^{-mu dtheta} xi_k + dtheta s src_{k+1}),
/// so constants decay by exactly e^{-mu} per period. When `trace` is given it
/// receives xi at theta_0 .. theta_{P-1}.
inline ScalarField period_map(const ScalarField& xi, double mu, double nu, const CellProblem& cp, const SolverConfig& cfg,
                              std::vector<ScalarField>* trace = nullptr, long* linear_iters = nullptr)
{
    if (!(mu >= 0.0) || !(nu >= 0.0)) throw ConfigError("period_map: mu and nu must be >= 0");
    const int steps = cp.steps();
    if (steps <= 0) throw ConfigError("period_map: empty cell problem");
    if (!(xi.grid() == cp.grid())) throw ConfigError("period_map: grid mismatch");
    const double dtheta = 1.0 / steps;
    const double kappa = dtheta * cp.stiffness;
    const double decay = std::exp(-mu * dtheta);
    if (trace) {
        trace->clear();
        trace->reserve(static_cast<std::size_t>(steps));
    }
    ScalarField cur = xi;
    for (int k = 0; k < steps; ++k) {
        if (trace) trace->push_back(cur);
        ScalarField rhs = decay * cur;
        rhs.axpy(kappa, cp.source[static_cast<std::size_t>(k)]);
        const ImplicitOperator op(cp.diffusivity[static_cast<std::size_t>(k)], nu, kappa);
        ScalarField next;
        LinearSolveStats stats;
        try {
            stats = solve_implicit(op, rhs, next, cfg);
        } catch (const StepError& e) {
            throw StepError(std::string("period map step ") + std::to_string(k + 1) + ": " + e.what(), e.residual, k + 1);
        }
        if (linear_iters) *linear_iters += stats.iterations;
        cur = std::move(next);
    }
    return cur;
}

/// Runs the continuation schedule and returns the periodic profile of the last
/// converged stage. Stages with mu = 0 project onto zero mean after every
/// period.
inline PeriodicProfile find_periodic(const CellProblem& cp, const SolverConfig& cfg,
                                     const std::optional<ScalarField>& initial = std::nullopt)
{
    cfg.validate();
    ScalarField xi = initial ? *initial : ScalarField(cp.grid());
    if (!(xi.grid() == cp.grid())) throw ConfigError("find_periodic: initial guess on a different grid");

    ConvergenceReport report;
    double mu_used = 0.0, nu_used = 0.0;
    bool have_fixed_point = false;
    for (std::size_t e = 0; e < cfg.continuation.size(); ++e) {
        const auto [mu, nu] = cfg.continuation[e];
        ContinuationStage stage{mu, nu, 0, 0.0, 0.0, false, false};
        ScalarField cur = xi;
        if (mu == 0.0) remove_mean(cur);
        double prev_distance = -1.0;
        while (stage.iterations < cfg.max_fixed_point_iters) {
            ScalarField next = period_map(cur, mu, nu, cp, cfg);
            if (mu == 0.0) remove_mean(next);
            ++stage.iterations;
            stage.distance = norm_l2_distance(next, cur);
            if (prev_distance > 0.0) stage.ratio = stage.distance / prev_distance;
            prev_distance = stage.distance;
            cur = std::move(next);
            if (stage.distance < cfg.fixed_point_tol) {
                stage.converged = true;
                break;
            }
            if (!std::isfinite(stage.distance)) break;
        }
        const bool last = e + 1 == cfg.continuation.size();
        if (!stage.converged) {
            if (last && nu == 0.0 && have_fixed_point && cfg.skip_unconverged_final) {
                stage.skipped = true;
                report.stages.push_back(stage);
                break;
            }
            report.stages.push_back(stage);
            throw FixedPointError("fixed point did not converge at continuation entry " + std::to_string(e) + " (mu="
                                      + detail::fmt(mu) + ", nu=" + detail::fmt(nu) + ", last distance "
                                      + detail::fmt(stage.distance) + ", last ratio " + detail::fmt(stage.ratio) + ")",
                                  e, mu, nu, stage.ratio);
        }
        report.stages.push_back(stage);
        xi = std::move(cur);
        mu_used = mu;
        nu_used = nu;
        have_fixed_point = true;
    }

    PeriodicProfile profile;
    profile.t = cp.t;
    profile.tau = cp.tau;
    ScalarField end = period_map(xi, mu_used, nu_used, cp, cfg, &profile.samples);
    if (mu_used == 0.0) remove_mean(end);
    report.residual = norm_l2_distance(end, xi);
    profile.report = std::move(report);
    return profile;
}

/// Profiles on a slow-time lattice (and optionally a lunar-phase lattice on
/// [0, 1)), evaluated with linear interpolation in t and tau and periodic
/// interpolation in theta.
class ProfileFamily {
  public:
    ProfileFamily() = default;

    /// profiles[it * taus.size() + itau]; empty `taus` means tau-independent.
    ProfileFamily(std::vector<double> times, std::vector<double> taus, std::vector<PeriodicProfile> profiles)
        : times_(std::move(times)), taus_(std::move(taus)), profiles_(std::move(profiles))
    {
        const std::size_t per_t = taus_.empty() ? 1 : taus_.size();
        if (times_.empty() || profiles_.size() != times_.size() * per_t)
            throw ConfigError("profile family: lattice and profile count disagree");
        for (std::size_t k = 1; k < times_.size(); ++k)
            if (!(times_[k] > times_[k - 1])) throw ConfigError("profile family: times must increase");
        for (std::size_t k = 0; k < taus_.size(); ++k)
            if (taus_[k] < 0.0 || taus_[k] >= 1.0 || (k && !(taus_[k] > taus_[k - 1])))
                throw ConfigError("profile family: taus must increase within [0, 1)");
    }

    const std::vector<double>& times() const noexcept { return times_; }
    const std::vector<double>& taus() const noexcept { return taus_; }
    const std::vector<PeriodicProfile>& profiles() const noexcept { return profiles_; }

    ScalarField eval(double t, double tau, double theta) const
    {
        const double span = times_.back() - times_.front();
        const double slack = 1e-12 * std::max(1.0, std::abs(span));
        if (t < times_.front() - slack || t > times_.back() + slack)
            throw ConfigError("profile family: t = " + detail::fmt(t) + " outside the lattice [" + detail::fmt(times_.front())
                              + ", " + detail::fmt(times_.back()) + "]");
        std::size_t lo = 0;
        double w = 0.0;
        if (times_.size() > 1) {
            while (lo + 2 < times_.size() && t > times_[lo + 1]) ++lo;
            w = std::clamp((t - times_[lo]) / (times_[lo + 1] - times_[lo]), 0.0, 1.0);
            if (w < 1e-12) w = 0.0;
            if (w > 1.0 - 1e-12) w = 1.0;
        }
        ScalarField out = tau_eval(lo, tau, theta);
        if (w == 0.0) return out;
        out *= 1.0 - w;
        out.axpy(w, tau_eval(lo + 1, tau, theta));
        return out;
    }

  private:
    ScalarField tau_eval(std::size_t it, double tau, double theta) const
    {
        if (taus_.empty()) return profiles_[it].at(theta);
        const std::size_t count = taus_.size();
        const double s = tau - std::floor(tau);
        std::size_t hi = 0;
        while (hi < count && taus_[hi] <= s) ++hi;
        const std::size_t a = hi == 0 ? count - 1 : hi - 1;
        const std::size_t b = hi == count ? 0 : hi;
        double t0 = taus_[a], t1 = taus_[b], x = s;
        if (t1 <= t0) t1 += 1.0;
        if (x < t0) x += 1.0;
        const double w = count == 1 ? 0.0 : (x - t0) / (t1 - t0);
        ScalarField out = profiles_[it * count + a].at(theta);
        if (w == 0.0) return out;
        out *= 1.0 - w;
        out.axpy(w, profiles_[it * count + b].at(theta));
        return out;
    }

    std::vector<double> times_;
    std::vector<double> taus_;
    std::vector<PeriodicProfile> profiles_;
};

/// Z(t, x) = S(t, t / sqrt(eps), t / eps, x).
inline ScalarField quasi_periodic_reconstruction(const ProfileFamily& S, const RegimeSpec& r, double t)
{
    return S.eval(t, lunar_phase(r, t), fast_phase(r, t));
}

/// Cell problems with the full eps-dependent coefficients on a uniform
/// slow-time lattice over [0, T] (tau frozen at 0).
inline ProfileFamily build_quasi_periodic_family(const Model& model, const Grid& g, double T, int lattice,
                                                 const SolverConfig& cfg)
{
    if (lattice < 2) throw ConfigError("quasi-periodic family needs at least 2 lattice times");
    std::vector<double> times;
    std::vector<PeriodicProfile> profiles;
    for (int k = 0; k < lattice; ++k) {
        const double t = T * k / (lattice - 1);
        times.push_back(t);
        profiles.push_back(find_periodic(make_cell_problem(model, g, t, 0.0, cfg.dt_per_period, CoefficientPart::full), cfg));
    }
    return ProfileFamily(std::move(times), {}, std::move(profiles));
}

/// Trajectory directory: manifest.txt, snapshots/step_XXXXXXXX.bin, diagnostics.csv.
inline void write_trajectory(const std::filesystem::path& dir, const Trajectory& traj,
                             const std::vector<std::pair<std::string, std::string>>& manifest)
{
    std::error_code ec;
    std::filesystem::create_directories(dir / "snapshots", ec);
    if (ec) throw FilesystemError("cannot create " + dir.string() + ": " + ec.message());
    for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
        char name[40];
        std::snprintf(name, sizeof name, "step_%08ld.bin", traj.snapshot_steps[k]);
        write_field(dir / "snapshots" / name, traj.snapshots[k]);
    }
    std::ofstream m(dir / "manifest.txt", std::ios::trunc);
    if (!m) throw FilesystemError("cannot write manifest in " + dir.string());
    m << "kind=trajectory\n";
    for (const auto& [k, v] : manifest) m << k << '=' << v << '\n';
    m << "snapshots=" << traj.snapshots.size() << '\n';
    m << "snapshot_times=";
    for (std::size_t k = 0; k < traj.times.size(); ++k) m << (k ? "," : "") << detail::fmt(traj.times[k]);
    m << '\n';
    if (!m) throw FilesystemError("write failed: " + (dir / "manifest.txt").string());

    std::ofstream d(dir / "diagnostics.csv", std::ios::trunc);
    if (!d) throw FilesystemError("cannot write diagnostics in " + dir.string());
    d << "step,t,theta,mass,l2_norm,linear_iters\n";
    for (const auto& row : traj.diagnostics)
        d << row.step << ',' << detail::fmt(row.t) << ',' << detail::fmt(row.theta) << ',' << detail::fmt(row.mass)
          << ',' << detail::fmt(row.l2_norm) << ',' << row.linear_iters << '\n';
    if (!d) throw FilesystemError("write failed: " + (dir / "diagnostics.csv").string());
}

}  // namespace tdm
