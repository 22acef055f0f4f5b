#pragma once

// Verification harness: conservation, period-map contraction, two-scale and
// corrector error sweeps over eps, order fitting and report output.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "tdm/errors.hpp"
#include "tdm/field_io.hpp"
#include "tdm/homogenize.hpp"
#include "tdm/model.hpp"
#include "tdm/profile.hpp"
#include "tdm/solver.hpp"

namespace tdm {

inline double mass_drift(const Trajectory& traj)
{
    if (traj.diagnostics.empty()) throw ConfigError("mass_drift: empty trajectory");
    const double m0 = traj.diagnostics.front().mass;
    double worst = 0.0;
    for (const auto& row : traj.diagnostics) worst = std::max(worst, std::abs(row.mass - m0));
    for (const auto& snap : traj.snapshots) worst = std::max(worst, std::abs(mass(snap) - m0));
    return worst;
}

/// Unit L2 norm, zero mean, i.i.d. normal values before projection.
inline ScalarField random_zero_mean_field(const Grid& g, std::mt19937_64& rng)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    ScalarField f(g);
    for (double& v : f.values()) v = normal(rng);
    remove_mean(f);
    f *= 1.0 / norm_l2(f);
    return f;
}

struct ContractionResult {
    double mu = 0.0;
    double nu = 0.0;
    unsigned long long seed = 0;
    std::vector<double> ratios;

    double max_ratio() const { return ratios.empty() ? 0.0 : *std::max_element(ratios.begin(), ratios.end()); }
};

/// ||Phi(xi) - Phi(xi')|| / ||xi - xi'|| over `trials` random zero-mean pairs.
inline ContractionResult contraction_ratio(const CellProblem& cp, double mu, double nu, int trials,
                                           const SolverConfig& cfg, unsigned long long seed)
{
    if (trials < 2) throw ConfigError("contraction_ratio: trials must be >= 2");
    std::mt19937_64 rng(seed);
    ContractionResult out{mu, nu, seed, {}};
    for (int k = 0; k < trials; ++k) {
        const ScalarField a = random_zero_mean_field(cp.grid(), rng);
        const ScalarField b = random_zero_mean_field(cp.grid(), rng);
        const double before = norm_l2_distance(a, b);
        const double after = norm_l2_distance(period_map(a, mu, nu, cp, cfg), period_map(b, mu, nu, cp, cfg));
        out.ratios.push_back(after / before);
    }
    return out;
}

inline ContractionResult contraction_ratio(const Model& model, const Grid& g, double mu, double nu, double t, double tau,
                                           int trials, const SolverConfig& cfg, unsigned long long seed)
{
    return contraction_ratio(make_cell_problem(model, g, t, tau, cfg.dt_per_period), mu, nu, trials, cfg, seed);
}

/// Least-squares slope of log(error) against log(eps).
inline double fit_order(const std::vector<double>& epsilons, const std::vector<double>& errors)
{
    if (epsilons.size() != errors.size()) throw ConfigError("fit_order: size mismatch");
    if (epsilons.size() < 3) throw ConfigError("fit_order: need at least 3 points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(epsilons.size());
    for (std::size_t k = 0; k < epsilons.size(); ++k) {
        if (!(epsilons[k] > 0.0) || !(errors[k] > 0.0))
            throw ConfigError("fit_order: epsilons and errors must be positive");
        const double x = std::log(epsilons[k]), y = std::log(errors[k]);
        sx += x, sy += y, sxx += x * x, sxy += x * y;
    }
    const double denom = n * sxx - sx * sx;
    if (denom <= 0.0) throw ConfigError("fit_order: epsilons must not all coincide");
    return (n * sxy - sx * sy) / denom;
}

struct SweepSettings {
    std::vector<double> epsilons;  ///< strictly decreasing
    double T = 0.4;
    int n = 64;
    /// Half-width of the centred difference for dU/dt.
    double delta_t = 1e-3;
    int jobs = 1;
    std::filesystem::path out_dir;
    SolverConfig solver;

    void validate() const
    {
        if (epsilons.empty()) throw ConfigError("sweep: epsilon list is empty");
        for (std::size_t k = 0; k < epsilons.size(); ++k) {
            if (!(epsilons[k] > 0.0 && epsilons[k] < 1.0)) throw ConfigError("sweep: epsilons must lie in (0, 1)");
            if (k && !(epsilons[k] < epsilons[k - 1])) throw ConfigError("sweep: epsilons must be strictly decreasing");
        }
        if (!(T >= 5.0 * epsilons.front()))
            throw ConfigError("sweep: T must be at least 5 eps so the initial layer has passed");
        if (!(delta_t > 0.0 && delta_t < T)) throw ConfigError("sweep: delta_t must lie in (0, T)");
        if (jobs < 1) throw ConfigError("sweep: jobs must be >= 1");
        if (out_dir.empty()) throw ConfigError("sweep: an output directory is required");
        solver.validate();
    }
};

struct SweepRow {
    double epsilon = 0.0;
    bool ok = false;
    std::string failure;
    double error = 0.0;      ///< ||z - U(T, T/eps)||
    double scaled = 0.0;     ///< error / eps
    double remainder = 0.0;  ///< ||(z - U)/eps - U1(T, T/eps)||
    double mass_drift = 0.0;
    double max_l2 = 0.0;
    double runtime_s = 0.0;
    std::filesystem::path dir;
};

struct SweepResult {
    std::string label;
    double T = 0.0;
    int n = 0;
    std::vector<SweepRow> rows;
    double corrector_rhs_mean = 0.0;
    bool corrector_solvable = true;
    std::vector<PeriodicProfile> profiles;  ///< every cell profile computed
};

/// Runs `task(k)` for k in [0, count) on up to `jobs` threads.
inline void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& task)
{
    const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, jobs)));
    if (workers <= 1) {
        for (std::size_t k = 0; k < count; ++k) task(k);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t k = next++; k < count; k = next++) {
                try {
                    task(k);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

/// Cell solves at t = 0 and around T, the corrector at T, then one fine run per
/// eps from z0 = U(0, 0, .). Fields are written under out_dir and every error
/// is recomputed from the files on disk.
inline SweepResult run_sweep(const Model& model, const SweepSettings& s)
{
    s.validate();
    if (model.regime.structure() != TimeStructure::short_term)
        throw ConfigError("sweep: the homogenized limit is only defined for the short-term model");
    const Grid g = make_grid(s.n);
    std::error_code ec;
    std::filesystem::create_directories(s.out_dir, ec);
    if (ec) throw FilesystemError("cannot create " + s.out_dir.string() + ": " + ec.message());

    const double times[4] = {0.0, s.T - s.delta_t, s.T, s.T + s.delta_t};
    std::vector<PeriodicProfile> cells(4);
    parallel_for(4, s.jobs, [&](std::size_t k) { cells[k] = cell_solve(model, g, times[k], s.solver); });
    const PeriodicProfile dU = slow_time_derivative(cells[1], cells[3], 2.0 * s.delta_t);
    const CorrectorResult corr = solve_corrector(model, cells[2], dU, s.solver);

    write_profile(s.out_dir / "U_T", cells[2]);
    write_profile(s.out_dir / "U1_T", corr.profile);
    const ScalarField z0 = cells[0].sample(0);
    write_field(s.out_dir / "z0.bin", z0);

    SweepResult result;
    result.label = model.label;
    result.T = s.T;
    result.n = s.n;
    result.corrector_rhs_mean = corr.rhs_mean_max;
    result.corrector_solvable = corr.solvable;
    result.profiles = {cells[0], cells[1], cells[2], cells[3], corr.profile};
    result.rows.resize(s.epsilons.size());

    parallel_for(s.epsilons.size(), s.jobs, [&](std::size_t k) {
        SweepRow& row = result.rows[k];
        row.epsilon = s.epsilons[k];
        row.dir = s.out_dir / ("eps_" + std::to_string(k));
        const auto start = std::chrono::steady_clock::now();
        try {
            const Model m = model.with_epsilon(row.epsilon);
            const Trajectory traj = solve_fine(z0, m, s.solver, s.T, std::numeric_limits<int>::max());
            row.mass_drift = mass_drift(traj);
            for (const auto& d : traj.diagnostics) row.max_l2 = std::max(row.max_l2, d.l2_norm);
            const double theta = s.T / row.epsilon;
            write_trajectory(row.dir, traj,
                             {{"model", model.label}, {"epsilon", detail::fmt(row.epsilon)}, {"T", detail::fmt(s.T)},
                              {"n", std::to_string(s.n)}, {"dt_per_period", std::to_string(s.solver.dt_per_period)}});
            write_field(row.dir / "z_T.bin", traj.snapshots.back());
            write_field(row.dir / "U_T.bin", cells[2].at(theta));
            write_field(row.dir / "U1_T.bin", corr.profile.at(theta));

            const ScalarField z = read_field(row.dir / "z_T.bin");
            const ScalarField u = read_field(row.dir / "U_T.bin");
            const ScalarField u1 = read_field(row.dir / "U1_T.bin");
            ScalarField diff = z - u;
            row.error = norm_l2(diff);
            row.scaled = row.error / row.epsilon;
            diff *= 1.0 / row.epsilon;
            row.remainder = norm_l2_distance(diff, u1);
            row.ok = true;
        } catch (const Error& e) {
            row.failure = e.what();
        }
        row.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    });
    return result;
}

struct ErrorReport {
    std::string label;
    std::vector<double> epsilons;
    std::vector<double> errors;
    double fitted_order = std::numeric_limits<double>::quiet_NaN();
    std::string order_note;  ///< why the order is undefined, if it is
    std::vector<SweepRow> details;
};

namespace detail {

inline ErrorReport make_report(const SweepResult& sweep, const std::string& label, double SweepRow::*column)
{
    ErrorReport r;
    r.label = label;
    r.details = sweep.rows;
    for (const auto& row : sweep.rows)
        if (row.ok) {
            r.epsilons.push_back(row.epsilon);
            r.errors.push_back(row.*column);
        }
    try {
        r.fitted_order = fit_order(r.epsilons, r.errors);
    } catch (const ConfigError& e) {
        r.order_note = e.what();
    }
    return r;
}

}  // namespace detail

/// ||z^eps(T) - U(T, T/eps)||, rate in the strong norm.
inline ErrorReport two_scale_report(const SweepResult& sweep)
{
    return detail::make_report(sweep, sweep.label + " two-scale rate (strong norm)", &SweepRow::error);
}

/// ||(z^eps(T) - U(T, T/eps)) / eps|| per eps; the refined remainder is in the details.
inline ErrorReport corrector_report(const SweepResult& sweep)
{
    return detail::make_report(sweep, sweep.label + " scaled remainder", &SweepRow::scaled);
}

inline ErrorReport two_scale_error(const Model& model, const SweepSettings& s) { return two_scale_report(run_sweep(model, s)); }
inline ErrorReport corrector_error(const Model& model, const SweepSettings& s)
{
    if (model.regime.law.kind != LawKind::power3) throw ConfigError("corrector_error: requires the power3 law");
    return corrector_report(run_sweep(model, s));
}

inline bool strictly_decreasing(const std::vector<double>& v)
{
    for (std::size_t k = 1; k < v.size(); ++k)
        if (!(v[k] < v[k - 1])) return false;
    return true;
}

/// CSV columns: epsilon, error, remainder, mass_drift, runtime_s. Runtime is
/// written as NA unless `timing` so reruns are byte-identical.
inline void write_report_csv(const std::filesystem::path& path, const ErrorReport& r, bool timing)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FilesystemError("cannot write " + path.string());
    out << "epsilon,error,remainder,mass_drift,runtime_s\n";
    for (const auto& row : r.details) {
        if (!row.ok) {
            out << detail::fmt(row.epsilon) << ",NA,NA,NA," << (timing ? detail::fmt(row.runtime_s) : "NA") << '\n';
            continue;
        }
        out << detail::fmt(row.epsilon) << ',' << detail::fmt(row.error) << ',' << detail::fmt(row.remainder) << ','
            << detail::fmt(row.mass_drift) << ',' << (timing ? detail::fmt(row.runtime_s) : "NA") << '\n';
    }
    if (!out) throw FilesystemError("write failed: " + path.string());
}

inline void write_summary(const std::filesystem::path& path, const SweepResult& sweep, const ErrorReport& two_scale,
                          const ErrorReport& corrector)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FilesystemError("cannot write " + path.string());
    out << "model: " << sweep.label << "\n";
    out << "T = " << detail::fmt(sweep.T) << ", n = " << sweep.n << "\n\n";
    out << "eps            error          error/eps      remainder      mass_drift     runtime_s\n";
    char line[256];
    for (const auto& row : sweep.rows) {
        if (!row.ok) {
            out << detail::fmt(row.epsilon) << "  FAILED: " << row.failure << '\n';
            continue;
        }
        std::snprintf(line, sizeof line, "%-14.6g %-14.6e %-14.6e %-14.6e %-14.3e %.2f\n", row.epsilon, row.error,
                      row.scaled, row.remainder, row.mass_drift, row.runtime_s);
        out << line;
    }
    auto order = [](const ErrorReport& r) {
        return std::isnan(r.fitted_order) ? "undefined (" + r.order_note + ")" : detail::fmt(r.fitted_order);
    };
    out << "\n" << two_scale.label << ": fitted order " << order(two_scale) << '\n';
    out << corrector.label << ": fitted order " << order(corrector) << '\n';
    out << "corrector right-hand side max |mean| = " << detail::fmt(sweep.corrector_rhs_mean)
        << (sweep.corrector_solvable ? " (solvable)" : " (SOLVABILITY CHECK FAILED)") << '\n';
    if (!out) throw FilesystemError("write failed: " + path.string());
}

/// gnuplot script: log error against log eps with a slope-1 reference line.
inline void write_plot_script(const std::filesystem::path& path, const std::string& csv_name, const ErrorReport& r)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FilesystemError("cannot write " + path.string());
    double anchor_eps = 1.0, anchor_err = 1.0;
    if (!r.epsilons.empty()) anchor_eps = r.epsilons.front(), anchor_err = r.errors.front();
    out << "set datafile separator ','\n"
        << "set logscale xy\n"
        << "set xlabel 'epsilon'\n"
        << "set ylabel 'L2 error'\n"
        << "set key top left\n"
        << "set title '" << r.label << "'\n"
        << "set terminal pngcairo size 800,600\n"
        << "set output 'convergence.png'\n"
        << "ref(x) = " << detail::fmt(anchor_err) << " * x / " << detail::fmt(anchor_eps) << "\n"
        << "plot '" << csv_name << "' using 1:2 skip 1 with linespoints title 'error', \\\n"
        << "     '" << csv_name << "' using 1:3 skip 1 with linespoints title 'remainder', \\\n"
        << "     ref(x) with lines dashtype 2 title 'slope 1'\n";
    if (!out) throw FilesystemError("write failed: " + path.string());
}

struct ClosenessRow {
    double epsilon = 0.0;
    std::vector<double> times;
    std::vector<double> distances;  ///< ||z(t) - Z(t)||
    double slope = 0.0;             ///< max over t > 0 of (d(t) - d(0)) / t
    double mass_drift = 0.0;
};

/// Distance between the fine solution started at S(0, 0, .) and the
/// quasi-periodic reconstruction built from full-coefficient cell problems on
/// a slow-time lattice, sampled once per tidal period.
inline ClosenessRow quasi_periodic_closeness(const Model& model, const Grid& g, double T, int lattice,
                                             const SolverConfig& cfg)
{
    const ProfileFamily S = build_quasi_periodic_family(model, g, T, lattice, cfg);
    const ScalarField z0 = S.eval(0.0, 0.0, 0.0);
    ClosenessRow row;
    row.epsilon = model.regime.epsilon;
    const Trajectory traj = solve_fine(z0, model, cfg, T, cfg.dt_per_period);
    row.mass_drift = mass_drift(traj);
    for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
        const double t = traj.times[k];
        row.times.push_back(t);
        row.distances.push_back(norm_l2_distance(traj.snapshots[k], quasi_periodic_reconstruction(S, model.regime, t)));
    }
    for (std::size_t k = 1; k < row.times.size(); ++k)
        row.slope = std::max(row.slope, (row.distances[k] - row.distances[0]) / row.times[k]);
    return row;
}

}  // namespace tdm
