// tdm: regime derivation, fine runs, cell solves and verification sweeps.
//
// Exit codes: 0 success, 1 configuration error, 2 computation failure or a
// failed hard check, 3 filesystem error.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tdm/tdm.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitCompute = 2;
constexpr int kExitFilesystem = 3;

struct CommonOptions {
    std::string config;
    std::string out;
    std::optional<unsigned long long> seed;
    std::optional<std::string> epsilons;
    std::optional<int> grid;
    std::optional<int> jobs;
    bool timing = false;
};

tdm::RunConfig load_config(const CommonOptions& o)
{
    tdm::RunConfig c;
    if (!o.config.empty()) c = tdm::load_run_config(o.config);
    if (!o.out.empty()) c.out_dir = o.out;
    if (o.seed) c.seed = *o.seed;
    if (o.epsilons) c.epsilons = tdm::parse_number_list(*o.epsilons);
    if (o.grid) c.n = *o.grid;
    if (o.jobs) c.jobs = *o.jobs;
    if (o.timing) c.timing = true;
    c.validate();
    return c;
}

/// The output directory must exist before any computation starts.
fs::path require_out_dir(const tdm::RunConfig& c)
{
    if (c.out_dir.empty()) throw tdm::ConfigError("no output directory (use --out or [output] dir)");
    if (!fs::is_directory(c.out_dir)) throw tdm::FilesystemError("output directory " + c.out_dir.string() + " does not exist");
    const fs::path probe = c.out_dir / ".tdm_write_probe";
    {
        std::ofstream f(probe);
        if (!f) throw tdm::FilesystemError("output directory " + c.out_dir.string() + " is not writable");
    }
    fs::remove(probe);
    return c.out_dir;
}

void write_kv(const fs::path& path, const std::vector<std::pair<std::string, std::string>>& kv)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw tdm::FilesystemError("cannot write " + path.string());
    for (const auto& [k, v] : kv) out << k << '=' << v << '\n';
}

std::string yes_no(bool b) { return b ? "yes" : "no"; }

int cmd_regime(const std::string& kind_name, const std::map<std::string, double>& overrides)
{
    const tdm::RegimeKind kind = tdm::parse_regime_kind(kind_name);
    tdm::PhysicalParams p = tdm::PhysicalParams::defaults_for(kind);
    std::map<std::string, double*> fields{{"u_bar", &p.u_bar},     {"H", &p.H},
                                          {"M_bar", &p.M_bar},     {"D_G", &p.D_G},
                                          {"rho", &p.rho},         {"p", &p.p},
                                          {"lambda", &p.lambda},   {"alpha", &p.alpha},
                                          {"u_c", &p.u_c},         {"t_bar", &p.t_bar},
                                          {"omega_bar_inv", &p.omega_bar_inv},
                                          {"omega_c_bar_inv", &p.omega_c_bar_inv},
                                          {"z_bar", &p.z_bar},     {"L_bar", &p.L_bar}};
    for (const auto& [name, value] : overrides) {
        *fields.at(name) = value;
        if (name == "rho") p.rho_defaulted = false;
        if (name == "alpha") p.alpha_defaulted = false;
    }
    const tdm::RegimeDerivation d = tdm::derive_regime(p, kind);
    using tdm::detail::fmt;

    std::cout << "regime=" << tdm::to_string(kind) << '\n'
              << "epsilon=" << fmt(d.epsilon) << '\n'
              << "epsilon_inverse=" << fmt(1.0 / d.epsilon) << '\n'
              << "lunar_ratio=" << fmt(d.lunar_ratio) << '\n'
              << "log_factor=" << fmt(d.log_factor) << '\n'
              << "F_diff=" << fmt(d.F_diff) << '\n'
              << "F_src=" << fmt(d.F_src) << '\n'
              << "F_height=" << fmt(d.F_height) << '\n'
              << "exact.a=" << fmt(d.exact.a) << '\n'
              << "exact.b=" << fmt(d.exact.b) << '\n'
              << "exact.c=" << fmt(d.exact.c) << '\n'
              << "exact.law=" << tdm::to_string(d.exact.law.kind) << '\n'
              << "exact.u_c2=" << fmt(d.exact.law.u_c2) << '\n'
              << "snapped.epsilon=" << fmt(d.snapped.epsilon) << '\n'
              << "snapped.a=" << fmt(d.snapped.a) << '\n'
              << "snapped.b=" << fmt(d.snapped.b) << '\n'
              << "snapped.c=" << fmt(d.snapped.c) << '\n'
              << "snapped.law=" << tdm::to_string(d.snapped.law.kind) << '\n'
              << "snapped.u_c2=" << fmt(d.snapped.law.u_c2) << '\n';
    for (const auto& c : d.checks)
        std::cout << "check." << c.name << ".quoted=" << fmt(c.quoted) << '\n'
                  << "check." << c.name << ".ratio=" << fmt(c.ratio()) << '\n'
                  << "check." << c.name << ".within_1.5=" << yes_no(c.within(1.5)) << '\n';
    std::string defaulted;
    for (const auto& name : d.defaulted) defaulted += (defaulted.empty() ? "" : ",") + name;
    std::cout << "defaulted=" << defaulted << "\n\n";

    std::cout << "regime,epsilon,F_diff,F_src,F_height,a,b,c,snapped_epsilon,snapped_a,snapped_b,snapped_c\n"
              << tdm::to_string(kind) << ',' << fmt(d.epsilon) << ',' << fmt(d.F_diff) << ',' << fmt(d.F_src) << ','
              << fmt(d.F_height) << ',' << fmt(d.exact.a) << ',' << fmt(d.exact.b) << ',' << fmt(d.exact.c) << ','
              << fmt(d.snapped.epsilon) << ',' << fmt(d.snapped.a) << ',' << fmt(d.snapped.b) << ','
              << fmt(d.snapped.c) << '\n';
    return 0;
}

int cmd_run(const CommonOptions& o)
{
    const tdm::RunConfig c = load_config(o);
    const fs::path out = require_out_dir(c);
    const tdm::Model model = tdm::make_model(c);
    const tdm::Grid g = tdm::make_grid(c.n);

    tdm::ScalarField z0(g);
    if (c.run_initial == "cell") {
        z0 = tdm::find_periodic(tdm::make_cell_problem(model, g, 0.0, 0.0, c.solver.dt_per_period), c.solver).sample(0);
    } else if (c.run_initial != "zero") {
        z0 = tdm::read_field(c.run_initial);
        if (!(z0.grid() == g)) throw tdm::ConfigError("initial field does not match grid n = " + std::to_string(c.n));
    }
    const tdm::Trajectory traj = tdm::solve_fine(z0, model, c.solver, c.run_T, c.run_stride);
    auto manifest = tdm::describe(c);
    manifest.emplace_back("T", tdm::detail::fmt(c.run_T));
    manifest.emplace_back("stride", std::to_string(c.run_stride));
    manifest.emplace_back("initial", c.run_initial);
    const double drift = tdm::mass_drift(traj);
    manifest.emplace_back("mass_drift", tdm::detail::fmt(drift));
    tdm::write_trajectory(out, traj, manifest);

    std::cout << "steps=" << traj.diagnostics.size() - 1 << '\n'
              << "mass_drift=" << tdm::detail::fmt(drift) << '\n'
              << "final_l2_norm=" << tdm::detail::fmt(traj.diagnostics.back().l2_norm) << '\n'
              << "output=" << out.string() << '\n';
    if (drift > 1e-9) {
        std::cerr << "mass drift " << drift << " exceeds 1e-9\n";
        return kExitCompute;
    }
    return 0;
}

int cmd_cell(const CommonOptions& o, std::optional<double> t, std::optional<double> tau)
{
    tdm::RunConfig c = load_config(o);
    if (t) c.cell_t = *t;
    if (tau) c.cell_tau = *tau;
    const fs::path out = require_out_dir(c);
    const tdm::Model model = tdm::make_model(c);
    const tdm::Grid g = tdm::make_grid(c.n);
    const tdm::CellProblem cp = tdm::make_cell_problem(model, g, c.cell_t, c.cell_tau, c.solver.dt_per_period);

    auto manifest = tdm::describe(c);
    manifest.emplace_back("t", tdm::detail::fmt(c.cell_t));
    manifest.emplace_back("tau", tdm::detail::fmt(c.cell_tau));
    try {
        const tdm::PeriodicProfile profile = tdm::find_periodic(cp, c.solver);
        tdm::write_profile(out / "profile", profile);
        std::ofstream log(out / "convergence.txt", std::ios::trunc);
        if (!log) throw tdm::FilesystemError("cannot write convergence log");
        log << "status=converged\n";
        for (const auto& [k, v] : manifest) log << k << '=' << v << '\n';
        for (std::size_t k = 0; k < profile.report.stages.size(); ++k) {
            const auto& s = profile.report.stages[k];
            log << "stage" << k << "=mu:" << tdm::detail::fmt(s.mu) << ",nu:" << tdm::detail::fmt(s.nu)
                << ",iterations:" << s.iterations << ",distance:" << tdm::detail::fmt(s.distance)
                << ",converged:" << (s.converged ? 1 : 0) << ",skipped:" << (s.skipped ? 1 : 0) << '\n';
        }
        log << "fixed_point_residual=" << tdm::detail::fmt(profile.report.residual) << '\n';
        log << "max_abs_mean=" << tdm::detail::fmt(profile.max_abs_mean()) << '\n';
        std::cout << "status=converged\nfixed_point_residual=" << tdm::detail::fmt(profile.report.residual)
                  << "\nmax_abs_mean=" << tdm::detail::fmt(profile.max_abs_mean()) << "\noutput=" << out.string() << '\n';
        return profile.max_abs_mean() <= 1e-10 ? 0 : kExitCompute;
    } catch (const tdm::FixedPointError& e) {
        manifest.emplace_back("status", "failed");
        manifest.emplace_back("failed_entry", std::to_string(e.entry));
        manifest.emplace_back("failed_mu", tdm::detail::fmt(e.mu));
        manifest.emplace_back("failed_nu", tdm::detail::fmt(e.nu));
        manifest.emplace_back("last_ratio", tdm::detail::fmt(e.last_ratio));
        manifest.emplace_back("message", e.what());
        write_kv(out / "convergence.txt", manifest);
        throw;
    }
}

int cmd_verify_sweep(const CommonOptions& o)
{
    const tdm::RunConfig c = load_config(o);
    const fs::path out = require_out_dir(c);
    const tdm::Model model = tdm::make_model(c);

    tdm::SweepSettings s;
    s.epsilons = c.epsilons;
    s.T = c.verify_T;
    s.n = c.n;
    s.delta_t = c.delta_t;
    s.jobs = c.jobs;
    s.out_dir = out / "fields";
    s.solver = c.solver;
    const tdm::SweepResult sweep = tdm::run_sweep(model, s);
    const tdm::ErrorReport two = tdm::two_scale_report(sweep);
    const tdm::ErrorReport corr = tdm::corrector_report(sweep);

    tdm::write_report_csv(out / "two_scale.csv", two, c.timing);
    tdm::write_summary(out / "summary.txt", sweep, two, corr);
    tdm::write_plot_script(out / "convergence.gp", "two_scale.csv", two);
    auto manifest = tdm::describe(c);
    manifest.emplace_back("seed", std::to_string(c.seed));
    manifest.emplace_back("T", tdm::detail::fmt(c.verify_T));
    manifest.emplace_back("delta_t", tdm::detail::fmt(c.delta_t));
    write_kv(out / "manifest.txt", manifest);

    std::cout << std::ifstream(out / "summary.txt").rdbuf();
    bool ok = sweep.corrector_solvable;
    for (const auto& row : sweep.rows) ok = ok && row.ok && row.mass_drift <= 1e-9;
    return ok ? 0 : kExitCompute;
}

int cmd_verify_contraction(const CommonOptions& o, std::optional<double> mu, std::optional<double> nu,
                           std::optional<int> trials)
{
    tdm::RunConfig c = load_config(o);
    if (mu) c.verify_mu = *mu;
    if (nu) c.verify_nu = *nu;
    if (trials) c.trials = *trials;
    const tdm::Model model = tdm::make_model(c);
    const tdm::Grid g = tdm::make_grid(c.n);
    const tdm::ContractionResult r =
        tdm::contraction_ratio(model, g, c.verify_mu, c.verify_nu, c.verify_t, 0.0, c.trials, c.solver, c.seed);
    const double bound = std::exp(-c.verify_mu) + 1e-6;
    using tdm::detail::fmt;
    std::cout << "mu=" << fmt(c.verify_mu) << "\nnu=" << fmt(c.verify_nu) << "\ntrials=" << c.trials
              << "\nseed=" << c.seed << "\nratio=" << fmt(r.max_ratio()) << "\nbound=" << fmt(bound) << '\n';
    if (!c.out_dir.empty()) {
        const fs::path out = require_out_dir(c);
        std::ofstream csv(out / "contraction.csv", std::ios::trunc);
        if (!csv) throw tdm::FilesystemError("cannot write contraction.csv");
        csv << "trial,ratio\n";
        for (std::size_t k = 0; k < r.ratios.size(); ++k) csv << k << ',' << fmt(r.ratios[k]) << '\n';
    }
    return c.verify_mu > 0.0 && r.max_ratio() > bound ? kExitCompute : 0;
}

void add_common(CLI::App* cmd, CommonOptions& o)
{
    cmd->add_option("--config", o.config, "Configuration file")->check(CLI::ExistingFile);
    cmd->add_option("--out", o.out, "Output directory (must exist)");
    cmd->add_option("--seed", o.seed, "Random seed");
    cmd->add_option("--epsilons", o.epsilons, "Comma-separated eps list, e.g. 1/25,1/50");
    cmd->add_option("--grid", o.grid, "Cells per axis");
    cmd->add_option("--jobs", o.jobs, "Concurrent sweep members");
    cmd->add_flag("--timing", o.timing, "Write runtimes into the CSV report");
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Tide-driven dune morphodynamics: fine runs, cell problems and homogenization checks"};
    app.require_subcommand(1);

    std::string kind = "short_small";
    std::map<std::string, std::optional<double>> physical{
        {"u_bar", {}}, {"H", {}},      {"M_bar", {}}, {"D_G", {}},           {"rho", {}},
        {"p", {}},     {"lambda", {}}, {"alpha", {}}, {"u_c", {}},           {"t_bar", {}},
        {"omega_bar_inv", {}},         {"omega_c_bar_inv", {}},             {"z_bar", {}},
        {"L_bar", {}}};
    auto* regime = app.add_subcommand("regime", "Derive eps and the dimensionless coefficients of a regime");
    regime->add_option("--kind", kind, "short_small | short_big | mean_small | long_small");
    for (auto& [name, value] : physical) regime->add_option("--" + name, value, "Override " + name + " (SI units)");

    CommonOptions run_opts, cell_opts, sweep_opts, contraction_opts;
    auto* run = app.add_subcommand("run", "Integrate the fine model and persist the trajectory");
    add_common(run, run_opts);

    std::optional<double> cell_t, cell_tau;
    auto* cell = app.add_subcommand("cell", "Solve the periodic cell problem at frozen (t, tau)");
    add_common(cell, cell_opts);
    cell->add_option("--t", cell_t, "Slow time");
    cell->add_option("--tau", cell_tau, "Lunar phase");

    auto* verify = app.add_subcommand("verify", "Verification reports");
    verify->require_subcommand(1);
    auto* sweep = verify->add_subcommand("sweep", "Two-scale and corrector error sweep over eps");
    add_common(sweep, sweep_opts);
    std::optional<double> mu, nu;
    std::optional<int> trials;
    auto* contraction = verify->add_subcommand("contraction", "Measure the period-map contraction ratio");
    add_common(contraction, contraction_opts);
    contraction->add_option("--mu", mu, "Penalization");
    contraction->add_option("--nu", nu, "Regularization");
    contraction->add_option("--trials", trials, "Random pairs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*regime) {
            std::map<std::string, double> overrides;
            for (const auto& [name, value] : physical)
                if (value) overrides[name] = *value;
            return cmd_regime(kind, overrides);
        }
        if (*run) return cmd_run(run_opts);
        if (*cell) return cmd_cell(cell_opts, cell_t, cell_tau);
        if (*sweep) return cmd_verify_sweep(sweep_opts);
        if (*contraction) return cmd_verify_contraction(contraction_opts, mu, nu, trials);
    } catch (const tdm::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const tdm::FilesystemError& e) {
        std::cerr << "filesystem error: " << e.what() << '\n';
        return kExitFilesystem;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "filesystem error: " << e.what() << '\n';
        return kExitFilesystem;
    } catch (const tdm::Error& e) {
        std::cerr << "computation failed: " << e.what() << '\n';
        return kExitCompute;
    }
    return kExitConfig;
}
