#pragma once

// Sectioned key=value run configuration (INI syntax, ';' or '#' comments).
//
//   [regime]  kind, epsilon, a, b, c
//   [law]     kind, u_c2, G_thr
//   [forcing] preset, amplitude, spatial_modulation, slow_modulation,
//             direction_angle, m_amplitude, u1_amplitude, u2_amplitude,
//             m2_amplitude, manifest
//   [grid]    n
//   [solver]  dt_per_period, linear_tol, linear_maxiter, nu, mu,
//             fixed_point_tol, continuation, max_fixed_point_iters,
//             skip_unconverged_final, jacobi
//   [run]     T, stride, initial
//   [cell]    t, tau
//   [verify]  epsilons, T, delta_t, jobs, seed, mu, nu, trials, t
//   [output]  dir, timing

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "tdm/errors.hpp"
#include "tdm/field_io.hpp"
#include "tdm/model.hpp"
#include "tdm/physics.hpp"
#include "tdm/regime.hpp"
#include "tdm/solver.hpp"

namespace tdm {

struct RunConfig {
    RegimeSpec regime = snapped_regime(RegimeKind::short_small);
    ForcingParams forcing;
    std::filesystem::path forcing_manifest;  ///< tabulated preset only
    int n = 64;
    SolverConfig solver;

    double run_T = 0.5;
    int run_stride = 64;
    std::string run_initial = "zero";  ///< zero | cell | path to a field file

    double cell_t = 0.0;
    double cell_tau = 0.0;

    std::vector<double> epsilons{1.0 / 25, 1.0 / 50, 1.0 / 100, 1.0 / 200};
    double verify_T = 0.4;
    double delta_t = 1e-3;
    int jobs = 1;
    unsigned long long seed = 12345;
    double verify_mu = 0.5;
    double verify_nu = 1e-3;
    int trials = 8;
    double verify_t = 0.0;

    std::filesystem::path out_dir;
    bool timing = false;

    void validate() const
    {
        regime.validate();
        make_grid(n);
        solver.validate();
        if (forcing.preset == ForcingPreset::tabulated && forcing_manifest.empty())
            throw ConfigError("forcing: tabulated preset needs a manifest");
        if (!(run_T > 0.0)) throw ConfigError("run: T must be > 0");
        if (run_stride < 1) throw ConfigError("run: stride must be >= 1");
        if (jobs < 1) throw ConfigError("verify: jobs must be >= 1");
        if (trials < 2) throw ConfigError("verify: trials must be >= 2");
    }
};

/// "1/25, 0.02, 1e-2" -> doubles; "1/x" fractions are accepted.
inline std::vector<double> parse_number_list(const std::string& text)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto first = item.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        const auto last = item.find_last_not_of(" \t");
        item = item.substr(first, last - first + 1);
        try {
            const auto slash = item.find('/');
            std::size_t used = 0;
            if (slash == std::string::npos) {
                out.push_back(std::stod(item, &used));
                if (used != item.size()) throw std::invalid_argument(item);
            } else {
                const std::string num = item.substr(0, slash), den = item.substr(slash + 1);
                std::size_t u1 = 0, u2 = 0;
                const double value = std::stod(num, &u1) / std::stod(den, &u2);
                if (u1 != num.size() || u2 != den.size()) throw std::invalid_argument(item);
                out.push_back(value);
            }
        } catch (const std::exception&) {
            throw ConfigError("not a number: `" + item + "`");
        }
    }
    return out;
}

namespace detail {

using boost::property_tree::ptree;

template <class T>
T get_value(const ptree& section, const std::string& sec, const std::string& key, T fallback)
{
    const auto node = section.get_child_optional(key);
    if (!node) return fallback;
    try {
        return node->get_value<T>();
    } catch (const boost::property_tree::ptree_error&) {
        throw ConfigError("[" + sec + "] " + key + ": cannot parse `" + node->data() + "`");
    }
}

inline bool get_bool(const ptree& section, const std::string& sec, const std::string& key, bool fallback)
{
    const auto node = section.get_child_optional(key);
    if (!node) return fallback;
    const std::string v = node->data();
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("[" + sec + "] " + key + ": expected a boolean, got `" + v + "`");
}

inline void check_keys(const ptree& section, const std::string& sec, const std::set<std::string>& allowed)
{
    for (const auto& [key, value] : section)
        if (!allowed.count(key)) throw ConfigError("[" + sec + "]: unknown key `" + key + "`");
}

}  // namespace detail

inline RunConfig parse_run_config(std::istream& in, const std::filesystem::path& base_dir = {})
{
    using detail::get_value;
    using detail::ptree;
    ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("configuration: ") + e.what());
    }

    static const std::set<std::string> sections{"regime", "law", "forcing", "grid", "solver",
                                                "run",    "cell", "verify", "output"};
    for (const auto& [name, section] : tree) {
        if (!sections.count(name)) throw ConfigError("configuration: unknown section [" + name + "]");
        if (section.empty() && !section.data().empty())
            throw ConfigError("configuration: key `" + name + "` outside of a section");
    }
    const ptree empty;
    auto section = [&](const std::string& name) -> const ptree& {
        const auto child = tree.get_child_optional(name);
        return child ? *child : empty;
    };

    RunConfig c;
    {
        const ptree& s = section("regime");
        detail::check_keys(s, "regime", {"kind", "epsilon", "a", "b", "c"});
        c.regime = snapped_regime(parse_regime_kind(get_value<std::string>(s, "regime", "kind", "short_small")));
        c.regime.epsilon = get_value(s, "regime", "epsilon", c.regime.epsilon);
        c.regime.a = get_value(s, "regime", "a", c.regime.a);
        c.regime.b = get_value(s, "regime", "b", c.regime.b);
        c.regime.c = get_value(s, "regime", "c", c.regime.c);
    }
    {
        const ptree& s = section("law");
        detail::check_keys(s, "law", {"kind", "u_c2", "G_thr"});
        const std::string default_kind = to_string(c.regime.law.kind);
        const LawKind kind = parse_law_kind(get_value<std::string>(s, "law", "kind", default_kind));
        if (kind == LawKind::power3) {
            if (s.get_child_optional("u_c2") || s.get_child_optional("G_thr"))
                throw ConfigError("[law] u_c2 and G_thr only apply to the vanrijn law");
            c.regime.law = TransportLaw::power3();
        } else {
            const double uc2 = get_value(s, "law", "u_c2", c.regime.law.kind == LawKind::vanrijn ? c.regime.law.u_c2 : 0.5);
            c.regime.law = TransportLaw::vanrijn(uc2, get_value(s, "law", "G_thr", 0.01));
        }
    }
    {
        const ptree& s = section("forcing");
        detail::check_keys(s, "forcing",
                           {"preset", "amplitude", "spatial_modulation", "slow_modulation", "direction_angle",
                            "m_amplitude", "u1_amplitude", "u2_amplitude", "m2_amplitude", "manifest"});
        auto& f = c.forcing;
        f.preset = parse_forcing_preset(get_value<std::string>(s, "forcing", "preset", "rotating"));
        f.amplitude = get_value(s, "forcing", "amplitude", f.amplitude);
        f.spatial_modulation = get_value(s, "forcing", "spatial_modulation", f.spatial_modulation);
        f.slow_modulation = get_value(s, "forcing", "slow_modulation", f.slow_modulation);
        f.direction_angle = get_value(s, "forcing", "direction_angle", f.direction_angle);
        f.m_amplitude = get_value(s, "forcing", "m_amplitude", f.m_amplitude);
        f.u1_amplitude = get_value(s, "forcing", "u1_amplitude", f.u1_amplitude);
        f.u2_amplitude = get_value(s, "forcing", "u2_amplitude", f.u2_amplitude);
        f.m2_amplitude = get_value(s, "forcing", "m2_amplitude", f.m2_amplitude);
        const std::string manifest = get_value<std::string>(s, "forcing", "manifest", "");
        if (!manifest.empty()) {
            std::filesystem::path p(manifest);
            c.forcing_manifest = p.is_absolute() || base_dir.empty() ? p : base_dir / p;
        }
    }
    {
        const ptree& s = section("grid");
        detail::check_keys(s, "grid", {"n"});
        c.n = get_value(s, "grid", "n", c.n);
    }
    {
        const ptree& s = section("solver");
        detail::check_keys(s, "solver",
                           {"dt_per_period", "linear_tol", "linear_maxiter", "nu", "mu", "fixed_point_tol", "continuation",
                            "max_fixed_point_iters", "skip_unconverged_final", "jacobi"});
        auto& v = c.solver;
        v.dt_per_period = get_value(s, "solver", "dt_per_period", v.dt_per_period);
        v.linear_tol = get_value(s, "solver", "linear_tol", v.linear_tol);
        v.linear_maxiter = get_value(s, "solver", "linear_maxiter", v.linear_maxiter);
        v.nu = get_value(s, "solver", "nu", v.nu);
        v.mu = get_value(s, "solver", "mu", v.mu);
        v.fixed_point_tol = get_value(s, "solver", "fixed_point_tol", v.fixed_point_tol);
        const std::string schedule = get_value<std::string>(s, "solver", "continuation", "");
        if (!schedule.empty()) v.continuation = parse_continuation(schedule);
        v.max_fixed_point_iters = get_value(s, "solver", "max_fixed_point_iters", v.max_fixed_point_iters);
        v.skip_unconverged_final = detail::get_bool(s, "solver", "skip_unconverged_final", v.skip_unconverged_final);
        v.jacobi = detail::get_bool(s, "solver", "jacobi", v.jacobi);
    }
    {
        const ptree& s = section("run");
        detail::check_keys(s, "run", {"T", "stride", "initial"});
        c.run_T = get_value(s, "run", "T", c.run_T);
        c.run_stride = get_value(s, "run", "stride", c.run_stride);
        c.run_initial = get_value<std::string>(s, "run", "initial", c.run_initial);
        if (c.run_initial != "zero" && c.run_initial != "cell" && !base_dir.empty()
            && std::filesystem::path(c.run_initial).is_relative())
            c.run_initial = (base_dir / c.run_initial).string();
    }
    {
        const ptree& s = section("cell");
        detail::check_keys(s, "cell", {"t", "tau"});
        c.cell_t = get_value(s, "cell", "t", c.cell_t);
        c.cell_tau = get_value(s, "cell", "tau", c.cell_tau);
    }
    {
        const ptree& s = section("verify");
        detail::check_keys(s, "verify", {"epsilons", "T", "delta_t", "jobs", "seed", "mu", "nu", "trials", "t"});
        const auto eps = s.get_child_optional("epsilons");
        if (eps) c.epsilons = parse_number_list(eps->data());
        c.verify_T = get_value(s, "verify", "T", c.verify_T);
        c.delta_t = get_value(s, "verify", "delta_t", c.delta_t);
        c.jobs = get_value(s, "verify", "jobs", c.jobs);
        c.seed = get_value(s, "verify", "seed", c.seed);
        c.verify_mu = get_value(s, "verify", "mu", c.verify_mu);
        c.verify_nu = get_value(s, "verify", "nu", c.verify_nu);
        c.trials = get_value(s, "verify", "trials", c.trials);
        c.verify_t = get_value(s, "verify", "t", c.verify_t);
    }
    {
        const ptree& s = section("output");
        detail::check_keys(s, "output", {"dir", "timing"});
        const std::string dir = get_value<std::string>(s, "output", "dir", "");
        if (!dir.empty()) c.out_dir = dir;
        c.timing = detail::get_bool(s, "output", "timing", c.timing);
    }
    c.validate();
    return c;
}

inline RunConfig load_run_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw FilesystemError("cannot open configuration " + path.string());
    return parse_run_config(in, path.parent_path());
}

/// Tabulated forcing manifest: one line per theta sample,
///   theta=<value> u1=<file> u2=<file> [m=<file>]
/// with field files in the grid format, paths relative to the manifest.
inline TabulatedForcing load_tabulated_forcing(const std::filesystem::path& manifest)
{
    std::ifstream in(manifest);
    if (!in) throw FilesystemError("cannot open forcing manifest " + manifest.string());
    const auto base = manifest.parent_path();
    TabulatedForcing table;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string token;
        double theta = -1.0;
        std::string u1, u2, m;
        while (ss >> token) {
            const auto eq = token.find('=');
            if (eq == std::string::npos)
                throw ConfigError(manifest.string() + ":" + std::to_string(lineno) + ": expected key=value");
            const std::string key = token.substr(0, eq), value = token.substr(eq + 1);
            if (key == "theta") theta = parse_number_list(value).at(0);
            else if (key == "u1") u1 = value;
            else if (key == "u2") u2 = value;
            else if (key == "m") m = value;
            else throw ConfigError(manifest.string() + ":" + std::to_string(lineno) + ": unknown key `" + key + "`");
        }
        if (theta < 0.0 || u1.empty() || u2.empty())
            throw ConfigError(manifest.string() + ":" + std::to_string(lineno) + ": needs theta, u1 and u2");
        table.thetas.push_back(theta);
        table.u1.push_back(read_field(base / u1));
        table.u2.push_back(read_field(base / u2));
        if (!m.empty()) table.m.push_back(read_field(base / m));
    }
    table.validate();
    return table;
}

inline Forcing make_forcing(const RunConfig& c)
{
    if (c.forcing.preset == ForcingPreset::tabulated) return Forcing(load_tabulated_forcing(c.forcing_manifest));
    return Forcing(c.forcing);
}

inline Model make_model(const RunConfig& c) { return make_model(c.regime, make_forcing(c)); }

/// key=value lines describing a configuration, for manifests.
inline std::vector<std::pair<std::string, std::string>> describe(const RunConfig& c)
{
    using detail::fmt;
    return {{"regime", to_string(c.regime.kind)},
            {"epsilon", fmt(c.regime.epsilon)},
            {"a", fmt(c.regime.a)},
            {"b", fmt(c.regime.b)},
            {"c", fmt(c.regime.c)},
            {"law", to_string(c.regime.law.kind)},
            {"u_c2", fmt(c.regime.law.u_c2)},
            {"forcing", to_string(c.forcing.preset)},
            {"amplitude", fmt(c.forcing.amplitude)},
            {"spatial_modulation", fmt(c.forcing.spatial_modulation)},
            {"slow_modulation", fmt(c.forcing.slow_modulation)},
            {"m_amplitude", fmt(c.forcing.m_amplitude)},
            {"n", std::to_string(c.n)},
            {"dt_per_period", std::to_string(c.solver.dt_per_period)},
            {"linear_tol", fmt(c.solver.linear_tol)},
            {"nu", fmt(c.solver.nu)},
            {"fixed_point_tol", fmt(c.solver.fixed_point_tol)},
            {"continuation", format_continuation(c.solver.continuation)},
            {"slow_time_interpolation", "linear"}};
}

}  // namespace tdm
