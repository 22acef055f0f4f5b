#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "tdm/errors.hpp"
#include "tdm/field_io.hpp"
#include "tdm/grid.hpp"

namespace tdm {

/// One (mu, nu) stage of the continuation.
struct ContinuationStage {
    double mu = 0.0;
    double nu = 0.0;
    int iterations = 0;
    double distance = 0.0;  ///< last L2 distance between successive images
    double ratio = 0.0;     ///< last ratio of successive distances
    bool converged = false;
    bool skipped = false;
};

struct ConvergenceReport {
    std::vector<ContinuationStage> stages;
    /// || Phi(S(0)) - S(0) || of the returned profile.
    double residual = 0.0;
};

/// A theta-periodic field sampled at theta_j = j / P, j = 0..P-1, at frozen (t, tau).
struct PeriodicProfile {
    double t = 0.0;
    double tau = 0.0;
    std::vector<ScalarField> samples;
    ConvergenceReport report;

    int steps() const noexcept { return static_cast<int>(samples.size()); }
    const Grid& grid() const { return samples.at(0).grid(); }

    const ScalarField& sample(int j) const
    {
        const int p = steps();
        return samples[static_cast<std::size_t>(((j % p) + p) % p)];
    }

    /// Periodic linear interpolation in theta. Values within 1e-9 of a lattice
    /// node are snapped to it.
    ScalarField at(double theta) const
    {
        if (samples.empty()) throw ConfigError("empty periodic profile");
        const double p = static_cast<double>(steps());
        double s = (theta - std::floor(theta)) * p;
        const double nearest = std::round(s);
        if (std::abs(s - nearest) < 1e-9 * p) return sample(static_cast<int>(nearest));
        const int lo = static_cast<int>(std::floor(s));
        const double w = s - lo;
        ScalarField out = (1.0 - w) * sample(lo);
        out.axpy(w, sample(lo + 1));
        return out;
    }

    double max_abs_mean() const
    {
        double m = 0.0;
        for (const auto& f : samples) m = std::max(m, std::abs(mean(f)));
        return m;
    }
};

inline PeriodicProfile operator-(const PeriodicProfile& a, const PeriodicProfile& b)
{
    if (a.steps() != b.steps() || !(a.grid() == b.grid())) throw ConfigError("profiles on different lattices");
    PeriodicProfile out = a;
    for (std::size_t k = 0; k < out.samples.size(); ++k) out.samples[k] -= b.samples[k];
    return out;
}

/// Max over theta samples of the L2 distance.
inline double profile_distance(const PeriodicProfile& a, const PeriodicProfile& b)
{
    if (a.steps() != b.steps()) throw ConfigError("profiles on different theta lattices");
    double d = 0.0;
    for (std::size_t k = 0; k < a.samples.size(); ++k) d = std::max(d, norm_l2_distance(a.samples[k], b.samples[k]));
    return d;
}

namespace detail {

inline std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::map<std::string, std::string> read_manifest(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw FilesystemError("cannot open " + path.string());
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

inline const std::string& manifest_get(const std::map<std::string, std::string>& kv, const std::string& key,
                                       const std::filesystem::path& where)
{
    auto it = kv.find(key);
    if (it == kv.end()) throw ConfigError("manifest " + where.string() + ": missing key `" + key + "`");
    return it->second;
}

inline std::string theta_file(int j)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "theta_%04d.bin", j);
    return buf;
}

}  // namespace detail

/// Writes theta_XXXX.bin files and manifest.txt into `dir` (created if missing).
inline void write_profile(const std::filesystem::path& dir, const PeriodicProfile& p)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw FilesystemError("cannot create " + dir.string() + ": " + ec.message());
    for (int j = 0; j < p.steps(); ++j) write_field(dir / detail::theta_file(j), p.samples[static_cast<std::size_t>(j)]);

    std::ofstream m(dir / "manifest.txt", std::ios::trunc);
    if (!m) throw FilesystemError("cannot write manifest in " + dir.string());
    m << "kind=periodic_profile\n";
    m << "t=" << detail::fmt(p.t) << '\n';
    m << "tau=" << detail::fmt(p.tau) << '\n';
    m << "n=" << p.grid().n() << '\n';
    m << "theta_samples=" << p.steps() << '\n';
    m << "theta_lattice=uniform j/" << p.steps() << '\n';
    m << "max_abs_mean=" << detail::fmt(p.max_abs_mean()) << '\n';
    m << "fixed_point_residual=" << detail::fmt(p.report.residual) << '\n';
    m << "stages=" << p.report.stages.size() << '\n';
    for (std::size_t k = 0; k < p.report.stages.size(); ++k) {
        const auto& s = p.report.stages[k];
        m << "stage" << k << "=mu:" << detail::fmt(s.mu) << ",nu:" << detail::fmt(s.nu)
          << ",iterations:" << s.iterations << ",distance:" << detail::fmt(s.distance)
          << ",ratio:" << detail::fmt(s.ratio) << ",converged:" << (s.converged ? 1 : 0)
          << ",skipped:" << (s.skipped ? 1 : 0) << '\n';
    }
    if (!m) throw FilesystemError("write failed: " + (dir / "manifest.txt").string());
}

inline PeriodicProfile read_profile(const std::filesystem::path& dir)
{
    const auto manifest = dir / "manifest.txt";
    const auto kv = detail::read_manifest(manifest);
    PeriodicProfile p;
    p.t = std::stod(detail::manifest_get(kv, "t", manifest));
    p.tau = std::stod(detail::manifest_get(kv, "tau", manifest));
    p.report.residual = std::stod(detail::manifest_get(kv, "fixed_point_residual", manifest));
    const int count = std::stoi(detail::manifest_get(kv, "theta_samples", manifest));
    if (count <= 0) throw ConfigError("manifest " + manifest.string() + ": no theta samples");
    for (int j = 0; j < count; ++j) p.samples.push_back(read_field(dir / detail::theta_file(j)));
    for (const auto& f : p.samples)
        if (!(f.grid() == p.samples[0].grid())) throw ConfigError("profile " + dir.string() + ": mixed grids");
    return p;
}

}  // namespace tdm
