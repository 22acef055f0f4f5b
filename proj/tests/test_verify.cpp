#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tdm/verify.hpp"

using namespace tdm;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("tdm_test_verify_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Trajectory flat_trajectory(const Grid& g, std::vector<double> masses)
{
    Trajectory t;
    for (std::size_t k = 0; k < masses.size(); ++k) {
        t.diagnostics.push_back({static_cast<long>(k), 0.1 * k, 0.0, masses[k], 0.0, 0});
        t.times.push_back(0.1 * k);
        t.snapshots.push_back(ScalarField(g, masses[k]));
        t.snapshot_steps.push_back(static_cast<long>(k));
    }
    return t;
}

SweepSettings small_sweep(const fs::path& dir)
{
    SweepSettings s;
    s.epsilons = {1.0 / 25, 1.0 / 50, 1.0 / 100};
    s.T = 0.4;
    s.n = 16;
    s.out_dir = dir;
    s.solver.dt_per_period = 32;
    s.solver.linear_tol = 1e-12;
    s.solver.fixed_point_tol = 1e-11;
    return s;
}

Model without_source(const Model& base)
{
    Model m = base;
    m.sampler = [base](const RegimeSpec& r, const Grid& g, double t, double tau, double theta, CoefficientPart part) {
        CoefficientField f = base.sampler(r, g, t, tau, theta, part);
        f.C = VectorField(g);
        return f;
    };
    return m;
}

}  // namespace

TEST(MassDrift, Examples)
{
    const Grid g = make_grid(4);
    EXPECT_EQ(mass_drift(flat_trajectory(g, {1.0, 1.0, 1.0})), 0.0);
    EXPECT_NEAR(mass_drift(flat_trajectory(g, {1.0, 1.0 + 1e-6, 1.0 - 2e-6})), 2e-6, 1e-15);
    Trajectory corrupted = flat_trajectory(g, {1.0, 1.0, 1.0});
    corrupted.snapshots[1].values()[0] += 0.5;
    EXPECT_NEAR(mass_drift(corrupted), 0.5 / 16, 1e-15);
    EXPECT_THROW(mass_drift(Trajectory{}), ConfigError);
}

TEST(Contraction, RandomFieldsAreNormalized)
{
    std::mt19937_64 rng(3);
    const ScalarField f = random_zero_mean_field(make_grid(16), rng);
    EXPECT_LE(std::abs(mean(f)), 1e-15);
    EXPECT_NEAR(norm_l2(f), 1.0, 1e-14);
}

TEST(Contraction, BoundedByPenalization)
{
    const Grid g = make_grid(16);
    const Model m = make_model(snapped_regime(RegimeKind::short_small), Forcing{});
    SolverConfig cfg;
    cfg.dt_per_period = 32;
    cfg.linear_tol = 1e-12;
    for (const double mu : {0.25, 0.5, 1.0}) {
        const ContractionResult r = contraction_ratio(m, g, mu, 1e-3, 0.0, 0.0, 4, cfg, 12345);
        ASSERT_EQ(r.ratios.size(), 4u);
        EXPECT_LE(r.max_ratio(), std::exp(-mu) + 1e-6);
        const ContractionResult again = contraction_ratio(m, g, mu, 1e-3, 0.0, 0.0, 4, cfg, 12345);
        EXPECT_EQ(r.ratios, again.ratios);
    }
    EXPECT_THROW(contraction_ratio(m, g, 0.5, 1e-3, 0.0, 0.0, 1, cfg, 1), ConfigError);
}

TEST(FitOrder, Examples)
{
    const std::vector<double> eps{0.1, 0.05, 0.025, 0.0125};
    std::vector<double> lin, quad;
    for (double e : eps) lin.push_back(3.0 * e), quad.push_back(0.5 * e * e);
    EXPECT_NEAR(fit_order(eps, lin), 1.0, 1e-12);
    EXPECT_NEAR(fit_order(eps, quad), 2.0, 1e-12);
    EXPECT_THROW(fit_order({0.1, 0.05}, {1.0, 0.5}), ConfigError);
    EXPECT_THROW(fit_order(eps, {1.0, 0.0, 1.0, 1.0}), ConfigError);
    EXPECT_THROW(fit_order(eps, {1.0, 1.0}), ConfigError);
}

TEST(ParallelFor, CoversAllIndicesAndPropagatesErrors)
{
    std::vector<std::atomic<int>> hits(37);
    parallel_for(hits.size(), 4, [&](std::size_t k) { ++hits[k]; });
    for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
    EXPECT_THROW(parallel_for(5, 3, [](std::size_t k) {
                     if (k == 2) throw ConfigError("boom");
                 }),
                 ConfigError);
}

TEST(Sweep, SettingsValidation)
{
    SweepSettings s = small_sweep("unused");
    EXPECT_NO_THROW(s.validate());
    s.epsilons = {};
    EXPECT_THROW(s.validate(), ConfigError);
    s.epsilons = {1.0 / 50, 1.0 / 25};
    EXPECT_THROW(s.validate(), ConfigError);
    s = small_sweep("unused");
    s.T = 0.1;
    EXPECT_THROW(s.validate(), ConfigError);
    s = small_sweep("");
    EXPECT_THROW(s.validate(), ConfigError);
}

TEST(Sweep, ZeroForcingGivesZeroErrors)
{
    const fs::path dir = scratch("zero");
    const SweepResult r = run_sweep(without_source(oracle::single_mode_model()), small_sweep(dir));
    for (const auto& row : r.rows) {
        ASSERT_TRUE(row.ok) << row.failure;
        EXPECT_EQ(row.error, 0.0);
        EXPECT_EQ(row.remainder, 0.0);
    }
    const ErrorReport rep = two_scale_report(r);
    EXPECT_TRUE(std::isnan(rep.fitted_order));
    EXPECT_FALSE(rep.order_note.empty());
    fs::remove_all(dir);
}

TEST(Sweep, MatchesScalarOracle)
{
    const int n = 16, P = 32;
    const double slope = 1.0, T = 0.4;
    const fs::path dir = scratch("oracle");
    const SweepSettings s = small_sweep(dir);
    const SweepResult r = run_sweep(oracle::single_mode_model(slope), s);
    const ErrorReport rep = two_scale_report(r);
    const double u0 = oracle::discrete_mode(n, P)[0];
    const double uT = oracle::discrete_mode(n, P, 1.0 + slope * T)[0];
    ASSERT_EQ(rep.errors.size(), 3u);
    for (std::size_t k = 0; k < 3; ++k) {
        const double eps = s.epsilons[k];
        const long N = std::lround(T / eps * P);
        const double expected = oracle::mode_norm(oracle::fine_mode(n, P, eps, slope, u0, N) - uT);
        EXPECT_NEAR(rep.errors[k], expected, 0.1 * expected) << "eps=" << eps;
        EXPECT_LE(r.rows[k].mass_drift, 1e-12);
    }
    EXPECT_TRUE(strictly_decreasing(rep.errors));
    EXPECT_NEAR(rep.fitted_order, 1.0, 0.2);
    EXPECT_TRUE(fs::exists(dir / "U_T" / "manifest.txt"));
    EXPECT_TRUE(fs::exists(dir / "eps_0" / "diagnostics.csv"));
    EXPECT_TRUE(fs::exists(dir / "z0.bin"));
    fs::remove_all(dir);
}

TEST(Sweep, ReportIsReproducible)
{
    const Model m = make_model(snapped_regime(RegimeKind::short_small), Forcing{});
    std::string csv[2];
    for (int run = 0; run < 2; ++run) {
        const fs::path dir = scratch("repro" + std::to_string(run));
        SweepSettings s = small_sweep(dir);
        s.n = 8;
        s.jobs = run + 1;
        const SweepResult r = run_sweep(m, s);
        write_report_csv(dir / "two_scale.csv", two_scale_report(r), false);
        csv[run] = slurp(dir / "two_scale.csv");
        write_summary(dir / "summary.txt", r, two_scale_report(r), corrector_report(r));
        write_plot_script(dir / "convergence.gp", "two_scale.csv", two_scale_report(r));
        EXPECT_TRUE(fs::exists(dir / "summary.txt"));
        fs::remove_all(dir);
    }
    EXPECT_EQ(csv[0], csv[1]);
    EXPECT_EQ(csv[0].rfind("epsilon,error,remainder,mass_drift,runtime_s\n", 0), 0u);
    EXPECT_EQ(std::count(csv[0].begin(), csv[0].end(), '\n'), 4);
}

TEST(Sweep, RejectsOtherRegimes)
{
    const Model m = make_model(snapped_regime(RegimeKind::mean_small), Forcing{});
    EXPECT_THROW(run_sweep(m, small_sweep(fs::temp_directory_path() / "tdm_never_created")), ConfigError);
    const Model big = make_model(snapped_regime(RegimeKind::short_big), Forcing{});
    EXPECT_THROW(corrector_error(big, small_sweep(fs::temp_directory_path() / "tdm_never_created")), ConfigError);
}

TEST(Closeness, ExactForTimeIndependentForcing)
{
    const Grid g = make_grid(8);
    SolverConfig cfg;
    cfg.dt_per_period = 32;
    cfg.linear_tol = 1e-12;
    cfg.fixed_point_tol = 1e-12;
    const ClosenessRow row = quasi_periodic_closeness(oracle::single_mode_model(0.0, 1.0 / 25), g, 0.4, 3, cfg);
    ASSERT_EQ(row.times.size(), 11u);
    for (double d : row.distances) EXPECT_LE(d, 1e-9);
    EXPECT_LE(std::abs(row.slope), 1e-8);
    EXPECT_LE(row.mass_drift, 1e-12);
}
