#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "tdm/config.hpp"
#include "tdm/profile.hpp"

using namespace tdm;
namespace fs = std::filesystem;

namespace {

RunConfig parse(const std::string& text, const fs::path& base = {})
{
    std::istringstream in(text);
    return parse_run_config(in, base);
}

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("tdm_test_config_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST(RunConfig, Defaults)
{
    const RunConfig c = parse("");
    EXPECT_EQ(c.regime.kind, RegimeKind::short_small);
    EXPECT_DOUBLE_EQ(c.regime.epsilon, 1.0 / 200);
    EXPECT_EQ(c.n, 64);
    EXPECT_EQ(c.forcing.preset, ForcingPreset::rotating);
    ASSERT_EQ(c.epsilons.size(), 4u);
    EXPECT_DOUBLE_EQ(c.epsilons[3], 1.0 / 200);
}

TEST(RunConfig, ParsesAllSections)
{
    const RunConfig c = parse(R"(
; comment
[regime]
kind = short_big
epsilon = 0.02
[law]
kind = vanrijn
u_c2 = 0.25
[forcing]
preset = unidirectional
slow_modulation = 0.5
direction_angle = 0.3
[grid]
n = 32
[solver]
dt_per_period = 128
linear_tol = 1e-12
continuation = 1:1e-2,0:1e-4
jacobi = yes
[run]
T = 0.25
stride = 8
initial = cell
[cell]
t = 0.1
tau = 0.5
[verify]
epsilons = 1/25, 1/50, 0.01
jobs = 2
seed = 7
trials = 4
[output]
dir = out
timing = true
)");
    EXPECT_EQ(c.regime.kind, RegimeKind::short_big);
    EXPECT_DOUBLE_EQ(c.regime.epsilon, 0.02);
    EXPECT_DOUBLE_EQ(c.regime.b, 3.0);
    EXPECT_EQ(c.regime.law.kind, LawKind::vanrijn);
    EXPECT_DOUBLE_EQ(c.regime.law.u_c2, 0.25);
    EXPECT_EQ(c.forcing.preset, ForcingPreset::unidirectional);
    EXPECT_DOUBLE_EQ(c.forcing.slow_modulation, 0.5);
    EXPECT_EQ(c.n, 32);
    EXPECT_EQ(c.solver.dt_per_period, 128);
    ASSERT_EQ(c.solver.continuation.size(), 2u);
    EXPECT_DOUBLE_EQ(c.solver.continuation[1].nu, 1e-4);
    EXPECT_TRUE(c.solver.jacobi);
    EXPECT_EQ(c.run_initial, "cell");
    EXPECT_EQ(c.run_stride, 8);
    EXPECT_DOUBLE_EQ(c.cell_tau, 0.5);
    EXPECT_EQ(c.epsilons, (std::vector<double>{1.0 / 25, 1.0 / 50, 0.01}));
    EXPECT_EQ(c.jobs, 2);
    EXPECT_EQ(c.seed, 7u);
    EXPECT_EQ(c.out_dir, fs::path("out"));
    EXPECT_TRUE(c.timing);
}

TEST(RunConfig, RejectsBadInput)
{
    EXPECT_THROW(parse("[nonsense]\nx = 1\n"), ConfigError);
    EXPECT_THROW(parse("[grid]\nm = 3\n"), ConfigError);
    EXPECT_THROW(parse("[grid]\nn = three\n"), ConfigError);
    EXPECT_THROW(parse("[grid]\nn = 1\n"), ConfigError);
    EXPECT_THROW(parse("[regime]\nkind = medium\n"), ConfigError);
    EXPECT_THROW(parse("[regime]\nepsilon = 2\n"), ConfigError);
    EXPECT_THROW(parse("[law]\nkind = power3\nu_c2 = 0.5\n"), ConfigError);
    EXPECT_THROW(parse("[solver]\ndt_per_period = 4\n"), ConfigError);
    EXPECT_THROW(parse("[solver]\njacobi = maybe\n"), ConfigError);
    EXPECT_THROW(parse("[forcing]\npreset = tabulated\n"), ConfigError);
    EXPECT_THROW(parse("[verify]\nepsilons = 1/25, x\n"), ConfigError);
    EXPECT_THROW(parse("[grid\nn = 3\n"), ConfigError);
    EXPECT_THROW(load_run_config("/nonexistent/tdm.ini"), FilesystemError);
}

TEST(RunConfig, NumberLists)
{
    EXPECT_EQ(parse_number_list("1/4, 0.5,2e-1"), (std::vector<double>{0.25, 0.5, 0.2}));
    EXPECT_TRUE(parse_number_list("").empty());
    EXPECT_THROW(parse_number_list("1/"), ConfigError);
    EXPECT_THROW(parse_number_list("0.5x"), ConfigError);
}

TEST(RunConfig, RelativePathsFollowTheFile)
{
    const RunConfig c = parse("[run]\ninitial = z0.bin\n", "/data/cfg");
    EXPECT_EQ(c.run_initial, "/data/cfg/z0.bin");
    EXPECT_EQ(parse("[run]\ninitial = zero\n", "/data/cfg").run_initial, "zero");
}

TEST(RunConfig, DescribeListsSettings)
{
    const auto kv = describe(parse("[grid]\nn = 16\n"));
    auto find = [&](const std::string& key) {
        for (const auto& [k, v] : kv)
            if (k == key) return v;
        return std::string("<missing>");
    };
    EXPECT_EQ(find("n"), "16");
    EXPECT_EQ(find("regime"), "short_small");
    EXPECT_EQ(find("continuation"), format_continuation(default_continuation()));
}

TEST(Tabulated, LoadsAndInterpolates)
{
    const fs::path dir = scratch("tab");
    const Grid g = make_grid(4);
    write_field(dir / "u1_0.csv", ScalarField(g, 1.0));
    write_field(dir / "u1_1.csv", ScalarField(g, -1.0));
    write_field(dir / "zero.csv", ScalarField(g, 0.0));
    write_field(dir / "m.bin", ScalarField(g, 0.5));
    {
        std::ofstream m(dir / "forcing.txt");
        m << "# two samples\ntheta=0 u1=u1_0.csv u2=zero.csv m=m.bin\ntheta=1/2 u1=u1_1.csv u2=zero.csv m=m.bin\n";
    }
    std::ofstream(dir / "run.ini") << "[forcing]\npreset = tabulated\nmanifest = forcing.txt\n";
    const RunConfig c = load_run_config(dir / "run.ini");
    EXPECT_EQ(c.forcing_manifest, dir / "forcing.txt");
    const Forcing f = make_forcing(c);
    EXPECT_EQ(f.preset(), ForcingPreset::tabulated);
    EXPECT_NEAR(f.eval(0.0, 0.0, 0.0, 0.3, 0.6).U[0], 1.0, 1e-15);
    EXPECT_NEAR(f.eval(0.0, 0.0, 0.25, 0.3, 0.6).U[0], 0.0, 1e-15);
    EXPECT_NEAR(f.eval(0.0, 0.0, 0.75, 0.3, 0.6).U[0], 0.0, 1e-15);
    EXPECT_NEAR(f.eval(0.0, 0.0, 0.5, 0.3, 0.6).M, 0.5, 1e-15);
    EXPECT_NO_THROW(make_model(c));

    std::ofstream(dir / "bad.txt") << "theta=0 u1=u1_0.csv\n";
    EXPECT_THROW(load_tabulated_forcing(dir / "bad.txt"), ConfigError);
    std::ofstream(dir / "bad2.txt") << "theta=0 u1=u1_0.csv u2=zero.csv w=1\n";
    EXPECT_THROW(load_tabulated_forcing(dir / "bad2.txt"), ConfigError);
    std::ofstream(dir / "bad3.txt") << "theta=0 u1=missing.csv u2=zero.csv\n";
    EXPECT_THROW(load_tabulated_forcing(dir / "bad3.txt"), FilesystemError);
    fs::remove_all(dir);
}

TEST(Persistence, ProfileRoundTrip)
{
    const fs::path dir = scratch("profile");
    const Grid g = make_grid(8);
    PeriodicProfile p;
    p.t = 0.3;
    p.tau = 0.1;
    for (int j = 0; j < 5; ++j)
        p.samples.push_back(ScalarField::sample(g, [j](double x1, double x2) { return j + x1 * x2 / 3.0; }));
    p.report.residual = 1.25e-12;
    p.report.stages.push_back({1.0, 1e-2, 7, 1e-12, 0.01, true, false});
    write_profile(dir / "U", p);
    const PeriodicProfile q = read_profile(dir / "U");
    EXPECT_DOUBLE_EQ(q.t, 0.3);
    EXPECT_DOUBLE_EQ(q.tau, 0.1);
    EXPECT_DOUBLE_EQ(q.report.residual, 1.25e-12);
    ASSERT_EQ(q.steps(), 5);
    EXPECT_EQ(profile_distance(p, q), 0.0);
    const auto kv = detail::read_manifest(dir / "U" / "manifest.txt");
    EXPECT_EQ(kv.at("stages"), "1");
    EXPECT_EQ(kv.at("theta_samples"), "5");
    EXPECT_THROW(read_profile(dir / "missing"), Error);
    fs::remove_all(dir);
}

TEST(Persistence, TrajectoryLayout)
{
    const fs::path dir = scratch("traj");
    const Grid g = make_grid(4);
    Trajectory t;
    t.times = {0.0, 0.5};
    t.snapshots = {ScalarField(g, 1.0), ScalarField(g, 2.0)};
    t.snapshot_steps = {0, 12};
    t.diagnostics = {{0, 0.0, 0.0, 1.0, 1.0, 0}, {12, 0.5, 3.0, 1.0, 2.0, 9}};
    write_trajectory(dir, t, {{"model", "test"}});
    EXPECT_EQ(norm_max(read_field(dir / "snapshots" / "step_00000012.bin") - ScalarField(g, 2.0)), 0.0);
    std::ifstream d(dir / "diagnostics.csv");
    std::string header, row0;
    std::getline(d, header);
    std::getline(d, row0);
    EXPECT_EQ(header, "step,t,theta,mass,l2_norm,linear_iters");
    EXPECT_EQ(row0, "0,0,0,1,1,0");
    const auto kv = detail::read_manifest(dir / "manifest.txt");
    EXPECT_EQ(kv.at("model"), "test");
    EXPECT_EQ(kv.at("snapshots"), "2");
    fs::remove_all(dir);
}
