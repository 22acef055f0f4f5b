#include <cmath>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tdm/homogenize.hpp"

using namespace tdm;

namespace {

SolverConfig tight(int P = 32)
{
    SolverConfig c;
    c.dt_per_period = P;
    c.linear_tol = 1e-12;
    c.fixed_point_tol = 1e-11;
    return c;
}

Model rotating(ForcingParams p = {})
{
    return make_model(snapped_regime(RegimeKind::short_small).with_epsilon(1.0 / 50), Forcing::rotating(p));
}

/// Wraps `base` with its source vector multiplied by `factor`.
Model scaled_source(const Model& base, double factor)
{
    Model m = base;
    m.sampler = [base, factor](const RegimeSpec&, const Grid& g, double t, double tau, double theta, CoefficientPart part) {
        CoefficientField f = base.sample(g, t, tau, theta, part);
        for (auto v : {f.C.xs(), f.C.ys()})
            for (auto& x : v) x *= factor;
        return f;
    };
    return m;
}

ScalarField cos_mode(const Grid& g, double amp)
{
    return ScalarField::sample(g, [&](double x1, double) { return amp * std::cos(oracle::kTwoPi * x1); });
}

double max_norm(const PeriodicProfile& p)
{
    double m = 0.0;
    for (const auto& s : p.samples) m = std::max(m, norm_max(s));
    return m;
}

PeriodicProfile constant_profile(const Grid& g, int P, double value, double t)
{
    PeriodicProfile p;
    p.t = t;
    for (int j = 0; j < P; ++j) p.samples.push_back(ScalarField(g, value));
    return p;
}

}  // namespace

TEST(Cell, ZeroSourceGivesZero)
{
    const Grid g = make_grid(16);
    const PeriodicProfile U = cell_solve(scaled_source(rotating(), 0.0), g, 0.0, tight());
    EXPECT_EQ(max_norm(U), 0.0);
}

TEST(Cell, MatchesOracles)
{
    const int n = 32;
    const Grid g = make_grid(n);
    double gap[2] = {0, 0};
    for (const int P : {64, 128}) {
        const PeriodicProfile U = cell_solve(oracle::single_mode_model(), g, 0.0, tight(P));
        const std::vector<double> u = oracle::discrete_mode(n, P);
        double discrete = 0.0, continuous = 0.0;
        for (int j = 0; j < P; ++j) {
            discrete = std::max(discrete, norm_max(U.sample(j) - cos_mode(g, u[static_cast<std::size_t>(j)])));
            continuous = std::max(continuous, norm_max(U.sample(j) - cos_mode(g, oracle::continuous_mode(n, double(j) / P))));
        }
        EXPECT_LE(discrete, 1e-8) << "P=" << P;
        gap[P == 128] = continuous;
    }
    // Backward Euler in theta: the distance to the continuous-theta profile halves with dtheta.
    EXPECT_GT(gap[0] / gap[1], 1.7);
    EXPECT_LT(gap[0] / gap[1], 2.3);
}

TEST(Cell, LinearInSource)
{
    const Grid g = make_grid(16);
    const Model m = rotating();
    const PeriodicProfile a = cell_solve(m, g, 0.1, tight());
    const PeriodicProfile b = cell_solve(scaled_source(m, 2.0), g, 0.1, tight());
    PeriodicProfile twice = a;
    for (auto& s : twice.samples) s *= 2.0;
    EXPECT_LE(profile_distance(b, twice), 1e-9 * (1.0 + max_norm(b)));
    EXPECT_LE(a.max_abs_mean(), 1e-10);
}

TEST(SlowDerivative, Examples)
{
    const Grid g = make_grid(8);
    const PeriodicProfile a = constant_profile(g, 4, 1.0, 0.2), b = constant_profile(g, 4, 1.5, 0.4);
    const PeriodicProfile d = slow_time_derivative(a, b, 0.2);
    EXPECT_DOUBLE_EQ(d.t, 0.3);
    for (const auto& s : d.samples) EXPECT_NEAR(norm_max(s - ScalarField(g, 2.5)), 0.0, 1e-12);
    EXPECT_THROW(slow_time_derivative(a, b, 0.0), ConfigError);
    EXPECT_THROW(slow_time_derivative(a, constant_profile(g, 8, 1.0, 0.4), 0.1), ConfigError);
    EXPECT_THROW(slow_time_derivative(a, constant_profile(make_grid(4), 4, 1.0, 0.4), 0.1), ConfigError);
}

TEST(Corrector, VanishesWithoutHeightOrSlowVariation)
{
    const Grid g = make_grid(16);
    const SolverConfig cfg = tight();
    auto corrector = [&](const Model& m) {
        const PeriodicProfile U = cell_solve(m, g, 0.2, cfg);
        const PeriodicProfile dU = slow_time_derivative(cell_solve(m, g, 0.2 - 1e-3, cfg), cell_solve(m, g, 0.2 + 1e-3, cfg), 2e-3);
        return solve_corrector(m, U, dU, cfg);
    };
    Model flat = rotating();
    flat.regime.b = 0.0;
    const CorrectorResult r1 = corrector(flat);
    EXPECT_TRUE(r1.solvable);
    EXPECT_LE(max_norm(r1.profile), 1e-12);

    ForcingParams p;
    p.m_amplitude = 0.0;
    const CorrectorResult r2 = corrector(rotating(p));
    EXPECT_LE(max_norm(r2.profile), 1e-12);

    const CorrectorResult r3 = corrector(oracle::single_mode_model());
    EXPECT_LE(max_norm(r3.profile), 1e-12);
}

TEST(Corrector, GenericCaseIsSolvable)
{
    const Grid g = make_grid(16);
    const SolverConfig cfg = tight();
    ForcingParams p;
    p.slow_modulation = 0.5;
    const Model m = rotating(p);
    const double t = 0.2, delta = 1e-3;
    const PeriodicProfile U = cell_solve(m, g, t, cfg);
    const PeriodicProfile dU = slow_time_derivative(cell_solve(m, g, t - delta, cfg), cell_solve(m, g, t + delta, cfg), 2 * delta);
    const CorrectorResult r = solve_corrector(m, U, dU, cfg);
    EXPECT_TRUE(r.solvable);
    EXPECT_LE(r.rhs_mean_max, kSolvabilityTol);
    EXPECT_GT(max_norm(r.profile), 1e-3);
    EXPECT_LE(r.profile.max_abs_mean(), 1e-10);
    EXPECT_LE(r.profile.report.residual, 10 * cfg.fixed_point_tol);
}

TEST(Corrector, RejectsUnsupportedModels)
{
    const Grid g = make_grid(8);
    const SolverConfig cfg = tight(16);
    const Model big = make_model(snapped_regime(RegimeKind::short_big), Forcing{});
    const PeriodicProfile U = constant_profile(g, 16, 0.0, 0.0);
    EXPECT_THROW(solve_corrector(big, U, U, cfg), ConfigError);
    const Model mean = make_model(snapped_regime(RegimeKind::mean_small), Forcing{});
    EXPECT_THROW(solve_corrector(mean, U, U, cfg), ConfigError);
}

TEST(Reconstruct, Examples)
{
    const Grid g = make_grid(8);
    PeriodicProfile U, U1;
    for (int j = 0; j < 4; ++j) {
        U.samples.push_back(ScalarField(g, j));
        U1.samples.push_back(ScalarField(g, 100.0));
    }
    const ProfileFamily fu({0.0}, {}, {U}), f1({0.0}, {}, {U1});
    // t = 0 lands on theta = 0.
    EXPECT_LE(norm_max(reconstruct(fu, nullptr, 0.1, 0.0, 0)), 0.0);
    EXPECT_LE(norm_max(reconstruct(fu, &f1, 0.1, 0.0, 1) - ScalarField(g, 10.0)), 1e-14);
    EXPECT_THROW(reconstruct(fu, nullptr, 0.1, 0.0, 1), ConfigError);
    EXPECT_THROW(reconstruct(fu, &f1, 0.1, 0.0, 2), ConfigError);
    EXPECT_THROW(reconstruct(fu, &f1, 0.0, 0.0, 0), ConfigError);
}
