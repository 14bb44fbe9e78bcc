#include "fpsi/studies.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace fpsi;

namespace {

constexpr double pi = std::numbers::pi;

} // namespace

TEST(Manufactured, ForcingsMatchFiniteDifferenceResidual)
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ut(0.0, 1.0), ux(0.05, 0.95), uy(0.05, 0.95);
    for (PhysicalParams p : {PhysicalParams{}, PhysicalParams{2.0, 0.5, 3.0, 1.5, 4.0, 0.7, 0.3, 2.5, 1.0, 0.0}}) {
        ManufacturedCase mc;
        mc.params = p;
        for (int k = 0; k < 50; ++k) {
            const double t = ut(rng);
            const Vec2 xf(ux(rng), uy(rng));
            const Vec2 xp(ux(rng), -uy(rng));
            const StrongResidual rf = manufactured_fd_residual(mc, t, xf);
            const StrongResidual rp = manufactured_fd_residual(mc, t, xp);
            EXPECT_LT(rf.stokes_momentum.norm(), 1e-6);
            EXPECT_LT(std::abs(rf.stokes_mass), 1e-6);
            EXPECT_LT(rp.structure_momentum.norm(), 1e-6);
            EXPECT_LT(std::abs(rp.structure_mass), 1e-6);
        }
    }
}

TEST(Manufactured, ValuesAtOrigin)
{
    const ManufacturedCase mc;
    const Vec2 o(0.0, 0.0);
    EXPECT_NEAR(mc.u(0.0, o).x(), pi, 1e-14);
    EXPECT_NEAR(mc.u(0.0, o).y(), pi, 1e-14);
    EXPECT_NEAR(mc.eta(0.0, o).norm(), 0.0, 1e-14);
    EXPECT_NEAR(mc.pp(0.0, o), 0.0, 1e-14);
    EXPECT_NEAR(mc.pf(0.0, o), 2.0 * pi, 1e-14);
    EXPECT_NEAR(mc.g_f(0.0, o), -2.0 * pi, 1e-14);
}

TEST(Manufactured, ClosedFormPorePressureSource)
{
    // s0 dp/dt + alpha div eta_t - kappa lap p with dp/dt = p and lap p = -(5/4) pi^2 p.
    const ManufacturedCase mc;
    const Vec2 x(0.25, -0.5);
    const double t = 0.3;
    const double p = std::exp(t) * std::sin(pi * 0.25) * std::cos(-pi / 4.0);
    const double expected = p - 2.0 * pi * std::cos(pi * t) + 1.25 * pi * pi * p;
    EXPECT_NEAR(mc.f_p(t, x), expected, 1e-12);
}

TEST(Manufactured, InterfaceIdentitiesHoldOnGamma)
{
    const ManufacturedCase mc;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ut(0.0, 2.0), ux(0.0, 1.0);
    const Vec2 n_f(0.0, -1.0), n_p(0.0, 1.0);
    for (int k = 0; k < 100; ++k) {
        const double t = ut(rng);
        const Vec2 x(ux(rng), 0.0);
        EXPECT_NEAR(mc.g1_exact(t, x), -mc.pp(t, x), 1e-12);
        EXPECT_NEAR(mc.g2_exact(t, x), 0.0, 1e-12);
        EXPECT_NEAR(mc.lambda_exact(t, x), 0.0, 1e-12);
        const double mass = mc.u(t, x).dot(n_f) + (mc.eta_t(t, x) - mc.params.kappa * mc.grad_pp(t, x)).dot(n_p);
        EXPECT_NEAR(mass, 0.0, 1e-12);
    }
}

TEST(Manufactured, GradientsMatchFiniteDifferences)
{
    const ManufacturedCase mc;
    const double h = 1e-6;
    const Vec2 x(0.37, 0.61);
    const double t = 0.4;
    for (int d = 0; d < 2; ++d) {
        Vec2 e = Vec2::Zero();
        e[d] = h;
        const Vec2 du = (mc.u(t, x + e) - mc.u(t, x - e)) / (2 * h);
        EXPECT_NEAR((du - mc.grad_u(t, x).col(d)).norm(), 0.0, 1e-7);
        const Vec2 de = (mc.eta(t, x + e) - mc.eta(t, x - e)) / (2 * h);
        EXPECT_NEAR((de - mc.grad_eta(t, x).col(d)).norm(), 0.0, 1e-7);
        EXPECT_NEAR((mc.pp(t, x + e) - mc.pp(t, x - e)) / (2 * h), mc.grad_pp(t, x)[d], 1e-7);
        EXPECT_NEAR((mc.pf(t, x + e) - mc.pf(t, x - e)) / (2 * h), mc.grad_pf(t, x)[d], 1e-7);
    }
    EXPECT_NEAR(((mc.eta(t + h, x) - mc.eta(t - h, x)) / (2 * h) - mc.eta_t(t, x)).norm(), 0.0, 1e-7);
    EXPECT_NEAR(((mc.eta_t(t + h, x) - mc.eta_t(t - h, x)) / (2 * h) - mc.eta_tt(t, x)).norm(), 0.0, 1e-6);
}

TEST(Manufactured, RejectsBadMeshCount)
{
    const ManufacturedCase mc;
    EXPECT_THROW(mc.meshes(0), ConfigError);
}

TEST(Hydro, InflowProfile)
{
    const HydroCase hc = HydroCase::make(1);
    double peak = 0.0;
    for (int i = 0; i <= 100; ++i) {
        const Vec2 v = hc.inflow(Vec2(0.0, i / 100.0));
        EXPECT_GE(v.x(), 0.0);
        EXPECT_EQ(v.y(), 0.0);
        peak = std::max(peak, v.x());
    }
    EXPECT_NEAR(peak, 10.0, 1e-12);
    EXPECT_NEAR(hc.inflow(Vec2(0.0, 0.0)).x(), 0.0, 1e-14);
    EXPECT_NEAR(hc.inflow(Vec2(0.0, 1.0)).x(), 0.0, 1e-14);
}

TEST(Hydro, CaseParameters)
{
    const HydroCase c2 = HydroCase::make(2);
    EXPECT_EQ(c2.params.kappa, 1e-4);
    EXPECT_EQ(c2.params.s0, 1e-4);
    EXPECT_EQ(c2.params.lambda, 1e6);
    EXPECT_EQ(HydroCase::make(1).params.kappa, 1.0);
    EXPECT_THROW(HydroCase::make(3), ConfigError);
}

TEST(Hydro, ZeroInflowStaysZero)
{
    HydroConfig cfg;
    cfg.n = 2;
    cfg.t_final = 5 * cfg.dt;
    cfg.inflow_peak = 0.0;
    const HydroResult r = run_hydro(cfg);
    ASSERT_TRUE(r.completed) << r.error;
    EXPECT_EQ(r.steps.size(), 5u);
    const TimeState& s = r.final_state;
    for (const Vector* v : {&s.u, &s.eta, &s.pp, &s.pf, &s.g1, &s.g2, &s.lambda}) EXPECT_EQ(v->cwiseAbs().maxCoeff(), 0.0);
}

TEST(Hydro, ShortRunIsFiniteAndFlowsDownstream)
{
    for (int which : {1, 2}) {
        HydroConfig cfg;
        cfg.which = which;
        cfg.n = 4;
        cfg.t_final = 5 * cfg.dt;
        const HydroResult r = run_hydro(cfg);
        ASSERT_TRUE(r.completed) << r.error;
        for (const HydroStepDiag& d : r.steps) {
            EXPECT_TRUE(d.converged);
            EXPECT_LT(d.row_residual, 1e-7);
            EXPECT_TRUE(std::isfinite(d.u_max));
        }
        // Dirichlet inflow fixes the velocity maximum at the peak.
        EXPECT_NEAR(r.steps.back().u_max, 10.0, 1e-8);
    }
}

TEST(Hydro, ProbeSamplesVerticalLine)
{
    HydroConfig cfg;
    cfg.n = 4;
    cfg.t_final = 2 * cfg.dt;
    const HydroResult r = run_hydro(cfg);
    ASSERT_TRUE(r.completed) << r.error;
    const auto probe = pore_pressure_probe(*r.disc, r.final_state, 1.0, 11);
    ASSERT_EQ(probe.size(), 11u);
    EXPECT_DOUBLE_EQ(probe.front().first, -1.0);
    EXPECT_DOUBLE_EQ(probe.back().first, 0.0);
    // Pore Dirichlet p = 0 on the bottom edge.
    EXPECT_NEAR(probe.front().second, 0.0, 1e-12);
    EXPECT_THROW(pore_pressure_probe(*r.disc, r.final_state, 5.0, 3), ConfigError);
    EXPECT_THROW(pore_pressure_probe(*r.disc, r.final_state, 1.0, 1), ConfigError);
}

TEST(Studies, ObservedRate)
{
    EXPECT_NEAR(observed_rate(1.0, 0.125, 0.5, 0.25), 3.0, 1e-14);
    EXPECT_TRUE(std::isnan(observed_rate(0.0, 1.0, 0.5, 0.25)));
}

TEST(Studies, ConvergenceCoarseRates)
{
    ConvergenceConfig cfg;
    cfg.meshes = {2, 4, 8};
    const auto rows = run_convergence_space(cfg);
    ASSERT_EQ(rows.size(), 3u);
    for (const ConvergenceRow& r : rows) {
        ASSERT_TRUE(r.ok) << r.error;
        EXPECT_LT(r.max_row_residual, 1e-7);
    }
    EXPECT_TRUE(std::isnan(rows[0].rate_u_l2));
    EXPECT_GT(rows[2].rate_eta_l2, 2.7);
    EXPECT_GT(rows[2].rate_u_h1, 1.7);
}

TEST(Studies, PreconditionerOrdering)
{
    PrecondStudyConfig cfg;
    cfg.meshes = {2};
    const auto rows = run_precond_study(cfg);
    ASSERT_EQ(rows.size(), 1u);
    const PrecondRow& r = rows[0];
    ASSERT_TRUE(r.ok) << r.error;
    EXPECT_GT(r.none.cond, r.pre.cond);
    EXPECT_GT(r.pre.cond, r.pre_lb.cond);
    EXPECT_LT(r.pre_lb.cond, 2.0);
    EXPECT_GE(r.none.avg_iterations, r.pre.avg_iterations);
    ASSERT_FALSE(r.pre_lb.history.empty());
    EXPECT_EQ(r.pre_lb.history.front(), 1.0);
}
