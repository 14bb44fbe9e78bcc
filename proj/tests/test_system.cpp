#include "fpsi/scenarios.hpp"
#include "fpsi/schur.hpp"
#include "fpsi/system.hpp"
#include "fpsi/time_step.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace fpsi;

namespace {

struct Problem {
    ManufacturedCase mc;
    std::shared_ptr<const Discretization> disc;
    SystemBlocks blocks;
};

Problem make_setup(int n, double dt, bool flip = false, const SystemOptions& opts = {})
{
    Problem s;
    auto [mf, mp] = s.mc.meshes(n);
    s.disc = std::make_shared<const Discretization>(build_discretization(std::move(mf), std::move(mp), s.mc.degrees, flip));
    s.blocks = build_system(s.disc, s.mc.params, dt, opts);
    return s;
}

Vector random_vector(int n, unsigned seed)
{
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = u(rng);
    return v;
}

double rel_diff(const Vector& a, const Vector& b)
{
    const double s = std::max(b.cwiseAbs().maxCoeff(), 1e-300);
    return (a - b).cwiseAbs().maxCoeff() / s;
}

double rel_diff(const DenseMatrix& a, const DenseMatrix& b)
{
    return (a - b).cwiseAbs().maxCoeff() / std::max(b.cwiseAbs().maxCoeff(), 1e-300);
}

// Dense elimination of the primal unknowns from the monolithic matrix.
struct DenseElimination {
    DenseMatrix a11, a12, a21, a22;
    int n1 = 0;
};

DenseElimination split_monolithic(const SystemBlocks& b)
{
    const DenseMatrix a = to_dense(monolithic_matrix(b));
    DenseElimination e;
    e.n1 = b.n_u + b.n_eta + b.n_pp;
    const int n2 = b.schur_dim();
    e.a11 = a.topLeftCorner(e.n1, e.n1);
    e.a12 = a.topRightCorner(e.n1, n2);
    e.a21 = a.bottomLeftCorner(n2, e.n1);
    e.a22 = a.bottomRightCorner(n2, n2);
    return e;
}

DenseMatrix primal_solve(const DenseMatrix& a11, const DenseMatrix& rhs)
{
    return a11.fullPivLu().solve(rhs);
}

} // namespace

TEST(SystemBlocks, WfSymmetricPositiveDefinite)
{
    const Problem s = make_setup(2, 1e-5);
    EXPECT_LT(asymmetry(s.blocks.W_f), 1e-13);
    EXPECT_LT(asymmetry(s.blocks.W_eta), 1e-13);
    EXPECT_LT(asymmetry(s.blocks.W_p), 1e-13);
    Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(to_dense(s.blocks.W_f));
    EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
    Eigen::SelfAdjointEigenSolver<DenseMatrix> eig_e(to_dense(s.blocks.W_eta));
    EXPECT_GT(eig_e.eigenvalues().minCoeff(), 0.0);
}

TEST(SystemBlocks, ShapesFollowGroupings)
{
    const Problem s = make_setup(2, 1e-5);
    const SystemBlocks& b = s.blocks;
    EXPECT_EQ(b.G_u.rows(), b.n_gamma());
    EXPECT_EQ(b.G_u.cols(), b.n_u);
    EXPECT_EQ(b.G_eta.cols(), b.n_eta);
    EXPECT_EQ(b.G_lambda.rows(), b.n_gamma());
    EXPECT_EQ(b.G_lambda.cols(), b.n_lambda);
    // Lower N_g2 x N_lambda block of G_lambda is zero.
    const DenseMatrix gl = to_dense(b.G_lambda);
    EXPECT_EQ(gl.bottomRows(b.n_g2).cwiseAbs().maxCoeff(), 0.0);
    const DenseMatrix mg = to_dense(b.M_g);
    EXPECT_EQ(mg.topRows(b.n_g1).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(b.schur_dim(), b.n_pf + b.n_g1 + b.n_g2 + b.n_lambda);
}

TEST(SystemBlocks, ZeroTimeStepLimit)
{
    // W_f = M_f + dt K_f reduces to the mass matrix as dt -> 0.
    const Problem s = make_setup(2, 1e-5);
    const SparseMatrix w0 = s.blocks.M_f + 0.0 * s.blocks.K_f;
    EXPECT_LT(to_dense(SparseMatrix(w0 - s.blocks.M_f)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT(to_dense(SparseMatrix(s.blocks.W_f_raw - s.blocks.M_f)).cwiseAbs().maxCoeff(),
              1e-5 * to_dense(s.blocks.K_f).cwiseAbs().maxCoeff() * (1 + 1e-12));
    EXPECT_THROW(build_system(s.disc, s.mc.params, 0.0), ConfigError);
}

TEST(SystemBlocks, DeterministicAssembly)
{
    const Problem a = make_setup(2, 1e-3);
    const Problem b = make_setup(2, 1e-3);
    EXPECT_EQ(to_dense(a.blocks.W_f), to_dense(b.blocks.W_f));
    EXPECT_EQ(to_dense(a.blocks.G_eta), to_dense(b.blocks.G_eta));
    EXPECT_EQ(a.blocks.T_p.dense_matrix(), b.blocks.T_p.dense_matrix());
}

TEST(SystemBlocks, TpMatchesDenseOracle)
{
    const double dt = 1e-2;
    const Problem s = make_setup(4, dt);
    const SystemBlocks& b = s.blocks;
    const DenseMatrix wi = to_dense(b.W_eta).inverse();
    const DenseMatrix pp = to_dense(b.P_p);
    const DenseMatrix oracle = to_dense(b.W_p) + dt * dt * pp.transpose() * wi * pp;
    EXPECT_LT((b.T_p.dense_matrix() - oracle).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((b.T_p.dense_matrix() - b.T_p.dense_matrix().transpose()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SystemBlocks, TpBlockRouteMatchesDense)
{
    const double dt = 1e-2;
    const Problem dense = make_setup(4, dt);
    SystemOptions opts;
    opts.dense_tp_cap = 0;
    const Problem block = make_setup(4, dt, false, opts);
    EXPECT_FALSE(block.blocks.T_p.is_dense());
    const Vector r = random_vector(dense.blocks.n_pp, 3);
    EXPECT_LT(rel_diff(block.blocks.T_p.solve(r), dense.blocks.T_p.solve(r)), 1e-10);
}

TEST(SystemBlocks, RejectsNonzeroStabilization)
{
    Problem s = make_setup(1, 1e-3);
    PhysicalParams p;
    p.eps_bar = 0.1;
    EXPECT_THROW(build_system(s.disc, p, 1e-3), ConfigError);
    p.eps_bar = 0.0;
    p.alpha = 1.5;
    EXPECT_THROW(build_system(s.disc, p, 1e-3), ConfigError);
}

TEST(TimeConfigTest, RequiresIntegerStepCount)
{
    EXPECT_EQ(TimeConfig::from(1e-5, 1e-4).n_steps, 10);
    EXPECT_EQ(TimeConfig::from(0.06, 3.0).n_steps, 50);
    EXPECT_THROW(TimeConfig::from(0.3, 1.0), ConfigError);
    EXPECT_THROW(TimeConfig::from(0.0, 1.0), ConfigError);
}

TEST(Rhs, ZeroDataGivesZeroVectors)
{
    const Problem s = make_setup(2, 1e-3);
    const RhsVectors r = build_rhs(s.blocks, zero_state(s.blocks), ProblemData{});
    EXPECT_EQ(r.w1.norm(), 0.0);
    EXPECT_EQ(r.w2.norm(), 0.0);
    EXPECT_EQ(r.w3.norm(), 0.0);
    EXPECT_EQ(r.w4.norm(), 0.0);
    EXPECT_EQ(r.a.norm(), 0.0);
    EXPECT_EQ(schur_rhs(s.blocks, r).norm(), 0.0);
    EXPECT_EQ(schur_rhs(s.blocks, r).size(), s.blocks.schur_dim());
}

TEST(Rhs, W2IsTheSecondDifferenceHistory)
{
    const Problem s = make_setup(2, 1e-3);
    TimeState st = zero_state(s.blocks);
    st.eta = random_vector(s.blocks.n_eta, 1);
    st.eta_prev = random_vector(s.blocks.n_eta, 2);
    const RhsVectors r = build_rhs(s.blocks, st, ProblemData{});
    const Vector expect = 2.0 * (s.blocks.M_eta * st.eta) - s.blocks.M_eta * st.eta_prev;
    for (int i = 0; i < s.blocks.n_eta; ++i) {
        if (s.disc->eta.is_constrained[i]) continue;
        EXPECT_EQ(r.w2[i], expect[i]);
    }
}

TEST(Rhs, LinearInTimeDisplacementIsReproduced)
{
    // With eta^k = t_k v the history term equals M_eta eta^{n+1} exactly.
    const double dt = 1e-3;
    const Problem s = make_setup(2, dt);
    const Vector v = random_vector(s.blocks.n_eta, 7);
    TimeState st = zero_state(s.blocks, 0.5);
    st.eta = 0.5 * v;
    st.eta_prev = (0.5 - dt) * v;
    const RhsVectors r = build_rhs(s.blocks, st, ProblemData{});
    const Vector exact = s.blocks.M_eta * ((0.5 + dt) * v);
    double worst = 0.0;
    for (int i = 0; i < s.blocks.n_eta; ++i)
        if (!s.disc->eta.is_constrained[i]) worst = std::max(worst, std::abs(r.w2[i] - exact[i]));
    EXPECT_LT(worst, 1e-10 * exact.cwiseAbs().maxCoeff());
}

TEST(Rhs, W4SignBookkeeping)
{
    const double dt = 1e-5;
    const Problem s = make_setup(4, dt);
    const TimeState st = s.mc.initial_state(s.blocks, dt);
    const RhsVectors r = build_rhs(s.blocks, st, s.mc.data());
    const InterfaceMatrices& im = s.blocks.interface;
    Vector expect(s.blocks.n_gamma());
    expect << im.G_etaN * st.eta, -(im.G_etatau * st.eta);
    EXPECT_LT((r.w4 - expect).cwiseAbs().maxCoeff(), 1e-14 * std::max(1.0, expect.cwiseAbs().maxCoeff()));
    EXPECT_GT(expect.norm(), 0.0);
}

TEST(Schur, RhsMatchesDenseOracle)
{
    const double dt = 1e-3;
    const Problem s = make_setup(2, dt);
    const TimeState st = s.mc.initial_state(s.blocks);
    const RhsVectors r = build_rhs(s.blocks, st, s.mc.data());
    const DenseElimination e = split_monolithic(s.blocks);
    Vector w(e.n1);
    w << r.w1, r.w2, r.w3;
    const Vector oracle = r.a - e.a21 * primal_solve(e.a11, w);
    EXPECT_LT(rel_diff(schur_rhs(s.blocks, r), oracle), 1e-10);
}

TEST(Schur, OperatorMatchesDenseElimination)
{
    const double dt = 1e-5;
    const Problem s = make_setup(2, dt);
    const DenseElimination e = split_monolithic(s.blocks);
    const DenseMatrix sd = e.a22 - e.a21 * primal_solve(e.a11, e.a12);
    const SchurOperator op(s.blocks);
    const Vector y = random_vector(op.size(), 11);
    EXPECT_LT(rel_diff(op.apply(y), Vector(sd * y)), 1e-9);
    const DenseMatrix probed = probe_dense([&](const Vector& v) { return op.apply(v); }, op.size());
    EXPECT_LT(rel_diff(probed, sd), 1e-9);
    EXPECT_EQ(op.apply(Vector::Zero(op.size())).norm(), 0.0);
}

TEST(Schur, OperatorIsLinear)
{
    const Problem s = make_setup(4, 1e-5);
    const SchurOperator op(s.blocks);
    const Vector x = random_vector(op.size(), 1), y = random_vector(op.size(), 2);
    const double a = 0.7, c = -1.3;
    const Vector lhs = op.apply(a * x + c * y);
    const Vector rhs = a * op.apply(x) + c * op.apply(y);
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-10 * std::max(1.0, rhs.cwiseAbs().maxCoeff()));
}

TEST(Schur, ConditionNumberAtCoarsestMesh)
{
    const Problem s = make_setup(2, 1e-5);
    const SchurOperator op(s.blocks);
    const double k = cond2(probe_dense([&](const Vector& v) { return op.apply(v); }, op.size()));
    EXPECT_GT(k, 5.9e5 / 5.0);
    EXPECT_LT(k, 5.9e5 * 5.0);
}

TEST(Preconditioner, DenseRoundtrip)
{
    const Problem s = make_setup(2, 1e-5);
    for (bool lb : {false, true}) {
        const Preconditioner m(s.blocks, {lb, true});
        const DenseMatrix md = m.dense();
        const Vector x = random_vector(s.blocks.schur_dim(), 5);
        const Vector a = m.apply_inverse(x);
        EXPECT_LT((md * a - x).cwiseAbs().maxCoeff() / x.cwiseAbs().maxCoeff(), 1e-9) << "lower block " << lb;
        EXPECT_EQ(m.apply_inverse(Vector::Zero(x.size())).norm(), 0.0);
    }
}

TEST(Preconditioner, LowerBlockOnlyChangesA21)
{
    const Problem s = make_setup(2, 1e-5);
    const SystemBlocks& b = s.blocks;
    const Preconditioner m0(b, {false, true}), m1(b, {true, true});
    const Vector x = random_vector(b.schur_dim(), 9);
    const Vector a0 = m0.apply_inverse(x), a1 = m1.apply_inverse(x);
    EXPECT_EQ(a0.segment(b.n_pf + b.n_g1, b.n_g2), a1.segment(b.n_pf + b.n_g1, b.n_g2));
    EXPECT_EQ(a0.tail(b.n_lambda), a1.tail(b.n_lambda));
    EXPECT_GT((a0.segment(b.n_pf, b.n_g1) - a1.segment(b.n_pf, b.n_g1)).norm(), 0.0);
}

TEST(Preconditioner, IsLinear)
{
    const Problem s = make_setup(4, 1e-5);
    const Preconditioner m(s.blocks, {true, true});
    const Vector x = random_vector(s.blocks.schur_dim(), 1), y = random_vector(s.blocks.schur_dim(), 2);
    const Vector lhs = m.apply_inverse(2.0 * x - y);
    const Vector rhs = 2.0 * m.apply_inverse(x) - m.apply_inverse(y);
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-10 * rhs.cwiseAbs().maxCoeff());
}

TEST(Preconditioner, VariantNames)
{
    EXPECT_EQ(parse_precond_variant("none"), PrecondVariant::None);
    EXPECT_EQ(parse_precond_variant("pre"), PrecondVariant::Pre);
    EXPECT_EQ(parse_precond_variant("pre-lb"), PrecondVariant::PreLowerBlock);
    EXPECT_EQ(parse_precond_variant("pre+lb"), PrecondVariant::PreLowerBlock);
    EXPECT_THROW(parse_precond_variant("ilu"), ConfigError);
    EXPECT_STREQ(to_string(PrecondVariant::PreLowerBlock), "pre-lb");
}

TEST(BiCGStab, ZeroRightHandSide)
{
    KrylovReport rep;
    const Vector y = bicgstab_l([](const Vector& v) { return v; }, {}, Vector::Zero(5), {}, rep);
    EXPECT_EQ(y.norm(), 0.0);
    EXPECT_EQ(rep.iterations, 0.0);
    EXPECT_TRUE(rep.converged);
    EXPECT_FALSE(rep.residual_history.empty());
}

TEST(BiCGStab, IdentityConvergesInOneInnerStep)
{
    KrylovReport rep;
    const Vector b = random_vector(7, 3);
    const Vector y = bicgstab_l([](const Vector& v) { return v; }, {}, b, {}, rep);
    EXPECT_TRUE(rep.converged);
    EXPECT_DOUBLE_EQ(rep.iterations, 0.5);
    EXPECT_LT((y - b).norm(), 1e-14);
    EXPECT_EQ(rep.residual_history.front(), 1.0);
    EXPECT_LE(rep.residual_history.back(), 1e-14);
}

TEST(BiCGStab, NonsymmetricSystemWithPreconditioner)
{
    const int n = 60;
    DenseMatrix a = DenseMatrix::Identity(n, n) * 4.0;
    for (int i = 0; i + 1 < n; ++i) {
        a(i, i + 1) = -1.5;
        a(i + 1, i) = -0.5;
    }
    a(0, n - 1) = 0.3;
    const Vector b = random_vector(n, 4);
    const Vector d = a.diagonal();
    for (int l : {1, 2, 4}) {
        KrylovConfig cfg;
        cfg.l = l;
        KrylovReport rep;
        const Vector y = bicgstab_l([&](const Vector& v) { return Vector(a * v); },
                                    [&](const Vector& v) { return Vector(v.cwiseQuotient(d)); }, b, cfg, rep);
        EXPECT_TRUE(rep.converged) << "l = " << l;
        EXPECT_LE((a * y - b).norm() / b.norm(), 10 * cfg.tol);
        EXPECT_LE(rep.final_residual, 10 * cfg.tol);
        EXPECT_LE(rep.residual_history.back(), cfg.tol);
    }
}

TEST(BiCGStab, ReportsNonConvergence)
{
    const int n = 40;
    DenseMatrix a = DenseMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i) a(i, i) = std::pow(10.0, -8.0 + 16.0 * i / (n - 1));
    for (int i = 0; i + 1 < n; ++i) a(i, i + 1) = 1.0;
    KrylovConfig cfg;
    cfg.max_iter = 3;
    KrylovReport rep;
    bicgstab_l([&](const Vector& v) { return Vector(a * v); }, {}, random_vector(n, 1), cfg, rep);
    EXPECT_FALSE(rep.converged);
    EXPECT_GT(rep.residual_history.back(), cfg.tol);
    EXPECT_FALSE(rep.message.empty());
}

TEST(BiCGStab, RejectsBadConfig)
{
    KrylovReport rep;
    KrylovConfig cfg;
    cfg.l = 0;
    EXPECT_THROW(bicgstab_l([](const Vector& v) { return v; }, {}, Vector::Ones(2), cfg, rep), ConfigError);
    cfg.l = 2;
    cfg.tol = 0.0;
    EXPECT_THROW(bicgstab_l([](const Vector& v) { return v; }, {}, Vector::Ones(2), cfg, rep), ConfigError);
}

namespace {

struct RunResult {
    std::vector<TimeState> states;
    std::vector<StepReport> reports;
};

RunResult run_partitioned(const Problem& s, int steps, StepOptions opts)
{
    const PartitionedSolver solver(s.blocks, opts);
    RunResult out;
    TimeState st = s.mc.initial_state(s.blocks);
    const ProblemData data = s.mc.data();
    for (int k = 0; k < steps; ++k) {
        StepReport rep;
        st = solver.step(st, data, &rep);
        out.states.push_back(st);
        out.reports.push_back(rep);
    }
    return out;
}

std::vector<TimeState> run_monolithic(const Problem& s, int steps)
{
    std::vector<TimeState> out;
    TimeState st = s.mc.initial_state(s.blocks);
    const ProblemData data = s.mc.data();
    for (int k = 0; k < steps; ++k) {
        st = monolithic_step(s.blocks, st, data);
        out.push_back(st);
    }
    return out;
}

double max_state_diff(const TimeState& a, const TimeState& b)
{
    return std::max({rel_diff(a.u, b.u), rel_diff(a.pf, b.pf), rel_diff(a.eta, b.eta), rel_diff(a.pp, b.pp),
                     rel_diff(a.g1, b.g1), rel_diff(a.g2, b.g2), rel_diff(a.lambda, b.lambda)});
}

} // namespace

TEST(Step, MatchesMonolithicOracle)
{
    const Problem s = make_setup(4, 1e-5);
    const RunResult part = run_partitioned(s, 5, {});
    const std::vector<TimeState> mono = run_monolithic(s, 5);
    for (int k = 0; k < 5; ++k) {
        const double d = max_state_diff(part.states[k], mono[k]);
        EXPECT_LT(d, 1e-6) << "step " << k + 1;
        EXPECT_TRUE(part.reports[k].krylov.converged);
        EXPECT_LT(part.reports[k].residuals.relative, 10 * 1e-8);
    }
}

TEST(Step, RowResidualsBelowTenTimesTolerance)
{
    for (int n : {2, 4, 8}) {
        const Problem s = make_setup(n, 1e-5);
        for (PrecondVariant v : {PrecondVariant::None, PrecondVariant::Pre, PrecondVariant::PreLowerBlock}) {
            StepOptions opts;
            opts.precond = v;
            const RunResult part = run_partitioned(s, 4, opts);
            for (const StepReport& r : part.reports) {
                EXPECT_TRUE(r.krylov.converged);
                EXPECT_LT(r.residuals.relative, 10 * opts.krylov.tol) << "n " << n << " " << to_string(v);
            }
        }
    }
}

TEST(Step, MonolithicSolutionSatisfiesSystem)
{
    const Problem s = make_setup(2, 1e-3);
    const TimeState st = s.mc.initial_state(s.blocks);
    const ProblemData data = s.mc.data();
    const TimeState next = monolithic_step(s.blocks, st, data);
    const RhsVectors r = build_rhs(s.blocks, st, data);
    EXPECT_LT(full_residual(s.blocks, r, next), 1e-9);
    const Vector row = s.blocks.G_p * next.pp + s.blocks.G_lambda.transpose() * next.g() - r.a.tail(s.blocks.n_lambda);
    EXPECT_LT(row.cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Step, BlockVariantAgreesWithSequential)
{
    const Problem s = make_setup(2, 1e-4);
    StepOptions seq, blk;
    blk.block_variant = true;
    const RunResult a = run_partitioned(s, 3, seq);
    const RunResult b = run_partitioned(s, 3, blk);
    EXPECT_LT(max_state_diff(b.states.back(), a.states.back()), 1e-8);
}

TEST(Step, IncompressibilityWithSource)
{
    const Problem s = make_setup(4, 1e-5);
    const PartitionedSolver solver(s.blocks, {});
    TimeState st = s.mc.initial_state(s.blocks);
    const ProblemData data = s.mc.data();
    for (int k = 0; k < 3; ++k) {
        const RhsVectors r = build_rhs(s.blocks, st, data);
        st = solver.step(st, data);
        const Vector res = s.blocks.P_f.transpose() * st.u - r.a.head(s.blocks.n_pf);
        EXPECT_LT(res.cwiseAbs().maxCoeff(), 1e-8);
    }
}

TEST(Step, ZeroDataStaysZero)
{
    const Problem s = make_setup(2, 1e-3);
    const PartitionedSolver solver(s.blocks, {});
    TimeState st = zero_state(s.blocks);
    for (int k = 0; k < 10; ++k) st = solver.step(st, ProblemData{});
    EXPECT_EQ(st.u.norm() + st.pf.norm() + st.eta.norm() + st.pp.norm() + st.g().norm() + st.lambda.norm(), 0.0);
    EXPECT_EQ(st.step, 10);
}

TEST(Step, TangentFlipInvariance)
{
    const Problem a = make_setup(4, 1e-5, false);
    const Problem b = make_setup(4, 1e-5, true);
    StepOptions opts;
    opts.krylov.tol = 1e-12;
    const RunResult ra = run_partitioned(a, 3, opts);
    const RunResult rb = run_partitioned(b, 3, opts);
    const TimeState& x = ra.states.back();
    TimeState y = rb.states.back();
    // Trace nodes are numbered along tau, so flipping reverses their order.
    const TraceSpace& ta = a.disc->g1;
    const TraceSpace& tb = b.disc->g1;
    std::vector<int> perm(ta.n_dofs(), -1);
    for (int i = 0; i < ta.n_dofs(); ++i)
        for (int j = 0; j < tb.n_dofs(); ++j)
            if ((ta.node_coords[i] - tb.node_coords[j]).norm() < 1e-12) perm[i] = j;
    auto reorder = [&](const Vector& v) {
        Vector out(v.size());
        for (int i = 0; i < v.size(); ++i) out[i] = v[perm[i]];
        return out;
    };
    y.g1 = reorder(y.g1);
    y.g2 = reorder(y.g2);
    y.lambda = reorder(y.lambda);
    EXPECT_LT(rel_diff(y.lambda, x.lambda), 1e-6);
    EXPECT_LT(rel_diff(y.u, x.u), 1e-8);
    EXPECT_LT(rel_diff(y.pf, x.pf), 1e-8);
    EXPECT_LT(rel_diff(y.eta, x.eta), 1e-8);
    EXPECT_LT(rel_diff(y.pp, x.pp), 1e-8);
    EXPECT_LT(rel_diff(y.g1, x.g1), 1e-8);
    EXPECT_LT((y.g2 + x.g2).cwiseAbs().maxCoeff(), 1e-8 * std::max(1.0, x.g2.cwiseAbs().maxCoeff()));
}

TEST(Step, DeterministicHistories)
{
    const Problem s = make_setup(4, 1e-5);
    StepOptions opts;
    opts.precond = PrecondVariant::Pre;
    const RunResult a = run_partitioned(s, 2, opts);
    const RunResult b = run_partitioned(s, 2, opts);
    for (int k = 0; k < 2; ++k) EXPECT_EQ(a.reports[k].krylov.residual_history, b.reports[k].krylov.residual_history);
}

TEST(Step, CorruptedW4IsDetectedByOracle)
{
    const Problem s = make_setup(4, 1e-5);
    StepOptions bad;
    bad.corrupt_w4_sign = true;
    const RunResult part = run_partitioned(s, 2, bad);
    const std::vector<TimeState> mono = run_monolithic(s, 2);
    EXPECT_GT(max_state_diff(part.states.back(), mono.back()), 1e-6);
    EXPECT_GT(part.reports.back().residuals.relative, 10 * 1e-8);
}

TEST(Step, NonConvergenceCarriesHistory)
{
    const Problem s = make_setup(4, 1e-5);
    StepOptions opts;
    opts.precond = PrecondVariant::None;
    opts.krylov.max_iter = 2;
    const PartitionedSolver solver(s.blocks, opts);
    const TimeState st = s.mc.initial_state(s.blocks);
    try {
        solver.step(st, s.mc.data());
        FAIL() << "expected KrylovError";
    } catch (const KrylovError& e) {
        EXPECT_FALSE(e.report().converged);
        EXPECT_GE(e.report().residual_history.size(), 2u);
    }
}
