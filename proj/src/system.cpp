#include "fpsi/system.hpp"

#include <cmath>
#include <sstream>

namespace fpsi {

void PhysicalParams::validate() const
{
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string("parameter ") + name + " must be positive");
    };
    positive(rho_f, "rho_f");
    positive(nu_f, "nu_f");
    positive(rho_p, "rho_p");
    positive(nu_p, "nu_p");
    positive(lambda, "lambda");
    positive(s0, "s0");
    positive(kappa, "kappa");
    positive(beta, "beta");
    if (!(alpha > 0.0) || alpha > 1.0) throw ConfigError("parameter alpha must lie in (0, 1]");
    if (eps_bar < 0.0) throw ConfigError("parameter eps_bar must be non-negative");
    if (eps_bar != 0.0) {
        throw ConfigError("eps_bar > 0 is not supported: the interface stabilization inner product has no "
                          "computational definition here; use eps_bar = 0");
    }
}

TimeConfig TimeConfig::from(double dt, double t_final)
{
    if (!(dt > 0.0)) throw ConfigError("time step dt must be positive");
    if (!(t_final > 0.0)) throw ConfigError("final time must be positive");
    const double ratio = t_final / dt;
    const double n = std::round(ratio);
    if (n < 1.0 || std::abs(ratio - n) > 1e-9 * std::max(1.0, ratio)) {
        std::ostringstream os;
        os << "final time " << t_final << " is not an integer multiple of dt " << dt;
        throw ConfigError(os.str());
    }
    return {dt, t_final, static_cast<int>(n)};
}

Discretization build_discretization(SubdomainMesh mesh_f, SubdomainMesh mesh_p, const Degrees& deg, bool flip_tangent)
{
    Discretization d;
    d.mesh_f = std::make_shared<const SubdomainMesh>(std::move(mesh_f));
    d.mesh_p = std::make_shared<const SubdomainMesh>(std::move(mesh_p));
    d.trace = std::make_shared<const InterfaceTrace>(extract_interface_trace(*d.mesh_f, *d.mesh_p, flip_tangent));
    d.u = build_dof_map(d.mesh_f, deg.u, 2, BoundaryTag::FluidDirichlet);
    d.pf = build_dof_map(d.mesh_f, deg.pf, 1, BoundaryTag::None);
    d.eta = build_dof_map(d.mesh_p, deg.eta, 2, BoundaryTag::StructDirichlet);
    d.pp = build_dof_map(d.mesh_p, deg.pp, 1, BoundaryTag::PoreDirichlet);
    d.g1 = build_trace_space(d.trace, deg.lm);
    d.g2 = build_trace_space(d.trace, deg.lm);
    d.lambda = d.g1;
    return d;
}

TpSolver::TpSolver(const SparseMatrix& w_p, const SparseMatrix& p_p, const SparseMatrix& w_eta,
                   const SparseCholesky& w_eta_factor, double dt, int dense_cap)
    : n_eta_(static_cast<int>(w_eta.rows())), n_pp_(static_cast<int>(w_p.rows()))
{
    if (n_pp_ <= dense_cap) {
        dense_ = normal_product(w_p, p_p, w_eta_factor, dt * dt);
        dense_factor_.emplace(*dense_, "T_p");
        return;
    }
    const SparseMatrix neg_wp = -w_p;
    const SparseMatrix k = block_matrix(n_eta_ + n_pp_, n_eta_ + n_pp_,
                                        {{0, 0, &w_eta, 1.0, false},
                                         {0, n_eta_, &p_p, -dt, false},
                                         {n_eta_, 0, &p_p, -dt, true},
                                         {n_eta_, n_eta_, &neg_wp, 1.0, false}});
    block_.emplace(k, "T_p (quasi-definite block form)");
}

Vector TpSolver::solve(const Vector& r) const
{
    if (dense_factor_) return dense_factor_->solve(r);
    if (!block_) throw ConfigError("TpSolver: not initialised");
    Vector rhs = Vector::Zero(n_eta_ + n_pp_);
    rhs.tail(n_pp_) = -r;
    return block_->solve(rhs).tail(n_pp_);
}

const DenseMatrix& TpSolver::dense_matrix() const
{
    if (!dense_) throw ConfigError("TpSolver: dense T_p is not stored for this problem size");
    return *dense_;
}

namespace {

SparseMatrix vstack(const SparseMatrix& a, const SparseMatrix& b, double sa = 1.0, double sb = 1.0)
{
    if (a.cols() != b.cols()) throw ConfigError("vstack: column mismatch");
    return block_matrix(static_cast<int>(a.rows() + b.rows()), static_cast<int>(a.cols()),
                        {{0, 0, &a, sa, false}, {static_cast<int>(a.rows()), 0, &b, sb, false}});
}

} // namespace

SystemBlocks build_system(std::shared_ptr<const Discretization> disc, const PhysicalParams& params, double dt,
                          const SystemOptions& opts)
{
    if (!disc) throw ConfigError("build_system: null discretization");
    params.validate();
    if (!(dt > 0.0)) throw ConfigError("build_system: dt must be positive");
    const Discretization& d = *disc;
    SystemBlocks b;
    b.disc = disc;
    b.params = params;
    b.dt = dt;
    b.n_u = d.u.n_dofs();
    b.n_pf = d.pf.n_dofs();
    b.n_eta = d.eta.n_dofs();
    b.n_pp = d.pp.n_dofs();
    b.n_g1 = d.g1.n_dofs();
    b.n_g2 = d.g2.n_dofs();
    b.n_lambda = d.lambda.n_dofs();

    b.M_f = assemble_mass(d.u, params.rho_f);
    b.K_f = assemble_stokes_stiffness(d.u, params.nu_f);
    b.P_f_raw = assemble_div_coupling(d.u, d.pf, 1.0);
    b.M_eta = assemble_mass(d.eta, params.rho_p);
    b.KL_eta = assemble_elasticity(d.eta, params.nu_p, params.lambda);
    b.P_p_raw = assemble_div_coupling(d.eta, d.pp, params.alpha);
    b.M_p = assemble_mass(d.pp, params.s0);
    b.K_p = assemble_scalar_stiffness(d.pp, params.kappa);
    b.interface = assemble_interface_matrices(d.u, d.eta, d.pp, d.g1, d.g2, d.lambda, params.beta);

    b.W_f_raw = b.M_f + dt * b.K_f;
    b.W_eta_raw = b.M_eta + (dt * dt) * b.KL_eta;
    b.W_p_raw = b.M_p + dt * b.K_p;
    b.G_u_raw = vstack(b.interface.G_uN, b.interface.G_utau);
    b.G_eta_raw = vstack(b.interface.G_etaN, b.interface.G_etatau, -1.0, 1.0);
    b.G_p_raw = b.interface.G_p;

    const auto& cu = d.u.is_constrained;
    const auto& ce = d.eta.is_constrained;
    const auto& cp = d.pp.is_constrained;
    const std::vector<char> none;
    b.W_f = eliminate_constrained(b.W_f_raw, cu, cu, true);
    b.W_eta = eliminate_constrained(b.W_eta_raw, ce, ce, true);
    b.W_p = eliminate_constrained(b.W_p_raw, cp, cp, true);
    b.P_f = eliminate_constrained(b.P_f_raw, cu, none, false);
    b.P_p = eliminate_constrained(b.P_p_raw, ce, cp, false);
    b.G_u = eliminate_constrained(b.G_u_raw, none, cu, false);
    b.G_eta = eliminate_constrained(b.G_eta_raw, none, ce, false);
    b.G_p = eliminate_constrained(b.G_p_raw, none, cp, false);

    b.G_lambda = block_matrix(b.n_gamma(), b.n_lambda, {{0, 0, &b.interface.G_1lambda, 1.0, true}});
    b.M_g = block_matrix(b.n_gamma(), b.n_gamma(), {{b.n_g1, b.n_g1, &b.interface.M_g2, 1.0, false}});

    b.W_f_factor = SparseCholesky(b.W_f, "W_f");
    b.W_eta_factor = SparseCholesky(b.W_eta, "W_eta");
    b.G_1lambda_factor = SparseCholesky(b.interface.G_1lambda, "G_1lambda");
    b.M_g2_factor = SparseCholesky(b.interface.M_g2, "M_g2");
    b.T_p = TpSolver(b.W_p, b.P_p, b.W_eta, b.W_eta_factor, dt, opts.dense_tp_cap);

    if (opts.factor_preconditioner) {
        const DenseMatrix pwp = normal_product(SparseMatrix(), b.P_f, b.W_f_factor, 1.0);
        try {
            b.PWP_factor.emplace(pwp, "P_f^T W_f^{-1} P_f");
        } catch (const NumericalError& e) {
            throw NumericalError(std::string(e.what()) +
                                 "; the fluid pressure is not determined: a Neumann fluid boundary of positive "
                                 "measure or unconstrained interface velocities are required so that P_f has "
                                 "full column rank");
        }
    }
    return b;
}

Vector TimeState::g() const
{
    Vector out(g1.size() + g2.size());
    out << g1, g2;
    return out;
}

TimeState zero_state(const SystemBlocks& b, double t)
{
    TimeState s;
    s.u = Vector::Zero(b.n_u);
    s.pf = Vector::Zero(b.n_pf);
    s.eta = Vector::Zero(b.n_eta);
    s.eta_prev = Vector::Zero(b.n_eta);
    s.pp = Vector::Zero(b.n_pp);
    s.g1 = Vector::Zero(b.n_g1);
    s.g2 = Vector::Zero(b.n_g2);
    s.lambda = Vector::Zero(b.n_lambda);
    s.t = t;
    return s;
}

namespace {

Vector body_vector(const FeSpace& s, const TimeVectorField& f, double t)
{
    if (!f) return Vector::Zero(s.n_dofs());
    return assemble_load(s, VectorField([&](const Vec2& x) { return f(t, x); }));
}

Vector body_scalar(const FeSpace& s, const TimeScalarField& f, double t)
{
    if (!f) return Vector::Zero(s.n_dofs());
    return assemble_load(s, ScalarField([&](const Vec2& x) { return f(t, x); }));
}

Vector flux_vector(const FeSpace& s, BoundaryTag tag, const TimeVectorFlux& g, double t)
{
    if (!g) return Vector::Zero(s.n_dofs());
    return assemble_boundary_load(s, tag, VectorFlux([&](const Vec2& x, const Vec2& n) { return g(t, x, n); }));
}

Vector flux_scalar(const FeSpace& s, BoundaryTag tag, const TimeScalarFlux& g, double t)
{
    if (!g) return Vector::Zero(s.n_dofs());
    return assemble_boundary_load(s, tag, ScalarFlux([&](const Vec2& x, const Vec2& n) { return g(t, x, n); }));
}

Vector boundary_vector(const FeSpace& s, const TimeVectorField& f, double t)
{
    if (!f) return Vector::Zero(s.n_dofs());
    return dirichlet_values(s, VectorField([&](const Vec2& x) { return f(t, x); }));
}

Vector boundary_scalar(const FeSpace& s, const TimeScalarField& f, double t)
{
    if (!f) return Vector::Zero(s.n_dofs());
    return dirichlet_values(s, ScalarField([&](const Vec2& x) { return f(t, x); }));
}

void overwrite_constrained(Vector& v, const FeSpace& s, const Vector& values)
{
    for (int i : s.constrained) v[i] = values[i];
}

} // namespace

RhsVectors build_rhs(const SystemBlocks& b, const TimeState& state, const ProblemData& data)
{
    const Discretization& d = *b.disc;
    const double dt = b.dt;
    const double t = state.t + dt;
    RhsVectors r;
    r.u_D = boundary_vector(d.u, data.u_dirichlet, t);
    r.eta_D = boundary_vector(d.eta, data.eta_dirichlet, t);
    r.pp_D = boundary_scalar(d.pp, data.pp_dirichlet, t);

    const Vector fbar_f = body_vector(d.u, data.f_f, t) + flux_vector(d.u, BoundaryTag::FluidNeumann, data.u_neumann, t);
    const Vector fbar_eta =
        body_vector(d.eta, data.f_eta, t) + flux_vector(d.eta, BoundaryTag::StructNeumann, data.eta_neumann, t);
    const Vector fbar_p = body_scalar(d.pp, data.f_p, t) + flux_scalar(d.pp, BoundaryTag::PoreNeumann, data.pp_neumann, t);
    const Vector g_mass = body_scalar(d.pf, data.g_f, t);

    r.w1 = dt * fbar_f + b.M_f * state.u;
    r.w2 = (dt * dt) * fbar_eta + 2.0 * (b.M_eta * state.eta) - b.M_eta * state.eta_prev;
    r.w3 = dt * fbar_p + b.M_p * state.pp + b.P_p_raw.transpose() * state.eta;
    r.w4 = -(b.G_eta_raw * state.eta);

    // Dirichlet liftings.
    r.w1 -= b.W_f_raw * r.u_D;
    r.w2 -= b.W_eta_raw * r.eta_D;
    r.w2 += (dt * dt) * (b.P_p_raw * r.pp_D);
    r.w3 -= b.W_p_raw * r.pp_D;
    r.w3 -= b.P_p_raw.transpose() * r.eta_D;
    overwrite_constrained(r.w1, d.u, r.u_D);
    overwrite_constrained(r.w2, d.eta, r.eta_D);
    overwrite_constrained(r.w3, d.pp, r.pp_D);

    r.a = Vector::Zero(b.schur_dim());
    r.a.head(b.n_pf) = g_mass - b.P_f_raw.transpose() * r.u_D;
    r.a.segment(b.n_pf, b.n_gamma()) = r.w4 - dt * (b.G_u_raw * r.u_D) + b.G_eta_raw * r.eta_D;
    r.a.tail(b.n_lambda) = -(b.G_p_raw * r.pp_D);
    return r;
}

Vector schur_rhs(const SystemBlocks& b, const RhsVectors& rhs)
{
    const double dt = b.dt;
    Vector out = rhs.a;
    const Vector x1 = b.W_f_factor.solve(rhs.w1);
    const Vector x2 = b.W_eta_factor.solve(rhs.w2);
    const Vector r3 = rhs.w3 - b.P_p.transpose() * x2;
    const Vector x3 = b.T_p.solve(r3);
    const Vector x4 = b.W_eta_factor.solve(b.P_p * x3);
    // A1 W_f^{-1} w1
    out.head(b.n_pf) -= b.P_f.transpose() * x1;
    out.segment(b.n_pf, b.n_gamma()) -= dt * (b.G_u * x1);
    // A2 W_eta^{-1} w2 and dt^2 A2 W_eta^{-1} P_p T_p^{-1} r3
    out.segment(b.n_pf, b.n_gamma()) += b.G_eta * x2;
    out.segment(b.n_pf, b.n_gamma()) += (dt * dt) * (b.G_eta * x4);
    // A3 T_p^{-1} r3
    out.tail(b.n_lambda) -= b.G_p * x3;
    return out;
}

SchurSplit split_schur(const SystemBlocks& b, const Vector& y)
{
    if (y.size() != b.schur_dim()) throw ConfigError("split_schur: dimension mismatch");
    SchurSplit s;
    s.pf = y.head(b.n_pf);
    s.g1 = y.segment(b.n_pf, b.n_g1);
    s.g2 = y.segment(b.n_pf + b.n_g1, b.n_g2);
    s.lambda = y.tail(b.n_lambda);
    return s;
}

Vector join_schur(const SystemBlocks& b, const Vector& pf, const Vector& g, const Vector& lambda)
{
    Vector y(b.schur_dim());
    y << pf, g, lambda;
    return y;
}

TimeState recover_primal(const SystemBlocks& b, const TimeState& state, const RhsVectors& rhs, const Vector& y,
                         bool block_variant)
{
    const double dt = b.dt;
    const SchurSplit s = split_schur(b, y);
    Vector g(b.n_gamma());
    g << s.g1, s.g2;

    TimeState next;
    next.pf = s.pf;
    next.g1 = s.g1;
    next.g2 = s.g2;
    next.lambda = s.lambda;
    next.step = state.step + 1;
    next.t = state.t + dt;
    next.eta_prev = state.eta;

    const Vector gu = b.G_u.transpose() * g;
    next.u = b.W_f_factor.solve(rhs.w1 + dt * (b.P_f * s.pf) + dt * gu);

    const Vector geta = b.G_eta.transpose() * g;
    if (!block_variant) {
        const Vector x2 = b.W_eta_factor.solve(rhs.w2);
        const Vector z2 = b.W_eta_factor.solve(geta);
        const Vector rp = rhs.w3 - b.P_p.transpose() * x2 + (dt * dt) * (b.P_p.transpose() * z2) +
                          dt * (b.G_p.transpose() * s.lambda);
        next.pp = b.T_p.solve(rp);
        next.eta = b.W_eta_factor.solve(rhs.w2 + (dt * dt) * (b.P_p * next.pp) - (dt * dt) * geta);
    } else {
        const SparseMatrix k = block_matrix(b.n_eta + b.n_pp, b.n_eta + b.n_pp,
                                            {{0, 0, &b.W_eta, 1.0, false},
                                             {0, b.n_eta, &b.P_p, -dt * dt, false},
                                             {b.n_eta, 0, &b.P_p, 1.0, true},
                                             {b.n_eta, b.n_eta, &b.W_p, 1.0, false}});
        Vector rhs_k(b.n_eta + b.n_pp);
        rhs_k << rhs.w2 - (dt * dt) * geta, rhs.w3 + dt * (b.G_p.transpose() * s.lambda);
        const Vector x = lu_solve(k, rhs_k);
        next.eta = x.head(b.n_eta);
        next.pp = x.tail(b.n_pp);
    }
    return next;
}

SparseMatrix monolithic_matrix(const SystemBlocks& b)
{
    const double dt = b.dt;
    const int ou = 0, oe = b.n_u, op = oe + b.n_eta, of = op + b.n_pp, og = of + b.n_pf, ol = og + b.n_gamma();
    const int n = ol + b.n_lambda;
    return block_matrix(n, n,
                        {
                            // u rows
                            {ou, ou, &b.W_f, 1.0, false},
                            {ou, of, &b.P_f, -dt, false},
                            {ou, og, &b.G_u, -dt, true},
                            // eta rows
                            {oe, oe, &b.W_eta, 1.0, false},
                            {oe, op, &b.P_p, -dt * dt, false},
                            {oe, og, &b.G_eta, dt * dt, true},
                            // p_p rows
                            {op, oe, &b.P_p, 1.0, true},
                            {op, op, &b.W_p, 1.0, false},
                            {op, ol, &b.G_p, -dt, true},
                            // p_f rows
                            {of, ou, &b.P_f, 1.0, true},
                            // g rows
                            {og, ou, &b.G_u, dt, false},
                            {og, oe, &b.G_eta, -1.0, false},
                            {og, og, &b.M_g, dt, false},
                            {og, ol, &b.G_lambda, -dt, false},
                            // lambda rows
                            {ol, op, &b.G_p, 1.0, false},
                            {ol, og, &b.G_lambda, 1.0, true},
                        });
}

Vector monolithic_rhs(const SystemBlocks& b, const RhsVectors& rhs)
{
    Vector out(b.n_u + b.n_eta + b.n_pp + b.schur_dim());
    out << rhs.w1, rhs.w2, rhs.w3, rhs.a;
    return out;
}

TimeState monolithic_step(const SystemBlocks& b, const TimeState& state, const ProblemData& data)
{
    const RhsVectors rhs = build_rhs(b, state, data);
    const Vector x = lu_solve(monolithic_matrix(b), monolithic_rhs(b, rhs));
    TimeState next;
    int o = 0;
    auto take = [&](int n) {
        Vector v = x.segment(o, n);
        o += n;
        return v;
    };
    next.u = take(b.n_u);
    next.eta = take(b.n_eta);
    next.pp = take(b.n_pp);
    next.pf = take(b.n_pf);
    next.g1 = take(b.n_g1);
    next.g2 = take(b.n_g2);
    next.lambda = take(b.n_lambda);
    next.eta_prev = state.eta;
    next.step = state.step + 1;
    next.t = state.t + b.dt;
    return next;
}

double RowResiduals::max() const
{
    return std::max({incompressibility, interface_g, interface_lambda});
}

RowResiduals row_residuals(const SystemBlocks& b, const RhsVectors& rhs, const TimeState& s, double schur_rhs_norm)
{
    const double dt = b.dt;
    const Vector g = s.g();
    auto rel = [](const Vector& r, double scale) { return scale > 0.0 ? r.norm() / scale : r.norm(); };
    RowResiduals out;
    double sq = 0.0;
    {
        const Vector t1 = b.P_f.transpose() * s.u;
        const Vector a = rhs.a.head(b.n_pf);
        out.incompressibility = rel(t1 - a, t1.norm() + a.norm());
        sq += (t1 - a).squaredNorm();
    }
    {
        const Vector t1 = dt * (b.G_u * s.u);
        const Vector t2 = b.G_eta * s.eta;
        const Vector t3 = dt * (b.M_g * g);
        const Vector t4 = dt * (b.G_lambda * s.lambda);
        const Vector a = rhs.a.segment(b.n_pf, b.n_gamma());
        out.interface_g = rel(t1 - t2 + t3 - t4 - a, t1.norm() + t2.norm() + t3.norm() + t4.norm() + a.norm());
        sq += (t1 - t2 + t3 - t4 - a).squaredNorm();
    }
    {
        const Vector t1 = b.G_p * s.pp;
        const Vector t2 = b.G_lambda.transpose() * g;
        const Vector a = rhs.a.tail(b.n_lambda);
        out.interface_lambda = rel(t1 + t2 - a, t1.norm() + t2.norm() + a.norm());
        sq += (t1 + t2 - a).squaredNorm();
    }
    if (!(schur_rhs_norm > 0.0)) schur_rhs_norm = schur_rhs(b, rhs).norm();
    out.relative = schur_rhs_norm > 0.0 ? std::sqrt(sq) / schur_rhs_norm : std::sqrt(sq);
    return out;
}

double full_residual(const SystemBlocks& b, const RhsVectors& rhs, const TimeState& s)
{
    Vector x(b.n_u + b.n_eta + b.n_pp + b.schur_dim());
    x << s.u, s.eta, s.pp, s.pf, s.g1, s.g2, s.lambda;
    const Vector f = monolithic_rhs(b, rhs);
    const SparseMatrix a = monolithic_matrix(b);
    const double scale = f.norm();
    return (a * x - f).norm() / (scale > 0.0 ? scale : 1.0);
}

} // namespace fpsi
