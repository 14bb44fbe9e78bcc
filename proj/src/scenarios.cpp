#include "fpsi/scenarios.hpp"

#include <cmath>
#include <numbers>
#include <type_traits>

namespace fpsi {

namespace {

constexpr double pi = std::numbers::pi;

// Spatial shape shared by u and eta: (-3x + cos y, y + 1).
Vec2 shape(const Vec2& x) { return {-3.0 * x.x() + std::cos(x.y()), x.y() + 1.0}; }

Matrix2 shape_grad(const Vec2& x)
{
    Matrix2 g;
    g << -3.0, -std::sin(x.y()), 0.0, 1.0;
    return g;
}

// Vector Laplacian of the shape; its divergence (-2) is constant.
Vec2 shape_laplacian(const Vec2& x) { return {-std::cos(x.y()), 0.0}; }

Matrix2 sym(const Matrix2& g) { return 0.5 * (g + g.transpose()); }

} // namespace

Vec2 ManufacturedCase::u(double t, const Vec2& x) const { return pi * std::cos(pi * t) * shape(x); }
Matrix2 ManufacturedCase::grad_u(double t, const Vec2& x) const { return pi * std::cos(pi * t) * shape_grad(x); }
Vec2 ManufacturedCase::u_t(double t, const Vec2& x) const { return -pi * pi * std::sin(pi * t) * shape(x); }

double ManufacturedCase::pf(double t, const Vec2& x) const
{
    return std::exp(t) * std::sin(pi * x.x()) * std::cos(pi * x.y() / 2.0) + 2.0 * pi * std::cos(pi * t);
}

Vec2 ManufacturedCase::grad_pf(double t, const Vec2& x) const { return grad_pp(t, x); }

Vec2 ManufacturedCase::eta(double t, const Vec2& x) const { return std::sin(pi * t) * shape(x); }
Matrix2 ManufacturedCase::grad_eta(double t, const Vec2& x) const { return std::sin(pi * t) * shape_grad(x); }
Vec2 ManufacturedCase::eta_t(double t, const Vec2& x) const { return pi * std::cos(pi * t) * shape(x); }
Vec2 ManufacturedCase::eta_tt(double t, const Vec2& x) const { return -pi * pi * std::sin(pi * t) * shape(x); }

double ManufacturedCase::pp(double t, const Vec2& x) const
{
    return std::exp(t) * std::sin(pi * x.x()) * std::cos(pi * x.y() / 2.0);
}

Vec2 ManufacturedCase::grad_pp(double t, const Vec2& x) const
{
    const double e = std::exp(t);
    return {e * pi * std::cos(pi * x.x()) * std::cos(pi * x.y() / 2.0),
            -e * (pi / 2.0) * std::sin(pi * x.x()) * std::sin(pi * x.y() / 2.0)};
}

Matrix2 ManufacturedCase::sigma_f(double t, const Vec2& x) const
{
    return 2.0 * params.nu_f * sym(grad_u(t, x)) - pf(t, x) * Matrix2::Identity();
}

Matrix2 ManufacturedCase::sigma_p(double t, const Vec2& x) const
{
    const Matrix2 g = grad_eta(t, x);
    return 2.0 * params.nu_p * sym(g) + (params.lambda * g.trace() - params.alpha * pp(t, x)) * Matrix2::Identity();
}

Vec2 ManufacturedCase::f_f(double t, const Vec2& x) const
{
    // div(2 D(u)) = lap u + grad div u, and div u is constant in space.
    const Vec2 div_sigma_visc = params.nu_f * pi * std::cos(pi * t) * shape_laplacian(x);
    return params.rho_f * u_t(t, x) - div_sigma_visc + grad_pf(t, x);
}

Vec2 ManufacturedCase::f_eta(double t, const Vec2& x) const
{
    const Vec2 div_visc = params.nu_p * std::sin(pi * t) * shape_laplacian(x);
    return params.rho_p * eta_tt(t, x) - div_visc + params.alpha * grad_pp(t, x);
}

double ManufacturedCase::f_p(double t, const Vec2& x) const
{
    const double p = pp(t, x);
    const double div_eta_t = -2.0 * pi * std::cos(pi * t);
    const double lap_p = -(5.0 * pi * pi / 4.0) * p;
    return params.s0 * p + params.alpha * div_eta_t - params.kappa * lap_p;
}

double ManufacturedCase::g_f(double t, const Vec2&) const { return -2.0 * pi * std::cos(pi * t); }

double ManufacturedCase::g1_exact(double t, const Vec2& x) const
{
    const Vec2 n(0.0, -1.0);
    return n.dot(sigma_f(t, x) * n);
}

double ManufacturedCase::g2_exact(double t, const Vec2& x) const
{
    const Vec2 n(0.0, -1.0), tau(1.0, 0.0);
    return tau.dot(sigma_f(t, x) * n);
}

double ManufacturedCase::lambda_exact(double t, const Vec2& x) const
{
    return params.kappa * grad_pp(t, x).dot(Vec2(0.0, 1.0));
}

ProblemData ManufacturedCase::data() const
{
    const ManufacturedCase mc = *this;
    ProblemData d;
    d.f_f = [mc](double t, const Vec2& x) { return mc.f_f(t, x); };
    d.f_eta = [mc](double t, const Vec2& x) { return mc.f_eta(t, x); };
    d.f_p = [mc](double t, const Vec2& x) { return mc.f_p(t, x); };
    d.g_f = [mc](double t, const Vec2& x) { return mc.g_f(t, x); };
    d.u_dirichlet = [mc](double t, const Vec2& x) { return mc.u(t, x); };
    d.eta_dirichlet = [mc](double t, const Vec2& x) { return mc.eta(t, x); };
    d.pp_dirichlet = [mc](double t, const Vec2& x) { return mc.pp(t, x); };
    d.u_neumann = [mc](double t, const Vec2& x, const Vec2& n) -> Vec2 { return mc.sigma_f(t, x) * n; };
    d.eta_neumann = [mc](double t, const Vec2& x, const Vec2& n) -> Vec2 { return mc.sigma_p(t, x) * n; };
    d.pp_neumann = [mc](double t, const Vec2& x, const Vec2& n) { return mc.params.kappa * mc.grad_pp(t, x).dot(n); };
    return d;
}

std::pair<SubdomainMesh, SubdomainMesh> ManufacturedCase::meshes(int n) const
{
    if (n < 1) throw ConfigError("manufactured case: mesh subdivision must be >= 1");
    const Rect rf{0.0, 1.0, 0.0, 1.0}, rp{0.0, 1.0, -1.0, 0.0};
    SideTags sf;
    sf.left = sf.right = EdgeTags{BoundaryTag::FluidNeumann, BoundaryTag::None};
    sf.top = EdgeTags{BoundaryTag::FluidDirichlet, BoundaryTag::None};
    sf.bottom = EdgeTags{BoundaryTag::Interface, BoundaryTag::None};
    SideTags sp;
    sp.left = sp.right = EdgeTags{BoundaryTag::StructDirichlet, BoundaryTag::PoreNeumann};
    sp.bottom = EdgeTags{BoundaryTag::StructDirichlet, BoundaryTag::PoreDirichlet};
    sp.top = EdgeTags{BoundaryTag::Interface, BoundaryTag::Interface};
    return {tag_boundaries(build_rect_mesh(rf, n, n), tagger_from_sides(rf, sf)),
            tag_boundaries(build_rect_mesh(rp, n, n), tagger_from_sides(rp, sp))};
}

TimeState ManufacturedCase::initial_state(const SystemBlocks& blocks, double t0) const
{
    const Discretization& d = *blocks.disc;
    TimeState s = zero_state(blocks, t0);
    s.u = interpolate(d.u, VectorField([&](const Vec2& x) { return u(t0, x); }));
    s.pf = interpolate(d.pf, ScalarField([&](const Vec2& x) { return pf(t0, x); }));
    s.eta = interpolate(d.eta, VectorField([&](const Vec2& x) { return eta(t0, x); }));
    s.eta_prev = interpolate(d.eta, VectorField([&](const Vec2& x) { return Vec2(eta(t0, x) - blocks.dt * eta_t(t0, x)); }));
    s.pp = interpolate(d.pp, ScalarField([&](const Vec2& x) { return pp(t0, x); }));
    s.g1 = interpolate(d.g1, ScalarField([&](const Vec2& x) { return g1_exact(t0, x); }));
    s.g2 = interpolate(d.g2, ScalarField([&](const Vec2& x) { return g2_exact(t0, x); }));
    s.lambda = interpolate(d.lambda, ScalarField([&](const Vec2& x) { return lambda_exact(t0, x); }));
    return s;
}

double StrongResidual::max_abs() const
{
    return std::max({stokes_momentum.cwiseAbs().maxCoeff(), std::abs(stokes_mass),
                     structure_momentum.cwiseAbs().maxCoeff(), std::abs(structure_mass)});
}

namespace {

// Fourth-order central differences.
// Results are evaluated eagerly: Eigen expressions over the temporaries
// returned by f would dangle.
template <class F>
std::decay_t<std::invoke_result_t<const F&, double>> d1(const F& f, double h)
{
    return (-f(2.0 * h) + 8.0 * f(h) - 8.0 * f(-h) + f(-2.0 * h)) / (12.0 * h);
}

template <class F>
std::decay_t<std::invoke_result_t<const F&, double>> d2(const F& f, double h)
{
    return (-f(2.0 * h) + 16.0 * f(h) - 30.0 * f(0.0) + 16.0 * f(-h) - f(-2.0 * h)) / (12.0 * h * h);
}

// Hessian of a scalar function of x.
template <class F>
Matrix2 hessian(const F& f, const Vec2& x, double h)
{
    Matrix2 hs;
    hs(0, 0) = d2([&](double s) { return f(Vec2(x.x() + s, x.y())); }, h);
    hs(1, 1) = d2([&](double s) { return f(Vec2(x.x(), x.y() + s)); }, h);
    hs(0, 1) = hs(1, 0) = d1(
        [&](double s) { return d1([&](double r) { return f(Vec2(x.x() + s, x.y() + r)); }, h); }, h);
    return hs;
}

template <class F>
Vec2 gradient(const F& f, const Vec2& x, double h)
{
    return {d1([&](double s) { return f(Vec2(x.x() + s, x.y())); }, h),
            d1([&](double s) { return f(Vec2(x.x(), x.y() + s)); }, h)};
}

// div(2 nu D(v)) + lambda grad(div v) for a vector field given per component.
template <class F>
Vec2 elastic_operator(const F& v, const Vec2& x, double nu, double lam, double h)
{
    const Matrix2 h0 = hessian([&](const Vec2& y) { return v(y).x(); }, x, h);
    const Matrix2 h1 = hessian([&](const Vec2& y) { return v(y).y(); }, x, h);
    // (div 2D(v))_i = sum_j d_jj v_i + d_ij v_j; (grad div v)_i = sum_j d_ij v_j.
    const Vec2 lap(h0.trace(), h1.trace());
    const Vec2 grad_div(h0(0, 0) + h1(0, 1), h0(1, 0) + h1(1, 1));
    return nu * (lap + grad_div) + lam * grad_div;
}

} // namespace

StrongResidual manufactured_fd_residual(const ManufacturedCase& mc, double t, const Vec2& x, double h)
{
    const PhysicalParams& p = mc.params;
    StrongResidual r;

    const Vec2 du_dt = d1([&](double s) { return Vec2(mc.u(t + s, x)); }, h);
    const Vec2 visc_f = elastic_operator([&](const Vec2& y) { return mc.u(t, y); }, x, p.nu_f, 0.0, h);
    const Vec2 gpf = gradient([&](const Vec2& y) { return mc.pf(t, y); }, x, h);
    r.stokes_momentum = p.rho_f * du_dt - visc_f + gpf - mc.f_f(t, x);

    const double div_u = d1([&](double s) { return mc.u(t, Vec2(x.x() + s, x.y())).x(); }, h) +
                         d1([&](double s) { return mc.u(t, Vec2(x.x(), x.y() + s)).y(); }, h);
    r.stokes_mass = div_u - mc.g_f(t, x);

    const Vec2 deta_tt = d2([&](double s) { return Vec2(mc.eta(t + s, x)); }, h);
    const Vec2 elas = elastic_operator([&](const Vec2& y) { return mc.eta(t, y); }, x, p.nu_p, p.lambda, h);
    const Vec2 gpp = gradient([&](const Vec2& y) { return mc.pp(t, y); }, x, h);
    r.structure_momentum = p.rho_p * deta_tt - elas + p.alpha * gpp - mc.f_eta(t, x);

    const double dp_dt = d1([&](double s) { return mc.pp(t + s, x); }, h);
    auto div_eta = [&](double tt) {
        return d1([&](double s) { return mc.eta(tt, Vec2(x.x() + s, x.y())).x(); }, h) +
               d1([&](double s) { return mc.eta(tt, Vec2(x.x(), x.y() + s)).y(); }, h);
    };
    const double div_eta_t = d1([&](double s) { return div_eta(t + s); }, h);
    const Matrix2 hp = hessian([&](const Vec2& y) { return mc.pp(t, y); }, x, h);
    r.structure_mass = p.s0 * dp_dt + p.alpha * div_eta_t - p.kappa * hp.trace() - mc.f_p(t, x);
    return r;
}

HydroCase HydroCase::make(int which)
{
    if (which != 1 && which != 2) throw ConfigError("hydro case must be 1 or 2");
    HydroCase c;
    c.which = which;
    if (which == 2) {
        c.params.kappa = 1e-4;
        c.params.s0 = 1e-4;
        c.params.lambda = 1e6;
    }
    return c;
}

Vec2 HydroCase::inflow(const Vec2& x) const
{
    // -40 y (y - 1) has peak 10 at y = 1/2.
    const double y = x.y();
    return {-(inflow_peak / 10.0) * 40.0 * y * (y - 1.0), 0.0};
}

ProblemData HydroCase::data() const
{
    const HydroCase c = *this;
    ProblemData d;
    d.u_dirichlet = [c](double, const Vec2& x) -> Vec2 {
        if (std::abs(x.x()) < 1e-12) return c.inflow(x);
        return Vec2::Zero();
    };
    return d;
}

std::pair<SubdomainMesh, SubdomainMesh> HydroCase::meshes(int n) const
{
    if (n < 1) throw ConfigError("hydro case: mesh subdivision must be >= 1");
    const Rect rf{0.0, 2.0, 0.0, 1.0}, rp{0.0, 2.0, -1.0, 0.0};
    SideTags sf;
    sf.left = sf.right = sf.top = EdgeTags{BoundaryTag::FluidDirichlet, BoundaryTag::None};
    sf.bottom = EdgeTags{BoundaryTag::Interface, BoundaryTag::None};
    SideTags sp;
    sp.left = sp.right = EdgeTags{BoundaryTag::StructDirichlet, BoundaryTag::PoreNeumann};
    sp.bottom = EdgeTags{BoundaryTag::StructNeumann, BoundaryTag::PoreDirichlet};
    sp.top = EdgeTags{BoundaryTag::Interface, BoundaryTag::Interface};
    return {tag_boundaries(build_rect_mesh(rf, 2 * n, n), tagger_from_sides(rf, sf)),
            tag_boundaries(build_rect_mesh(rp, 2 * n, n), tagger_from_sides(rp, sp))};
}

} // namespace fpsi
