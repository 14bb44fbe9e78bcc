#pragma once

#include "fpsi/mesh.hpp"
#include "fpsi/system.hpp"

#include <utility>

namespace fpsi {

using Matrix2 = Eigen::Matrix2d;

/// Smooth manufactured solution on [0,1]x[0,1] (fluid) and [0,1]x[-1,0]
/// (structure). Forcings are derived for arbitrary constant parameters.
struct ManufacturedCase {
    PhysicalParams params;
    Degrees degrees;

    Vec2 u(double t, const Vec2& x) const;
    Matrix2 grad_u(double t, const Vec2& x) const;
    Vec2 u_t(double t, const Vec2& x) const;
    double pf(double t, const Vec2& x) const;
    Vec2 grad_pf(double t, const Vec2& x) const;
    Vec2 eta(double t, const Vec2& x) const;
    Matrix2 grad_eta(double t, const Vec2& x) const;
    Vec2 eta_t(double t, const Vec2& x) const;
    Vec2 eta_tt(double t, const Vec2& x) const;
    double pp(double t, const Vec2& x) const;
    Vec2 grad_pp(double t, const Vec2& x) const;

    Matrix2 sigma_f(double t, const Vec2& x) const;
    Matrix2 sigma_p(double t, const Vec2& x) const;

    Vec2 f_f(double t, const Vec2& x) const;
    Vec2 f_eta(double t, const Vec2& x) const;
    double f_p(double t, const Vec2& x) const;
    /// Divergence of u, used as the fluid mass source.
    double g_f(double t, const Vec2& x) const;

    /// Exact interface multipliers on the horizontal interface (y = 0).
    double g1_exact(double t, const Vec2& x) const;
    double g2_exact(double t, const Vec2& x) const;
    double lambda_exact(double t, const Vec2& x) const;

    ProblemData data() const;

    /// Tagged meshes with n cells per unit length.
    std::pair<SubdomainMesh, SubdomainMesh> meshes(int n) const;

    /// Nodal interpolants at t0; eta_prev uses the velocity bootstrap
    /// eta(t0) - dt * eta_t(t0).
    TimeState initial_state(const SystemBlocks& blocks, double t0 = 0.0) const;
};

/// Residuals of the strong-form equations evaluated on the exact fields with
/// finite differences (fourth-order stencils, step h), minus the analytic
/// forcings. Independent check of the forcing formulas.
struct StrongResidual {
    Vec2 stokes_momentum = Vec2::Zero();
    double stokes_mass = 0.0;
    Vec2 structure_momentum = Vec2::Zero();
    double structure_mass = 0.0;

    double max_abs() const;
};
StrongResidual manufactured_fd_residual(const ManufacturedCase& mc, double t, const Vec2& x, double h = 1e-3);

/// Surface/subsurface flow example on [0,2]x[0,1] over [0,2]x[-1,0].
struct HydroCase {
    int which = 1;
    PhysicalParams params;
    Degrees degrees{2, 1, 2, 1, 1};
    /// Peak of the parabolic inflow profile on x = 0 (10 for the standard case).
    double inflow_peak = 10.0;

    /// Case 1 uses unit parameters; case 2 sets kappa = s0 = 1e-4, lambda = 1e6.
    static HydroCase make(int which);

    Vec2 inflow(const Vec2& x) const;
    ProblemData data() const;
    std::pair<SubdomainMesh, SubdomainMesh> meshes(int n) const;
};

} // namespace fpsi
