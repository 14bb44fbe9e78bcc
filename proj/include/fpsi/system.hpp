#pragma once

#include "fpsi/assembly.hpp"
#include "fpsi/fe_space.hpp"
#include "fpsi/mesh.hpp"
#include "fpsi/sparse.hpp"
#include "fpsi/types.hpp"

#include <functional>
#include <memory>
#include <optional>

namespace fpsi {

struct PhysicalParams {
    double rho_f = 1.0;
    double nu_f = 1.0;
    double rho_p = 1.0;
    double nu_p = 1.0;
    double lambda = 1.0;
    double alpha = 1.0;
    double s0 = 1.0;
    double kappa = 1.0;
    double beta = 1.0;
    /// Interface stabilization weight; only zero is supported.
    double eps_bar = 0.0;

    /// Throws ConfigError on out-of-range values or a nonzero eps_bar.
    void validate() const;
};

struct TimeConfig {
    double dt = 0.0;
    double t_final = 0.0;
    int n_steps = 0;

    /// Requires t_final / dt to be an integer (relative tolerance 1e-9).
    static TimeConfig from(double dt, double t_final);
};

/// Polynomial degrees of all seven unknowns; the three multipliers share one.
struct Degrees {
    int u = 2;
    int pf = 1;
    int eta = 2;
    int pp = 2;
    int lm = 2;
};

struct Discretization {
    std::shared_ptr<const SubdomainMesh> mesh_f, mesh_p;
    std::shared_ptr<const InterfaceTrace> trace;
    FeSpace u, pf, eta, pp;
    TraceSpace g1, g2, lambda;
};

/// Meshes must already be tagged.
Discretization build_discretization(SubdomainMesh mesh_f, SubdomainMesh mesh_p, const Degrees& deg,
                                    bool flip_tangent = false);

using TimeVectorField = std::function<Vec2(double t, const Vec2& x)>;
using TimeScalarField = std::function<double(double t, const Vec2& x)>;
using TimeVectorFlux = std::function<Vec2(double t, const Vec2& x, const Vec2& n)>;
using TimeScalarFlux = std::function<double(double t, const Vec2& x, const Vec2& n)>;

/// Body forces, boundary data and the optional fluid mass source. Empty
/// callbacks mean zero.
struct ProblemData {
    TimeVectorField f_f, f_eta;
    TimeScalarField f_p, g_f;
    TimeVectorField u_dirichlet, eta_dirichlet;
    TimeScalarField pp_dirichlet;
    TimeVectorFlux u_neumann, eta_neumann;
    TimeScalarFlux pp_neumann;
};

/// Solves T_p x = r with T_p = W_p + dt^2 P_p^T W_eta^{-1} P_p. Small
/// problems use a dense Cholesky factor of T_p; larger ones factor the
/// quasi-definite matrix [W_eta, -dt P_p; -dt P_p^T, -W_p] instead.
class TpSolver {
public:
    TpSolver() = default;
    TpSolver(const SparseMatrix& w_p, const SparseMatrix& p_p, const SparseMatrix& w_eta,
             const SparseCholesky& w_eta_factor, double dt, int dense_cap);

    Vector solve(const Vector& r) const;
    bool is_dense() const { return dense_.has_value(); }
    /// Only available on the dense path.
    const DenseMatrix& dense_matrix() const;

private:
    std::optional<DenseCholesky> dense_factor_;
    std::optional<DenseMatrix> dense_;
    std::optional<SparseLdlt> block_;
    int n_eta_ = 0;
    int n_pp_ = 0;
};

struct SystemOptions {
    /// Largest T_p dimension stored densely.
    int dense_tp_cap = 5000;
    /// Builds and factors P_f^T W_f^{-1} P_f for the preconditioner.
    bool factor_preconditioner = true;
};

/// Every matrix of the discrete system with Dirichlet elimination applied
/// ("raw" copies keep the constrained rows/columns for liftings and history
/// terms), plus the factorizations reused every step.
struct SystemBlocks {
    std::shared_ptr<const Discretization> disc;
    PhysicalParams params;
    double dt = 0.0;

    int n_u = 0, n_pf = 0, n_eta = 0, n_pp = 0, n_g1 = 0, n_g2 = 0, n_lambda = 0;
    int n_gamma() const { return n_g1 + n_g2; }
    int schur_dim() const { return n_pf + n_gamma() + n_lambda; }

    SparseMatrix M_f, K_f, M_eta, KL_eta, M_p, K_p;
    SparseMatrix W_f_raw, W_eta_raw, W_p_raw, P_f_raw, P_p_raw, G_u_raw, G_eta_raw, G_p_raw;
    InterfaceMatrices interface;

    SparseMatrix W_f, W_eta, W_p;
    SparseMatrix P_f, P_p;
    /// [G_uN; G_utau] and [-G_etaN; G_etatau], N_gamma rows.
    SparseMatrix G_u, G_eta;
    SparseMatrix G_p;
    /// [G_1lambda^T; 0], N_gamma x N_lambda.
    SparseMatrix G_lambda;
    /// blkdiag(0, M_g2).
    SparseMatrix M_g;

    SparseCholesky W_f_factor, W_eta_factor, G_1lambda_factor, M_g2_factor;
    TpSolver T_p;
    std::optional<DenseCholesky> PWP_factor;
};

SystemBlocks build_system(std::shared_ptr<const Discretization> disc, const PhysicalParams& params, double dt,
                          const SystemOptions& opts = {});

struct TimeState {
    Vector u, pf, eta, pp, g1, g2, lambda;
    Vector eta_prev;
    int step = 0;
    double t = 0.0;

    Vector g() const;
};

/// Zero state with correctly sized vectors at time t.
TimeState zero_state(const SystemBlocks& blocks, double t = 0.0);

struct RhsVectors {
    Vector w1, w2, w3, w4;
    /// Right-hand side blocks of the incompressibility, g and lambda rows:
    /// [g_mass; w4; 0] plus the Dirichlet liftings.
    Vector a;
    /// Boundary values at t^{n+1}, zero away from constrained DOFs.
    Vector u_D, eta_D, pp_D;
};

/// Right-hand sides for the step from state.t to state.t + dt.
RhsVectors build_rhs(const SystemBlocks& blocks, const TimeState& state, const ProblemData& data);

Vector schur_rhs(const SystemBlocks& blocks, const RhsVectors& rhs);

/// Splits y = [p_f; g1; g2; lambda].
struct SchurSplit {
    Vector pf, g1, g2, lambda;
};
SchurSplit split_schur(const SystemBlocks& blocks, const Vector& y);
Vector join_schur(const SystemBlocks& blocks, const Vector& pf, const Vector& g, const Vector& lambda);

/// Recovers u, eta, p_p from the multipliers (sequential variant unless
/// `block_variant`, which solves the coupled eta/p_p system by sparse LU).
TimeState recover_primal(const SystemBlocks& blocks, const TimeState& state, const RhsVectors& rhs, const Vector& y,
                         bool block_variant = false);

/// Full block matrix in the unknown order [u; eta; p_p; p_f; g; lambda].
SparseMatrix monolithic_matrix(const SystemBlocks& blocks);
Vector monolithic_rhs(const SystemBlocks& blocks, const RhsVectors& rhs);

TimeState monolithic_step(const SystemBlocks& blocks, const TimeState& state, const ProblemData& data);

/// Residuals of the incompressibility, g and lambda rows evaluated on the
/// recovered state. The per-row entries are normwise,
/// ||r|| / (||rhs|| + sum of ||term||); `relative` stacks the three rows and
/// divides by ||b|| of the Schur system, the scale the Krylov tolerance uses.
struct RowResiduals {
    double incompressibility = 0.0;
    double interface_g = 0.0;
    double interface_lambda = 0.0;
    double relative = 0.0;
    double max() const;
};
/// `schur_rhs_norm` <= 0 computes ||schur_rhs(blocks, rhs)|| internally.
RowResiduals row_residuals(const SystemBlocks& blocks, const RhsVectors& rhs, const TimeState& next,
                           double schur_rhs_norm = 0.0);

/// Relative residual of all six block rows (monolithic system).
double full_residual(const SystemBlocks& blocks, const RhsVectors& rhs, const TimeState& next);

} // namespace fpsi
