#pragma once

#include "fpsi/scenarios.hpp"
#include "fpsi/time_step.hpp"

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace fpsi {

/// Final-time errors for one mesh of the manufactured problem.
struct ConvergenceRow {
    int n = 0;
    double dx = 0.0;
    ErrorNorms eta, pp, u;
    double pf_l2 = 0.0;
    /// Rates against the previous row; NaN on the first row.
    double rate_eta_l2 = 0.0, rate_eta_h1 = 0.0, rate_pp_l2 = 0.0, rate_pp_h1 = 0.0, rate_u_l2 = 0.0,
           rate_u_h1 = 0.0, rate_pf_l2 = 0.0;
    double avg_iterations = 0.0;
    /// Largest residual of the incompressibility and interface rows relative
    /// to the Schur right-hand side (RowResiduals::relative), over all steps.
    double max_row_residual = 0.0;
    /// Largest per-row normwise residual (RowResiduals::max), over all steps.
    double max_normwise_row_residual = 0.0;
    double seconds = 0.0;
    bool ok = true;
    std::string error;
};

struct ConvergenceConfig {
    double dt = 1e-5;
    double t_final = 1e-4;
    /// Cells per unit length.
    std::vector<int> meshes{2, 4, 8, 16};
    StepOptions step;
    /// Forcings are rederived for any parameter set.
    PhysicalParams params;
};

std::vector<ConvergenceRow> run_convergence_space(const ConvergenceConfig& cfg);

/// Rate between two successive errors at mesh sizes dx0 > dx1.
double observed_rate(double e0, double e1, double dx0, double dx1);

/// One preconditioner variant within a study row.
struct VariantResult {
    PrecondVariant variant = PrecondVariant::None;
    /// cond2 of S M^{-1} (of S for the unpreconditioned variant); NaN when not probed.
    double cond = 0.0;
    double avg_iterations = 0.0;
    bool all_converged = true;
    /// Residual history of the first time step.
    std::vector<double> history;
};

struct PrecondRow {
    int n = 0;
    double dx = 0.0;
    int schur_dim = 0;
    VariantResult none, pre, pre_lb;
    bool ok = true;
    std::string error;
};

struct PrecondStudyConfig {
    double dt = 1e-5;
    double t_final = 1e-4;
    std::vector<int> meshes{2, 4, 8, 16};
    KrylovConfig krylov;
    PhysicalParams params;
    bool scale_lower_block_by_dt = true;
    /// See StepOptions::scale_interface_rows.
    bool scale_interface_rows = true;
    /// Schur dimensions above this are not probed for condition numbers.
    int probe_cap = 2000;
};

std::vector<PrecondRow> run_precond_study(const PrecondStudyConfig& cfg);

struct HydroStepDiag {
    int step = 0;
    double t = 0.0;
    double krylov_iterations = 0.0;
    double krylov_residual = 0.0;
    bool converged = true;
    /// RowResiduals::relative of this step.
    double row_residual = 0.0;
    double u_max = 0.0;
    double eta_max = 0.0;
    double pp_min = 0.0, pp_max = 0.0;
    double pf_min = 0.0, pf_max = 0.0;
};

struct HydroConfig {
    int which = 1;
    double dt = 0.06;
    double t_final = 3.0;
    /// Cells per unit length.
    int n = 32;
    double inflow_peak = 10.0;
    /// Replaces the case parameters when set.
    std::optional<PhysicalParams> params;
    StepOptions step;
    /// Writes a VTK snapshot every `vtk_every` steps (and at the last step)
    /// into this directory; empty disables output.
    std::string vtk_dir;
    int vtk_every = 10;
};

struct HydroResult {
    std::vector<HydroStepDiag> steps;
    std::vector<KrylovReport> reports;
    bool completed = false;
    std::string error;
    std::shared_ptr<const Discretization> disc;
    PhysicalParams params;
    TimeState final_state;
    std::vector<std::string> vtk_files;
};

HydroResult run_hydro(const HydroConfig& cfg);

struct OracleConfig {
    double dt = 1e-5;
    int steps = 5;
    /// Cells per unit length.
    int n = 4;
    StepOptions step;
    PhysicalParams params;
    /// Condition numbers of S M^{-1} are only probed up to this Schur dimension.
    int probe_cap = 2000;
};

/// Partitioned steps against the monolithic direct solve on the manufactured
/// problem. Differences are max-norm relative to the monolithic vector.
struct OracleResult {
    /// Order u, eta, p_p, p_f, g1, g2, lambda; maximum over steps.
    std::array<double, 7> max_diff{};
    double max_row_residual = 0.0;
    double avg_iterations = 0.0;
    int schur_dim = 0;
    /// NaN when the Schur dimension exceeds the probing cap.
    double cond_precond = 0.0;
    double max() const;
};

OracleResult run_oracle_check(const OracleConfig& cfg);

/// Names matching OracleResult::max_diff.
const std::array<const char*, 7>& state_vector_names();

/// max |a - b| / max |b| (the denominator is floored at 1e-300).
double max_relative_difference(const Vector& a, const Vector& b);

/// Darcy-side velocity eta_t - kappa grad p_p at point bary of triangle t of
/// the structure mesh, with eta_t from the last two displacement iterates.
Vec2 darcy_velocity(const Discretization& d, const PhysicalParams& p, const TimeState& s, double dt, int t,
                    const std::array<double, 3>& bary);

/// Values of p_p along the vertical line x = x0 through the structure,
/// sampled at `samples` points from y = -1 to y = 0.
std::vector<std::pair<double, double>> pore_pressure_probe(const Discretization& d, const TimeState& s, double x0,
                                                           int samples);

} // namespace fpsi
