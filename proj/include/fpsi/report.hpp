#pragma once

#include "fpsi/studies.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace fpsi {

/// Full-precision scientific notation (round-trips a double); "N/A" for NaN
/// and infinities.
std::string format_number(double x);

/// dx, err_eta_l2, rate, err_eta_h1, rate, err_pp_l2, rate, err_pp_h1, rate,
/// err_u_l2, rate, err_u_h1, rate, err_pf_l2, rate. Failed rows are all N/A
/// after dx.
void write_convergence_csv(std::ostream& os, const std::vector<ConvergenceRow>& rows);

/// dx, cond_S, iters_S, cond_noLB, iters_noLB, cond_LB, iters_LB. Iterations
/// read N/A when any step of the variant missed the tolerance, condition
/// numbers when not probed.
void write_precond_csv(std::ostream& os, const std::vector<PrecondRow>& rows);

/// Long format: dx, inner_step, iteration, relative_residual, where
/// iteration = inner_step / l. The first entry of every mesh is 1.
void write_residuals_csv(std::ostream& os, const std::vector<PrecondRow>& rows, PrecondVariant variant, int l);

/// step, time, krylov_iters, residual, row_residual, converged, u_max,
/// eta_max, pp_min, pp_max, pf_min, pf_max.
void write_hydro_csv(std::ostream& os, const std::vector<HydroStepDiag>& steps);

/// Creates parent directories; throws ConfigError when the file cannot be written.
void write_text_file(const std::string& path, const std::string& contents);

} // namespace fpsi
