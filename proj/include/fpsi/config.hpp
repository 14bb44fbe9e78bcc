#pragma once

#include "fpsi/studies.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fpsi {

/// Settings of one CLI run. Unset optionals take per-command defaults (see
/// resolved_dt and friends), so a config file can stay partial.
struct RunConfig {
    std::string command;
    std::optional<double> dt;
    std::optional<double> t_final;
    /// Cells per unit length (1/dx). An explicitly empty list is an error.
    std::optional<std::vector<int>> meshes;
    std::optional<PrecondVariant> precond;
    int hydro_case = 1;
    std::string out_dir = "out";
    std::uint64_t seed = 12345;
    KrylovConfig krylov;
    /// PhysicalParams field name -> value, applied over the scenario defaults.
    std::map<std::string, double> params;
    bool scale_lower_block_by_dt = true;
    bool scale_interface_rows = true;
    int vtk_every = 10;
    double inflow_peak = 10.0;
    int oracle_steps = 5;
    /// Test hook for oracle-check.
    bool corrupt_w4_sign = false;

    double resolved_dt() const;
    double resolved_t_final() const;
    std::vector<int> resolved_meshes() const;
    PrecondVariant resolved_precond() const;
    PhysicalParams resolved_params(const PhysicalParams& base) const;
    StepOptions step_options() const;

    /// Throws ConfigError on unknown keys or ill-typed values.
    static RunConfig from_json_text(const std::string& text);
    std::string to_json_text() const;
};

/// Accepts "0.25", "1/4" or "1e-1"; 1/dx must be a positive integer.
int mesh_count_from_dx(const std::string& dx);

/// Sets the named parameter; ConfigError for unknown names.
void set_param(PhysicalParams& p, const std::string& name, double value);

} // namespace fpsi
