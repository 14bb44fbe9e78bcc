#pragma once

#include "fpsi/system.hpp"

#include <map>
#include <string>
#include <vector>

namespace fpsi {

/// Writes both subdomains into one legacy ASCII unstructured grid. Each
/// triangle is split into four linear triangles through its edge midpoints.
/// Point fields: u, eta, p_p, p_f, darcy_velocity, velocity (u in the fluid,
/// darcy_velocity in the structure); cell field: subdomain (0 fluid, 1 structure).
void write_vtk_snapshot(const std::string& path, const Discretization& d, const PhysicalParams& params,
                        const TimeState& state, double dt, const std::string& title = "fpsi snapshot");

struct VtkSummary {
    int points = 0;
    int cells = 0;
    /// Field name to number of components.
    std::map<std::string, int> point_fields;
    std::map<std::string, int> cell_fields;
};

/// Parses a file written by write_vtk_snapshot and checks the section
/// counts; throws ConfigError on malformed input.
VtkSummary read_vtk_summary(const std::string& path);

} // namespace fpsi
