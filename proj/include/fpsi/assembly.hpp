#pragma once

#include "fpsi/fe_space.hpp"
#include "fpsi/types.hpp"

#include <functional>

namespace fpsi {

/// coeff * (phi_j, phi_i); block diagonal over components for vector spaces.
SparseMatrix assemble_mass(const FeSpace& space, double coeff);

/// 2 nu (D(phi_j), D(phi_i)) on a vector space.
SparseMatrix assemble_stokes_stiffness(const FeSpace& space, double nu);

/// 2 nu (D(phi_j), D(phi_i)) + lambda (div phi_j, div phi_i).
SparseMatrix assemble_elasticity(const FeSpace& space, double nu, double lambda);

/// kappa (grad phi_j, grad phi_i) on a scalar space.
SparseMatrix assemble_scalar_stiffness(const FeSpace& space, double kappa);

/// P(i, j) = alpha (div phi_i, q_j); rows follow the vector space.
SparseMatrix assemble_div_coupling(const FeSpace& vector_space, const FeSpace& scalar_space, double alpha);

Vector assemble_load(const FeSpace& space, const ScalarField& f);
Vector assemble_load(const FeSpace& space, const VectorField& f);

/// Boundary data as a function of position and outward unit normal.
using ScalarFlux = std::function<double(const Vec2& x, const Vec2& n)>;
using VectorFlux = std::function<Vec2(const Vec2& x, const Vec2& n)>;

/// Integral of g . phi_i over boundary edges whose displacement or pressure
/// tag equals `tag`.
Vector assemble_boundary_load(const FeSpace& space, BoundaryTag tag, const ScalarFlux& g);
Vector assemble_boundary_load(const FeSpace& space, BoundaryTag tag, const VectorFlux& g);

enum class InterfaceSide { Fluid, Poro };

/// coeff <s_j, mu_i>: rows follow `rows`, columns follow `cols`.
SparseMatrix assemble_trace_mass(const TraceSpace& rows, const TraceSpace& cols, double coeff);

/// <phi_j . direction, s_i> over the interface, phi_j from the bulk vector
/// space on the given side.
SparseMatrix assemble_trace_vector_coupling(const TraceSpace& rows, const FeSpace& bulk, InterfaceSide side,
                                            const Vec2& direction);

/// <w_j, mu_i> over the interface, w_j from the bulk scalar space.
SparseMatrix assemble_trace_scalar_coupling(const TraceSpace& rows, const FeSpace& bulk, InterfaceSide side);

/// Integral over the interface of a function of position against trace
/// basis functions.
Vector assemble_trace_load(const TraceSpace& space, const ScalarField& f);

/// Interface coupling blocks. Rows follow the multiplier spaces.
struct InterfaceMatrices {
    SparseMatrix G_uN;      ///< <u . n_f, s1>, N_g1 x N_u
    SparseMatrix G_etaN;    ///< <eta . n_p, s1>, N_g1 x N_eta
    SparseMatrix G_utau;    ///< <u . tau, s2>, N_g2 x N_u
    SparseMatrix G_etatau;  ///< <eta . tau, s2>, N_g2 x N_eta
    SparseMatrix G_p;       ///< <w, mu>, N_lambda x N_pp
    SparseMatrix G_1lambda; ///< <s1_j, mu_i>, N_lambda x N_g1
    SparseMatrix M_g2;      ///< (1/beta) <s2_j, s2_i>
};

/// Throws ConfigError unless the g1 and lambda spaces coincide.
InterfaceMatrices assemble_interface_matrices(const FeSpace& space_u, const FeSpace& space_eta,
                                              const FeSpace& space_pp, const TraceSpace& space_g1,
                                              const TraceSpace& space_g2, const TraceSpace& space_lambda,
                                              double beta);

/// Symmetric elimination: zeroes the rows flagged in `rows` and the columns
/// flagged in `cols` (an empty mask means no constraint). With
/// `unit_diagonal`, the diagonal of each constrained row is set to 1.
SparseMatrix eliminate_constrained(const SparseMatrix& a, const std::vector<char>& rows,
                                   const std::vector<char>& cols, bool unit_diagonal);

} // namespace fpsi
