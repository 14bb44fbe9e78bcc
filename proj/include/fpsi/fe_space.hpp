#pragma once

#include "fpsi/mesh.hpp"
#include "fpsi/types.hpp"

#include <array>
#include <functional>
#include <memory>
#include <vector>

namespace fpsi {

/// Lagrange P1/P2 space on a triangulated subdomain. Nodes are numbered
/// vertices first, then edge midpoints; vector DOFs are component-interleaved
/// (dof = components * node + component).
struct FeSpace {
    std::shared_ptr<const SubdomainMesh> mesh;
    int degree = 1;
    int components = 1;
    int num_nodes = 0;
    std::vector<Vec2> node_coords;
    /// 3 (P1) or 6 (P2) entries used per triangle; local nodes 3..5 sit on
    /// local edges 0..2.
    std::vector<std::array<int, 6>> element_nodes;
    /// Sorted list of Dirichlet DOFs.
    std::vector<int> constrained;
    std::vector<char> is_constrained;

    int n_dofs() const { return num_nodes * components; }
    int nodes_per_element() const { return degree == 1 ? 3 : 6; }
    int dof(int node, int component) const { return node * components + component; }
    /// Nodes on a boundary edge: both vertices, plus the midpoint for P2.
    std::vector<int> edge_nodes(const BoundaryEdge& e) const;
};

/// DOFs on edges whose displacement or pressure tag equals `dirichlet_tag`
/// are constrained; pass BoundaryTag::None for an unconstrained space.
FeSpace build_dof_map(std::shared_ptr<const SubdomainMesh> mesh, int degree, int components,
                      BoundaryTag dirichlet_tag);

/// Lagrange P1/P2 space on the interface trace. Nodes are trace vertices
/// (ordered along tau), then segment midpoints.
struct TraceSpace {
    std::shared_ptr<const InterfaceTrace> trace;
    int degree = 1;
    int num_nodes = 0;
    std::vector<Vec2> node_coords;
    /// [start, end, midpoint]; midpoint is -1 for P1.
    std::vector<std::array<int, 3>> segment_nodes;

    int n_dofs() const { return num_nodes; }
    int nodes_per_segment() const { return degree == 1 ? 2 : 3; }
    bool same_as(const TraceSpace& other) const
    {
        return trace == other.trace && degree == other.degree;
    }
};

TraceSpace build_trace_space(std::shared_ptr<const InterfaceTrace> trace, int degree);

/// Affine map data of one triangle.
struct ElementGeometry {
    Vec2 origin;
    Eigen::Matrix2d jacobian;
    double area = 0.0;
    /// Gradients of the barycentric coordinates.
    std::array<Vec2, 3> grad_bary;
};

ElementGeometry element_geometry(const SubdomainMesh& mesh, int triangle);

/// Barycentric coordinates of the reference point (r, s).
inline std::array<double, 3> barycentric(double r, double s) { return {1.0 - r - s, r, s}; }

/// Barycentric coordinates of physical point x in the element.
std::array<double, 3> barycentric_of(const ElementGeometry& g, const Vec2& x);

Vec2 map_to_physical(const ElementGeometry& g, const std::array<double, 3>& bary);

/// Values of the 3 or 6 local shape functions.
void shape_values(int degree, const std::array<double, 3>& bary, double* out);

void shape_gradients(int degree, const std::array<double, 3>& bary, const ElementGeometry& g, Vec2* out);

/// Values of the 2 or 3 local shape functions on a segment at xi in [0,1],
/// ordered [start, end, midpoint].
void trace_shape_values(int degree, double xi, double* out);

using ScalarField = std::function<double(const Vec2&)>;
using VectorField = std::function<Vec2(const Vec2&)>;
using ScalarGradient = std::function<Vec2(const Vec2&)>;
/// Row r holds the gradient of component r.
using VectorGradient = std::function<Eigen::Matrix2d(const Vec2&)>;

/// Nodal interpolation.
Vector interpolate(const FeSpace& space, const ScalarField& f);
Vector interpolate(const FeSpace& space, const VectorField& f);
Vector interpolate(const TraceSpace& space, const ScalarField& f);

/// Nodal values at constrained DOFs, zero elsewhere.
Vector dirichlet_values(const FeSpace& space, const ScalarField& f);
Vector dirichlet_values(const FeSpace& space, const VectorField& f);

/// Evaluates a discrete field at barycentric point `bary` of triangle t.
double evaluate_scalar(const FeSpace& space, const Vector& coeffs, int t, const std::array<double, 3>& bary);
Vec2 evaluate_vector(const FeSpace& space, const Vector& coeffs, int t, const std::array<double, 3>& bary);
Vec2 evaluate_scalar_gradient(const FeSpace& space, const Vector& coeffs, int t, const std::array<double, 3>& bary);
Eigen::Matrix2d evaluate_vector_gradient(const FeSpace& space, const Vector& coeffs, int t,
                                         const std::array<double, 3>& bary);

struct ErrorNorms {
    double l2 = 0.0;
    double h1 = 0.0;
};

/// L2 and H1 errors with the 19-point rule. Scalars use the full gradient;
/// vectors use ||e||_0^2 + ||D(e)||_0^2 with D the symmetric gradient.
ErrorNorms error_norms(const FeSpace& space, const Vector& coeffs, const ScalarField& exact,
                       const ScalarGradient& exact_grad);
ErrorNorms error_norms(const FeSpace& space, const Vector& coeffs, const VectorField& exact,
                       const VectorGradient& exact_grad);

} // namespace fpsi
