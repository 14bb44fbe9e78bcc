#include "fpsi/fe_space.hpp"

#include "fpsi/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace fpsi {

std::vector<int> FeSpace::edge_nodes(const BoundaryEdge& e) const
{
    if (degree == 1) return {e.v0, e.v1};
    return {e.v0, e.v1, mesh->num_vertices() + e.edge};
}

FeSpace build_dof_map(std::shared_ptr<const SubdomainMesh> mesh, int degree, int components,
                      BoundaryTag dirichlet_tag)
{
    if (!mesh) throw ConfigError("build_dof_map: null mesh");
    if (degree != 1 && degree != 2) {
        throw ConfigError("build_dof_map: unsupported degree " + std::to_string(degree));
    }
    if (components != 1 && components != 2) {
        throw ConfigError("build_dof_map: unsupported component count " + std::to_string(components));
    }

    FeSpace space;
    space.mesh = mesh;
    space.degree = degree;
    space.components = components;
    const int nv = mesh->num_vertices();
    space.num_nodes = degree == 1 ? nv : nv + mesh->num_edges();
    space.node_coords = mesh->vertices;
    if (degree == 2) {
        for (const auto& e : mesh->edges) {
            space.node_coords.push_back(0.5 * (mesh->vertices[e[0]] + mesh->vertices[e[1]]));
        }
    }

    space.element_nodes.resize(mesh->triangles.size());
    for (int t = 0; t < mesh->num_triangles(); ++t) {
        auto& nodes = space.element_nodes[static_cast<std::size_t>(t)];
        nodes.fill(-1);
        const auto& tri = mesh->triangles[static_cast<std::size_t>(t)];
        for (int k = 0; k < 3; ++k) nodes[k] = tri[k];
        if (degree == 2) {
            for (int k = 0; k < 3; ++k) nodes[3 + k] = nv + mesh->triangle_edges[static_cast<std::size_t>(t)][k];
        }
    }

    space.is_constrained.assign(static_cast<std::size_t>(space.n_dofs()), 0);
    if (dirichlet_tag != BoundaryTag::None) {
        for (const auto& e : mesh->boundary_edges) {
            if (e.tags.displacement != dirichlet_tag && e.tags.pressure != dirichlet_tag) continue;
            for (int node : space.edge_nodes(e)) {
                for (int c = 0; c < components; ++c) space.is_constrained[static_cast<std::size_t>(space.dof(node, c))] = 1;
            }
        }
    }
    for (int i = 0; i < space.n_dofs(); ++i) {
        if (space.is_constrained[static_cast<std::size_t>(i)]) space.constrained.push_back(i);
    }
    return space;
}

TraceSpace build_trace_space(std::shared_ptr<const InterfaceTrace> trace, int degree)
{
    if (!trace) throw ConfigError("build_trace_space: null trace");
    if (degree != 1 && degree != 2) {
        throw ConfigError("build_trace_space: unsupported degree " + std::to_string(degree));
    }
    TraceSpace space;
    space.trace = trace;
    space.degree = degree;
    const int nv = trace->num_vertices();
    space.node_coords = trace->vertices;
    for (int s = 0; s < trace->num_segments(); ++s) {
        const auto& seg = trace->segments[static_cast<std::size_t>(s)];
        int mid = -1;
        if (degree == 2) {
            mid = nv + s;
            space.node_coords.push_back(0.5 * (trace->vertices[seg.a] + trace->vertices[seg.b]));
        }
        space.segment_nodes.push_back({seg.a, seg.b, mid});
    }
    space.num_nodes = static_cast<int>(space.node_coords.size());
    return space;
}

ElementGeometry element_geometry(const SubdomainMesh& mesh, int triangle)
{
    const auto& tri = mesh.triangles[static_cast<std::size_t>(triangle)];
    const Vec2 a = mesh.vertices[tri[0]], b = mesh.vertices[tri[1]], c = mesh.vertices[tri[2]];
    ElementGeometry g;
    g.origin = a;
    g.jacobian.col(0) = b - a;
    g.jacobian.col(1) = c - a;
    const double det = g.jacobian.determinant();
    if (!(det > 0.0)) throw NumericalError("element_geometry: degenerate or clockwise triangle");
    g.area = 0.5 * det;
    // Rows of J^{-1} are the gradients of the reference coordinates r and s.
    const Eigen::Matrix2d jinv = g.jacobian.inverse();
    g.grad_bary[1] = jinv.row(0).transpose();
    g.grad_bary[2] = jinv.row(1).transpose();
    g.grad_bary[0] = -g.grad_bary[1] - g.grad_bary[2];
    return g;
}

std::array<double, 3> barycentric_of(const ElementGeometry& g, const Vec2& x)
{
    const Vec2 rs = g.jacobian.inverse() * (x - g.origin);
    return barycentric(rs.x(), rs.y());
}

Vec2 map_to_physical(const ElementGeometry& g, const std::array<double, 3>& bary)
{
    return g.origin + g.jacobian * Vec2(bary[1], bary[2]);
}

void shape_values(int degree, const std::array<double, 3>& L, double* out)
{
    if (degree == 1) {
        out[0] = L[0];
        out[1] = L[1];
        out[2] = L[2];
        return;
    }
    for (int i = 0; i < 3; ++i) out[i] = L[i] * (2.0 * L[i] - 1.0);
    for (int k = 0; k < 3; ++k) out[3 + k] = 4.0 * L[k] * L[(k + 1) % 3];
}

void shape_gradients(int degree, const std::array<double, 3>& L, const ElementGeometry& g, Vec2* out)
{
    if (degree == 1) {
        for (int i = 0; i < 3; ++i) out[i] = g.grad_bary[i];
        return;
    }
    for (int i = 0; i < 3; ++i) out[i] = (4.0 * L[i] - 1.0) * g.grad_bary[i];
    for (int k = 0; k < 3; ++k) {
        const int m = (k + 1) % 3;
        out[3 + k] = 4.0 * (L[m] * g.grad_bary[k] + L[k] * g.grad_bary[m]);
    }
}

void trace_shape_values(int degree, double xi, double* out)
{
    if (degree == 1) {
        out[0] = 1.0 - xi;
        out[1] = xi;
        return;
    }
    out[0] = (1.0 - xi) * (1.0 - 2.0 * xi);
    out[1] = xi * (2.0 * xi - 1.0);
    out[2] = 4.0 * xi * (1.0 - xi);
}

Vector interpolate(const FeSpace& space, const ScalarField& f)
{
    if (space.components != 1) throw ConfigError("interpolate: scalar field on a vector space");
    Vector v(space.n_dofs());
    for (int n = 0; n < space.num_nodes; ++n) v[n] = f(space.node_coords[static_cast<std::size_t>(n)]);
    return v;
}

Vector interpolate(const FeSpace& space, const VectorField& f)
{
    if (space.components != 2) throw ConfigError("interpolate: vector field on a scalar space");
    Vector v(space.n_dofs());
    for (int n = 0; n < space.num_nodes; ++n) {
        const Vec2 val = f(space.node_coords[static_cast<std::size_t>(n)]);
        v[space.dof(n, 0)] = val.x();
        v[space.dof(n, 1)] = val.y();
    }
    return v;
}

Vector interpolate(const TraceSpace& space, const ScalarField& f)
{
    Vector v(space.n_dofs());
    for (int n = 0; n < space.num_nodes; ++n) v[n] = f(space.node_coords[static_cast<std::size_t>(n)]);
    return v;
}

Vector dirichlet_values(const FeSpace& space, const ScalarField& f)
{
    Vector v = Vector::Zero(space.n_dofs());
    if (space.constrained.empty()) return v;
    const Vector full = interpolate(space, f);
    for (int i : space.constrained) v[i] = full[i];
    return v;
}

Vector dirichlet_values(const FeSpace& space, const VectorField& f)
{
    Vector v = Vector::Zero(space.n_dofs());
    if (space.constrained.empty()) return v;
    const Vector full = interpolate(space, f);
    for (int i : space.constrained) v[i] = full[i];
    return v;
}

double evaluate_scalar(const FeSpace& space, const Vector& coeffs, int t, const std::array<double, 3>& bary)
{
    double phi[6];
    shape_values(space.degree, bary, phi);
    const auto& nodes = space.element_nodes[static_cast<std::size_t>(t)];
    double val = 0.0;
    for (int a = 0; a < space.nodes_per_element(); ++a) val += coeffs[nodes[a]] * phi[a];
    return val;
}

Vec2 evaluate_vector(const FeSpace& space, const Vector& coeffs, int t, const std::array<double, 3>& bary)
{
    double phi[6];
    shape_values(space.degree, bary, phi);
    const auto& nodes = space.element_nodes[static_cast<std::size_t>(t)];
    Vec2 val = Vec2::Zero();
    for (int a = 0; a < space.nodes_per_element(); ++a) {
        val.x() += coeffs[space.dof(nodes[a], 0)] * phi[a];
        val.y() += coeffs[space.dof(nodes[a], 1)] * phi[a];
    }
    return val;
}

Vec2 evaluate_scalar_gradient(const FeSpace& space, const Vector& coeffs, int t, const std::array<double, 3>& bary)
{
    const ElementGeometry g = element_geometry(*space.mesh, t);
    Vec2 grad[6];
    shape_gradients(space.degree, bary, g, grad);
    const auto& nodes = space.element_nodes[static_cast<std::size_t>(t)];
    Vec2 val = Vec2::Zero();
    for (int a = 0; a < space.nodes_per_element(); ++a) val += coeffs[nodes[a]] * grad[a];
    return val;
}

Eigen::Matrix2d evaluate_vector_gradient(const FeSpace& space, const Vector& coeffs, int t,
                                         const std::array<double, 3>& bary)
{
    const ElementGeometry g = element_geometry(*space.mesh, t);
    Vec2 grad[6];
    shape_gradients(space.degree, bary, g, grad);
    const auto& nodes = space.element_nodes[static_cast<std::size_t>(t)];
    Eigen::Matrix2d val = Eigen::Matrix2d::Zero();
    for (int a = 0; a < space.nodes_per_element(); ++a) {
        val.row(0) += coeffs[space.dof(nodes[a], 0)] * grad[a].transpose();
        val.row(1) += coeffs[space.dof(nodes[a], 1)] * grad[a].transpose();
    }
    return val;
}

ErrorNorms error_norms(const FeSpace& space, const Vector& coeffs, const ScalarField& exact,
                       const ScalarGradient& exact_grad)
{
    if (space.components != 1) throw ConfigError("error_norms: scalar field on a vector space");
    const auto& rule = triangle_rule_degree9();
    double l2 = 0.0, semi = 0.0;
    for (int t = 0; t < space.mesh->num_triangles(); ++t) {
        const ElementGeometry g = element_geometry(*space.mesh, t);
        for (const auto& q : rule.points) {
            const auto L = barycentric(q.r, q.s);
            const Vec2 x = map_to_physical(g, L);
            const double w = 2.0 * g.area * q.weight;
            const double e = evaluate_scalar(space, coeffs, t, L) - exact(x);
            const Vec2 ge = evaluate_scalar_gradient(space, coeffs, t, L) - exact_grad(x);
            l2 += w * e * e;
            semi += w * ge.squaredNorm();
        }
    }
    return {std::sqrt(l2), std::sqrt(l2 + semi)};
}

ErrorNorms error_norms(const FeSpace& space, const Vector& coeffs, const VectorField& exact,
                       const VectorGradient& exact_grad)
{
    if (space.components != 2) throw ConfigError("error_norms: vector field on a scalar space");
    const auto& rule = triangle_rule_degree9();
    double l2 = 0.0, semi = 0.0;
    for (int t = 0; t < space.mesh->num_triangles(); ++t) {
        const ElementGeometry g = element_geometry(*space.mesh, t);
        for (const auto& q : rule.points) {
            const auto L = barycentric(q.r, q.s);
            const Vec2 x = map_to_physical(g, L);
            const double w = 2.0 * g.area * q.weight;
            const Vec2 e = evaluate_vector(space, coeffs, t, L) - exact(x);
            const Eigen::Matrix2d ge = evaluate_vector_gradient(space, coeffs, t, L) - exact_grad(x);
            const Eigen::Matrix2d de = 0.5 * (ge + ge.transpose());
            l2 += w * e.squaredNorm();
            semi += w * de.squaredNorm();
        }
    }
    return {std::sqrt(l2), std::sqrt(l2 + semi)};
}

} // namespace fpsi
