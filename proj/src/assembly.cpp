#include "fpsi/assembly.hpp"

#include "fpsi/quadrature.hpp"

namespace fpsi {

namespace {

SparseMatrix from_triplets(int rows, int cols, const std::vector<Triplet>& trips)
{
    SparseMatrix m(rows, cols);
    m.setFromTriplets(trips.begin(), trips.end());
    m.makeCompressed();
    return m;
}

// Calls body(g, bary, weight, phi, grad) at every assembly quadrature point.
template <class Body>
void for_each_qp(const FeSpace& space, int t, Body&& body)
{
    const ElementGeometry g = element_geometry(*space.mesh, t);
    double phi[6];
    Vec2 grad[6];
    for (const auto& q : triangle_rule_degree5().points) {
        const auto L = barycentric(q.r, q.s);
        shape_values(space.degree, L, phi);
        shape_gradients(space.degree, L, g, grad);
        body(g, L, 2.0 * g.area * q.weight, phi, grad);
    }
}

const SubdomainMesh& require_mesh(const FeSpace& space)
{
    if (!space.mesh) throw ConfigError("assembly: space has no mesh");
    return *space.mesh;
}

} // namespace

SparseMatrix assemble_mass(const FeSpace& space, double coeff)
{
    const auto& mesh = require_mesh(space);
    const int nb = space.nodes_per_element();
    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(mesh.num_triangles() * nb * nb * space.components));
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        Eigen::Matrix<double, 6, 6> ke = Eigen::Matrix<double, 6, 6>::Zero();
        for_each_qp(space, t, [&](const ElementGeometry&, const auto&, double w, const double* phi, const Vec2*) {
            for (int a = 0; a < nb; ++a)
                for (int b = 0; b < nb; ++b) ke(a, b) += w * coeff * phi[a] * phi[b];
        });
        const auto& nodes = space.element_nodes[static_cast<std::size_t>(t)];
        for (int a = 0; a < nb; ++a)
            for (int b = 0; b < nb; ++b)
                for (int c = 0; c < space.components; ++c)
                    trips.emplace_back(space.dof(nodes[a], c), space.dof(nodes[b], c), ke(a, b));
    }
    return from_triplets(space.n_dofs(), space.n_dofs(), trips);
}

SparseMatrix assemble_elasticity(const FeSpace& space, double nu, double lambda)
{
    const auto& mesh = require_mesh(space);
    if (space.components != 2) throw ConfigError("assemble_elasticity: vector space required");
    const int nb = space.nodes_per_element();
    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(mesh.num_triangles() * 4 * nb * nb));
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        Eigen::Matrix<double, 12, 12> ke = Eigen::Matrix<double, 12, 12>::Zero();
        for_each_qp(space, t, [&](const ElementGeometry&, const auto&, double w, const double*, const Vec2* g) {
            for (int a = 0; a < nb; ++a)
                for (int c = 0; c < 2; ++c)
                    for (int b = 0; b < nb; ++b)
                        for (int d = 0; d < 2; ++d) {
                            // D(psi_a e_c) : D(psi_b e_d)
                            const double dd = 0.5 * ((c == d ? g[a].dot(g[b]) : 0.0) + g[a][d] * g[b][c]);
                            ke(2 * a + c, 2 * b + d) += w * (2.0 * nu * dd + lambda * g[a][c] * g[b][d]);
                        }
        });
        const auto& nodes = space.element_nodes[static_cast<std::size_t>(t)];
        for (int a = 0; a < nb; ++a)
            for (int c = 0; c < 2; ++c)
                for (int b = 0; b < nb; ++b)
                    for (int d = 0; d < 2; ++d)
                        trips.emplace_back(space.dof(nodes[a], c), space.dof(nodes[b], d), ke(2 * a + c, 2 * b + d));
    }
    return from_triplets(space.n_dofs(), space.n_dofs(), trips);
}

SparseMatrix assemble_stokes_stiffness(const FeSpace& space, double nu)
{
    return assemble_elasticity(space, nu, 0.0);
}

SparseMatrix assemble_scalar_stiffness(const FeSpace& space, double kappa)
{
    const auto& mesh = require_mesh(space);
    if (space.components != 1) throw ConfigError("assemble_scalar_stiffness: scalar space required");
    const int nb = space.nodes_per_element();
    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(mesh.num_triangles() * nb * nb));
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        Eigen::Matrix<double, 6, 6> ke = Eigen::Matrix<double, 6, 6>::Zero();
        for_each_qp(space, t, [&](const ElementGeometry&, const auto&, double w, const double*, const Vec2* g) {
            for (int a = 0; a < nb; ++a)
                for (int b = 0; b < nb; ++b) ke(a, b) += w * kappa * g[a].dot(g[b]);
        });
        const auto& nodes = space.element_nodes[static_cast<std::size_t>(t)];
        for (int a = 0; a < nb; ++a)
            for (int b = 0; b < nb; ++b) trips.emplace_back(nodes[a], nodes[b], ke(a, b));
    }
    return from_triplets(space.n_dofs(), space.n_dofs(), trips);
}

SparseMatrix assemble_div_coupling(const FeSpace& vector_space, const FeSpace& scalar_space, double alpha)
{
    const auto& mesh = require_mesh(vector_space);
    if (vector_space.components != 2 || scalar_space.components != 1) {
        throw ConfigError("assemble_div_coupling: expects a vector and a scalar space");
    }
    if (scalar_space.mesh != vector_space.mesh) throw ConfigError("assemble_div_coupling: spaces on different meshes");
    const int nv = vector_space.nodes_per_element();
    const int ns = scalar_space.nodes_per_element();
    std::vector<Triplet> trips;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        Eigen::Matrix<double, 12, 6> ke = Eigen::Matrix<double, 12, 6>::Zero();
        const ElementGeometry g = element_geometry(mesh, t);
        double phi_s[6];
        Vec2 grad_v[6];
        for (const auto& q : triangle_rule_degree5().points) {
            const auto L = barycentric(q.r, q.s);
            shape_values(scalar_space.degree, L, phi_s);
            shape_gradients(vector_space.degree, L, g, grad_v);
            const double w = 2.0 * g.area * q.weight;
            for (int a = 0; a < nv; ++a)
                for (int c = 0; c < 2; ++c)
                    for (int b = 0; b < ns; ++b) ke(2 * a + c, b) += w * alpha * grad_v[a][c] * phi_s[b];
        }
        const auto& vn = vector_space.element_nodes[static_cast<std::size_t>(t)];
        const auto& sn = scalar_space.element_nodes[static_cast<std::size_t>(t)];
        for (int a = 0; a < nv; ++a)
            for (int c = 0; c < 2; ++c)
                for (int b = 0; b < ns; ++b) trips.emplace_back(vector_space.dof(vn[a], c), sn[b], ke(2 * a + c, b));
    }
    return from_triplets(vector_space.n_dofs(), scalar_space.n_dofs(), trips);
}

Vector assemble_load(const FeSpace& space, const ScalarField& f)
{
    const auto& mesh = require_mesh(space);
    if (space.components != 1) throw ConfigError("assemble_load: scalar source on a vector space");
    Vector rhs = Vector::Zero(space.n_dofs());
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& nodes = space.element_nodes[static_cast<std::size_t>(t)];
        for_each_qp(space, t, [&](const ElementGeometry& g, const auto& L, double w, const double* phi, const Vec2*) {
            const double fx = f(map_to_physical(g, L));
            for (int a = 0; a < space.nodes_per_element(); ++a) rhs[nodes[a]] += w * fx * phi[a];
        });
    }
    return rhs;
}

Vector assemble_load(const FeSpace& space, const VectorField& f)
{
    const auto& mesh = require_mesh(space);
    if (space.components != 2) throw ConfigError("assemble_load: vector source on a scalar space");
    Vector rhs = Vector::Zero(space.n_dofs());
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& nodes = space.element_nodes[static_cast<std::size_t>(t)];
        for_each_qp(space, t, [&](const ElementGeometry& g, const auto& L, double w, const double* phi, const Vec2*) {
            const Vec2 fx = f(map_to_physical(g, L));
            for (int a = 0; a < space.nodes_per_element(); ++a) {
                rhs[space.dof(nodes[a], 0)] += w * fx.x() * phi[a];
                rhs[space.dof(nodes[a], 1)] += w * fx.y() * phi[a];
            }
        });
    }
    return rhs;
}

namespace {

// Calls body(nodes, x, n, weight, phi) at every Gauss point of every boundary
// edge carrying `tag`. phi is ordered like FeSpace::edge_nodes.
template <class Body>
void for_each_boundary_qp(const FeSpace& space, BoundaryTag tag, Body&& body)
{
    const auto& mesh = require_mesh(space);
    for (const auto& e : mesh.boundary_edges) {
        if (e.tags.displacement != tag && e.tags.pressure != tag) continue;
        const auto nodes = space.edge_nodes(e);
        const Vec2 a = mesh.vertices[e.v0], b = mesh.vertices[e.v1];
        const Vec2 n = mesh.outward_normal(e);
        const double len = mesh.length(e);
        double phi[3];
        for (const auto& q : gauss3().points) {
            trace_shape_values(space.degree, q.x, phi);
            body(nodes, a + q.x * (b - a), n, len * q.weight, phi);
        }
    }
}

} // namespace

Vector assemble_boundary_load(const FeSpace& space, BoundaryTag tag, const ScalarFlux& g)
{
    if (space.components != 1) throw ConfigError("assemble_boundary_load: scalar flux on a vector space");
    Vector rhs = Vector::Zero(space.n_dofs());
    for_each_boundary_qp(space, tag, [&](const std::vector<int>& nodes, const Vec2& x, const Vec2& n, double w,
                                         const double* phi) {
        const double gx = g(x, n);
        for (std::size_t a = 0; a < nodes.size(); ++a) rhs[nodes[a]] += w * gx * phi[a];
    });
    return rhs;
}

Vector assemble_boundary_load(const FeSpace& space, BoundaryTag tag, const VectorFlux& g)
{
    if (space.components != 2) throw ConfigError("assemble_boundary_load: vector flux on a scalar space");
    Vector rhs = Vector::Zero(space.n_dofs());
    for_each_boundary_qp(space, tag, [&](const std::vector<int>& nodes, const Vec2& x, const Vec2& n, double w,
                                         const double* phi) {
        const Vec2 gx = g(x, n);
        for (std::size_t a = 0; a < nodes.size(); ++a) {
            rhs[space.dof(nodes[a], 0)] += w * gx.x() * phi[a];
            rhs[space.dof(nodes[a], 1)] += w * gx.y() * phi[a];
        }
    });
    return rhs;
}

namespace {

// Calls body(s, x, weight, trace_phi) at every Gauss point of every
// interface segment.
template <class Body>
void for_each_trace_qp(const TraceSpace& space, Body&& body)
{
    if (!space.trace) throw ConfigError("assembly: trace space has no trace");
    const auto& tr = *space.trace;
    double phi[3];
    for (int s = 0; s < tr.num_segments(); ++s) {
        const auto& seg = tr.segments[static_cast<std::size_t>(s)];
        const Vec2 a = tr.vertices[seg.a], b = tr.vertices[seg.b];
        const double len = tr.segment_length(s);
        for (const auto& q : gauss3().points) {
            trace_shape_values(space.degree, q.x, phi);
            body(s, Vec2(a + q.x * (b - a)), len * q.weight, phi);
        }
    }
}

int bulk_triangle(const TraceSpace& space, int s, InterfaceSide side)
{
    const auto& seg = space.trace->segments[static_cast<std::size_t>(s)];
    return side == InterfaceSide::Fluid ? seg.fluid_triangle : seg.poro_triangle;
}

} // namespace

SparseMatrix assemble_trace_mass(const TraceSpace& rows, const TraceSpace& cols, double coeff)
{
    if (!rows.trace || rows.trace != cols.trace) throw ConfigError("assemble_trace_mass: spaces on different traces");
    const int nr = rows.nodes_per_segment();
    const int nc = cols.nodes_per_segment();
    std::vector<Triplet> trips;
    const auto& tr = *rows.trace;
    double phi_r[3], phi_c[3];
    for (int s = 0; s < tr.num_segments(); ++s) {
        const double len = tr.segment_length(s);
        const auto& rn = rows.segment_nodes[static_cast<std::size_t>(s)];
        const auto& cn = cols.segment_nodes[static_cast<std::size_t>(s)];
        for (const auto& q : gauss3().points) {
            trace_shape_values(rows.degree, q.x, phi_r);
            trace_shape_values(cols.degree, q.x, phi_c);
            for (int a = 0; a < nr; ++a)
                for (int b = 0; b < nc; ++b) trips.emplace_back(rn[a], cn[b], coeff * len * q.weight * phi_r[a] * phi_c[b]);
        }
    }
    return from_triplets(rows.n_dofs(), cols.n_dofs(), trips);
}

SparseMatrix assemble_trace_vector_coupling(const TraceSpace& rows, const FeSpace& bulk, InterfaceSide side,
                                            const Vec2& direction)
{
    if (bulk.components != 2) throw ConfigError("assemble_trace_vector_coupling: vector space required");
    const int nb = bulk.nodes_per_element();
    std::vector<Triplet> trips;
    for_each_trace_qp(rows, [&](int s, const Vec2& x, double w, const double* phi_r) {
        const int t = bulk_triangle(rows, s, side);
        const ElementGeometry g = element_geometry(*bulk.mesh, t);
        double phi[6];
        shape_values(bulk.degree, barycentric_of(g, x), phi);
        const auto& rn = rows.segment_nodes[static_cast<std::size_t>(s)];
        const auto& bn = bulk.element_nodes[static_cast<std::size_t>(t)];
        for (int a = 0; a < rows.nodes_per_segment(); ++a)
            for (int b = 0; b < nb; ++b)
                for (int c = 0; c < 2; ++c) {
                    const double v = w * phi_r[a] * phi[b] * direction[c];
                    if (v != 0.0) trips.emplace_back(rn[a], bulk.dof(bn[b], c), v);
                }
    });
    return from_triplets(rows.n_dofs(), bulk.n_dofs(), trips);
}

SparseMatrix assemble_trace_scalar_coupling(const TraceSpace& rows, const FeSpace& bulk, InterfaceSide side)
{
    if (bulk.components != 1) throw ConfigError("assemble_trace_scalar_coupling: scalar space required");
    const int nb = bulk.nodes_per_element();
    std::vector<Triplet> trips;
    for_each_trace_qp(rows, [&](int s, const Vec2& x, double w, const double* phi_r) {
        const int t = bulk_triangle(rows, s, side);
        const ElementGeometry g = element_geometry(*bulk.mesh, t);
        double phi[6];
        shape_values(bulk.degree, barycentric_of(g, x), phi);
        const auto& rn = rows.segment_nodes[static_cast<std::size_t>(s)];
        const auto& bn = bulk.element_nodes[static_cast<std::size_t>(t)];
        for (int a = 0; a < rows.nodes_per_segment(); ++a)
            for (int b = 0; b < nb; ++b) {
                const double v = w * phi_r[a] * phi[b];
                if (v != 0.0) trips.emplace_back(rn[a], bn[b], v);
            }
    });
    return from_triplets(rows.n_dofs(), bulk.n_dofs(), trips);
}

Vector assemble_trace_load(const TraceSpace& space, const ScalarField& f)
{
    Vector rhs = Vector::Zero(space.n_dofs());
    for_each_trace_qp(space, [&](int s, const Vec2& x, double w, const double* phi) {
        const double fx = f(x);
        const auto& nodes = space.segment_nodes[static_cast<std::size_t>(s)];
        for (int a = 0; a < space.nodes_per_segment(); ++a) rhs[nodes[a]] += w * fx * phi[a];
    });
    return rhs;
}

InterfaceMatrices assemble_interface_matrices(const FeSpace& space_u, const FeSpace& space_eta,
                                              const FeSpace& space_pp, const TraceSpace& space_g1,
                                              const TraceSpace& space_g2, const TraceSpace& space_lambda,
                                              double beta)
{
    if (!space_g1.same_as(space_lambda)) {
        throw ConfigError("assemble_interface_matrices: the g1 and lambda spaces must be identical");
    }
    if (space_g1.trace != space_g2.trace) {
        throw ConfigError("assemble_interface_matrices: multiplier spaces live on different traces");
    }
    if (!(beta > 0.0)) throw ConfigError("assemble_interface_matrices: beta must be positive");
    const auto& tr = *space_g1.trace;
    InterfaceMatrices m;
    m.G_uN = assemble_trace_vector_coupling(space_g1, space_u, InterfaceSide::Fluid, tr.n_f);
    m.G_etaN = assemble_trace_vector_coupling(space_g1, space_eta, InterfaceSide::Poro, tr.n_p);
    m.G_utau = assemble_trace_vector_coupling(space_g2, space_u, InterfaceSide::Fluid, tr.tau);
    m.G_etatau = assemble_trace_vector_coupling(space_g2, space_eta, InterfaceSide::Poro, tr.tau);
    m.G_p = assemble_trace_scalar_coupling(space_lambda, space_pp, InterfaceSide::Poro);
    m.G_1lambda = assemble_trace_mass(space_lambda, space_g1, 1.0);
    m.M_g2 = assemble_trace_mass(space_g2, space_g2, 1.0 / beta);
    return m;
}

SparseMatrix eliminate_constrained(const SparseMatrix& a, const std::vector<char>& rows,
                                   const std::vector<char>& cols, bool unit_diagonal)
{
    if (!rows.empty() && static_cast<Eigen::Index>(rows.size()) != a.rows()) {
        throw ConfigError("eliminate_constrained: row mask size mismatch");
    }
    if (!cols.empty() && static_cast<Eigen::Index>(cols.size()) != a.cols()) {
        throw ConfigError("eliminate_constrained: column mask size mismatch");
    }
    if (unit_diagonal && a.rows() != a.cols()) throw ConfigError("eliminate_constrained: unit diagonal needs a square block");
    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(a.nonZeros()));
    for (int i = 0; i < a.outerSize(); ++i) {
        const bool row_out = !rows.empty() && rows[static_cast<std::size_t>(i)];
        if (row_out) continue;
        for (SparseMatrix::InnerIterator it(a, i); it; ++it) {
            const int j = static_cast<int>(it.col());
            if (!cols.empty() && cols[static_cast<std::size_t>(j)]) continue;
            trips.emplace_back(i, j, it.value());
        }
    }
    if (unit_diagonal) {
        for (int i = 0; i < a.rows(); ++i) {
            const bool r = !rows.empty() && rows[static_cast<std::size_t>(i)];
            if (r) trips.emplace_back(i, i, 1.0);
        }
    }
    return from_triplets(static_cast<int>(a.rows()), static_cast<int>(a.cols()), trips);
}

} // namespace fpsi
