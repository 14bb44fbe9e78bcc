#include "fpsi/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace fpsi {

const char* to_string(BoundaryTag tag)
{
    switch (tag) {
    case BoundaryTag::None: return "None";
    case BoundaryTag::FluidDirichlet: return "FluidDirichlet";
    case BoundaryTag::FluidNeumann: return "FluidNeumann";
    case BoundaryTag::StructDirichlet: return "StructDirichlet";
    case BoundaryTag::StructNeumann: return "StructNeumann";
    case BoundaryTag::PoreDirichlet: return "PoreDirichlet";
    case BoundaryTag::PoreNeumann: return "PoreNeumann";
    case BoundaryTag::Interface: return "Interface";
    }
    return "?";
}

double SubdomainMesh::triangle_area(int t) const
{
    const auto& tri = triangles[static_cast<std::size_t>(t)];
    const Vec2 a = vertices[tri[0]], b = vertices[tri[1]], c = vertices[tri[2]];
    return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

Vec2 SubdomainMesh::midpoint(const BoundaryEdge& e) const
{
    return 0.5 * (vertices[e.v0] + vertices[e.v1]);
}

Vec2 SubdomainMesh::outward_normal(const BoundaryEdge& e) const
{
    const Vec2 d = vertices[e.v1] - vertices[e.v0];
    return Vec2(d.y(), -d.x()).normalized();
}

double SubdomainMesh::length(const BoundaryEdge& e) const
{
    return (vertices[e.v1] - vertices[e.v0]).norm();
}

SubdomainMesh build_rect_mesh(const Rect& rect, int nx, int ny)
{
    if (nx < 1 || ny < 1) {
        throw ConfigError("build_rect_mesh: nx and ny must be >= 1 (got " + std::to_string(nx) + ", " +
                          std::to_string(ny) + ")");
    }
    if (!(rect.x0 < rect.x1) || !(rect.y0 < rect.y1)) {
        throw ConfigError("build_rect_mesh: degenerate rectangle");
    }

    SubdomainMesh mesh;
    mesh.rect = rect;
    mesh.nx = nx;
    mesh.ny = ny;
    const double dx = (rect.x1 - rect.x0) / nx;
    const double dy = (rect.y1 - rect.y0) / ny;
    mesh.h = std::hypot(dx, dy);

    mesh.vertices.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
    for (int j = 0; j <= ny; ++j) {
        // Pin the last row/column to the exact rectangle bounds.
        const double y = (j == ny) ? rect.y1 : rect.y0 + j * dy;
        for (int i = 0; i <= nx; ++i) {
            const double x = (i == nx) ? rect.x1 : rect.x0 + i * dx;
            mesh.vertices.emplace_back(x, y);
        }
    }

    auto vid = [nx](int i, int j) { return j * (nx + 1) + i; };
    mesh.triangles.reserve(static_cast<std::size_t>(2 * nx * ny));
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int v00 = vid(i, j), v10 = vid(i + 1, j), v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
            mesh.triangles.push_back({v00, v10, v11});
            mesh.triangles.push_back({v00, v11, v01});
        }
    }

    std::map<std::pair<int, int>, int> edge_index;
    std::vector<int> edge_owner_count;
    std::vector<std::pair<int, int>> edge_first_owner;
    mesh.triangle_edges.resize(mesh.triangles.size());
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
        for (int k = 0; k < 3; ++k) {
            const int a = tri[k], b = tri[(k + 1) % 3];
            const auto key = std::minmax(a, b);
            auto [it, inserted] = edge_index.try_emplace({key.first, key.second}, mesh.num_edges());
            if (inserted) {
                mesh.edges.push_back({key.first, key.second});
                edge_owner_count.push_back(0);
                edge_first_owner.emplace_back(t, k);
            }
            ++edge_owner_count[static_cast<std::size_t>(it->second)];
            mesh.triangle_edges[static_cast<std::size_t>(t)][k] = it->second;
        }
    }

    for (int e = 0; e < mesh.num_edges(); ++e) {
        if (edge_owner_count[static_cast<std::size_t>(e)] != 1) continue;
        const auto [t, k] = edge_first_owner[static_cast<std::size_t>(e)];
        const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
        BoundaryEdge be;
        be.v0 = tri[k];
        be.v1 = tri[(k + 1) % 3];
        be.triangle = t;
        be.local_edge = k;
        be.edge = e;
        mesh.boundary_edges.push_back(be);
    }
    return mesh;
}

EdgeTagger tagger_from_sides(const Rect& rect, const SideTags& sides)
{
    return [rect, sides](const Vec2& m) -> std::optional<EdgeTags> {
        const double tol = 1e-10 * std::max(rect.x1 - rect.x0, rect.y1 - rect.y0);
        if (std::abs(m.x() - rect.x0) < tol) return sides.left;
        if (std::abs(m.x() - rect.x1) < tol) return sides.right;
        if (std::abs(m.y() - rect.y0) < tol) return sides.bottom;
        if (std::abs(m.y() - rect.y1) < tol) return sides.top;
        return std::nullopt;
    };
}

SubdomainMesh tag_boundaries(SubdomainMesh mesh, const EdgeTagger& tagger)
{
    for (auto& e : mesh.boundary_edges) {
        const Vec2 m = mesh.midpoint(e);
        auto tags = tagger(m);
        if (!tags || tags->displacement == BoundaryTag::None) {
            std::ostringstream os;
            os << "tag_boundaries: untagged boundary edge with midpoint (" << m.x() << ", " << m.y() << ")";
            throw ConfigError(os.str());
        }
        e.tags = *tags;
    }
    return mesh;
}

double InterfaceTrace::segment_length(int s) const
{
    const auto& seg = segments[static_cast<std::size_t>(s)];
    return (vertices[seg.b] - vertices[seg.a]).norm();
}

double InterfaceTrace::length() const
{
    double sum = 0.0;
    for (int s = 0; s < num_segments(); ++s) sum += segment_length(s);
    return sum;
}

namespace {

std::vector<const BoundaryEdge*> interface_edges(const SubdomainMesh& mesh)
{
    std::vector<const BoundaryEdge*> out;
    for (const auto& e : mesh.boundary_edges) {
        if (e.tags.displacement == BoundaryTag::Interface) out.push_back(&e);
    }
    return out;
}

} // namespace

InterfaceTrace extract_interface_trace(const SubdomainMesh& mesh_f, const SubdomainMesh& mesh_p, bool flip_tangent)
{
    const auto ef = interface_edges(mesh_f);
    const auto ep = interface_edges(mesh_p);
    if (ef.empty() || ep.empty()) {
        throw ConfigError("extract_interface_trace: a mesh has no Interface-tagged edges");
    }
    if (ef.size() != ep.size()) {
        throw ConfigError("extract_interface_trace: non-matching interface discretizations (" +
                          std::to_string(ef.size()) + " fluid vs " + std::to_string(ep.size()) +
                          " structure segments); a conforming interface is required");
    }

    InterfaceTrace trace;
    trace.n_f = mesh_f.outward_normal(*ef.front());
    for (const auto* e : ef) {
        if ((mesh_f.outward_normal(*e) - trace.n_f).norm() > 1e-12) {
            throw ConfigError("extract_interface_trace: the interface must be a single straight segment");
        }
    }
    trace.n_p = -trace.n_f;
    trace.tau = Vec2(-trace.n_f.y(), trace.n_f.x());
    if (flip_tangent) trace.tau = -trace.tau;

    // Order fluid interface edges along tau.
    auto along = [&](const Vec2& x) { return x.dot(trace.tau); };
    std::vector<const BoundaryEdge*> sorted = ef;
    std::sort(sorted.begin(), sorted.end(), [&](const BoundaryEdge* a, const BoundaryEdge* b) {
        return along(mesh_f.midpoint(*a)) < along(mesh_f.midpoint(*b));
    });

    const double tol = 1e-12 * std::max(1.0, mesh_f.h);
    auto find_poro_vertex = [&](const Vec2& x) {
        for (const auto* e : ep) {
            if ((mesh_p.vertices[e->v0] - x).norm() < tol) return e->v0;
            if ((mesh_p.vertices[e->v1] - x).norm() < tol) return e->v1;
        }
        return -1;
    };
    auto find_poro_edge = [&](int pa, int pb) -> const BoundaryEdge* {
        for (const auto* e : ep) {
            if ((e->v0 == pa && e->v1 == pb) || (e->v0 == pb && e->v1 == pa)) return e;
        }
        return nullptr;
    };

    for (std::size_t s = 0; s < sorted.size(); ++s) {
        const BoundaryEdge& e = *sorted[s];
        int fa = e.v0, fb = e.v1;
        if (along(mesh_f.vertices[fb]) < along(mesh_f.vertices[fa])) std::swap(fa, fb);
        if (s == 0) {
            trace.vertices.push_back(mesh_f.vertices[fa]);
            trace.fluid_vertex.push_back(fa);
        } else if (trace.fluid_vertex.back() != fa) {
            throw ConfigError("extract_interface_trace: interface edges do not form a connected chain");
        }
        trace.vertices.push_back(mesh_f.vertices[fb]);
        trace.fluid_vertex.push_back(fb);
        TraceSegment seg;
        seg.a = static_cast<int>(s);
        seg.b = static_cast<int>(s) + 1;
        seg.fluid_triangle = e.triangle;
        trace.segments.push_back(seg);
    }

    for (const auto& x : trace.vertices) {
        const int pv = find_poro_vertex(x);
        if (pv < 0) {
            std::ostringstream os;
            os << "extract_interface_trace: non-matching interface discretizations; fluid interface vertex ("
               << x.x() << ", " << x.y() << ") has no structure counterpart";
            throw ConfigError(os.str());
        }
        trace.poro_vertex.push_back(pv);
    }
    for (auto& seg : trace.segments) {
        const auto* pe = find_poro_edge(trace.poro_vertex[seg.a], trace.poro_vertex[seg.b]);
        if (!pe) throw ConfigError("extract_interface_trace: non-matching interface discretizations");
        seg.poro_triangle = pe->triangle;
    }
    return trace;
}

} // namespace fpsi
