#pragma once

#include "fpsi/types.hpp"

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace fpsi {

/// Axis-aligned rectangle [x0,x1] x [y0,y1].
struct Rect {
    double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;

    double area() const { return (x1 - x0) * (y1 - y0); }
};

enum class BoundaryTag {
    None,
    FluidDirichlet,
    FluidNeumann,
    StructDirichlet,
    StructNeumann,
    PoreDirichlet,
    PoreNeumann,
    Interface,
};

const char* to_string(BoundaryTag tag);

/// Tags of one boundary edge. `displacement` covers u on the fluid side and
/// eta on the structure side; `pressure` is only meaningful for the pore
/// pressure on the structure side.
struct EdgeTags {
    BoundaryTag displacement = BoundaryTag::None;
    BoundaryTag pressure = BoundaryTag::None;

    bool operator==(const EdgeTags&) const = default;
};

/// Boundary edge oriented counterclockwise with respect to its triangle, so
/// the outward normal is the edge direction rotated by -90 degrees.
struct BoundaryEdge {
    int v0 = -1;
    int v1 = -1;
    int triangle = -1;
    int local_edge = -1;
    int edge = -1;
    EdgeTags tags;
};

struct SubdomainMesh {
    Rect rect;
    int nx = 0;
    int ny = 0;
    std::vector<Vec2> vertices;
    /// Counterclockwise vertex triples.
    std::vector<std::array<int, 3>> triangles;
    /// Unique edges as (low, high) vertex pairs.
    std::vector<std::array<int, 2>> edges;
    /// Local edge k of a triangle joins its local vertices k and (k+1)%3.
    std::vector<std::array<int, 3>> triangle_edges;
    std::vector<BoundaryEdge> boundary_edges;
    double h = 0.0;

    int num_vertices() const { return static_cast<int>(vertices.size()); }
    int num_triangles() const { return static_cast<int>(triangles.size()); }
    int num_edges() const { return static_cast<int>(edges.size()); }

    double triangle_area(int t) const;
    Vec2 midpoint(const BoundaryEdge& e) const;
    Vec2 outward_normal(const BoundaryEdge& e) const;
    double length(const BoundaryEdge& e) const;
};

/// Structured mesh; each cell is split along its lower-left to upper-right
/// diagonal.
SubdomainMesh build_rect_mesh(const Rect& rect, int nx, int ny);

/// Maps a boundary edge midpoint to its tags, or nullopt when the scenario
/// does not cover that location.
using EdgeTagger = std::function<std::optional<EdgeTags>(const Vec2& midpoint)>;

/// Per-side tagging of a rectangle. Sides without a value are left uncovered.
struct SideTags {
    std::optional<EdgeTags> left, right, bottom, top;
};

EdgeTagger tagger_from_sides(const Rect& rect, const SideTags& sides);

/// Tags every boundary edge; throws ConfigError naming the midpoint of the
/// first edge the tagger leaves uncovered.
SubdomainMesh tag_boundaries(SubdomainMesh mesh, const EdgeTagger& tagger);

struct TraceSegment {
    /// Trace vertex indices, `a` before `b` along tau.
    int a = -1;
    int b = -1;
    int fluid_triangle = -1;
    int poro_triangle = -1;
};

/// One-dimensional mesh of the shared interface.
struct InterfaceTrace {
    /// Ordered along tau.
    std::vector<Vec2> vertices;
    std::vector<int> fluid_vertex;
    std::vector<int> poro_vertex;
    std::vector<TraceSegment> segments;
    Vec2 n_f = Vec2::Zero();
    Vec2 n_p = Vec2::Zero();
    Vec2 tau = Vec2::Zero();

    int num_vertices() const { return static_cast<int>(vertices.size()); }
    int num_segments() const { return static_cast<int>(segments.size()); }
    double segment_length(int s) const;
    double length() const;
};

/// Pairs the Interface-tagged edges of both meshes. tau is n_f rotated by
/// +90 degrees unless `flip_tangent` is set. Throws ConfigError for
/// non-matching interface discretizations.
InterfaceTrace extract_interface_trace(const SubdomainMesh& mesh_f, const SubdomainMesh& mesh_p,
                                       bool flip_tangent = false);

} // namespace fpsi
