#include "fpsi/vtk.hpp"
#include "fpsi/studies.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace fpsi {

namespace {

struct PointData {
    std::vector<Vec2> coords;
    std::vector<std::array<int, 3>> cells;
    std::vector<int> cell_domain;
    std::vector<Vec2> u, eta, darcy, velocity;
    std::vector<double> pp, pf;
};

std::array<double, 3> local_bary(int k)
{
    switch (k) {
    case 0: return {1.0, 0.0, 0.0};
    case 1: return {0.0, 1.0, 0.0};
    case 2: return {0.0, 0.0, 1.0};
    case 3: return {0.5, 0.5, 0.0};
    case 4: return {0.0, 0.5, 0.5};
    default: return {0.5, 0.0, 0.5};
    }
}

// Appends the P2 node lattice of one mesh and calls `eval(t, k, point)` for
// every (triangle, local node) pair; values are averaged over duplicates.
template <class Eval>
void append_mesh(PointData& pd, const SubdomainMesh& m, int domain, Eval eval)
{
    const int offset = static_cast<int>(pd.coords.size());
    const int nv = m.num_vertices();
    const int np = nv + m.num_edges();
    pd.coords.resize(offset + np);
    for (int v = 0; v < nv; ++v) pd.coords[offset + v] = m.vertices[v];
    for (int e = 0; e < m.num_edges(); ++e)
        pd.coords[offset + nv + e] = 0.5 * (m.vertices[m.edges[e][0]] + m.vertices[m.edges[e][1]]);

    std::vector<int> count(np, 0);
    pd.u.resize(offset + np, Vec2::Zero());
    pd.eta.resize(offset + np, Vec2::Zero());
    pd.darcy.resize(offset + np, Vec2::Zero());
    pd.velocity.resize(offset + np, Vec2::Zero());
    pd.pp.resize(offset + np, 0.0);
    pd.pf.resize(offset + np, 0.0);

    for (int t = 0; t < m.num_triangles(); ++t) {
        std::array<int, 6> nodes;
        for (int k = 0; k < 3; ++k) nodes[k] = m.triangles[t][k];
        for (int k = 0; k < 3; ++k) nodes[3 + k] = nv + m.triangle_edges[t][k];
        for (int k = 0; k < 6; ++k) {
            const int p = nodes[k];
            ++count[p];
            eval(t, local_bary(k), offset + p);
        }
        // Local edge k joins vertices k and k+1: midpoints are 3 (01), 4 (12), 5 (20).
        const std::array<std::array<int, 3>, 4> sub{{{nodes[0], nodes[3], nodes[5]},
                                                      {nodes[3], nodes[1], nodes[4]},
                                                      {nodes[5], nodes[4], nodes[2]},
                                                      {nodes[3], nodes[4], nodes[5]}}};
        for (const auto& c : sub) {
            pd.cells.push_back({offset + c[0], offset + c[1], offset + c[2]});
            pd.cell_domain.push_back(domain);
        }
    }
    for (int p = 0; p < np; ++p) {
        const double w = count[p] > 0 ? 1.0 / count[p] : 0.0;
        const int i = offset + p;
        pd.u[i] *= w;
        pd.eta[i] *= w;
        pd.darcy[i] *= w;
        pd.velocity[i] *= w;
        pd.pp[i] *= w;
        pd.pf[i] *= w;
    }
}

void write_vector(std::ostream& os, const std::string& name, const std::vector<Vec2>& v)
{
    os << "VECTORS " << name << " double\n";
    for (const Vec2& x : v) os << x.x() << ' ' << x.y() << " 0\n";
}

void write_scalar(std::ostream& os, const std::string& name, const std::vector<double>& v)
{
    os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (double x : v) os << x << '\n';
}

} // namespace

void write_vtk_snapshot(const std::string& path, const Discretization& d, const PhysicalParams& params,
                        const TimeState& state, double dt, const std::string& title)
{
    PointData pd;
    append_mesh(pd, *d.mesh_f, 0, [&](int t, const std::array<double, 3>& bary, int i) {
        const Vec2 u = evaluate_vector(d.u, state.u, t, bary);
        pd.u[i] += u;
        pd.velocity[i] += u;
        pd.pf[i] += evaluate_scalar(d.pf, state.pf, t, bary);
    });
    append_mesh(pd, *d.mesh_p, 1, [&](int t, const std::array<double, 3>& bary, int i) {
        const Vec2 q = darcy_velocity(d, params, state, dt, t, bary);
        pd.eta[i] += evaluate_vector(d.eta, state.eta, t, bary);
        pd.darcy[i] += q;
        pd.velocity[i] += q;
        pd.pp[i] += evaluate_scalar(d.pp, state.pp, t, bary);
    });

    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open '" + path + "' for writing");
    os << std::setprecision(10) << std::scientific;
    os << "# vtk DataFile Version 3.0\n" << title << " t=" << state.t << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    os << "POINTS " << pd.coords.size() << " double\n";
    for (const Vec2& x : pd.coords) os << x.x() << ' ' << x.y() << " 0\n";
    os << "CELLS " << pd.cells.size() << ' ' << 4 * pd.cells.size() << '\n';
    for (const auto& c : pd.cells) os << "3 " << c[0] << ' ' << c[1] << ' ' << c[2] << '\n';
    os << "CELL_TYPES " << pd.cells.size() << '\n';
    for (std::size_t i = 0; i < pd.cells.size(); ++i) os << "5\n";
    os << "CELL_DATA " << pd.cells.size() << '\n';
    os << "SCALARS subdomain int 1\nLOOKUP_TABLE default\n";
    for (int dom : pd.cell_domain) os << dom << '\n';
    os << "POINT_DATA " << pd.coords.size() << '\n';
    write_vector(os, "u", pd.u);
    write_vector(os, "eta", pd.eta);
    write_scalar(os, "p_p", pd.pp);
    write_scalar(os, "p_f", pd.pf);
    write_vector(os, "darcy_velocity", pd.darcy);
    write_vector(os, "velocity", pd.velocity);
    if (!os) throw NumericalError("failed while writing '" + path + "'");
}

VtkSummary read_vtk_summary(const std::string& path)
{
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open '" + path + "'");
    auto fail = [&](const std::string& msg) { throw ConfigError(path + ": " + msg); };
    std::string line;
    std::getline(is, line);
    if (line.rfind("# vtk DataFile Version", 0) != 0) fail("missing legacy VTK header");
    std::getline(is, line); // title
    std::getline(is, line);
    if (line != "ASCII") fail("only ASCII files are supported");
    std::getline(is, line);
    if (line != "DATASET UNSTRUCTURED_GRID") fail("expected an unstructured grid");

    VtkSummary s;
    std::string key;
    enum class Section { None, Point, Cell } section = Section::None;
    auto skip_values = [&](long n) {
        double v;
        for (long i = 0; i < n; ++i)
            if (!(is >> v)) fail("truncated data block");
    };
    while (is >> key) {
        if (key == "POINTS") {
            std::string type;
            is >> s.points >> type;
            skip_values(3L * s.points);
        } else if (key == "CELLS") {
            long size = 0;
            is >> s.cells >> size;
            long read = 0;
            for (int c = 0; c < s.cells; ++c) {
                int k = 0;
                if (!(is >> k)) fail("truncated CELLS block");
                for (int j = 0; j < k; ++j) {
                    int idx = -1;
                    if (!(is >> idx) || idx < 0 || idx >= s.points) fail("cell references an invalid point");
                }
                read += k + 1;
            }
            if (read != size) fail("CELLS size field does not match its contents");
        } else if (key == "CELL_TYPES") {
            int n = 0;
            is >> n;
            if (n != s.cells) fail("CELL_TYPES count differs from CELLS");
            skip_values(n);
        } else if (key == "CELL_DATA") {
            int n = 0;
            is >> n;
            if (n != s.cells) fail("CELL_DATA count differs from CELLS");
            section = Section::Cell;
        } else if (key == "POINT_DATA") {
            int n = 0;
            is >> n;
            if (n != s.points) fail("POINT_DATA count differs from POINTS");
            section = Section::Point;
        } else if (key == "SCALARS" || key == "VECTORS") {
            std::string name, type;
            is >> name >> type;
            int comps = 3;
            if (key == "SCALARS") {
                std::getline(is, line);
                std::istringstream ls(line);
                comps = 1;
                ls >> comps;
                std::getline(is, line);
                if (line.rfind("LOOKUP_TABLE", 0) != 0) fail("missing LOOKUP_TABLE after " + name);
            }
            const int count = section == Section::Cell ? s.cells : s.points;
            if (section == Section::None) fail("field " + name + " outside a data section");
            skip_values(static_cast<long>(count) * comps);
            (section == Section::Cell ? s.cell_fields : s.point_fields)[name] = key == "VECTORS" ? 3 : comps;
        } else {
            fail("unexpected keyword '" + key + "'");
        }
    }
    if (s.points == 0 || s.cells == 0) fail("empty grid");
    return s;
}

} // namespace fpsi
