#ifndef WHOMOG_GEOMETRY_HPP
#define WHOMOG_GEOMETRY_HPP

#include <whomog/common.hpp>

#include <array>
#include <string>
#include <vector>

namespace whomog {

enum class SubdomainTag : int { Y1 = 1, Y2 = 2 };

/*! Unit cell Y = (0,1)^2 with a single disc inclusion Y2 strictly inside.
//  Y1 = Y \ closure(Y2) stays connected, Y2 connected, the interface circle
//  is C^{1,1}. `clearance` is the required minimal distance from the circle
//  to the cell boundary. */
struct UnitCellGeometry {
    enum class Inclusion { Disc };
    Inclusion inclusion_kind = Inclusion::Disc;
    Vec2 center{0.5, 0.5};
    double radius = 0.25;
    double clearance = 0.05;

    void validate() const; // throws GeometryError on violation
};

/*! Conforming P1 triangle mesh. For the unit cell the interface is resolved
//  exactly: every interface node lies on the circle, and interface edges are
//  exactly the edges separating Y1 from Y2 triangles. Periodic pairs link
//  vertices on opposite faces of the cell boundary (master first); paired
//  vertices differ by a unit lattice vector and have bitwise-equal
//  transverse coordinates, which tilings rely on for exact gluing. */
struct TriangleMesh {
    std::vector<Vec2> vertices;
    std::vector<std::array<int, 3>> triangles;
    std::vector<SubdomainTag> tri_tag;
    std::vector<std::array<int, 2>> interface_edges;
    std::vector<std::array<int, 2>> outer_edges;
    std::vector<std::array<int, 2>> periodic_pairs; // {master, slave}
    double mesh_size = 0.0; // max edge length

    // Per-triangle coefficient sample point in unit-cell coordinates.
    // Empty for plain meshes (centroid is used); filled by tilings so that
    // periodic coefficients are evaluated at y = x/eps without floating
    // point folding.
    std::vector<Vec2> ref_points;

    int num_vertices() const { return static_cast<int>(vertices.size()); }
    int num_triangles() const { return static_cast<int>(triangles.size()); }

    double triangle_area(int t) const {
        const auto& tri = triangles[t];
        const Vec2 a = vertices[tri[0]], b = vertices[tri[1]], c = vertices[tri[2]];
        return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x()));
    }
    Vec2 centroid(int t) const {
        const auto& tri = triangles[t];
        return (vertices[tri[0]] + vertices[tri[1]] + vertices[tri[2]]) / 3.0;
    }
    Vec2 coefficient_point(int t) const {
        return ref_points.empty() ? centroid(t) : ref_points[t];
    }
    double area_of(SubdomainTag tag) const;
    double total_area() const;
};

/*! Closed polygonal interface curve, ordered counterclockwise around Y2.
//  Edge i runs from node i to node (i+1) mod n. Normals point out of Y2. */
struct SurfaceMesh {
    std::vector<Vec2> nodes;
    std::vector<Vec2> normal;
    std::vector<Vec2> tangent;
    std::vector<double> edge_length;
    std::vector<int> parent_vertex; // node -> vertex id in the originating mesh

    // Per-edge coefficient sample point in unit-cell coordinates (edge
    // midpoint for cell-level meshes, set explicitly by tilings).
    std::vector<Vec2> ref_midpoints;

    int num_nodes() const { return static_cast<int>(nodes.size()); }
    int num_edges() const { return static_cast<int>(nodes.size()); }
    std::array<int, 2> edge(int e) const { return {e, (e + 1) % num_nodes()}; }

    double total_length() const;
    double signed_area() const;
    Vec2 edge_coefficient_point(int e) const {
        if (!ref_midpoints.empty()) return ref_midpoints[e];
        auto [i, j] = edge(e);
        return 0.5 * (nodes[i] + nodes[j]);
    }
};

/*! One side of the cell (or of a tiling) as a standalone mesh plus the trace
//  identification: surf_to_bulk[s] is the bulk vertex carrying the trace
//  unknown at surface node s. */
struct SideMesh {
    TriangleMesh mesh;
    std::vector<int> surf_to_bulk;
    std::vector<int> to_parent; // side vertex -> parent mesh vertex
};

/*! The meshed unit cell: full tagged mesh, the interface polygon, the two
//  side meshes, and the meshed measures used as |Y1|, |Y2|, |Gamma| by all
//  downstream formulas. */
struct UnitCell {
    UnitCellGeometry geom;
    TriangleMesh full;
    SurfaceMesh surface;
    SideMesh y1, y2;
    double area_y1 = 0, area_y2 = 0, gamma_length = 0;
};

TriangleMesh build_cell_mesh(const UnitCellGeometry& geom, double target_h);
SurfaceMesh extract_surface_mesh(const TriangleMesh& mesh);
SideMesh extract_side_mesh(const TriangleMesh& full, const SurfaceMesh& surf, SubdomainTag tag);
UnitCell build_unit_cell(const UnitCellGeometry& geom, double target_h);

// Uniform criss-cross mesh of (0,1)^2 with no inclusion (macro mesh).
TriangleMesh build_square_mesh(int n);

// Checks orientation, degeneracy, interface separation, periodic-pair
// structure; throws on violation.
void validate_mesh(const TriangleMesh& mesh);

// Hausdorff distance between the interface polygon and the circle.
double interface_hausdorff_distance(const SurfaceMesh& surf, const Vec2& center, double radius);

// Resolves periodic master/slave chains to canonical representatives.
// Returns rep[v] for every vertex; rep is idempotent.
std::vector<int> periodic_representatives(const TriangleMesh& mesh);

// Plain-text mesh format (meshfmt 1).
void write_mesh(const TriangleMesh& mesh, const std::string& path);
TriangleMesh read_mesh(const std::string& path);

} // namespace whomog

#endif
