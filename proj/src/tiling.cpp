#include <whomog/tiling.hpp>

#include <cmath>

namespace whomog {

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(std::size_t n) : parent(n) {
        for (std::size_t i = 0; i < n; ++i) parent[i] = static_cast<int>(i);
    }
    int find(int v) {
        while (parent[v] != v) {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        return v;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

} // namespace

EpsilonTiling build_epsilon_tiling(std::shared_ptr<const UnitCell> cell, int n) {
    if (!cell) throw GeometryError("tiling requires a meshed unit cell");
    if (n < 1) throw ValidationError("1/epsilon must be a positive integer");

    EpsilonTiling tl;
    tl.n = n;
    tl.epsilon = 1.0 / n;
    tl.cell = cell;

    const TriangleMesh& cm = cell->full;
    const int nv = cm.num_vertices();
    const int tiles = n * n;

    tl.cells.reserve(tiles);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) tl.cells.push_back({i, j});

    // Classify the cell's periodic pairs by their lattice offset.
    std::vector<std::array<int, 2>> horiz, vert; // {left/bottom, right/top}
    for (const auto& p : cm.periodic_pairs) {
        const Vec2 d = cm.vertices[p[1]] - cm.vertices[p[0]];
        if (std::abs(d.x() - 1.0) < 1e-12) {
            horiz.push_back({p[0], p[1]});
        } else if (std::abs(d.x() + 1.0) < 1e-12) {
            horiz.push_back({p[1], p[0]});
        } else if (std::abs(d.y() - 1.0) < 1e-12) {
            vert.push_back({p[0], p[1]});
        } else {
            vert.push_back({p[1], p[0]});
        }
    }

    // Glue (tile, local vertex) slots across shared faces.
    UnionFind uf(static_cast<std::size_t>(tiles) * nv);
    auto slot = [nv](int tile, int v) { return tile * nv + v; };
    auto tile_at = [n](int i, int j) { return j * n + i; };
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            if (i + 1 < n)
                for (const auto& p : horiz)
                    uf.unite(slot(tile_at(i, j), p[1]), slot(tile_at(i + 1, j), p[0]));
            if (j + 1 < n)
                for (const auto& p : vert)
                    uf.unite(slot(tile_at(i, j), p[1]), slot(tile_at(i, j + 1), p[0]));
        }
    }

    // Assign glued vertex ids in deterministic (tile, local) order. The
    // representative slot is the smallest, so roots appear first.
    std::vector<int> glued_id(static_cast<std::size_t>(tiles) * nv, -1);
    tl.tile_full.assign(tiles, std::vector<int>(nv, -1));
    for (int t = 0; t < tiles; ++t) {
        const Vec2 k(static_cast<double>(tl.cells[t][0]), static_cast<double>(tl.cells[t][1]));
        for (int v = 0; v < nv; ++v) {
            const int root = uf.find(slot(t, v));
            if (glued_id[root] == -1) {
                glued_id[root] = static_cast<int>(tl.full.vertices.size());
                tl.full.vertices.push_back(tl.epsilon * (k + cm.vertices[v]));
                tl.ref_full.push_back(cm.vertices[v]);
            }
            tl.tile_full[t][v] = glued_id[root];
        }
    }

    tl.full.triangles.reserve(static_cast<std::size_t>(tiles) * cm.num_triangles());
    tl.full.ref_points.reserve(tl.full.triangles.capacity());
    for (int t = 0; t < tiles; ++t) {
        for (int e = 0; e < cm.num_triangles(); ++e) {
            const auto& tri = cm.triangles[e];
            tl.full.triangles.push_back(
                {tl.tile_full[t][tri[0]], tl.tile_full[t][tri[1]], tl.tile_full[t][tri[2]]});
            tl.full.tri_tag.push_back(cm.tri_tag[e]);
            tl.full.ref_points.push_back(cm.coefficient_point(e));
        }
        for (const auto& e : cm.interface_edges)
            tl.full.interface_edges.push_back({tl.tile_full[t][e[0]], tl.tile_full[t][e[1]]});
    }
    tl.full.mesh_size = cm.mesh_size * tl.epsilon;

    // Side meshes, extracted tile-major so element order matches the cell
    // side meshes per tile.
    auto extract = [&](const SideMesh& side, std::vector<std::vector<int>>& tile_map,
                       std::vector<Vec2>& ref, TriangleMesh& out) {
        const int nsv = side.mesh.num_vertices();
        std::vector<int> local(tl.full.vertices.size(), -1);
        tile_map.assign(tiles, std::vector<int>(nsv, -1));
        for (int t = 0; t < tiles; ++t) {
            for (int v = 0; v < nsv; ++v) {
                const int fv = tl.tile_full[t][side.to_parent[v]];
                if (local[fv] == -1) {
                    local[fv] = static_cast<int>(out.vertices.size());
                    out.vertices.push_back(tl.full.vertices[fv]);
                    ref.push_back(tl.ref_full[fv]);
                }
                tile_map[t][v] = local[fv];
            }
            for (int e = 0; e < side.mesh.num_triangles(); ++e) {
                const auto& tri = side.mesh.triangles[e];
                out.triangles.push_back(
                    {tile_map[t][tri[0]], tile_map[t][tri[1]], tile_map[t][tri[2]]});
                out.tri_tag.push_back(side.mesh.tri_tag[e]);
                out.ref_points.push_back(side.mesh.coefficient_point(e));
            }
        }
        out.mesh_size = side.mesh.mesh_size * tl.epsilon;
    };
    extract(cell->y1, tl.tile_y1, tl.ref1, tl.mesh1);
    extract(cell->y2, tl.tile_y2, tl.ref2, tl.mesh2);

    tl.tile_surf1.assign(tiles, std::vector<int>(cell->surface.num_nodes(), -1));
    tl.tile_surf2 = tl.tile_surf1;
    for (int t = 0; t < tiles; ++t) {
        for (int s = 0; s < cell->surface.num_nodes(); ++s) {
            tl.tile_surf1[t][s] = tl.tile_y1[t][cell->y1.surf_to_bulk[s]];
            tl.tile_surf2[t][s] = tl.tile_y2[t][cell->y2.surf_to_bulk[s]];
        }
    }
    return tl;
}

SurfaceMesh EpsilonTiling::tile_surface(int t) const {
    const SurfaceMesh& cs = cell->surface;
    SurfaceMesh s;
    const Vec2 k(static_cast<double>(cells[t][0]), static_cast<double>(cells[t][1]));
    s.nodes.reserve(cs.num_nodes());
    for (const auto& p : cs.nodes) s.nodes.push_back(epsilon * (k + p));
    s.tangent = cs.tangent;
    s.normal = cs.normal;
    s.edge_length.reserve(cs.num_edges());
    for (double l : cs.edge_length) s.edge_length.push_back(epsilon * l);
    s.ref_midpoints.reserve(cs.num_edges());
    for (int e = 0; e < cs.num_edges(); ++e) s.ref_midpoints.push_back(cs.edge_coefficient_point(e));
    s.parent_vertex = cs.parent_vertex;
    return s;
}

} // namespace whomog
