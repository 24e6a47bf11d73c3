#ifndef WHOMOG_TILING_HPP
#define WHOMOG_TILING_HPP

#include <whomog/geometry.hpp>

#include <memory>

namespace whomog {

/*! The eps-scaled periodic tiling of Omega = (0,1)^2 by the meshed unit
//  cell, eps = 1/n with n in N. Tiles are exact scaled/translated copies of
//  the cell mesh (vertex coordinates are eps*(k + y) bitwise); vertices on
//  shared tile faces are identified structurally through the cell's periodic
//  pairs, so Omega_eps^1 is globally conforming while the inclusions stay
//  disconnected.
//
//  Tile t covers lattice cell `cells[t]`; triangles of mesh1/mesh2 are laid
//  out tile-major in the order of the cell side meshes, so element e of tile
//  t corresponds to cell element e % per-tile count. Reference (unit-cell)
//  coordinates are carried per vertex and per element coefficient point;
//  assembly and unfolding never fold x/eps through floating point. */
struct EpsilonTiling {
    double epsilon = 1.0;
    int n = 1; // epsilon = 1/n, |K_eps| = n^2
    std::shared_ptr<const UnitCell> cell;

    std::vector<std::array<int, 2>> cells; // lattice vector k per tile, row-major

    TriangleMesh full;  // glued mesh of Omega (both subdomains)
    TriangleMesh mesh1; // Omega_eps^1 (connected)
    TriangleMesh mesh2; // Omega_eps^2 (n^2 disconnected blocks)

    // tile -> cell-local vertex id -> tiled vertex id
    std::vector<std::vector<int>> tile_full;
    std::vector<std::vector<int>> tile_y1;
    std::vector<std::vector<int>> tile_y2;
    // tile -> surface node -> bulk vertex id of the side mesh
    std::vector<std::vector<int>> tile_surf1;
    std::vector<std::vector<int>> tile_surf2;

    // unit-cell coordinate of every tiled vertex
    std::vector<Vec2> ref_full, ref1, ref2;

    int tiles() const { return n * n; }
    Vec2 tile_origin(int t) const {
        return Vec2(epsilon * cells[t][0], epsilon * cells[t][1]);
    }
    // Physical interface polygon of one tile (scaled/translated copy of the
    // cell surface; ref_midpoints carry the unit-cell edge midpoints).
    SurfaceMesh tile_surface(int t) const;

    double volume1() const { return cell->area_y1; }          // |Omega_eps^1|
    double volume2() const { return cell->area_y2; }          // |Omega_eps^2|
    double gamma_measure() const { return cell->gamma_length / epsilon; } // |Gamma_eps|
};

EpsilonTiling build_epsilon_tiling(std::shared_ptr<const UnitCell> cell, int n);

} // namespace whomog

#endif
