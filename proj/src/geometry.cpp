#include <whomog/geometry.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace whomog {

namespace {

inline std::uint64_t edge_key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
}

inline double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// Intersection of segment a-b with the circle |p - c| = r, assuming the
// endpoints are on opposite sides. Returns the point projected exactly
// (to round-off) onto the circle.
Vec2 edge_circle_crossing(const Vec2& a, const Vec2& b, const Vec2& c, double r) {
    const Vec2 ac = a - c;
    const Vec2 d = b - a;
    const double A = d.squaredNorm();
    const double B = 2.0 * ac.dot(d);
    const double C = ac.squaredNorm() - r * r;
    double disc = B * B - 4.0 * A * C;
    if (disc < 0) disc = 0;
    const double sq = std::sqrt(disc);
    // Stable quadratic roots.
    const double q = (B >= 0) ? -0.5 * (B + sq) : -0.5 * (B - sq);
    double t1 = q / A;
    double t2 = (q != 0) ? C / q : t1;
    if (t1 > t2) std::swap(t1, t2);
    double t = (t1 > 0.0 && t1 < 1.0) ? t1 : t2;
    t = std::clamp(t, 0.0, 1.0);
    Vec2 p = a + t * d;
    const Vec2 u = p - c;
    const double len = u.norm();
    if (len > 0) p = c + (r / len) * u;
    return p;
}

struct MeshBuilder {
    std::vector<Vec2> vertices;
    std::vector<std::array<int, 3>> triangles;
    std::vector<SubdomainTag> tags;

    int add_vertex(const Vec2& v) {
        vertices.push_back(v);
        return static_cast<int>(vertices.size()) - 1;
    }
    void add_triangle(int a, int b, int c, SubdomainTag tag) {
        const Vec2 &va = vertices[a], &vb = vertices[b], &vc = vertices[c];
        if (cross2(vb - va, vc - va) < 0) std::swap(b, c);
        triangles.push_back({a, b, c});
        tags.push_back(tag);
    }
};

} // namespace

void UnitCellGeometry::validate() const {
    if (!(radius > 0)) throw GeometryError("inclusion radius must be positive");
    if (!(clearance > 0)) throw GeometryError("clearance must be positive");
    const double dist_to_boundary =
        std::min(std::min(center.x(), 1.0 - center.x()), std::min(center.y(), 1.0 - center.y()));
    if (!(dist_to_boundary - radius >= clearance))
        throw GeometryError("inclusion closure not strictly inside the cell: "
                            "dist(Gamma, boundary) < clearance");
}

double TriangleMesh::area_of(SubdomainTag tag) const {
    double a = 0;
    for (int t = 0; t < num_triangles(); ++t)
        if (tri_tag[t] == tag) a += triangle_area(t);
    return a;
}

double TriangleMesh::total_area() const {
    double a = 0;
    for (int t = 0; t < num_triangles(); ++t) a += triangle_area(t);
    return a;
}

double SurfaceMesh::total_length() const {
    double s = 0;
    for (double l : edge_length) s += l;
    return s;
}

double SurfaceMesh::signed_area() const {
    double s = 0;
    const int n = num_nodes();
    for (int i = 0; i < n; ++i) s += cross2(nodes[i], nodes[(i + 1) % n]);
    return 0.5 * s;
}

TriangleMesh build_square_mesh(int n) {
    if (n < 1) throw MeshGenerationFailure("grid resolution must be >= 1");
    if (static_cast<long long>(n) * n > 64ll * 1000 * 1000)
        throw MeshGenerationFailure("grid resolution exceeds the resource budget");

    TriangleMesh m;
    const int nv_grid = (n + 1) * (n + 1);
    m.vertices.resize(nv_grid + n * n);
    auto grid_id = [n](int i, int j) { return j * (n + 1) + i; };
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i)
            m.vertices[grid_id(i, j)] = Vec2(static_cast<double>(i) / n, static_cast<double>(j) / n);
    auto center_id = [n, nv_grid](int i, int j) { return nv_grid + j * n + i; };
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            m.vertices[center_id(i, j)] =
                Vec2((i + 0.5) / n, (j + 0.5) / n);

    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const int v00 = grid_id(i, j), v10 = grid_id(i + 1, j);
            const int v01 = grid_id(i, j + 1), v11 = grid_id(i + 1, j + 1);
            const int vc = center_id(i, j);
            m.triangles.push_back({v00, v10, vc});
            m.triangles.push_back({v10, v11, vc});
            m.triangles.push_back({v11, v01, vc});
            m.triangles.push_back({v01, v00, vc});
        }
    }
    m.tri_tag.assign(m.triangles.size(), SubdomainTag::Y1);

    for (int i = 0; i < n; ++i) {
        m.outer_edges.push_back({grid_id(i, 0), grid_id(i + 1, 0)});
        m.outer_edges.push_back({grid_id(i + 1, n), grid_id(i, n)});
        m.outer_edges.push_back({grid_id(0, i + 1), grid_id(0, i)});
        m.outer_edges.push_back({grid_id(n, i), grid_id(n, i + 1)});
    }
    for (int j = 0; j <= n; ++j) m.periodic_pairs.push_back({grid_id(0, j), grid_id(n, j)});
    for (int i = 0; i <= n; ++i) m.periodic_pairs.push_back({grid_id(i, 0), grid_id(i, n)});

    m.mesh_size = 1.0 / n;
    return m;
}

TriangleMesh build_cell_mesh(const UnitCellGeometry& geom, double target_h) {
    if (!(target_h > 0)) throw MeshGenerationFailure("target_h must be positive");
    geom.validate();

    const int n = std::max(2, static_cast<int>(std::lround(1.0 / target_h)));
    if (static_cast<long long>(n) * n > 64ll * 1000 * 1000)
        throw MeshGenerationFailure("target_h too small: grid exceeds the resource budget");

    const Vec2 c = geom.center;
    const double r = geom.radius;
    const double cell = 1.0 / n;
    const double snap_tol = 0.2 * cell;

    TriangleMesh base = build_square_mesh(n);

    // Snap near-circle vertices radially onto the circle. Outer-boundary
    // vertices are never candidates (clearance keeps the circle away).
    const int nv0 = static_cast<int>(base.vertices.size());
    std::vector<char> on_circle(nv0, 0);
    for (int v = 0; v < nv0; ++v) {
        Vec2& p = base.vertices[v];
        const double d = (p - c).norm() - r;
        if (std::abs(d) < snap_tol) {
            p = c + (r / (p - c).norm()) * (p - c);
            on_circle[v] = 1;
        }
    }

    MeshBuilder out;
    out.vertices = base.vertices;
    std::unordered_map<std::uint64_t, int> crossing_of_edge;
    auto crossing = [&](int a, int b) {
        const auto key = edge_key(a, b);
        auto it = crossing_of_edge.find(key);
        if (it != crossing_of_edge.end()) return it->second;
        const int id = out.add_vertex(edge_circle_crossing(out.vertices[a], out.vertices[b], c, r));
        crossing_of_edge.emplace(key, id);
        return id;
    };

    for (std::size_t t = 0; t < base.triangles.size(); ++t) {
        const auto tri = base.triangles[t];
        int sign[3];
        for (int i = 0; i < 3; ++i) {
            if (on_circle[tri[i]]) {
                sign[i] = 0;
            } else {
                sign[i] = ((base.vertices[tri[i]] - c).norm() > r) ? 1 : -1;
            }
        }
        const bool has_pos = sign[0] > 0 || sign[1] > 0 || sign[2] > 0;
        const bool has_neg = sign[0] < 0 || sign[1] < 0 || sign[2] < 0;

        if (!(has_pos && has_neg)) {
            SubdomainTag tag;
            if (has_pos) {
                tag = SubdomainTag::Y1;
            } else if (has_neg) {
                tag = SubdomainTag::Y2;
            } else {
                const Vec2 cen = (out.vertices[tri[0]] + out.vertices[tri[1]] + out.vertices[tri[2]]) / 3.0;
                tag = ((cen - c).norm() > r) ? SubdomainTag::Y1 : SubdomainTag::Y2;
            }
            out.add_triangle(tri[0], tri[1], tri[2], tag);
            continue;
        }

        int zero_count = 0;
        for (int s : sign) zero_count += (s == 0);

        if (zero_count == 1) {
            // (0, +, -): one crossing on the mixed edge, two sub-triangles.
            int zi = 0;
            while (sign[zi] != 0) ++zi;
            const int p = tri[(zi + 1) % 3], q = tri[(zi + 2) % 3];
            const int sp = sign[(zi + 1) % 3];
            const int x = crossing(p, q);
            out.add_triangle(tri[zi], p, x, sp > 0 ? SubdomainTag::Y1 : SubdomainTag::Y2);
            out.add_triangle(tri[zi], x, q, sp > 0 ? SubdomainTag::Y2 : SubdomainTag::Y1);
            continue;
        }

        // (+, +, -) or (-, -, +): lone vertex cut off by two crossings.
        int li = 0;
        while (sign[li] == sign[(li + 1) % 3] || sign[li] == sign[(li + 2) % 3]) ++li;
        const int lone = tri[li];
        const int p1 = tri[(li + 1) % 3], p2 = tri[(li + 2) % 3];
        const SubdomainTag lone_tag = sign[li] > 0 ? SubdomainTag::Y1 : SubdomainTag::Y2;
        const SubdomainTag pair_tag = sign[li] > 0 ? SubdomainTag::Y2 : SubdomainTag::Y1;
        const int x1 = crossing(lone, p1);
        const int x2 = crossing(lone, p2);
        out.add_triangle(lone, x1, x2, lone_tag);
        // Quad x1, p1, p2, x2 split along its shorter diagonal.
        const double d1 = (out.vertices[x1] - out.vertices[p2]).squaredNorm();
        const double d2 = (out.vertices[p1] - out.vertices[x2]).squaredNorm();
        if (d1 <= d2) {
            out.add_triangle(x1, p1, p2, pair_tag);
            out.add_triangle(x1, p2, x2, pair_tag);
        } else {
            out.add_triangle(x1, p1, x2, pair_tag);
            out.add_triangle(p1, p2, x2, pair_tag);
        }
    }

    // Near-tangent alignments leave interface chords spanning a whole grid
    // cell (both endpoints snapped). Split them at the projected arc
    // midpoint until no chord exceeds 0.6 of the grid spacing; this keeps
    // the polygon's sagitta, and hence the Hausdorff distance to the circle,
    // decreasing uniformly under refinement.
    const double max_chord = 0.6 * cell;
    for (int pass = 0; pass < 8; ++pass) {
        std::unordered_map<std::uint64_t, std::vector<int>> tris_of_edge;
        for (int t = 0; t < static_cast<int>(out.triangles.size()); ++t) {
            const auto& tri = out.triangles[t];
            for (int e = 0; e < 3; ++e)
                tris_of_edge[edge_key(tri[e], tri[(e + 1) % 3])].push_back(t);
        }
        bool changed = false;
        std::vector<char> done(out.triangles.size(), 0);
        const std::vector<std::array<int, 3>> snapshot = out.triangles;
        for (std::size_t t0 = 0; t0 < snapshot.size(); ++t0) {
            if (done[t0]) continue;
            const auto tri = snapshot[t0];
            for (int e = 0; e < 3; ++e) {
                const int a = tri[e], b = tri[(e + 1) % 3];
                const Vec2 pa = out.vertices[a], pb = out.vertices[b];
                if ((pa - pb).norm() <= max_chord) continue;
                if (std::abs((pa - c).norm() - r) > 1e-12 || std::abs((pb - c).norm() - r) > 1e-12)
                    continue; // not an on-circle chord
                const auto& inc = tris_of_edge[edge_key(a, b)];
                if (inc.size() == 2 && out.tags[inc[0]] == out.tags[inc[1]])
                    continue; // chord interior to one side
                bool busy = false;
                for (int t : inc) busy |= done[t];
                if (busy) continue;
                Vec2 mid = 0.5 * (pa + pb);
                mid = c + (r / (mid - c).norm()) * (mid - c);
                const int m = out.add_vertex(mid);
                for (int t : inc) {
                    const auto full = out.triangles[t];
                    int x = full[0] + full[1] + full[2] - a - b;
                    const SubdomainTag tag = out.tags[t];
                    out.triangles[t] = {a, m, x};
                    if (cross2(out.vertices[m] - out.vertices[a], out.vertices[x] - out.vertices[a]) < 0)
                        std::swap(out.triangles[t][1], out.triangles[t][2]);
                    out.add_triangle(m, b, x, tag);
                    done[t] = 1;
                }
                done.resize(out.triangles.size(), 1);
                changed = true;
                break;
            }
        }
        if (!changed) break;
    }

    TriangleMesh m;
    m.vertices = std::move(out.vertices);
    m.triangles = std::move(out.triangles);
    m.tri_tag = std::move(out.tags);
    m.outer_edges = base.outer_edges;
    m.periodic_pairs = base.periodic_pairs;

    // Interface edges separate differently tagged triangles.
    std::unordered_map<std::uint64_t, std::pair<int, int>> incidence; // key -> (count, tag sum)
    for (int t = 0; t < m.num_triangles(); ++t) {
        const auto& tri = m.triangles[t];
        for (int e = 0; e < 3; ++e) {
            auto& entry = incidence[edge_key(tri[e], tri[(e + 1) % 3])];
            entry.first += 1;
            entry.second += static_cast<int>(m.tri_tag[t]);
        }
    }
    for (const auto& [key, entry] : incidence) {
        if (entry.first == 2 && entry.second == 3) { // one Y1 + one Y2 triangle
            m.interface_edges.push_back(
                {static_cast<int>(key >> 32), static_cast<int>(key & 0xffffffffu)});
        }
    }

    double hmax = 0;
    for (const auto& tri : m.triangles)
        for (int e = 0; e < 3; ++e)
            hmax = std::max(hmax, (m.vertices[tri[e]] - m.vertices[tri[(e + 1) % 3]]).norm());
    m.mesh_size = hmax;

    std::vector<char> iface_vertex(m.vertices.size(), 0);
    for (const auto& e : m.interface_edges) iface_vertex[e[0]] = iface_vertex[e[1]] = 1;
    const long long n_iface = std::count(iface_vertex.begin(), iface_vertex.end(), 1);
    if (n_iface < 8)
        throw MeshGenerationFailure("target_h too coarse to resolve the inclusion: fewer than 8 interface nodes");

    validate_mesh(m);
    return m;
}

void validate_mesh(const TriangleMesh& m) {
    const double h = m.mesh_size > 0 ? m.mesh_size : 1.0;
    for (int t = 0; t < m.num_triangles(); ++t) {
        const double a = m.triangle_area(t);
        if (!(a > 1e-14 * h * h))
            throw MeshGenerationFailure("degenerate or inverted triangle " + std::to_string(t));
    }
    std::unordered_map<std::uint64_t, int> tag_sum;
    std::unordered_map<std::uint64_t, int> count;
    for (int t = 0; t < m.num_triangles(); ++t) {
        const auto& tri = m.triangles[t];
        for (int e = 0; e < 3; ++e) {
            const auto key = edge_key(tri[e], tri[(e + 1) % 3]);
            count[key] += 1;
            tag_sum[key] += static_cast<int>(m.tri_tag[t]);
        }
    }
    for (const auto& e : m.interface_edges) {
        const auto key = edge_key(e[0], e[1]);
        auto it = count.find(key);
        if (it == count.end()) throw TopologyError("interface edge not in mesh");
        if (it->second == 2 && tag_sum[key] != 3)
            throw TopologyError("interface edge does not separate Y1 from Y2");
    }
    for (const auto& p : m.periodic_pairs) {
        const Vec2 d = m.vertices[p[1]] - m.vertices[p[0]];
        const bool unit_x = std::abs(std::abs(d.x()) - 1.0) < 1e-12 && std::abs(d.y()) < 1e-12;
        const bool unit_y = std::abs(std::abs(d.y()) - 1.0) < 1e-12 && std::abs(d.x()) < 1e-12;
        if (!unit_x && !unit_y)
            throw TopologyError("periodic pair does not differ by a unit lattice vector");
        if (p[0] == p[1]) throw TopologyError("periodic pair links a vertex to itself");
    }
}

std::vector<int> periodic_representatives(const TriangleMesh& m) {
    std::vector<int> rep(m.vertices.size());
    for (std::size_t i = 0; i < rep.size(); ++i) rep[i] = static_cast<int>(i);
    auto find = [&rep](int v) {
        while (rep[v] != v) {
            rep[v] = rep[rep[v]];
            v = rep[v];
        }
        return v;
    };
    for (const auto& p : m.periodic_pairs) {
        const int a = find(p[0]), b = find(p[1]);
        if (a != b) rep[std::max(a, b)] = std::min(a, b);
    }
    for (std::size_t v = 0; v < rep.size(); ++v) rep[v] = find(static_cast<int>(v));
    return rep;
}

SurfaceMesh extract_surface_mesh(const TriangleMesh& mesh) {
    if (mesh.interface_edges.empty())
        throw TopologyError("mesh has no interface edges");

    std::unordered_map<int, std::array<int, 2>> neighbors;
    for (const auto& e : mesh.interface_edges) {
        for (int k = 0; k < 2; ++k) {
            auto [it, inserted] = neighbors.try_emplace(e[k], std::array<int, 2>{-1, -1});
            auto& nb = it->second;
            if (nb[0] == -1) {
                nb[0] = e[1 - k];
            } else if (nb[1] == -1) {
                nb[1] = e[1 - k];
            } else {
                throw TopologyError("interface vertex with more than two interface edges");
            }
        }
    }
    for (const auto& [v, nb] : neighbors)
        if (nb[1] == -1) throw TopologyError("open interface curve: interface edges do not form a closed loop");

    int start = neighbors.begin()->first;
    for (const auto& [v, nb] : neighbors) start = std::min(start, v);

    std::vector<int> loop;
    loop.reserve(neighbors.size());
    int prev = -1, cur = start;
    do {
        loop.push_back(cur);
        const auto& nb = neighbors.at(cur);
        const int next = (nb[0] == prev) ? nb[1] : nb[0];
        prev = cur;
        cur = next;
    } while (cur != start && loop.size() <= neighbors.size());
    if (loop.size() != neighbors.size() || cur != start)
        throw TopologyError("interface edges form more than one loop");

    SurfaceMesh s;
    s.parent_vertex = loop;
    s.nodes.reserve(loop.size());
    for (int v : loop) s.nodes.push_back(mesh.vertices[v]);
    if (s.signed_area() < 0) {
        std::reverse(s.nodes.begin(), s.nodes.end());
        std::reverse(s.parent_vertex.begin(), s.parent_vertex.end());
    }

    const int n = s.num_nodes();
    s.tangent.resize(n);
    s.normal.resize(n);
    s.edge_length.resize(n);
    for (int e = 0; e < n; ++e) {
        const Vec2 d = s.nodes[(e + 1) % n] - s.nodes[e];
        const double len = d.norm();
        if (!(len > 0)) throw TopologyError("zero-length interface edge");
        s.edge_length[e] = len;
        s.tangent[e] = d / len;
        s.normal[e] = Vec2(s.tangent[e].y(), -s.tangent[e].x()); // outward from Y2 for a CCW loop
    }
    return s;
}

SideMesh extract_side_mesh(const TriangleMesh& full, const SurfaceMesh& surf, SubdomainTag tag) {
    SideMesh side;
    std::vector<int> local(full.vertices.size(), -1);
    for (int t = 0; t < full.num_triangles(); ++t) {
        if (full.tri_tag[t] != tag) continue;
        std::array<int, 3> tri;
        for (int k = 0; k < 3; ++k) {
            const int v = full.triangles[t][k];
            if (local[v] == -1) {
                local[v] = static_cast<int>(side.to_parent.size());
                side.to_parent.push_back(v);
                side.mesh.vertices.push_back(full.vertices[v]);
            }
            tri[k] = local[v];
        }
        side.mesh.triangles.push_back(tri);
        side.mesh.tri_tag.push_back(tag);
    }

    side.surf_to_bulk.resize(surf.num_nodes());
    for (int s = 0; s < surf.num_nodes(); ++s) {
        const int v = local[surf.parent_vertex[s]];
        if (v == -1)
            throw TopologyError("interface node missing from side mesh (trace is not a restriction)");
        side.surf_to_bulk[s] = v;
    }

    for (const auto& e : full.interface_edges)
        if (local[e[0]] != -1 && local[e[1]] != -1)
            side.mesh.interface_edges.push_back({local[e[0]], local[e[1]]});
    for (const auto& e : full.outer_edges)
        if (local[e[0]] != -1 && local[e[1]] != -1)
            side.mesh.outer_edges.push_back({local[e[0]], local[e[1]]});
    for (const auto& p : full.periodic_pairs)
        if (local[p[0]] != -1 && local[p[1]] != -1)
            side.mesh.periodic_pairs.push_back({local[p[0]], local[p[1]]});
    side.mesh.mesh_size = full.mesh_size;
    return side;
}

UnitCell build_unit_cell(const UnitCellGeometry& geom, double target_h) {
    UnitCell cell;
    cell.geom = geom;
    cell.full = build_cell_mesh(geom, target_h);
    cell.surface = extract_surface_mesh(cell.full);
    cell.y1 = extract_side_mesh(cell.full, cell.surface, SubdomainTag::Y1);
    cell.y2 = extract_side_mesh(cell.full, cell.surface, SubdomainTag::Y2);
    cell.area_y1 = cell.full.area_of(SubdomainTag::Y1);
    cell.area_y2 = cell.full.area_of(SubdomainTag::Y2);
    cell.gamma_length = cell.surface.total_length();
    return cell;
}

double interface_hausdorff_distance(const SurfaceMesh& surf, const Vec2& center, double radius) {
    double d = 0;
    for (const auto& p : surf.nodes) d = std::max(d, std::abs((p - center).norm() - radius));
    // Circle-to-polygon direction: the sagitta over each chord.
    for (int e = 0; e < surf.num_edges(); ++e) {
        auto [i, j] = surf.edge(e);
        const Vec2 mid = 0.5 * (surf.nodes[i] + surf.nodes[j]);
        d = std::max(d, std::abs(radius - (mid - center).norm()));
    }
    return d;
}

namespace {

void print_float(std::FILE* f, double x) { std::fprintf(f, "%.17g", x); }

} // namespace

void write_mesh(const TriangleMesh& m, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw IoError("cannot open for writing: " + path);
    std::fprintf(f, "meshfmt 1\n");
    std::fprintf(f, "vertices %d\n", m.num_vertices());
    for (const auto& v : m.vertices) {
        print_float(f, v.x());
        std::fputc(' ', f);
        print_float(f, v.y());
        std::fputc('\n', f);
    }
    std::fprintf(f, "triangles %d\n", m.num_triangles());
    for (int t = 0; t < m.num_triangles(); ++t) {
        const auto& tri = m.triangles[t];
        std::fprintf(f, "%d %d %d %d\n", tri[0], tri[1], tri[2], static_cast<int>(m.tri_tag[t]));
    }
    std::fprintf(f, "interface_edges %zu\n", m.interface_edges.size());
    for (const auto& e : m.interface_edges) std::fprintf(f, "%d %d\n", e[0], e[1]);
    std::fprintf(f, "periodic_pairs %zu\n", m.periodic_pairs.size());
    for (const auto& p : m.periodic_pairs) std::fprintf(f, "%d %d\n", p[0], p[1]);
    std::fclose(f);
}

TriangleMesh read_mesh(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path);
    std::string word;
    int version = 0;
    if (!(in >> word >> version) || word != "meshfmt" || version != 1)
        throw TopologyError("bad mesh header in " + path);

    TriangleMesh m;
    long long count = 0;
    auto need = [&](const char* section) {
        if (!(in >> word >> count) || word != section || count < 0)
            throw TopologyError(std::string("bad or missing section '") + section + "' in " + path);
    };

    need("vertices");
    m.vertices.resize(count);
    for (auto& v : m.vertices) {
        double x, y;
        if (!(in >> x >> y)) throw TopologyError("truncated vertex list in " + path);
        if (!std::isfinite(x) || !std::isfinite(y)) throw TopologyError("non-finite vertex in " + path);
        v = Vec2(x, y);
    }
    need("triangles");
    m.triangles.resize(count);
    m.tri_tag.resize(count);
    for (long long t = 0; t < count; ++t) {
        int a, b, c, tag;
        if (!(in >> a >> b >> c >> tag)) throw TopologyError("truncated triangle list in " + path);
        if (a < 0 || b < 0 || c < 0 || a >= m.num_vertices() || b >= m.num_vertices() || c >= m.num_vertices())
            throw TopologyError("triangle vertex index out of range in " + path);
        if (tag != 1 && tag != 2) throw TopologyError("unknown subdomain tag in " + path);
        m.triangles[t] = {a, b, c};
        m.tri_tag[t] = static_cast<SubdomainTag>(tag);
    }
    need("interface_edges");
    m.interface_edges.resize(count);
    for (auto& e : m.interface_edges) {
        if (!(in >> e[0] >> e[1])) throw TopologyError("truncated interface edge list in " + path);
        if (e[0] < 0 || e[1] < 0 || e[0] >= m.num_vertices() || e[1] >= m.num_vertices())
            throw TopologyError("interface edge index out of range in " + path);
    }
    need("periodic_pairs");
    m.periodic_pairs.resize(count);
    for (auto& p : m.periodic_pairs) {
        if (!(in >> p[0] >> p[1])) throw TopologyError("truncated periodic pair list in " + path);
        if (p[0] < 0 || p[1] < 0 || p[0] >= m.num_vertices() || p[1] >= m.num_vertices())
            throw TopologyError("periodic pair index out of range in " + path);
    }

    double hmax = 0;
    for (const auto& tri : m.triangles)
        for (int e = 0; e < 3; ++e)
            hmax = std::max(hmax, (m.vertices[tri[e]] - m.vertices[tri[(e + 1) % 3]]).norm());
    m.mesh_size = hmax;
    return m;
}

} // namespace whomog
