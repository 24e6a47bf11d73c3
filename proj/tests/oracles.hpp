// Test-only quadrature and reference computations, kept independent of the
// assembled-operator code paths they check.
#ifndef WHOMOG_TESTS_ORACLES_HPP
#define WHOMOG_TESTS_ORACLES_HPP

#include <whomog/geometry.hpp>

#include <cmath>
#include <functional>

namespace oracles {

using whomog::SurfaceMesh;
using whomog::TriangleMesh;
using whomog::Vec2;
using whomog::VecX;

// Exact integral of a squared P1 field over a triangle via the quadratic
// edge-midpoint rule.
inline double bulk_l2_squared(const TriangleMesh& m, const VecX& u) {
    double total = 0;
    for (int t = 0; t < m.num_triangles(); ++t) {
        const auto& tri = m.triangles[t];
        const double a = u[tri[0]], b = u[tri[1]], c = u[tri[2]];
        const double m01 = 0.5 * (a + b), m12 = 0.5 * (b + c), m20 = 0.5 * (c + a);
        total += m.triangle_area(t) * (m01 * m01 + m12 * m12 + m20 * m20) / 3.0;
    }
    return total;
}

// Exact integral of |grad u|^2 for P1.
inline double bulk_h1_semi_squared(const TriangleMesh& m, const VecX& u) {
    double total = 0;
    for (int t = 0; t < m.num_triangles(); ++t) {
        const auto& tri = m.triangles[t];
        const Vec2 pa = m.vertices[tri[0]], pb = m.vertices[tri[1]], pc = m.vertices[tri[2]];
        const double det = (pb.x() - pa.x()) * (pc.y() - pa.y()) - (pb.y() - pa.y()) * (pc.x() - pa.x());
        const Vec2 g0 = Vec2(pb.y() - pc.y(), pc.x() - pb.x()) / det;
        const Vec2 g1 = Vec2(pc.y() - pa.y(), pa.x() - pc.x()) / det;
        const Vec2 g2 = Vec2(pa.y() - pb.y(), pb.x() - pa.x()) / det;
        const Vec2 grad = u[tri[0]] * g0 + u[tri[1]] * g1 + u[tri[2]] * g2;
        total += 0.5 * det * grad.squaredNorm();
    }
    return total;
}

// Simpson on each edge (exact for quadratics) for a P1 trace field given in
// surface numbering.
inline double surface_l2_squared(const SurfaceMesh& s, const VecX& trace) {
    double total = 0;
    for (int e = 0; e < s.num_edges(); ++e) {
        auto [i, j] = s.edge(e);
        const double a = trace[i], b = trace[j], mid = 0.5 * (a + b);
        total += s.edge_length[e] * (a * a + 4.0 * mid * mid + b * b) / 6.0;
    }
    return total;
}

inline double surface_h1_semi_squared(const SurfaceMesh& s, const VecX& trace) {
    double total = 0;
    for (int e = 0; e < s.num_edges(); ++e) {
        auto [i, j] = s.edge(e);
        const double d = (trace[j] - trace[i]) / s.edge_length[e];
        total += s.edge_length[e] * d * d;
    }
    return total;
}

// Midpoint quadrature of a smooth function over the meshed region.
inline double integrate(const TriangleMesh& m, const std::function<double(const Vec2&)>& f) {
    double total = 0;
    for (int t = 0; t < m.num_triangles(); ++t) {
        const auto& tri = m.triangles[t];
        const Vec2 m01 = 0.5 * (m.vertices[tri[0]] + m.vertices[tri[1]]);
        const Vec2 m12 = 0.5 * (m.vertices[tri[1]] + m.vertices[tri[2]]);
        const Vec2 m20 = 0.5 * (m.vertices[tri[2]] + m.vertices[tri[0]]);
        total += m.triangle_area(t) * (f(m01) + f(m12) + f(m20)) / 3.0;
    }
    return total;
}

} // namespace oracles

#endif
