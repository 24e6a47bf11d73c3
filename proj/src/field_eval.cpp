#include <whomog/field_eval.hpp>

#include <algorithm>
#include <cmath>

namespace whomog {

P1Evaluator::P1Evaluator(const TriangleMesh& mesh) : mesh_(&mesh) {
    lo_ = Vec2(1e300, 1e300);
    hi_ = Vec2(-1e300, -1e300);
    for (const auto& v : mesh.vertices) {
        lo_ = lo_.cwiseMin(v);
        hi_ = hi_.cwiseMax(v);
    }
    const int target = std::max(1, static_cast<int>(std::sqrt(mesh.num_triangles() / 2.0)));
    nx_ = ny_ = target;
    bins_.assign(static_cast<std::size_t>(nx_) * ny_, {});
    const Vec2 span = (hi_ - lo_).cwiseMax(Vec2(1e-12, 1e-12));
    auto bin_range = [&](double a, double b, int n, int& i0, int& i1, int axis) {
        const double lo = axis == 0 ? lo_.x() : lo_.y();
        const double sp = axis == 0 ? span.x() : span.y();
        i0 = std::clamp(static_cast<int>((a - lo) / sp * n), 0, n - 1);
        i1 = std::clamp(static_cast<int>((b - lo) / sp * n), 0, n - 1);
    };
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangles[t];
        Vec2 a = mesh.vertices[tri[0]].cwiseMin(mesh.vertices[tri[1]]).cwiseMin(mesh.vertices[tri[2]]);
        Vec2 b = mesh.vertices[tri[0]].cwiseMax(mesh.vertices[tri[1]]).cwiseMax(mesh.vertices[tri[2]]);
        int x0, x1, y0, y1;
        bin_range(a.x(), b.x(), nx_, x0, x1, 0);
        bin_range(a.y(), b.y(), ny_, y0, y1, 1);
        for (int j = y0; j <= y1; ++j)
            for (int i = x0; i <= x1; ++i) bins_[static_cast<std::size_t>(j) * nx_ + i].push_back(t);
    }
}

void P1Evaluator::barycentric(int t, const Vec2& p, double lambda[3]) const {
    const auto& tri = mesh_->triangles[t];
    const Vec2 a = mesh_->vertices[tri[0]], b = mesh_->vertices[tri[1]], c = mesh_->vertices[tri[2]];
    const double det = (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
    lambda[1] = ((p.x() - a.x()) * (c.y() - a.y()) - (p.y() - a.y()) * (c.x() - a.x())) / det;
    lambda[2] = ((b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x())) / det;
    lambda[0] = 1.0 - lambda[1] - lambda[2];
}

int P1Evaluator::locate(const Vec2& p) const {
    const Vec2 span = (hi_ - lo_).cwiseMax(Vec2(1e-12, 1e-12));
    const int bi = std::clamp(static_cast<int>((p.x() - lo_.x()) / span.x() * nx_), 0, nx_ - 1);
    const int bj = std::clamp(static_cast<int>((p.y() - lo_.y()) / span.y() * ny_), 0, ny_ - 1);

    int best = -1;
    double best_min = -1e300;
    // Search the point's bin first, then widen to the 3x3 neighborhood.
    for (int ring = 0; ring < 2; ++ring) {
        for (int dj = -ring; dj <= ring; ++dj) {
            for (int di = -ring; di <= ring; ++di) {
                if (ring == 1 && std::abs(di) != 1 && std::abs(dj) != 1) continue;
                const int i = bi + di, j = bj + dj;
                if (i < 0 || j < 0 || i >= nx_ || j >= ny_) continue;
                for (int t : bins_[static_cast<std::size_t>(j) * nx_ + i]) {
                    double l[3];
                    barycentric(t, p, l);
                    const double m = std::min({l[0], l[1], l[2]});
                    if (m > best_min) {
                        best_min = m;
                        best = t;
                    }
                }
            }
        }
        if (best_min >= -1e-12) break;
    }
    if (best == -1 || best_min < -0.2)
        throw DomainMismatch("point lies outside the meshed region");
    return best;
}

P1Evaluator::Stencil P1Evaluator::stencil(const Vec2& p) const {
    Stencil s;
    s.tri = locate(p);
    double l[3];
    barycentric(s.tri, p, l);
    s.lambda = {l[0], l[1], l[2]};
    return s;
}

double P1Evaluator::value(const VecX& nodal, const Stencil& s) const {
    const auto& tri = mesh_->triangles[s.tri];
    return s.lambda[0] * nodal[tri[0]] + s.lambda[1] * nodal[tri[1]] + s.lambda[2] * nodal[tri[2]];
}

Vec2 P1Evaluator::gradient(const VecX& nodal, const Stencil& s) const {
    const auto& tri = mesh_->triangles[s.tri];
    const Vec2 a = mesh_->vertices[tri[0]], b = mesh_->vertices[tri[1]], c = mesh_->vertices[tri[2]];
    const double det = (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
    const Vec2 g0 = Vec2(b.y() - c.y(), c.x() - b.x()) / det;
    const Vec2 g1 = Vec2(c.y() - a.y(), a.x() - c.x()) / det;
    const Vec2 g2 = Vec2(a.y() - b.y(), b.x() - a.x()) / det;
    return nodal[tri[0]] * g0 + nodal[tri[1]] * g1 + nodal[tri[2]] * g2;
}

double P1Evaluator::value(const VecX& nodal, const Vec2& p) const {
    const int t = locate(p);
    double l[3];
    barycentric(t, p, l);
    const auto& tri = mesh_->triangles[t];
    return l[0] * nodal[tri[0]] + l[1] * nodal[tri[1]] + l[2] * nodal[tri[2]];
}

Vec2 P1Evaluator::gradient(const VecX& nodal, const Vec2& p) const {
    const int t = locate(p);
    const auto& tri = mesh_->triangles[t];
    const Vec2 a = mesh_->vertices[tri[0]], b = mesh_->vertices[tri[1]], c = mesh_->vertices[tri[2]];
    const double det = (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
    const Vec2 g0 = Vec2(b.y() - c.y(), c.x() - b.x()) / det;
    const Vec2 g1 = Vec2(c.y() - a.y(), a.x() - c.x()) / det;
    const Vec2 g2 = Vec2(a.y() - b.y(), b.x() - a.x()) / det;
    return nodal[tri[0]] * g0 + nodal[tri[1]] * g1 + nodal[tri[2]] * g2;
}

} // namespace whomog
