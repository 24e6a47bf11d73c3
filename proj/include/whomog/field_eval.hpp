#ifndef WHOMOG_FIELD_EVAL_HPP
#define WHOMOG_FIELD_EVAL_HPP

#include <whomog/geometry.hpp>

namespace whomog {

/*! Point evaluation of P1 fields via a uniform bin grid over the mesh
//  bounding box. Points marginally outside the meshed region (polygonal
//  boundary gaps) fall back to the element with the least-negative
//  barycentric coordinate and are extrapolated. */
class P1Evaluator {
public:
    explicit P1Evaluator(const TriangleMesh& mesh);

    struct Stencil {
        int tri = -1;
        std::array<double, 3> lambda{0, 0, 0};
    };

    int locate(const Vec2& p) const; // triangle id; throws DomainMismatch when hopeless
    Stencil stencil(const Vec2& p) const;
    double value(const VecX& nodal, const Stencil& s) const;
    Vec2 gradient(const VecX& nodal, const Stencil& s) const;
    double value(const VecX& nodal, const Vec2& p) const;
    Vec2 gradient(const VecX& nodal, const Vec2& p) const;

    const TriangleMesh& mesh() const { return *mesh_; }

private:
    const TriangleMesh* mesh_;
    Vec2 lo_, hi_;
    int nx_ = 1, ny_ = 1;
    std::vector<std::vector<int>> bins_;

    void barycentric(int t, const Vec2& p, double lambda[3]) const;
};

} // namespace whomog

#endif
