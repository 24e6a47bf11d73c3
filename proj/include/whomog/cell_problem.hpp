#ifndef WHOMOG_CELL_PROBLEM_HPP
#define WHOMOG_CELL_PROBLEM_HPP

#include <whomog/fem.hpp>

#include <array>

namespace whomog {

/*! Correctors w_i on Y1 (nodal fields in the bulk numbering of the Y1 side
//  mesh; the trace on Gamma is the restriction). Each solves
//
//    int_{Y1} D1 (grad w_i + e_i) . grad phi
//      + int_Gamma DG1 (grad_G w_i + P_G e_i) . grad_G phi = 0
//
//  over Y-periodic phi, normalized by zero mean on Gamma. The Y2 corrector
//  vanishes identically, so only side 1 is solved. */
struct CellSolutionSet {
    std::array<VecX, 2> w;
    std::array<double, 2> residual_norm{0, 0};
    std::array<double, 2> mean_on_gamma{0, 0};
};

struct EffectiveTensor {
    Mat2 entries;
    Vec2 eigenvalues;
    double symmetry_defect = 0;
    double min_eigenvalue = 0;
};

VecX solve_cell_problem(const UnitCell& cell, const DiffusionSpec& D, const Vec2& direction,
                        SolveReport* report = nullptr, const SolveOptions& opt = {});

CellSolutionSet solve_cell_problems(const UnitCell& cell, const DiffusionSpec& D,
                                    const SolveOptions& opt = {});

EffectiveTensor assemble_effective_tensor(const UnitCell& cell, const DiffusionSpec& D,
                                          const CellSolutionSet& sols);

// Linear combination g1 w1 + g2 w2 (the cell part of the first-order
// corrector eps u1(x, x/eps) with g = grad u0(x)).
VecX reconstruct_corrector(const Vec2& gradient, const CellSolutionSet& sols);

// Energy of a trial field against unit direction xi: the quadratic whose
// minimum over periodic fields defines xi . Dhat xi.
double corrector_energy(const UnitCell& cell, const DiffusionSpec& D, const VecX& w,
                        const Vec2& xi);

// Gradient of a P1 field per triangle of the Y1 side mesh.
std::vector<Vec2> element_gradients(const TriangleMesh& mesh, const VecX& nodal);

// Integral of w over Gamma using the surface mass (trace taken by
// restriction through the side's surf_to_bulk map).
double gamma_mean(const UnitCell& cell, const VecX& w_bulk);

} // namespace whomog

#endif
