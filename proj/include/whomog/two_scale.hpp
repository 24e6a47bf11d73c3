#ifndef WHOMOG_TWO_SCALE_HPP
#define WHOMOG_TWO_SCALE_HPP

#include <whomog/cell_problem.hpp>
#include <whomog/micro.hpp>

#include <array>
#include <string>

namespace whomog {

enum class UnfoldTag { Y, Y1, Y2, Gamma };

/*! The unfolding T_eps v(x,y) = v(eps [x/eps] + eps y) of a P1 micro field:
//  piecewise constant in x per lattice cell, P1 in y on the reference cell
//  mesh (or surface). Because micro meshes are exact scaled tiles, the
//  values are gathered structurally per tile; no point folding happens.
//  The boundary remainder Lambda_eps is empty for Omega = (0,1)^2 with
//  1/eps integer; general domains would zero-extend, which this carrier
//  represents by simply having no cell. */
struct UnfoldedField {
    double epsilon = 1;
    UnfoldTag tag = UnfoldTag::Y;
    std::shared_ptr<const UnitCell> cell;
    Eigen::MatrixXd values; // tiles x reference nodes

    int tiles() const { return static_cast<int>(values.rows()); }
};

UnfoldedField unfold(const EpsilonTiling& tl, const VecX& field, UnfoldTag tag);
// Unfolds the Gamma_eps trace of a bulk side field.
UnfoldedField unfold_trace(const EpsilonTiling& tl, const VecX& bulk_field, Side side);

// L^2(Omega x G) norm of the unfolded field (exact quadrature for P1).
double unfolded_l2_norm(const UnfoldedField& u);
// Independent route: L^2 over the physical micro domain / surface.
double micro_l2_norm(const EpsilonTiling& tl, const VecX& field, UnfoldTag tag);
double micro_surface_l2_norm(const EpsilonTiling& tl, const VecX& bulk_field, Side side);

// Unfolding identity defects, all expected at round-off level:
//   grad_y T_eps v = eps T_eps grad_x v        (bulk, max over elements)
//   grad_{G,y} T_eps v = eps T_eps grad_G v    (surface, max over edges)
//   || T_eps v ||_{L2(Omega x Gamma)} = eps^{1/2} || v ||_{L2(Gamma_eps)}
double unfold_gradient_identity_check(const EpsilonTiling& tl, const VecX& field, UnfoldTag tag);
double surface_gradient_identity_check(const EpsilonTiling& tl, const VecX& bulk_field, Side side);
double surface_norm_identity_check(const EpsilonTiling& tl, const VecX& bulk_field, Side side);
double bulk_norm_identity_check(const EpsilonTiling& tl, const VecX& field, UnfoldTag tag);

// Oscillating-test-function pairing int u_eps(x) b(x) c(x/eps) dx with c
// Y-periodic, against its unfolded counterpart
// sum_k eps^2 int_G u(k,y) b(eps(k+y)) c(y) dy.
double two_scale_pairing(const EpsilonTiling& tl, const VecX& field, UnfoldTag tag,
                         const ScalarField& b, const ScalarField& c);
double two_scale_pairing_surface(const EpsilonTiling& tl, const VecX& bulk_field, Side side,
                                 const ScalarField& b, const ScalarField& c);
double unfolded_pairing(const UnfoldedField& u, const ScalarField& b, const ScalarField& c);

// --- discrete shift estimates ------------------------------------------------

// Tiles k with eps(k+Y) inside Omega_h and k+l still a lattice cell.
std::vector<int> interior_shift_tiles(const EpsilonTiling& tl, const std::array<int, 2>& l,
                                      double h);

// || delta_l v ||_{L^2(Omega^2_{eps,h})} for a field on Omega_eps^2 (one time).
double shift_difference_norm(const EpsilonTiling& tl, const VecX& field2,
                             const std::array<int, 2>& l, double h);
// Same for a side-1 field over Omega^1_{eps,h}.
double shift_difference_norm1(const EpsilonTiling& tl, const VecX& field1,
                              const std::array<int, 2>& l, double h);
// || delta_l (v, v|_Gamma) ||_{L_{2,eps,h}} of a side-2 field (initial data term).
double shift_lje_norm(const EpsilonTiling& tl, const VecX& field2, const std::array<int, 2>& l,
                      double h);

// --- the eps-sweep harness ---------------------------------------------------

struct SweepModel {
    UnitCellGeometry geom;
    double cell_h = 0.05;
    DiffusionSpec D;
    ReactionSpec R;
    // micro initial profiles U^j(x, y)
    std::function<double(const Vec2&, const Vec2&)> U1, U2;
    // their two-scale limit data feeding the weighted macro initial condition
    ScalarField u0i_1, u0iG_1, u0i_2, u0iG_2;
};

struct SweepParams {
    std::vector<int> inv_epsilons{2, 4, 8};
    double T = 0.25;
    double dt = 1e-3;
    int macro_n = 32;
    int snapshots = 11;
    int threads = 1;
    double monotonicity_ratio = 0.9;
    std::vector<std::array<int, 2>> shift_offsets{{1, 0}, {2, 0}};
};

struct ConvergenceRow {
    double epsilon = 0;
    double e1_bulk = 0, e1_surf = 0, e2_bulk = 0, e2_surf = 0;
    double e1_grad = 0, grad2_norm = 0;
    double hje1 = 0, hje2 = 0;
};

struct ShiftRow {
    double epsilon = 0;
    int lx = 0, ly = 0;
    double h = 0;
    double lhs = 0, rhs_u1 = 0, rhs_init = 0, rhs = 0;
    bool ok = true;
};

struct ConvergenceReport {
    std::vector<ConvergenceRow> rows;
    std::vector<ShiftRow> shifts;
    double shift_constant = 0;
    Mat2 dhat = Mat2::Identity();
    bool monotone = true;
    bool stability_warning = false;
    std::vector<std::string> notes;
};

/*! Runs the macro problem once and the micro problem per epsilon, unfolds
//  the trajectories on a fixed uniform snapshot grid, and reports the
//  unfolded error norms
//    e1_bulk = ||T_eps u1 - u0^1||_{L2((0,T) x Omega x Y1)}
//    e1_surf, e2_bulk, e2_surf analogously,
//    e1_grad = ||T_eps grad u1 - (grad u0^1 + grad_y u1^1)||,
//    grad2_norm = ||T_eps grad u2||,
//  plus the a-priori-norm uniformity values and the shift table with a
//  constant calibrated at the largest feasible epsilon. The macro field is
//  compared through its values at the unfolded sample points eps(k+y).
//  Non-monotone decrease is flagged in the report, not thrown. */
ConvergenceReport convergence_sweep(const SweepModel& model, const SweepParams& params);

} // namespace whomog

#endif
