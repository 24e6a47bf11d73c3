#ifndef WHOMOG_MICRO_HPP
#define WHOMOG_MICRO_HPP

#include <whomog/fem.hpp>
#include <whomog/macro.hpp>

#include <memory>

namespace whomog {

/*! Nodal state of the eps-problem. u1 lives on Omega_eps^1, u2 on
//  Omega_eps^2; traces on Gamma_eps are restrictions, and the two interface
//  trace vectors are independent unknowns (jumps across Gamma_eps are
//  allowed). */
struct MicroState {
    double t = 0;
    VecX u1, u2;
    double epsilon = 1.0;
};

/*! Assembled operators of the eps-weighted variational form per side:
//    A_j = M_bulk + eps M_surf   (the L_{j,eps} inner product)
//    S_j = K_bulk(D^j) + eps K_surf(D_Gamma^j)
//  Surface operators carry the physical Gamma_eps metric; the exact eps
//  weights sit in front of them. */
struct WentzellSystem {
    std::shared_ptr<const EpsilonTiling> tiling;
    double epsilon = 1.0;
    SpMat Mb1, Mb2;       // bulk mass
    SpMat Msurf1, Msurf2; // lifted surface mass (no eps weight)
    SpMat A1, A2;
    SpMat S1, S2;
    HjeForm hje1, hje2; // unit-coefficient diagnostic forms
    SolveOptions solve_opt{1e-12, 20000};
};

WentzellSystem build_wentzell_system(std::shared_ptr<const EpsilonTiling> tiling,
                                     const DiffusionSpec& D);

// Nodal sampling of initial profiles U^j(x, y) at (physical, unit-cell)
// vertex coordinates, realizing data of the form u_{eps,i}^j(x) = U^j(x, x/eps).
MicroState micro_initial_state(const EpsilonTiling& tl,
                               const std::function<double(const Vec2&, const Vec2&)>& U1,
                               const std::function<double(const Vec2&, const Vec2&)>& U2);

/*! One IMEX step per side with Jacobi (explicit) interface coupling:
//    (A_j + dt S_j) u_j' = A_j u_j + dt [ M_b f_j(t, y, u_j) + eps M_s h_j(t, y, u1, u2) ]
//  Reactions are evaluated at unit-cell coordinates y carried by the tiling. */
MicroState micro_step(const WentzellSystem& sys, const ReactionSpec& R, const MicroState& state,
                      double dt, StepDiagnostics* diag = nullptr);

struct MicroDiagnosticsRow {
    double t = 0;
    double mass1 = 0, mass2 = 0;       // (u_j, 1)_{L_{j,eps}}
    double hje_norm1 = 0, hje_norm2 = 0;
    double trace_check_ratio = 0;      // side-1 trace inequality lhs/rhs
};

struct MicroRunResult {
    std::vector<MicroState> snapshots;
    std::vector<MicroDiagnosticsRow> diagnostics;
    double hje_time_norm1 = 0, hje_time_norm2 = 0; // ||u||_{L^2((0,T),H_{j,eps})}
    double trace_constant = 0;
    bool stability_warning = false;
};

MicroRunResult micro_run(const WentzellSystem& sys, const ReactionSpec& R,
                         const MicroState& initial, double T, double dt,
                         const std::vector<double>& snapshot_times, double trace_theta = 1.0,
                         double trace_constant = 0.0 /* 0 = calibrate here */);

} // namespace whomog

#endif
