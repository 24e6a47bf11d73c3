#ifndef WHOMOG_MACRO_HPP
#define WHOMOG_MACRO_HPP

#include <whomog/cell_problem.hpp>
#include <whomog/fem.hpp>

namespace whomog {

/*! Macroscopic pair (u0^1, u0^2) collocated on the macro mesh of Omega.
//  u0^2 carries no spatial derivatives, so it rides along nodally. */
struct MacroState {
    double t = 0;
    VecX u1, u2;
};

/*! Cell-averaged reaction terms
//    F_j(t,z)      = int_{Y_j} f^j(t,y,z) dy
//    H_j(t,z1,z2)  = int_Gamma h^j(t,y,z1,z2) dsigma_y
//  realized by quadrature over the committed cell mesh; y-independent
//  reactions reduce to measure * value. */
struct AveragedReactions {
    std::function<double(double, double)> F1, F2;
    std::function<double(double, double, double)> H1, H2;
    double lipschitz = 0; // of the averaged maps
};

AveragedReactions average_reactions(const UnitCell& cell, const ReactionSpec& R);

struct MacroProblem {
    TriangleMesh mesh; // of Omega, no perforations
    Mat2 dhat = Mat2::Identity();
    double area_y1 = 0, area_y2 = 0, gamma = 0; // meshed cell measures
    SpMat M, K;                                 // consistent mass; stiffness with dhat
    AveragedReactions R;
    // optional explicit forcing of the u1 equation (manufactured solutions)
    std::function<double(double, const Vec2&)> source1;
    SolveOptions solve_opt{1e-12, 10000};

    double weight1() const { return area_y1 + gamma; }
    double weight2() const { return area_y2 + gamma; }
};

MacroProblem build_macro_problem(int n, const Mat2& dhat, const UnitCell& cell,
                                 AveragedReactions reactions);

/*! Weighted initial data u0^j(0) = (|Y_j| u_{0,i}^j + |Gamma| u_{0,i,G}^j) / (|Y_j| + |Gamma|),
//  with the meshed measures as weights. */
MacroState weighted_initial_data(const MacroProblem& prob, const ScalarField& u0i_1,
                                 const ScalarField& u0iG_1, const ScalarField& u0i_2,
                                 const ScalarField& u0iG_2);

struct StepDiagnostics {
    bool stability_warning = false;
    SolveReport solve;
};

/*! One IMEX backward-Euler step: diffusion implicit, reactions explicit.
//    (w1 M + dt K) u1' = w1 M u1 + dt M [F1 + H1](t_n) + dt M s(t_n)
//    w2 (u2' - u2)/dt = F2(t_n) + H2(t_n)   per node
//  Emits a StabilityWarning flag when dt * L_eff >= 1. */
MacroState macro_step(const MacroProblem& prob, const MacroState& state, double dt,
                      StepDiagnostics* diag = nullptr);

struct MacroDiagnosticsRow {
    double t = 0, mass1 = 0, mass2 = 0, energy = 0, min_u1 = 0, max_u1 = 0;
};

struct MacroRunResult {
    std::vector<MacroState> snapshots;
    std::vector<MacroDiagnosticsRow> diagnostics;
    bool stability_warning = false;
};

// Steps to T, shortening steps to land exactly on the requested snapshot
// times (and on T).
MacroRunResult macro_run(const MacroProblem& prob, const MacroState& initial, double T, double dt,
                         const std::vector<double>& snapshot_times);

} // namespace whomog

#endif
