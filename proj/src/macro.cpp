#include <whomog/macro.hpp>

#include <algorithm>
#include <cmath>

namespace whomog {

AveragedReactions average_reactions(const UnitCell& cell, const ReactionSpec& R) {
    AveragedReactions A;
    const double a1 = cell.area_y1, a2 = cell.area_y2, g = cell.gamma_length;

    if (!R.f_depends_on_y) {
        const Vec2 y1 = cell.y1.mesh.centroid(0);
        const Vec2 y2 = cell.y2.mesh.centroid(0);
        A.F1 = [f = R.f1, a1, y1](double t, double z) { return a1 * f(t, y1, z); };
        A.F2 = [f = R.f2, a2, y2](double t, double z) { return a2 * f(t, y2, z); };
    } else {
        // midpoint quadrature over the committed cell mesh
        auto quad = [](const TriangleMesh& m,
                       const std::function<double(double, const Vec2&, double)>& f) {
            return [&m, f](double t, double z) {
                double v = 0;
                for (int e = 0; e < m.num_triangles(); ++e)
                    v += m.triangle_area(e) * f(t, m.centroid(e), z);
                return v;
            };
        };
        A.F1 = quad(cell.y1.mesh, R.f1);
        A.F2 = quad(cell.y2.mesh, R.f2);
    }

    if (!R.h_depends_on_y) {
        const Vec2 yg = cell.surface.edge_coefficient_point(0);
        A.H1 = [h = R.h1, g, yg](double t, double z1, double z2) { return g * h(t, yg, z1, z2); };
        A.H2 = [h = R.h2, g, yg](double t, double z1, double z2) { return g * h(t, yg, z1, z2); };
    } else {
        auto quad = [surf = &cell.surface](
                        const std::function<double(double, const Vec2&, double, double)>& h) {
            return [surf, h](double t, double z1, double z2) {
                double v = 0;
                for (int e = 0; e < surf->num_edges(); ++e)
                    v += surf->edge_length[e] * h(t, surf->edge_coefficient_point(e), z1, z2);
                return v;
            };
        };
        A.H1 = quad(R.h1);
        A.H2 = quad(R.h2);
    }

    A.lipschitz = R.lipschitz * std::max({a1, a2, g});
    return A;
}

MacroProblem build_macro_problem(int n, const Mat2& dhat, const UnitCell& cell,
                                 AveragedReactions reactions) {
    MacroProblem p;
    p.mesh = build_square_mesh(n);
    p.dhat = dhat;
    p.area_y1 = cell.area_y1;
    p.area_y2 = cell.area_y2;
    p.gamma = cell.gamma_length;
    p.M = assemble_mass(p.mesh);
    p.K = assemble_bulk_stiffness(p.mesh, [dhat](const Vec2&) { return dhat; });
    p.R = std::move(reactions);
    return p;
}

MacroState weighted_initial_data(const MacroProblem& prob, const ScalarField& u0i_1,
                                 const ScalarField& u0iG_1, const ScalarField& u0i_2,
                                 const ScalarField& u0iG_2) {
    MacroState s;
    s.t = 0;
    const int n = prob.mesh.num_vertices();
    s.u1.resize(n);
    s.u2.resize(n);
    for (int v = 0; v < n; ++v) {
        const Vec2& x = prob.mesh.vertices[v];
        s.u1[v] = (prob.area_y1 * u0i_1(x) + prob.gamma * u0iG_1(x)) / prob.weight1();
        s.u2[v] = (prob.area_y2 * u0i_2(x) + prob.gamma * u0iG_2(x)) / prob.weight2();
    }
    return s;
}

MacroState macro_step(const MacroProblem& prob, const MacroState& state, double dt,
                      StepDiagnostics* diag) {
    if (!(dt > 0)) throw ValidationError("macro step requires dt > 0");
    const double w1 = prob.weight1(), w2 = prob.weight2();
    const double l_eff = prob.R.lipschitz / std::min(w1, w2);
    if (diag) diag->stability_warning = dt * l_eff >= 1.0;

    const int n = prob.mesh.num_vertices();
    VecX reaction1(n), reaction2(n);
    for (int v = 0; v < n; ++v) {
        const double z1 = state.u1[v], z2 = state.u2[v];
        reaction1[v] = prob.R.F1(state.t, z1) + prob.R.H1(state.t, z1, z2);
        reaction2[v] = prob.R.F2(state.t, z2) + prob.R.H2(state.t, z1, z2);
    }
    if (prob.source1) {
        for (int v = 0; v < n; ++v) reaction1[v] += prob.source1(state.t, prob.mesh.vertices[v]);
    }

    const SpMat A = SpMat(w1 * prob.M + dt * prob.K);
    const VecX rhs = w1 * (prob.M * state.u1) + dt * (prob.M * reaction1);

    MacroState next;
    next.t = state.t + dt;
    SolveReport rep;
    next.u1 = cg_solve(A, rhs, prob.solve_opt, &rep, &state.u1);
    if (diag) diag->solve = rep;
    next.u2 = state.u2 + (dt / w2) * reaction2;
    if (!next.u2.allFinite()) throw SolverDivergence("macro ODE field diverged");
    return next;
}

MacroRunResult macro_run(const MacroProblem& prob, const MacroState& initial, double T, double dt,
                         const std::vector<double>& snapshot_times) {
    if (T < 0 || !(dt > 0)) throw ValidationError("macro run requires T >= 0 and dt > 0");
    std::vector<double> targets = snapshot_times;
    targets.push_back(T);
    std::sort(targets.begin(), targets.end());
    targets.erase(std::unique(targets.begin(), targets.end(),
                              [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                  targets.end());

    MacroRunResult out;
    MacroState state = initial;
    auto record = [&](const MacroState& s) {
        const VecX ones = VecX::Ones(s.u1.size());
        MacroDiagnosticsRow row;
        row.t = s.t;
        row.mass1 = prob.weight1() * ones.dot(prob.M * s.u1);
        row.mass2 = prob.weight2() * ones.dot(prob.M * s.u2);
        row.energy = 0.5 * s.u1.dot(prob.K * s.u1);
        row.min_u1 = s.u1.minCoeff();
        row.max_u1 = s.u1.maxCoeff();
        out.diagnostics.push_back(row);
        out.snapshots.push_back(s);
    };

    for (double target : targets) {
        if (target < -1e-12 || target > T + 1e-12)
            throw ValidationError("snapshot time outside [0, T]");
        while (state.t < target - 1e-12) {
            const double step = std::min(dt, target - state.t);
            StepDiagnostics diag;
            state = macro_step(prob, state, step, &diag);
            out.stability_warning |= diag.stability_warning;
        }
        state.t = target; // absorb round-off from repeated stepping
        record(state);
    }
    return out;
}

} // namespace whomog
