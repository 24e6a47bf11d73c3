#include <whomog/micro.hpp>

#include <algorithm>
#include <cmath>

namespace whomog {

WentzellSystem build_wentzell_system(std::shared_ptr<const EpsilonTiling> tiling,
                                     const DiffusionSpec& D) {
    if (!tiling) throw GeometryError("wentzell system requires a tiling");
    WentzellSystem sys;
    sys.tiling = tiling;
    sys.epsilon = tiling->epsilon;
    const double eps = sys.epsilon;

    sys.Mb1 = assemble_mass(tiling->mesh1);
    sys.Mb2 = assemble_mass(tiling->mesh2);
    sys.Msurf1 = assemble_tiled_surface_mass(*tiling, Side::One);
    sys.Msurf2 = assemble_tiled_surface_mass(*tiling, Side::Two);
    sys.A1 = SpMat(sys.Mb1 + eps * sys.Msurf1);
    sys.A2 = SpMat(sys.Mb2 + eps * sys.Msurf2);

    const SpMat Kb1 = assemble_bulk_stiffness(tiling->mesh1, D.D1);
    const SpMat Kb2 = assemble_bulk_stiffness(tiling->mesh2, D.D2);
    const SpMat Ks1 = assemble_tiled_surface_stiffness(*tiling, Side::One, D.DG1);
    const SpMat Ks2 = assemble_tiled_surface_stiffness(*tiling, Side::Two, D.DG2);
    sys.S1 = SpMat(Kb1 + eps * Ks1);
    sys.S2 = SpMat(Kb2 + eps * Ks2);

    sys.hje1 = build_hje_form(*tiling, Side::One);
    sys.hje2 = build_hje_form(*tiling, Side::Two);
    return sys;
}

MicroState micro_initial_state(const EpsilonTiling& tl,
                               const std::function<double(const Vec2&, const Vec2&)>& U1,
                               const std::function<double(const Vec2&, const Vec2&)>& U2) {
    MicroState s;
    s.t = 0;
    s.epsilon = tl.epsilon;
    s.u1.resize(tl.mesh1.num_vertices());
    for (int v = 0; v < tl.mesh1.num_vertices(); ++v)
        s.u1[v] = U1(tl.mesh1.vertices[v], tl.ref1[v]);
    s.u2.resize(tl.mesh2.num_vertices());
    for (int v = 0; v < tl.mesh2.num_vertices(); ++v)
        s.u2[v] = U2(tl.mesh2.vertices[v], tl.ref2[v]);
    if (!s.u1.allFinite() || !s.u2.allFinite())
        throw EvaluationError("initial profiles produced non-finite values");
    return s;
}

MicroState micro_step(const WentzellSystem& sys, const ReactionSpec& R, const MicroState& state,
                      double dt, StepDiagnostics* diag) {
    if (!(dt > 0)) throw ValidationError("micro step requires dt > 0");
    const EpsilonTiling& tl = *sys.tiling;
    const double eps = sys.epsilon;
    if (diag) diag->stability_warning = dt * R.lipschitz >= 1.0;

    const int n1 = tl.mesh1.num_vertices(), n2 = tl.mesh2.num_vertices();
    VecX f1(n1), f2(n2);
    for (int v = 0; v < n1; ++v) f1[v] = R.f1(state.t, tl.ref1[v], state.u1[v]);
    for (int v = 0; v < n2; ++v) f2[v] = R.f2(state.t, tl.ref2[v], state.u2[v]);

    // Surface reactions at matched trace nodes; every surface node belongs to
    // exactly one tile, so the scatter has no collisions.
    VecX h1 = VecX::Zero(n1), h2 = VecX::Zero(n2);
    const SurfaceMesh& cs = tl.cell->surface;
    for (int t = 0; t < tl.tiles(); ++t) {
        for (int sn = 0; sn < cs.num_nodes(); ++sn) {
            const int v1 = tl.tile_surf1[t][sn];
            const int v2 = tl.tile_surf2[t][sn];
            const double z1 = state.u1[v1], z2 = state.u2[v2];
            h1[v1] = R.h1(state.t, cs.nodes[sn], z1, z2);
            h2[v2] = R.h2(state.t, cs.nodes[sn], z1, z2);
        }
    }

    MicroState next;
    next.t = state.t + dt;
    next.epsilon = eps;

    SolveReport rep1, rep2;
    {
        const SpMat lhs = SpMat(sys.A1 + dt * sys.S1);
        const VecX rhs = sys.A1 * state.u1 + dt * (sys.Mb1 * f1 + eps * (sys.Msurf1 * h1));
        next.u1 = cg_solve(lhs, rhs, sys.solve_opt, &rep1, &state.u1);
    }
    {
        const SpMat lhs = SpMat(sys.A2 + dt * sys.S2);
        const VecX rhs = sys.A2 * state.u2 + dt * (sys.Mb2 * f2 + eps * (sys.Msurf2 * h2));
        next.u2 = cg_solve(lhs, rhs, sys.solve_opt, &rep2, &state.u2);
    }
    if (diag) diag->solve = rep1.iterations > rep2.iterations ? rep1 : rep2;
    return next;
}

MicroRunResult micro_run(const WentzellSystem& sys, const ReactionSpec& R,
                         const MicroState& initial, double T, double dt,
                         const std::vector<double>& snapshot_times, double trace_theta,
                         double trace_constant) {
    if (T < 0 || !(dt > 0)) throw ValidationError("micro run requires T >= 0 and dt > 0");
    std::vector<double> targets = snapshot_times;
    targets.push_back(T);
    std::sort(targets.begin(), targets.end());
    targets.erase(std::unique(targets.begin(), targets.end(),
                              [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                  targets.end());

    MicroRunResult out;
    if (trace_constant <= 0) {
        Rng rng(20240309);
        trace_constant = calibrate_trace_constant(sys.hje1, sys.epsilon, trace_theta, 25, rng);
    }
    out.trace_constant = trace_constant;

    MicroState state = initial;
    const VecX ones1 = VecX::Ones(initial.u1.size());
    const VecX ones2 = VecX::Ones(initial.u2.size());
    auto record = [&](const MicroState& s) {
        MicroDiagnosticsRow row;
        row.t = s.t;
        row.mass1 = ones1.dot(sys.A1 * s.u1);
        row.mass2 = ones2.dot(sys.A2 * s.u2);
        row.hje_norm1 = hje_norm(sys.hje1, s.u1, sys.epsilon);
        row.hje_norm2 = hje_norm(sys.hje2, s.u2, sys.epsilon);
        row.trace_check_ratio =
            trace_inequality_check(sys.hje1, s.u1, sys.epsilon, trace_theta, out.trace_constant)
                .ratio;
        out.diagnostics.push_back(row);
        out.snapshots.push_back(s);
    };

    for (double target : targets) {
        if (target < -1e-12 || target > T + 1e-12)
            throw ValidationError("snapshot time outside [0, T]");
        while (state.t < target - 1e-12) {
            const double step = std::min(dt, target - state.t);
            StepDiagnostics diag;
            state = micro_step(sys, R, state, step, &diag);
            out.stability_warning |= diag.stability_warning;
        }
        state.t = target;
        record(state);
    }

    // a-priori diagnostic: trapezoid in time of the squared H norms
    // over the recorded snapshots.
    double acc1 = 0, acc2 = 0;
    for (std::size_t k = 0; k + 1 < out.diagnostics.size(); ++k) {
        const double w = 0.5 * (out.diagnostics[k + 1].t - out.diagnostics[k].t);
        acc1 += w * (out.diagnostics[k].hje_norm1 * out.diagnostics[k].hje_norm1 +
                     out.diagnostics[k + 1].hje_norm1 * out.diagnostics[k + 1].hje_norm1);
        acc2 += w * (out.diagnostics[k].hje_norm2 * out.diagnostics[k].hje_norm2 +
                     out.diagnostics[k + 1].hje_norm2 * out.diagnostics[k + 1].hje_norm2);
    }
    out.hje_time_norm1 = std::sqrt(acc1);
    out.hje_time_norm2 = std::sqrt(acc2);
    return out;
}

} // namespace whomog
