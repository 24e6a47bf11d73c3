#include <whomog/fem.hpp>

#include <Eigen/IterativeLinearSolvers>

#include <cmath>

namespace whomog {

namespace {

inline int mapped(const std::vector<int>* map, int v) { return map ? (*map)[v] : v; }

// Gradients of the three P1 hat functions on a triangle and twice its area.
inline void p1_gradients(const Vec2& a, const Vec2& b, const Vec2& c, Vec2 grad[3],
                         double& two_area) {
    two_area = (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
    grad[0] = Vec2(b.y() - c.y(), c.x() - b.x()) / two_area;
    grad[1] = Vec2(c.y() - a.y(), a.x() - c.x()) / two_area;
    grad[2] = Vec2(a.y() - b.y(), b.x() - a.x()) / two_area;
}

} // namespace

void add_bulk_mass(const TriangleMesh& mesh, double scale, const std::vector<int>* map,
                   std::vector<Triplet>& out) {
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangles[t];
        const double w = scale * mesh.triangle_area(t) / 12.0;
        for (int i = 0; i < 3; ++i) {
            const int gi = mapped(map, tri[i]);
            for (int j = 0; j < 3; ++j) {
                const int gj = mapped(map, tri[j]);
                out.emplace_back(gi, gj, (i == j ? 2.0 : 1.0) * w);
            }
        }
    }
}

void add_bulk_stiffness(const TriangleMesh& mesh, const TensorField& D, double scale,
                        const std::vector<int>* map, std::vector<Triplet>& out) {
    Vec2 grad[3];
    double two_area;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangles[t];
        p1_gradients(mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]], grad,
                     two_area);
        const Mat2 Dt = D(mesh.coefficient_point(t));
        if (!Dt.allFinite()) throw EvaluationError("diffusion tensor returned non-finite entries");
        const double w = scale * 0.5 * two_area;
        for (int i = 0; i < 3; ++i) {
            const int gi = mapped(map, tri[i]);
            const Vec2 Dgi = Dt * grad[i];
            for (int j = 0; j < 3; ++j)
                out.emplace_back(gi, mapped(map, tri[j]), w * Dgi.dot(grad[j]));
        }
    }
}

void add_surface_mass(const SurfaceMesh& smesh, double scale, const std::vector<int>* map,
                      std::vector<Triplet>& out) {
    const int n = smesh.num_edges();
    for (int e = 0; e < n; ++e) {
        const auto [i, j] = smesh.edge(e);
        const int gi = mapped(map, i), gj = mapped(map, j);
        const double w = scale * smesh.edge_length[e] / 6.0;
        out.emplace_back(gi, gi, 2.0 * w);
        out.emplace_back(gj, gj, 2.0 * w);
        out.emplace_back(gi, gj, w);
        out.emplace_back(gj, gi, w);
    }
}

void add_surface_stiffness(const SurfaceMesh& smesh, const ScalarField& DG, double scale,
                           const std::vector<int>* map, std::vector<Triplet>& out) {
    const int n = smesh.num_edges();
    for (int e = 0; e < n; ++e) {
        const auto [i, j] = smesh.edge(e);
        const double dg = DG(smesh.edge_coefficient_point(e));
        if (!std::isfinite(dg)) throw EvaluationError("surface diffusivity returned non-finite value");
        const double w = scale * dg / smesh.edge_length[e];
        const int gi = mapped(map, i), gj = mapped(map, j);
        out.emplace_back(gi, gi, w);
        out.emplace_back(gj, gj, w);
        out.emplace_back(gi, gj, -w);
        out.emplace_back(gj, gi, -w);
    }
}

SpMat build_operator(int dim, std::vector<Triplet>& triplets) {
    SpMat A(dim, dim);
    A.setFromTriplets(triplets.begin(), triplets.end());
    A.prune(1e-300);
    A.makeCompressed();
    return A;
}

SpMat assemble_bulk_stiffness(const TriangleMesh& mesh, const TensorField& D, double scale) {
    std::vector<Triplet> tr;
    tr.reserve(static_cast<std::size_t>(mesh.num_triangles()) * 9);
    add_bulk_stiffness(mesh, D, scale, nullptr, tr);
    return build_operator(mesh.num_vertices(), tr);
}

SpMat assemble_bulk_stiffness(const TriangleMesh& mesh, Side side, const DiffusionSpec& D,
                              double scale) {
    return assemble_bulk_stiffness(mesh, D.bulk(side), scale);
}

SpMat assemble_surface_stiffness(const SurfaceMesh& smesh, const ScalarField& DG, double scale) {
    std::vector<Triplet> tr;
    tr.reserve(static_cast<std::size_t>(smesh.num_edges()) * 4);
    add_surface_stiffness(smesh, DG, scale, nullptr, tr);
    return build_operator(smesh.num_nodes(), tr);
}

SpMat assemble_mass(const TriangleMesh& mesh, double scale) {
    std::vector<Triplet> tr;
    tr.reserve(static_cast<std::size_t>(mesh.num_triangles()) * 9);
    add_bulk_mass(mesh, scale, nullptr, tr);
    return build_operator(mesh.num_vertices(), tr);
}

SpMat assemble_mass(const SurfaceMesh& smesh, double scale) {
    std::vector<Triplet> tr;
    tr.reserve(static_cast<std::size_t>(smesh.num_edges()) * 4);
    add_surface_mass(smesh, scale, nullptr, tr);
    return build_operator(smesh.num_nodes(), tr);
}

SpMat assemble_tiled_surface_mass(const EpsilonTiling& tl, Side side) {
    const auto& maps = side == Side::One ? tl.tile_surf1 : tl.tile_surf2;
    const int dim = (side == Side::One ? tl.mesh1 : tl.mesh2).num_vertices();
    std::vector<Triplet> tr;
    tr.reserve(static_cast<std::size_t>(tl.tiles()) * tl.cell->surface.num_edges() * 4);
    for (int t = 0; t < tl.tiles(); ++t) {
        const SurfaceMesh s = tl.tile_surface(t);
        add_surface_mass(s, 1.0, &maps[t], tr);
    }
    return build_operator(dim, tr);
}

SpMat assemble_tiled_surface_stiffness(const EpsilonTiling& tl, Side side, const ScalarField& DG) {
    const auto& maps = side == Side::One ? tl.tile_surf1 : tl.tile_surf2;
    const int dim = (side == Side::One ? tl.mesh1 : tl.mesh2).num_vertices();
    std::vector<Triplet> tr;
    tr.reserve(static_cast<std::size_t>(tl.tiles()) * tl.cell->surface.num_edges() * 4);
    for (int t = 0; t < tl.tiles(); ++t) {
        const SurfaceMesh s = tl.tile_surface(t);
        add_surface_stiffness(s, DG, 1.0, &maps[t], tr);
    }
    return build_operator(dim, tr);
}

VecX cg_solve(const SpMat& A, const VecX& b, const SolveOptions& opt, SolveReport* report,
              const VecX* guess) {
    Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
    cg.setTolerance(opt.tol);
    cg.setMaxIterations(opt.max_iterations);
    cg.compute(A);
    VecX x;
    if (guess) {
        x = cg.solveWithGuess(b, *guess);
    } else {
        x = cg.solve(b);
    }
    if (report) {
        report->iterations = static_cast<int>(cg.iterations());
        report->residual = cg.error();
    }
    if (cg.info() != Eigen::Success) {
        if (!x.allFinite())
            throw SolverDivergence("conjugate gradient produced non-finite iterates");
        throw SolverDivergence("conjugate gradient did not reach tolerance " +
                               std::to_string(opt.tol) + " (residual " +
                               std::to_string(cg.error()) + ")");
    }
    return x;
}

PeriodicReduction build_periodic_reduction(const TriangleMesh& mesh, int pin_vertex) {
    PeriodicReduction red;
    red.rep = periodic_representatives(mesh);
    const int n = mesh.num_vertices();
    for (int v = 0; v < n; ++v) {
        if (red.rep[red.rep[v]] != red.rep[v])
            throw SingularSystem("periodic reduction is not idempotent");
    }
    red.pinned_vertex = pin_vertex >= 0 ? red.rep[pin_vertex] : -1;

    red.reduced_id.assign(n, -1);
    int next = 0;
    for (int v = 0; v < n; ++v) {
        if (red.rep[v] == v && v != red.pinned_vertex) red.reduced_id[v] = next++;
    }
    std::vector<Triplet> tr;
    tr.reserve(n);
    for (int v = 0; v < n; ++v) {
        const int col = red.reduced_id[red.rep[v]];
        if (col >= 0) tr.emplace_back(v, col, 1.0);
    }
    red.P = SpMat(n, next);
    red.P.setFromTriplets(tr.begin(), tr.end());
    red.P.makeCompressed();
    return red;
}

CoupledDofMap build_coupled_dof_map(const UnitCell& cell, bool with_periodic_reduction,
                                    int pin_vertex) {
    CoupledDofMap map;
    map.n_bulk1 = cell.y1.mesh.num_vertices();
    map.n_bulk2 = cell.y2.mesh.num_vertices();
    map.trace1 = cell.y1.surf_to_bulk;
    map.trace2 = cell.y2.surf_to_bulk;
    for (int v : map.trace1)
        if (v < 0 || v >= map.n_bulk1) throw ConsistencyError("side-1 trace is not a bulk restriction");
    for (int v : map.trace2)
        if (v < 0 || v >= map.n_bulk2) throw ConsistencyError("side-2 trace is not a bulk restriction");
    if (with_periodic_reduction)
        map.reduction = build_periodic_reduction(cell.y1.mesh, pin_vertex);
    return map;
}

namespace {

Mat2 identity_tensor(const Vec2&) { return Mat2::Identity(); }
double unit_scalar(const Vec2&) { return 1.0; }

SpMat lift_surface(const SurfaceMesh& surf, const std::vector<int>& map, int dim, bool stiffness) {
    std::vector<Triplet> tr;
    if (stiffness) {
        add_surface_stiffness(surf, unit_scalar, 1.0, &map, tr);
    } else {
        add_surface_mass(surf, 1.0, &map, tr);
    }
    return build_operator(dim, tr);
}

} // namespace

HjeForm build_hje_form(const SideMesh& side, const SurfaceMesh& surf) {
    HjeForm f;
    f.Mb = assemble_mass(side.mesh);
    f.Kb = assemble_bulk_stiffness(side.mesh, identity_tensor);
    f.Ms = lift_surface(surf, side.surf_to_bulk, side.mesh.num_vertices(), false);
    f.Ks = lift_surface(surf, side.surf_to_bulk, side.mesh.num_vertices(), true);
    f.trace = side.surf_to_bulk;
    return f;
}

HjeForm build_hje_form(const EpsilonTiling& tl, Side side) {
    HjeForm f;
    const TriangleMesh& mesh = side == Side::One ? tl.mesh1 : tl.mesh2;
    f.Mb = assemble_mass(mesh);
    f.Kb = assemble_bulk_stiffness(mesh, identity_tensor);
    f.Ms = assemble_tiled_surface_mass(tl, side);
    f.Ks = assemble_tiled_surface_stiffness(tl, side, unit_scalar);
    const auto& maps = side == Side::One ? tl.tile_surf1 : tl.tile_surf2;
    for (const auto& m : maps) f.trace.insert(f.trace.end(), m.begin(), m.end());
    return f;
}

double hje_norm(const HjeForm& form, const VecX& bulk, const VecX& trace_values, double epsilon) {
    if (static_cast<int>(form.trace.size()) != trace_values.size())
        throw ConsistencyError("trace vector length does not match the interface node count");
    for (std::size_t s = 0; s < form.trace.size(); ++s) {
        if (std::abs(trace_values[static_cast<int>(s)] - bulk[form.trace[s]]) > 1e-12)
            throw ConsistencyError("trace differs from the bulk restriction beyond 1e-12");
    }
    return hje_norm(form, bulk, epsilon);
}

double hje_norm(const HjeForm& form, const VecX& bulk, double epsilon) {
    const double bulk_part = bulk.dot(form.Mb * bulk) + bulk.dot(form.Kb * bulk);
    const double surf_part = bulk.dot(form.Ms * bulk) + bulk.dot(form.Ks * bulk);
    return std::sqrt(bulk_part + epsilon * surf_part);
}

double lje_norm(const HjeForm& form, const VecX& bulk, double epsilon) {
    return std::sqrt(bulk.dot(form.Mb * bulk) + epsilon * bulk.dot(form.Ms * bulk));
}

double calibrate_trace_constant(const HjeForm& form, double epsilon, double theta, int samples,
                                Rng& rng) {
    if (!(theta > 0)) throw ValidationError("trace inequality requires theta > 0");
    const int n = static_cast<int>(form.Mb.rows());

    auto smooth = [&](VecX u) {
        // damped Jacobi on the Laplacian: suppresses the rough modes so the
        // calibration set also contains smooth fields, which stress C(theta)
        // rather than the gradient term
        for (int it = 0; it < 6; ++it) {
            VecX r = form.Kb * u;
            for (int i = 0; i < n; ++i) {
                const double d = form.Kb.coeff(i, i);
                if (d > 0) u[i] -= 0.7 * r[i] / d;
            }
        }
        return u;
    };

    double needed = 0.0;
    auto account = [&](const VecX& u) {
        const double lhs = std::sqrt(u.dot(form.Ms * u));
        const double l2 = std::sqrt(u.dot(form.Mb * u));
        const double grad = std::sqrt(std::max(0.0, u.dot(form.Kb * u)));
        const double remainder = lhs - theta * std::sqrt(epsilon) * grad;
        if (l2 > 0) needed = std::max(needed, remainder * std::sqrt(epsilon) / l2);
    };
    account(VecX::Ones(n));
    for (int s = 0; s < samples; ++s) {
        const VecX u = random_nodal_field(n, rng);
        account(u);
        if (s % 4 == 0) account(smooth(u));
    }
    return 1.1 * std::max(needed, 1e-12);
}

TraceCheckReport trace_inequality_check(const HjeForm& form, const VecX& u, double epsilon,
                                        double theta, double c_theta) {
    TraceCheckReport r;
    r.theta = theta;
    r.c_theta = c_theta;
    r.lhs = std::sqrt(u.dot(form.Ms * u));
    const double l2 = std::sqrt(u.dot(form.Mb * u));
    const double grad = std::sqrt(u.dot(form.Kb * u));
    r.rhs = c_theta / std::sqrt(epsilon) * l2 + theta * std::sqrt(epsilon) * grad;
    r.ratio = r.rhs > 0 ? r.lhs / r.rhs : (r.lhs > 0 ? std::numeric_limits<double>::infinity() : 0.0);
    r.violated = r.lhs > r.rhs * (1.0 + 1e-12);
    return r;
}

LipschitzReport check_lipschitz(const ReactionSpec& R, const UnitCell& cell, int samples, Rng& rng) {
    LipschitzReport rep;
    rep.declared = R.lipschitz;
    std::uniform_real_distribution<double> zdist(-2.0, 2.0);
    std::uniform_real_distribution<double> tdist(0.0, 1.0);
    std::uniform_int_distribution<int> tri1(0, cell.y1.mesh.num_triangles() - 1);
    std::uniform_int_distribution<int> tri2(0, cell.y2.mesh.num_triangles() - 1);
    std::uniform_int_distribution<int> edge(0, cell.surface.num_edges() - 1);

    for (int s = 0; s < samples; ++s) {
        const double t = tdist(rng);
        const double z = zdist(rng), w = zdist(rng);
        const double z2 = zdist(rng), w2 = zdist(rng);
        if (std::abs(z - w) > 1e-12) {
            const Vec2 y1 = cell.y1.mesh.centroid(tri1(rng));
            const Vec2 y2 = cell.y2.mesh.centroid(tri2(rng));
            rep.observed_f = std::max(rep.observed_f,
                                      std::abs(R.f1(t, y1, z) - R.f1(t, y1, w)) / std::abs(z - w));
            rep.observed_f = std::max(rep.observed_f,
                                      std::abs(R.f2(t, y2, z) - R.f2(t, y2, w)) / std::abs(z - w));
        }
        const double denom = std::abs(z - w) + std::abs(z2 - w2);
        if (denom > 1e-12) {
            const Vec2 yg = cell.surface.edge_coefficient_point(edge(rng));
            rep.observed_h = std::max(rep.observed_h,
                                      std::abs(R.h1(t, yg, z, z2) - R.h1(t, yg, w, w2)) / denom);
            rep.observed_h = std::max(rep.observed_h,
                                      std::abs(R.h2(t, yg, z, z2) - R.h2(t, yg, w, w2)) / denom);
        }
    }
    const double slack = rep.declared * (1.0 + 1e-9) + 1e-14;
    rep.ok = rep.observed_f <= slack && rep.observed_h <= slack;
    return rep;
}

void check_diffusion_assumptions(const DiffusionSpec& D, const UnitCell& cell) {
    if (!(D.c0 > 0)) throw ValidationError("coercivity constant c0 must be positive");
    auto check_tensor = [&](const TensorField& T, const TriangleMesh& mesh, const char* name) {
        for (int t = 0; t < mesh.num_triangles(); ++t) {
            const Mat2 M = T(mesh.coefficient_point(t));
            if (!M.allFinite()) throw EvaluationError(std::string(name) + " has non-finite entries");
            if (std::abs(M(0, 1) - M(1, 0)) > 1e-12 * (1.0 + M.cwiseAbs().maxCoeff()))
                throw ValidationError(std::string(name) + " is not symmetric");
            const double tr = M.trace();
            const double det = M(0, 0) * M(1, 1) - M(0, 1) * M(1, 0);
            const double eig_min = 0.5 * (tr - std::sqrt(std::max(0.0, tr * tr - 4 * det)));
            if (eig_min < D.c0 * (1.0 - 1e-9))
                throw ValidationError(std::string(name) + " violates the declared coercivity c0");
        }
    };
    check_tensor(D.D1, cell.y1.mesh, "D1");
    check_tensor(D.D2, cell.y2.mesh, "D2");
    for (int e = 0; e < cell.surface.num_edges(); ++e) {
        const Vec2 y = cell.surface.edge_coefficient_point(e);
        const double g1 = D.DG1(y), g2 = D.DG2(y);
        if (!std::isfinite(g1) || !std::isfinite(g2))
            throw EvaluationError("surface diffusivity has non-finite values");
        if (g1 < D.c0 * (1.0 - 1e-9) || g2 < D.c0 * (1.0 - 1e-9))
            throw ValidationError("surface diffusivity violates the declared coercivity c0");
    }
}

} // namespace whomog
