#include <whomog/cell_problem.hpp>

#include <Eigen/Eigenvalues>

#include <cmath>

namespace whomog {

namespace {

// Load vector b[phi] = int_{Y1} D e_i . grad phi + int_Gamma DG (tau.e_i) tau . grad_G phi
// in the bulk numbering of the Y1 side mesh.
VecX direction_load(const UnitCell& cell, const DiffusionSpec& D, const Vec2& dir) {
    const TriangleMesh& m = cell.y1.mesh;
    VecX b = VecX::Zero(m.num_vertices());

    Vec2 grad[3];
    for (int t = 0; t < m.num_triangles(); ++t) {
        const auto& tri = m.triangles[t];
        const Vec2 a = m.vertices[tri[0]], p = m.vertices[tri[1]], q = m.vertices[tri[2]];
        const double two_area = (p.x() - a.x()) * (q.y() - a.y()) - (p.y() - a.y()) * (q.x() - a.x());
        grad[0] = Vec2(p.y() - q.y(), q.x() - p.x()) / two_area;
        grad[1] = Vec2(q.y() - a.y(), a.x() - q.x()) / two_area;
        grad[2] = Vec2(a.y() - p.y(), p.x() - a.x()) / two_area;
        const Vec2 Dd = D.D1(m.coefficient_point(t)) * dir;
        for (int k = 0; k < 3; ++k) b[tri[k]] += 0.5 * two_area * Dd.dot(grad[k]);
    }

    const SurfaceMesh& s = cell.surface;
    for (int e = 0; e < s.num_edges(); ++e) {
        auto [i, j] = s.edge(e);
        // P_G e_i discretized as tau (tau . e_i) per edge; the edge integral of
        // DG (tau.dir) tau . grad_G phi telescopes to DG (tau.dir) (phi_j - phi_i).
        const double w = D.DG1(s.edge_coefficient_point(e)) * s.tangent[e].dot(dir);
        b[cell.y1.surf_to_bulk[j]] += w;
        b[cell.y1.surf_to_bulk[i]] -= w;
    }
    return b;
}

SpMat cell_operator(const UnitCell& cell, const DiffusionSpec& D) {
    std::vector<Triplet> tr;
    add_bulk_stiffness(cell.y1.mesh, D.D1, 1.0, nullptr, tr);
    add_surface_stiffness(cell.surface, D.DG1, 1.0, &cell.y1.surf_to_bulk, tr);
    return build_operator(cell.y1.mesh.num_vertices(), tr);
}

} // namespace

std::vector<Vec2> element_gradients(const TriangleMesh& mesh, const VecX& nodal) {
    std::vector<Vec2> g(mesh.num_triangles());
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangles[t];
        const Vec2 a = mesh.vertices[tri[0]], p = mesh.vertices[tri[1]], q = mesh.vertices[tri[2]];
        const double two_area = (p.x() - a.x()) * (q.y() - a.y()) - (p.y() - a.y()) * (q.x() - a.x());
        const Vec2 g0 = Vec2(p.y() - q.y(), q.x() - p.x()) / two_area;
        const Vec2 g1 = Vec2(q.y() - a.y(), a.x() - q.x()) / two_area;
        const Vec2 g2 = Vec2(a.y() - p.y(), p.x() - a.x()) / two_area;
        g[t] = nodal[tri[0]] * g0 + nodal[tri[1]] * g1 + nodal[tri[2]] * g2;
    }
    return g;
}

double gamma_mean(const UnitCell& cell, const VecX& w_bulk) {
    const SurfaceMesh& s = cell.surface;
    double integral = 0;
    for (int e = 0; e < s.num_edges(); ++e) {
        auto [i, j] = s.edge(e);
        integral += 0.5 * s.edge_length[e] *
                    (w_bulk[cell.y1.surf_to_bulk[i]] + w_bulk[cell.y1.surf_to_bulk[j]]);
    }
    return integral;
}

VecX solve_cell_problem(const UnitCell& cell, const DiffusionSpec& D, const Vec2& direction,
                        SolveReport* report, const SolveOptions& opt) {
    const auto red = build_periodic_reduction(cell.y1.mesh, 0);
    if (red.P.cols() == 0) throw SingularSystem("periodic reduction left no unknowns");

    const SpMat A = cell_operator(cell, D);
    const SpMat A_red = red.reduce(A);
    const VecX b = -direction_load(cell, D, direction);
    const VecX b_red = red.restrict_rhs(b);

    SolveReport local;
    VecX w_red = cg_solve(A_red, b_red, opt, &local);
    if (report) *report = local;

    VecX w = red.expand(w_red);
    // fix the constant by the Gamma-mean condition
    w.array() -= gamma_mean(cell, w) / cell.gamma_length;
    return w;
}

CellSolutionSet solve_cell_problems(const UnitCell& cell, const DiffusionSpec& D,
                                    const SolveOptions& opt) {
    CellSolutionSet sols;
    for (int i = 0; i < 2; ++i) {
        SolveReport rep;
        const Vec2 e_i = i == 0 ? Vec2(1, 0) : Vec2(0, 1);
        sols.w[i] = solve_cell_problem(cell, D, e_i, &rep, opt);
        sols.residual_norm[i] = rep.residual;
        sols.mean_on_gamma[i] = gamma_mean(cell, sols.w[i]) / cell.gamma_length;
    }
    return sols;
}

EffectiveTensor assemble_effective_tensor(const UnitCell& cell, const DiffusionSpec& D,
                                          const CellSolutionSet& sols) {
    const TriangleMesh& m = cell.y1.mesh;
    const SurfaceMesh& s = cell.surface;
    const std::array<Vec2, 2> e = {Vec2(1, 0), Vec2(0, 1)};

    std::array<std::vector<Vec2>, 2> grads;
    for (int i = 0; i < 2; ++i) {
        if (sols.w[i].size() != m.num_vertices())
            throw ConsistencyError("corrector not solved on this cell mesh");
        grads[i] = element_gradients(m, sols.w[i]);
    }

    Mat2 dhat = Mat2::Zero();
    for (int i = 0; i < 2; ++i) {
        for (int l = i; l < 2; ++l) {
            double v = 0;
            for (int t = 0; t < m.num_triangles(); ++t) {
                const Mat2 Dt = D.D1(m.coefficient_point(t));
                v += m.triangle_area(t) * (Dt * (grads[i][t] + e[i])).dot(grads[l][t] + e[l]);
            }
            for (int ed = 0; ed < s.num_edges(); ++ed) {
                auto [a, b] = s.edge(ed);
                const double dg = D.DG1(s.edge_coefficient_point(ed));
                auto tangential = [&](int dir) {
                    const double dw = (sols.w[dir][cell.y1.surf_to_bulk[b]] -
                                       sols.w[dir][cell.y1.surf_to_bulk[a]]) /
                                      s.edge_length[ed];
                    return dw + s.tangent[ed].dot(e[dir]);
                };
                v += s.edge_length[ed] * dg * tangential(i) * tangential(l);
            }
            dhat(i, l) = v;
            dhat(l, i) = v;
        }
    }

    EffectiveTensor tensor;
    tensor.entries = dhat;
    tensor.symmetry_defect = std::abs(dhat(0, 1) - dhat(1, 0));
    Eigen::SelfAdjointEigenSolver<Mat2> eig(dhat);
    tensor.eigenvalues = eig.eigenvalues();
    tensor.min_eigenvalue = tensor.eigenvalues.minCoeff();

    const double scale = dhat.cwiseAbs().maxCoeff();
    if (tensor.symmetry_defect > 1e-10 * scale)
        throw CertificateFailure("effective tensor symmetry defect exceeds 1e-10");
    if (!(tensor.min_eigenvalue > 0))
        throw CertificateFailure("effective tensor is not positive definite");
    return tensor;
}

VecX reconstruct_corrector(const Vec2& gradient, const CellSolutionSet& sols) {
    if (!gradient.allFinite()) throw EvaluationError("corrector gradient is not finite");
    return gradient.x() * sols.w[0] + gradient.y() * sols.w[1];
}

double corrector_energy(const UnitCell& cell, const DiffusionSpec& D, const VecX& w,
                        const Vec2& xi) {
    const TriangleMesh& m = cell.y1.mesh;
    const auto grads = element_gradients(m, w);
    double v = 0;
    for (int t = 0; t < m.num_triangles(); ++t) {
        const Mat2 Dt = D.D1(m.coefficient_point(t));
        v += m.triangle_area(t) * (Dt * (grads[t] + xi)).dot(grads[t] + xi);
    }
    const SurfaceMesh& s = cell.surface;
    for (int e = 0; e < s.num_edges(); ++e) {
        auto [a, b] = s.edge(e);
        const double dw =
            (w[cell.y1.surf_to_bulk[b]] - w[cell.y1.surf_to_bulk[a]]) / s.edge_length[e];
        const double tang = dw + s.tangent[e].dot(xi);
        v += s.edge_length[e] * D.DG1(s.edge_coefficient_point(e)) * tang * tang;
    }
    return v;
}

} // namespace whomog
