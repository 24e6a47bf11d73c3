#include <doctest.h>

#include <whomog/fem.hpp>

#include "oracles.hpp"

#include <cmath>

using namespace whomog;

namespace {
const double kPi = 3.14159265358979323846;

UnitCell make_cell(double h = 0.05) {
    UnitCellGeometry g;
    g.center = Vec2(0.5, 0.5);
    g.radius = 0.25;
    g.clearance = 0.05;
    return build_unit_cell(g, h);
}

Mat2 identity(const Vec2&) { return Mat2::Identity(); }
double one(const Vec2&) { return 1.0; }

double sym_defect(const SpMat& A) {
    SpMat D = SpMat(A - SpMat(A.transpose()));
    double m = 0;
    for (int k = 0; k < D.outerSize(); ++k)
        for (SpMat::InnerIterator it(D, k); it; ++it) m = std::max(m, std::abs(it.value()));
    return m;
}
} // namespace

TEST_CASE("bulk stiffness: affine energy, constant kernel, linearity") {
    const auto cell = make_cell();
    const auto& m = cell.y1.mesh;
    const SpMat K = assemble_bulk_stiffness(m, identity);

    VecX affine(m.num_vertices());
    for (int v = 0; v < m.num_vertices(); ++v) affine[v] = m.vertices[v].x();
    CHECK(affine.dot(K * affine) == doctest::Approx(cell.area_y1).epsilon(1e-12));

    const VecX ones = VecX::Ones(m.num_vertices());
    CHECK((K * ones).lpNorm<Eigen::Infinity>() < 1e-12);

    const SpMat K2 = assemble_bulk_stiffness(m, [](const Vec2&) { return Mat2(2 * Mat2::Identity()); });
    SpMat diff = SpMat(K2 - SpMat(2.0 * K));
    double maxdiff = 0;
    for (int k = 0; k < diff.outerSize(); ++k)
        for (SpMat::InnerIterator it(diff, k); it; ++it) maxdiff = std::max(maxdiff, std::abs(it.value()));
    CHECK(maxdiff < 1e-14);

    CHECK(sym_defect(K) < 1e-14);
}

TEST_CASE("non-finite diffusion data is rejected") {
    const auto cell = make_cell(0.1);
    auto bad = [](const Vec2&) {
        Mat2 m = Mat2::Identity();
        m(0, 0) = std::numeric_limits<double>::quiet_NaN();
        return m;
    };
    CHECK_THROWS_AS(assemble_bulk_stiffness(cell.y1.mesh, bad), EvaluationError);
}

TEST_CASE("masses reproduce meshed measures") {
    const auto cell = make_cell();
    const SpMat M1 = assemble_mass(cell.y1.mesh);
    const VecX ones1 = VecX::Ones(cell.y1.mesh.num_vertices());
    CHECK(ones1.dot(M1 * ones1) == doctest::Approx(cell.area_y1).epsilon(1e-12));
    CHECK(std::abs(ones1.dot(M1 * ones1) - (1.0 - kPi / 16.0)) < 5e-3);

    const SpMat Ms = assemble_mass(cell.surface);
    const VecX oness = VecX::Ones(cell.surface.num_nodes());
    CHECK(oness.dot(Ms * oness) == doctest::Approx(cell.gamma_length).epsilon(1e-12));
    CHECK(std::abs(oness.dot(Ms * oness) - kPi / 2.0) < 2e-2);

    const SpMat Ms_eps = assemble_mass(cell.surface, 0.25);
    CHECK(oness.dot(Ms_eps * oness) == doctest::Approx(0.25 * cell.gamma_length).epsilon(1e-12));
}

TEST_CASE("surface stiffness: kernel, cos-theta energy, scale linearity") {
    const auto cell = make_cell(0.02);
    const auto& s = cell.surface;
    const SpMat Ks = assemble_surface_stiffness(s, one);

    const VecX ones = VecX::Ones(s.num_nodes());
    CHECK((Ks * ones).lpNorm<Eigen::Infinity>() < 1e-12);

    VecX u(s.num_nodes());
    for (int i = 0; i < s.num_nodes(); ++i) {
        const Vec2 d = s.nodes[i] - Vec2(0.5, 0.5);
        u[i] = std::cos(std::atan2(d.y(), d.x()));
    }
    // int |du/ds|^2 over the circle of radius r is pi / r
    CHECK(u.dot(Ks * u) == doctest::Approx(kPi / 0.25).epsilon(2e-3));

    const SpMat Kh = assemble_surface_stiffness(s, one, 0.5);
    SpMat diff = SpMat(Kh - SpMat(0.5 * Ks));
    double maxdiff = 0;
    for (int k = 0; k < diff.outerSize(); ++k)
        for (SpMat::InnerIterator it(diff, k); it; ++it) maxdiff = std::max(maxdiff, std::abs(it.value()));
    CHECK(maxdiff < 1e-14);
}

TEST_CASE("assembled norms match independent quadrature") {
    const auto cell = make_cell();
    Rng rng(42);

    const HjeForm f = build_hje_form(cell.y2, cell.surface);
    const VecX u = random_nodal_field(cell.y2.mesh.num_vertices(), rng);

    VecX trace(cell.surface.num_nodes());
    for (int s = 0; s < cell.surface.num_nodes(); ++s) trace[s] = u[cell.y2.surf_to_bulk[s]];

    const double eps = 0.5;
    const double direct = std::sqrt(
        oracles::bulk_l2_squared(cell.y2.mesh, u) + oracles::bulk_h1_semi_squared(cell.y2.mesh, u) +
        eps * (oracles::surface_l2_squared(cell.surface, trace) +
               oracles::surface_h1_semi_squared(cell.surface, trace)));
    CHECK(hje_norm(f, u, trace, eps) == doctest::Approx(direct).epsilon(1e-10));

    // H norm dominates the L norm
    CHECK(hje_norm(f, u, eps) >= lje_norm(f, u, eps));

    CHECK(hje_norm(f, VecX::Zero(u.size()), eps) == 0.0);
}

TEST_CASE("hje norm of constants matches the measure arithmetic") {
    // u = 1 at eps = 1/2 on side 2: sqrt(|Omega_eps^2| + eps |Gamma_eps|)
    auto cell = std::make_shared<UnitCell>(make_cell());
    const auto tl = build_epsilon_tiling(cell, 2);
    const HjeForm f = build_hje_form(tl, Side::Two);
    const VecX ones = VecX::Ones(tl.mesh2.num_vertices());
    const double expected = std::sqrt(tl.volume2() + 0.5 * tl.gamma_measure());
    CHECK(hje_norm(f, ones, 0.5) == doctest::Approx(expected).epsilon(1e-12));
    // against the analytic values pi/16 and pi (h -> 0 limits), loose tolerance
    CHECK(std::abs(hje_norm(f, ones, 0.5) - std::sqrt(kPi / 16.0 + 0.5 * kPi)) < 2e-2);
}

TEST_CASE("trace mismatch is detected") {
    const auto cell = make_cell(0.1);
    const HjeForm f = build_hje_form(cell.y2, cell.surface);
    VecX u = VecX::Ones(cell.y2.mesh.num_vertices());
    VecX trace = VecX::Ones(cell.surface.num_nodes());
    trace[0] += 1e-6;
    CHECK_THROWS_AS(hje_norm(f, u, trace, 0.5), ConsistencyError);
}

TEST_CASE("periodic reduction is idempotent and pins the constant") {
    const auto cell = make_cell(0.1);
    const auto red = build_periodic_reduction(cell.y1.mesh, 0);
    for (std::size_t v = 0; v < red.rep.size(); ++v) CHECK(red.rep[red.rep[v]] == red.rep[v]);
    CHECK(red.P.cols() + 1 <= red.P.rows());
    // expansion of a reduced vector matches on master/slave pairs
    Rng rng(7);
    const VecX ur = random_nodal_field(static_cast<int>(red.P.cols()), rng);
    const VecX u = red.expand(ur);
    for (const auto& p : cell.y1.mesh.periodic_pairs) CHECK(u[p[0]] == u[p[1]]);
    CHECK(u[red.pinned_vertex] == 0.0);
}

TEST_CASE("cg solves SPD systems to tolerance") {
    const auto cell = make_cell();
    const SpMat M = assemble_mass(cell.y1.mesh);
    Rng rng(3);
    const VecX x_ref = random_nodal_field(cell.y1.mesh.num_vertices(), rng);
    const VecX b = M * x_ref;
    SolveReport rep;
    const VecX x = cg_solve(M, b, {1e-12, 10000}, &rep);
    CHECK((x - x_ref).lpNorm<Eigen::Infinity>() < 1e-8);
    CHECK(rep.iterations > 0);

    SolveOptions starved;
    starved.tol = 1e-14;
    starved.max_iterations = 1;
    const SpMat K = assemble_bulk_stiffness(cell.y1.mesh, identity);
    const SpMat A = SpMat(K + M);
    CHECK_THROWS_AS(cg_solve(A, b, starved), SolverDivergence);
}

TEST_CASE("trace inequality: calibrated constant covers fresh samples") {
    auto cell = std::make_shared<UnitCell>(make_cell(0.1));
    const double theta = 1.0;
    Rng rng(11);

    // calibrate on the coarsest tiling, check across the sweep
    const auto tl_cal = build_epsilon_tiling(cell, 2);
    const HjeForm f_cal = build_hje_form(tl_cal, Side::One);
    const double C = calibrate_trace_constant(f_cal, 0.5, theta, 100, rng);
    CHECK(C > 0);

    for (int n : {2, 4, 8}) {
        const auto tl = build_epsilon_tiling(cell, n);
        const HjeForm f = build_hje_form(tl, Side::One);
        const double eps = 1.0 / n;
        double max_ratio = 0;
        for (int s = 0; s < 100; ++s) {
            const VecX u = random_nodal_field(tl.mesh1.num_vertices(), rng);
            const auto r = trace_inequality_check(f, u, eps, theta, C);
            max_ratio = std::max(max_ratio, r.ratio);
        }
        CHECK(max_ratio <= 1.0);
    }

    // u = 1: lhs = |Gamma_eps|^{1/2}; holds for the calibrated C
    const auto r1 = trace_inequality_check(f_cal, VecX::Ones(tl_cal.mesh1.num_vertices()), 0.5,
                                           theta, C);
    CHECK(r1.lhs == doctest::Approx(std::sqrt(tl_cal.gamma_measure())).epsilon(1e-12));
    CHECK(!r1.violated);

    // zero trace -> lhs = 0
    VecX z = VecX::Ones(tl_cal.mesh1.num_vertices());
    for (const auto& m : tl_cal.tile_surf1)
        for (int v : m) z[v] = 0.0;
    const auto r0 = trace_inequality_check(f_cal, z, 0.5, theta, C);
    CHECK(r0.lhs == doctest::Approx(0.0));
    CHECK(!r0.violated);
}

TEST_CASE("lipschitz sampling accepts honest constants and flags understated ones") {
    const auto cell = make_cell(0.1);
    ReactionSpec R;
    R.f1 = [](double, const Vec2&, double z) { return -2.0 * z; };
    R.f2 = [](double, const Vec2&, double z) { return 1.0 - z; };
    R.h1 = [](double, const Vec2&, double z1, double z2) { return z2 - z1; };
    R.h2 = [](double, const Vec2&, double z1, double z2) { return z1 - z2; };
    R.lipschitz = 2.0;
    Rng rng(5);
    CHECK(check_lipschitz(R, cell, 500, rng).ok);

    R.lipschitz = 0.5; // understated
    CHECK(!check_lipschitz(R, cell, 500, rng).ok);
}

TEST_CASE("diffusion assumption spot-checks") {
    const auto cell = make_cell(0.1);
    DiffusionSpec D;
    D.D1 = D.D2 = [](const Vec2&) { return Mat2(Mat2::Identity()); };
    D.DG1 = D.DG2 = [](const Vec2&) { return 1.0; };
    D.c0 = 1.0;
    CHECK_NOTHROW(check_diffusion_assumptions(D, cell));

    D.c0 = 2.0; // claims more coercivity than the data has
    CHECK_THROWS_AS(check_diffusion_assumptions(D, cell), ValidationError);

    D.c0 = 0.5;
    D.D1 = [](const Vec2&) {
        Mat2 m;
        m << 1.0, 0.3, -0.3, 1.0; // not symmetric
        return m;
    };
    CHECK_THROWS_AS(check_diffusion_assumptions(D, cell), ValidationError);
}

TEST_CASE("micro operators equal eps-scaled cell operators on a matching tile") {
    auto cell = std::make_shared<UnitCell>(make_cell(0.1));
    const int n = 2;
    const auto tl = build_epsilon_tiling(cell, n);
    const double eps = tl.epsilon;

    // Bulk stiffness on Omega_eps^2 assembled generically equals the cell
    // stiffness scattered per tile (2D stiffness is scale invariant).
    const SpMat K_micro = assemble_bulk_stiffness(tl.mesh2, identity);
    const SpMat K_cell = assemble_bulk_stiffness(cell->y2.mesh, identity);
    const SpMat M_micro = assemble_mass(tl.mesh2);
    const SpMat M_cell = assemble_mass(cell->y2.mesh);
    for (int t = 0; t < tl.tiles(); ++t) {
        const auto& map = tl.tile_y2[t];
        for (int k = 0; k < K_cell.outerSize(); ++k) {
            for (SpMat::InnerIterator it(K_cell, k); it; ++it) {
                CHECK(K_micro.coeff(map[it.row()], map[it.col()]) ==
                      doctest::Approx(it.value()).epsilon(1e-12));
            }
        }
        for (int k = 0; k < M_cell.outerSize(); ++k) {
            for (SpMat::InnerIterator it(M_cell, k); it; ++it) {
                CHECK(M_micro.coeff(map[it.row()], map[it.col()]) ==
                      doctest::Approx(eps * eps * it.value()).epsilon(1e-12));
            }
        }
    }
}
