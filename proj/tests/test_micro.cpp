#include <doctest.h>

#include <whomog/micro.hpp>

#include <cmath>

using namespace whomog;

namespace {

std::shared_ptr<UnitCell> make_cell(double h = 0.1) {
    UnitCellGeometry g;
    g.center = Vec2(0.5, 0.5);
    g.radius = 0.25;
    g.clearance = 0.05;
    return std::make_shared<UnitCell>(build_unit_cell(g, h));
}

DiffusionSpec unit_spec(double d = 1.0, double dg = 1.0) {
    DiffusionSpec D;
    D.D1 = D.D2 = [d](const Vec2&) { return Mat2(d * Mat2::Identity()); };
    D.DG1 = D.DG2 = [dg](const Vec2&) { return dg; };
    D.c0 = std::min(d, dg);
    return D;
}

ReactionSpec no_reactions() {
    ReactionSpec R;
    R.f1 = R.f2 = [](double, const Vec2&, double) { return 0.0; };
    R.h1 = R.h2 = [](double, const Vec2&, double, double) { return 0.0; };
    return R;
}

ReactionSpec exchange(double g = 1.0) {
    ReactionSpec R = no_reactions();
    R.h1 = [g](double, const Vec2&, double z1, double z2) { return g * (z2 - z1); };
    R.h2 = [g](double, const Vec2&, double z1, double z2) { return g * (z1 - z2); };
    R.lipschitz = g;
    return R;
}

double sp_maxabs(const SpMat& A) {
    double m = 0;
    for (int k = 0; k < A.outerSize(); ++k)
        for (SpMat::InnerIterator it(A, k); it; ++it) m = std::max(m, std::abs(it.value()));
    return m;
}

} // namespace

TEST_CASE("eps = 1 system coincides with single-cell assembly") {
    auto cell = make_cell();
    auto tl = std::make_shared<EpsilonTiling>(build_epsilon_tiling(cell, 1));
    const auto sys = build_wentzell_system(tl, unit_spec());

    std::vector<Triplet> tr;
    add_bulk_mass(cell->y1.mesh, 1.0, nullptr, tr);
    add_surface_mass(cell->surface, 1.0, &cell->y1.surf_to_bulk, tr);
    const SpMat A1_cell = build_operator(cell->y1.mesh.num_vertices(), tr);
    CHECK(sp_maxabs(SpMat(sys.A1 - A1_cell)) < 1e-14);

    tr.clear();
    add_bulk_stiffness(cell->y1.mesh, unit_spec().D1, 1.0, nullptr, tr);
    add_surface_stiffness(cell->surface, unit_spec().DG1, 1.0, &cell->y1.surf_to_bulk, tr);
    const SpMat S1_cell = build_operator(cell->y1.mesh.num_vertices(), tr);
    CHECK(sp_maxabs(SpMat(sys.S1 - S1_cell)) < 1e-12);
}

TEST_CASE("eps-weighted surface mass trace is eps-independent") {
    auto cell = make_cell();
    double reference = 0;
    for (int n : {1, 2, 4}) {
        auto tl = std::make_shared<EpsilonTiling>(build_epsilon_tiling(cell, n));
        const auto sys = build_wentzell_system(tl, unit_spec());
        double tr = 0;
        for (int i = 0; i < sys.Msurf2.rows(); ++i) tr += sys.Msurf2.coeff(i, i);
        const double weighted = sys.epsilon * tr; // = (2/3)|Gamma|
        if (n == 1) {
            reference = weighted;
            CHECK(std::abs(weighted - 2.0 / 3.0 * cell->gamma_length) < 1e-12);
        } else {
            CHECK(weighted == doctest::Approx(reference).epsilon(1e-12));
        }
    }
}

TEST_CASE("stiffness doubles with the diffusion data") {
    auto cell = make_cell();
    auto tl = std::make_shared<EpsilonTiling>(build_epsilon_tiling(cell, 2));
    const auto s1 = build_wentzell_system(tl, unit_spec(1.0, 1.0));
    const auto s2 = build_wentzell_system(tl, unit_spec(2.0, 2.0));
    CHECK(sp_maxabs(SpMat(s2.S1 - SpMat(2.0 * s1.S1))) < 1e-12);
    CHECK(sp_maxabs(SpMat(s2.S2 - SpMat(2.0 * s1.S2))) < 1e-12);
}

TEST_CASE("constants are steady without reactions; traces stay independent") {
    auto cell = make_cell();
    auto tl = std::make_shared<EpsilonTiling>(build_epsilon_tiling(cell, 2));
    const auto sys = build_wentzell_system(tl, unit_spec());

    MicroState s = micro_initial_state(
        *tl, [](const Vec2&, const Vec2&) { return 2.0; },
        [](const Vec2&, const Vec2&) { return -1.0; });
    for (int k = 0; k < 5; ++k) s = micro_step(sys, no_reactions(), s, 1e-2);
    CHECK((s.u1.array() - 2.0).abs().maxCoeff() < 1e-10);
    CHECK((s.u2.array() + 1.0).abs().maxCoeff() < 1e-10);
    // jump across Gamma_eps persists: no spurious continuity coupling
    const int v1 = tl->tile_surf1[0][0], v2 = tl->tile_surf2[0][0];
    CHECK(std::abs(s.u1[v1] - s.u2[v2]) > 2.9);
}

TEST_CASE("per-side L-mass conservation and energy dissipation") {
    auto cell = make_cell();
    auto tl = std::make_shared<EpsilonTiling>(build_epsilon_tiling(cell, 2));
    const auto sys = build_wentzell_system(tl, unit_spec());

    MicroState s = micro_initial_state(
        *tl,
        [](const Vec2& x, const Vec2&) { return 1.0 + 0.4 * std::cos(M_PI * x.x()); },
        [](const Vec2& x, const Vec2&) { return 0.5 + 0.2 * std::sin(M_PI * x.y()); });

    const VecX ones1 = VecX::Ones(s.u1.size()), ones2 = VecX::Ones(s.u2.size());
    const double m1 = ones1.dot(sys.A1 * s.u1);
    const double m2 = ones2.dot(sys.A2 * s.u2);
    double energy1 = s.u1.dot(sys.A1 * s.u1);
    for (int k = 0; k < 50; ++k) {
        s = micro_step(sys, no_reactions(), s, 2e-3);
        const double e = s.u1.dot(sys.A1 * s.u1);
        CHECK(e <= energy1 * (1.0 + 1e-12));
        energy1 = e;
    }
    CHECK(std::abs(ones1.dot(sys.A1 * s.u1) - m1) < 1e-9 * std::abs(m1));
    CHECK(std::abs(ones2.dot(sys.A2 * s.u2) - m2) < 1e-9 * std::abs(m2));
}

TEST_CASE("exchange kinetics conserve the combined L-mass") {
    auto cell = make_cell();
    auto tl = std::make_shared<EpsilonTiling>(build_epsilon_tiling(cell, 2));
    const auto sys = build_wentzell_system(tl, unit_spec());

    MicroState s = micro_initial_state(
        *tl, [](const Vec2& x, const Vec2&) { return 1.0 + 0.3 * std::cos(M_PI * x.x()); },
        [](const Vec2&, const Vec2&) { return 0.0; });
    const VecX ones1 = VecX::Ones(s.u1.size()), ones2 = VecX::Ones(s.u2.size());
    const double total0 = ones1.dot(sys.A1 * s.u1) + ones2.dot(sys.A2 * s.u2);
    for (int k = 0; k < 50; ++k) s = micro_step(sys, exchange(), s, 2e-3);
    const double total1 = ones1.dot(sys.A1 * s.u1) + ones2.dot(sys.A2 * s.u2);
    CHECK(std::abs(total1 - total0) < 1e-9 * std::abs(total0));
    // and mass actually moved between the sides
    CHECK(ones2.dot(sys.A2 * s.u2) > 1e-3);
}

TEST_CASE("huge diffusivity reduces to the two-compartment recursion") {
    auto cell = make_cell(0.1);
    auto tl = std::make_shared<EpsilonTiling>(build_epsilon_tiling(cell, 1));
    const auto sys = build_wentzell_system(tl, unit_spec(1e3, 1e3));

    MicroState s = micro_initial_state(
        *tl, [](const Vec2& x, const Vec2&) { return 1.0 + 0.2 * std::cos(M_PI * x.x()); },
        [](const Vec2&, const Vec2&) { return 0.0; });

    const double w1 = cell->area_y1 + cell->gamma_length;
    const double w2 = cell->area_y2 + cell->gamma_length;
    const VecX ones1 = VecX::Ones(s.u1.size()), ones2 = VecX::Ones(s.u2.size());
    double m1 = ones1.dot(sys.A1 * s.u1) / w1;
    double m2 = ones2.dot(sys.A2 * s.u2) / w2;

    const double dt = 1e-3;
    const double g = cell->gamma_length;
    for (int k = 0; k < 200; ++k) {
        s = micro_step(sys, exchange(), s, dt);
        const double flux = g * (m2 - m1);
        const double m1n = m1 + dt * flux / w1;
        const double m2n = m2 - dt * flux / w2;
        m1 = m1n;
        m2 = m2n;
    }
    CHECK(std::abs(ones1.dot(sys.A1 * s.u1) / w1 - m1) < 2e-3);
    CHECK(std::abs(ones2.dot(sys.A2 * s.u2) / w2 - m2) < 2e-3);
    // fields have flattened to their weighted means
    CHECK((s.u1.array() - ones1.dot(sys.A1 * s.u1) / w1).abs().maxCoeff() < 1e-3);
}

TEST_CASE("micro run: echo at T = 0, diagnostics, Richardson in dt") {
    auto cell = make_cell();
    auto tl = std::make_shared<EpsilonTiling>(build_epsilon_tiling(cell, 2));
    const auto sys = build_wentzell_system(tl, unit_spec());

    const MicroState init = micro_initial_state(
        *tl, [](const Vec2& x, const Vec2&) { return std::cos(M_PI * x.x()); },
        [](const Vec2&, const Vec2&) { return 1.0; });

    const auto echo = micro_run(sys, exchange(), init, 0.0, 1e-3, {});
    REQUIRE(echo.snapshots.size() == 1);
    CHECK((echo.snapshots[0].u1 - init.u1).lpNorm<Eigen::Infinity>() == 0.0);

    auto probe = [&](double dt) {
        const auto run = micro_run(sys, exchange(), init, 0.1, dt, {});
        return run.snapshots.back().u2[7];
    };
    const double f1 = probe(4e-3), f2 = probe(2e-3), f3 = probe(1e-3);
    const double ratio = (f1 - f2) / (f2 - f3);
    CHECK(ratio > 1.7);
    CHECK(ratio < 2.3);

    const auto run = micro_run(sys, exchange(), init, 0.1, 2e-3, {0.05});
    REQUIRE(run.diagnostics.size() == 2);
    CHECK(run.hje_time_norm1 > 0);
    CHECK(run.diagnostics.back().trace_check_ratio <= 1.0);
}
