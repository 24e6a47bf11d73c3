#include <whomog/check.hpp>

#include <cmath>
#include <sstream>

namespace whomog {

namespace {

UnitCellGeometry geometry_of(const RunConfig& cfg) {
    UnitCellGeometry g;
    g.center = Vec2(cfg.center_x, cfg.center_y);
    g.radius = cfg.radius;
    g.clearance = cfg.clearance;
    return g;
}

} // namespace

CheckReport run_checks(const RunConfig& cfg) {
    CheckReport report;
    auto item = [&](const std::string& name, auto&& body) {
        CheckReport::Item it;
        it.name = name;
        try {
            it.detail = body();
            it.ok = true;
        } catch (const Error& e) {
            it.ok = false;
            it.detail = e.what();
        }
        report.items.push_back(std::move(it));
    };

    std::shared_ptr<UnitCell> cell;
    item("cell mesh generation and invariants", [&] {
        TriangleMesh mesh;
        if (!cfg.mesh_file.empty()) {
            mesh = read_mesh(cfg.mesh_file);
            validate_mesh(mesh);
        } else {
            mesh = build_cell_mesh(geometry_of(cfg), cfg.cell_h);
        }
        UnitCell c;
        c.geom = geometry_of(cfg);
        c.full = std::move(mesh);
        c.surface = extract_surface_mesh(c.full);
        c.y1 = extract_side_mesh(c.full, c.surface, SubdomainTag::Y1);
        c.y2 = extract_side_mesh(c.full, c.surface, SubdomainTag::Y2);
        c.area_y1 = c.full.area_of(SubdomainTag::Y1);
        c.area_y2 = c.full.area_of(SubdomainTag::Y2);
        c.gamma_length = c.surface.total_length();
        cell = std::make_shared<UnitCell>(std::move(c));

        const double defect = std::abs(cell->area_y1 + cell->area_y2 - 1.0);
        if (defect > 1e-12) throw GeometryError("area identity defect " + std::to_string(defect));
        std::ostringstream os;
        os << "vertices " << cell->full.num_vertices() << ", |Y1| " << cell->area_y1 << ", |Y2| "
           << cell->area_y2 << ", |Gamma| " << cell->gamma_length;
        return os.str();
    });
    if (!cell) return report;

    ModelBundle model;
    bool have_model = false;
    item("model catalog construction", [&] {
        model = build_model(cfg, *cell);
        have_model = true;
        std::ostringstream os;
        os << "c0 " << model.D.c0 << ", Lipschitz " << model.R.lipschitz;
        return os.str();
    });
    if (!have_model) return report;

    item("diffusion data symmetric and coercive", [&] {
        check_diffusion_assumptions(model.D, *cell);
        return std::string("sampled on all element coefficient points");
    });

    item("reaction Lipschitz sampling against the declared constant", [&] {
        Rng rng(cfg.seed);
        const auto rep = check_lipschitz(model.R, *cell, 2000, rng);
        std::ostringstream os;
        os << "observed f " << rep.observed_f << ", h " << rep.observed_h << ", declared "
           << rep.declared;
        if (!rep.ok) throw ValidationError("understated Lipschitz bound: " + os.str());
        return os.str();
    });

    item("unfolding identities (norms, gradients, trace commutation)", [&] {
        Rng rng(cfg.seed + 1);
        double worst_norm = 0, worst_grad = 0;
        for (int n : {2, 4}) {
            const auto tl = build_epsilon_tiling(cell, n);
            for (int s = 0; s < 10; ++s) {
                const VecX f1 = random_nodal_field(tl.mesh1.num_vertices(), rng);
                const VecX f2 = random_nodal_field(tl.mesh2.num_vertices(), rng);
                worst_norm = std::max(worst_norm, bulk_norm_identity_check(tl, f1, UnfoldTag::Y1));
                worst_norm = std::max(worst_norm, bulk_norm_identity_check(tl, f2, UnfoldTag::Y2));
                worst_norm = std::max(worst_norm, surface_norm_identity_check(tl, f1, Side::One));
                worst_norm = std::max(worst_norm, surface_norm_identity_check(tl, f2, Side::Two));
                worst_grad =
                    std::max(worst_grad, unfold_gradient_identity_check(tl, f1, UnfoldTag::Y1));
                worst_grad =
                    std::max(worst_grad, unfold_gradient_identity_check(tl, f2, UnfoldTag::Y2));
                worst_grad = std::max(worst_grad, surface_gradient_identity_check(tl, f1, Side::One));
            }
        }
        std::ostringstream os;
        os << "norm defect " << worst_norm << ", gradient defect " << worst_grad;
        if (worst_norm > 1e-10) throw ConsistencyError("norm identity defect: " + os.str());
        // round-off in the gradient identity grows with the sharpest cut
        // triangle of the configured cell mesh; 1e-10 covers the catalog range
        if (worst_grad > 1e-10) throw ConsistencyError("gradient identity defect: " + os.str());
        return os.str();
    });

    item("nonlinear kinetics commute with unfolding", [&] {
        const auto tl = build_epsilon_tiling(cell, 4);
        Rng rng(cfg.seed + 2);
        const VecX u1 = random_nodal_field(tl.mesh1.num_vertices(), rng);
        const VecX u2 = random_nodal_field(tl.mesh2.num_vertices(), rng);

        VecX fu(u2.size());
        for (int v = 0; v < u2.size(); ++v) {
            const Vec2 x = tl.mesh2.vertices[v];
            Vec2 y = x / tl.epsilon;
            y = Vec2(y.x() - std::floor(y.x()), y.y() - std::floor(y.y()));
            fu[v] = model.R.f2(0.5, y, u2[v]);
        }
        const auto unfolded_fu = unfold(tl, fu, UnfoldTag::Y2);
        const auto unfolded_u = unfold(tl, u2, UnfoldTag::Y2);
        double max_diff = 0;
        for (int t = 0; t < tl.tiles(); ++t)
            for (int v = 0; v < unfolded_u.values.cols(); ++v)
                max_diff = std::max(
                    max_diff, std::abs(unfolded_fu.values(t, v) -
                                       model.R.f2(0.5, cell->y2.mesh.vertices[v],
                                                  unfolded_u.values(t, v))));

        const auto tr1 = unfold_trace(tl, u1, Side::One);
        const auto tr2 = unfold_trace(tl, u2, Side::Two);
        for (int t = 0; t < tl.tiles(); ++t) {
            for (int s = 0; s < cell->surface.num_nodes(); ++s) {
                const Vec2 y = cell->surface.nodes[s];
                const double direct = model.R.h1(0.5, y, u1[tl.tile_surf1[t][s]],
                                                 u2[tl.tile_surf2[t][s]]);
                const double via_unfold =
                    model.R.h1(0.5, y, tr1.values(t, s), tr2.values(t, s));
                max_diff = std::max(max_diff, std::abs(direct - via_unfold));
            }
        }
        std::ostringstream os;
        os << "max defect " << max_diff;
        if (max_diff > 1e-12) throw ConsistencyError(os.str());
        return os.str();
    });

    item("trace inequality with calibrated constant", [&] {
        Rng rng(cfg.seed + 3);
        const auto tl_cal = build_epsilon_tiling(cell, 2);
        const HjeForm f_cal = build_hje_form(tl_cal, Side::One);
        const double theta = 1.0;
        const double C = calibrate_trace_constant(f_cal, 0.5, theta, 50, rng);
        double worst = 0;
        for (int n : {2, 4}) {
            const auto tl = build_epsilon_tiling(cell, n);
            const HjeForm f = build_hje_form(tl, Side::One);
            for (int s = 0; s < 50; ++s) {
                const VecX u = random_nodal_field(tl.mesh1.num_vertices(), rng);
                worst = std::max(worst,
                                 trace_inequality_check(f, u, tl.epsilon, theta, C).ratio);
            }
        }
        std::ostringstream os;
        os << "C(1) = " << C << ", max lhs/rhs " << worst;
        if (worst > 1.0) throw ConsistencyError("trace inequality violated: " + os.str());
        return os.str();
    });

    return report;
}

} // namespace whomog
