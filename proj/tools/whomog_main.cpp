// whomog: periodic homogenization toolkit for bulk-surface reaction-diffusion
// systems on a two-component perforated cell geometry.
//
// Subcommands: cell (cell problems + effective tensor), macro (homogenized
// limit system), micro (eps-resolved system), sweep (eps-convergence
// verification), check (model and mesh diagnostics).
//
// Exit codes: 0 success, 2 validation failure, 3 numerical failure,
// 4 non-monotone convergence (sweep only).

#include <CLI11.hpp>

#include <whomog/check.hpp>
#include <whomog/config.hpp>
#include <whomog/io.hpp>

#include <cstdio>
#include <filesystem>

using namespace whomog;

namespace {

UnitCellGeometry geometry_of(const RunConfig& cfg) {
    UnitCellGeometry g;
    g.center = Vec2(cfg.center_x, cfg.center_y);
    g.radius = cfg.radius;
    g.clearance = cfg.clearance;
    return g;
}

std::shared_ptr<UnitCell> load_cell(const RunConfig& cfg) {
    if (!cfg.mesh_file.empty()) {
        UnitCell c;
        c.geom = geometry_of(cfg);
        c.full = read_mesh(cfg.mesh_file);
        validate_mesh(c.full);
        c.surface = extract_surface_mesh(c.full);
        c.y1 = extract_side_mesh(c.full, c.surface, SubdomainTag::Y1);
        c.y2 = extract_side_mesh(c.full, c.surface, SubdomainTag::Y2);
        c.area_y1 = c.full.area_of(SubdomainTag::Y1);
        c.area_y2 = c.full.area_of(SubdomainTag::Y2);
        c.gamma_length = c.surface.total_length();
        return std::make_shared<UnitCell>(std::move(c));
    }
    return std::make_shared<UnitCell>(build_unit_cell(geometry_of(cfg), cfg.cell_h));
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
    std::filesystem::create_directories(cfg.output_dir);
    return (std::filesystem::path(cfg.output_dir) / name).string();
}

std::vector<double> run_times(double T, const std::vector<double>& requested) {
    std::vector<double> times = requested;
    times.push_back(T);
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end(),
                            [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                times.end());
    for (double t : times)
        if (t > T + 1e-12) throw ValidationError("output time beyond T");
    return times;
}

int cmd_cell(const RunConfig& cfg) {
    auto cell = load_cell(cfg);
    const ModelBundle model = build_model(cfg, *cell);

    const auto sols = solve_cell_problems(*cell, model.D);
    const auto tensor = assemble_effective_tensor(*cell, model.D, sols);

    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 2; ++i)
        for (int l = 0; l < 2; ++l)
            rows.push_back({double(i), double(l), tensor.entries(i, l)});
    write_csv(out_path(cfg, "effective_tensor.csv"), {"i", "l", "value"}, rows);
    write_field(sols.w[0], out_path(cfg, "corrector_w1.field"));
    write_field(sols.w[1], out_path(cfg, "corrector_w2.field"));
    write_mesh(cell->y1.mesh, out_path(cfg, "cell_y1.mesh"));
    write_mesh(cell->full, out_path(cfg, "cell.mesh"));

    std::printf("effective tensor:\n  [%.12g  %.12g]\n  [%.12g  %.12g]\n", tensor.entries(0, 0),
                tensor.entries(0, 1), tensor.entries(1, 0), tensor.entries(1, 1));
    std::printf("eigenvalues: %.12g %.12g, symmetry defect %.3g\n", tensor.eigenvalues[0],
                tensor.eigenvalues[1], tensor.symmetry_defect);
    std::printf("corrector residuals: %.3g %.3g; Gamma means: %.3g %.3g\n", sols.residual_norm[0],
                sols.residual_norm[1], sols.mean_on_gamma[0], sols.mean_on_gamma[1]);
    return 0;
}

int cmd_macro(const RunConfig& cfg) {
    auto cell = load_cell(cfg);
    const ModelBundle model = build_model(cfg, *cell);
    const auto sols = solve_cell_problems(*cell, model.D);
    const auto tensor = assemble_effective_tensor(*cell, model.D, sols);

    const int n = std::max(1, static_cast<int>(std::lround(1.0 / cfg.macro_h)));
    auto prob = build_macro_problem(n, tensor.entries, *cell, model.averaged);
    const MacroState init =
        weighted_initial_data(prob, model.u0i_1, model.u0iG_1, model.u0i_2, model.u0iG_2);

    const auto times = run_times(cfg.macro_T, cfg.output_times);
    const auto result = macro_run(prob, init, cfg.macro_T, cfg.macro_dt, times);
    if (result.stability_warning)
        std::fprintf(stderr, "StabilityWarning: dt exceeds the reaction stability budget\n");

    write_mesh(prob.mesh, out_path(cfg, "macro.mesh"));
    std::vector<std::vector<double>> diag;
    for (std::size_t k = 0; k < result.snapshots.size(); ++k) {
        const auto& s = result.snapshots[k];
        const auto& d = result.diagnostics[k];
        const std::string label = format_time_label(s.t);
        write_field(s.u1, out_path(cfg, "macro_u1_" + label + ".field"));
        write_field(s.u2, out_path(cfg, "macro_u2_" + label + ".field"));
        diag.push_back({d.t, d.mass1, d.mass2, d.energy, d.min_u1, d.max_u1});
    }
    write_csv(out_path(cfg, "diagnostics.csv"), {"t", "mass1", "mass2", "energy", "min_u1", "max_u1"},
              diag);
    std::printf("macro run complete: %zu snapshots -> %s\n", result.snapshots.size(),
                cfg.output_dir.c_str());
    return 0;
}

int cmd_micro(const RunConfig& cfg) {
    auto cell = load_cell(cfg);
    const ModelBundle model = build_model(cfg, *cell);

    auto tiling = std::make_shared<EpsilonTiling>(build_epsilon_tiling(cell, cfg.micro_inv_epsilon));
    const auto sys = build_wentzell_system(tiling, model.D);
    const MicroState init = micro_initial_state(*tiling, model.U1, model.U2);

    const auto times = run_times(cfg.micro_T, cfg.output_times);
    const auto result = micro_run(sys, model.R, init, cfg.micro_T, cfg.micro_dt, times);
    if (result.stability_warning)
        std::fprintf(stderr, "StabilityWarning: dt exceeds the reaction stability budget\n");

    write_mesh(tiling->mesh1, out_path(cfg, "micro_omega1.mesh"));
    write_mesh(tiling->mesh2, out_path(cfg, "micro_omega2.mesh"));
    std::vector<std::vector<double>> diag;
    for (std::size_t k = 0; k < result.snapshots.size(); ++k) {
        const auto& s = result.snapshots[k];
        const auto& d = result.diagnostics[k];
        const std::string label = format_time_label(s.t);
        write_field(s.u1, out_path(cfg, "micro_u1_" + label + ".field"));
        write_field(s.u2, out_path(cfg, "micro_u2_" + label + ".field"));
        diag.push_back({d.t, d.mass1, d.mass2, d.hje_norm1, d.hje_norm2, d.trace_check_ratio});
    }
    write_csv(out_path(cfg, "micro_diagnostics.csv"),
              {"t", "mass1", "mass2", "hje_norm1", "hje_norm2", "trace_check_ratio"}, diag);
    std::printf("micro run complete (eps = 1/%d): ||u||_{L2 H} = %.6g, %.6g\n",
                cfg.micro_inv_epsilon, result.hje_time_norm1, result.hje_time_norm2);
    return 0;
}

int cmd_sweep(const RunConfig& cfg) {
    auto cell = load_cell(cfg);
    const SweepModel model = build_sweep_model(cfg, *cell);
    const SweepParams params =
        build_sweep_params(cfg, worker_count(static_cast<int>(cfg.sweep_inv_epsilons.size())));

    const auto report = convergence_sweep(model, params);

    const std::vector<std::string> header{"epsilon", "e1_bulk", "e1_surf",    "e2_bulk", "e2_surf",
                                          "e1_grad", "grad2_norm", "hje1",    "hje2"};
    std::vector<std::vector<double>> rows;
    for (const auto& r : report.rows)
        rows.push_back({r.epsilon, r.e1_bulk, r.e1_surf, r.e2_bulk, r.e2_surf, r.e1_grad,
                        r.grad2_norm, r.hje1, r.hje2});
    write_csv(out_path(cfg, "convergence_report.csv"), header, rows);
    write_dat(out_path(cfg, "convergence_report.dat"), header, rows);

    if (!report.shifts.empty()) {
        std::vector<std::vector<double>> srows;
        for (const auto& s : report.shifts)
            srows.push_back({s.epsilon, double(s.lx), double(s.ly), s.h, s.lhs, s.rhs_u1,
                             s.rhs_init, s.rhs, double(s.ok)});
        write_csv(out_path(cfg, "shift_report.csv"),
                  {"epsilon", "lx", "ly", "h", "lhs", "rhs_u1", "rhs_init", "rhs", "ok"}, srows);
    }

    std::printf("%-8s %-12s %-12s %-12s %-12s %-12s %-12s %-8s %-8s\n", "epsilon", "e1_bulk",
                "e1_surf", "e2_bulk", "e2_surf", "e1_grad", "grad2", "hje1", "hje2");
    for (const auto& r : report.rows)
        std::printf("%-8.4f %-12.5e %-12.5e %-12.5e %-12.5e %-12.5e %-12.5e %-8.4f %-8.4f\n",
                    r.epsilon, r.e1_bulk, r.e1_surf, r.e2_bulk, r.e2_surf, r.e1_grad, r.grad2_norm,
                    r.hje1, r.hje2);
    for (const auto& n : report.notes) std::fprintf(stderr, "note: %s\n", n.c_str());

    if (!report.monotone) {
        std::fprintf(stderr, "NonMonotoneConvergence: see notes above\n");
        return 4;
    }
    std::printf("monotone decrease confirmed (ratio <= %g); shift constant %.4g\n",
                params.monotonicity_ratio, report.shift_constant);
    return 0;
}

int cmd_check(const RunConfig& cfg) {
    const auto report = run_checks(cfg);
    for (const auto& item : report.items)
        std::printf("[%s] %s: %s\n", item.ok ? "pass" : "FAIL", item.name.c_str(),
                    item.detail.c_str());
    return report.ok() ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"periodic homogenization of bulk-surface reaction-diffusion systems"};
    app.require_subcommand(1);

    std::string config_path;
    std::string output_dir;
    std::string epsilon;
    app.add_option("-c,--config", config_path, "configuration file (key = value)");

    auto* cell = app.add_subcommand("cell", "solve the cell problems and effective tensor");
    auto* macro = app.add_subcommand("macro", "run the homogenized limit system");
    auto* micro = app.add_subcommand("micro", "run the eps-resolved system");
    micro->add_option("--epsilon", epsilon, "epsilon as 1/N");
    auto* sweep = app.add_subcommand("sweep", "eps-sweep convergence verification");
    auto* check = app.add_subcommand("check", "model and mesh diagnostics");
    for (auto* sub : {cell, macro, micro, sweep, check})
        sub->add_option("-o,--output-dir", output_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg = config_path.empty() ? RunConfig{} : parse_config_file(config_path);
        if (!output_dir.empty()) cfg.output_dir = output_dir;
        if (!epsilon.empty()) {
            RunConfig probe = parse_config("[micro]\nepsilon = " + epsilon + "\n");
            cfg.micro_inv_epsilon = probe.micro_inv_epsilon;
        }

        if (cell->parsed()) return cmd_cell(cfg);
        if (macro->parsed()) return cmd_macro(cfg);
        if (micro->parsed()) return cmd_micro(cfg);
        if (sweep->parsed()) return cmd_sweep(cfg);
        return cmd_check(cfg);
    } catch (const ParseError& e) {
        std::fprintf(stderr, "parse error: %s\n", e.what());
        return 2;
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "validation error: %s\n", e.what());
        return 2;
    } catch (const SolverDivergence& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    } catch (const SingularSystem& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
