#ifndef WHOMOG_CONFIG_HPP
#define WHOMOG_CONFIG_HPP

#include <whomog/macro.hpp>
#include <whomog/two_scale.hpp>

#include <optional>
#include <string>
#include <vector>

namespace whomog {

enum class Command { Cell, Macro, Micro, Sweep, Check };

/*! Parsed and validated run configuration. Text format: `key = value`
//  lines, `#` comments, `[section]` headers prefixing the keys that follow;
//  dotted keys (`macro.h = ...`) work without a section. Unknown keys are
//  hard errors. Epsilons are written as fractions `1/N`. */
struct RunConfig {
    Command command = Command::Check;

    // [geometry]
    double center_x = 0.5, center_y = 0.5;
    double radius = 0.25;
    double clearance = 0.05;
    double cell_h = 0.05;
    std::string mesh_file; // optional pre-built cell mesh to validate/use

    // [macro]
    double macro_h = 1.0 / 32.0;
    double macro_dt = 1e-3;
    double macro_T = 0.5;

    // [micro]
    int micro_inv_epsilon = 4;
    double micro_dt = 1e-3;
    double micro_T = 0.25;

    // [sweep]
    std::vector<int> sweep_inv_epsilons{2, 4, 8};
    double sweep_T = 0.25;
    double sweep_dt = 1e-3;
    double sweep_macro_h = 1.0 / 32.0;
    int sweep_snapshots = 11;
    double sweep_ratio = 0.9;

    // [model] family selectors with parameters, e.g. "constant 1.0",
    // "periodic 1.0 0.5", "linear 1.0 0.0 mod 0.5", "exchange 1.0",
    // "logistic 1.0 1.0 10.0"
    std::string d1 = "constant 1.0";
    std::string d2 = "constant 1.0";
    std::string dg1 = "constant 1.0";
    std::string dg2 = "constant 1.0";
    std::string f1 = "none";
    std::string f2 = "none";
    std::string h = "none";
    double lipschitz_override = -1; // < 0: use the catalog constant

    // [initial] "constant c" | "cosine a b" | "separable a b m"
    std::string u1 = "constant 1.0";
    std::string u2 = "constant 0.0";
    std::string u1_gamma = "same";
    std::string u2_gamma = "same";

    // [output]
    std::string output_dir = "out";
    std::vector<double> output_times;

    unsigned long seed = 20240101;
};

RunConfig parse_config(const std::string& text);
RunConfig parse_config_file(const std::string& path);
// Normalized round-trippable rendering: parse(serialize(c)) == c.
std::string serialize(const RunConfig& c);

/*! The model catalog realized on a meshed cell: diffusion and reaction
//  specs with honest Lipschitz constants, closed-form averaged reactions
//  (modulation integrals quadratured once), and initial profiles together
//  with their two-scale limit data. */
struct ModelBundle {
    DiffusionSpec D;
    ReactionSpec R;
    AveragedReactions averaged;
    std::function<double(const Vec2&, const Vec2&)> U1, U2;
    ScalarField u0i_1, u0iG_1, u0i_2, u0iG_2;
};

ModelBundle build_model(const RunConfig& cfg, const UnitCell& cell);

SweepModel build_sweep_model(const RunConfig& cfg, const UnitCell& cell);
SweepParams build_sweep_params(const RunConfig& cfg, int threads);

// Worker cap: WHOMOG_THREADS when set, otherwise hardware concurrency.
int worker_count(int jobs);

} // namespace whomog

#endif
