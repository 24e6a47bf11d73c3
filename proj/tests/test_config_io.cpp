#include <doctest.h>

#include <whomog/check.hpp>
#include <whomog/config.hpp>
#include <whomog/io.hpp>

#include <cstdio>
#include <fstream>

using namespace whomog;

namespace {
std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}
} // namespace

TEST_CASE("empty config yields the documented defaults") {
    const RunConfig c = parse_config("");
    CHECK(c.macro_h == doctest::Approx(1.0 / 32.0));
    CHECK(c.macro_dt == 1e-3);
    CHECK(c.macro_T == 0.5);
    CHECK(c.micro_inv_epsilon == 4);
    CHECK(c.radius == 0.25);
    CHECK(c.sweep_inv_epsilons == std::vector<int>{2, 4, 8});
    CHECK(c.d1 == "constant 1.0");
    CHECK(c.output_dir == "out");
}

TEST_CASE("sections, dotted keys, comments, fractions") {
    const std::string text = R"(
# comment
seed = 99
[macro]
h = 0.0625      # inline comment
dt = 2e-3
[micro]
epsilon = 1/3
micro.T = 0.125
[sweep]
epsilons = 1/2, 1/4
)";
    const RunConfig c = parse_config(text);
    CHECK(c.seed == 99);
    CHECK(c.macro_h == 0.0625);
    CHECK(c.macro_dt == 2e-3);
    CHECK(c.micro_inv_epsilon == 3);
    CHECK(c.micro_T == 0.125);
    CHECK(c.sweep_inv_epsilons == std::vector<int>{2, 4});
}

TEST_CASE("epsilon validation enforces 1/N") {
    CHECK(parse_config("micro.epsilon = 1/3\n").micro_inv_epsilon == 3);
    CHECK(parse_config("micro.epsilon = 0.25\n").micro_inv_epsilon == 4);
    CHECK_THROWS_AS(parse_config("micro.epsilon = 0.3\n"), ValidationError);
    CHECK_THROWS_AS(parse_config("micro.epsilon = 2/3\n"), ValidationError);
}

TEST_CASE("unknown keys and malformed lines are hard errors") {
    CHECK_THROWS_AS(parse_config("macroo.h = 0.05\n"), ParseError);
    CHECK_THROWS_AS(parse_config("[macro]\nhh = 1\n"), ParseError);
    CHECK_THROWS_AS(parse_config("justaword\n"), ParseError);
    CHECK_THROWS_AS(parse_config("macro.h = abc\n"), ParseError);
    try {
        parse_config("seed = 1\nmacroo.h = 0.05\n");
        CHECK(false);
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("macroo.h") != std::string::npos);
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("range validation names the offending key class") {
    CHECK_THROWS_AS(parse_config("macro.dt = -1\n"), ValidationError);
    CHECK_THROWS_AS(parse_config("geometry.cell_h = 0.9\n"), ValidationError);
    CHECK_THROWS_AS(parse_config("sweep.ratio = 1.5\n"), ValidationError);
}

TEST_CASE("serialize-parse round trip is idempotent") {
    RunConfig c = parse_config("[macro]\nh = 0.0625\n[model]\nf2 = linear 1.0 0.0\nh = exchange 2.0\n");
    const std::string once = serialize(c);
    const std::string twice = serialize(parse_config(once));
    CHECK(once == twice);
}

TEST_CASE("field io round-trips bytes and values") {
    VecX v(5);
    v << 1.0, -2.5, 3.1415926535897931, 1e-17, 7.2;
    write_field(v, "roundtrip.field");
    const VecX back = read_field("roundtrip.field");
    REQUIRE(back.size() == v.size());
    for (int i = 0; i < v.size(); ++i) CHECK(back[i] == v[i]);

    write_field(back, "roundtrip2.field");
    CHECK(slurp("roundtrip.field") == slurp("roundtrip2.field"));
}

TEST_CASE("csv writer emits the documented header and rejects ragged rows") {
    write_csv("diag_test.csv", {"t", "mass1", "mass2", "energy", "min_u1", "max_u1"},
              {{0.0, 1.0, 2.0, 3.0, 4.0, 5.0}});
    const std::string text = slurp("diag_test.csv");
    CHECK(text.rfind("t,mass1,mass2,energy,min_u1,max_u1\n", 0) == 0);
    CHECK_THROWS_AS(write_csv("bad.csv", {"a", "b"}, {{1.0}}), IoError);
}

TEST_CASE("operator triplet dump lists every stored entry") {
    SpMat A(2, 2);
    std::vector<Triplet> tr{{0, 0, 1.5}, {0, 1, -2.0}, {1, 1, 0.25}};
    A.setFromTriplets(tr.begin(), tr.end());
    A.makeCompressed();
    dump_operator(A, "op_dump.txt");
    std::ifstream in("op_dump.txt");
    int i, j, count = 0;
    double v;
    double sum = 0;
    while (in >> i >> j >> v) {
        ++count;
        sum += v;
        CHECK(A.coeff(i, j) == v);
    }
    CHECK(count == 3);
    CHECK(sum == doctest::Approx(-0.25));
}

TEST_CASE("model catalog: coercivity and lipschitz bookkeeping") {
    UnitCellGeometry g;
    const UnitCell cell = build_unit_cell(g, 0.1);

    RunConfig cfg;
    cfg.d1 = "periodic 2.0 0.5";
    cfg.dg1 = "periodic 1.0 0.25";
    cfg.f2 = "linear 3.0 1.0 mod 0.5";
    cfg.h = "exchange 1.0";
    const ModelBundle m = build_model(cfg, cell);
    CHECK(m.D.c0 == doctest::Approx(0.75)); // dg1 family floor
    CHECK(m.R.lipschitz == doctest::Approx(4.5)); // 3.0 * (1 + 0.5)
    CHECK(m.R.f_depends_on_y);
    CHECK(!m.R.h_depends_on_y);
    CHECK_NOTHROW(check_diffusion_assumptions(m.D, cell));

    // averaged reactions match direct quadrature of the modulated kinetics
    const auto generic = average_reactions(cell, m.R);
    for (double z : {-1.0, 0.3, 2.0}) {
        CHECK(m.averaged.F2(0.1, z) == doctest::Approx(generic.F2(0.1, z)).epsilon(1e-12));
        CHECK(m.averaged.H1(0.1, z, -z) == doctest::Approx(generic.H1(0.1, z, -z)).epsilon(1e-12));
    }

    CHECK_THROWS_AS(build_model([&] {
        RunConfig bad = cfg;
        bad.d1 = "periodic 1.0 2.0";
        return bad;
    }(), cell), ValidationError);
    CHECK_THROWS_AS(build_model([&] {
        RunConfig bad = cfg;
        bad.f1 = "linoleic 1.0";
        return bad;
    }(), cell), ValidationError);
}

TEST_CASE("check aggregates diagnostics and flags understated constants") {
    RunConfig cfg;
    cfg.cell_h = 0.1;
    cfg.f1 = "linear 2.0 0.0";
    cfg.h = "exchange 1.0";
    const auto good = run_checks(cfg);
    for (const auto& item : good.items) {
        INFO(item.name, ": ", item.detail);
        CHECK(item.ok);
    }
    CHECK(good.ok());

    cfg.lipschitz_override = 0.5; // understates the linear 2.0 kinetics
    const auto bad = run_checks(cfg);
    CHECK(!bad.ok());

    // corrupted mesh file surfaces a topology error with the path
    std::FILE* f = std::fopen("corrupt_cell.mesh", "w");
    std::fprintf(f, "meshfmt 1\nvertices 1\n0 0\ntriangles 1\n0 0 0 1\n");
    std::fclose(f);
    RunConfig broken;
    broken.mesh_file = "corrupt_cell.mesh";
    const auto rep = run_checks(broken);
    REQUIRE(!rep.items.empty());
    CHECK(!rep.items.front().ok);
    CHECK(rep.items.front().detail.find("corrupt_cell.mesh") != std::string::npos);
}
