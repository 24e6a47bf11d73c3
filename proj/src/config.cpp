#include <whomog/config.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

namespace whomog {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_number(const std::string& v, const std::string& key, int line) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument("trailing");
        return x;
    } catch (...) {
        throw ParseError("line " + std::to_string(line) + ": key '" + key +
                         "' expects a number, got '" + v + "'");
    }
}

// "1/N" or a decimal that is exactly 1/N for integer N
int parse_inv_epsilon(const std::string& v, const std::string& key, int line) {
    const auto slash = v.find('/');
    if (slash != std::string::npos) {
        const std::string num = trim(v.substr(0, slash)), den = trim(v.substr(slash + 1));
        if (num != "1")
            throw ValidationError("key '" + key + "': epsilon must be 1/N with integer N");
        try {
            const int n = std::stoi(den);
            if (n < 1) throw std::invalid_argument("sign");
            return n;
        } catch (...) {
            throw ParseError("line " + std::to_string(line) + ": key '" + key +
                             "' has a malformed fraction '" + v + "'");
        }
    }
    const double x = parse_number(v, key, line);
    if (!(x > 0) || x > 1) throw ValidationError("key '" + key + "': epsilon must lie in (0, 1]");
    const double n = 1.0 / x;
    if (std::abs(n - std::lround(n)) > 1e-9)
        throw ValidationError("key '" + key + "': 1/epsilon must be an integer, got epsilon = " + v);
    return static_cast<int>(std::lround(n));
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : v) {
        if (ch == ',') {
            parts.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    if (!trim(cur).empty()) parts.push_back(trim(cur));
    return parts;
}

} // namespace

RunConfig parse_config(const std::string& text) {
    RunConfig c;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = raw;
        const auto hash = s.find('#');
        if (hash != std::string::npos) s = s.substr(0, hash);
        s = trim(s);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']')
                throw ParseError("line " + std::to_string(line) + ": malformed section header");
            section = trim(s.substr(1, s.size() - 2));
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ParseError("line " + std::to_string(line) + ": expected key = value");
        std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        if (key.empty()) throw ParseError("line " + std::to_string(line) + ": empty key");
        if (!section.empty() && key.find('.') == std::string::npos) key = section + "." + key;

        if (key == "geometry.center_x") {
            c.center_x = parse_number(value, key, line);
        } else if (key == "geometry.center_y") {
            c.center_y = parse_number(value, key, line);
        } else if (key == "geometry.radius") {
            c.radius = parse_number(value, key, line);
        } else if (key == "geometry.clearance") {
            c.clearance = parse_number(value, key, line);
        } else if (key == "geometry.cell_h") {
            c.cell_h = parse_number(value, key, line);
        } else if (key == "geometry.mesh_file") {
            c.mesh_file = value;
        } else if (key == "macro.h") {
            c.macro_h = parse_number(value, key, line);
        } else if (key == "macro.dt") {
            c.macro_dt = parse_number(value, key, line);
        } else if (key == "macro.T") {
            c.macro_T = parse_number(value, key, line);
        } else if (key == "micro.epsilon") {
            c.micro_inv_epsilon = parse_inv_epsilon(value, key, line);
        } else if (key == "micro.dt") {
            c.micro_dt = parse_number(value, key, line);
        } else if (key == "micro.T") {
            c.micro_T = parse_number(value, key, line);
        } else if (key == "sweep.epsilons") {
            c.sweep_inv_epsilons.clear();
            for (const auto& part : split_list(value))
                c.sweep_inv_epsilons.push_back(parse_inv_epsilon(part, key, line));
            if (c.sweep_inv_epsilons.empty())
                throw ValidationError("key 'sweep.epsilons': list must not be empty");
        } else if (key == "sweep.T") {
            c.sweep_T = parse_number(value, key, line);
        } else if (key == "sweep.dt") {
            c.sweep_dt = parse_number(value, key, line);
        } else if (key == "sweep.macro_h") {
            c.sweep_macro_h = parse_number(value, key, line);
        } else if (key == "sweep.snapshots") {
            c.sweep_snapshots = static_cast<int>(parse_number(value, key, line));
        } else if (key == "sweep.ratio") {
            c.sweep_ratio = parse_number(value, key, line);
        } else if (key == "model.d1") {
            c.d1 = value;
        } else if (key == "model.d2") {
            c.d2 = value;
        } else if (key == "model.dg1") {
            c.dg1 = value;
        } else if (key == "model.dg2") {
            c.dg2 = value;
        } else if (key == "model.f1") {
            c.f1 = value;
        } else if (key == "model.f2") {
            c.f2 = value;
        } else if (key == "model.h") {
            c.h = value;
        } else if (key == "model.lipschitz") {
            c.lipschitz_override = value == "auto" ? -1 : parse_number(value, key, line);
        } else if (key == "initial.u1") {
            c.u1 = value;
        } else if (key == "initial.u2") {
            c.u2 = value;
        } else if (key == "initial.u1_gamma") {
            c.u1_gamma = value;
        } else if (key == "initial.u2_gamma") {
            c.u2_gamma = value;
        } else if (key == "output.dir") {
            c.output_dir = value;
        } else if (key == "output.times") {
            c.output_times.clear();
            for (const auto& part : split_list(value))
                c.output_times.push_back(parse_number(part, key, line));
        } else if (key == "seed") {
            c.seed = static_cast<unsigned long>(parse_number(value, key, line));
        } else {
            throw ParseError("line " + std::to_string(line) + ": unknown key '" + key + "'");
        }
    }

    // range validation
    if (!(c.radius > 0) || !(c.clearance > 0))
        throw ValidationError("geometry.radius and geometry.clearance must be positive");
    if (!(c.cell_h > 0) || c.cell_h > 0.5)
        throw ValidationError("geometry.cell_h must lie in (0, 0.5]");
    for (double v : {c.macro_h, c.macro_dt, c.micro_dt, c.sweep_dt, c.sweep_macro_h})
        if (!(v > 0)) throw ValidationError("mesh sizes and time steps must be positive");
    for (double v : {c.macro_T, c.micro_T, c.sweep_T})
        if (v < 0) throw ValidationError("final times must be nonnegative");
    if (c.sweep_snapshots < 2) throw ValidationError("sweep.snapshots must be at least 2");
    if (!(c.sweep_ratio > 0) || c.sweep_ratio >= 1)
        throw ValidationError("sweep.ratio must lie in (0, 1)");
    for (double t : c.output_times)
        if (t < 0) throw ValidationError("output.times must be nonnegative");
    return c;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string serialize(const RunConfig& c) {
    std::ostringstream out;
    auto num = [](double v) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    out << "seed = " << c.seed << "\n";
    out << "[geometry]\n";
    out << "center_x = " << num(c.center_x) << "\ncenter_y = " << num(c.center_y) << "\n";
    out << "radius = " << num(c.radius) << "\nclearance = " << num(c.clearance) << "\n";
    out << "cell_h = " << num(c.cell_h) << "\n";
    if (!c.mesh_file.empty()) out << "mesh_file = " << c.mesh_file << "\n";
    out << "[macro]\n";
    out << "h = " << num(c.macro_h) << "\ndt = " << num(c.macro_dt) << "\nT = " << num(c.macro_T)
        << "\n";
    out << "[micro]\n";
    out << "epsilon = 1/" << c.micro_inv_epsilon << "\n";
    out << "dt = " << num(c.micro_dt) << "\nT = " << num(c.micro_T) << "\n";
    out << "[sweep]\n";
    out << "epsilons = ";
    for (std::size_t i = 0; i < c.sweep_inv_epsilons.size(); ++i)
        out << (i ? "," : "") << "1/" << c.sweep_inv_epsilons[i];
    out << "\n";
    out << "T = " << num(c.sweep_T) << "\ndt = " << num(c.sweep_dt) << "\n";
    out << "macro_h = " << num(c.sweep_macro_h) << "\nsnapshots = " << c.sweep_snapshots << "\n";
    out << "ratio = " << num(c.sweep_ratio) << "\n";
    out << "[model]\n";
    out << "d1 = " << c.d1 << "\nd2 = " << c.d2 << "\n";
    out << "dg1 = " << c.dg1 << "\ndg2 = " << c.dg2 << "\n";
    out << "f1 = " << c.f1 << "\nf2 = " << c.f2 << "\nh = " << c.h << "\n";
    if (c.lipschitz_override >= 0) out << "lipschitz = " << num(c.lipschitz_override) << "\n";
    out << "[initial]\n";
    out << "u1 = " << c.u1 << "\nu2 = " << c.u2 << "\n";
    out << "u1_gamma = " << c.u1_gamma << "\nu2_gamma = " << c.u2_gamma << "\n";
    out << "[output]\n";
    out << "dir = " << c.output_dir << "\n";
    if (!c.output_times.empty()) {
        out << "times = ";
        for (std::size_t i = 0; i < c.output_times.size(); ++i)
            out << (i ? "," : "") << num(c.output_times[i]);
        out << "\n";
    }
    return out.str();
}

namespace {

std::vector<std::string> tokens(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> t;
    std::string w;
    while (in >> w) t.push_back(w);
    return t;
}

double tok_num(const std::vector<std::string>& t, std::size_t i, const std::string& what) {
    if (i >= t.size()) throw ValidationError(what + ": missing parameter");
    try {
        return std::stod(t[i]);
    } catch (...) {
        throw ValidationError(what + ": bad parameter '" + t[i] + "'");
    }
}

struct TensorFamily {
    TensorField field;
    double coercivity = 0;
};

TensorFamily make_tensor(const std::string& spec, const std::string& key) {
    const auto t = tokens(spec);
    if (t.empty()) throw ValidationError(key + ": empty diffusion family");
    if (t[0] == "constant") {
        const double d = tok_num(t, 1, key);
        if (!(d > 0)) throw ValidationError(key + ": constant diffusivity must be positive");
        return {[d](const Vec2&) { return Mat2(d * Mat2::Identity()); }, d};
    }
    if (t[0] == "matrix") {
        const double a11 = tok_num(t, 1, key), a12 = tok_num(t, 2, key), a22 = tok_num(t, 3, key);
        Mat2 M;
        M << a11, a12, a12, a22;
        const double tr = M.trace(), det = M(0, 0) * M(1, 1) - M(0, 1) * M(1, 0);
        const double eig_min = 0.5 * (tr - std::sqrt(std::max(0.0, tr * tr - 4 * det)));
        if (!(eig_min > 0)) throw ValidationError(key + ": matrix family is not positive definite");
        return {[M](const Vec2&) { return M; }, eig_min};
    }
    if (t[0] == "periodic") {
        // (a + b cos(2 pi y1) cos(2 pi y2)) I, coercive when a > |b|
        const double a = tok_num(t, 1, key), b = tok_num(t, 2, key);
        if (!(a - std::abs(b) > 0))
            throw ValidationError(key + ": periodic family needs a > |b| for coercivity");
        return {[a, b](const Vec2& y) {
                    const double v =
                        a + b * std::cos(2 * M_PI * y.x()) * std::cos(2 * M_PI * y.y());
                    return Mat2(v * Mat2::Identity());
                },
                a - std::abs(b)};
    }
    throw ValidationError(key + ": unknown diffusion family '" + t[0] + "'");
}

struct ScalarFamily {
    ScalarField field;
    double coercivity = 0;
};

ScalarFamily make_scalar(const std::string& spec, const std::string& key) {
    const auto t = tokens(spec);
    if (t.empty()) throw ValidationError(key + ": empty diffusivity family");
    if (t[0] == "constant") {
        const double d = tok_num(t, 1, key);
        if (!(d > 0)) throw ValidationError(key + ": constant diffusivity must be positive");
        return {[d](const Vec2&) { return d; }, d};
    }
    if (t[0] == "periodic") {
        const double a = tok_num(t, 1, key), b = tok_num(t, 2, key);
        if (!(a - std::abs(b) > 0))
            throw ValidationError(key + ": periodic family needs a > |b| for coercivity");
        return {[a, b](const Vec2& y) { return a + b * std::cos(2 * M_PI * y.x()); },
                a - std::abs(b)};
    }
    throw ValidationError(key + ": unknown diffusivity family '" + t[0] + "'");
}

// Optional y-modulation suffix "mod m" shared by the reaction families:
// multiplies the kinetics by 1 + m cos(2 pi y1).
struct Modulation {
    double m = 0;
    bool active() const { return m != 0; }
    double operator()(const Vec2& y) const { return 1.0 + m * std::cos(2 * M_PI * y.x()); }
    double bound() const { return 1.0 + std::abs(m); }
};

Modulation parse_mod(const std::vector<std::string>& t, std::size_t at, const std::string& key) {
    Modulation mod;
    if (at < t.size()) {
        if (t[at] != "mod" || at + 1 >= t.size())
            throw ValidationError(key + ": trailing tokens, expected 'mod <m>'");
        mod.m = tok_num(t, at + 1, key);
        if (std::abs(mod.m) >= 1)
            throw ValidationError(key + ": modulation must satisfy |m| < 1");
    }
    return mod;
}

struct BulkReaction {
    std::function<double(double, const Vec2&, double)> f;
    std::function<double(double, double)> base; // kinetics with the modulation stripped
    double lipschitz = 0;
    double sup = 0;
    Modulation mod;
};

BulkReaction make_bulk_reaction(const std::string& spec, const std::string& key) {
    const auto t = tokens(spec);
    if (t.empty()) throw ValidationError(key + ": empty reaction family");
    BulkReaction r;
    if (t[0] == "none") {
        if (t.size() > 1) throw ValidationError(key + ": 'none' takes no parameters");
        r.f = [](double, const Vec2&, double) { return 0.0; };
        r.base = [](double, double) { return 0.0; };
        return r;
    }
    if (t[0] == "linear") {
        // f(z) = b - a z
        const double a = tok_num(t, 1, key), b = tok_num(t, 2, key);
        const Modulation mod = parse_mod(t, 3, key);
        r.mod = mod;
        r.base = [a, b](double, double z) { return b - a * z; };
        r.f = [base = r.base, mod](double t, const Vec2& y, double z) {
            return mod(y) * base(t, z);
        };
        r.lipschitz = std::abs(a) * mod.bound();
        r.sup = std::abs(b) * mod.bound();
        return r;
    }
    if (t[0] == "logistic") {
        // rho zbar (1 - zbar / kappa), zbar clamped to [-zmax, zmax]
        const double rho = tok_num(t, 1, key), kappa = tok_num(t, 2, key),
                     zmax = tok_num(t, 3, key);
        if (!(kappa > 0) || !(zmax > 0))
            throw ValidationError(key + ": logistic needs kappa > 0 and zmax > 0");
        const Modulation mod = parse_mod(t, 4, key);
        r.mod = mod;
        r.base = [rho, kappa, zmax](double, double z) {
            const double zb = std::clamp(z, -zmax, zmax);
            return rho * zb * (1.0 - zb / kappa);
        };
        r.f = [base = r.base, mod](double t, const Vec2& y, double z) {
            return mod(y) * base(t, z);
        };
        r.lipschitz = std::abs(rho) * (1.0 + 2.0 * zmax / kappa) * mod.bound();
        r.sup = std::abs(rho) * zmax * (1.0 + zmax / kappa) * mod.bound();
        return r;
    }
    throw ValidationError(key + ": unknown reaction family '" + t[0] + "'");
}

struct SurfaceReaction {
    std::function<double(double, const Vec2&, double, double)> h1, h2;
    std::function<double(double, double, double)> base1, base2;
    double lipschitz = 0;
    Modulation mod;
};

SurfaceReaction make_surface_reaction(const std::string& spec, const std::string& key) {
    const auto t = tokens(spec);
    if (t.empty()) throw ValidationError(key + ": empty interface family");
    SurfaceReaction r;
    if (t[0] == "none") {
        r.h1 = r.h2 = [](double, const Vec2&, double, double) { return 0.0; };
        r.base1 = r.base2 = [](double, double, double) { return 0.0; };
        return r;
    }
    if (t[0] == "exchange") {
        // h1 = -h2 = g (z2 - z1): conservative transfer across Gamma
        const double g = tok_num(t, 1, key);
        const Modulation mod = parse_mod(t, 2, key);
        r.mod = mod;
        r.base1 = [g](double, double z1, double z2) { return g * (z2 - z1); };
        r.base2 = [g](double, double z1, double z2) { return g * (z1 - z2); };
        r.h1 = [base = r.base1, mod](double t, const Vec2& y, double z1, double z2) {
            return mod(y) * base(t, z1, z2);
        };
        r.h2 = [base = r.base2, mod](double t, const Vec2& y, double z1, double z2) {
            return mod(y) * base(t, z1, z2);
        };
        r.lipschitz = std::abs(g) * mod.bound();
        return r;
    }
    throw ValidationError(key + ": unknown interface family '" + t[0] + "'");
}

// integral of the modulation over a meshed region
double mod_integral(const Modulation& mod, const TriangleMesh& m) {
    if (!mod.active()) return m.total_area();
    double v = 0;
    for (int t = 0; t < m.num_triangles(); ++t) v += m.triangle_area(t) * mod(m.centroid(t));
    return v;
}

double mod_integral(const Modulation& mod, const SurfaceMesh& s) {
    if (!mod.active()) return s.total_length();
    double v = 0;
    for (int e = 0; e < s.num_edges(); ++e)
        v += s.edge_length[e] * mod(s.edge_coefficient_point(e));
    return v;
}

struct InitialFamily {
    std::function<double(const Vec2&, const Vec2&)> U; // (x, y)
    ScalarField bulk_limit_y1, bulk_limit_y2, surface_limit;
};

InitialFamily make_initial(const std::string& spec, const std::string& key, const UnitCell& cell) {
    const auto t = tokens(spec);
    if (t.empty()) throw ValidationError(key + ": empty initial family");
    if (t[0] == "constant") {
        const double c = tok_num(t, 1, key);
        InitialFamily f;
        f.U = [c](const Vec2&, const Vec2&) { return c; };
        f.bulk_limit_y1 = f.bulk_limit_y2 = f.surface_limit = [c](const Vec2&) { return c; };
        return f;
    }
    auto cosine = [](double a, double b) {
        return [a, b](const Vec2& x) {
            return a + b * std::cos(M_PI * x.x()) * std::cos(M_PI * x.y());
        };
    };
    if (t[0] == "cosine") {
        const double a = tok_num(t, 1, key), b = tok_num(t, 2, key);
        InitialFamily f;
        auto slow = cosine(a, b);
        f.U = [slow](const Vec2& x, const Vec2&) { return slow(x); };
        f.bulk_limit_y1 = f.bulk_limit_y2 = f.surface_limit = slow;
        return f;
    }
    if (t[0] == "separable") {
        // slow(x) (1 + m cos(2 pi y1)); the limit data are the y-averages
        // over Y_j and Gamma respectively
        const double a = tok_num(t, 1, key), b = tok_num(t, 2, key), m = tok_num(t, 3, key);
        Modulation mod;
        mod.m = m;
        InitialFamily f;
        auto slow = cosine(a, b);
        f.U = [slow, mod](const Vec2& x, const Vec2& y) { return slow(x) * mod(y); };
        const double avg1 = mod_integral(mod, cell.y1.mesh) / cell.area_y1;
        const double avg2 = mod_integral(mod, cell.y2.mesh) / cell.area_y2;
        const double avgs = mod_integral(mod, cell.surface) / cell.gamma_length;
        f.bulk_limit_y1 = [slow, avg1](const Vec2& x) { return slow(x) * avg1; };
        f.bulk_limit_y2 = [slow, avg2](const Vec2& x) { return slow(x) * avg2; };
        f.surface_limit = [slow, avgs](const Vec2& x) { return slow(x) * avgs; };
        return f;
    }
    throw ValidationError(key + ": unknown initial family '" + t[0] + "'");
}

} // namespace

ModelBundle build_model(const RunConfig& cfg, const UnitCell& cell) {
    ModelBundle m;

    const auto d1 = make_tensor(cfg.d1, "model.d1");
    const auto d2 = make_tensor(cfg.d2, "model.d2");
    const auto g1 = make_scalar(cfg.dg1, "model.dg1");
    const auto g2 = make_scalar(cfg.dg2, "model.dg2");
    m.D.D1 = d1.field;
    m.D.D2 = d2.field;
    m.D.DG1 = g1.field;
    m.D.DG2 = g2.field;
    m.D.c0 = std::min({d1.coercivity, d2.coercivity, g1.coercivity, g2.coercivity});

    const auto f1 = make_bulk_reaction(cfg.f1, "model.f1");
    const auto f2 = make_bulk_reaction(cfg.f2, "model.f2");
    const auto hh = make_surface_reaction(cfg.h, "model.h");
    m.R.f1 = f1.f;
    m.R.f2 = f2.f;
    m.R.h1 = hh.h1;
    m.R.h2 = hh.h2;
    m.R.lipschitz = std::max({f1.lipschitz, f2.lipschitz, hh.lipschitz});
    if (cfg.lipschitz_override >= 0) m.R.lipschitz = cfg.lipschitz_override;
    m.R.sup_bound = std::max(f1.sup, f2.sup);
    m.R.f_depends_on_y = f1.mod.active() || f2.mod.active();
    m.R.h_depends_on_y = hh.mod.active();

    // closed-form averaged reactions: the catalog kinetics are separable, so
    // F_j = (int mod over Y_j) * base and likewise on Gamma
    const double i1 = mod_integral(f1.mod, cell.y1.mesh);
    const double i2 = mod_integral(f2.mod, cell.y2.mesh);
    const double ig = mod_integral(hh.mod, cell.surface);
    m.averaged.F1 = [base = f1.base, i1](double t, double z) { return i1 * base(t, z); };
    m.averaged.F2 = [base = f2.base, i2](double t, double z) { return i2 * base(t, z); };
    m.averaged.H1 = [base = hh.base1, ig](double t, double z1, double z2) {
        return ig * base(t, z1, z2);
    };
    m.averaged.H2 = [base = hh.base2, ig](double t, double z1, double z2) {
        return ig * base(t, z1, z2);
    };
    m.averaged.lipschitz =
        m.R.lipschitz * std::max({cell.area_y1, cell.area_y2, cell.gamma_length});

    const auto init1 = make_initial(cfg.u1, "initial.u1", cell);
    const auto init2 = make_initial(cfg.u2, "initial.u2", cell);
    m.U1 = init1.U;
    m.U2 = init2.U;
    m.u0i_1 = init1.bulk_limit_y1;
    m.u0i_2 = init2.bulk_limit_y2;
    m.u0iG_1 = cfg.u1_gamma == "same"
                   ? init1.surface_limit
                   : make_initial(cfg.u1_gamma, "initial.u1_gamma", cell).surface_limit;
    m.u0iG_2 = cfg.u2_gamma == "same"
                   ? init2.surface_limit
                   : make_initial(cfg.u2_gamma, "initial.u2_gamma", cell).surface_limit;
    return m;
}

SweepModel build_sweep_model(const RunConfig& cfg, const UnitCell& cell) {
    SweepModel s;
    s.geom = cell.geom;
    s.cell_h = cfg.cell_h;
    ModelBundle m = build_model(cfg, cell);
    s.D = std::move(m.D);
    s.R = std::move(m.R);
    s.U1 = std::move(m.U1);
    s.U2 = std::move(m.U2);
    s.u0i_1 = std::move(m.u0i_1);
    s.u0iG_1 = std::move(m.u0iG_1);
    s.u0i_2 = std::move(m.u0i_2);
    s.u0iG_2 = std::move(m.u0iG_2);
    return s;
}

SweepParams build_sweep_params(const RunConfig& cfg, int threads) {
    SweepParams p;
    p.inv_epsilons = cfg.sweep_inv_epsilons;
    p.T = cfg.sweep_T;
    p.dt = cfg.sweep_dt;
    p.macro_n = std::max(1, static_cast<int>(std::lround(1.0 / cfg.sweep_macro_h)));
    p.snapshots = cfg.sweep_snapshots;
    p.monotonicity_ratio = cfg.sweep_ratio;
    p.threads = threads;
    return p;
}

int worker_count(int jobs) {
    int cap = static_cast<int>(std::thread::hardware_concurrency());
    if (cap < 1) cap = 1;
    if (const char* env = std::getenv("WHOMOG_THREADS")) {
        try {
            const int v = std::stoi(env);
            if (v >= 1) cap = std::min(cap, v);
        } catch (...) {
            throw ValidationError("WHOMOG_THREADS is not a positive integer");
        }
    }
    return std::max(1, std::min(cap, jobs));
}

} // namespace whomog
