#pragma once

/// Command orchestration shared by the CLI binary and the tests: config
/// handling with flags > config file > defaults, seeded structure sampling,
/// the identity suites, the two solvers, and deterministic report assembly.

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "wavekahler/dim4.hpp"
#include "wavekahler/hirzebruch.hpp"
#include "wavekahler/report.hpp"
#include "wavekahler/util.hpp"
#include "wavekahler/wavebuild.hpp"

namespace wk {

struct RunConfig {
    std::string command = "check-identities";
    std::string structure = "kahler-flat";  // kahler-flat | torus2 | torus4 | sphere | hirzebruch
    std::string h_expr;                     // profile expression (preset default when empty)
    std::string u_expr;                     // custom isothermal conformal factor
    std::string h_csv;                      // tabulated (zeta, H) pairs for solve-sphere
    int points = 50;
    std::uint64_t seed = 1;
    double atol = 0.0;  // 0 = per-check defaults; >0 overrides every tolerance
    double rtol = 1e-9;
    int grid = 400;
    double h0 = 1.0;
    std::string out;
    std::string format = "json";

    void apply(const std::map<std::string, std::string>& kv) {
        for (const auto& [k, v] : kv) {
            if (k == "command") command = v;
            else if (k == "structure" || k == "base") structure = v;
            else if (k == "H") h_expr = v;
            else if (k == "u") u_expr = v;
            else if (k == "H-csv") h_csv = v;
            else if (k == "points") points = std::stoi(v);
            else if (k == "seed") seed = std::stoull(v);
            else if (k == "tol") atol = std::stod(v);
            else if (k == "rtol") rtol = std::stod(v);
            else if (k == "grid") grid = std::stoi(v);
            else if (k == "h0") h0 = std::stod(v);
            else if (k == "out") out = v;
            else if (k == "format") format = v;
            else throw construction_error("unknown config key '" + k + "'");
        }
        if (points < 1) throw construction_error("points must be >= 1");
        if (atol < 0 || rtol <= 0) throw construction_error("tolerances must be positive");
    }
};

/// Flat key=value file; '#' starts a comment.
inline std::map<std::string, std::string> load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw construction_error("cannot read config file '" + path + "'");
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto strip = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        line = strip(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw parse_error("config line " + std::to_string(lineno) + " is not key=value",
                              lineno);
        kv[strip(line.substr(0, eq))] = strip(line.substr(eq + 1));
    }
    return kv;
}

struct RunResult {
    Report report;
    std::string payload;  // what the CLI prints / writes: report JSON or table CSV
    int exit_code = 0;
};

namespace detail_run {

struct BuiltStructure {
    WaveStructure wave;
    double sample_margin = 0.01;
    bool kahler = false;
};

inline BuiltStructure build_structure(const RunConfig& cfg) {
    BuiltStructure out;
    const std::string& s = cfg.structure;
    auto h_or = [&](const char* dflt) { return cfg.h_expr.empty() ? dflt : cfg.h_expr.c_str(); };
    if (s == "kahler-flat") {
        out.wave = build_wave(make_torus2(), h_or("1"));
        out.kahler = true;
    } else if (s == "torus2") {
        out.wave = build_wave(make_torus2(), h_or("sin(theta)*cos(z)"));
    } else if (s == "torus4") {
        out.wave = build_wave(make_torus4(), h_or("sin(theta)*cos(z1)"));
    } else if (s == "sphere") {
        BaseAK base = cfg.u_expr.empty()
                          ? make_sphere()
                          : make_isothermal(parse_field(cfg.u_expr).folded().bind({"x", "y"}),
                                            Box{{{-1.0, 1.0}, {-1.0, 1.0}}}, "isothermal");
        out.wave = build_wave(base, h_or("x*y+sin(theta)"));
    } else if (s == "hirzebruch") {
        auto prof = HirzebruchProfile::solve(cfg.h0);
        out.wave = make_hirzebruch_wave(prof);
        out.sample_margin = 0.04;  // keep clear of the h' = 0 collar
    } else {
        throw construction_error("unknown structure '" + s + "'");
    }
    return out;
}

inline double tol_for(const RunConfig& cfg, double dflt) {
    return cfg.atol > 0 ? cfg.atol : dflt;
}

inline json point_to_json(const std::vector<double>& x) {
    json a = json::array();
    for (double v : x) a.push_back(format_double(v));
    return a;
}

}  // namespace detail_run

/// The akcore invariant battery over seeded sample points.
inline Report run_check_identities(const RunConfig& cfg) {
    using namespace detail_run;
    BuiltStructure bs = build_structure(cfg);
    Report rep;
    rep.seed = cfg.seed;

    Rng rng(Rng::substream(cfg.seed, "identities:" + cfg.structure));
    std::vector<std::vector<double>> pts(std::size_t(cfg.points));
    for (auto& p : pts) p = bs.wave.total.patch.domain.sample(rng, bs.sample_margin);

    std::vector<CurvatureReport> results(pts.size());
    parallel_for(pts.size(), [&](std::size_t i) {
        results[i] = curvature_report(bs.wave.total, pts[i], 4);
    });

    std::map<std::string, double> defaults = {
        {"d_omega", 1e-9},         {"d_rho", 1e-8},
        {"trace_equality", 1e-9},  {"r_j_invariance", 1e-10},
        {"ak_relation", 1e-9},     {"chern_metricity", 1e-10},
        {"chern_preserves_j", 1e-10}, {"chern_torsion_vs_n", 1e-9},
        {"second_chern_formula", 1e-9}};
    std::map<std::string, double> maxima;
    for (const auto& r : results)
        for (const auto& [k, v] : r.residuals)
            if (defaults.count(k)) maxima[k] = std::max(maxima[k], std::abs(v));

    json per_point = json::array();
    if (cfg.points <= 20) {
        for (const auto& r : results) {
            json e;
            e["point"] = point_to_json(r.point);
            json res;
            for (const auto& [k, v] : r.residuals) res[k] = format_double(v);
            e["residuals"] = res;
            per_point.push_back(e);
        }
    }

    for (const auto& [name, dflt] : defaults) {
        CheckOutcome c;
        c.check = name;
        c.structure = cfg.structure;
        c.points = cfg.points;
        c.max_residual = maxima[name];
        c.tolerance = tol_for(cfg, dflt);
        c.pass = c.max_residual <= c.tolerance;
        if (!per_point.empty() && name == "second_chern_formula") c.per_point = per_point;
        rep.checks.push_back(c);
    }

    if (bs.kahler) {
        // degeneracy collapse: N = 0 forces rho = r = rho*, s^H = s^g
        double worst = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            AKEval e(bs.wave.total, pts[i], 3);
            worst = std::max({worst, std::sqrt(e.nijenhuis_norm2()),
                              (e.first_chern_ricci() - e.second_chern_ricci()).max_abs(),
                              (e.first_chern_ricci() - e.star_ricci()).max_abs(),
                              std::abs(e.hermitian_scalar().value() - e.riemannian_scalar().value())});
        }
        CheckOutcome c;
        c.check = "kahler_collapse";
        c.structure = cfg.structure;
        c.points = cfg.points;
        c.max_residual = worst;
        c.tolerance = tol_for(cfg, 1e-10);
        c.pass = worst <= c.tolerance;
        rep.checks.push_back(c);
    }

    if (cfg.structure == "hirzebruch") {
        auto prof = HirzebruchProfile::solve(cfg.h0);
        std::vector<double> ts;
        Rng rng2(Rng::substream(cfg.seed, "identities:sce"));
        for (int i = 0; i < std::min(cfg.points, 20); ++i)
            ts.push_back(rng2.uniform(0.05 * prof.l, 0.95 * prof.l));
        auto chk = sce_check_dim6(prof, ts, 4);
        CheckOutcome c;
        c.check = "sce";
        c.structure = cfg.structure;
        c.points = int(ts.size());
        c.max_residual = std::max({chk.coeff_spread, chk.generic_vs_display, chk.generic_vs_prop});
        c.tolerance = tol_for(cfg, 1e-8);
        c.pass = c.max_residual <= c.tolerance;
        rep.checks.push_back(c);
    }
    return rep;
}

/// Structural invariants of the wave build, the Darboux proposition when the
/// base is a flat torus, and the scalar-curvature equality.
inline Report run_check_wave(const RunConfig& cfg) {
    using namespace detail_run;
    BuiltStructure bs = build_structure(cfg);
    Report rep;
    rep.seed = cfg.seed;

    if (bs.wave.coordinate_kind) {
        auto inv = wave_invariant_report(bs.wave, cfg.points, cfg.seed);
        for (const auto& [name, v] : inv) {
            CheckOutcome c;
            c.check = "build:" + name;
            c.structure = cfg.structure;
            c.points = cfg.points;
            c.max_residual = v;
            c.tolerance = tol_for(cfg, name == "d_omega" ? 1e-9 : 1e-12);
            c.pass = v <= c.tolerance;
            rep.checks.push_back(c);
        }
    }
    if (bs.wave.base.darboux) {
        CheckOutcome c;
        c.check = "prop_darboux";
        c.structure = cfg.structure;
        c.points = cfg.points;
        c.max_residual = check_prop_darboux(bs.wave, cfg.points, cfg.seed);
        c.tolerance = tol_for(cfg, 1e-9);
        c.pass = c.max_residual <= c.tolerance;
        rep.checks.push_back(c);
    }
    {
        CheckOutcome c;
        c.check = "scalar_equality";
        c.structure = cfg.structure;
        c.points = cfg.points;
        c.max_residual = check_scalar_equality(bs.wave, cfg.points, cfg.seed);
        c.tolerance = tol_for(cfg, 1e-9);
        c.pass = c.max_residual <= c.tolerance;
        rep.checks.push_back(c);
    }
    return rep;
}

/// The extremality mechanism on a base with a Hamiltonian Killing profile.
inline Report run_check_extremal(const RunConfig& cfg) {
    using namespace detail_run;
    RunConfig local = cfg;
    if (local.structure == "sphere" && local.h_expr.empty())
        local.h_expr = "(x^2+y^2-1)/(x^2+y^2+1)";  // the height moment map
    BuiltStructure bs = build_structure(local);
    Report rep;
    rep.seed = cfg.seed;
    auto mech = extremal_mechanism_check(bs.wave, cfg.points, cfg.seed);
    auto add = [&](const std::string& name, double v, double dflt) {
        CheckOutcome c;
        c.check = name;
        c.structure = local.structure;
        c.points = cfg.points;
        c.max_residual = v;
        c.tolerance = tol_for(cfg, dflt);
        c.pass = v <= c.tolerance;
        rep.checks.push_back(c);
    };
    add("base_killing", mech.base_killing, 1e-10);
    add("total_killing", mech.total_killing, 1e-9);
    add("lie_TT", mech.l_TT, 1e-9);
    add("lie_TJT", mech.l_TJT, 1e-9);
    add("lie_JTJT", mech.l_JTJT, 1e-9);
    add("lie_TX", mech.l_TX, 1e-9);
    add("lie_XX", mech.l_XX, 1e-9);
    add("cartan_step", mech.cartan, 1e-10);
    add("g_K_T_orthogonality", mech.g_K_T, 1e-12);
    return rep;
}

inline Report run_solve_sphere(const RunConfig& cfg, std::string* table_csv) {
    Report rep;
    rep.seed = cfg.seed;
    AxisymmetricField H = [&] {
        if (!cfg.h_csv.empty()) {
            std::ifstream in(cfg.h_csv);
            if (!in) throw construction_error("cannot read profile table '" + cfg.h_csv + "'");
            std::vector<double> zs, hs;
            std::string line;
            while (std::getline(in, line)) {
                if (line.empty() || line[0] == '#' || std::isalpha(static_cast<unsigned char>(line[0])))
                    continue;
                std::istringstream ss(line);
                std::string a, b;
                if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',')) continue;
                zs.push_back(std::stod(a));
                hs.push_back(std::stod(b));
            }
            return AxisymmetricField::from_table(zs, hs);
        }
        return AxisymmetricField::from_expression(cfg.h_expr.empty() ? "zeta" : cfg.h_expr);
    }();
    auto sol = solve_conformal_factor(H, cfg.grid);

    if (table_csv) {
        CsvWriter csv;
        csv.header({"zeta", "f", "residual"});
        for (std::size_t j = 0; j < sol.z.size(); ++j)
            csv.row({sol.z[j], sol.f[j], sol.residual[j]});
        *table_csv = csv.text();
    }

    auto add = [&](const std::string& name, double v, double dflt) {
        CheckOutcome c;
        c.check = name;
        c.structure = "sphere";
        c.points = int(sol.z.size());
        c.max_residual = v;
        c.tolerance = detail_run::tol_for(cfg, dflt);
        c.pass = v <= c.tolerance;
        rep.checks.push_back(c);
    };
    add("solvability_defect", sol.solvability_defect, 1e-7);
    add("constraint_residual", sol.max_residual(), 1e-6);
    {
        CheckOutcome c;
        c.check = "normalization_scale";
        c.structure = "sphere";
        c.points = int(sol.z.size());
        c.max_residual = sol.scale;
        c.tolerance = 0.0;
        c.pass = true;  // informational
        rep.checks.push_back(c);
    }
    return rep;
}

inline Report run_solve_hirzebruch(const RunConfig& cfg, std::string* table_csv) {
    Report rep;
    rep.seed = cfg.seed;
    auto prof = HirzebruchProfile::solve(cfg.h0, std::max(cfg.grid, 64));

    const int rows = std::max(cfg.grid, 16);
    std::vector<double> interior;
    if (table_csv) {
        CsvWriter csv;
        csv.header({"t", "h", "h_prime", "H_prime", "H", "lambda", "ode_residual_t",
                    "ode_residual_y"});
        for (int i = 0; i <= rows; ++i) {
            const double t = prof.l * i / rows;
            const double h = prof.h_of_t(t);
            const bool endpoint = (i == 0 || i == rows);
            const double hp = endpoint ? 0.0 : prof.hp_of_t(t);
            const double A = (4.0 - 4.0 * prof.y(h) - h * prof.yp(h)) / (h * h);
            const double Hp = std::sqrt(8.0 * std::max(A, 0.0));
            const double B = -(5.0 * prof.yp(h) + h * prof.ypp(h)) / (4.0 * h);
            // the three r coefficients over omega are A, 2B - A and A
            const double lambda = (A + 2.0 * B) / 3.0;
            std::vector<std::string> fields = {
                format_double(t),  format_double(h),      format_double(hp),
                format_double(Hp), format_double(prof.H_of_t(t)), format_double(lambda)};
            if (endpoint) {
                // excluded: the t-form divides by h', zero at the ends
                fields.push_back("");
                fields.push_back("");
            } else {
                auto res = ode_residual(prof, {t});
                fields.push_back(format_double(res.t_form));
                fields.push_back(format_double(res.y_form));
            }
            csv.row_strings(fields);
        }
        *table_csv = csv.text();
    }
    for (int i = 1; i < 50; ++i) interior.push_back(prof.l * (0.04 + 0.92 * i / 50.0));

    auto add = [&](const std::string& name, double v, double dflt) {
        CheckOutcome c;
        c.check = name;
        c.structure = "hirzebruch";
        c.points = int(interior.size());
        c.max_residual = v;
        c.tolerance = detail_run::tol_for(cfg, dflt);
        c.pass = v <= c.tolerance;
        rep.checks.push_back(c);
    };
    add("endpoint_ratio", std::abs(prof.hl / prof.h0 - std::pow(3.0, 0.25)), 1e-12);
    auto bnd = boundary_smoothness_check(prof);
    double bworst = 0.0;
    for (auto& [k, v] : bnd.residuals) bworst = std::max(bworst, v);
    add("boundary_conditions", bworst, 1e-8);
    auto ode = ode_residual(prof, interior);
    add("ode_residual", ode.max(), 1e-10);
    auto recon = reconstruct_H(prof, interior);
    add("condition_expressions_agree", recon.expr_agreement, 1e-10);
    auto sce = sce_check_dim6(prof, interior, 5);
    add("sce_coefficient_spread", sce.coeff_spread, 1e-8);
    add("sce_lambda_form", sce.lambda_form, 1e-8);
    add("sce_generic_vs_display", sce.generic_vs_display, 1e-8);
    add("sce_generic_vs_prop", sce.generic_vs_prop, 1e-8);
    add("trace_identity", sce.trace_identity, 1e-8);
    // endpoint quotient: lambda(0) h0^2 = 2 through the boundary conditions
    const double lam0 = (4.0 - 2.0 * prof.h0 * (0.5 * prof.yp(prof.h0))) / (prof.h0 * prof.h0);
    add("lambda0_times_h0sq_minus_2", std::abs(lam0 * prof.h0 * prof.h0 - 2.0), 1e-12);
    return rep;
}

inline RunResult run(const RunConfig& cfg) {
    RunResult out;
    std::string table;
    if (cfg.command == "check-identities") out.report = run_check_identities(cfg);
    else if (cfg.command == "check-wave") out.report = run_check_wave(cfg);
    else if (cfg.command == "check-extremal") out.report = run_check_extremal(cfg);
    else if (cfg.command == "solve-sphere") out.report = run_solve_sphere(cfg, &table);
    else if (cfg.command == "solve-hirzebruch") out.report = run_solve_hirzebruch(cfg, &table);
    else if (cfg.command == "report-schema") {
        out.payload = report_schema_text();
        out.exit_code = 0;
        if (!cfg.out.empty()) write_file(cfg.out, out.payload);
        return out;
    } else {
        throw construction_error("unknown command '" + cfg.command + "'");
    }

    validate_report_json(out.report.to_json());
    out.payload = (cfg.format == "csv" && !table.empty()) ? table : out.report.serialize();
    out.exit_code = out.report.pass() ? 0 : 1;
    if (!cfg.out.empty()) write_file(cfg.out, out.payload);
    return out;
}

}  // namespace wk
