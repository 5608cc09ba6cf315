// Command-line front end: identity suites, wave/extremal checks, the two
// solvers, and the report schema. See README.md for usage examples.

#include <cstdio>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "wavekahler/runner.hpp"

namespace {

// Collect only flags the user actually set, so the precedence
// flags > config file > defaults stays intact.
struct FlagSet {
    std::map<std::string, std::string> kv;
    void set(const std::string& k, const std::string& v) { kv[k] = v; }
};

void add_common(CLI::App* cmd, FlagSet& flags, std::string& config_path) {
    auto grab = [&flags](const std::string& key) {
        return [&flags, key](const std::string& v) { flags.set(key, v); };
    };
    cmd->add_option_function<std::string>("--points", grab("points"), "sample points per check");
    cmd->add_option_function<std::string>("--seed", grab("seed"), "64-bit RNG seed");
    cmd->add_option_function<std::string>("--tol", grab("tol"),
                                          "override every default tolerance");
    cmd->add_option_function<std::string>("--rtol", grab("rtol"), "relative tolerance");
    cmd->add_option_function<std::string>("--grid", grab("grid"), "solver grid size");
    cmd->add_option_function<std::string>("--h0", grab("h0"), "profile parameter h(0)");
    cmd->add_option_function<std::string>("--out", grab("out"), "write the payload here");
    cmd->add_option_function<std::string>("--format", grab("format"), "json|csv payload");
    cmd->add_option("--config", config_path, "key=value config file");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"verification engine for plane-fronted wave almost-Kähler structures"};
    app.require_subcommand(1);

    FlagSet flags;
    std::string config_path;
    std::string check_kind, solve_kind;

    auto* check = app.add_subcommand("check", "run a verification suite");
    check->add_option("kind", check_kind, "identities | wave | extremal")->required();
    check->add_option_function<std::string>(
        "--structure", [&flags](const std::string& v) { flags.set("structure", v); },
        "kahler-flat | torus2 | torus4 | sphere | hirzebruch");
    check->add_option_function<std::string>(
        "--base", [&flags](const std::string& v) { flags.set("base", v); },
        "alias of --structure for wave/extremal checks");
    check->add_option_function<std::string>(
        "--H", [&flags](const std::string& v) { flags.set("H", v); }, "profile expression");
    check->add_option_function<std::string>(
        "--u", [&flags](const std::string& v) { flags.set("u", v); },
        "conformal factor for a custom isothermal base");
    add_common(check, flags, config_path);

    auto* solve = app.add_subcommand("solve", "run a solver pipeline");
    solve->add_option("kind", solve_kind, "sphere | hirzebruch")->required();
    solve->add_option_function<std::string>(
        "--H", [&flags](const std::string& v) { flags.set("H", v); },
        "axisymmetric profile H(zeta)");
    solve->add_option_function<std::string>(
        "--H-csv", [&flags](const std::string& v) { flags.set("H-csv", v); },
        "tabulated (zeta, H) pairs");
    add_common(solve, flags, config_path);

    auto* schema = app.add_subcommand("report", "print the JSON report schema");
    schema->add_option_function<std::string>(
        "--out", [&flags](const std::string& v) { flags.set("out", v); }, "write schema here");

    CLI11_PARSE(app, argc, argv);

    try {
        wk::RunConfig cfg;
        if (!config_path.empty()) cfg.apply(wk::load_config_file(config_path));
        cfg.apply(flags.kv);  // flags win over the file
        if (check->parsed()) {
            if (check_kind == "identities") cfg.command = "check-identities";
            else if (check_kind == "wave") cfg.command = "check-wave";
            else if (check_kind == "extremal") cfg.command = "check-extremal";
            else throw wk::construction_error("unknown check kind '" + check_kind + "'");
        } else if (solve->parsed()) {
            if (solve_kind == "sphere") cfg.command = "solve-sphere";
            else if (solve_kind == "hirzebruch") cfg.command = "solve-hirzebruch";
            else throw wk::construction_error("unknown solve kind '" + solve_kind + "'");
        } else if (schema->parsed()) {
            cfg.command = "report-schema";
        }
        wk::RunResult result = wk::run(cfg);
        std::fputs(result.payload.c_str(), stdout);
        return result.exit_code;
    } catch (const wk::parse_error& e) {
        std::fprintf(stderr, "error: %s (position %d)\n", e.what(), e.position);
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
