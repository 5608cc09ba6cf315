#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "wavekahler/runner.hpp"

using wk::RunConfig;

TEST_CASE("kahler-flat identities: every residual at machine scale") {
    RunConfig cfg;
    cfg.command = "check-identities";
    cfg.structure = "kahler-flat";
    cfg.points = 10;
    cfg.seed = 7;
    auto res = wk::run(cfg);
    CHECK(res.exit_code == 0);
    for (const auto& c : res.report.checks) {
        INFO(c.check);
        CHECK(c.pass);
        CHECK(c.max_residual < 1e-12);
    }
}

TEST_CASE("identity suites pass on the wave structures") {
    for (const char* s : {"torus2", "torus4", "sphere", "hirzebruch"}) {
        RunConfig cfg;
        cfg.command = "check-identities";
        cfg.structure = s;
        cfg.points = 6;
        cfg.seed = 11;
        auto res = wk::run(cfg);
        INFO(s);
        CHECK(res.exit_code == 0);
        CHECK(res.report.pass());
    }
}

TEST_CASE("wave and extremal suites through the runner") {
    RunConfig cfg;
    cfg.command = "check-wave";
    cfg.structure = "torus4";
    cfg.h_expr = "sin(theta)*cos(z1)";
    cfg.points = 20;
    cfg.seed = 7;
    auto res = wk::run(cfg);
    CHECK(res.exit_code == 0);

    RunConfig ext;
    ext.command = "check-extremal";
    ext.structure = "sphere";
    ext.points = 6;
    ext.seed = 3;
    auto res2 = wk::run(ext);
    CHECK(res2.exit_code == 0);
}

TEST_CASE("same seed and config give byte-identical reports") {
    RunConfig cfg;
    cfg.command = "check-identities";
    cfg.structure = "sphere";
    cfg.points = 8;
    cfg.seed = 424242;
    auto a = wk::run(cfg);
    auto b = wk::run(cfg);
    CHECK(a.payload == b.payload);
    CHECK(a.payload.size() > 100);

    cfg.seed = 424243;  // different seed, different sampled points
    auto c = wk::run(cfg);
    CHECK(a.payload != c.payload);
}

TEST_CASE("solver commands emit tables and reports") {
    RunConfig cfg;
    cfg.command = "solve-hirzebruch";
    cfg.h0 = 1.0;
    cfg.grid = 200;
    cfg.format = "csv";
    auto res = wk::run(cfg);
    CHECK(res.exit_code == 0);
    // CSV header and a lambda(0) = 2 first data row
    CHECK(res.payload.rfind("t,h,h_prime,H_prime,H,lambda,ode_residual_t,ode_residual_y\r\n", 0) ==
          0);
    const auto line2 = res.payload.substr(res.payload.find("\r\n") + 2);
    const auto first_row = line2.substr(0, line2.find("\r\n"));
    // lambda(0) = 2 at h0 = 1 (sixth field of the t = 0 row)
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : first_row) {
        if (ch == ',') { fields.push_back(cur); cur.clear(); }
        else cur += ch;
    }
    fields.push_back(cur);
    REQUIRE(fields.size() == 8);
    CHECK(fields[0] == "0");
    CHECK_THAT(std::stod(fields[5]), Catch::Matchers::WithinAbs(2.0, 1e-12));
    CHECK(fields[6].empty());  // endpoint ODE residuals are excluded

    RunConfig sph;
    sph.command = "solve-sphere";
    sph.h_expr = "zeta";
    sph.grid = 200;
    auto res2 = wk::run(sph);
    CHECK(res2.exit_code == 0);
    CHECK_THAT(res2.payload, Catch::Matchers::ContainsSubstring("constraint_residual"));
}

TEST_CASE("report json validates against the shipped schema") {
    RunConfig cfg;
    cfg.command = "check-wave";
    cfg.structure = "torus2";
    cfg.points = 5;
    auto res = wk::run(cfg);
    auto j = wk::json::parse(res.payload);
    CHECK_NOTHROW(wk::validate_report_json(j));
    // a mutilated report fails
    j.erase("seed");
    CHECK_THROWS_AS(wk::validate_report_json(j), wk::numeric_error);
    // schema text itself parses as json
    CHECK_NOTHROW(wk::json::parse(wk::report_schema_text()));
}

TEST_CASE("exit status is the conjunction of pass flags") {
    RunConfig cfg;
    cfg.command = "check-identities";
    cfg.structure = "torus4";
    cfg.points = 3;
    cfg.atol = 1e-30;  // impossible tolerance forces failures
    auto res = wk::run(cfg);
    CHECK(res.exit_code == 1);
    CHECK_FALSE(res.report.pass());
}

TEST_CASE("config file precedence: flags beat file, file beats defaults") {
    const char* path = "test_runner_config.tmp";
    {
        std::ofstream out(path);
        out << "# comment line\n";
        out << "points = 4\n";
        out << "seed = 99\n";
        out << "structure = torus2\n";
    }
    RunConfig cfg;
    cfg.apply(wk::load_config_file(path));
    CHECK(cfg.points == 4);
    CHECK(cfg.seed == 99);
    CHECK(cfg.structure == "torus2");
    cfg.apply({{"points", "7"}});  // flag wins
    CHECK(cfg.points == 7);
    CHECK(cfg.seed == 99);
    std::remove(path);

    CHECK_THROWS_AS(wk::load_config_file("definitely_missing.cfg"), wk::construction_error);
    RunConfig bad;
    CHECK_THROWS_AS(bad.apply({{"nonsense", "1"}}), wk::construction_error);
    CHECK_THROWS_AS(bad.apply({{"points", "0"}}), wk::construction_error);
}

TEST_CASE("csv quoting follows rfc 4180") {
    CHECK(wk::csv_field("plain") == "plain");
    CHECK(wk::csv_field("with,comma") == "\"with,comma\"");
    CHECK(wk::csv_field("with\"quote") == "\"with\"\"quote\"");
    CHECK(wk::csv_field("line\nbreak") == "\"line\nbreak\"");
}

TEST_CASE("tabulated sphere profile via csv file") {
    const char* path = "test_runner_profile.tmp";
    {
        std::ofstream out(path);
        out << "zeta,H\n";
        for (int i = 0; i <= 60; ++i) {
            const double z = -1.0 + 2.0 * i / 60.0;
            out << z << "," << z << "\n";
        }
    }
    RunConfig cfg;
    cfg.command = "solve-sphere";
    cfg.h_csv = path;
    cfg.grid = 128;
    auto res = wk::run(cfg);
    CHECK(res.exit_code == 0);
    std::remove(path);
}

TEST_CASE("WAVEKAHLER_THREADS caps the worker count") {
    setenv("WAVEKAHLER_THREADS", "1", 1);
    CHECK(wk::thread_cap() == 1u);
    setenv("WAVEKAHLER_THREADS", "0", 1);  // 0 = auto
    CHECK(wk::thread_cap() >= 1u);
    unsetenv("WAVEKAHLER_THREADS");
    // parallel map writes results by index regardless of the cap
    std::vector<int> out(64, 0);
    wk::parallel_for(64, [&](std::size_t i) { out[i] = int(i) * 3; });
    for (int i = 0; i < 64; ++i) CHECK(out[std::size_t(i)] == i * 3);
}

TEST_CASE("shipped schema file matches the embedded schema") {
    std::ifstream in(std::string(WK_SOURCE_DIR) + "/schemas/report.schema.json",
                     std::ios::binary);
    REQUIRE(in.good());
    std::string shipped((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(shipped == wk::report_schema_text());
}
