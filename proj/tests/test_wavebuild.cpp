#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "wavekahler/wavebuild.hpp"

using wk::AKEval;
using wk::WaveStructure;

TEST_CASE("build invariants hold componentwise on coordinate bases") {
    for (auto* base : {"torus2", "torus4", "sphere"}) {
        WaveStructure w =
            std::string(base) == "torus2"   ? wk::build_wave(wk::make_torus2(), "sin(theta)+cos(z)")
            : std::string(base) == "torus4" ? wk::build_wave(wk::make_torus4(), "sin(theta)*cos(z1)")
                                            : wk::build_wave(wk::make_sphere(), "x*y+sin(theta)");
        auto rep = wk::wave_invariant_report(w, 30, 99);
        for (auto& [k, v] : rep) {
            INFO(base << " invariant " << k);
            const double tol = (k == "d_omega") ? 1e-9 : 1e-12;
            CHECK(v < tol);
        }
    }
}

TEST_CASE("H = 0 gives the product block structure") {
    auto w = wk::build_wave(wk::make_torus2(), "0");
    wk::PatchEval pe(w.total.patch, {0.3, 0.7, 1.0, 2.0}, 1);
    auto g = wk::metric_components(pe);
    const int m = 4;
    CHECK_THAT(g[0 * m + 0].value(), Catch::Matchers::WithinAbs(0.5, 1e-14));  // dtheta^2
    CHECK_THAT(g[1 * m + 1].value(), Catch::Matchers::WithinAbs(2.0, 1e-14));  // dphi^2
    CHECK_THAT(g[0 * m + 1].value(), Catch::Matchers::WithinAbs(0.0, 1e-14));
    CHECK_THAT(g[2 * m + 2].value(), Catch::Matchers::WithinAbs(1.0, 1e-14));
}

TEST_CASE("constant H over a kahler base gives a kahler total space") {
    auto w = wk::build_wave(wk::make_sphere(), "3");
    wk::Rng rng(41);
    for (int s = 0; s < 5; ++s) {
        auto x = w.total.patch.domain.sample(rng);
        AKEval e(w.total, x, 3);
        CHECK(e.nijenhuis_norm2() < 1e-24);
    }
}

TEST_CASE("phi dependence and aperiodic theta are rejected") {
    CHECK_THROWS_AS(wk::build_wave(wk::make_torus2(), "sin(phi)"), wk::construction_error);
    CHECK_THROWS_AS(wk::build_wave(wk::make_torus2(), "theta*z"), wk::construction_error);
    CHECK_NOTHROW(wk::build_wave(wk::make_torus2(), "sin(theta)*z"));
}

TEST_CASE("scalar curvature equality s^H = s^H_M") {
    auto w2 = wk::build_wave(wk::make_torus2(), "sin(theta)*sin(z+t)");
    CHECK(wk::check_scalar_equality(w2, 10, 5) < 1e-10);

    auto ws = wk::build_wave(wk::make_sphere(), "sin(theta)+x");
    // round sphere: s^H_M = 2, so s^H of the total space is 2 as well
    wk::Rng rng(42);
    for (int s = 0; s < 5; ++s) {
        auto x = ws.total.patch.domain.sample(rng);
        AKEval e(ws.total, x, 3);
        CHECK_THAT(e.hermitian_scalar().value(), Catch::Matchers::WithinAbs(2.0, 1e-8));
    }
    CHECK(wk::check_scalar_equality(ws, 10, 5) < 1e-8);
}

TEST_CASE("mechanism: hamiltonian killing field on the sphere extends to the wave") {
    // H = z is the moment map of the rotation field on the round sphere
    auto z_field = wk::sphere_height_field();
    auto w = wk::build_wave(wk::make_sphere(), "(x^2+y^2-1)/(x^2+y^2+1)");
    auto rep = wk::extremal_mechanism_check(w, 10, 17);
    CHECK(rep.base_killing < 1e-10);
    CHECK(rep.total_killing < 1e-9);
    CHECK(rep.l_TT < 1e-9);
    CHECK(rep.l_TJT < 1e-9);
    CHECK(rep.l_JTJT < 1e-9);
    CHECK(rep.l_TX < 1e-9);
    CHECK(rep.l_XX < 1e-9);
    CHECK(rep.cartan < 1e-10);
    CHECK(rep.g_K_T < 1e-12);
    (void)z_field;
}

TEST_CASE("mechanism: constant H gives the zero field") {
    auto w = wk::build_wave(wk::make_sphere(), "5");
    auto rep = wk::extremal_mechanism_check(w, 5, 18);
    CHECK(rep.total_killing < 1e-14);
}

TEST_CASE("mechanism: z^2 is not a moment map of an isometry, precondition fires") {
    auto w = wk::build_wave(wk::make_sphere(), "((x^2+y^2-1)/(x^2+y^2+1))^2");
    CHECK_THROWS_AS(wk::extremal_mechanism_check(w, 5, 19), wk::precondition_error);
}

TEST_CASE("darboux proposition routing: curved bases are rejected") {
    auto w = wk::build_wave(wk::make_sphere(), "x+sin(theta)");
    CHECK_THROWS_AS(wk::check_prop_darboux(w, 3, 1), wk::unsupported_base_error);
}

TEST_CASE("lorentzian components and duality through the accessors") {
    auto w = wk::build_wave(wk::make_torus2(), "sin(theta)+cos(z)");
    const std::vector<double> x = {0.8, 1.2, 2.0, 0.5};
    auto h = w.lorentz_h_components(x);
    const double H = wk::lift(w.H, x, 0).value();
    const int m = 4;
    CHECK(h[0 * m + 0] == H);
    CHECK(h[0 * m + 1] == 1.0);
    CHECK(h[2 * m + 2] == 1.0);  // flat torus block
    CHECK(h[0 * m + 2] == 0.0);
    auto t = w.t_components(x);
    // h(T, T) = -1
    double htt = 0.0;
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) htt += h[std::size_t(a * m + b)] * t[std::size_t(a)] * t[std::size_t(b)];
    CHECK_THAT(htt, Catch::Matchers::WithinAbs(-1.0, 1e-14));
}
