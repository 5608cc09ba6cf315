#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "support/oracles.hpp"
#include "wavekahler/jets.hpp"

using wk::Jet;
using wk::JetPoint;
using wk::MultiIndex;
using wk_test::Poly;

TEST_CASE("seeding a variable") {
    Jet x = Jet::variable(2, 3, 0, 1.5);
    CHECK(x.value() == 1.5);
    CHECK(x.coeff({1, 0}) == 1.0);
    CHECK(x.coeff({0, 1}) == 0.0);
    CHECK(x.coeff({2, 0}) == 0.0);
}

TEST_CASE("x^2 at x=2, order 2") {
    Jet x = Jet::variable(1, 2, 0, 2.0);
    Jet f = x * x;
    CHECK(f.value() == 4.0);
    CHECK(wk::partial(f, {1}) == 4.0);
    CHECK(f.coeff({2}) == 1.0);            // Taylor-normalized
    CHECK(wk::partial(f, {2}) == 2.0);     // un-normalized
}

TEST_CASE("constants have zero derivative tower") {
    Jet c = Jet::constant(3, 3, 7.25);
    for (const auto& a : c.table().alpha)
        if (wk::mi_degree(a) > 0) CHECK(c.coeff(a) == 0.0);
}

TEST_CASE("monomial and bilinear partials") {
    Jet x = Jet::variable(1, 3, 0, 1.0);
    CHECK(wk::partial(x * x * x, {3}) == Catch::Approx(6.0).margin(1e-14));

    JetPoint p = wk::seed_point({2.0, 5.0}, 2);
    Jet f = p[0] * p[1];
    CHECK(wk::partial(f, {1, 1}) == Catch::Approx(1.0).margin(1e-14));
}

TEST_CASE("exp(2t) second derivative matches FD oracle") {
    Jet t = Jet::variable(1, 2, 0, 0.4);
    Jet f = exp(2.0 * t);
    const double expected = 4.0 * std::exp(0.8);
    CHECK(wk::partial(f, {2}) == Catch::Approx(expected).epsilon(1e-12));
    const double fd = wk_test::fd_partial(
        [](const std::vector<double>& x) { return std::exp(2 * x[0]); }, {0.4}, {2});
    CHECK(wk::partial(f, {2}) == Catch::Approx(fd).epsilon(1e-7));
}

TEST_CASE("sin(x)*exp(y) at (0.3, 0.7): all partials to order 3 vs FD") {
    JetPoint p = wk::seed_point({0.3, 0.7}, 3);
    Jet f = sin(p[0]) * exp(p[1]);
    auto fn = [](const std::vector<double>& x) { return std::sin(x[0]) * std::exp(x[1]); };
    for (const auto& a : f.table().alpha) {
        const double jet_val = wk::partial(f, a);
        const double fd_val = wk_test::fd_partial(fn, {0.3, 0.7}, a);
        INFO("alpha = (" << a[0] << "," << a[1] << ")");
        CHECK(jet_val == Catch::Approx(fd_val).epsilon(1e-6).margin(1e-6));
    }
}

TEST_CASE("product and chain rules are exact for random polynomials") {
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    auto random_poly = [&](int dim, int deg) {
        Poly p = Poly::constant(dim, coef(rng));
        for (int d = 1; d <= deg; ++d) {
            // a few random monomials of degree d
            for (int k = 0; k < 3; ++k) {
                Poly m = Poly::constant(dim, coef(rng));
                for (int j = 0; j < d; ++j) {
                    int v = int(rng() % std::uint64_t(dim));
                    m = m * Poly::var(dim, v);
                }
                p = p + m;
            }
        }
        return p;
    };

    auto eval_jet = [](const Poly& p, const JetPoint& pt) {
        Jet acc = Jet::constant(pt[0].dim(), pt[0].order(), 0.0);
        for (auto& [e, c] : p.terms) {
            Jet t = Jet::constant(pt[0].dim(), pt[0].order(), c);
            for (std::size_t i = 0; i < e.size(); ++i)
                for (int k = 0; k < e[i]; ++k) t = t * pt[i];
            acc = acc + t;
        }
        return acc;
    };

    for (int trial = 0; trial < 10; ++trial) {
        Poly f = random_poly(2, 4);
        Poly g = random_poly(2, 4);
        std::vector<double> x = {coef(rng), coef(rng)};
        JetPoint pt = wk::seed_point(x, 4);

        // product rule: jets of f*g vs symbolic expansion
        Jet prod = eval_jet(f, pt) * eval_jet(g, pt);
        Poly fg = f * g;
        for (const auto& a : prod.table().alpha) {
            const double want = fg.partial(a, x);
            const double got = wk::partial(prod, a);
            CHECK_THAT(got, Catch::Matchers::WithinAbs(want, 1e-12 * (1 + std::abs(want))));
        }

        // chain rule: f with first variable substituted by g
        Poly comp = f.substitute(0, g);
        JetPoint pt2 = wk::seed_point(x, 4);
        Jet inner = eval_jet(g, pt2);
        // evaluate f(inner, y) in jet arithmetic
        Jet cj = Jet::constant(2, 4, 0.0);
        for (auto& [e, c] : f.terms) {
            Jet t = Jet::constant(2, 4, c);
            for (int k = 0; k < e[0]; ++k) t = t * inner;
            for (int k = 0; k < e[1]; ++k) t = t * pt2[1];
            cj = cj + t;
        }
        for (const auto& a : cj.table().alpha) {
            if (wk::mi_degree(a) > 3) continue;  // degree-16 tails are not held by an order-4 jet
            const double want = comp.partial(a, x);
            const double got = wk::partial(cj, a);
            CHECK_THAT(got, Catch::Matchers::WithinAbs(want, 1e-12 * (1 + std::abs(want))));
        }
    }
}

TEST_CASE("order-k jet restricted to k-1 equals a fresh lift") {
    JetPoint p4 = wk::seed_point({0.4, -0.2, 1.1}, 4);
    JetPoint p3 = wk::seed_point({0.4, -0.2, 1.1}, 3);
    auto f = [](const JetPoint& p) {
        return sin(p[0] * p[1]) * exp(p[2]) + p[0] / (1.0 + p[2] * p[2]);
    };
    Jet a = f(p4).truncated(3);
    Jet b = f(p3);
    REQUIRE(a.coeffs().size() == b.coeffs().size());
    for (std::size_t i = 0; i < a.coeffs().size(); ++i)
        CHECK(a.coeffs()[i] == Catch::Approx(b.coeffs()[i]).margin(1e-15));
}

TEST_CASE("derivative() agrees with coefficient shifts") {
    JetPoint p = wk::seed_point({0.7, 0.3}, 3);
    Jet f = exp(p[0]) * cos(p[1]);
    Jet fx = f.derivative(0);
    CHECK(fx.order() == 2);
    CHECK(fx.value() == Catch::Approx(wk::partial(f, {1, 0})).margin(1e-15));
    CHECK(wk::partial(fx, {1, 1}) == Catch::Approx(wk::partial(f, {2, 1})).margin(1e-12));
}

TEST_CASE("domain errors carry the failing operation") {
    Jet x = Jet::variable(1, 2, 0, 0.0);
    CHECK_THROWS_AS(log(x), wk::domain_error);
    CHECK_THROWS_AS(sqrt(x - 1.0), wk::domain_error);
    CHECK_THROWS_AS(1.0 / x, wk::domain_error);
    Jet y = Jet::variable(1, 2, 0, 2.0);
    CHECK_THROWS_AS(y / x, wk::domain_error);
}

TEST_CASE("degree overflow raises order-error") {
    Jet x = Jet::variable(1, 2, 0, 1.0);
    CHECK_THROWS_AS(x.coeff({3}), wk::order_error);
    CHECK_THROWS_AS(x.derivative(0).derivative(0).derivative(0), wk::order_error);
}

TEST_CASE("integer powers are exact, fractional powers match FD") {
    Jet x = Jet::variable(1, 3, 0, 1.7);
    Jet p = pow(x, 3.0);
    CHECK(wk::partial(p, {3}) == Catch::Approx(6.0).margin(1e-12));
    Jet q = pow(x, 1.5);
    const double fd = wk_test::fd_partial(
        [](const std::vector<double>& v) { return std::pow(v[0], 1.5); }, {1.7}, {2});
    CHECK(wk::partial(q, {2}) == Catch::Approx(fd).epsilon(1e-7));
    Jet r = pow(x, x);  // x^x
    const double fdx = wk_test::fd_partial(
        [](const std::vector<double>& v) { return std::pow(v[0], v[0]); }, {1.7}, {1});
    CHECK(wk::partial(r, {1}) == Catch::Approx(fdx).epsilon(1e-8));
}

TEST_CASE("division round trip") {
    JetPoint p = wk::seed_point({0.9, -0.4}, 4);
    Jet f = sin(p[0]) + 2.0;
    Jet g = cos(p[1]) + 3.0;
    Jet h = (f / g) * g - f;
    for (double c : h.coeffs()) CHECK(std::abs(c) < 1e-14);
}
