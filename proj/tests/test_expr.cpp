#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "wavekahler/expr.hpp"

using wk::Expr;

TEST_CASE("parse collects variables") {
    Expr e = wk::parse_field("sin(theta)*cos(z1)");
    auto vars = e.variables();
    REQUIRE(vars.size() == 2);
    CHECK(vars.count("theta") == 1);
    CHECK(vars.count("z1") == 1);
}

TEST_CASE("phi dependence rejected in H slot") {
    CHECK_THROWS_MATCHES(wk::parse_field("H(phi)", true), wk::construction_error,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("phi")));
    CHECK_THROWS_AS(wk::parse_field("sin(phi)+z", true), wk::construction_error);
    CHECK_NOTHROW(wk::parse_field("sin(theta)+z", true));
}

TEST_CASE("constant folding evaluates sqrt(6)") {
    Expr e = wk::parse_field("sqrt(6)*z").folded();
    // after folding the coefficient is a literal
    const double v = e.eval_at({"z"}, {1.0});
    CHECK(v == Catch::Approx(2.4494897427831781).epsilon(1e-15));
    CHECK(e.str().substr(0, 5) == "2.449");
}

TEST_CASE("print/parse round trip is stable") {
    for (const char* src : {
             "sin(theta)*cos(z1)",
             "1+2*x^2-3/(y+4)",
             "-x^2",
             "(x+y)*(x-y)",
             "exp(-(x^2+y^2)/2)",
             "2^3^2",
             "sqrt(x)/log(y)",
         }) {
        Expr once = Expr::parse(src);
        std::string printed = once.str();
        Expr twice = Expr::parse(printed);
        CHECK(printed == twice.str());
    }
}

TEST_CASE("right associativity of ^ and precedence") {
    Expr e = Expr::parse("2^3^2");
    CHECK(e.eval_at({}, {}) == 512.0);
    CHECK(Expr::parse("-3^2").eval_at({}, {}) == -9.0);
    CHECK(Expr::parse("2*3+4").eval_at({}, {}) == 10.0);
    CHECK(Expr::parse("2+3*4").eval_at({}, {}) == 14.0);
    CHECK(Expr::parse("2-3-4").eval_at({}, {}) == -5.0);
}

TEST_CASE("syntax errors carry positions") {
    try {
        Expr::parse("sin(x");
        FAIL("expected parse_error");
    } catch (const wk::parse_error& e) {
        CHECK(e.position == 5);
    }
    try {
        Expr::parse("x + * y");
        FAIL("expected parse_error");
    } catch (const wk::parse_error& e) {
        CHECK(e.position == 4);
    }
    CHECK_THROWS_AS(Expr::parse("foo(x)"), wk::parse_error);
    CHECK_THROWS_AS(Expr::parse("x y"), wk::parse_error);
}

TEST_CASE("binding rejects off-chart variables") {
    Expr e = Expr::parse("x+q");
    CHECK_THROWS_AS(e.bind({"x", "y"}), wk::construction_error);
}

TEST_CASE("evaluation domain errors name the subexpression") {
    Expr e = Expr::parse("1/(x-1)+log(x)");
    CHECK(e.eval_at({"x"}, {2.0}) == Catch::Approx(1.0 + std::log(2.0)));
    try {
        e.eval_at({"x"}, {1.0});
        FAIL("expected domain_error");
    } catch (const wk::domain_error& err) {
        CHECK_THAT(err.what(), Catch::Matchers::ContainsSubstring("1/(x-1)"));
    }
    try {
        e.eval_at({"x"}, {-1.0});
        FAIL("expected domain_error");
    } catch (const wk::domain_error& err) {
        CHECK_THAT(err.what(), Catch::Matchers::ContainsSubstring("log"));
    }
}

TEST_CASE("jet evaluation differentiates the AST") {
    Expr e = Expr::parse("x^2*sin(y)");
    wk::ScalarField f = e.bind({"x", "y"});
    wk::Jet j = wk::lift(f, {2.0, 0.5}, 2);
    CHECK(j.value() == Catch::Approx(4 * std::sin(0.5)));
    CHECK(wk::partial(j, {1, 0}) == Catch::Approx(4 * std::sin(0.5)));
    CHECK(wk::partial(j, {1, 1}) == Catch::Approx(4 * std::cos(0.5)));
    CHECK(wk::partial(j, {2, 0}) == Catch::Approx(2 * std::sin(0.5)));
}

TEST_CASE("integer exponents on negative bases work") {
    Expr e = Expr::parse("x^2");
    CHECK(e.eval_at({"x"}, {-3.0}) == 9.0);
    // non-integer exponent on a negative base is a domain error
    Expr f = Expr::parse("x^0.5");
    CHECK_THROWS_AS(f.eval_at({"x"}, {-3.0}), wk::domain_error);
}
