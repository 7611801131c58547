#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "gconv/payoff_expr.hpp"

using namespace gconv;

namespace {

// The round-trip and soundness corpus; spans every operator and both sugars.
const char* const kCorpus[] = {
    "x1*x1",
    "max(x1-1,0)",
    "sin(x1)+0.3*x1*x1",
    "min(x1,x2)",
    "-abs(x1)",
    "call(x1,1)",
    "put(x1,0.5)",
    "pow(abs(x1),3)",
    "exp(-(x1*x1))",
    "2*(x1+x2)-x3",
    "cos(x1)*0.5",
    "max(min(x1,x2),-3)",
};

}  // namespace

TEST_SUITE("payoff_expr") {

TEST_CASE("arithmetic follows standard precedence") {
    CHECK(parse_payoff("2+3*4").eval({}) == 14.0);
    CHECK(parse_payoff("(2+3)*4").eval({}) == 20.0);
    CHECK(parse_payoff("2-3-1").eval({}) == -2.0);
    CHECK(parse_payoff("-x1")(2.0) == -2.0);
    CHECK(parse_payoff("pow(x1,3)")(2.0) == 8.0);
    CHECK(parse_payoff("pow(x1,0)")(5.0) == 1.0);
}

TEST_CASE("evaluation matches the declared semantics") {
    CHECK(parse_payoff("x1*x1")(3.0) == 9.0);
    CHECK(parse_payoff("abs(x1)")(-2.0) == 2.0);
    CHECK(parse_payoff("min(x1,x2)")(1.0, -1.0) == -1.0);
    CHECK(parse_payoff("max(x1,x2)")(1.0, -1.0) == 1.0);
    CHECK(parse_payoff("sin(x1)")(0.5) == std::sin(0.5));
    CHECK(parse_payoff("cos(x1)")(0.5) == std::cos(0.5));
}

TEST_CASE("call and put are max sugar") {
    const PayoffExpr call = parse_payoff("call(x1,1)");
    const PayoffExpr put = parse_payoff("put(x1,0.5)");
    for (const double x : {-2.0, 0.0, 0.5, 1.0, 3.0}) {
        CHECK(call(x) == std::max(x - 1.0, 0.0));
        CHECK(put(x) == std::max(0.5 - x, 0.0));
    }
}

TEST_CASE("exp is clamped to keep growth polynomial-bounded") {
    const PayoffExpr e = parse_payoff("exp(x1)");
    CHECK(e(1.0) == std::exp(1.0));
    CHECK(e(100.0) == std::exp(40.0));
    CHECK(e(1000.0) == e(41.0));
}

TEST_CASE("arity is the highest variable referenced") {
    CHECK(parse_payoff("1.5").arity() == 0);
    CHECK(parse_payoff("x1*x1").arity() == 1);
    CHECK(parse_payoff("x1+x3").arity() == 3);
    CHECK_THROWS_AS(parse_payoff("x4"), PayoffParseError);
}

TEST_CASE("printing is canonical under reparsing") {
    for (const char* src : kCorpus) {
        const PayoffExpr e = parse_payoff(src);
        const std::string once = e.print();
        const std::string twice = parse_payoff(once).print();
        CHECK(once == twice);

        // The canonical form evaluates identically to the original.
        std::mt19937 rng(7);
        std::uniform_real_distribution<double> u(-5.0, 5.0);
        const PayoffExpr r = parse_payoff(once);
        for (int k = 0; k < 16; ++k) {
            const double args[3] = {u(rng), u(rng), u(rng)};
            CHECK(e.eval({args, 3}) == r.eval({args, 3}));
        }
    }
}

TEST_CASE("envelopes grow bottom-up from the syntax") {
    CHECK(parse_payoff("2.5").envelope().C == 0.0);
    CHECK(parse_payoff("2.5").envelope().m == 0);
    CHECK(parse_payoff("x1").envelope().m == 1);
    CHECK(parse_payoff("x1*x1").envelope().m == 2);
    CHECK(parse_payoff("pow(x1,6)").envelope().m == 6);
    CHECK_THROWS_AS(parse_payoff("pow(x1,7)"), PayoffParseError);
    CHECK_THROWS_AS(parse_payoff("pow(x1,4)*pow(x1,4)"), PayoffParseError);
}

TEST_CASE("declared envelopes bound sampled differences") {
    std::mt19937 rng(20240612);
    std::uniform_real_distribution<double> u(-16.0, 16.0);
    for (const char* src : kCorpus) {
        const PayoffExpr e = parse_payoff(src);
        const GrowthEnvelope env = e.envelope();
        for (int k = 0; k < 200; ++k) {
            double x[3];
            double y[3];
            double nx = 0.0;
            double ny = 0.0;
            double gap = 0.0;
            for (int i = 0; i < 3; ++i) {
                x[i] = u(rng);
                y[i] = u(rng);
                nx = std::max(nx, std::fabs(x[i]));
                ny = std::max(ny, std::fabs(y[i]));
                gap = std::max(gap, std::fabs(x[i] - y[i]));
            }
            const double lhs = std::fabs(e.eval({x, 3}) - e.eval({y, 3}));
            const double rhs =
                env.C * (1.0 + std::pow(nx, env.m) + std::pow(ny, env.m)) * gap;
            CHECK(lhs <= rhs + 1e-9);
        }
    }
}

TEST_CASE("parse errors carry the byte offset") {
    try {
        parse_payoff("x1 + ");
        FAIL("expected a parse error");
    } catch (const PayoffParseError& e) {
        CHECK(e.offset() == 5);
    }

    try {
        parse_payoff("x1 + foo(x1)");
        FAIL("expected a parse error");
    } catch (const PayoffParseError& e) {
        CHECK(e.offset() == 5);
    }

    CHECK_THROWS_AS(parse_payoff(""), PayoffParseError);
    CHECK_THROWS_AS(parse_payoff("(x1"), PayoffParseError);
    CHECK_THROWS_AS(parse_payoff("max(x1)"), PayoffParseError);
    CHECK_THROWS_AS(parse_payoff("abs(x1,x2)"), PayoffParseError);
    CHECK_THROWS_AS(parse_payoff("pow(x1,1.5)"), PayoffParseError);
    CHECK_THROWS_AS(parse_payoff("pow(x1,-1)"), PayoffParseError);
    CHECK_THROWS_AS(parse_payoff("x1/x2"), PayoffParseError);
    CHECK_THROWS_AS(parse_payoff("1..5"), PayoffParseError);
}

TEST_CASE("evaluation needs at least arity arguments") {
    const PayoffExpr e = parse_payoff("x1+x2");
    const double one = 1.0;
    CHECK_THROWS_AS(e.eval({&one, 1}), std::invalid_argument);
}

}  // TEST_SUITE
