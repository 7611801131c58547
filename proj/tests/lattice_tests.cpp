#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "gconv/gexpectation.hpp"
#include "gconv/lattice.hpp"
#include "helpers.hpp"

using namespace gconv;
using gconv::testing::payoff_of;

TEST_SUITE("lattice") {

TEST_CASE("squares land on the band-edge variances") {
    const Driver d(1.0, 2.0);
    const LatticeResult up = evaluate_lattice(payoff_of("x1*x1", {1.0}), d, 512);
    CHECK(up.value == doctest::Approx(4.0).epsilon(5e-3));
    const LatticeResult dn = evaluate_lattice(payoff_of("-(x1*x1)", {1.0}), d, 512);
    CHECK(dn.value == doctest::Approx(-1.0).epsilon(5e-3));
}

TEST_CASE("constants pass through backward induction") {
    const LatticeResult r = evaluate_lattice(payoff_of("2.5", {1.0}), Driver(1.0, 2.0), 64);
    CHECK(r.value == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("snap distances stay within half a layer") {
    const CylinderPayoff X = payoff_of("x1+x2", {0.3, 1.0});
    const LatticeResult r = evaluate_lattice(X, Driver(1.0, 2.0), 10);
    REQUIRE(r.snap_distances.size() == 2);
    for (const double s : r.snap_distances) CHECK(s <= 0.05 + 1e-12);
}

TEST_CASE("two payoff times on one layer are rejected") {
    const CylinderPayoff X = payoff_of("x1+x2", {0.49, 0.5});
    CHECK_THROWS_AS(evaluate_lattice(X, Driver(1.0, 2.0), 4), std::invalid_argument);
    CHECK_THROWS_AS(evaluate_lattice(payoff_of("x1", {1.0}), Driver(1.0, 2.0), 0),
                    std::invalid_argument);
}

TEST_CASE("the lattice agrees with the PDE engine across curvatures") {
    const Driver d(1.0, 2.0);
    const SolveConfig cfg;
    for (const char* expr : {"pow(abs(x1),3)", "max(x1-1,0)", "sin(x1)"}) {
        const CylinderPayoff X = payoff_of(expr, {1.0});
        const double pde = evaluate(X, d, cfg);
        const double tree = evaluate_lattice(X, d, 512).value;
        CHECK(tree == doctest::Approx(pde).epsilon(1e-2));
    }
}

TEST_CASE("two-increment payoffs agree across both engines") {
    const Driver d(1.0, 2.0);
    const CylinderPayoff X = payoff_of("x1*x1 + x2*x2", {0.5, 1.0});
    const double pde = evaluate(X, d, SolveConfig{});
    const double tree = evaluate_lattice(X, d, 64).value;
    CHECK(tree == doctest::Approx(pde).epsilon(2e-2));
}

}  // TEST_SUITE
