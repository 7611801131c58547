#include <cmath>
#include <limits>

#include "doctest.h"
#include "gconv/risk_transfer.hpp"
#include "helpers.hpp"

using namespace gconv;
using gconv::testing::payoff_of;

namespace {

TheoremSettings quote_settings() {
    TheoremSettings cfg;
    cfg.control_points = 201;
    cfg.partition_levels = 256;
    cfg.optimizer.max_iters = 0;
    return cfg;
}

}  // namespace

TEST_SUITE("risk_transfer") {

TEST_CASE("rho prices the negated position") {
    const SolveConfig cfg;
    CHECK(rho(payoff_of("x1*x1", {1.0}), Driver(1.0, 2.0), cfg) ==
          doctest::Approx(-1.0).epsilon(1e-3));
    CHECK(rho(payoff_of("-(x1*x1)", {1.0}), Driver(1.0, 2.0), cfg) ==
          doctest::Approx(4.0).epsilon(1e-3));
}

TEST_CASE("rho is coherent") {
    const Driver d(1.0, 2.0);
    const SolveConfig cfg;

    // Cash invariance: rho(X + c) = rho(X) - c.
    const double base = rho(payoff_of("x1*x1", {1.0}), d, cfg);
    const double shifted = rho(payoff_of("x1*x1 + 0.37", {1.0}), d, cfg);
    CHECK(std::fabs(shifted - (base - 0.37)) <= 1e-9);

    // Monotone decreasing: max(x,0) <= |x| pointwise.
    CHECK(rho(payoff_of("max(x1,0)", {1.0}), d, cfg) >=
          rho(payoff_of("abs(x1)", {1.0}), d, cfg) - 1e-9);

    // Positive homogeneity on an exact doubling.
    const double twice = rho(payoff_of("2*(x1*x1)", {1.0}), d, cfg);
    CHECK(std::fabs(twice - 2.0 * base) <= 1e-9);

    // Subadditivity with a strict margin: X + (-X) nets to zero.
    const double pos = rho(payoff_of("x1*x1", {1.0}), d, cfg);
    const double neg = rho(payoff_of("-(x1*x1)", {1.0}), d, cfg);
    const double net = rho(payoff_of("x1*x1 - x1*x1", {1.0}), d, cfg);
    CHECK(net <= pos + neg + 1e-9);
    CHECK(net == 0.0);
}

TEST_CASE("a riskless position transfers nothing") {
    const TransferQuote q =
        optimal_transfer(payoff_of("0", {1.0}), Driver(1.0, 2.0), Driver(1.5, 3.0),
                         quote_settings());
    CHECK(std::fabs(q.value) <= 1e-6);
    CHECK(std::fabs(q.rho_A_no_transfer) <= 1e-6);
    CHECK_FALSE(q.degenerate);
    for (const auto& stage : q.contract.stage_values)
        for (const double v : stage) CHECK(std::fabs(v) <= 1e-9);
}

TEST_CASE("a convex loss profile is kept, not ceded") {
    // X = -B^2: the position -X is convex, so ceding nothing is optimal and
    // the quote equals rho_A(X) = E_A[B^2] = 4.
    const TransferQuote q =
        optimal_transfer(payoff_of("-(x1*x1)", {1.0}), Driver(1.0, 2.0), Driver(1.5, 3.0),
                         quote_settings());
    CHECK(q.value == doctest::Approx(4.0).epsilon(5e-3));
    CHECK(q.rho_A_no_transfer == doctest::Approx(4.0).epsilon(5e-3));
    CHECK(q.value <= q.rho_A_no_transfer + 5e-3 * 4.0);
}

TEST_CASE("a concave-loss position is ceded to the wider counterparty") {
    // X = B^2: the optimal cession carries the whole square; the quote drops
    // from rho_A(X) = -1 to the intersected band's floor -sigma_lo^2 = -2.25.
    const TransferQuote q =
        optimal_transfer(payoff_of("x1*x1", {1.0}), Driver(1.0, 2.0), Driver(1.5, 3.0),
                         quote_settings());
    CHECK(q.value == doctest::Approx(-2.25).epsilon(5e-3));
    CHECK(q.rho_A_no_transfer == doctest::Approx(-1.0).epsilon(5e-3));
    CHECK(q.value <= q.rho_A_no_transfer);
    // The buyer charges up to their risk of the ceded square.
    CHECK(q.price_bound == doctest::Approx(2.25).epsilon(5e-3));
    CHECK_FALSE(q.degenerate);
}

TEST_CASE("nested bands quote the no-transfer benchmark") {
    const TransferQuote q =
        optimal_transfer(payoff_of("sin(x1)", {1.0}), Driver(1.0, 2.0), Driver(0.5, 3.0),
                         quote_settings());
    CHECK(q.value == doctest::Approx(q.rho_A_no_transfer).epsilon(5e-3));
    CHECK(q.diagnostics.iterations == 0);
}

TEST_CASE("disjoint bands quote minus infinity with slope diagnostics") {
    const TransferQuote q =
        optimal_transfer(payoff_of("x1*x1", {1.0}), Driver(1.0, 1.5), Driver(2.0, 3.0),
                         quote_settings());
    CHECK(q.degenerate);
    CHECK(q.value == -std::numeric_limits<double>::infinity());
    REQUIRE(q.divergence.has_value());
    CHECK(q.divergence->slope_predicted == doctest::Approx(-1.75).epsilon(1e-12));
    CHECK(q.divergence->slope_fit == doctest::Approx(-1.75).epsilon(0.02));
    // The untransferred benchmark is still finite and reported.
    CHECK(q.rho_A_no_transfer == doctest::Approx(-1.0).epsilon(5e-3));
}

}  // TEST_SUITE
