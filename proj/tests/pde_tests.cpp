#include <array>
#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "gconv/gheat.hpp"
#include "gconv/grid.hpp"
#include "helpers.hpp"

using namespace gconv;

namespace {

SpatialGrid default_grid(const Driver& d, double t, const SolveConfig& cfg) {
    const std::array<Driver, 1> bands = {d};
    return build_grid({2.0, 2}, bands, t, cfg);
}

double sup_interior(const GridFunction& a, const GridFunction& b) {
    // Boundary effects travel one node per step; compare the inner half.
    const std::size_t n = a.grid().n_points();
    double out = 0.0;
    for (std::size_t i = n / 4; i <= 3 * (n / 4); ++i)
        out = std::max(out, std::fabs(a.values()[i] - b.values()[i]));
    return out;
}

}  // namespace

TEST_SUITE("pde") {

TEST_CASE("quadratics evolve exactly at the band edges") {
    const Driver d(1.0, 2.0);
    const SolveConfig cfg;
    const SpatialGrid g = default_grid(d, 1.0, cfg);

    const GridFunction up = solve(d, GridFunction::sample(g, [](double x) { return x * x; }),
                                  1.0, cfg);
    CHECK(up.value_at_center() == doctest::Approx(4.0).epsilon(1e-9));

    const GridFunction dn = solve(
        d, GridFunction::sample(g, [](double x) { return -x * x; }), 1.0, cfg);
    CHECK(dn.value_at_center() == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("constants and linear data are fixed points") {
    const Driver d(1.0, 2.0);
    const SolveConfig cfg;
    const SpatialGrid g = default_grid(d, 1.0, cfg);

    const GridFunction c = solve(d, GridFunction::sample(g, [](double) { return 0.7; }),
                                 1.0, cfg);
    for (const double v : c.values()) CHECK(v == 0.7);

    const GridFunction lin = solve(d, GridFunction::sample(g, [](double x) { return 3.0 * x; }),
                                   1.0, cfg);
    CHECK(sup_interior(lin, GridFunction::sample(g, [](double x) { return 3.0 * x; })) <=
          1e-12);
}

TEST_CASE("stepping preserves order") {
    const Driver d(1.0, 2.0);
    const SolveConfig cfg;
    const SpatialGrid g = default_grid(d, 1.0, cfg);
    const GridFunction lo = solve(
        d, GridFunction::sample(g, [](double x) { return std::max(x, 0.0); }), 1.0, cfg);
    const GridFunction hi = solve(
        d, GridFunction::sample(g, [](double x) { return std::fabs(x); }), 1.0, cfg);
    for (std::size_t i = 0; i < g.n_points(); ++i)
        CHECK(lo.values()[i] <= hi.values()[i] + 1e-12);
}

TEST_CASE("cash translation commutes with the solve") {
    const Driver d(1.0, 2.0);
    const SolveConfig cfg;
    const SpatialGrid g = default_grid(d, 1.0, cfg);
    const GridFunction base = solve(
        d, GridFunction::sample(g, [](double x) { return std::sin(x); }), 1.0, cfg);
    const GridFunction shifted = solve(
        d, GridFunction::sample(g, [](double x) { return std::sin(x) + 0.37; }), 1.0, cfg);
    double worst = 0.0;
    for (std::size_t i = 0; i < g.n_points(); ++i)
        worst = std::max(worst, std::fabs(shifted.values()[i] - base.values()[i] - 0.37));
    CHECK(worst <= 1e-9);
}

TEST_CASE("doubling the data doubles the solution exactly") {
    const Driver d(1.0, 2.0);
    const SolveConfig cfg;
    const SpatialGrid g = default_grid(d, 1.0, cfg);
    const GridFunction one = solve(
        d, GridFunction::sample(g, [](double x) { return std::sin(x) + x * x; }), 1.0, cfg);
    const GridFunction two = solve(
        d, GridFunction::sample(g, [](double x) { return 2.0 * (std::sin(x) + x * x); }),
        1.0, cfg);
    for (std::size_t i = 0; i < g.n_points(); ++i)
        CHECK(two.values()[i] == 2.0 * one.values()[i]);
}

TEST_CASE("the solve is subadditive nodewise") {
    const Driver d(1.0, 2.0);
    const SolveConfig cfg;
    const SpatialGrid g = default_grid(d, 1.0, cfg);
    const auto f = [](double x) { return std::sin(x); };
    const auto h = [](double x) { return x * x; };
    const GridFunction both = solve(
        d, GridFunction::sample(g, [&](double x) { return f(x) + h(x); }), 1.0, cfg);
    const GridFunction left = solve(d, GridFunction::sample(g, f), 1.0, cfg);
    const GridFunction right = solve(d, GridFunction::sample(g, h), 1.0, cfg);
    for (std::size_t i = 0; i < g.n_points(); ++i)
        CHECK(both.values()[i] <= left.values()[i] + right.values()[i] + 1e-9);
}

TEST_CASE("two half-horizon solves equal one full solve") {
    const Driver d(1.0, 2.0);
    const SolveConfig cfg;
    const SpatialGrid g = default_grid(d, 1.0, cfg);
    const GridFunction phi = GridFunction::sample(g, [](double x) { return x * x; });
    const GridFunction direct = solve(d, phi, 1.0, cfg);
    const GridFunction composed = solve(d, solve(d, phi, 0.5, cfg), 0.5, cfg);
    CHECK(sup_interior(direct, composed) <= 1e-6);
}

TEST_CASE("kinked data converge to the closed form as dx halves") {
    const Driver d(1.0, 2.0);
    SolveConfig fine;
    SolveConfig coarse;
    coarse.n_points = 801;

    const auto run = [&](const SolveConfig& cfg) {
        const SpatialGrid g = default_grid(d, 1.0, cfg);
        return solve(d, GridFunction::sample(g, [](double x) { return std::max(x - 1.0, 0.0); }),
                     1.0, cfg)
            .value_at_center();
    };
    const double err_fine = std::fabs(run(fine) - testing::kCallK1Sigma2);
    const double err_coarse = std::fabs(run(coarse) - testing::kCallK1Sigma2);
    CHECK(err_fine <= 1e-3);
    CHECK(err_coarse >= 2.0 * err_fine);
}

TEST_CASE("time stepping honors the stability bound") {
    const SolveConfig cfg;
    const TimeStepping plan = plan_time_stepping(1.0, 0.02, 2.0, cfg);
    CHECK(plan.dt <= 0.9 * 0.02 * 0.02 / 4.0 + 1e-18);
    CHECK(plan.n_steps * plan.dt == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(plan.t_end == 1.0);

    SolveConfig tiny = cfg;
    tiny.step_budget = 10;
    CHECK_THROWS_AS(plan_time_stepping(1.0, 0.02, 2.0, tiny), std::invalid_argument);
}

TEST_CASE("solver configuration is validated") {
    SolveConfig cfg;
    CHECK_NOTHROW(validate(cfg));
    cfg.truncation_multiple = 3;
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
    cfg = SolveConfig{};
    cfg.n_points = 1600;
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
    cfg = SolveConfig{};
    cfg.cfl_safety = 0.0;
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
    cfg = SolveConfig{};
    cfg.cfl_safety = 1.5;
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
    cfg = SolveConfig{};
    cfg.quad_order = 8;
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
}

}  // TEST_SUITE
