#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "gconv/gheat.hpp"
#include "gconv/grid.hpp"

using namespace gconv;

TEST_SUITE("grid") {

TEST_CASE("grid is symmetric with zero on a node") {
    const SpatialGrid g(4.0, 9);
    CHECK(g.n_points() == 9);
    CHECK(g.center() == 4);
    CHECK(g.x(g.center()) == 0.0);
    CHECK(g.x_min() == -4.0);
    CHECK(g.x_max() == 4.0);
    CHECK(g.dx() == 1.0);
    CHECK(g.x(6) == 2.0);
}

TEST_CASE("grid construction rejects even or tiny node counts") {
    CHECK_THROWS_AS(SpatialGrid(1.0, 8), std::invalid_argument);
    CHECK_THROWS_AS(SpatialGrid(1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(SpatialGrid(0.0, 9), std::invalid_argument);
    CHECK_THROWS_AS(SpatialGrid(-2.0, 9), std::invalid_argument);
}

TEST_CASE("grid function interpolates linearly and extends linearly") {
    const SpatialGrid g(4.0, 9);
    const GridFunction f = GridFunction::sample(g, [](double x) { return x * x; });

    CHECK(f.value_at_center() == 0.0);
    CHECK(f(2.0) == 4.0);
    // Midpoint of a convex function lands on the chord.
    CHECK(f(2.5) == doctest::Approx(0.5 * (4.0 + 9.0)).epsilon(1e-15));
    // Beyond the boundary the last segment's slope continues.
    const double slope = (16.0 - 9.0) / 1.0;
    CHECK(f(5.5) == doctest::Approx(16.0 + 1.5 * slope).epsilon(1e-15));
    CHECK(f(-5.0) == doctest::Approx(16.0 + 1.0 * (16.0 - 9.0)).epsilon(1e-15));
}

TEST_CASE("grid function requires one value per node") {
    const SpatialGrid g(1.0, 5);
    CHECK_THROWS_AS(GridFunction(g, std::vector<double>(4, 0.0)), std::invalid_argument);
}

TEST_CASE("csv dump is one full-precision row per node") {
    const SpatialGrid g(1.0, 3);
    const GridFunction f(g, {1.0, 0.5, 1.0 / 3.0});
    std::ostringstream out;
    f.to_csv(out);
    CHECK(out.str() == "x,u\n-1,1\n0,0.5\n1,0.33333333333333331\n");
}

TEST_CASE("grid sizing starts at the truncation multiple and honors growth") {
    const SolveConfig cfg;
    const std::array<Driver, 2> bands = {Driver(1.0, 2.0), Driver(0.5, 3.0)};
    const SpatialGrid g = build_grid({2.0, 2}, bands, 1.0, cfg);
    // k * sigma_hi_max * sqrt(T) = 8 * 3 * 1; quadratic growth passes the
    // tail test without widening.
    CHECK(g.x_max() == doctest::Approx(24.0).epsilon(1e-12));
    CHECK(g.n_points() == static_cast<std::size_t>(cfg.n_points));

    const SpatialGrid tight = build_grid({2.0, 2}, {{Driver(1.0, 1.0)}}, 0.25, cfg);
    CHECK(tight.x_max() == doctest::Approx(8.0 * 0.5).epsilon(1e-12));
}

TEST_CASE("grid sizing widens or rejects under extreme growth") {
    const SolveConfig cfg;
    const std::array<Driver, 1> band = {Driver(1.0, 2.0)};
    const SpatialGrid base = build_grid({1.0, 1}, band, 1.0, cfg);
    const SpatialGrid wide = build_grid({1e9, 6}, band, 1.0, cfg);
    CHECK(wide.x_max() >= 2.0 * base.x_max());

    // At the narrowest allowed truncation the doubling budget can run out.
    SolveConfig narrow = cfg;
    narrow.truncation_multiple = 4;
    const std::array<Driver, 1> unit = {Driver(1.0, 1.0)};
    CHECK_THROWS_AS(build_grid({1e300, 6}, unit, 1.0, narrow), std::invalid_argument);
}

}  // TEST_SUITE
