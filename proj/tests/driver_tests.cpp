#include <array>
#include <stdexcept>

#include "doctest.h"
#include "gconv/driver.hpp"

using namespace gconv;

TEST_SUITE("driver") {

TEST_CASE("G splits curvature at the band edges") {
    const Driver d(1.0, 2.0);
    CHECK(eval_G(d, 2.0) == 4.0);    // 0.5 * sigma_hi^2 * 2
    CHECK(eval_G(d, -2.0) == -1.0);  // 0.5 * sigma_lo^2 * (-2)
    CHECK(eval_G(d, 0.0) == 0.0);
}

TEST_CASE("G is positively homogeneous and subadditive") {
    const Driver d(0.5, 3.0);
    const double alphas[] = {-3.0, -1.25, -0.5, 0.0, 0.75, 2.0, 4.0};
    for (const double a : alphas) {
        CHECK(eval_G(d, 2.0 * a) == 2.0 * eval_G(d, a));
        for (const double b : alphas) {
            CHECK(eval_G(d, a + b) <= eval_G(d, a) + eval_G(d, b) + 1e-12);
        }
    }
}

TEST_CASE("a wider band dominates G pointwise") {
    const Driver narrow(1.0, 2.0);
    const Driver wide(0.5, 3.0);
    for (const double a : {-4.0, -1.0, 0.0, 1.0, 4.0}) {
        CHECK(eval_G(wide, a) >= eval_G(narrow, a));
    }
}

TEST_CASE("band construction rejects invalid intervals") {
    CHECK_THROWS_AS(Driver(2.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(Driver(-1.0, 1.0), std::invalid_argument);
    CHECK_NOTHROW(Driver(0.0, 0.0));
    CHECK_NOTHROW(Driver(1.5, 1.5));
}

TEST_CASE("convolution intersects bands") {
    const DriverConvolution c = convolve_drivers(Driver(1.0, 2.0), Driver(1.5, 3.0));
    REQUIRE(c.is_proper());
    CHECK(c.driver() == Driver(1.5, 2.0));

    const DriverConvolution nested = convolve_drivers(Driver(1.0, 2.0), Driver(0.5, 3.0));
    REQUIRE(nested.is_proper());
    CHECK(nested.driver() == Driver(1.0, 2.0));

    // A touching pair is still proper: the intersection is one point.
    const DriverConvolution touch = convolve_drivers(Driver(1.0, 2.0), Driver(2.0, 3.0));
    REQUIRE(touch.is_proper());
    CHECK(touch.driver() == Driver(2.0, 2.0));
}

TEST_CASE("disjoint bands convolve to the degenerate branch") {
    const DriverConvolution c = convolve_drivers(Driver(1.0, 1.5), Driver(2.0, 3.0));
    CHECK(c.is_degenerate());
    CHECK_FALSE(c.is_proper());
    CHECK_THROWS_AS(c.driver(), std::logic_error);
}

TEST_CASE("n-ary convolution folds to the total intersection in any order") {
    const std::array<Driver, 3> bands = {Driver(1.0, 3.0), Driver(2.0, 4.0),
                                         Driver(0.0, 2.5)};
    const DriverConvolution c = convolve_many(bands);
    REQUIRE(c.is_proper());
    CHECK(c.driver() == Driver(2.0, 2.5));

    const std::array<Driver, 3> reversed = {bands[2], bands[1], bands[0]};
    CHECK(convolve_many(reversed) == c);

    const std::array<Driver, 3> gap = {Driver(1.0, 1.5), Driver(2.0, 3.0),
                                       Driver(0.0, 9.0)};
    CHECK(convolve_many(gap).is_degenerate());

    CHECK_THROWS_AS(convolve_many({}), std::invalid_argument);
}

TEST_CASE("containment follows interval order") {
    CHECK(Driver(1.0, 2.0).contained_in(Driver(0.5, 3.0)));
    CHECK(Driver(1.0, 2.0).contained_in(Driver(1.0, 2.0)));
    CHECK_FALSE(Driver(0.5, 3.0).contained_in(Driver(1.0, 2.0)));
    CHECK_FALSE(Driver(1.0, 4.0).contained_in(Driver(1.5, 3.0)));
}

TEST_CASE("band text form round-trips") {
    for (const char* text : {"1,2", "0.5,3", "1.25,1.25", "0,2.5"}) {
        const Driver d = parse_driver(text);
        CHECK(parse_driver(format_driver(d)) == d);
    }
    CHECK(parse_driver(" 1 , 2 ") == Driver(1.0, 2.0));
}

TEST_CASE("malformed band text is rejected") {
    for (const char* text : {"", "1", "1,", ",2", "a,b", "2,1", "-1,1", "1,2,3", "1;2"}) {
        CHECK_THROWS_AS(parse_driver(text), std::invalid_argument);
    }
}

}  // TEST_SUITE
