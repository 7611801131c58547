#include <cmath>

#include "doctest.h"
#include "gconv/quadrature.hpp"
#include "helpers.hpp"

using namespace gconv;

TEST_SUITE("quadrature") {

TEST_CASE("rule integrates the Gaussian weight exactly") {
    const QuadratureRule rule(64);
    REQUIRE(rule.order() == 64);
    double mass = 0.0;
    double mean = 0.0;
    for (std::size_t i = 0; i < rule.order(); ++i) {
        mass += rule.weights()[i];
        mean += rule.weights()[i] * rule.nodes()[i];
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(std::fabs(mean) <= 1e-13);
}

TEST_CASE("polynomial moments are exact up to the rule degree") {
    const QuadratureRule rule(64);
    const double m2 = rule.expectation([](double z) { return z * z; }, 0.0, 1.0);
    const double m4 = rule.expectation([](double z) { return z * z * z * z; }, 0.0, 1.0);
    const double m6 =
        rule.expectation([](double z) { return z * z * z * z * z * z; }, 0.0, 1.0);
    CHECK(m2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m4 == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(m6 == doctest::Approx(15.0).epsilon(1e-12));
}

TEST_CASE("mean and scale shifts are honored") {
    const QuadratureRule rule(64);
    const double mean = rule.expectation([](double z) { return z; }, 1.75, 3.0);
    const double var = rule.expectation([](double z) { return (z - 1.75) * (z - 1.75); },
                                        1.75, 3.0);
    CHECK(mean == doctest::Approx(1.75).epsilon(1e-13));
    CHECK(var == doctest::Approx(9.0).epsilon(1e-12));
}

TEST_CASE("smooth integrands converge at low order") {
    // E[cos(Z)] = exp(-1/2); E[sin(Z)] = 0 by symmetry.
    const double c = gaussian_oracle([](double x) { return std::cos(x); }, 1.0, 1.0, 0.0, 64);
    const double s = gaussian_oracle([](double x) { return std::sin(x); }, 1.0, 1.0, 0.0, 64);
    CHECK(c == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
    CHECK(std::fabs(s) <= 1e-13);
}

TEST_CASE("oracle composes sigma, horizon and start point") {
    // E[(x + sigma sqrt(t) Z)^2] = x^2 + sigma^2 t.
    const double v = gaussian_oracle([](double x) { return x * x; }, 2.0, 0.25, 1.5, 64);
    CHECK(v == doctest::Approx(1.5 * 1.5 + 4.0 * 0.25).epsilon(1e-12));
}

TEST_CASE("kinked integrands approach their closed forms as order grows") {
    const auto call0 = [](double x) { return std::max(x, 0.0); };
    const double coarse = gaussian_oracle(call0, 2.0, 1.0, 0.0, 256);
    const double fine = gaussian_oracle(call0, 2.0, 1.0, 0.0, 2048);
    const double err_coarse = std::fabs(coarse - testing::kCallK0Sigma2);
    const double err_fine = std::fabs(fine - testing::kCallK0Sigma2);
    CHECK(err_fine <= 1e-3);
    CHECK(err_fine < err_coarse);

    const double w3 = gaussian_oracle([](double x) { return std::fabs(x * x * x); }, 1.0,
                                      1.0, 0.0, 2048);
    CHECK(w3 == doctest::Approx(testing::kAbsZCubed).epsilon(1e-5));
}

}  // TEST_SUITE
