#include "porous/quadrature.hpp"

#include <doctest.h>

#include <cmath>

using namespace porous;

TEST_CASE("gauss rule integrates polynomials exactly") {
    // order n is exact through degree 2n-1
    auto poly = [](double x) { return 5.0 * x * x * x * x * x - x * x + 3.0; };
    double got = integrate_gauss(poly, -1.0, 2.0, 3);
    double want = 5.0 / 6.0 * (64.0 - 1.0) - (8.0 + 1.0) / 3.0 + 3.0 * 3.0;
    CHECK(got == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("gauss rule weights sum to interval length") {
    const GaussRule& r = gauss_rule(32);
    double s = 0.0;
    for (double w : r.weights) s += w;
    CHECK(s == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("adaptive quadrature handles near-singular integrands") {
    double got = integrate_adaptive([](double x) { return std::log(x); }, 0.0, 1.0, 1e-10);
    CHECK(got == doctest::Approx(-1.0).epsilon(1e-8));

    got = integrate_adaptive([](double x) { return 1.0 / std::sqrt(x); }, 1e-12, 1.0, 1e-10);
    CHECK(got == doctest::Approx(2.0 - 2e-6).epsilon(1e-7));
}

TEST_CASE("adaptive quadrature respects seed splits") {
    // kinked integrand: |x - 0.3|
    auto f = [](double x) { return std::abs(x - 0.3); };
    double splits[] = {0.3};
    double got = integrate_adaptive(f, 0.0, 1.0, 1e-12, 0.0, splits);
    CHECK(got == doctest::Approx(0.5 * 0.09 + 0.5 * 0.49).epsilon(1e-13));
}

TEST_CASE("2d adaptive quadrature on a gaussian") {
    double got = integrate_adaptive_2d(
        [](double x, double y) { return std::exp(-x * x - y * y); }, -6.0, 6.0, -6.0, 6.0,
        1e-9);
    CHECK(got == doctest::Approx(pi).epsilon(1e-8));
}

TEST_CASE("disk rule integrates mass and moments") {
    auto nodes = disk_rule({0.5, -0.25}, 0.75, 12, 32);
    double mass = 0.0, mx = 0.0;
    for (const auto& n : nodes) {
        mass += n.w;
        mx += n.w * n.pos.x;
    }
    CHECK(mass == doctest::Approx(pi * 0.75 * 0.75).epsilon(1e-13));
    CHECK(mx / mass == doctest::Approx(0.5).epsilon(1e-12));
}
