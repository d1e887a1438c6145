#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cellmob/quadrature.hpp"

using namespace cellmob;

TEST_CASE("polynomials and smooth integrands") {
    auto r = integrate([](double x) { return x * x; }, 0.0, 1.0, 1e-12, 1e-12, 50);
    CHECK(r.converged);
    CHECK(r.value == doctest::Approx(1.0 / 3.0).epsilon(1e-14));

    r = integrate([](double x) { return std::exp(-x * x); }, 0.0, 10.0, 1e-12, 1e-12, 100);
    CHECK(r.value == doctest::Approx(std::sqrt(std::numbers::pi) / 2.0).epsilon(1e-12));
}

TEST_CASE("rayleigh density normalizes over a truncated half-line") {
    const double lam = 0.0004;
    auto pdf = [&](double l) {
        return 2.0 * std::numbers::pi * lam * l * std::exp(-lam * std::numbers::pi * l * l);
    };
    auto r = integrate(pdf, 0.0, 8.0 / std::sqrt(lam), 1e-12, 1e-10, 200);
    CHECK(r.converged);
    CHECK(r.value == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("breakpoints let kinked integrands converge") {
    const double c = std::numbers::pi / 4.0;
    auto f = [&](double x) { return std::abs(x - c); };
    const double exact = 0.5 * (c * c + (1.0 - c) * (1.0 - c));
    const double bp[1] = {c};
    auto r = integrate(f, 0.0, 1.0, 1e-14, 1e-14, 50, bp);
    CHECK(r.converged);
    CHECK(r.value == doctest::Approx(exact).epsilon(1e-14));
}

TEST_CASE("subdivision budget is honored and reported") {
    auto f = [](double x) { return std::sin(1000.0 * x); };
    auto r = integrate(f, 0.0, 1.0, 1e-14, 1e-14, 3);
    CHECK_FALSE(r.converged);
    CHECK(r.subdivisions <= 3);
    CHECK(r.error > 0.0);
}

TEST_CASE("empty and inverted intervals integrate to zero") {
    auto f = [](double x) { return x; };
    CHECK(integrate(f, 1.0, 1.0, 1e-10, 1e-10, 10).value == 0.0);
    CHECK(integrate(f, 2.0, 1.0, 1e-10, 1e-10, 10).value == 0.0);
}
