#include <doctest.h>

#include <cmath>

#include "cellmob/boundary.hpp"

using namespace cellmob;

namespace {
constexpr double kLam = 0.0004;
}

TEST_CASE("square lattice length intensity converges to 2/d") {
    const Deployment dep =
        build_lattice(LayoutKind::SquareLattice, 50.0, Region::square(1000.0), {13.0, 29.0});
    const double want = 2.0 / 50.0;
    for (double delta : {0.5, 0.25}) {  // d/100 and below
        const auto est = estimate_length_intensity(dep, AssociationPolicy::nearest(), delta,
                                                   100000, 42);
        CHECK_FALSE(est.fraction_warning);
        CHECK(std::abs(est.mu1_hat - want) <=
              std::max(2.0 * est.ci95_halfwidth, 0.05 * want));
    }
}

TEST_CASE("single-tier ppp length intensity converges to 2 sqrt(lambda)") {
    const Deployment dep = build_ppp_deployment({Tier{kLam, 1.0, 1.0, 4.0}},
                                                Region::square(2000.0), 7);
    const auto est =
        estimate_length_intensity(dep, AssociationPolicy::nearest(), 0.25, 100000, 43);
    const double want = 2.0 * std::sqrt(kLam);
    CHECK(std::abs(est.mu1_hat - want) <= std::max(2.0 * est.ci95_halfwidth, 0.05 * want));
}

TEST_CASE("hex lattice length intensity is 2/(sqrt3 d), 0.9306 of the square value") {
    const double d = hex_side_for_density(kLam);
    const Deployment dep =
        build_lattice(LayoutKind::HexLattice, d, Region::square(1000.0), {3.0, 5.0});
    const double want = 2.0 / (std::sqrt(3.0) * d);
    CHECK(want == doctest::Approx(0.03723).epsilon(2e-4));
    CHECK(want / (2.0 * std::sqrt(kLam)) == doctest::Approx(0.9306).epsilon(1e-4));
    const auto est =
        estimate_length_intensity(dep, AssociationPolicy::nearest(), 0.3, 100000, 44);
    CHECK(std::abs(est.mu1_hat - want) <= std::max(2.0 * est.ci95_halfwidth, 0.05 * want));
}

TEST_CASE("square lattice and equal-density ppp agree within joint confidence intervals") {
    const Deployment sq =
        build_lattice(LayoutKind::SquareLattice, 50.0, Region::square(1000.0), {13.0, 29.0});
    const Deployment ppp = build_ppp_deployment({Tier{kLam, 1.0, 1.0, 4.0}},
                                                Region::square(2000.0), 7);
    const auto a = estimate_length_intensity(sq, AssociationPolicy::nearest(), 0.25, 100000, 1);
    const auto b = estimate_length_intensity(ppp, AssociationPolicy::nearest(), 0.25, 100000, 2);
    CHECK(std::abs(a.mu1_hat - b.mu1_hat) <= a.ci95_halfwidth + b.ci95_halfwidth + 0.002);
}

TEST_CASE("oversized delta_d sets the boundary-fraction warning") {
    const Deployment dep =
        build_lattice(LayoutKind::SquareLattice, 50.0, Region::square(1000.0), {13.0, 29.0});
    const auto est =
        estimate_length_intensity(dep, AssociationPolicy::nearest(), 20.0, 10000, 9);
    CHECK(est.fraction_warning);
}

TEST_CASE("estimator input validation") {
    const Deployment dep =
        build_lattice(LayoutKind::SquareLattice, 50.0, Region::square(1000.0), {0.0, 0.0});
    CHECK_THROWS_AS(
        estimate_length_intensity(dep, AssociationPolicy::nearest(), 30.0, 10000, 1),
        std::invalid_argument);  // delta_d beyond mean cell radius
    CHECK_THROWS_AS(estimate_length_intensity(dep, AssociationPolicy::nearest(), 0.5, 500, 1),
                    std::invalid_argument);  // too few samples
    CHECK_THROWS_AS(estimate_length_intensity(dep, AssociationPolicy::nearest(), -0.5, 10000, 1),
                    std::invalid_argument);
}

TEST_CASE("serial reference matches the parallel kernel bit for bit") {
    const Deployment dep = build_ppp_deployment({Tier{kLam, 1.0, 1.0, 4.0}},
                                                Region::square(1500.0), 21);
    const auto par =
        estimate_length_intensity(dep, AssociationPolicy::nearest(), 0.25, 20000, 5);
    const auto ser =
        estimate_length_intensity_serial(dep, AssociationPolicy::nearest(), 0.25, 20000, 5);
    CHECK(par.mu1_hat == ser.mu1_hat);
    CHECK(par.ci95_halfwidth == ser.ci95_halfwidth);
    CHECK(par.fraction_warning == ser.fraction_warning);
}

TEST_CASE("multi-tier weighted cells have a larger boundary intensity than either tier alone") {
    std::vector<Tier> two = {Tier{0.0004, 1.0, 1.0, 4.0}, Tier{0.001, 0.2, 4.0, 4.0}};
    const Deployment dep = build_ppp_deployment(two, Region::square(1500.0), 3);
    const auto est =
        estimate_length_intensity(dep, AssociationPolicy::biased_power(), 0.25, 50000, 6);
    CHECK(est.mu1_hat > 2.0 * std::sqrt(0.001));
    CHECK(est.mu1_hat < 2.0 * std::sqrt(0.0004) + 2.0 * std::sqrt(0.001) + 0.01);
}
