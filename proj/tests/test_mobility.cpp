#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "cellmob/mobility.hpp"
#include "cellmob/quadrature.hpp"
#include "test_util.hpp"

using namespace cellmob;

namespace {
constexpr double kPi = std::numbers::pi;

void check_chain(const Trajectory& t) {
    for (std::size_t i = 0; i + 1 < t.segments.size(); ++i) {
        const Vec2 e = t.segments[i].end();
        CHECK(e.x == doctest::Approx(t.segments[i + 1].start.x).epsilon(1e-12));
        CHECK(e.y == doctest::Approx(t.segments[i + 1].start.y).epsilon(1e-12));
    }
}

void check_time_length(const Trajectory& t) {
    for (const Segment& s : t.segments) {
        CHECK(std::abs(s.flight_time * s.velocity - s.length) <=
              1e-9 * std::max(1.0, s.length));
        CHECK(s.length >= 0.0);
        if (s.length > 0.0) CHECK(s.velocity > 0.0);
        CHECK(s.pause >= 0.0);
    }
}
}  // namespace

TEST_CASE("free-plane models chain exactly and respect T*V = L") {
    const MrdConfig mrd{0.0004, VelocitySpec::constant(10.0), 1.5};
    const LevyConfig levy{1.5, 10.0, 1.2, 2.0, 1.0, 0.5, 5000.0, 100.0};
    const GaussMarkovConfig gm{0.5, 10.0, 1.0, 1.0, {}};
    const Drone3dConfig drone{10.0};
    for (const ModelConfig cfg :
         {ModelConfig{mrd}, ModelConfig{levy}, ModelConfig{gm}, ModelConfig{drone}}) {
        const Trajectory t = generate_trajectory(cfg, 300, {5.0, -3.0}, 99);
        REQUIRE(t.segments.size() == 300);
        CHECK(t.segments.front().start == Vec2{5.0, -3.0});
        check_chain(t);
        check_time_length(t);
    }
}

TEST_CASE("rwp stays in its region and chains") {
    RwpConfig rwp{Region::rectangle(400.0, 300.0), 2.0, 8.0, 0.5};
    const Trajectory t = generate_trajectory(ModelConfig{rwp}, 500, {0.0, 0.0}, 7);
    check_chain(t);
    check_time_length(t);
    for (const Segment& s : t.segments) {
        CHECK(rwp.region.contains(s.start));
        CHECK(rwp.region.contains(s.end()));
        CHECK(s.pause == 0.5);
        CHECK(s.velocity >= 2.0);
        CHECK(s.velocity <= 8.0);
    }
    CHECK_THROWS_AS(generate_trajectory(ModelConfig{rwp}, 10, {1000.0, 0.0}, 7),
                    std::invalid_argument);
}

TEST_CASE("reflection keeps confined random walk inside and chains exactly") {
    RandomWalkConfig rw;
    rw.v_min = 1.0;
    rw.v_max = 9.0;
    rw.mean_v = 5.0;
    rw.sigma_v = 2.0;
    rw.fixed_T = 30.0;  // long flights force wall hits
    rw.region = Region::rectangle(100.0, 80.0);
    rw.boundary = BoundaryMode::Reflect;
    const Trajectory t = generate_trajectory(ModelConfig{rw}, 400, {0.0, 0.0}, 3);
    check_chain(t);
    check_time_length(t);
    for (const Segment& s : t.segments) {
        CHECK(rw.region->dilated(1e-9).contains(s.start));
        CHECK(rw.region->dilated(1e-9).contains(s.end()));
    }
}

TEST_CASE("wrap-around teleports across the region (border effect)") {
    RandomWalkConfig rw;
    rw.v_min = 1.0;
    rw.v_max = 9.0;
    rw.mean_v = 5.0;
    rw.sigma_v = 2.0;
    rw.fixed_T = 30.0;
    rw.region = Region::rectangle(100.0, 80.0);
    rw.boundary = BoundaryMode::Wrap;
    const Trajectory t = generate_trajectory(ModelConfig{rw}, 400, {0.0, 0.0}, 3);
    check_time_length(t);
    bool wrapped = false;
    for (std::size_t i = 0; i + 1 < t.segments.size(); ++i) {
        const Vec2 e = t.segments[i].end();
        const Vec2 s = t.segments[i + 1].start;
        const double dx = std::abs(e.x - s.x);
        const double dy = std::abs(e.y - s.y);
        // chained exactly, or teleported the full width/height
        const bool chained = dx < 1e-9 && dy < 1e-9;
        const bool jump = (std::abs(dx - 100.0) < 1e-9 || dx < 1e-9) &&
                          (std::abs(dy - 80.0) < 1e-9 || dy < 1e-9);
        CHECK((chained || jump));
        if (!chained) wrapped = true;
        // wall landings are derived points, allow one ulp of overshoot
        CHECK(rw.region->dilated(1e-9).contains(s));
    }
    CHECK(wrapped);
}

TEST_CASE("gauss-markov memory limits") {
    GaussMarkovConfig gm{1.0, 10.0, 2.0, 1.0, {}};
    const Trajectory t = generate_trajectory(ModelConfig{gm}, 50, {0.0, 0.0}, 5);
    for (const Segment& s : t.segments) CHECK(s.velocity == t.segments[0].velocity);

    // alpha = 0: memoryless, velocities are drift + sigma * w
    GaussMarkovConfig gm0{0.0, 10.0, 0.5, 1.0, {}};
    const Trajectory t0 = generate_trajectory(ModelConfig{gm0}, 4000, {0.0, 0.0}, 6);
    std::vector<double> v;
    for (const Segment& s : t0.segments) v.push_back(s.velocity);
    CHECK(std::abs(testutil::mean(v) - 10.0) < 0.05);
    CHECK(std::abs(std::sqrt(testutil::variance(v)) - 0.5) < 0.05);
}

TEST_CASE("gauss-markov flips direction at the region boundary") {
    GaussMarkovConfig gm{0.9, 5.0, 0.1, 1.0, Region::rectangle(60.0, 60.0)};
    const Trajectory t = generate_trajectory(ModelConfig{gm}, 2000, {0.0, 0.0}, 8);
    for (const Segment& s : t.segments) {
        CHECK(gm.region->contains(s.start));
        CHECK(gm.region->contains(s.end()));
    }
}

TEST_CASE("levy couples flight time to length exactly") {
    LevyConfig levy{1.5, 10.0, 1.2, 0.0, 2.0, 0.4, 5000.0, 0.0};
    const Trajectory t = generate_trajectory(ModelConfig{levy}, 500, {0.0, 0.0}, 42);
    for (const Segment& s : t.segments) {
        CHECK(s.length <= 5000.0);
        CHECK(s.length > 0.0);
        const double want_t = 2.0 * std::pow(s.length, 1.0 - 0.4);
        CHECK(s.flight_time == doctest::Approx(want_t).epsilon(1e-12));
        CHECK(s.pause == 0.0);
    }
}

TEST_CASE("smooth random ramps are piecewise linear with bounded acceleration") {
    SmoothRandomConfig sm;
    sm.v_max = 10.0;
    sm.preferred = {{5.0, 0.3}, {2.5, 0.2}};
    sm.event_rate = 0.25;
    sm.a_max = 1.0;
    sm.segment_dt = 0.25;
    const Trajectory t = generate_trajectory(ModelConfig{sm}, 3000, {0.0, 0.0}, 11);
    check_chain(t);
    check_time_length(t);
    for (std::size_t i = 0; i + 1 < t.segments.size(); ++i) {
        const Segment& a = t.segments[i];
        const Segment& b = t.segments[i + 1];
        // during a ramp both segments span segment_dt and the speed step is a*dt
        if (a.flight_time == sm.segment_dt && b.flight_time == sm.segment_dt &&
            a.velocity != b.velocity) {
            CHECK(std::abs(b.velocity - a.velocity) <= sm.a_max * sm.segment_dt + 1e-9);
        }
        CHECK(a.velocity > 0.0);
        CHECK(a.velocity <= sm.v_max + 1e-12);
    }
}

TEST_CASE("markovian waypoints follow the chain and the velocity rule") {
    MarkovianWaypointConfig mw;
    mw.waypoints = {{0.0, 0.0}, {100.0, 0.0}, {0.0, 500.0}};
    mw.transition = {{0.0, 1.0, 0.0}, {0.2, 0.3, 0.5}, {1.0, 0.0, 0.0}};
    mw.velocity = VelocitySpec::constant(1.5);
    mw.fast_threshold = 300.0;
    mw.fast_velocity = 20.0;
    mw.start_index = 0;
    const Trajectory t = generate_trajectory(ModelConfig{mw}, 400, {0.0, 0.0}, 13);
    check_chain(t);
    check_time_length(t);
    for (const Segment& s : t.segments) {
        if (s.length >= 300.0)
            CHECK(s.velocity == 20.0);
        else if (s.length > 0.0)
            CHECK(s.velocity == 1.5);
    }
}

TEST_CASE("trajectory generation is deterministic in the seed") {
    const MrdConfig mrd{0.0004, VelocitySpec::uniform(5.0, 15.0), 0.5};
    const Trajectory a = generate_trajectory(ModelConfig{mrd}, 200, {0.0, 0.0}, 1234);
    const Trajectory b = generate_trajectory(ModelConfig{mrd}, 200, {0.0, 0.0}, 1234);
    const Trajectory c = generate_trajectory(ModelConfig{mrd}, 200, {0.0, 0.0}, 1235);
    REQUIRE(a.segments.size() == b.segments.size());
    bool all_equal = true;
    for (std::size_t i = 0; i < a.segments.size(); ++i) {
        CHECK(a.segments[i].start == b.segments[i].start);
        CHECK(a.segments[i].velocity == b.segments[i].velocity);
        all_equal = all_equal && a.segments[i].length == c.segments[i].length;
    }
    CHECK_FALSE(all_equal);
}

TEST_CASE("config validation rejects bad parameters") {
    CHECK_THROWS_AS(generate_trajectory(ModelConfig{MrdConfig{-1.0, VelocitySpec::constant(1), 0}},
                                        10, {0, 0}, 1),
                    std::invalid_argument);
    RandomWalkConfig rw;
    rw.v_min = 5.0;
    rw.v_max = 1.0;  // inverted
    rw.sigma_v = 1.0;
    rw.mean_v = 3.0;
    CHECK_THROWS_AS(generate_trajectory(ModelConfig{rw}, 10, {0, 0}, 1), std::invalid_argument);
    SmoothRandomConfig sm;
    sm.v_max = 10.0;
    sm.preferred = {{5.0, 0.7}, {2.5, 0.4}};  // masses sum above 1
    CHECK_THROWS_AS(generate_trajectory(ModelConfig{sm}, 10, {0, 0}, 1), std::invalid_argument);
    MarkovianWaypointConfig mw;
    mw.waypoints = {{0, 0}, {1, 0}};
    mw.transition = {{0.5, 0.4}, {0.5, 0.5}};  // row does not sum to 1
    mw.velocity = VelocitySpec::constant(1.0);
    CHECK_THROWS_AS(generate_trajectory(ModelConfig{mw}, 10, {0, 0}, 1), std::invalid_argument);
    CHECK_THROWS_AS(generate_trajectory(ModelConfig{MrdConfig{0.0004, VelocitySpec::constant(1), 0}},
                                        0, {0, 0}, 1),
                    std::invalid_argument);
}

// ---- closed-form densities ------------------------------------------------------

TEST_CASE("rwp flight-length pdf on the unit square") {
    const Region sq = Region::square(1.0);
    CHECK(rwp_flight_length_pdf(0.5, sq) == doctest::Approx(kPi - 1.75).epsilon(1e-12));
    CHECK(rwp_flight_length_pdf(0.5, sq) == doctest::Approx(1.3916).epsilon(1e-4));
    CHECK(rwp_flight_length_pdf(-0.1, sq) == 0.0);
    CHECK(rwp_flight_length_pdf(1.5, sq) == 0.0);  // beyond sqrt(2)
}

TEST_CASE("rwp flight-length pdf integrates to one and is continuous at branch points") {
    for (const Region r : {Region::rectangle(2.0, 1.0), Region::square(1.0), Region::disk(1.0)}) {
        double kinks[2] = {0.0, 0.0};
        if (r.kind == Region::Kind::Rectangle) {
            kinks[0] = std::min(r.width, r.height);
            kinks[1] = std::max(r.width, r.height);
        }
        const auto total = integrate([&](double l) { return rwp_flight_length_pdf(l, r); }, 0.0,
                                     r.diameter(), 1e-10, 1e-9, 400, kinks);
        CHECK(total.value == doctest::Approx(1.0).epsilon(1e-6));
    }
    const Region rect = Region::rectangle(2.0, 1.0);
    for (double b : {1.0, 2.0}) {
        const double below = rwp_flight_length_pdf(b - 1e-9, rect);
        const double above = rwp_flight_length_pdf(b + 1e-9, rect);
        CHECK(std::abs(below - above) < 1e-6);
    }
    // swapped rectangle dimensions are normalized
    CHECK(rwp_flight_length_pdf(0.7, Region::rectangle(1.0, 2.0)) ==
          doctest::Approx(rwp_flight_length_pdf(0.7, rect)).epsilon(1e-14));
}

TEST_CASE("rwp disk pdf vanishes at the diameter") {
    const Region d = Region::disk(1.0);
    CHECK(rwp_flight_length_pdf(2.0 - 1e-9, d) == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(rwp_flight_length_pdf(2.0, d) == 0.0);
}

TEST_CASE("random-walk flight-length pdf: truncated gaussian") {
    RandomWalkConfig rw;
    rw.v_min = 2.0;
    rw.v_max = 8.0;
    rw.mean_v = 5.0;
    rw.sigma_v = 1.5;
    rw.fixed_T = 3.0;
    // symmetric about E[v] * T
    const double c = rw.mean_v * rw.fixed_T;
    for (double off : {1.0, 3.0, 6.0})
        CHECK(rw_flight_length_pdf(c - off, rw) ==
              doctest::Approx(rw_flight_length_pdf(c + off, rw)).epsilon(1e-12));
    const auto total = integrate([&](double l) { return rw_flight_length_pdf(l, rw); },
                                 rw.v_min * rw.fixed_T, rw.v_max * rw.fixed_T, 1e-10, 1e-9, 200);
    CHECK(total.value == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(rw_flight_length_pdf(rw.v_min * rw.fixed_T - 0.01, rw) == 0.0);

    // huge sigma approaches the uniform density 1/((v_max - v_min) T)
    RandomWalkConfig wide = rw;
    wide.sigma_v = 1000.0 * (rw.v_max - rw.v_min);
    const double uniform = 1.0 / ((rw.v_max - rw.v_min) * rw.fixed_T);
    for (double l : {7.0, 15.0, 23.0})
        CHECK(rw_flight_length_pdf(l, wide) == doctest::Approx(uniform).epsilon(2e-3));

    RandomWalkConfig bad = rw;
    bad.sigma_v = -1.0;
    CHECK_THROWS_AS(rw_flight_length_pdf(10.0, bad), std::invalid_argument);
}

TEST_CASE("mrd flight-time pdf: constant velocity branch") {
    MrdConfig cfg{0.0004, VelocitySpec::constant(10.0), 0.0};
    const auto total = integrate([&](double t) { return mrd_flight_time_pdf(t, cfg); }, 0.0,
                                 40.0, 1e-10, 1e-9, 400);
    CHECK(total.value == doctest::Approx(1.0).epsilon(1e-6));
    // mode at 1/(V sqrt(2 pi lambda))
    const double mode = 1.0 / (10.0 * std::sqrt(2.0 * kPi * 0.0004));
    const double fm = mrd_flight_time_pdf(mode, cfg);
    CHECK(fm > mrd_flight_time_pdf(mode * 0.9, cfg));
    CHECK(fm > mrd_flight_time_pdf(mode * 1.1, cfg));
    // numeric derivative vanishes at the mode
    const double h = 1e-6 * mode;
    const double deriv =
        (mrd_flight_time_pdf(mode + h, cfg) - mrd_flight_time_pdf(mode - h, cfg)) / (2.0 * h);
    CHECK(std::abs(deriv) < 1e-6 * fm / mode);
}

TEST_CASE("mrd flight-time pdf: uniform velocity branch normalizes and has a finite limit") {
    MrdConfig cfg{0.0004, VelocitySpec::uniform(5.0, 15.0), 0.0};
    const auto total = integrate([&](double t) { return mrd_flight_time_pdf(t, cfg); }, 0.0,
                                 60.0, 1e-10, 1e-9, 400);
    CHECK(total.value == doctest::Approx(1.0).epsilon(1e-6));
    // t -> 0 behaves like (2 pi lambda t / 3)(v0^2 + v0 v1 + v1^2)
    const double slope = 2.0 * kPi * 0.0004 / 3.0 * (25.0 + 75.0 + 225.0);
    for (double t : {1e-8, 1e-6, 1e-4})
        CHECK(mrd_flight_time_pdf(t, cfg) == doctest::Approx(slope * t).epsilon(1e-4));
    CHECK(mrd_flight_time_pdf(0.0, cfg) == 0.0);
    // continuity across the series/erf switch
    const double t_switch = std::sqrt(1e-3 / (0.0004 * kPi)) / 15.0;
    CHECK(mrd_flight_time_pdf(t_switch - 1e-9, cfg) ==
          doctest::Approx(mrd_flight_time_pdf(t_switch + 1e-9, cfg)).epsilon(1e-7));
}

TEST_CASE("mrd flight-length pdf is the normalizable Rayleigh form") {
    const double lam = 0.0004;
    const auto total = integrate([&](double l) { return mrd_flight_length_pdf(l, lam); }, 0.0,
                                 8.0 / std::sqrt(lam), 1e-10, 1e-9, 400);
    CHECK(total.value == doctest::Approx(1.0).epsilon(1e-8));
    // mean flight length 1/(2 sqrt(lambda)) = 25 m, via the quadrature oracle
    const auto mean = integrate([&](double l) { return l * mrd_flight_length_pdf(l, lam); },
                                0.0, 8.0 / std::sqrt(lam), 1e-10, 1e-9, 400);
    CHECK(mean.value == doctest::Approx(25.0).epsilon(1e-8));
}

TEST_CASE("mrd empirical mean flight length matches the quadrature oracle") {
    const double lam = 0.0004;
    const auto oracle = integrate([&](double l) { return l * mrd_flight_length_pdf(l, lam); },
                                  0.0, 8.0 / std::sqrt(lam), 1e-10, 1e-9, 400);
    MrdConfig cfg{lam, VelocitySpec::constant(10.0), 0.0};
    const std::size_t n = 100000;
    const Trajectory t = generate_trajectory(ModelConfig{cfg}, n, {0.0, 0.0}, 2024);
    std::vector<double> lengths;
    lengths.reserve(n);
    for (const Segment& s : t.segments) lengths.push_back(s.length);
    const double sd = 25.0 * std::sqrt(4.0 / kPi - 1.0);
    CHECK(std::abs(testutil::mean(lengths) - oracle.value) <
          3.0 * sd / std::sqrt(double(n)));
}

TEST_CASE("rwp empirical mean transition length on the unit square is about 0.5214") {
    const Region sq = Region::square(1.0);
    const auto oracle = integrate([&](double l) { return l * rwp_flight_length_pdf(l, sq); },
                                  0.0, std::sqrt(2.0), 1e-12, 1e-10, 400,
                                  std::vector<double>{1.0});
    CHECK(oracle.value == doctest::Approx(0.5214).epsilon(2e-4));
    RwpConfig cfg{sq, 0.5, 1.5, 0.0};
    const std::size_t n = 100000;
    const Trajectory t = generate_trajectory(ModelConfig{cfg}, n, {0.25, 0.25}, 17);
    std::vector<double> lengths;
    for (const Segment& s : t.segments) lengths.push_back(s.length);
    const double sd = std::sqrt(testutil::variance(lengths));
    CHECK(std::abs(testutil::mean(lengths) - oracle.value) < 3.0 * sd / std::sqrt(double(n)));
}

TEST_CASE("drone step marginals") {
    const double vbar = 10.0;
    Rng rng(55);
    const std::size_t n = 100000;
    double sum_v = 0.0, sum_sinphi = 0.0, sum_abs_sintheta = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Drone3dStep s = sample_drone_step(vbar, rng);
        CHECK(s.velocity >= 0.0);
        CHECK(s.velocity <= 4.0 / 3.0 * vbar);
        CHECK(s.elevation >= 0.0);
        CHECK(s.elevation <= kPi);
        sum_v += s.velocity;
        sum_sinphi += std::sin(s.elevation);
        sum_abs_sintheta += std::abs(std::sin(s.azimuth));
    }
    CHECK(std::abs(sum_v / n - vbar) / vbar < 0.01);
    CHECK(std::abs(sum_sinphi / n - kPi / 4.0) / (kPi / 4.0) < 0.01);
    CHECK(std::abs(sum_abs_sintheta / n - 2.0 / kPi) / (2.0 / kPi) < 0.01);
    // density shapes
    CHECK(drone_speed_pdf(5.0, vbar) == doctest::Approx(81.0 * 25.0 / 64000.0));
    CHECK(drone_speed_pdf(14.0, vbar) == 0.0);
    CHECK(drone_elevation_pdf(kPi / 2.0) == doctest::Approx(0.5));
}

TEST_CASE("rwp direction statistics on a disk: 12.5% boundary-ward, 61.4% center-ward") {
    const auto probs = rwp_direction_pdf_check(1.0, 200000, 31);
    // boundary-ward (positive outward radial component) is exactly 1/8
    CHECK(std::abs(probs.boundary_ward - 0.125) < 3.0 * std::sqrt(0.125 * 0.875 / 200000.0));

    // center-ward oracle: quadrature of the wedge-area fraction within pi/4
    // of the inward direction, averaged over the uniform origin
    auto wedge = [](double x) {
        return integrate(
                   [&](double phi) {
                       const double reach =
                           x * std::cos(phi) + std::sqrt(1.0 - x * x * std::sin(phi) * std::sin(phi));
                       return 0.5 * reach * reach / kPi;
                   },
                   -kPi / 4.0, kPi / 4.0, 1e-12, 1e-10, 100)
            .value;
    };
    const double oracle =
        integrate([&](double x) { return 2.0 * x * wedge(x); }, 0.0, 1.0, 1e-11, 1e-9, 200).value;
    CHECK(std::abs(oracle - 0.614) < 2e-3);  // the reported 61.4%
    CHECK(std::abs(probs.center_ward - oracle) <
          3.0 * std::sqrt(oracle * (1.0 - oracle) / 200000.0));
}

TEST_CASE("rwp leg endpoints are uniform on the disk") {
    // E[r^2] of a uniform point on the unit disk is 1/2
    const Region disk = Region::disk(1.0);
    RwpConfig cfg{disk, 0.5, 1.5, 0.0};
    const Trajectory t = generate_trajectory(ModelConfig{cfg}, 50000, {0.0, 0.0}, 77);
    std::vector<double> r2;
    for (const Segment& s : t.segments) r2.push_back(s.end().norm2());
    CHECK(std::abs(testutil::mean(r2) - 0.5) < 0.005);
}

TEST_CASE("moments of the tractable models") {
    MrdConfig mrd{0.0004, VelocitySpec::constant(10.0), 2.0};
    const MobilityMoments m = mobility_moments(ModelConfig{mrd});
    CHECK(m.mean_speed == doctest::Approx(10.0));
    CHECK(m.mean_flight_time == doctest::Approx(2.5));  // 25 m / 10 m/s
    CHECK(m.mean_pause == doctest::Approx(2.0));

    MrdConfig mrdu{0.0004, VelocitySpec::uniform(5.0, 15.0), 0.0};
    const MobilityMoments mu = mobility_moments(ModelConfig{mrdu});
    CHECK(mu.mean_flight_time ==
          doctest::Approx(25.0 * std::log(3.0) / 10.0).epsilon(1e-12));

    RandomWalkConfig rw;
    rw.v_min = 2.0;
    rw.v_max = 8.0;
    rw.mean_v = 5.0;
    rw.sigma_v = 1.5;
    rw.fixed_T = 3.0;
    const MobilityMoments mrw = mobility_moments(ModelConfig{rw});
    // truncated-normal mean oracle by quadrature
    const auto num = integrate(
        [&](double v) { return v * rw_flight_length_pdf(v * rw.fixed_T, rw) * rw.fixed_T; },
        rw.v_min, rw.v_max, 1e-12, 1e-10, 200);
    CHECK(mrw.mean_speed == doctest::Approx(num.value).epsilon(1e-8));
    CHECK(mrw.mean_flight_time == doctest::Approx(3.0));

    const MobilityMoments md = mobility_moments(ModelConfig{Drone3dConfig{10.0}});
    CHECK(md.mean_speed == doctest::Approx(10.0 * kPi / 4.0));

    CHECK_THROWS_AS(
        mobility_moments(ModelConfig{LevyConfig{1.5, 10.0, 1.2, 0.0, 1.0, 0.0, 100.0, 0.0}}),
        std::invalid_argument);
}

TEST_CASE("model config JSON round-trips") {
    RandomWalkConfig rw;
    rw.v_min = 1.0;
    rw.v_max = 2.0;
    rw.sigma_v = 0.5;
    rw.mean_v = 1.5;
    rw.fixed_T = 4.0;
    rw.region = Region::rectangle(10.0, 20.0);
    rw.boundary = BoundaryMode::Reflect;
    SmoothRandomConfig sm;
    sm.v_max = 10.0;
    sm.preferred = {{5.0, 0.3}, {2.5, 0.2}};
    sm.event_rate = 0.5;
    sm.a_max = 100.0;
    MarkovianWaypointConfig mw;
    mw.waypoints = {{0, 0}, {1, 0}};
    mw.transition = {{0.5, 0.5}, {1.0, 0.0}};
    mw.velocity = VelocitySpec::uniform(1.0, 2.0);
    const std::vector<ModelConfig> configs = {
        ModelConfig{rw},
        ModelConfig{RwpConfig{Region::disk(5.0), 1.0, 2.0, 0.5}},
        ModelConfig{MrdConfig{0.0004, VelocitySpec::uniform(5.0, 15.0), 1.0}},
        ModelConfig{LevyConfig{1.5, 10.0, 1.2, 2.0, 1.0, 0.5, 5000.0, 100.0}},
        ModelConfig{sm},
        ModelConfig{GaussMarkovConfig{0.5, 10.0, 1.0, 1.0, Region::square(100.0)}},
        ModelConfig{mw},
        ModelConfig{Drone3dConfig{10.0}}};
    for (const ModelConfig& cfg : configs) {
        nlohmann::json j = cfg;
        const ModelConfig back = j.get<ModelConfig>();
        nlohmann::json j2 = back;
        CHECK(j.dump() == j2.dump());
        CHECK(model_tag(back) == model_tag(cfg));
    }
}

TEST_CASE("trajectory CSV and JSON serialization") {
    const MrdConfig mrd{0.0004, VelocitySpec::constant(10.0), 0.5};
    const Trajectory t = generate_trajectory(ModelConfig{mrd}, 5, {1.0, 2.0}, 3);
    std::ostringstream csv;
    trajectory_to_csv(csv, t);
    const std::string s = csv.str();
    CHECK(s.rfind("x,y,theta,L,V,T,T_p\n", 0) == 0);
    CHECK(std::count(s.begin(), s.end(), '\n') == 6);
    nlohmann::json j = t;
    CHECK(j["model"] == "modified_random_direction");
    CHECK(j["segments"].size() == 5);
    CHECK(j["seed"] == 3);
}
