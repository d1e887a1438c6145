#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "cellmob/region.hpp"

namespace cellmob {

// One flight of the movement sequence (L, Theta, T, T_p). Velocity is
// constant within a segment, so flight_time * velocity == length exactly.
struct Segment {
    Vec2 start;
    double theta = 0.0;        // radians
    double length = 0.0;       // m
    double velocity = 0.0;     // m/s
    double flight_time = 0.0;  // s
    double pause = 0.0;        // s

    Vec2 end() const { return {start.x + length * std::cos(theta), start.y + length * std::sin(theta)}; }
};

struct Trajectory {
    std::vector<Segment> segments;
    std::string model_tag;
    std::uint64_t seed = 0;

    double total_time() const;     // flight + pause
    double total_flight_time() const;
    void bbox(Vec2& lo, Vec2& hi) const;
};

enum class BoundaryMode { Wrap, Reflect };

struct VelocitySpec {
    enum class Kind { Constant, Uniform };
    Kind kind = Kind::Constant;
    double value = 1.0;  // constant
    double v_min = 0.0, v_max = 0.0;

    static VelocitySpec constant(double v) { return {Kind::Constant, v, 0, 0}; }
    static VelocitySpec uniform(double lo, double hi) { return {Kind::Uniform, 0, lo, hi}; }
    double sample(Rng& rng) const;
    double mean() const;
    double mean_inverse() const;  // E[1/V]
    void validate() const;
};

// Fixed flight duration, truncated-Gaussian speed on [v_min, v_max].
struct RandomWalkConfig {
    double v_min = 0.0, v_max = 0.0;
    double sigma_v = 0.0, mean_v = 0.0;
    double fixed_T = 1.0;
    std::optional<Region> region;  // rectangle only
    BoundaryMode boundary = BoundaryMode::Wrap;
    void validate() const;
};

// Uniform waypoints in a region, uniform speed per leg.
struct RwpConfig {
    Region region = Region::square(1.0);
    double v_min = 0.0, v_max = 0.0;
    double pause = 0.0;
    void validate() const;
};

// Rayleigh flight lengths (waypoint intensity lambda_m), uniform direction.
struct MrdConfig {
    double waypoint_intensity = 0.0;  // lambda_m, 1/m^2
    VelocitySpec velocity = VelocitySpec::constant(1.0);
    double pause = 0.0;
    void validate() const;
};

// Truncated Levy walk: symmetric-stable flight lengths and pauses, flight
// time coupled to length by T = kappa * L^(1-rho).
struct LevyConfig {
    double alpha = 1.5;           // stable exponent of L
    double scale = 1.0;           // c
    double pause_exponent = 1.5;  // stable exponent of T_p
    double pause_scale = 0.0;     // 0 disables pauses
    double kappa = 1.0;
    double rho = 0.0;
    double max_flight = 0.0;      // truncation bound, required
    double max_pause = 0.0;
    void validate() const;
};

struct SmoothRandomConfig {
    double v_max = 1.0;  // V_m
    std::vector<std::pair<double, double>> preferred;  // (speed, probability)
    double event_rate = 1.0;    // Poisson rate of target-speed changes (1/s)
    double a_max = 1.0;         // acceleration magnitude bound (m/s^2)
    double segment_dt = 0.1;    // discretization of acceleration ramps (s)
    std::optional<Region> region;
    BoundaryMode boundary = BoundaryMode::Wrap;
    void validate() const;
};

// v_t = alpha*v_{t-1} + (1-alpha)*drift + sqrt(1-alpha^2)*sigma*w_t.
struct GaussMarkovConfig {
    double memory = 0.5;  // alpha in [0,1]
    double drift_speed = 1.0;
    double sigma = 0.0;
    double dt = 1.0;
    std::optional<Region> region;  // direction flips by pi at the boundary
    void validate() const;
};

struct MarkovianWaypointConfig {
    std::vector<Vec2> waypoints;
    std::vector<std::vector<double>> transition;  // row-stochastic
    VelocitySpec velocity;
    double fast_threshold = 0.0;  // legs at least this long use fast_velocity
    double fast_velocity = 0.0;
    double pause = 0.0;
    int start_index = 0;
    void validate() const;
};

// 3-D drone steps: displacement uniform in the ball of radius (4/3)*mean
// speed per unit-time step; the emitted segment is the ground projection.
struct Drone3dConfig {
    double mean_speed = 1.0;
    void validate() const;
};

using ModelConfig = std::variant<RandomWalkConfig, RwpConfig, MrdConfig, LevyConfig,
                                 SmoothRandomConfig, GaussMarkovConfig,
                                 MarkovianWaypointConfig, Drone3dConfig>;

std::string model_tag(const ModelConfig& cfg);
void validate_model(const ModelConfig& cfg);

// Incremental segment generator; a pure function of (config, start, seed).
class TrajectorySampler {
public:
    struct State;

    TrajectorySampler(const ModelConfig& cfg, Vec2 start, std::uint64_t seed);
    ~TrajectorySampler();
    TrajectorySampler(TrajectorySampler&&) noexcept;
    Segment next();

private:
    std::unique_ptr<State> state_;
};

Trajectory generate_trajectory(const ModelConfig& cfg, std::size_t n_segments, Vec2 start,
                               std::uint64_t seed);

// ---- closed-form densities -------------------------------------------------

// RWP transition-length PDF: three-branch form for a rectangle (a >= b,
// swapped if needed) and the two-point-distance form for a disk.
double rwp_flight_length_pdf(double l, const Region& region);

// Random-walk flight length: truncated Gaussian of L = V*T.
double rw_flight_length_pdf(double l, const RandomWalkConfig& cfg);

// MRD flight length (Rayleigh, the normalizable form) and flight time
// (Rayleigh-in-time for constant V, finite-limit form for uniform V).
double mrd_flight_length_pdf(double l, double waypoint_intensity);
double mrd_flight_time_pdf(double t, const MrdConfig& cfg);

// Drone step marginals: f_v = 81 v^2 / (64 vbar^3) on [0, 4/3 vbar],
// f_phi = sin(phi)/2 on [0, pi].
double drone_speed_pdf(double v, double mean_speed);
double drone_elevation_pdf(double phi);

struct Drone3dStep {
    double velocity = 0.0;   // m/s
    double elevation = 0.0;  // phi in [0, pi]
    double azimuth = 0.0;    // theta in [0, 2pi)
};
Drone3dStep sample_drone_step(double mean_speed, Rng& rng);
Drone3dStep sample_drone_step(double mean_speed, std::uint64_t seed);

// Direction statistics of RWP legs on a disk, measured against the radial
// axis at the leg origin: boundary_ward is the probability of a positive
// outward component, center_ward the probability of moving within pi/4 of
// the inward direction.
struct RwpDirectionProbs {
    double boundary_ward = 0.0;
    double center_ward = 0.0;
    std::uint64_t samples = 0;
};
RwpDirectionProbs rwp_direction_pdf_check(double disk_radius, std::uint64_t n_samples,
                                          std::uint64_t seed);

// ---- moments ----------------------------------------------------------------

struct MobilityMoments {
    double mean_speed = 0.0;        // E[V]
    double mean_flight_time = 0.0;  // E[T]
    double mean_pause = 0.0;        // E[S]
    void validate() const;
};

// Closed-form/quadrature moments for the tractable models (random walk,
// RWP, MRD, drone projection). Throws for models without tractable moments.
MobilityMoments mobility_moments(const ModelConfig& cfg);

// ---- serialization ----------------------------------------------------------

void to_json(nlohmann::json& j, const ModelConfig& cfg);
void from_json(const nlohmann::json& j, ModelConfig& cfg);
void trajectory_to_csv(std::ostream& os, const Trajectory& t);
void to_json(nlohmann::json& j, const Trajectory& t);

}  // namespace cellmob
