#include "cellmob/mobility.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "cellmob/quadrature.hpp"

namespace cellmob {

namespace {

constexpr double kPi = std::numbers::pi;

double std_normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * kPi); }
double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

}  // namespace

double Trajectory::total_time() const {
    double t = 0.0;
    for (const Segment& s : segments) t += s.flight_time + s.pause;
    return t;
}

double Trajectory::total_flight_time() const {
    double t = 0.0;
    for (const Segment& s : segments) t += s.flight_time;
    return t;
}

void Trajectory::bbox(Vec2& lo, Vec2& hi) const {
    lo = hi = segments.empty() ? Vec2{} : segments.front().start;
    for (const Segment& s : segments) {
        for (const Vec2 p : {s.start, s.end()}) {
            lo.x = std::min(lo.x, p.x);
            lo.y = std::min(lo.y, p.y);
            hi.x = std::max(hi.x, p.x);
            hi.y = std::max(hi.y, p.y);
        }
    }
}

double VelocitySpec::sample(Rng& rng) const {
    return kind == Kind::Constant ? value : rng.uniform(v_min, v_max);
}

double VelocitySpec::mean() const {
    return kind == Kind::Constant ? value : 0.5 * (v_min + v_max);
}

double VelocitySpec::mean_inverse() const {
    if (kind == Kind::Constant) return 1.0 / value;
    return std::log(v_max / v_min) / (v_max - v_min);
}

void VelocitySpec::validate() const {
    if (kind == Kind::Constant) {
        if (!(value > 0.0)) throw std::invalid_argument("velocity: constant value must be positive");
    } else {
        if (!(v_min > 0.0) || !(v_max > v_min))
            throw std::invalid_argument("velocity: need 0 < v_min < v_max");
    }
}

void RandomWalkConfig::validate() const {
    if (!(v_min < v_max)) throw std::invalid_argument("random_walk: need v_min < v_max");
    if (!(v_min > 0.0)) throw std::invalid_argument("random_walk: v_min must be positive");
    if (!(sigma_v > 0.0)) throw std::invalid_argument("random_walk: sigma_v must be positive");
    if (!(fixed_T > 0.0)) throw std::invalid_argument("random_walk: fixed_T must be positive");
    if (region && region->kind != Region::Kind::Rectangle)
        throw std::invalid_argument("random_walk: confinement supports rectangles only");
}

void RwpConfig::validate() const {
    if (!(v_min > 0.0) || !(v_max > v_min))
        throw std::invalid_argument("rwp: need 0 < v_min < v_max");
    if (!(pause >= 0.0)) throw std::invalid_argument("rwp: pause must be nonnegative");
}

void MrdConfig::validate() const {
    if (!(waypoint_intensity > 0.0))
        throw std::invalid_argument("mrd: waypoint_intensity must be positive");
    velocity.validate();
    if (!(pause >= 0.0)) throw std::invalid_argument("mrd: pause must be nonnegative");
}

void LevyConfig::validate() const {
    if (!(alpha > 0.0) || alpha > 2.0) throw std::invalid_argument("levy: alpha in (0,2]");
    if (!(scale > 0.0)) throw std::invalid_argument("levy: scale must be positive");
    if (!(kappa > 0.0)) throw std::invalid_argument("levy: kappa must be positive");
    if (!(rho >= 0.0) || rho >= 1.0) throw std::invalid_argument("levy: rho in [0,1)");
    if (!(max_flight > 0.0)) throw std::invalid_argument("levy: max_flight required");
    if (pause_scale > 0.0) {
        if (!(pause_exponent > 0.0) || pause_exponent > 2.0)
            throw std::invalid_argument("levy: pause_exponent in (0,2]");
        if (!(max_pause > 0.0)) throw std::invalid_argument("levy: max_pause required");
    }
}

void SmoothRandomConfig::validate() const {
    if (!(v_max > 0.0)) throw std::invalid_argument("smooth_random: v_max must be positive");
    double mass = 0.0;
    for (const auto& [speed, prob] : preferred) {
        if (!(speed > 0.0) || speed > v_max)
            throw std::invalid_argument("smooth_random: preferred speeds must lie in (0, v_max]");
        if (!(prob >= 0.0)) throw std::invalid_argument("smooth_random: negative probability");
        mass += prob;
    }
    if (!(mass < 1.0))
        throw std::invalid_argument("smooth_random: preferred probabilities must sum below 1");
    if (!(event_rate > 0.0)) throw std::invalid_argument("smooth_random: event_rate must be positive");
    if (!(a_max > 0.0)) throw std::invalid_argument("smooth_random: a_max must be positive");
    if (!(segment_dt > 0.0)) throw std::invalid_argument("smooth_random: segment_dt must be positive");
    if (region && region->kind != Region::Kind::Rectangle)
        throw std::invalid_argument("smooth_random: confinement supports rectangles only");
}

void GaussMarkovConfig::validate() const {
    if (!(memory >= 0.0) || !(memory <= 1.0))
        throw std::invalid_argument("gauss_markov: memory in [0,1]");
    if (!(drift_speed >= 0.0)) throw std::invalid_argument("gauss_markov: drift must be nonnegative");
    if (!(sigma >= 0.0)) throw std::invalid_argument("gauss_markov: sigma must be nonnegative");
    if (!(dt > 0.0)) throw std::invalid_argument("gauss_markov: dt must be positive");
}

void MarkovianWaypointConfig::validate() const {
    if (waypoints.size() < 2) throw std::invalid_argument("markovian_waypoint: need >= 2 waypoints");
    if (transition.size() != waypoints.size())
        throw std::invalid_argument("markovian_waypoint: transition matrix shape mismatch");
    for (const auto& row : transition) {
        if (row.size() != waypoints.size())
            throw std::invalid_argument("markovian_waypoint: transition matrix shape mismatch");
        double sum = 0.0;
        for (double p : row) {
            if (!(p >= 0.0)) throw std::invalid_argument("markovian_waypoint: negative probability");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw std::invalid_argument("markovian_waypoint: rows must sum to 1");
    }
    velocity.validate();
    if (fast_threshold > 0.0 && !(fast_velocity > 0.0))
        throw std::invalid_argument("markovian_waypoint: fast_velocity required with fast_threshold");
    if (start_index < 0 || static_cast<std::size_t>(start_index) >= waypoints.size())
        throw std::invalid_argument("markovian_waypoint: start_index out of range");
}

void Drone3dConfig::validate() const {
    if (!(mean_speed > 0.0)) throw std::invalid_argument("drone3d: mean_speed must be positive");
}

std::string model_tag(const ModelConfig& cfg) {
    struct Visitor {
        std::string operator()(const RandomWalkConfig&) { return "random_walk"; }
        std::string operator()(const RwpConfig&) { return "rwp"; }
        std::string operator()(const MrdConfig&) { return "modified_random_direction"; }
        std::string operator()(const LevyConfig&) { return "truncated_levy"; }
        std::string operator()(const SmoothRandomConfig&) { return "smooth_random"; }
        std::string operator()(const GaussMarkovConfig&) { return "gauss_markov"; }
        std::string operator()(const MarkovianWaypointConfig&) { return "markovian_waypoint"; }
        std::string operator()(const Drone3dConfig&) { return "drone3d"; }
    };
    return std::visit(Visitor{}, cfg);
}

void validate_model(const ModelConfig& cfg) {
    std::visit([](const auto& c) { c.validate(); }, cfg);
}

// ---- samplers ---------------------------------------------------------------

namespace {

double truncated_normal(Rng& rng, double mean, double sigma, double lo, double hi) {
    for (int i = 0; i < 100000; ++i) {
        const double v = rng.normal(mean, sigma);
        if (v >= lo && v <= hi) return v;
    }
    throw std::runtime_error("truncated normal: acceptance region too small");
}

double symmetric_stable(Rng& rng, double alpha) {
    const double u = (rng.uniform() - 0.5) * kPi;  // uniform on (-pi/2, pi/2)
    const double w = rng.exponential();
    if (std::abs(alpha - 1.0) < 1e-12) return std::tan(u);
    const double t = std::sin(alpha * u) / std::pow(std::cos(u), 1.0 / alpha);
    const double s = std::pow(std::cos((1.0 - alpha) * u) / w, (1.0 - alpha) / alpha);
    return t * s;
}

double truncated_stable_magnitude(Rng& rng, double alpha, double scale, double bound) {
    for (int i = 0; i < 1000000; ++i) {
        const double x = scale * std::abs(symmetric_stable(rng, alpha));
        if (x > 0.0 && x <= bound) return x;
    }
    throw std::runtime_error("levy: truncation rejected too many samples");
}

Segment make_segment(Vec2 start, double theta, double length, double velocity, double pause) {
    Segment s;
    s.start = start;
    s.theta = theta;
    s.length = length;
    s.velocity = velocity;
    s.flight_time = velocity > 0.0 ? length / velocity : 0.0;
    s.pause = pause;
    return s;
}

// Splits one flight at rectangle walls. Wrap teleports to the opposite wall
// (the border-effect default); reflect mirrors the direction. Returns the
// final position.
Vec2 emit_confined(std::vector<Segment>& out, Vec2 p, double theta, double length,
                   double velocity, double pause, const Region& reg, BoundaryMode mode) {
    double cx = std::cos(theta), cy = std::sin(theta);
    const double hw = 0.5 * reg.width, hh = 0.5 * reg.height;
    double remaining = length;
    int guard = 0;
    while (remaining > 0.0 && ++guard < 1000) {
        double tx = std::numeric_limits<double>::infinity();
        double ty = std::numeric_limits<double>::infinity();
        if (cx > 0)
            tx = (hw - p.x) / cx;
        else if (cx < 0)
            tx = (-hw - p.x) / cx;
        if (cy > 0)
            ty = (hh - p.y) / cy;
        else if (cy < 0)
            ty = (-hh - p.y) / cy;
        const double t_wall = std::min(tx, ty);
        const double theta_now = std::atan2(cy, cx);
        if (t_wall >= remaining) {
            out.push_back(make_segment(p, theta_now, remaining, velocity, pause));
            return out.back().end();
        }
        if (t_wall > 1e-12) {
            out.push_back(make_segment(p, theta_now, t_wall, velocity, 0.0));
            p = out.back().end();
            remaining -= t_wall;
        }
        const bool hit_x = tx <= ty;
        const bool hit_y = ty <= tx;
        if (mode == BoundaryMode::Reflect) {
            if (hit_x) cx = -cx;
            if (hit_y) cy = -cy;
        } else {
            if (hit_x) p.x = -p.x;
            if (hit_y) p.y = -p.y;
        }
    }
    if (!out.empty()) out.back().pause += pause;
    return p;
}

}  // namespace

struct TrajectorySampler::State {
    Rng rng;
    Vec2 pos;
    std::vector<Segment> pending;
    std::size_t head = 0;

    State(Vec2 start, std::uint64_t seed) : rng(seed), pos(start) {}
    virtual ~State() = default;
    virtual void refill() = 0;

    Segment next() {
        while (head >= pending.size()) {
            pending.clear();
            head = 0;
            refill();
        }
        return pending[head++];
    }

    void emit_flight(double theta, double length, double velocity, double pause,
                     const std::optional<Region>& region, BoundaryMode mode) {
        if (region) {
            pos = emit_confined(pending, pos, theta, length, velocity, pause, *region, mode);
        } else {
            pending.push_back(make_segment(pos, theta, length, velocity, pause));
            pos = pending.back().end();
        }
    }
};

namespace {

struct RandomWalkState final : TrajectorySampler::State {
    RandomWalkConfig cfg;
    RandomWalkState(const RandomWalkConfig& c, Vec2 start, std::uint64_t seed)
        : State(start, seed), cfg(c) {}
    void refill() override {
        const double theta = rng.uniform(0.0, 2.0 * kPi);
        const double v = truncated_normal(rng, cfg.mean_v, cfg.sigma_v, cfg.v_min, cfg.v_max);
        emit_flight(theta, v * cfg.fixed_T, v, 0.0, cfg.region, cfg.boundary);
    }
};

struct RwpState final : TrajectorySampler::State {
    RwpConfig cfg;
    RwpState(const RwpConfig& c, Vec2 start, std::uint64_t seed) : State(start, seed), cfg(c) {
        if (!cfg.region.contains(start))
            throw std::invalid_argument("rwp: start point must lie in the region");
    }
    void refill() override {
        const Vec2 dest = cfg.region.sample(rng);
        const Vec2 d = dest - pos;
        const double len = d.norm();
        const double theta = std::atan2(d.y, d.x);
        const double v = rng.uniform(cfg.v_min, cfg.v_max);
        pending.push_back(make_segment(pos, theta, len, v, cfg.pause));
        pos = dest;
    }
};

struct MrdState final : TrajectorySampler::State {
    MrdConfig cfg;
    MrdState(const MrdConfig& c, Vec2 start, std::uint64_t seed) : State(start, seed), cfg(c) {}
    void refill() override {
        const double theta = rng.uniform(0.0, 2.0 * kPi);
        const double len =
            std::sqrt(-std::log(rng.uniform_open()) / (cfg.waypoint_intensity * kPi));
        const double v = cfg.velocity.sample(rng);
        emit_flight(theta, len, v, cfg.pause, std::nullopt, BoundaryMode::Wrap);
    }
};

struct LevyState final : TrajectorySampler::State {
    LevyConfig cfg;
    LevyState(const LevyConfig& c, Vec2 start, std::uint64_t seed) : State(start, seed), cfg(c) {}
    void refill() override {
        const double theta = rng.uniform(0.0, 2.0 * kPi);
        const double len = truncated_stable_magnitude(rng, cfg.alpha, cfg.scale, cfg.max_flight);
        const double t = cfg.kappa * std::pow(len, 1.0 - cfg.rho);
        double pause = 0.0;
        if (cfg.pause_scale > 0.0)
            pause = truncated_stable_magnitude(rng, cfg.pause_exponent, cfg.pause_scale,
                                               cfg.max_pause);
        emit_flight(theta, len, len / t, pause, std::nullopt, BoundaryMode::Wrap);
    }
};

struct SmoothRandomState final : TrajectorySampler::State {
    SmoothRandomConfig cfg;
    double v_cur, v_tgt, accel = 0.0, theta = 0.0, to_event = 0.0;

    SmoothRandomState(const SmoothRandomConfig& c, Vec2 start, std::uint64_t seed)
        : State(start, seed), cfg(c) {
        v_cur = v_tgt = draw_target();
        theta = rng.uniform(0.0, 2.0 * kPi);
        to_event = rng.exponential(1.0 / cfg.event_rate);
    }

    double draw_target() {
        double u = rng.uniform();
        for (const auto& [speed, prob] : cfg.preferred) {
            if (u < prob) return speed;
            u -= prob;
        }
        return rng.uniform_open() * cfg.v_max;  // uniform remainder on (0, v_max]
    }

    void schedule_event() {
        v_tgt = draw_target();
        accel = rng.uniform_open() * cfg.a_max;
        if (v_tgt < v_cur) accel = -accel;
        theta = rng.uniform(0.0, 2.0 * kPi);
        to_event = rng.exponential(1.0 / cfg.event_rate);
    }

    void refill() override {
        if (to_event <= 0.0) schedule_event();
        double dt, v_seg;
        if (v_cur != v_tgt) {
            const double t_reach = (v_tgt - v_cur) / accel;
            dt = std::min({cfg.segment_dt, t_reach, to_event});
            v_seg = v_cur + 0.5 * accel * dt;
            v_cur += accel * dt;
            if ((accel > 0.0 && v_cur >= v_tgt) || (accel < 0.0 && v_cur <= v_tgt))
                v_cur = v_tgt;
        } else {
            dt = to_event;
            v_seg = v_cur;
        }
        to_event -= dt;
        emit_flight(theta, v_seg * dt, v_seg, 0.0, cfg.region, cfg.boundary);
    }
};

struct GaussMarkovState final : TrajectorySampler::State {
    GaussMarkovConfig cfg;
    double v, theta;

    GaussMarkovState(const GaussMarkovConfig& c, Vec2 start, std::uint64_t seed)
        : State(start, seed), cfg(c) {
        theta = rng.uniform(0.0, 2.0 * kPi);
        v = std::max(0.0, cfg.drift_speed + cfg.sigma * rng.normal());
    }

    void refill() override {
        double len = v * cfg.dt;
        if (cfg.region) {
            Vec2 end{pos.x + len * std::cos(theta), pos.y + len * std::sin(theta)};
            if (!cfg.region->contains(end)) {
                theta = std::fmod(theta + kPi, 2.0 * kPi);  // forced 180-degree flip
                end = {pos.x + len * std::cos(theta), pos.y + len * std::sin(theta)};
                if (!cfg.region->contains(end)) len = 0.0;  // corner case: stay put this slot
            }
        }
        pending.push_back(make_segment(pos, theta, len, v, 0.0));
        pending.back().flight_time = cfg.dt;  // slotted time base, L = V*dt still exact
        if (len == 0.0) pending.back().velocity = 0.0;
        pos = pending.back().end();
        v = std::max(0.0, cfg.memory * v + (1.0 - cfg.memory) * cfg.drift_speed +
                              std::sqrt(std::max(0.0, 1.0 - cfg.memory * cfg.memory)) *
                                  cfg.sigma * rng.normal());
    }
};

struct MarkovianState final : TrajectorySampler::State {
    MarkovianWaypointConfig cfg;
    Vec2 offset;
    int idx;

    MarkovianState(const MarkovianWaypointConfig& c, Vec2 start, std::uint64_t seed)
        : State(start, seed), cfg(c), idx(c.start_index) {
        offset = start - cfg.waypoints[static_cast<std::size_t>(idx)];
        pos = start;
    }

    void refill() override {
        const auto& row = cfg.transition[static_cast<std::size_t>(idx)];
        double u = rng.uniform();
        int next = static_cast<int>(row.size()) - 1;
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (u < row[j]) {
                next = static_cast<int>(j);
                break;
            }
            u -= row[j];
        }
        const Vec2 dest = cfg.waypoints[static_cast<std::size_t>(next)] + offset;
        const Vec2 d = dest - pos;
        const double len = d.norm();
        double v = (cfg.fast_threshold > 0.0 && len >= cfg.fast_threshold)
                       ? cfg.fast_velocity
                       : cfg.velocity.sample(rng);
        pending.push_back(make_segment(pos, std::atan2(d.y, d.x), len, v, cfg.pause));
        pos = dest;
        idx = next;
    }
};

struct DroneState final : TrajectorySampler::State {
    Drone3dConfig cfg;
    DroneState(const Drone3dConfig& c, Vec2 start, std::uint64_t seed)
        : State(start, seed), cfg(c) {}
    void refill() override {
        const Drone3dStep step = sample_drone_step(cfg.mean_speed, rng);
        const double v_ground = step.velocity * std::sin(step.elevation);
        pending.push_back(make_segment(pos, step.azimuth, v_ground, v_ground, 0.0));
        pending.back().flight_time = 1.0;  // unit-time movement periods
        pos = pending.back().end();
    }
};

}  // namespace

TrajectorySampler::TrajectorySampler(const ModelConfig& cfg, Vec2 start, std::uint64_t seed) {
    validate_model(cfg);
    struct Make {
        Vec2 start;
        std::uint64_t seed;
        std::unique_ptr<State> operator()(const RandomWalkConfig& c) {
            return std::make_unique<RandomWalkState>(c, start, seed);
        }
        std::unique_ptr<State> operator()(const RwpConfig& c) {
            return std::make_unique<RwpState>(c, start, seed);
        }
        std::unique_ptr<State> operator()(const MrdConfig& c) {
            return std::make_unique<MrdState>(c, start, seed);
        }
        std::unique_ptr<State> operator()(const LevyConfig& c) {
            return std::make_unique<LevyState>(c, start, seed);
        }
        std::unique_ptr<State> operator()(const SmoothRandomConfig& c) {
            return std::make_unique<SmoothRandomState>(c, start, seed);
        }
        std::unique_ptr<State> operator()(const GaussMarkovConfig& c) {
            return std::make_unique<GaussMarkovState>(c, start, seed);
        }
        std::unique_ptr<State> operator()(const MarkovianWaypointConfig& c) {
            return std::make_unique<MarkovianState>(c, start, seed);
        }
        std::unique_ptr<State> operator()(const Drone3dConfig& c) {
            return std::make_unique<DroneState>(c, start, seed);
        }
    };
    state_ = std::visit(Make{start, seed}, cfg);
}

TrajectorySampler::~TrajectorySampler() = default;
TrajectorySampler::TrajectorySampler(TrajectorySampler&&) noexcept = default;

Segment TrajectorySampler::next() { return state_->next(); }

Trajectory generate_trajectory(const ModelConfig& cfg, std::size_t n_segments, Vec2 start,
                               std::uint64_t seed) {
    if (n_segments < 1) throw std::invalid_argument("generate_trajectory: need n_segments >= 1");
    TrajectorySampler sampler(cfg, start, seed);
    Trajectory t;
    t.model_tag = model_tag(cfg);
    t.seed = seed;
    t.segments.reserve(n_segments);
    for (std::size_t i = 0; i < n_segments; ++i) t.segments.push_back(sampler.next());
    return t;
}

// ---- closed-form densities --------------------------------------------------

double rwp_flight_length_pdf(double l, const Region& region) {
    if (l < 0.0) return 0.0;
    if (region.kind == Region::Kind::Disk) {
        const double a = region.radius;
        if (l >= 2.0 * a) return 0.0;
        const double x = l / (2.0 * a);
        return 4.0 * l / (kPi * a * a) *
               (std::acos(x) - x * std::sqrt(std::max(0.0, 1.0 - x * x)));
    }
    double a = region.width, b = region.height;
    if (a < b) std::swap(a, b);  // the closed form assumes a >= b
    if (l * l >= a * a + b * b) return 0.0;
    double f0;
    if (l <= b) {
        f0 = 0.5 * kPi * a * b - a * l - b * l + 0.5 * l * l;
    } else {
        const double g = a * b * std::asin(b / l) + a * std::sqrt(l * l - b * b) -
                         0.5 * b * b - a * l;
        if (l < a) {
            f0 = g;
        } else {
            // Continuity at l=a and f0(sqrt(a^2+b^2))=0 pin down the signs here;
            // checked against the unit-square line-picking closed form.
            const double h = a * b * std::acos(a / l) - b * std::sqrt(l * l - a * a) +
                             0.5 * (l * l + a * a) - a * l;
            f0 = g - h;
        }
    }
    return 4.0 * l / (a * a * b * b) * f0;
}

double rw_flight_length_pdf(double l, const RandomWalkConfig& cfg) {
    cfg.validate();
    const double T = cfg.fixed_T;
    if (l < cfg.v_min * T || l > cfg.v_max * T) return 0.0;
    const double z = (l - T * cfg.mean_v) / (T * cfg.sigma_v);
    const double norm = std_normal_cdf((cfg.v_max - cfg.mean_v) / cfg.sigma_v) -
                        std_normal_cdf((cfg.v_min - cfg.mean_v) / cfg.sigma_v);
    return std_normal_pdf(z) / (T * cfg.sigma_v * norm);
}

double mrd_flight_length_pdf(double l, double waypoint_intensity) {
    if (l < 0.0) return 0.0;
    return 2.0 * kPi * waypoint_intensity * l *
           std::exp(-waypoint_intensity * kPi * l * l);
}

double mrd_flight_time_pdf(double t, const MrdConfig& cfg) {
    cfg.validate();
    if (t < 0.0) return 0.0;
    const double lam = cfg.waypoint_intensity;
    if (cfg.velocity.kind == VelocitySpec::Kind::Constant) {
        const double v = cfg.velocity.value;
        return 2.0 * kPi * lam * v * v * t * std::exp(-lam * kPi * v * v * t * t);
    }
    // f_T(t) = 2 pi lam t / (v_max - v_min) * I(t), I(t) = int v^2 e^{-c v^2} dv
    // with c = lam pi t^2. Evaluated through the erf antiderivative, with a
    // series fallback where the two antiderivative terms would cancel.
    const double v0 = cfg.velocity.v_min, v1 = cfg.velocity.v_max;
    const double c = lam * kPi * t * t;
    double integral;
    if (c * v1 * v1 < 1e-3) {
        const double p3 = (v1 * v1 * v1 - v0 * v0 * v0) / 3.0;
        const double p5 = (std::pow(v1, 5) - std::pow(v0, 5)) / 5.0;
        const double p7 = (std::pow(v1, 7) - std::pow(v0, 7)) / 14.0;
        integral = p3 - c * p5 + c * c * p7;
    } else {
        const double sc = std::sqrt(c);
        const double left = (v0 * std::exp(-c * v0 * v0) - v1 * std::exp(-c * v1 * v1)) /
                            (2.0 * c);
        const double right = std::sqrt(kPi) * (std::erf(v1 * sc) - std::erf(v0 * sc)) /
                             (4.0 * c * sc);
        integral = left + right;
    }
    return 2.0 * kPi * lam * t * integral / (v1 - v0);
}

double drone_speed_pdf(double v, double mean_speed) {
    if (v < 0.0 || v > 4.0 / 3.0 * mean_speed) return 0.0;
    return 81.0 * v * v / (64.0 * mean_speed * mean_speed * mean_speed);
}

double drone_elevation_pdf(double phi) {
    if (phi < 0.0 || phi > kPi) return 0.0;
    return 0.5 * std::sin(phi);
}

Drone3dStep sample_drone_step(double mean_speed, Rng& rng) {
    if (!(mean_speed > 0.0)) throw std::invalid_argument("drone step: mean speed must be positive");
    // uniform point in the ball of radius (4/3) vbar, in spherical coordinates
    Drone3dStep s;
    s.velocity = 4.0 / 3.0 * mean_speed * std::cbrt(rng.uniform());
    s.elevation = std::acos(1.0 - 2.0 * rng.uniform());
    s.azimuth = rng.uniform(0.0, 2.0 * kPi);
    return s;
}

Drone3dStep sample_drone_step(double mean_speed, std::uint64_t seed) {
    Rng rng(seed);
    return sample_drone_step(mean_speed, rng);
}

RwpDirectionProbs rwp_direction_pdf_check(double disk_radius, std::uint64_t n_samples,
                                          std::uint64_t seed) {
    if (!(disk_radius > 0.0)) throw std::invalid_argument("rwp direction check: bad radius");
    const Region disk = Region::disk(disk_radius);
    Rng rng(seed);
    Vec2 p = disk.sample(rng);
    std::uint64_t outward = 0, inward_cone = 0;
    for (std::uint64_t i = 0; i < n_samples; ++i) {
        const Vec2 q = disk.sample(rng);
        const Vec2 leg = q - p;
        const double rn = p.norm();
        // radial axis undefined at the exact center; that event has measure zero
        const Vec2 radial = rn > 0.0 ? Vec2{p.x / rn, p.y / rn} : Vec2{1.0, 0.0};
        const double cos_psi = leg.dot(radial) / std::max(leg.norm(), 1e-300);
        if (cos_psi > 0.0) ++outward;
        if (cos_psi <= -std::numbers::sqrt2 / 2.0) ++inward_cone;
        p = q;
    }
    RwpDirectionProbs out;
    out.samples = n_samples;
    out.boundary_ward = static_cast<double>(outward) / static_cast<double>(n_samples);
    out.center_ward = static_cast<double>(inward_cone) / static_cast<double>(n_samples);
    return out;
}

// ---- moments ----------------------------------------------------------------

void MobilityMoments::validate() const {
    if (!(mean_speed >= 0.0) || !(mean_flight_time > 0.0) || !(mean_pause >= 0.0))
        throw std::invalid_argument("moments: need E[V] >= 0, E[T] > 0, E[S] >= 0");
}

MobilityMoments mobility_moments(const ModelConfig& cfg) {
    MobilityMoments m;
    if (const auto* c = std::get_if<RandomWalkConfig>(&cfg)) {
        c->validate();
        const double a = (c->v_min - c->mean_v) / c->sigma_v;
        const double b = (c->v_max - c->mean_v) / c->sigma_v;
        const double z = std_normal_cdf(b) - std_normal_cdf(a);
        m.mean_speed = c->mean_v + c->sigma_v * (std_normal_pdf(a) - std_normal_pdf(b)) / z;
        m.mean_flight_time = c->fixed_T;
        return m;
    }
    if (const auto* c = std::get_if<RwpConfig>(&cfg)) {
        c->validate();
        const double diam = c->region.diameter();
        double kinks[2] = {0.0, 0.0};  // pdf branch points for the rectangle
        if (c->region.kind == Region::Kind::Rectangle) {
            kinks[0] = std::min(c->region.width, c->region.height);
            kinks[1] = std::max(c->region.width, c->region.height);
        }
        const auto mean_len = integrate(
            [&](double l) { return l * rwp_flight_length_pdf(l, c->region); }, 0.0, diam,
            1e-10, 1e-9, 200, kinks);
        m.mean_speed = 0.5 * (c->v_min + c->v_max);
        m.mean_flight_time = mean_len.value * std::log(c->v_max / c->v_min) /
                             (c->v_max - c->v_min);
        m.mean_pause = c->pause;
        return m;
    }
    if (const auto* c = std::get_if<MrdConfig>(&cfg)) {
        c->validate();
        const double mean_len = 0.5 / std::sqrt(c->waypoint_intensity);
        m.mean_speed = c->velocity.mean();
        m.mean_flight_time = mean_len * c->velocity.mean_inverse();
        m.mean_pause = c->pause;
        return m;
    }
    if (const auto* c = std::get_if<Drone3dConfig>(&cfg)) {
        c->validate();
        m.mean_speed = c->mean_speed * kPi / 4.0;  // E[v sin(phi)], ground projection
        m.mean_flight_time = 1.0;
        return m;
    }
    throw std::invalid_argument("mobility_moments: model has no tractable closed-form moments");
}

// ---- serialization ----------------------------------------------------------

namespace {

void velocity_to_json(nlohmann::json& j, const VelocitySpec& v) {
    if (v.kind == VelocitySpec::Kind::Constant)
        j = {{"kind", "constant"}, {"value", v.value}};
    else
        j = {{"kind", "uniform"}, {"min", v.v_min}, {"max", v.v_max}};
}

VelocitySpec velocity_from_json(const nlohmann::json& j) {
    if (j.is_number()) return VelocitySpec::constant(j.get<double>());
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "constant") return VelocitySpec::constant(j.at("value").get<double>());
    if (kind == "uniform")
        return VelocitySpec::uniform(j.at("min").get<double>(), j.at("max").get<double>());
    throw std::invalid_argument("unknown velocity kind: " + kind);
}

BoundaryMode boundary_from_json(const nlohmann::json& j) {
    const std::string s = j.get<std::string>();
    if (s == "wrap") return BoundaryMode::Wrap;
    if (s == "reflect") return BoundaryMode::Reflect;
    throw std::invalid_argument("unknown boundary mode: " + s);
}

}  // namespace

void to_json(nlohmann::json& j, const ModelConfig& cfg) {
    j = nlohmann::json{{"model", model_tag(cfg)}};
    struct Visitor {
        nlohmann::json& j;
        void operator()(const RandomWalkConfig& c) {
            j["v_min"] = c.v_min;
            j["v_max"] = c.v_max;
            j["sigma_v"] = c.sigma_v;
            j["mean_v"] = c.mean_v;
            j["fixed_T"] = c.fixed_T;
            if (c.region) j["region"] = *c.region;
            j["boundary"] = c.boundary == BoundaryMode::Wrap ? "wrap" : "reflect";
        }
        void operator()(const RwpConfig& c) {
            j["region"] = c.region;
            j["v_min"] = c.v_min;
            j["v_max"] = c.v_max;
            j["pause"] = c.pause;
        }
        void operator()(const MrdConfig& c) {
            j["waypoint_intensity"] = c.waypoint_intensity;
            velocity_to_json(j["velocity"], c.velocity);
            j["pause"] = c.pause;
        }
        void operator()(const LevyConfig& c) {
            j["alpha"] = c.alpha;
            j["scale"] = c.scale;
            j["pause_exponent"] = c.pause_exponent;
            j["pause_scale"] = c.pause_scale;
            j["kappa"] = c.kappa;
            j["rho"] = c.rho;
            j["max_flight"] = c.max_flight;
            j["max_pause"] = c.max_pause;
        }
        void operator()(const SmoothRandomConfig& c) {
            j["v_max"] = c.v_max;
            nlohmann::json pref = nlohmann::json::array();
            for (const auto& [speed, prob] : c.preferred)
                pref.push_back({{"speed", speed}, {"probability", prob}});
            j["preferred"] = std::move(pref);
            j["event_rate"] = c.event_rate;
            j["a_max"] = c.a_max;
            j["segment_dt"] = c.segment_dt;
            if (c.region) j["region"] = *c.region;
            j["boundary"] = c.boundary == BoundaryMode::Wrap ? "wrap" : "reflect";
        }
        void operator()(const GaussMarkovConfig& c) {
            j["memory"] = c.memory;
            j["drift_speed"] = c.drift_speed;
            j["sigma"] = c.sigma;
            j["dt"] = c.dt;
            if (c.region) j["region"] = *c.region;
        }
        void operator()(const MarkovianWaypointConfig& c) {
            nlohmann::json wp = nlohmann::json::array();
            for (const Vec2 p : c.waypoints) wp.push_back({p.x, p.y});
            j["waypoints"] = std::move(wp);
            j["transition"] = c.transition;
            velocity_to_json(j["velocity"], c.velocity);
            j["fast_threshold"] = c.fast_threshold;
            j["fast_velocity"] = c.fast_velocity;
            j["pause"] = c.pause;
            j["start_index"] = c.start_index;
        }
        void operator()(const Drone3dConfig& c) { j["mean_speed"] = c.mean_speed; }
    };
    std::visit(Visitor{j}, cfg);
}

void from_json(const nlohmann::json& j, ModelConfig& cfg) {
    const std::string tag = j.at("model").get<std::string>();
    if (tag == "random_walk") {
        RandomWalkConfig c;
        c.v_min = j.at("v_min").get<double>();
        c.v_max = j.at("v_max").get<double>();
        c.sigma_v = j.at("sigma_v").get<double>();
        c.mean_v = j.at("mean_v").get<double>();
        c.fixed_T = j.at("fixed_T").get<double>();
        if (j.contains("region")) c.region = j.at("region").get<Region>();
        if (j.contains("boundary")) c.boundary = boundary_from_json(j.at("boundary"));
        cfg = c;
    } else if (tag == "rwp") {
        RwpConfig c;
        c.region = j.at("region").get<Region>();
        c.v_min = j.at("v_min").get<double>();
        c.v_max = j.at("v_max").get<double>();
        c.pause = j.value("pause", 0.0);
        cfg = c;
    } else if (tag == "modified_random_direction") {
        MrdConfig c;
        c.waypoint_intensity = j.at("waypoint_intensity").get<double>();
        c.velocity = velocity_from_json(j.at("velocity"));
        c.pause = j.value("pause", 0.0);
        cfg = c;
    } else if (tag == "truncated_levy") {
        LevyConfig c;
        c.alpha = j.at("alpha").get<double>();
        c.scale = j.at("scale").get<double>();
        c.pause_exponent = j.value("pause_exponent", 1.5);
        c.pause_scale = j.value("pause_scale", 0.0);
        c.kappa = j.at("kappa").get<double>();
        c.rho = j.at("rho").get<double>();
        c.max_flight = j.at("max_flight").get<double>();
        c.max_pause = j.value("max_pause", 0.0);
        cfg = c;
    } else if (tag == "smooth_random") {
        SmoothRandomConfig c;
        c.v_max = j.at("v_max").get<double>();
        c.preferred.clear();
        for (const auto& e : j.at("preferred"))
            c.preferred.emplace_back(e.at("speed").get<double>(),
                                     e.at("probability").get<double>());
        c.event_rate = j.at("event_rate").get<double>();
        c.a_max = j.at("a_max").get<double>();
        c.segment_dt = j.value("segment_dt", 0.1);
        if (j.contains("region")) c.region = j.at("region").get<Region>();
        if (j.contains("boundary")) c.boundary = boundary_from_json(j.at("boundary"));
        cfg = c;
    } else if (tag == "gauss_markov") {
        GaussMarkovConfig c;
        c.memory = j.at("memory").get<double>();
        c.drift_speed = j.at("drift_speed").get<double>();
        c.sigma = j.at("sigma").get<double>();
        c.dt = j.value("dt", 1.0);
        if (j.contains("region")) c.region = j.at("region").get<Region>();
        cfg = c;
    } else if (tag == "markovian_waypoint") {
        MarkovianWaypointConfig c;
        for (const auto& p : j.at("waypoints"))
            c.waypoints.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
        c.transition = j.at("transition").get<std::vector<std::vector<double>>>();
        c.velocity = velocity_from_json(j.at("velocity"));
        c.fast_threshold = j.value("fast_threshold", 0.0);
        c.fast_velocity = j.value("fast_velocity", 0.0);
        c.pause = j.value("pause", 0.0);
        c.start_index = j.value("start_index", 0);
        cfg = c;
    } else if (tag == "drone3d") {
        Drone3dConfig c;
        c.mean_speed = j.at("mean_speed").get<double>();
        cfg = c;
    } else {
        throw std::invalid_argument("unknown mobility model: " + tag);
    }
    validate_model(cfg);
}

void trajectory_to_csv(std::ostream& os, const Trajectory& t) {
    os << "x,y,theta,L,V,T,T_p\n";
    char buf[256];
    for (const Segment& s : t.segments) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", s.start.x,
                      s.start.y, s.theta, s.length, s.velocity, s.flight_time, s.pause);
        os << buf;
    }
}

void to_json(nlohmann::json& j, const Trajectory& t) {
    nlohmann::json segs = nlohmann::json::array();
    for (const Segment& s : t.segments)
        segs.push_back({{"x", s.start.x},
                        {"y", s.start.y},
                        {"theta", s.theta},
                        {"L", s.length},
                        {"V", s.velocity},
                        {"T", s.flight_time},
                        {"T_p", s.pause}});
    j = {{"model", t.model_tag}, {"seed", t.seed}, {"segments", std::move(segs)}};
}

}  // namespace cellmob
