#include "cellmob/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cellmob {

namespace {

constexpr double kPi = std::numbers::pi;

// substreams of one replication seed
enum Stream : std::uint64_t { kDeployment = 0, kTrajectory = 1, kFading = 2, kDirection = 3 };

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
    return mix64(mix64(seed) ^ mix64(0x5851f42d4c957f2dULL + stream));
}

int resolve_width(int requested) {
#ifdef _OPENMP
    return requested > 0 ? requested : omp_get_max_threads();
#else
    (void)requested;
    return 1;
#endif
}

struct SegmentWalk {
    Vec2 start;
    Vec2 dir;
    double velocity;
    Vec2 at(double t) const { return start + dir * (velocity * t); }
};

struct Detector {
    const Deployment& dep;
    AssociationPolicy policy;
    double time_tol;   // bisection tolerance
    double floor_dt;   // agreeing intervals are still split down to this width
    std::vector<HandoffEvent>* events;
    double t_abs = 0.0;
    const SegmentWalk* walk = nullptr;

    ServingBs serving_at(double t) const { return serving_bs(walk->at(t), dep, policy); }

    void resolve(double t0, const ServingBs& s0, double t1, const ServingBs& s1) {
        const double width = t1 - t0;
        if (s0 == s1) {
            if (width <= floor_dt) return;
        } else if (width <= time_tol) {
            const double tm = 0.5 * (t0 + t1);
            HandoffEvent e;
            e.time = t_abs + tm;
            e.position = walk->at(tm);
            e.from = s0;
            e.to = s1;
            e.vertical = s0.tier != s1.tier;
            events->push_back(e);
            return;
        }
        const double tm = 0.5 * (t0 + t1);
        const ServingBs sm = serving_at(tm);
        resolve(t0, s0, tm, sm);
        resolve(tm, sm, t1, s1);
    }
};

Trajectory translate(const Trajectory& traj, Vec2 shift) {
    Trajectory t = traj;
    for (Segment& s : t.segments) s.start = s.start + shift;
    return t;
}

// Region sized to cover the trajectory bounding box plus margin, and the
// translation that centers the trajectory on the origin.
Region centered_region(const Trajectory& traj, double margin, Vec2& shift) {
    Vec2 lo, hi;
    traj.bbox(lo, hi);
    shift = {-0.5 * (lo.x + hi.x), -0.5 * (lo.y + hi.y)};
    return Region::rectangle(hi.x - lo.x + 2.0 * margin, hi.y - lo.y + 2.0 * margin);
}

double max_segment_velocity(const Trajectory& traj) {
    double v = 0.0;
    for (const Segment& s : traj.segments)
        if (s.length > 0.0) v = std::max(v, s.velocity);
    return v;
}

struct RateTally {
    double events = 0.0;
    double elapsed = 0.0;
};

}  // namespace

void DeploymentSpec::validate() const {
    if (tiers.empty()) throw std::invalid_argument("deployment spec: at least one tier");
    for (const Tier& t : tiers) t.validate();
    if (layout.kind != LayoutKind::Ppp) {
        if (tiers.size() != 1)
            throw std::invalid_argument("deployment spec: lattice layouts have exactly one tier");
        if (!(layout.spacing > 0.0))
            throw std::invalid_argument("deployment spec: lattice spacing must be positive");
    }
}

double DeploymentSpec::min_density() const {
    double d = tiers[0].density;
    for (const Tier& t : tiers) d = std::min(d, t.density);
    return d;
}

Deployment realize_deployment(const DeploymentSpec& spec, const Region& region,
                              std::uint64_t seed) {
    spec.validate();
    if (spec.layout.kind == LayoutKind::Ppp)
        return build_ppp_deployment(spec.tiers, region, seed);
    // fresh uniform offset: the reference BS lands uniformly in one cell
    Rng rng(stream_seed(seed, 0x10));
    const double d = spec.layout.spacing;
    Vec2 offset;
    if (spec.layout.kind == LayoutKind::SquareLattice) {
        offset = {rng.uniform() * d, rng.uniform() * d};
    } else {
        const double s = std::sqrt(3.0) * d;  // triangular lattice spacing
        const double u = rng.uniform(), w = rng.uniform();
        offset = {u * s + w * 0.5 * s, w * s * std::sqrt(3.0) / 2.0};
    }
    return build_lattice(spec.layout.kind, d, region, offset, spec.tiers[0]);
}

std::vector<HandoffEvent> detect_handoffs(const Trajectory& traj, const Deployment& dep,
                                          AssociationPolicy policy, double dt_probe) {
    if (!(dt_probe > 0.0)) throw std::invalid_argument("detect_handoffs: dt_probe must be positive");
    const double v_max = max_segment_velocity(traj);
    if (v_max > 0.0 && dt_probe > dep.mean_cell_radius() / (10.0 * v_max))
        throw std::invalid_argument("detect_handoffs: probe step too coarse for this velocity");

    std::vector<HandoffEvent> events;
    Detector det{dep, policy, dt_probe / 100.0, dt_probe / 4.0, &events};

    for (const Segment& seg : traj.segments) {
        if (seg.length > 0.0 && seg.flight_time > 0.0) {
            SegmentWalk walk{seg.start, {std::cos(seg.theta), std::sin(seg.theta)}, seg.velocity};
            det.walk = &walk;
            ServingBs prev = det.serving_at(0.0);
            double t_prev = 0.0;
            while (t_prev < seg.flight_time) {
                const double t_next = std::min(t_prev + dt_probe, seg.flight_time);
                const ServingBs now = det.serving_at(t_next);
                det.resolve(t_prev, prev, t_next, now);
                prev = now;
                t_prev = t_next;
            }
        }
        det.t_abs += seg.flight_time + seg.pause;  // no events during pauses
    }
    return events;
}

// ---- replication engine -------------------------------------------------------

namespace {

template <bool Parallel, class Result, class OneRep>
std::vector<Result> run_replications(const ReplicationPlan& plan, OneRep&& one_rep) {
    if (plan.n_replications < 1)
        throw std::invalid_argument("replication plan: need n_replications >= 1");
    const std::int64_t n = static_cast<std::int64_t>(plan.n_replications);
    std::vector<Result> results(static_cast<std::size_t>(n));
    const int width = Parallel ? resolve_width(plan.parallel_width) : 1;
#pragma omp parallel for schedule(dynamic, 16) num_threads(width) if (Parallel)
    for (std::int64_t r = 0; r < n; ++r)
        results[static_cast<std::size_t>(r)] =
            one_rep(plan.base_seed + static_cast<std::uint64_t>(r));
    (void)width;
    return results;
}

template <bool Parallel>
Estimate handoff_rate_impl(const ModelConfig& model, const DeploymentSpec& dep,
                           AssociationPolicy policy, const ReplicationPlan& plan,
                           double seconds_per_replication) {
    dep.validate();
    validate_model(model);
    if (!(seconds_per_replication > 0.0))
        throw std::invalid_argument("estimate_handoff_rate: need positive time budget");
    const double guard = kGuardCellRadii * 0.5 / std::sqrt(dep.min_density());

    auto one_rep = [&](std::uint64_t seed) -> RateTally {
        TrajectorySampler sampler(model, {0, 0}, stream_seed(seed, kTrajectory));
        Trajectory traj;
        double elapsed = 0.0;
        while (elapsed < seconds_per_replication) {
            traj.segments.push_back(sampler.next());
            elapsed += traj.segments.back().flight_time + traj.segments.back().pause;
        }
        Vec2 shift;
        const Region region = centered_region(traj, guard, shift);
        const Trajectory centered = translate(traj, shift);
        const Deployment realized = realize_deployment(dep, region, stream_seed(seed, kDeployment));
        const double v_max = max_segment_velocity(centered);
        RateTally tally;
        tally.elapsed = elapsed;
        if (v_max > 0.0) {
            const double dt = realized.mean_cell_radius() / (10.0 * v_max);
            tally.events = static_cast<double>(detect_handoffs(centered, realized, policy, dt).size());
        }
        return tally;
    };

    const auto results = run_replications<Parallel, RateTally>(plan, one_rep);
    double total_events = 0.0, total_time = 0.0;
    for (const RateTally& t : results) {
        total_events += t.events;
        total_time += t.elapsed;
    }
    if (!(total_time > 0.0)) throw std::runtime_error("estimate_handoff_rate: zero elapsed time");
    const double rate = total_events / total_time;
    double ss = 0.0;
    for (const RateTally& t : results) {
        const double d = t.events - rate * t.elapsed;
        ss += d * d;
    }
    const double n = static_cast<double>(results.size());
    const double se = n > 1.5 ? std::sqrt(ss * n / (n - 1.0)) / total_time : 0.0;
    return Estimate::of(rate, se, plan.n_replications);
}

template <bool Parallel>
Estimate handoff_prob_impl(double v, const DeploymentSpec& dep, AssociationPolicy policy,
                           const ReplicationPlan& plan) {
    dep.validate();
    if (!(v >= 0.0)) throw std::invalid_argument("estimate_handoff_prob: v must be >= 0");
    if (v == 0.0) return Estimate::of(0.0, 0.0, plan.n_replications);
    const double extra = 1.0 / std::sqrt(dep.min_density());
    const Region region = Region::square(v + 2.0 * extra);

    auto one_rep = [&](std::uint64_t seed) -> std::uint8_t {
        Rng dir(stream_seed(seed, kDirection));
        const double theta = dir.uniform(0.0, 2.0 * kPi);
        const Vec2 half{0.5 * v * std::cos(theta), 0.5 * v * std::sin(theta)};
        const Deployment realized = realize_deployment(dep, region, stream_seed(seed, kDeployment));
        const ServingBs s0 = serving_bs({-half.x, -half.y}, realized, policy);
        const ServingBs s1 = serving_bs(half, realized, policy);
        return s0 == s1 ? 0 : 1;
    };

    const auto results = run_replications<Parallel, std::uint8_t>(plan, one_rep);
    double hits = 0.0;
    for (std::uint8_t h : results) hits += h;
    const double n = static_cast<double>(results.size());
    const double p = hits / n;
    const double se = std::sqrt(std::max(p * (1.0 - p), 0.0) / n);
    return Estimate::of(p, se, plan.n_replications);
}

struct CoverageTally {
    int start_tier = 0;
    int end_tier = 0;
    bool handoff = false;
    bool covered = false;
};

template <bool Parallel>
JointCoverageTable coverage_impl(double v, const CoverageSpec& spec, const DeploymentSpec& dep,
                                 AssociationPolicy policy, const ReplicationPlan& plan) {
    dep.validate();
    spec.validate(dep.tiers.size());
    if (!(v >= 0.0)) throw std::invalid_argument("estimate_joint_coverage_handoff: v >= 0");
    const double pad = 10.0 / std::sqrt(dep.min_density());  // interference horizon
    const Region region = Region::square(v + 2.0 * pad);

    auto one_rep = [&](std::uint64_t seed) -> CoverageTally {
        Rng dir(stream_seed(seed, kDirection));
        const double theta = dir.uniform(0.0, 2.0 * kPi);
        const Vec2 half{0.5 * v * std::cos(theta), 0.5 * v * std::sin(theta)};
        const Vec2 p0{-half.x, -half.y};
        const Vec2 p1 = half;
        const Deployment realized = realize_deployment(dep, region, stream_seed(seed, kDeployment));
        const ServingBs s0 = serving_bs(p0, realized, policy);
        const ServingBs s1 = serving_bs(p1, realized, policy);

        // Rayleigh block fading redrawn at end of the movement period;
        // interference is intra-tier only (orthogonal spectrum across tiers).
        Rng fad(stream_seed(seed, kFading));
        const auto& pts = realized.points[static_cast<std::size_t>(s1.tier)];
        const Tier& tier = realized.tiers[static_cast<std::size_t>(s1.tier)];
        double signal = 0.0, interference = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const double h = fad.exponential();
            const double d2 = std::max(dist2(p1, pts[i]), 1e-12);
            const double rx = h * tier.tx_power *
                              std::pow(d2, -0.5 * tier.pathloss_exponent);
            if (static_cast<int>(i) == s1.index)
                signal = rx;
            else
                interference += rx;
        }
        CoverageTally t;
        t.start_tier = s0.tier;
        t.end_tier = s1.tier;
        t.handoff = !(s0 == s1);
        const double tau = spec.sir_threshold[static_cast<std::size_t>(s1.tier)];
        t.covered = interference > 0.0 ? signal >= tau * interference : true;
        return t;
    };

    const auto results = run_replications<Parallel, CoverageTally>(plan, one_rep);
    const std::size_t nt = dep.tiers.size();
    JointCoverageTable table;
    table.n_tiers = static_cast<int>(nt);
    table.replications = plan.n_replications;
    table.association.assign(nt, 0.0);
    table.no_handoff_mass.assign(nt, 0.0);
    table.no_handoff_cov.assign(nt, 0.0);
    table.handoff_mass.assign(nt, std::vector<double>(nt, 0.0));
    table.handoff_cov.assign(nt, std::vector<double>(nt, 0.0));
    const double n = static_cast<double>(results.size());
    for (const CoverageTally& t : results) {
        const std::size_t k = static_cast<std::size_t>(t.start_tier);
        const std::size_t j = static_cast<std::size_t>(t.end_tier);
        table.association[k] += 1.0;
        if (t.handoff) {
            table.handoff_mass[k][j] += 1.0;
            if (t.covered) table.handoff_cov[k][j] += 1.0;
        } else {
            table.no_handoff_mass[k] += 1.0;
            if (t.covered) table.no_handoff_cov[k] += 1.0;
        }
    }
    for (std::size_t k = 0; k < nt; ++k) {
        table.association[k] /= n;
        table.no_handoff_mass[k] /= n;
        table.no_handoff_cov[k] /= n;
        for (std::size_t j = 0; j < nt; ++j) {
            table.handoff_mass[k][j] /= n;
            table.handoff_cov[k][j] /= n;
        }
    }
    return table;
}

template <bool Parallel>
Estimate sojourn_impl(double v, double T, const DeploymentSpec& dep, AssociationPolicy policy,
                      const ReplicationPlan& plan) {
    dep.validate();
    if (dep.tiers.size() != 1 || policy.kind != AssociationPolicy::Kind::NearestBs)
        throw std::invalid_argument("estimate_sojourn: single-tier nearest-BS only");
    if (!(T > 0.0) || !(v >= 0.0)) throw std::invalid_argument("estimate_sojourn: bad arguments");
    if (v == 0.0) return Estimate::of(T, 0.0, plan.n_replications);
    const double guard = kGuardCellRadii * 0.5 / std::sqrt(dep.min_density());
    const Region region = Region::square(v * T + 2.0 * guard);

    auto one_rep = [&](std::uint64_t seed) -> double {
        Rng dir(stream_seed(seed, kDirection));
        const double theta = dir.uniform(0.0, 2.0 * kPi);
        const double len = v * T;
        Trajectory traj;
        Segment seg;
        seg.start = {-0.5 * len * std::cos(theta), -0.5 * len * std::sin(theta)};
        seg.theta = theta;
        seg.length = len;
        seg.velocity = v;
        seg.flight_time = T;
        traj.segments.push_back(seg);
        const Deployment realized = realize_deployment(dep, region, stream_seed(seed, kDeployment));
        const double dt = std::min(realized.mean_cell_radius() / (10.0 * v), T);
        const auto events = detect_handoffs(traj, realized, policy, dt);
        return events.empty() ? T : std::min(events.front().time, T);
    };

    const auto results = run_replications<Parallel, double>(plan, one_rep);
    double sum = 0.0;
    for (double s : results) sum += s;
    const double n = static_cast<double>(results.size());
    const double mean = sum / n;
    double ss = 0.0;
    for (double s : results) ss += (s - mean) * (s - mean);
    const double se = n > 1.5 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    return Estimate::of(mean, se, plan.n_replications);
}

}  // namespace

Estimate estimate_handoff_rate(const ModelConfig& model, const DeploymentSpec& dep,
                               AssociationPolicy policy, const ReplicationPlan& plan,
                               double seconds_per_replication) {
    return handoff_rate_impl<true>(model, dep, policy, plan, seconds_per_replication);
}

Estimate estimate_handoff_rate_serial(const ModelConfig& model, const DeploymentSpec& dep,
                                      AssociationPolicy policy, const ReplicationPlan& plan,
                                      double seconds_per_replication) {
    return handoff_rate_impl<false>(model, dep, policy, plan, seconds_per_replication);
}

Estimate estimate_handoff_prob(double v, const DeploymentSpec& dep, AssociationPolicy policy,
                               const ReplicationPlan& plan) {
    return handoff_prob_impl<true>(v, dep, policy, plan);
}

Estimate estimate_handoff_prob_serial(double v, const DeploymentSpec& dep,
                                      AssociationPolicy policy, const ReplicationPlan& plan) {
    return handoff_prob_impl<false>(v, dep, policy, plan);
}

JointCoverageTable estimate_joint_coverage_handoff(double v, const CoverageSpec& spec,
                                                   const DeploymentSpec& dep,
                                                   AssociationPolicy policy,
                                                   const ReplicationPlan& plan) {
    return coverage_impl<true>(v, spec, dep, policy, plan);
}

JointCoverageTable estimate_joint_coverage_handoff_serial(double v, const CoverageSpec& spec,
                                                          const DeploymentSpec& dep,
                                                          AssociationPolicy policy,
                                                          const ReplicationPlan& plan) {
    return coverage_impl<false>(v, spec, dep, policy, plan);
}

Estimate estimate_sojourn(double v, double T, const DeploymentSpec& dep,
                          AssociationPolicy policy, const ReplicationPlan& plan) {
    return sojourn_impl<true>(v, T, dep, policy, plan);
}

Estimate estimate_sojourn_serial(double v, double T, const DeploymentSpec& dep,
                                 AssociationPolicy policy, const ReplicationPlan& plan) {
    return sojourn_impl<false>(v, T, dep, policy, plan);
}

void write_event_csv(std::ostream& os, const std::vector<HandoffEvent>& events) {
    os << "time,x,y,from_tier,from_index,to_tier,to_index,kind\n";
    char buf[256];
    for (const HandoffEvent& e : events) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%d,%d,%d,%d,%s\n", e.time,
                      e.position.x, e.position.y, e.from.tier, e.from.index, e.to.tier,
                      e.to.index, e.vertical ? "vertical" : "horizontal");
        os << buf;
    }
}

std::uint64_t config_digest(const nlohmann::json& config) {
    const std::string s = config.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

nlohmann::json estimate_to_json(const Estimate& e, std::uint64_t seed,
                                std::uint64_t config_digest) {
    return {{"mean", e.mean},
            {"se", e.std_error},
            {"ci", {e.ci95_low, e.ci95_high}},
            {"n", e.n},
            {"seed", seed},
            {"config_digest", config_digest}};
}

}  // namespace cellmob
