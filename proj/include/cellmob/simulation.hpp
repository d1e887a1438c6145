#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <json.hpp>

#include "cellmob/analysis.hpp"
#include "cellmob/geometry.hpp"
#include "cellmob/mobility.hpp"

namespace cellmob {

// Replication r always uses seed base_seed + r, so results are independent
// of scheduling and of parallel_width (0 = all available workers).
struct ReplicationPlan {
    std::uint64_t n_replications = 100000;
    std::uint64_t base_seed = 1;
    int parallel_width = 0;
};

struct Estimate {
    double mean = 0.0;
    double std_error = 0.0;
    double ci95_low = 0.0;
    double ci95_high = 0.0;
    std::uint64_t n = 0;

    static Estimate of(double mean, double std_error, std::uint64_t n) {
        return {mean, std_error, mean - 1.96 * std_error, mean + 1.96 * std_error, n};
    }
};

struct HandoffEvent {
    double time = 0.0;  // absolute trajectory time, pauses included
    Vec2 position;
    ServingBs from;
    ServingBs to;
    bool vertical = false;  // tier change
};

// Layout plus tier parameters; the concrete region and point realization are
// drawn per replication (fresh PPP, or fresh uniform lattice offset).
struct DeploymentSpec {
    Layout layout;
    std::vector<Tier> tiers;
    void validate() const;
    double min_density() const;
};

Deployment realize_deployment(const DeploymentSpec& spec, const Region& region,
                              std::uint64_t seed);

// Serving-BS identity sampled along each segment at spacing <= dt_probe, each
// change bracketed and bisected to dt_probe/100; intervals with agreeing
// endpoints are still midpoint-checked down to dt_probe/4 so double crossings
// inside one probe step are recovered.
std::vector<HandoffEvent> detect_handoffs(const Trajectory& traj, const Deployment& dep,
                                          AssociationPolicy policy, double dt_probe);

// Total events / total elapsed (transition + pause) time across replications,
// each replication carrying ~seconds_per_replication of trajectory.
Estimate estimate_handoff_rate(const ModelConfig& model, const DeploymentSpec& dep,
                               AssociationPolicy policy, const ReplicationPlan& plan,
                               double seconds_per_replication);
Estimate estimate_handoff_rate_serial(const ModelConfig& model, const DeploymentSpec& dep,
                                      AssociationPolicy policy, const ReplicationPlan& plan,
                                      double seconds_per_replication);

// Fraction of unit-duration movement periods whose end serving BS differs
// from the start serving BS (state-change semantics).
Estimate estimate_handoff_prob(double v, const DeploymentSpec& dep, AssociationPolicy policy,
                               const ReplicationPlan& plan);
Estimate estimate_handoff_prob_serial(double v, const DeploymentSpec& dep,
                                      AssociationPolicy policy, const ReplicationPlan& plan);

// Joint end-of-period coverage/handoff masses with Rayleigh block fading and
// intra-tier interference only.
JointCoverageTable estimate_joint_coverage_handoff(double v, const CoverageSpec& spec,
                                                   const DeploymentSpec& dep,
                                                   AssociationPolicy policy,
                                                   const ReplicationPlan& plan);
JointCoverageTable estimate_joint_coverage_handoff_serial(double v, const CoverageSpec& spec,
                                                          const DeploymentSpec& dep,
                                                          AssociationPolicy policy,
                                                          const ReplicationPlan& plan);

// Mean of min(first serving-change time, T); single-tier nearest-BS only.
Estimate estimate_sojourn(double v, double T, const DeploymentSpec& dep,
                          AssociationPolicy policy, const ReplicationPlan& plan);
Estimate estimate_sojourn_serial(double v, double T, const DeploymentSpec& dep,
                                 AssociationPolicy policy, const ReplicationPlan& plan);

void write_event_csv(std::ostream& os, const std::vector<HandoffEvent>& events);
std::uint64_t config_digest(const nlohmann::json& config);
nlohmann::json estimate_to_json(const Estimate& e, std::uint64_t seed,
                                std::uint64_t config_digest);

}  // namespace cellmob
