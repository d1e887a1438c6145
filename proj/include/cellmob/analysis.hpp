#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "cellmob/geometry.hpp"
#include "cellmob/mobility.hpp"
#include "cellmob/quadrature.hpp"

namespace cellmob {

// ---- trajectory-based closed forms (Buffon) ----------------------------------

// H = (2/pi) E[V] mu1 * E[T]/(E[T]+E[S]); valid for any mobility model with
// uniformly distributed direction.
double handoff_rate(double mu1, const MobilityMoments& moments);

// Conditioned on direction: v |sin(theta)| mu1 * E[T]/(E[T]+E[S]).
double handoff_rate_directional(double v, double theta, double mu1,
                                const MobilityMoments& moments);

// 3-D drone over a single-tier PPP, no pause: E[v] E[sin phi] E|sin theta| mu1
// which collapses to vbar * sqrt(lambda).
double drone_handoff_rate(double mean_speed, double lambda);

// ---- association-based single-tier quantities --------------------------------

// Law of cosines with theta measured from the directly-away direction:
// R = sqrt(r^2 + v^2 + 2 r v cos theta).
double displaced_distance(double r, double v, double theta);

// Area of b(u1,R) \ b(u0,r). The corrected form switches the angle branch to
// pi - asin(...) when theta > pi/2 and v cos(pi-theta) > r.
double lens_area(double r, double v, double theta);
// The original single-branch form, kept to demonstrate where it breaks.
double lens_area_uncorrected(double r, double v, double theta);

double handoff_prob_conditional(double r, double theta, double v, double lambda);
double handoff_prob_conditional_uncorrected(double r, double theta, double v, double lambda);

struct QuadOutcome {
    double value = 0.0;
    double error = 0.0;
    bool converged = false;
};

// P(H) for a single-tier PPP under nearest-BS association: theta uniform on
// [0,pi], serving distance Rayleigh, three-region split at theta = pi/2 and
// r = v cos(pi - theta).
QuadOutcome handoff_prob(double v, double lambda, const QuadratureSpec& quad);

// ---- multi-tier (biased association, equivalent-distance mapping) ------------

// Equivalent tier-j radius of a tier-k distance r: the distance at which a
// tier-j BS delivers the same biased power, (PjBj/PkBk)^(1/aj) r^(ak/aj).
double equivalent_radius(const Tier& from, const Tier& to, double r);

// Association probability of tier k; closed form when all exponents are
// equal, otherwise quadrature of the equivalent-distance thinning density.
double tier_association_probability(const std::vector<Tier>& tiers, int k,
                                    const QuadratureSpec& quad);

// Per-pair de-conditioned no-handoff probability P(Hbar_{k,j}).
QuadOutcome multi_tier_no_handoff_prob(int k, int j, double v, const std::vector<Tier>& tiers,
                                       const QuadratureSpec& quad);

struct MultiTierHandoff {
    std::vector<double> per_tier;     // P(H_k)
    std::vector<double> association;  // A_k
    double total = 0.0;               // H0 = sum_k A_k P(H_k)
    double error = 0.0;
    bool converged = false;
};
MultiTierHandoff multi_tier_handoff_prob(double v, const std::vector<Tier>& tiers,
                                         const QuadratureSpec& quad);

// ---- coverage and throughput --------------------------------------------------

struct CoverageSpec {
    std::vector<double> sir_threshold;  // tau_k per tier
    double handoff_cost = 0.0;          // beta in [0,1]
    void validate(std::size_t n_tiers) const;
};

// Joint probability table produced by the simulation engine. Masses are
// plain probabilities of joint events at the end of one movement period.
struct JointCoverageTable {
    int n_tiers = 0;
    std::vector<double> association;                // P(n=k)
    std::vector<double> no_handoff_mass;            // P(n=k, Hbar_k)
    std::vector<std::vector<double>> handoff_mass;  // P(n=k, H_{k,j})
    std::vector<double> no_handoff_cov;             // P(gamma_k>=tau_k, n=k, Hbar_k)
    std::vector<std::vector<double>> handoff_cov;   // P(gamma_j>=tau_j, n=k, H_{k,j})
    std::uint64_t replications = 0;
    void validate() const;
};

struct CoverageResult {
    std::vector<double> per_tier;  // C_k
    double overall = 0.0;
};

// C_k = (1-beta) sum_j P(gamma_j>=tau_j, n=k, H_{k,j}) + P(gamma_k>=tau_k, n=k, Hbar_k).
CoverageResult mobility_aware_coverage(const CoverageSpec& spec,
                                       const JointCoverageTable& table);

struct ThroughputResult {
    double value = 0.0;
    bool saturated = false;  // H*d reached 1 and the factor was clamped to 0
};
ThroughputResult mobility_aware_throughput(double avg_throughput, double handoff_rate,
                                           double delay_per_handoff);

// ---- sojourn time --------------------------------------------------------------

// Sbar = T - int_0^T P(H | displacement v t) dt for a single movement period
// on a single-tier PPP with nearest-BS association (convex cells).
QuadOutcome sojourn_time(double v, double T, double lambda, const QuadratureSpec& quad);
QuadOutcome sojourn_time(double v, double T, const std::vector<Tier>& tiers,
                         const QuadratureSpec& quad);  // rejects multi-tier input

// ---- reporting ------------------------------------------------------------------

// Uniform JSON record for analytical results: {inputs, value, error_estimate, method}.
nlohmann::json analysis_record(const nlohmann::json& inputs, double value,
                               double error_estimate, const std::string& method);

}  // namespace cellmob
