#include "cellmob/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cellmob {

namespace {

constexpr double kPi = std::numbers::pi;

// |B(u1, r_new) \ B(u0, r_old)| for centers a distance d apart.
double disk_difference_area(double d, double r_old, double r_new) {
    if (!(r_new > 0.0)) return 0.0;
    double inter;
    if (r_old <= 0.0 || d >= r_old + r_new) {
        inter = 0.0;
    } else if (d <= std::abs(r_new - r_old)) {
        const double rm = std::min(r_old, r_new);
        inter = kPi * rm * rm;
    } else {
        const double c1 = std::clamp((d * d + r_old * r_old - r_new * r_new) /
                                         (2.0 * d * r_old), -1.0, 1.0);
        const double c2 = std::clamp((d * d + r_new * r_new - r_old * r_old) /
                                         (2.0 * d * r_new), -1.0, 1.0);
        const double s = (-d + r_old + r_new) * (d + r_old - r_new) * (d - r_old + r_new) *
                         (d + r_old + r_new);
        inter = r_old * r_old * std::acos(c1) + r_new * r_new * std::acos(c2) -
                0.5 * std::sqrt(std::max(0.0, s));
    }
    return kPi * r_new * r_new - inter;
}

double lens_area_branch(double r, double v, double theta, bool corrected) {
    const double R = displaced_distance(r, v, theta);
    if (R <= 0.0) return 0.0;  // r == v, theta == pi: the displaced ball is empty
    const double s = std::clamp(v * std::sin(theta) / R, -1.0, 1.0);
    double phi = std::asin(s);
    if (corrected && theta > kPi / 2.0 && v * std::cos(kPi - theta) > r)
        phi = kPi - phi;
    const double area = R * R * (kPi - theta + phi) - r * r * (kPi - theta) +
                        r * v * std::sin(theta);
    return std::max(area, 0.0);
}

}  // namespace

double handoff_rate(double mu1, const MobilityMoments& moments) {
    if (!(mu1 >= 0.0)) throw std::invalid_argument("handoff_rate: mu1 must be nonnegative");
    moments.validate();
    const double duty = moments.mean_flight_time /
                        (moments.mean_flight_time + moments.mean_pause);
    return 2.0 / kPi * moments.mean_speed * mu1 * duty;
}

double handoff_rate_directional(double v, double theta, double mu1,
                                const MobilityMoments& moments) {
    if (!(v >= 0.0)) throw std::invalid_argument("handoff_rate_directional: v must be >= 0");
    moments.validate();
    const double duty = moments.mean_flight_time /
                        (moments.mean_flight_time + moments.mean_pause);
    return v * std::abs(std::sin(theta)) * mu1 * duty;
}

double drone_handoff_rate(double mean_speed, double lambda) {
    if (!(mean_speed >= 0.0) || !(lambda > 0.0))
        throw std::invalid_argument("drone_handoff_rate: bad arguments");
    return mean_speed * std::sqrt(lambda);
}

double displaced_distance(double r, double v, double theta) {
    return std::sqrt(std::max(0.0, r * r + v * v + 2.0 * r * v * std::cos(theta)));
}

double lens_area(double r, double v, double theta) { return lens_area_branch(r, v, theta, true); }

double lens_area_uncorrected(double r, double v, double theta) {
    return lens_area_branch(r, v, theta, false);
}

double handoff_prob_conditional(double r, double theta, double v, double lambda) {
    return 1.0 - std::exp(-lambda * lens_area(r, v, theta));
}

double handoff_prob_conditional_uncorrected(double r, double theta, double v, double lambda) {
    return 1.0 - std::exp(-lambda * lens_area_uncorrected(r, v, theta));
}

QuadOutcome handoff_prob(double v, double lambda, const QuadratureSpec& quad) {
    if (!(v >= 0.0)) throw std::invalid_argument("handoff_prob: v must be >= 0");
    if (!(lambda > 0.0)) throw std::invalid_argument("handoff_prob: lambda must be positive");
    if (v == 0.0) return {0.0, 0.0, true};

    const double r_max = quad.r_max_factor / std::sqrt(lambda);
    const double tail = std::exp(-lambda * kPi * r_max * r_max);
    QuadratureSpec inner = quad;
    inner.abs_tol = quad.abs_tol / 10.0;
    inner.rel_tol = quad.rel_tol / 10.0;

    bool inner_ok = true;
    auto theta_integrand = [&](double theta) {
        const double split = theta > kPi / 2.0 ? v * std::cos(kPi - theta) : 0.0;
        const double bp[1] = {split};
        const auto res = integrate(
            [&](double r) {
                return handoff_prob_conditional(r, theta, v, lambda) * 2.0 * lambda * kPi *
                       r * std::exp(-lambda * kPi * r * r);
            },
            0.0, r_max, inner, bp);
        inner_ok = inner_ok && res.converged;
        return res.value;
    };

    const double bp_theta[1] = {kPi / 2.0};
    const auto outer = integrate(theta_integrand, 0.0, kPi, quad, bp_theta);

    QuadOutcome out;
    out.value = std::clamp(outer.value / kPi, 0.0, 1.0);
    out.error = outer.error / kPi + tail;
    out.converged = outer.converged && inner_ok;
    return out;
}

double equivalent_radius(const Tier& from, const Tier& to, double r) {
    if (r <= 0.0) return 0.0;
    const double power_ratio = (to.tx_power * to.bias) / (from.tx_power * from.bias);
    return std::pow(power_ratio, 1.0 / to.pathloss_exponent) *
           std::pow(r, from.pathloss_exponent / to.pathloss_exponent);
}

namespace {

bool equal_exponents(const std::vector<Tier>& tiers) {
    for (const Tier& t : tiers)
        if (t.pathloss_exponent != tiers[0].pathloss_exponent) return false;
    return true;
}

// Joint density of (serving distance r, association with tier k) under the
// equivalent-distance thinning: no tier j may have a point closer (in biased
// power) than the tier-k BS at r.
double serving_distance_joint_density(const std::vector<Tier>& tiers, int k, double r) {
    const Tier& tk = tiers[static_cast<std::size_t>(k)];
    double exponent = 0.0;
    for (const Tier& tj : tiers) {
        const double rj = equivalent_radius(tk, tj, r);
        exponent += tj.density * rj * rj;
    }
    return 2.0 * kPi * tk.density * r * std::exp(-kPi * exponent);
}

}  // namespace

double tier_association_probability(const std::vector<Tier>& tiers, int k,
                                    const QuadratureSpec& quad) {
    if (tiers.empty() || k < 0 || static_cast<std::size_t>(k) >= tiers.size())
        throw std::invalid_argument("tier_association_probability: bad tier index");
    if (equal_exponents(tiers)) return tier_association_closed_form(tiers, k);
    const double r_max =
        quad.r_max_factor / std::sqrt(tiers[static_cast<std::size_t>(k)].density);
    return integrate([&](double r) { return serving_distance_joint_density(tiers, k, r); },
                     0.0, r_max, quad)
        .value;
}

namespace {

// E_{r,theta}[ prod over the listed tiers of exp(-lambda_j * area_j) | n=k ].
// area_j is the tier-j equivalent displaced-disk difference; for j == k this
// is exactly the corrected single-tier lens.
QuadOutcome multi_tier_conditional_survival(int k, const std::vector<int>& js, double v,
                                            const std::vector<Tier>& tiers,
                                            const QuadratureSpec& quad) {
    const Tier& tk = tiers[static_cast<std::size_t>(k)];
    const double a_k = tier_association_probability(tiers, k, quad);
    const double r_max = quad.r_max_factor / std::sqrt(tk.density);
    const double tail = std::exp(-tk.density * kPi * r_max * r_max);
    QuadratureSpec inner = quad;
    inner.abs_tol = quad.abs_tol / 10.0;
    inner.rel_tol = quad.rel_tol / 10.0;

    bool inner_ok = true;
    auto theta_integrand = [&](double theta) {
        const double split = theta > kPi / 2.0 ? v * std::cos(kPi - theta) : 0.0;
        const double bp[1] = {split};
        const auto res = integrate(
            [&](double r) {
                const double big_r = displaced_distance(r, v, theta);
                double log_void = 0.0;
                for (int j : js) {
                    const Tier& tj = tiers[static_cast<std::size_t>(j)];
                    double area;
                    if (j == k) {
                        area = lens_area(r, v, theta);
                    } else {
                        const double r_eq = equivalent_radius(tk, tj, r);
                        const double big_r_eq = equivalent_radius(tk, tj, big_r);
                        area = disk_difference_area(v, r_eq, big_r_eq);
                    }
                    log_void -= tj.density * area;
                }
                return std::exp(log_void) * serving_distance_joint_density(tiers, k, r);
            },
            0.0, r_max, inner, bp);
        inner_ok = inner_ok && res.converged;
        return res.value;
    };

    const double bp_theta[1] = {kPi / 2.0};
    const auto outer = integrate(theta_integrand, 0.0, kPi, quad, bp_theta);

    QuadOutcome out;
    out.value = std::clamp(outer.value / (kPi * a_k), 0.0, 1.0);
    out.error = outer.error / (kPi * a_k) + tail;
    out.converged = outer.converged && inner_ok;
    return out;
}

}  // namespace

QuadOutcome multi_tier_no_handoff_prob(int k, int j, double v, const std::vector<Tier>& tiers,
                                       const QuadratureSpec& quad) {
    if (tiers.empty()) throw std::invalid_argument("multi_tier_no_handoff_prob: no tiers");
    if (k < 0 || j < 0 || static_cast<std::size_t>(k) >= tiers.size() ||
        static_cast<std::size_t>(j) >= tiers.size())
        throw std::invalid_argument("multi_tier_no_handoff_prob: bad tier index");
    if (v == 0.0) return {1.0, 0.0, true};
    if (tiers.size() == 1) {
        const QuadOutcome h = handoff_prob(v, tiers[0].density, quad);
        return {1.0 - h.value, h.error, h.converged};
    }
    return multi_tier_conditional_survival(k, {j}, v, tiers, quad);
}

MultiTierHandoff multi_tier_handoff_prob(double v, const std::vector<Tier>& tiers,
                                         const QuadratureSpec& quad) {
    if (tiers.empty()) throw std::invalid_argument("multi_tier_handoff_prob: no tiers");
    const int n = static_cast<int>(tiers.size());
    MultiTierHandoff out;
    out.per_tier.resize(tiers.size(), 0.0);
    out.association.resize(tiers.size(), 0.0);
    out.converged = true;
    for (int k = 0; k < n; ++k)
        out.association[static_cast<std::size_t>(k)] =
            tier_association_probability(tiers, k, quad);

    if (n == 1) {
        const QuadOutcome h = handoff_prob(v, tiers[0].density, quad);
        out.per_tier[0] = h.value;
        out.total = h.value;
        out.error = h.error;
        out.converged = h.converged;
        return out;
    }

    std::vector<int> all(tiers.size());
    for (int j = 0; j < n; ++j) all[static_cast<std::size_t>(j)] = j;
    for (int k = 0; k < n; ++k) {
        if (v == 0.0) continue;
        // The no-handoff events across tiers share the conditioning on
        // (r, theta), so the product is taken inside the expectation.
        const QuadOutcome survive = multi_tier_conditional_survival(k, all, v, tiers, quad);
        out.per_tier[static_cast<std::size_t>(k)] = 1.0 - survive.value;
        out.error += out.association[static_cast<std::size_t>(k)] * survive.error;
        out.converged = out.converged && survive.converged;
    }
    out.total = 0.0;
    for (int k = 0; k < n; ++k)
        out.total += out.association[static_cast<std::size_t>(k)] *
                     out.per_tier[static_cast<std::size_t>(k)];
    return out;
}

void CoverageSpec::validate(std::size_t n_tiers) const {
    if (sir_threshold.size() != n_tiers)
        throw std::invalid_argument("coverage: one SIR threshold per tier required");
    for (double tau : sir_threshold)
        if (!(tau > 0.0)) throw std::invalid_argument("coverage: thresholds must be positive");
    if (!(handoff_cost >= 0.0) || !(handoff_cost <= 1.0))
        throw std::invalid_argument("coverage: beta must lie in [0,1]");
}

void JointCoverageTable::validate() const {
    const std::size_t n = static_cast<std::size_t>(n_tiers);
    if (association.size() != n || no_handoff_mass.size() != n || handoff_mass.size() != n ||
        no_handoff_cov.size() != n || handoff_cov.size() != n)
        throw std::invalid_argument("joint table: shape mismatch");
    const double tol = 1e-9 + 3.0 / std::sqrt(std::max<double>(1.0, replications));
    for (std::size_t k = 0; k < n; ++k) {
        double row = no_handoff_mass[k];
        for (double m : handoff_mass[k]) row += m;
        if (row > association[k] + tol)
            throw std::invalid_argument("joint table: row mass exceeds association probability");
        if (no_handoff_cov[k] > no_handoff_mass[k] + tol)
            throw std::invalid_argument("joint table: coverage mass exceeds event mass");
        for (std::size_t j = 0; j < n; ++j)
            if (handoff_cov[k][j] > handoff_mass[k][j] + tol)
                throw std::invalid_argument("joint table: coverage mass exceeds event mass");
    }
}

CoverageResult mobility_aware_coverage(const CoverageSpec& spec,
                                       const JointCoverageTable& table) {
    spec.validate(static_cast<std::size_t>(table.n_tiers));
    table.validate();
    CoverageResult out;
    out.per_tier.resize(static_cast<std::size_t>(table.n_tiers), 0.0);
    for (std::size_t k = 0; k < out.per_tier.size(); ++k) {
        double handoff_part = 0.0;
        for (double c : table.handoff_cov[k]) handoff_part += c;
        out.per_tier[k] = (1.0 - spec.handoff_cost) * handoff_part + table.no_handoff_cov[k];
        out.overall += out.per_tier[k];
    }
    return out;
}

ThroughputResult mobility_aware_throughput(double avg_throughput, double handoff_rate,
                                           double delay_per_handoff) {
    if (!(avg_throughput >= 0.0) || !(handoff_rate >= 0.0) || !(delay_per_handoff >= 0.0))
        throw std::invalid_argument("mobility_aware_throughput: negative input");
    const double hd = handoff_rate * delay_per_handoff;
    ThroughputResult out;
    out.saturated = hd >= 1.0;
    out.value = out.saturated ? 0.0 : avg_throughput * (1.0 - hd);
    return out;
}

QuadOutcome sojourn_time(double v, double T, double lambda, const QuadratureSpec& quad) {
    if (!(v >= 0.0) || !(T > 0.0) || !(lambda > 0.0))
        throw std::invalid_argument("sojourn_time: bad arguments");
    if (v == 0.0) return {T, 0.0, true};
    QuadratureSpec inner = quad;
    bool inner_ok = true;
    double inner_err = 0.0;
    const auto res = integrate(
        [&](double t) {
            const QuadOutcome p = handoff_prob(v * t, lambda, inner);
            inner_ok = inner_ok && p.converged;
            inner_err = std::max(inner_err, p.error);
            return p.value;
        },
        0.0, T, quad.abs_tol * std::max(1.0, T), quad.rel_tol, quad.max_subdivisions);
    QuadOutcome out;
    out.value = std::clamp(T - res.value, 0.0, T);
    out.error = res.error + inner_err * T;
    out.converged = res.converged && inner_ok;
    return out;
}

QuadOutcome sojourn_time(double v, double T, const std::vector<Tier>& tiers,
                         const QuadratureSpec& quad) {
    if (tiers.size() != 1)
        throw std::invalid_argument(
            "sojourn_time: multi-tier cells are not convex; single tier required");
    return sojourn_time(v, T, tiers[0].density, quad);
}

nlohmann::json analysis_record(const nlohmann::json& inputs, double value,
                               double error_estimate, const std::string& method) {
    return {{"inputs", inputs},
            {"value", value},
            {"error_estimate", error_estimate},
            {"method", method}};
}

}  // namespace cellmob
