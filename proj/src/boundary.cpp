#include "cellmob/boundary.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace cellmob {

namespace {

struct ProbeSet {
    Vec2 dir[16];  // 8 primary directions then the 8 midpoint refinements
    ProbeSet() {
        for (int k = 0; k < 8; ++k) {
            const double a = k * std::numbers::pi / 4.0;
            dir[k] = {std::cos(a), std::sin(a)};
        }
        for (int k = 0; k < 8; ++k) {
            const double a = (k + 0.5) * std::numbers::pi / 4.0;
            dir[8 + k] = {std::cos(a), std::sin(a)};
        }
    }
};

// Point is in the Delta-d extended boundary set when any probe at radius
// delta_d sees a different serving BS than the center.
bool in_extended_boundary(Vec2 u, double delta_d, const Deployment& dep,
                          AssociationPolicy policy) {
    static const ProbeSet probes;
    const ServingBs center = serving_bs(u, dep, policy);
    ServingBs at[8];
    for (int k = 0; k < 8; ++k) {
        at[k] = serving_bs(u + probes.dir[k] * delta_d, dep, policy);
        if (!(at[k] == center)) return true;
    }
    for (int k = 0; k < 8; ++k) {
        if (at[k] == at[(k + 1) & 7]) continue;
        const ServingBs mid = serving_bs(u + probes.dir[8 + k] * delta_d, dep, policy);
        if (!(mid == center)) return true;
    }
    return false;
}

template <bool Parallel>
BoundaryIntensityEstimate estimate_impl(const Deployment& dep, AssociationPolicy policy,
                                        double delta_d, std::uint64_t n_samples,
                                        std::uint64_t seed) {
    if (dep.empty()) throw std::invalid_argument("estimate_length_intensity: empty deployment");
    if (!(delta_d > 0.0))
        throw std::invalid_argument("estimate_length_intensity: delta_d must be positive");
    if (delta_d >= dep.mean_cell_radius())
        throw std::invalid_argument(
            "estimate_length_intensity: delta_d must be well below the mean cell radius");
    if (n_samples < 10000)
        throw std::invalid_argument("estimate_length_intensity: need at least 1e4 samples");

    const std::int64_t n = static_cast<std::int64_t>(n_samples);
    std::int64_t hits = 0;
#pragma omp parallel for reduction(+ : hits) schedule(static) if (Parallel)
    for (std::int64_t i = 0; i < n; ++i) {
        Rng rng = Rng::for_stream(seed, static_cast<std::uint64_t>(i));
        const Vec2 u = dep.region.sample(rng);
        if (in_extended_boundary(u, delta_d, dep, policy)) ++hits;
    }

    const double frac = static_cast<double>(hits) / static_cast<double>(n_samples);
    const double se_frac = std::sqrt(std::max(frac * (1.0 - frac), 0.0) /
                                     static_cast<double>(n_samples));
    BoundaryIntensityEstimate est;
    est.delta_d = delta_d;
    est.samples = n_samples;
    est.mu1_hat = frac / (2.0 * delta_d);
    est.ci95_halfwidth = 1.96 * se_frac / (2.0 * delta_d);
    est.fraction_warning = frac > 0.5;
    return est;
}

}  // namespace

BoundaryIntensityEstimate estimate_length_intensity(const Deployment& dep,
                                                    AssociationPolicy policy, double delta_d,
                                                    std::uint64_t n_samples,
                                                    std::uint64_t seed) {
    return estimate_impl<true>(dep, policy, delta_d, n_samples, seed);
}

BoundaryIntensityEstimate estimate_length_intensity_serial(const Deployment& dep,
                                                           AssociationPolicy policy,
                                                           double delta_d,
                                                           std::uint64_t n_samples,
                                                           std::uint64_t seed) {
    return estimate_impl<false>(dep, policy, delta_d, n_samples, seed);
}

}  // namespace cellmob
