#pragma once

#include <cstdint>

#include "cellmob/geometry.hpp"

namespace cellmob {

struct BoundaryIntensityEstimate {
    double mu1_hat = 0.0;         // boundary length per unit area (1/m)
    double delta_d = 0.0;         // probe radius used (m)
    std::uint64_t samples = 0;
    double ci95_halfwidth = 0.0;  // on mu1_hat
    bool fraction_warning = false;  // set when the boundary fraction exceeds 0.5
};

// Monte Carlo estimate of the cell-boundary length intensity via the
// Delta-d extension: the fraction of uniform points within perpendicular
// distance delta_d of a boundary, divided by 2*delta_d. Membership is tested
// by probing the serving BS at radius delta_d in 8 directions plus one
// midpoint refinement between adjacent probes that disagree.
BoundaryIntensityEstimate estimate_length_intensity(const Deployment& dep,
                                                    AssociationPolicy policy, double delta_d,
                                                    std::uint64_t n_samples, std::uint64_t seed);

// Loop-serial reference implementation; must match the parallel kernel
// bit for bit.
BoundaryIntensityEstimate estimate_length_intensity_serial(const Deployment& dep,
                                                           AssociationPolicy policy,
                                                           double delta_d,
                                                           std::uint64_t n_samples,
                                                           std::uint64_t seed);

}  // namespace cellmob
