#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "cellmob/region.hpp"

namespace cellmob {

// One class of base stations: density, transmit power, association bias and
// path-loss exponent. alpha > 2 keeps 2-D interference integrable.
struct Tier {
    double density = 0.0;            // BS per m^2
    double tx_power = 1.0;           // watts
    double bias = 1.0;               // dimensionless association bias
    double pathloss_exponent = 4.0;  // alpha

    void validate() const;
    // mean cell radius 1/(2 sqrt(lambda)) of the tier's own point process
    double mean_cell_radius() const { return 0.5 / std::sqrt(density); }
};

enum class LayoutKind { Ppp, SquareLattice, HexLattice };

struct Layout {
    LayoutKind kind = LayoutKind::Ppp;
    double spacing = 0.0;  // square spacing d, or hexagon side length d
};

struct AssociationPolicy {
    enum class Kind { NearestBs, MaxBiasedPower };
    Kind kind = Kind::NearestBs;
    static AssociationPolicy nearest() { return {Kind::NearestBs}; }
    static AssociationPolicy biased_power() { return {Kind::MaxBiasedPower}; }
};

struct ServingBs {
    int tier = -1;
    int index = -1;
    bool operator==(const ServingBs&) const = default;
    bool valid() const { return tier >= 0; }
};

// Uniform-cell index over one tier's points; answers nearest-point queries by
// expanding ring search. Ties on squared distance go to the lowest index.
class SpatialGrid {
public:
    SpatialGrid() = default;
    void build(const std::vector<Vec2>& points);
    // returns index of nearest point and its squared distance; (-1, inf) if empty
    std::pair<int, double> nearest(Vec2 u) const;
    bool empty() const { return n_points_ == 0; }

private:
    double x0_ = 0, y0_ = 0, h_ = 1;
    int nx_ = 0, ny_ = 0;
    std::size_t n_points_ = 0;
    std::vector<std::uint32_t> cell_start_;  // CSR offsets, size nx*ny+1
    std::vector<std::uint32_t> order_;       // point indices grouped by cell
    const std::vector<Vec2>* points_ = nullptr;
    bool brute_ = false;
};

// A realized multi-tier deployment. Immutable after construction; the
// per-tier indexes make serving queries safe for concurrent readers.
struct Deployment {
    std::vector<Tier> tiers;
    std::vector<std::vector<Vec2>> points;  // one list per tier
    Layout layout;
    Region region;  // undilated region of interest (points may extend into the guard band)

    std::vector<SpatialGrid> index;  // per tier, built by finalize()

    void finalize();
    bool empty() const;
    std::size_t total_points() const;
    // largest tier mean cell radius (sparsest tier governs edge effects)
    double mean_cell_radius() const;
};

// Deployments are generated on the region dilated by this many mean cell
// radii so that users near the region edge see unbiased geometry.
inline constexpr double kGuardCellRadii = 5.0;

// Homogeneous PPP: Poisson count on |region|, i.i.d. uniform locations.
std::vector<Vec2> sample_ppp(double lambda, const Region& region, std::uint64_t seed);

// Lattice constructions. d is the square spacing or the hexagon side length;
// offset places the reference BS inside one fundamental cell. All lattice
// points intersecting the region plus guard band are generated.
Deployment build_lattice(LayoutKind kind, double d, const Region& region, Vec2 offset,
                         const Tier& prototype);
Deployment build_lattice(LayoutKind kind, double d, const Region& region, Vec2 offset);

// Multi-tier PPP deployment over region dilated by the guard band.
Deployment build_ppp_deployment(const std::vector<Tier>& tiers, const Region& region,
                                std::uint64_t seed);

// Implied densities.
inline double square_lattice_density(double d) { return 1.0 / (d * d); }
inline double hex_lattice_density(double d) { return 2.0 / (3.0 * std::sqrt(3.0) * d * d); }
inline double hex_side_for_density(double lambda) {
    return std::sqrt(2.0 / (3.0 * std::sqrt(3.0) * lambda));
}

// Serving BS under the policy: nearest-BS minimizes distance over all BSs;
// biased power maximizes P_k B_k r^-alpha_k. Deterministic tie-break on the
// lowest (tier, index).
ServingBs serving_bs(Vec2 u, const Deployment& dep, AssociationPolicy policy);

// Closed-form association probability A_k = lambda_k / sum_j lambda_j
// (P_j B_j / P_k B_k)^{2/alpha}; requires all path-loss exponents equal.
double tier_association_closed_form(const std::vector<Tier>& tiers, int k);

// JSON round-trip for deployments (tiers array, layout tag, points as [x,y]).
void to_json(nlohmann::json& j, const Tier& t);
void from_json(const nlohmann::json& j, Tier& t);
void to_json(nlohmann::json& j, const Deployment& d);
void from_json(const nlohmann::json& j, Deployment& d);

std::string layout_name(LayoutKind k);
LayoutKind layout_from_name(const std::string& s);

}  // namespace cellmob
