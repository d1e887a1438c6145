#include "cellmob/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cellmob {

void Tier::validate() const {
    if (!(density > 0.0)) throw std::invalid_argument("tier: density must be positive");
    if (!(tx_power > 0.0)) throw std::invalid_argument("tier: tx_power must be positive");
    if (!(bias >= 0.0)) throw std::invalid_argument("tier: bias must be nonnegative");
    if (!(pathloss_exponent > 2.0))
        throw std::invalid_argument("tier: pathloss_exponent must exceed 2");
}

void SpatialGrid::build(const std::vector<Vec2>& points) {
    points_ = &points;
    n_points_ = points.size();
    brute_ = n_points_ < 64;
    if (brute_ || n_points_ == 0) return;

    double x0 = points[0].x, x1 = points[0].x, y0 = points[0].y, y1 = points[0].y;
    for (const Vec2& p : points) {
        x0 = std::min(x0, p.x);
        x1 = std::max(x1, p.x);
        y0 = std::min(y0, p.y);
        y1 = std::max(y1, p.y);
    }
    const double span_x = std::max(x1 - x0, 1e-9);
    const double span_y = std::max(y1 - y0, 1e-9);
    // target roughly one point per cell, capped to keep memory bounded
    const double target = std::sqrt(span_x * span_y / static_cast<double>(n_points_));
    h_ = std::max(target, std::max(span_x, span_y) / 2048.0);
    x0_ = x0;
    y0_ = y0;
    nx_ = static_cast<int>(span_x / h_) + 1;
    ny_ = static_cast<int>(span_y / h_) + 1;

    cell_start_.assign(static_cast<std::size_t>(nx_) * ny_ + 1, 0);
    auto cell_of = [&](Vec2 p) {
        int cx = static_cast<int>((p.x - x0_) / h_);
        int cy = static_cast<int>((p.y - y0_) / h_);
        cx = std::clamp(cx, 0, nx_ - 1);
        cy = std::clamp(cy, 0, ny_ - 1);
        return static_cast<std::size_t>(cy) * nx_ + cx;
    };
    for (const Vec2& p : points) ++cell_start_[cell_of(p) + 1];
    for (std::size_t i = 1; i < cell_start_.size(); ++i) cell_start_[i] += cell_start_[i - 1];
    order_.resize(n_points_);
    std::vector<std::uint32_t> fill(cell_start_.begin(), cell_start_.end() - 1);
    for (std::uint32_t i = 0; i < n_points_; ++i) order_[fill[cell_of(points[i])]++] = i;
}

std::pair<int, double> SpatialGrid::nearest(Vec2 u) const {
    int best = -1;
    double best_d2 = std::numeric_limits<double>::infinity();
    if (n_points_ == 0) return {best, best_d2};
    const std::vector<Vec2>& pts = *points_;
    if (brute_) {
        for (std::size_t i = 0; i < n_points_; ++i) {
            const double d2 = dist2(u, pts[i]);
            if (d2 < best_d2) {
                best_d2 = d2;
                best = static_cast<int>(i);
            }
        }
        return {best, best_d2};
    }

    const int cx = std::clamp(static_cast<int>(std::floor((u.x - x0_) / h_)), 0, nx_ - 1);
    const int cy = std::clamp(static_cast<int>(std::floor((u.y - y0_) / h_)), 0, ny_ - 1);
    const int max_ring = std::max(nx_, ny_);

    auto scan_cell = [&](int ix, int iy) {
        if (ix < 0 || iy < 0 || ix >= nx_ || iy >= ny_) return;
        const std::size_t c = static_cast<std::size_t>(iy) * nx_ + ix;
        for (std::uint32_t k = cell_start_[c]; k < cell_start_[c + 1]; ++k) {
            const int i = static_cast<int>(order_[k]);
            const double d2 = dist2(u, pts[i]);
            if (d2 < best_d2 || (d2 == best_d2 && i < best)) {
                best_d2 = d2;
                best = i;
            }
        }
    };

    for (int ring = 0; ring <= max_ring; ++ring) {
        if (ring == 0) {
            scan_cell(cx, cy);
        } else {
            for (int ix = cx - ring; ix <= cx + ring; ++ix) {
                scan_cell(ix, cy - ring);
                scan_cell(ix, cy + ring);
            }
            for (int iy = cy - ring + 1; iy <= cy + ring - 1; ++iy) {
                scan_cell(cx - ring, iy);
                scan_cell(cx + ring, iy);
            }
        }
        // every unscanned point lies outside the block of cells
        // [cx-ring, cx+ring] x [cy-ring, cy+ring]
        const double bx0 = x0_ + (cx - ring) * h_;
        const double bx1 = x0_ + (cx + ring + 1) * h_;
        const double by0 = y0_ + (cy - ring) * h_;
        const double by1 = y0_ + (cy + ring + 1) * h_;
        const double margin =
            std::min(std::min(u.x - bx0, bx1 - u.x), std::min(u.y - by0, by1 - u.y));
        if (best >= 0 && margin > 0.0 && best_d2 <= margin * margin) break;
    }
    return {best, best_d2};
}

void Deployment::finalize() {
    if (tiers.size() != points.size())
        throw std::invalid_argument("deployment: tiers and point lists must align");
    for (const Tier& t : tiers) t.validate();
    index.resize(points.size());
    for (std::size_t k = 0; k < points.size(); ++k) index[k].build(points[k]);
}

bool Deployment::empty() const { return total_points() == 0; }

std::size_t Deployment::total_points() const {
    std::size_t n = 0;
    for (const auto& tier_points : points) n += tier_points.size();
    return n;
}

double Deployment::mean_cell_radius() const {
    double r = 0.0;
    for (const Tier& t : tiers) r = std::max(r, t.mean_cell_radius());
    return r;
}

std::vector<Vec2> sample_ppp(double lambda, const Region& region, std::uint64_t seed) {
    if (!(lambda > 0.0)) throw std::invalid_argument("sample_ppp: lambda must be positive");
    if (!(region.area() > 0.0)) throw std::invalid_argument("sample_ppp: degenerate region");
    Rng rng(seed);
    const std::uint64_t n = rng.poisson(lambda * region.area());
    std::vector<Vec2> pts;
    pts.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) pts.push_back(region.sample(rng));
    return pts;
}

namespace {

std::vector<Vec2> lattice_points(LayoutKind kind, double d, const Region& generation_region,
                                 Vec2 offset) {
    double x0, y0, x1, y1;
    generation_region.bounds(x0, y0, x1, y1);
    std::vector<Vec2> pts;
    if (kind == LayoutKind::SquareLattice) {
        const long i0 = static_cast<long>(std::floor((x0 - offset.x) / d));
        const long i1 = static_cast<long>(std::ceil((x1 - offset.x) / d));
        const long j0 = static_cast<long>(std::floor((y0 - offset.y) / d));
        const long j1 = static_cast<long>(std::ceil((y1 - offset.y) / d));
        for (long j = j0; j <= j1; ++j)
            for (long i = i0; i <= i1; ++i) {
                const Vec2 p{offset.x + i * d, offset.y + j * d};
                if (generation_region.contains(p)) pts.push_back(p);
            }
    } else {
        // Hexagonal cells of side d have centers on a triangular lattice with
        // nearest-neighbor spacing s = sqrt(3) d.
        const double s = std::sqrt(3.0) * d;
        const double row_h = s * std::sqrt(3.0) / 2.0;
        const long j0 = static_cast<long>(std::floor((y0 - offset.y) / row_h)) - 1;
        const long j1 = static_cast<long>(std::ceil((y1 - offset.y) / row_h)) + 1;
        for (long j = j0; j <= j1; ++j) {
            const double y = offset.y + j * row_h;
            const double row_shift = (j % 2 == 0) ? 0.0 : 0.5 * s;
            const long i0 = static_cast<long>(std::floor((x0 - offset.x - row_shift) / s)) - 1;
            const long i1 = static_cast<long>(std::ceil((x1 - offset.x - row_shift) / s)) + 1;
            for (long i = i0; i <= i1; ++i) {
                const Vec2 p{offset.x + row_shift + i * s, y};
                if (generation_region.contains(p)) pts.push_back(p);
            }
        }
    }
    return pts;
}

}  // namespace

Deployment build_lattice(LayoutKind kind, double d, const Region& region, Vec2 offset,
                         const Tier& prototype) {
    if (kind == LayoutKind::Ppp)
        throw std::invalid_argument("build_lattice: kind must be a lattice");
    if (!(d > 0.0)) throw std::invalid_argument("build_lattice: spacing must be positive");
    if (d >= region.min_extent())
        throw std::invalid_argument("build_lattice: spacing too large for region");

    const double lambda =
        kind == LayoutKind::SquareLattice ? square_lattice_density(d) : hex_lattice_density(d);
    Tier tier = prototype;
    tier.density = lambda;

    Deployment dep;
    dep.layout = {kind, d};
    dep.region = region;
    dep.tiers = {tier};
    const double guard = kGuardCellRadii * tier.mean_cell_radius();
    dep.points = {lattice_points(kind, d, region.dilated(guard), offset)};

    std::size_t inside = 0;
    for (const Vec2& p : dep.points[0])
        if (region.contains(p)) ++inside;
    if (inside < 4)
        throw std::invalid_argument("build_lattice: fewer than 4 cells intersect the region");

    dep.finalize();
    return dep;
}

Deployment build_lattice(LayoutKind kind, double d, const Region& region, Vec2 offset) {
    Tier proto;
    proto.density = 1.0;  // overwritten with the implied density
    return build_lattice(kind, d, region, offset, proto);
}

Deployment build_ppp_deployment(const std::vector<Tier>& tiers, const Region& region,
                                std::uint64_t seed) {
    if (tiers.empty()) throw std::invalid_argument("build_ppp_deployment: no tiers");
    Deployment dep;
    dep.layout = {LayoutKind::Ppp, 0.0};
    dep.region = region;
    dep.tiers = tiers;
    double guard = 0.0;
    for (const Tier& t : tiers) {
        t.validate();
        guard = std::max(guard, kGuardCellRadii * t.mean_cell_radius());
    }
    const Region gen = region.dilated(guard);
    dep.points.resize(tiers.size());
    for (std::size_t k = 0; k < tiers.size(); ++k)
        dep.points[k] = sample_ppp(tiers[k].density, gen, mix64(seed) ^ mix64(k + 1));
    dep.finalize();
    return dep;
}

ServingBs serving_bs(Vec2 u, const Deployment& dep, AssociationPolicy policy) {
    if (dep.empty()) throw std::invalid_argument("serving_bs: empty deployment");
    ServingBs best;
    if (policy.kind == AssociationPolicy::Kind::NearestBs) {
        double best_d2 = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < dep.points.size(); ++k) {
            const auto [idx, d2] = dep.index[k].nearest(u);
            if (idx < 0) continue;
            if (d2 < best_d2) {
                best_d2 = d2;
                best = {static_cast<int>(k), idx};
            }
        }
        return best;
    }
    // Within a tier the biased power is maximized by the nearest BS, so a
    // per-tier nearest query followed by a cross-tier score comparison is
    // exact for arbitrary per-tier path-loss exponents.
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < dep.points.size(); ++k) {
        const auto [idx, d2] = dep.index[k].nearest(u);
        if (idx < 0) continue;
        const Tier& t = dep.tiers[k];
        double score;
        if (d2 == 0.0)
            score = std::numeric_limits<double>::infinity();
        else
            score = std::log(t.tx_power * t.bias) - 0.5 * t.pathloss_exponent * std::log(d2);
        if (score > best_score) {
            best_score = score;
            best = {static_cast<int>(k), idx};
        }
    }
    return best;
}

double tier_association_closed_form(const std::vector<Tier>& tiers, int k) {
    if (tiers.empty()) throw std::invalid_argument("association: no tiers");
    const double alpha = tiers[0].pathloss_exponent;
    for (const Tier& t : tiers)
        if (t.pathloss_exponent != alpha)
            throw std::invalid_argument(
                "association closed form requires equal path-loss exponents");
    const Tier& tk = tiers[static_cast<std::size_t>(k)];
    double denom = 0.0;
    for (const Tier& tj : tiers)
        denom += tj.density *
                 std::pow(tj.tx_power * tj.bias / (tk.tx_power * tk.bias), 2.0 / alpha);
    return tk.density / denom;
}

std::string layout_name(LayoutKind k) {
    switch (k) {
        case LayoutKind::Ppp: return "ppp";
        case LayoutKind::SquareLattice: return "square_lattice";
        case LayoutKind::HexLattice: return "hex_lattice";
    }
    return "ppp";
}

LayoutKind layout_from_name(const std::string& s) {
    if (s == "ppp") return LayoutKind::Ppp;
    if (s == "square_lattice") return LayoutKind::SquareLattice;
    if (s == "hex_lattice") return LayoutKind::HexLattice;
    throw std::invalid_argument("unknown layout: " + s);
}

void to_json(nlohmann::json& j, const Region& r) {
    if (r.kind == Region::Kind::Rectangle)
        j = {{"kind", "rectangle"}, {"width", r.width}, {"height", r.height}};
    else
        j = {{"kind", "disk"}, {"radius", r.radius}};
}

void from_json(const nlohmann::json& j, Region& r) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "rectangle")
        r = Region::rectangle(j.at("width").get<double>(), j.at("height").get<double>());
    else if (kind == "disk")
        r = Region::disk(j.at("radius").get<double>());
    else
        throw std::invalid_argument("unknown region kind: " + kind);
}

void to_json(nlohmann::json& j, const Tier& t) {
    j = {{"density", t.density},
         {"tx_power", t.tx_power},
         {"bias", t.bias},
         {"pathloss_exponent", t.pathloss_exponent}};
}

void from_json(const nlohmann::json& j, Tier& t) {
    t.density = j.at("density").get<double>();
    t.tx_power = j.value("tx_power", 1.0);
    t.bias = j.value("bias", 1.0);
    t.pathloss_exponent = j.value("pathloss_exponent", 4.0);
    t.validate();
}

void to_json(nlohmann::json& j, const Deployment& d) {
    nlohmann::json layout = {{"kind", layout_name(d.layout.kind)}};
    if (d.layout.kind != LayoutKind::Ppp) layout["spacing"] = d.layout.spacing;
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& tier_points : d.points) {
        nlohmann::json arr = nlohmann::json::array();
        for (const Vec2& p : tier_points) arr.push_back({p.x, p.y});
        pts.push_back(std::move(arr));
    }
    j = {{"region", d.region}, {"layout", std::move(layout)}, {"tiers", d.tiers},
         {"points", std::move(pts)}};
}

void from_json(const nlohmann::json& j, Deployment& d) {
    d.region = j.at("region").get<Region>();
    const nlohmann::json& layout = j.at("layout");
    d.layout.kind = layout_from_name(layout.at("kind").get<std::string>());
    d.layout.spacing = layout.value("spacing", 0.0);
    d.tiers = j.at("tiers").get<std::vector<Tier>>();
    d.points.clear();
    for (const nlohmann::json& arr : j.at("points")) {
        std::vector<Vec2> tier_points;
        tier_points.reserve(arr.size());
        for (const nlohmann::json& p : arr)
            tier_points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
        d.points.push_back(std::move(tier_points));
    }
    d.finalize();
}

}  // namespace cellmob
