#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

#include "cellmob/rng.hpp"

namespace cellmob {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    bool operator==(const Vec2&) const = default;
    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double norm2() const { return x * x + y * y; }
    double norm() const { return std::hypot(x, y); }
};

inline double dist2(Vec2 a, Vec2 b) { return (a - b).norm2(); }

// Origin-centered rectangle or disk.
struct Region {
    enum class Kind { Rectangle, Disk };
    Kind kind = Kind::Rectangle;
    double width = 0.0;   // rectangle
    double height = 0.0;  // rectangle
    double radius = 0.0;  // disk

    static Region rectangle(double w, double h) {
        if (!(w > 0.0) || !(h > 0.0)) throw std::invalid_argument("region: rectangle dimensions must be positive");
        Region r;
        r.kind = Kind::Rectangle;
        r.width = w;
        r.height = h;
        return r;
    }
    static Region square(double side) { return rectangle(side, side); }
    static Region disk(double rad) {
        if (!(rad > 0.0)) throw std::invalid_argument("region: disk radius must be positive");
        Region r;
        r.kind = Kind::Disk;
        r.radius = rad;
        return r;
    }

    double area() const {
        return kind == Kind::Rectangle ? width * height : std::numbers::pi * radius * radius;
    }
    // longest chord (support of point-to-point distances)
    double diameter() const {
        return kind == Kind::Rectangle ? std::hypot(width, height) : 2.0 * radius;
    }
    double min_extent() const {
        return kind == Kind::Rectangle ? std::min(width, height) : 2.0 * radius;
    }
    bool contains(Vec2 p) const {
        if (kind == Kind::Rectangle)
            return std::abs(p.x) <= 0.5 * width && std::abs(p.y) <= 0.5 * height;
        return p.norm2() <= radius * radius;
    }
    Region dilated(double pad) const {
        Region r = *this;
        if (kind == Kind::Rectangle) {
            r.width += 2.0 * pad;
            r.height += 2.0 * pad;
        } else {
            r.radius += pad;
        }
        return r;
    }
    void bounds(double& x0, double& y0, double& x1, double& y1) const {
        if (kind == Kind::Rectangle) {
            x0 = -0.5 * width;
            x1 = 0.5 * width;
            y0 = -0.5 * height;
            y1 = 0.5 * height;
        } else {
            x0 = -radius;
            x1 = radius;
            y0 = -radius;
            y1 = radius;
        }
    }
    Vec2 sample(Rng& rng) const {
        if (kind == Kind::Rectangle)
            return {rng.uniform(-0.5 * width, 0.5 * width), rng.uniform(-0.5 * height, 0.5 * height)};
        const double r = radius * std::sqrt(rng.uniform());
        const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
        return {r * std::cos(phi), r * std::sin(phi)};
    }
    bool operator==(const Region&) const = default;
};

void to_json(nlohmann::json& j, const Region& r);
void from_json(const nlohmann::json& j, Region& r);

}  // namespace cellmob
