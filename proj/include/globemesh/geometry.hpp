#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <span>
#include <stdexcept>
#include <string>

namespace globemesh {

/// A point or vector in 2D or 3D model space. 2D data keeps z == 0.
struct Point {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
    constexpr double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }

    friend constexpr Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend constexpr Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend constexpr Point operator*(double s, Point a) { return {s * a.x, s * a.y, s * a.z}; }
    friend constexpr Point operator*(Point a, double s) { return s * a; }
    friend constexpr Point operator/(Point a, double s) { return {a.x / s, a.y / s, a.z / s}; }
    constexpr Point operator-() const { return {-x, -y, -z}; }
    constexpr Point& operator+=(Point b) { x += b.x; y += b.y; z += b.z; return *this; }
    constexpr Point& operator-=(Point b) { x -= b.x; y -= b.y; z -= b.z; return *this; }

    friend constexpr bool operator==(const Point&, const Point&) = default;
    /// Lexicographic order, used for deterministic tie-breaking.
    friend constexpr auto operator<=>(const Point& a, const Point& b) {
        if (auto c = a.x <=> b.x; c != 0) return c;
        if (auto c = a.y <=> b.y; c != 0) return c;
        return a.z <=> b.z;
    }
};

constexpr double dot(Point a, Point b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Point cross(Point a, Point b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(Point a) { return std::sqrt(dot(a, a)); }
constexpr double norm2(Point a) { return dot(a, a); }
inline double distance(Point a, Point b) { return norm(a - b); }
constexpr double distance2(Point a, Point b) { return norm2(a - b); }
inline Point normalized(Point a) {
    const double n = norm(a);
    if (n == 0.0) throw std::invalid_argument("cannot normalize a zero vector");
    return a / n;
}

inline bool is_finite(Point p) { return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z); }

inline std::string to_string(Point p) {
    return "(" + std::to_string(p.x) + ", " + std::to_string(p.y) + ", " + std::to_string(p.z) + ")";
}

/// Axis-aligned box.
struct Box {
    Point lo{};
    Point hi{};

    static Box around(std::span<const Point> pts) {
        if (pts.empty()) throw std::invalid_argument("bounding box of an empty point set");
        Box b{pts[0], pts[0]};
        for (const Point& p : pts) b.extend(p);
        return b;
    }
    void extend(Point p) {
        for (int i = 0; i < 3; ++i) {
            lo[i] = std::min(lo[i], p[i]);
            hi[i] = std::max(hi[i], p[i]);
        }
    }
    Point center() const { return 0.5 * (lo + hi); }
    double diameter() const { return distance(lo, hi); }
    bool contains(Point p, double slack = 0.0) const {
        for (int i = 0; i < 3; ++i)
            if (p[i] < lo[i] - slack || p[i] > hi[i] + slack) return false;
        return true;
    }
};

/// Closest point to `p` on segment [a, b].
inline Point closest_on_segment(Point p, Point a, Point b) {
    const Point ab = b - a;
    const double len2 = norm2(ab);
    if (len2 == 0.0) return a;
    double t = dot(p - a, ab) / len2;
    t = std::clamp(t, 0.0, 1.0);
    return a + t * ab;
}

/// Unsigned area of triangle abc (works in 2D and 3D).
inline double triangle_area(Point a, Point b, Point c) { return 0.5 * norm(cross(b - a, c - a)); }

/// Signed volume of tetrahedron abcd; positive when d lies on the side of abc given by the
/// right-hand rule.
inline double tet_volume(Point a, Point b, Point c, Point d) { return dot(cross(b - a, c - a), d - a) / 6.0; }

}  // namespace globemesh
