#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "globemesh/geometry.hpp"
#include "globemesh/predicates.hpp"
#include "globemesh/quality.hpp"

namespace globemesh {

enum class ConstraintKind { InsideSphere, OutsideSphere, Halfspace, Slab, InsideSpindleTorus };

const char* to_string(ConstraintKind k);

/// One primitive constraint. Unused fields keep their defaults.
///   InsideSphere / OutsideSphere: center, radius
///   Halfspace: dot(normal, p) <= offset
///   Slab: |dot(normal, p) - offset| <= half_width
///   InsideSpindleTorus: axis endpoints a, b and ratio rho (petal on ab rotated about ab)
struct Constraint {
    ConstraintKind kind = ConstraintKind::InsideSphere;
    Point center{};
    double radius = 0.0;
    Point normal{};
    double offset = 0.0;
    double half_width = 0.0;
    Point a{}, b{};
    double rho = 0.0;

    static Constraint inside(Sphere s);
    static Constraint outside(Sphere s);
    static Constraint halfspace(Point normal, double offset);
    static Constraint slab(Point normal, double offset, double half_width);
    static Constraint spindle(Point a, Point b, double rho);

    /// Signed violation in length units: <= 0 means satisfied.
    double violation(Point p) const;
    bool contains(Point p, double slack = 0.0) const { return violation(p) <= slack; }
    std::string describe() const;
};

/// Conjunction of constraints.
struct Region {
    std::vector<Constraint> constraints;

    double violation(Point p) const;
    bool contains(Point p, double slack = 0.0) const { return violation(p) <= slack; }
    /// A ball guaranteed to contain the region, or nullopt when no bounded constraint exists.
    std::optional<Sphere> bounding_ball() const;
};

/// Torus geometry in the (axial, radial) half-plane about edge ab.
struct SpindleFrame {
    Point mid;
    Point axis;      ///< unit vector a -> b
    double h;        ///< petal center offset from the axis
    double radius;   ///< petal radius rho * l
};
SpindleFrame spindle_frame(const Constraint& c);

/// Hourglass sliver region over a base triangle.
struct ForbiddenRegion {
    std::array<int, 3> base{-1, -1, -1};
    Point center{};       ///< base circumcenter
    Point normal{};       ///< unit base normal
    double base_radius = 0.0;
    double l = 0.0;       ///< base shortest side
    double area = 0.0;
    double sphere_radius = 0.0;  ///< rho* l
    double axis_offset = 0.0;    ///< sphere centers at center +- axis_offset * normal
    double slab_half_height = 0.0;

    Sphere upper() const { return {center + axis_offset * normal, sphere_radius}; }
    Sphere lower() const { return {center - axis_offset * normal, sphere_radius}; }
    /// Strict membership; slack > 0 shrinks the region (used when testing avoidance).
    bool contains(Point p, double slack = 0.0) const;
    Sphere bounding_ball() const { return {center, axis_offset + sphere_radius}; }
};

Sphere picking_region(Point circumcenter, double rho, double l, double alpha);
Constraint picking_constraint(Point circumcenter, double rho, double l, double alpha);

/// 2D petal disk on edge pq (z == 0), center on the side of far_side_hint.
Sphere petal(Point p, Point q, double rho_star, Point far_side_hint);

/// Snow globe through a facet's circumcircle, on the fourth vertex's side; nullopt when the
/// facet's own radius-edge ratio exceeds rho_star.
std::optional<Sphere> snow_globe(std::span<const Point> facet, Point fourth, double rho_star);

ForbiddenRegion forbidden_region(std::span<const Point> base, double rho_star, double sigma_star);

struct IndexedPoint {
    int id;
    Point p;
};

/// Forbidden regions for every vertex triple with shortest side < max_base_side whose region
/// meets `locale`. Only vertices within `reach` of the locale center are considered. When
/// `faces` is non-empty only those triples (sorted ids) are used. Sorted by base ids.
std::vector<ForbiddenRegion> enumerate_forbidden(std::span<const IndexedPoint> vertices, Sphere locale, double reach,
                                                 double max_base_side, double rho_star, double sigma_star,
                                                 std::span<const std::array<int, 3>> faces = {});

/// Strictly inside the diametral ball of segment ab.
bool encroaches_segment(Point p, Point a, Point b);
/// Strictly inside the equatorial sphere of triangle abc.
bool encroaches_facet(Point p, Point a, Point b, Point c);

Constraint spindle_torus(Point a, Point b, double rho);

}  // namespace globemesh
