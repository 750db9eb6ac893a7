#pragma once

#include <span>
#include <stdexcept>

#include "globemesh/geometry.hpp"

namespace globemesh {

enum class Sign { Negative = -1, Zero = 0, Positive = 1 };

constexpr int to_int(Sign s) { return static_cast<int>(s); }
constexpr Sign sign_of(int v) { return v > 0 ? Sign::Positive : (v < 0 ? Sign::Negative : Sign::Zero); }
constexpr Sign operator-(Sign s) { return sign_of(-to_int(s)); }

class GeometryError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Exact sign predicates. A floating-point evaluation with a forward error bound decides
// the easy cases; anything inside the bound is re-evaluated in rational arithmetic.

Sign orient2d(Point a, Point b, Point c);
Sign orient3d(Point a, Point b, Point c, Point d);
/// Positive iff d is strictly inside the circle through a, b, c (any orientation).
Sign incircle(Point a, Point b, Point c, Point d);
/// Positive iff e is strictly inside the sphere through a, b, c, d (any orientation).
Sign insphere(Point a, Point b, Point c, Point d, Point e);

/// Orientation of d+1 points: 3 points in 2D, 4 points in 3D.
Sign orient(std::span<const Point> simplex);
/// Positive iff `query` is strictly inside the circumscribing circle/sphere of the simplex.
/// Throws GeometryError for a degenerate simplex.
Sign in_circumsphere(std::span<const Point> simplex, Point query);

struct Sphere {
    Point center;
    double radius = 0.0;
};

/// Circumscribing sphere of k+1 affinely independent points (k <= 3). For k < dim the
/// center lies in the affine hull of the points (segment midpoint, facet circumcenter).
Sphere circumsphere(std::span<const Point> pts);

}  // namespace globemesh
