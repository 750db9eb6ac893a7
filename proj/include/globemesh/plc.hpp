#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "globemesh/geometry.hpp"

namespace globemesh {

/// Planar convex polygon given by input vertex ids (3D only).
struct Facet {
    std::vector<int> polygon;
    /// Vertices lying strictly inside the polygon (added by preprocessing).
    std::vector<int> interior;
};

/// Piecewise linear complex. In 3D the segment list holds every facet boundary edge
/// after `normalize`.
struct Plc {
    int dim = 2;
    std::vector<Point> vertices;
    std::vector<std::array<int, 2>> segments;
    std::vector<Facet> facets;
    std::vector<Point> holes;

    // Source line of each item when parsed from a file (empty otherwise).
    std::vector<int> vertex_lines;
    std::vector<int> segment_lines;
    std::vector<int> facet_lines;

    double scale() const;
};

struct ValidationIssue {
    std::string feature;  ///< e.g. "segment 3"
    std::string message;
    int line = -1;
};

class ValidationError : public std::runtime_error {
  public:
    explicit ValidationError(std::vector<ValidationIssue> issues);
    const std::vector<ValidationIssue>& issues() const { return issues_; }

  private:
    std::vector<ValidationIssue> issues_;
};

/// Merges coplanar facets sharing an edge into convex polygons (when the union stays
/// convex) and, in 3D, adds every facet edge to the segment list. Idempotent.
void normalize(Plc& plc);

/// All problems found; empty means valid.
std::vector<ValidationIssue> check(const Plc& plc, double min_angle_deg = 60.0);

/// Throws ValidationError listing every issue.
void validate(const Plc& plc, double min_angle_deg = 60.0);

/// Unit normal of a facet (Newell's method).
Point facet_normal(const Plc& plc, const Facet& f);

}  // namespace globemesh
