#pragma once

#include <array>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>

#include "globemesh/geometry.hpp"

namespace globemesh {

struct QualityMeasures {
    double rho = 0.0;            ///< circumradius / shortest edge
    double sigma = 0.0;          ///< volume / shortest edge^3 (3D)
    double min_angle = 0.0;      ///< radians (2D)
    double min_dihedral = 0.0;   ///< radians (3D)
    double shortest_edge = 0.0;
    double circumradius = 0.0;
    Point circumcenter{};
    bool degenerate = false;
};

class DegenerateSimplexError : public std::runtime_error {
  public:
    DegenerateSimplexError() : std::runtime_error("degenerate simplex (zero volume)") {}
    bool zero_volume() const { return true; }
};

enum class PlacementMode { Distance, Angle, Circumcenter };
enum class InsertionMode { Single, Multi };
enum class Ordering { ShortestFirst, Fifo };
enum class Classification { Good, LargeRho, Sliver };

const char* to_string(PlacementMode m);
const char* to_string(InsertionMode m);
const char* to_string(Ordering o);
const char* to_string(Classification c);

struct RefinementConfig {
    int dim = 2;
    double rho_star = 0.0;
    double sigma_star = 0.01;
    double alpha = 0.0;
    double gamma = 0.0;
    PlacementMode placement = PlacementMode::Distance;
    InsertionMode insertion = InsertionMode::Single;
    Ordering ordering = Ordering::ShortestFirst;
    bool preprocess = true;
    bool classic_boundary = false;
    long max_insertions = 1000000;
    /// Forbidden-region bases must have shortest side < this factor times the driving l_min.
    double sliver_length_factor = 0.0;
    int batch_cap = 64;

    /// Front band upper constant.
    double beta() const { return 2.0 * rho_star; }

    static RefinementConfig defaults(int dim);
};

/// Throws std::invalid_argument describing the first violated relation.
void validate(const RefinementConfig& cfg);

/// Quality of a 2D triangle or 3D tetrahedron. Throws DegenerateSimplexError.
QualityMeasures measure(std::span<const Point> simplex);
/// Like measure, but degenerate simplices report rho = +inf and degenerate = true.
QualityMeasures measure_or_degenerate(std::span<const Point> simplex);

Classification classify(const QualityMeasures& m, const RefinementConfig& cfg);

/// Shortest edge of a simplex as local slot indices; ties go to the lexicographically
/// smallest pair of vertex ids.
std::array<int, 2> shortest_edge(std::span<const Point> pts, std::span<const int> ids);

struct FacetChoice {
    std::array<int, 3> facet;       ///< local slots, ascending by vertex id
    int opposite;                   ///< local slot of the fourth vertex
    std::array<int, 3> other_facet; ///< the other facet containing the shortest edge
    int other_opposite;
    std::array<int, 2> edge;        ///< shortest edge (local slots)
};

/// Facet containing the shortest edge and the shorter adjacent edge.
FacetChoice smallest_facet(std::span<const Point> tet, std::span<const int> ids);

/// Effective length: l_min, or l_mid/alpha when the tentative vertex encroaches.
double queue_key(double l_min, std::optional<double> l_mid, double alpha);

}  // namespace globemesh
