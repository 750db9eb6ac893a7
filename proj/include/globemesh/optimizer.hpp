#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "globemesh/geometry.hpp"
#include "globemesh/regions.hpp"

namespace globemesh {

enum class Objective { MinDistance, WeightedPlaneDistance };

/// weight * |dot(normal, p) - offset|, normal of unit length.
struct WeightedPlane {
    Point normal;
    double offset = 0.0;
    double weight = 1.0;

    static WeightedPlane through(Point a, Point b, Point c, double weight);
    double value(Point p) const { return weight * std::abs(dot(normal, p) - offset); }
};

struct PlacementProblem {
    int dim = 3;
    std::vector<Point> sites;
    Region feasible;
    std::vector<ForbiddenRegion> avoid;
    Objective objective = Objective::MinDistance;
    std::vector<WeightedPlane> planes;

    double value(Point p) const;
    /// Satisfies every feasible constraint within slack.
    bool is_feasible(Point p, double slack) const;
    /// Index of an avoid region containing p (strictly, shrunk by slack), or -1.
    int avoided_by(Point p, double slack) const;
    /// Characteristic length used for tolerances.
    double scale() const;
};

struct Candidate {
    Point point;
    double value = 0.0;
    std::vector<std::string> active_set;
    bool fallback = false;  ///< avoid regions had to be dropped
    int combinations = 0;   ///< generator combinations examined
};

class InfeasibleError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Maximizes the objective over feasible minus avoid by enumerating stationary points of
/// every generator combination of size <= dim + 1. Throws InfeasibleError when the feasible
/// region itself yields no candidate.
Candidate solve(const PlacementProblem& problem);
/// Same as solve for the weighted-plane objective.
Candidate solve_weighted(const PlacementProblem& problem);

/// Best grid point (resolution per axis over the feasible bounding box); nullopt when no grid
/// point is feasible and outside every avoid region.
std::optional<Candidate> grid_oracle(const PlacementProblem& problem, int resolution);

/// One vertex of a simultaneous batch. `base` holds the fixed sites; the other items'
/// current points are added as sites when the item moves.
struct RelocationItem {
    PlacementProblem base;
    Candidate current;
    bool flagged = false;
    std::string error;
};

/// Distance from item i's point to its nearest site, counting the other items.
double item_value(const std::vector<RelocationItem>& items, size_t i);
/// Minimum over items of item_value.
double batch_min_distance(const std::vector<RelocationItem>& items);

/// Moves each item in turn to its optimum given the others; a move that would lower the
/// item's own value is not taken. Returns the largest movement.
double relocate_round(std::vector<RelocationItem>& items);

/// Runs relocate_round until movement < tol * scale or max_passes; returns the batch
/// minimum distance after each pass (first entry: before any pass).
std::vector<double> relocate(std::vector<RelocationItem>& items, int max_passes = 50, double tol = 1e-9);

}  // namespace globemesh
