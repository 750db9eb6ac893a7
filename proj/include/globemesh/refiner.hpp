#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "globemesh/geometry.hpp"
#include "globemesh/plc.hpp"
#include "globemesh/quality.hpp"
#include "globemesh/triangulation.hpp"

namespace globemesh {

enum class EventKind {
    Steiner,
    BoundaryMidpoint,
    BoundaryFront,
    Delete,
    FallbackSliver,
    Spindle,
    HeuristicCaseC,
};

const char* to_string(EventKind k);
std::optional<EventKind> event_kind_from_string(const std::string& s);

struct InsertionEvent {
    long seq = 0;
    EventKind kind = EventKind::Steiner;
    VertexId vertex = kNone;
    Point point{};
    double l_min = 0.0;     ///< driving element's shortest edge (0 for pure boundary work)
    double l_eff = 0.0;     ///< queue key the driving element was processed with
    double min_dist = 0.0;  ///< distance to the nearest pre-existing vertex
    double edge_dist = 0.0; ///< distance to the nearer endpoint of the driving shortest edge
    std::array<VertexId, 2> edge{kNone, kNone};  ///< driving shortest edge
    std::string feature;    ///< split feature, e.g. "segment 3" or "facet 1"
    int round = -1;         ///< MULTI round index
    std::vector<std::string> active;
};

/// Min-distance after each relocation pass of one MULTI relocation sequence.
struct RoundRecord {
    int round = 0;
    int batch = 0;
    std::vector<double> history;
};

struct EventLog {
    RefinementConfig config;
    std::vector<InsertionEvent> events;
    std::vector<RoundRecord> rounds;
    long insertions() const;
    long count(EventKind k) const;
};

/// Refined mesh: live non-scaffold vertices and the simplices inside the domain.
struct MeshSnapshot {
    int dim = 2;
    std::vector<Point> points;
    std::vector<Provenance> provenance;
    std::vector<VertexId> source_ids;               ///< triangulation vertex id of each point
    std::vector<std::array<int, 4>> cells;          ///< point indices; slot 3 unused in 2D
    std::vector<std::array<int, 3>> boundary_faces; ///< subsegments (slot 2 = -1) or subfacets
    std::vector<int> boundary_parent;               ///< segment id (2D) or facet id (3D)
    std::vector<std::array<int, 2>> boundary_edges; ///< all subsegments, point indices
    std::vector<int> boundary_edge_parent;
    /// Points created by FALLBACK_SLIVER events.
    std::vector<char> fallback_vertex;
    /// Every live simplex of the full triangulation (including outside and scaffold) as
    /// triangulation vertex ids, for exact Delaunay checks.
    std::vector<std::array<int, 4>> all_simplices;
    std::vector<Point> all_points;  ///< indexed by triangulation vertex id (dead ones kept)
};

struct RefineStats {
    long insertions = 0;
    long deletions = 0;
    long rebuilds = 0;
    long queue_pops = 0;
    long stale_pops = 0;
    long repushes = 0;
    long spindle = 0;
    long fallback = 0;
    long multi_rounds = 0;
    double seconds = 0.0;
};

struct RefineResult {
    MeshSnapshot mesh;
    EventLog log;
    RefineStats stats;
    Plc plc;  ///< the PLC actually meshed (after preprocessing)
};

class InsertionCapError : public std::runtime_error {
  public:
    InsertionCapError(const std::string& what, EventLog log) : std::runtime_error(what), log_(std::move(log)) {}
    const EventLog& log() const { return log_; }

  private:
    EventLog log_;
};

/// Refines a valid PLC until every element inside the domain has rho <= rho* (and, in 3D,
/// is not a sliver unless traced to a fallback insertion). Throws ValidationError for a bad
/// PLC, std::invalid_argument for a bad configuration, InsertionCapError at the cap.
RefineResult refine(const Plc& plc, const RefinementConfig& cfg);

struct PreprocessRecord {
    int input_vertex = -1;
    int feature = -1;     ///< segment index, or facet index when on_facet
    bool on_facet = false;
    Point projection{};   ///< m
    Point placed{};       ///< m or m'
    int anchor = -1;      ///< vertex a the point was slid from, -1 when m was kept
    bool heuristic_case_c = false;
};

struct PreprocessResult {
    Plc plc;
    std::vector<PreprocessRecord> records;
};

/// Adds auxiliary vertices to segments and facets so that no input vertex lies strictly
/// inside a boundary feature's diametral ball.
PreprocessResult preprocess_plc(const Plc& plc, const RefinementConfig& cfg);

/// Input vertices strictly inside the diametral ball of a segment piece or of a facet's
/// Delaunay triangles, as (vertex, feature description) pairs.
std::vector<std::pair<int, std::string>> encroaching_input_vertices(const Plc& plc);

struct FrontSplit {
    Point point;
    double radius = 0.0;  ///< free vertices inside ball(point, radius) are deleted
    bool front = false;   ///< false: clamped to the midpoint / circumcenter
};

/// Boundary split near the advancing front: the point at distance gamma * l_eff from feature
/// vertex v toward `center` (segment midpoint or facet circumcenter), clamped to `center` when
/// that distance reaches l_mid.
FrontSplit front_split_point(Point v, Point center, double l_mid, double gamma, double l_eff);

/// Re-executes the event log on the bootstrap of `plc` and returns the resulting snapshot.
MeshSnapshot replay(const Plc& plc, const EventLog& log);

/// True when both snapshots hold the same points and the same simplices as vertex sets,
/// regardless of simplex numbering.
bool same_triangulation(const MeshSnapshot& a, const MeshSnapshot& b);

}  // namespace globemesh
