#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "globemesh/plc.hpp"
#include "globemesh/quality.hpp"
#include "globemesh/refiner.hpp"

namespace globemesh {

// ---------------------------------------------------------------------------
// Local feature size

/// Brute-force local feature size over vertices, segments and facets of a PLC. Two features
/// are nonincident when they share no vertex and neither contains the other.
class LfsField {
  public:
    /// Throws std::invalid_argument when the PLC has fewer than two nonincident features.
    explicit LfsField(const Plc& plc);
    double operator()(Point x) const;
    size_t feature_count() const { return features_.size(); }

  private:
    struct Feature {
        int kind;  // 0 vertex, 1 segment, 2 facet
        std::vector<int> verts;      // sorted vertex ids (facets: polygon and interior)
        std::vector<Point> polygon;  // facet polygon
        Point normal{};
    };
    double dist(const Feature& f, Point x) const;
    bool incident(const Feature& a, const Feature& b) const;

    Plc plc_;
    std::vector<Feature> features_;
};

double local_feature_size(const Plc& plc, Point x);

/// True iff |f(x) - f(y)| <= |x - y| (+1e-9 slack) over `pairs` random pairs drawn from the
/// PLC's bounding box. `f` defaults to the PLC's local feature size.
bool lipschitz_check(const Plc& plc, int pairs, uint64_t seed = 1,
                     const std::function<double(Point)>& f = nullptr);

// ---------------------------------------------------------------------------
// Delaunay and conformity oracles

struct DelaunayViolation {
    int simplex = -1;  ///< index into MeshSnapshot::all_simplices
    int vertex = -1;   ///< triangulation vertex id strictly inside its circumsphere
};

/// Every (simplex, vertex) pair with the vertex strictly inside the circumsphere (exact test).
std::vector<DelaunayViolation> verify_delaunay(const MeshSnapshot& mesh);
/// Same check for an explicit simplex list over a point array.
std::vector<DelaunayViolation> verify_delaunay(int dim, const std::vector<Point>& points,
                                               const std::vector<std::array<int, 4>>& simplices);

/// Boundary features that are not unions of mesh faces, described in words.
std::vector<std::string> conformity_violations(const MeshSnapshot& mesh, const Plc& plc);

// ---------------------------------------------------------------------------
// Quality summary

struct QualitySummary {
    long elements = 0;
    long vertices = 0;
    double max_rho = 0.0;
    double min_angle_deg = 180.0;     ///< 2D
    double min_dihedral_deg = 180.0;  ///< 3D
    double min_sigma = 0.0;           ///< 3D
    long above_rho_star = 0;
    long slivers = 0;
    long slivers_from_fallback = 0;
    std::vector<long> rho_histogram;  ///< bins of width 0.1 from 0.5
};

QualitySummary quality_summary(const MeshSnapshot& mesh, const RefinementConfig& cfg);

// ---------------------------------------------------------------------------
// Audits

struct SizeAudit {
    double max_ratio = 0.0;  ///< max over Steiner vertices of lfs(v) / r_v
    double bound = 0.0;      ///< 1 / (alpha - 1)
    double limit = 0.0;      ///< 1.5 * bound
    int worst_vertex = -1;   ///< point index in the snapshot
    long steiner_vertices = 0;
    long stage_checks = 0;
    long stage_flags = 0;    ///< insertions with lfs(p) above the per-stage upper bound
    bool pass = true;        ///< max_ratio <= limit
};

SizeAudit size_optimality_audit(const MeshSnapshot& mesh, const Plc& plc, const RefinementConfig& cfg,
                                const EventLog& log);

struct StageRow {
    int stage = 0;
    long events = 0;
    double min_key = 0.0;
    double max_key = 0.0;
    double min_clearance = 0.0;  ///< smallest distance to earlier-stage vertices
    double required = 0.0;       ///< alpha^(k-1) l0
};

struct FrontAudit {
    long events_checked = 0;
    long min_distance_violations = 0;
    long band_violations = 0;
    long stage_violations = 0;
    long round_violations = 0;
    double l0 = 0.0;
    std::vector<StageRow> stages;
    std::vector<std::string> details;  ///< first few violations
    bool pass() const {
        return min_distance_violations == 0 && band_violations == 0 && stage_violations == 0 && round_violations == 0;
    }
};

/// Event-log audit: min-distance and front band per event, protected-region growth across
/// stages, and monotone relocation histories. `plc` supplies the input vertices, which count
/// as belonging to every earlier stage.
FrontAudit front_audit(const EventLog& log, const RefinementConfig& cfg, const Plc* plc = nullptr);

struct ChargeReport {
    long charged_events = 0;
    long edges = 0;
    long max_per_edge = 0;
    std::map<long, long> histogram;  ///< count per edge -> number of edges
};

/// Quality insertions counted per driving shortest edge (vertex pair).
ChargeReport charge_report(const EventLog& log);

/// Circumcenter placement with the same queue and boundary machinery.
RefineResult baseline_circumcenter_refine(const Plc& plc, RefinementConfig cfg);

struct AuditReport {
    RefinementConfig config;
    long delaunay_violations = 0;
    long conformity_violations = 0;
    QualitySummary quality;
    SizeAudit size;
    FrontAudit front;
    ChargeReport charges;
    long fallback_events = 0;
    long insertions = 0;
    std::optional<double> baseline_ratio;  ///< vertices / circumcenter-baseline vertices
    std::vector<std::string> failures;
    bool pass() const { return failures.empty(); }
};

struct AuditOptions {
    bool size_audit = true;  ///< lfs is brute force; disable on very large inputs
    bool baseline = false;
};

AuditReport audit(const RefineResult& result, const AuditOptions& opt = {});

}  // namespace globemesh
