#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "globemesh/geometry.hpp"
#include "globemesh/predicates.hpp"

namespace globemesh {

struct Plc;

using VertexId = int;
using SimplexId = int;
inline constexpr int kNone = -1;

enum class Provenance { Input, FreeSteiner, BoundarySteiner, Scaffold };

const char* to_string(Provenance p);

struct VertexRecord {
    Point point;
    Provenance provenance = Provenance::Input;
    int incident_feature = kNone;  ///< boundary feature a BoundarySteiner vertex lies on
    bool alive = true;
    SimplexId incident = kNone;  ///< some live simplex containing the vertex
};

/// A triangle (2D) or tetrahedron (3D), positively oriented. Slot 3 is unused in 2D.
/// nbr[k] is the neighbor across the facet opposite v[k].
struct Simplex {
    std::array<VertexId, 4> v{kNone, kNone, kNone, kNone};
    std::array<SimplexId, 4> nbr{kNone, kNone, kNone, kNone};
    bool alive = true;
};

struct InsertResult {
    VertexId vertex = kNone;
    std::vector<SimplexId> removed;
    std::vector<SimplexId> created;
    /// created_from[i] is the removed simplex whose boundary facet spawned created[i].
    std::vector<SimplexId> created_from;
};

struct RemoveResult {
    std::vector<SimplexId> removed;
    std::vector<SimplexId> created;
    /// True when the cavity could not be retriangulated locally and the whole
    /// triangulation was rebuilt; every previously live simplex id is then stale.
    bool rebuilt = false;
};

class TriangulationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Incremental Delaunay triangulation (2D) / tetrahedralization (3D) with Bowyer-Watson
/// insertion and local cavity retriangulation on deletion.
///
/// The domain is enclosed in one large scaffold simplex, so every insertion is interior.
/// Simplex ids are never reused: a dead id stays dead.
class Triangulation {
  public:
    Triangulation(int dim, const Box& domain, double scaffold_factor = 4.0);

    int dim() const { return dim_; }
    int scaffold_count() const { return dim_ + 1; }
    const Box& domain() const { return domain_; }
    double domain_diameter() const { return domain_diameter_; }

    VertexId insert(Point p, Provenance prov, InsertResult* out = nullptr);
    void remove(VertexId v, RemoveResult* out = nullptr);

    /// Live simplex containing p (lowest id on ties), or nullopt outside the scaffold box.
    std::optional<SimplexId> locate(Point p) const;

    const VertexRecord& vertex(VertexId v) const { return vertices_.at(v); }
    const Simplex& simplex(SimplexId s) const { return simplices_.at(s); }
    Point point(VertexId v) const { return vertices_[v].point; }
    int vertex_slots() const { return static_cast<int>(vertices_.size()); }
    int simplex_slots() const { return static_cast<int>(simplices_.size()); }
    std::vector<SimplexId> live_simplices() const;
    std::vector<VertexId> live_vertices(bool include_scaffold = false) const;
    int live_simplex_count() const { return live_count_; }

    bool is_scaffold(VertexId v) const { return v >= 0 && v < scaffold_count(); }
    bool touches_scaffold(SimplexId s) const;
    /// Points of the simplex's d+1 vertices.
    std::vector<Point> simplex_points(SimplexId s) const;
    std::span<const VertexId> simplex_vertices(SimplexId s) const {
        return {simplices_[s].v.data(), static_cast<size_t>(dim_ + 1)};
    }

    /// Live simplices incident to a vertex.
    std::vector<SimplexId> star(VertexId v) const;
    /// Neighboring live vertices (sorted).
    std::vector<VertexId> link_vertices(VertexId v) const;
    /// A live simplex having all given vertices (an edge, triangle, ...), or kNone.
    SimplexId find_simplex_with(std::span<const VertexId> face) const;
    bool has_face(std::span<const VertexId> face) const { return find_simplex_with(face) != kNone; }
    /// Every live simplex having all given vertices, ascending.
    std::vector<SimplexId> simplices_with(std::span<const VertexId> face) const;

    /// Simplices whose circumsphere strictly contains p (the cavity p would create).
    std::vector<SimplexId> conflict_region(Point p) const;
    /// Live simplices whose circumsphere meets the ball (c, r), ascending; includes every
    /// simplex meeting the ball.
    std::vector<SimplexId> simplices_meeting_ball(Point c, double r, SimplexId hint = kNone) const;
    /// Live vertices strictly within distance r of c, ascending.
    std::vector<VertexId> vertices_in_ball(Point c, double r, SimplexId hint = kNone) const;

    /// Incremented on every mutation.
    long mutation_count() const { return mutations_; }
    /// Incremented whenever the triangulation is rebuilt from scratch.
    int generation() const { return generation_; }

  private:
    void init_scaffold();
    SimplexId add_simplex(const std::array<VertexId, 4>& v);
    void kill_simplex(SimplexId s);
    std::optional<SimplexId> walk(Point p, SimplexId start) const;
    void insert_existing(VertexId id, InsertResult* out);
    std::vector<SimplexId> grow_cavity(Point p, SimplexId start) const;
    bool remove_locally(VertexId v, bool reverse_order, RemoveResult* out);
    void rebuild(RemoveResult* out);
    Sign orient_with(const Simplex& s, int k, Point p) const;
    bool coincident(Point p, SimplexId s) const;

    int dim_;
    Box domain_;
    double domain_diameter_;
    std::vector<VertexRecord> vertices_;
    std::vector<Simplex> simplices_;
    int live_count_ = 0;
    mutable SimplexId last_ = kNone;
    long mutations_ = 0;
    int generation_ = 0;
    Box scaffold_box_;
};

/// Delaunay triangulation of all PLC vertices inside a scaffold box. Boundary features are
/// not forced; conformity is established later by encroachment splitting.
Triangulation bootstrap(const Plc& plc);

}  // namespace globemesh
