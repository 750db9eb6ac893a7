#pragma once

// Boundary bookkeeping for the refiner: subsegments, and per-facet 2D Delaunay
// triangulations whose triangles are the subfacets.

#include <array>
#include <map>
#include <set>
#include <memory>
#include <unordered_map>
#include <vector>

#include "globemesh/plc.hpp"
#include "globemesh/predicates.hpp"
#include "globemesh/triangulation.hpp"

namespace globemesh::detail {

using Key2 = std::array<VertexId, 2>;
using Key3 = std::array<VertexId, 3>;

inline Key2 key2(VertexId a, VertexId b) { return a < b ? Key2{a, b} : Key2{b, a}; }
Key3 key3(VertexId a, VertexId b, VertexId c);

/// A subsegment (key[2] == kNone) or a subfacet.
struct FeatureRef {
    Key3 key{kNone, kNone, kNone};
    int parent = -1;
    bool facet() const { return key[2] != kNone; }
    auto operator<=>(const FeatureRef&) const = default;
};

struct FacetFrame {
    Point origin, u, v, n;
    Point to2d(Point p) const {
        const Point d = p - origin;
        return {dot(d, u), dot(d, v), 0.0};
    }
};

class FacetMesh {
  public:
    FacetMesh(int id, const Plc& plc, const std::vector<VertexId>& input_ids);

    int id() const { return id_; }
    const FacetFrame& frame() const { return frame_; }
    bool has_vertex(VertexId g) const { return local_.count(g) != 0; }
    /// Inserts a global vertex; reports subfacet keys that disappeared and appeared.
    void insert(VertexId g, Point p, std::vector<Key3>& removed, std::vector<Key3>& created);
    std::vector<Key3> subfacets() const;
    /// Inside the convex polygon, with slack relative to the polygon size.
    bool inside_polygon(Point p, double rel_slack = 1e-9) const;
    double area() const { return area_; }

  private:
    bool real_triangle(SimplexId s) const;
    Key3 global_key(SimplexId s) const;

    int id_;
    FacetFrame frame_;
    std::unique_ptr<Triangulation> tri_;
    std::vector<VertexId> global_;  // local id -> global id (kNone for scaffold)
    std::unordered_map<VertexId, VertexId> local_;
    std::vector<Point> poly_;  // 2D, counterclockwise
    double size_ = 1.0;
    double area_ = 0.0;
};

/// Feature state shared by the refiner and its audits.
class Features {
  public:
    /// `input_ids[i]` is the triangulation id of PLC vertex i.
    Features(const Plc& plc, const std::vector<VertexId>& input_ids);

    int dim() const { return dim_; }
    const std::map<Key2, int>& subsegments() const { return subsegments_; }
    const std::map<Key3, int>& subfacets() const { return subfacets_; }
    std::vector<FacetMesh>& facets() { return facets_; }
    const std::vector<FacetMesh>& facets() const { return facets_; }
    const std::vector<int>& facets_of_segment(int s) const { return segment_facets_[s]; }
    /// Subsegments of a facet's boundary segments.
    std::vector<Key2> facet_boundary(int f) const;

    bool is_subsegment(Key2 k) const { return subsegments_.count(k) != 0; }
    bool is_subfacet(Key3 k) const { return subfacets_.count(k) != 0; }
    /// Facets containing a vertex (3D).
    const std::vector<int>& vertex_facets(VertexId v) const;
    /// True when the vertex lies on some boundary feature.
    bool on_boundary(VertexId v) const;

    /// Replaces subsegment s by its two halves at m and inserts m into adjacent facets.
    /// Appends every new or changed feature to `touched`.
    void split_subsegment(Key2 s, VertexId m, Point pm, std::vector<FeatureRef>& touched);
    /// Inserts m inside facet f.
    void add_to_facet(int f, VertexId m, Point pm, std::vector<FeatureRef>& touched);

    std::vector<FeatureRef> all() const;

  private:
    void ensure(VertexId v);

    int dim_;
    std::map<Key2, int> subsegments_;
    std::map<Key3, int> subfacets_;
    std::vector<FacetMesh> facets_;
    std::vector<std::vector<int>> segment_facets_;
    std::vector<std::set<Key2>> segment_subs_;
    std::vector<std::vector<int>> vertex_facets_;
    std::vector<char> vertex_on_segment_;
    std::vector<std::vector<int>> facet_segments_;
};

}  // namespace globemesh::detail
