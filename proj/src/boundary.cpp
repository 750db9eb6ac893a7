#include "boundary.hpp"

#include <algorithm>
#include <stdexcept>

namespace globemesh::detail {

Key3 key3(VertexId a, VertexId b, VertexId c) {
    Key3 k{a, b, c};
    std::sort(k.begin(), k.end());
    return k;
}

FacetMesh::FacetMesh(int id, const Plc& plc, const std::vector<VertexId>& input_ids) : id_(id) {
    const Facet& f = plc.facets.at(id);
    const Point p0 = plc.vertices[f.polygon[0]];
    frame_.origin = p0;
    frame_.n = facet_normal(plc, f);
    frame_.u = normalized(plc.vertices[f.polygon[1]] - p0);
    frame_.v = cross(frame_.n, frame_.u);
    for (int v : f.polygon) poly_.push_back(frame_.to2d(plc.vertices[v]));
    const Box box = Box::around(poly_);
    size_ = std::max(box.diameter(), 1e-300);
    for (size_t i = 0; i < poly_.size(); ++i) {
        const Point a = poly_[i], b = poly_[(i + 1) % poly_.size()];
        area_ += 0.5 * (a.x * b.y - a.y * b.x);
    }
    area_ = std::abs(area_);
    tri_ = std::make_unique<Triangulation>(2, box);
    for (int i = 0; i < tri_->scaffold_count(); ++i) global_.push_back(kNone);
    std::vector<Key3> removed, created;
    for (int v : f.polygon) insert(input_ids[v], plc.vertices[v], removed, created);
    for (int v : f.interior) insert(input_ids[v], plc.vertices[v], removed, created);
}

bool FacetMesh::real_triangle(SimplexId s) const {
    if (tri_->touches_scaffold(s)) return false;
    const auto p = tri_->simplex_points(s);
    return triangle_area(p[0], p[1], p[2]) > 1e-10 * size_ * size_;
}

Key3 FacetMesh::global_key(SimplexId s) const {
    const auto v = tri_->simplex_vertices(s);
    return key3(global_[v[0]], global_[v[1]], global_[v[2]]);
}

void FacetMesh::insert(VertexId g, Point p, std::vector<Key3>& removed, std::vector<Key3>& created) {
    if (local_.count(g)) return;
    InsertResult r;
    const VertexId l = tri_->insert(frame_.to2d(p), Provenance::BoundarySteiner, &r);
    if (static_cast<size_t>(l) >= global_.size()) global_.resize(l + 1, kNone);
    global_[l] = g;
    local_[g] = l;
    for (const SimplexId s : r.removed)
        if (real_triangle(s)) removed.push_back(global_key(s));
    for (const SimplexId s : r.created)
        if (real_triangle(s)) created.push_back(global_key(s));
}

std::vector<Key3> FacetMesh::subfacets() const {
    std::vector<Key3> out;
    for (const SimplexId s : tri_->live_simplices())
        if (real_triangle(s)) out.push_back(global_key(s));
    std::sort(out.begin(), out.end());
    return out;
}

bool FacetMesh::inside_polygon(Point p, double rel_slack) const {
    const Point q = frame_.to2d(p);
    const size_t k = poly_.size();
    for (size_t i = 0; i < k; ++i) {
        const Point a = poly_[i], b = poly_[(i + 1) % k];
        const double cr = (b.x - a.x) * (q.y - a.y) - (b.y - a.y) * (q.x - a.x);
        if (cr < -rel_slack * size_ * distance(a, b)) return false;
    }
    return true;
}

Features::Features(const Plc& plc, const std::vector<VertexId>& input_ids) : dim_(plc.dim) {
    segment_facets_.assign(plc.segments.size(), {});
    segment_subs_.assign(plc.segments.size(), {});
    facet_segments_.assign(plc.facets.size(), {});
    std::map<Key2, int> seg_of;
    for (size_t s = 0; s < plc.segments.size(); ++s) {
        const VertexId a = input_ids[plc.segments[s][0]], b = input_ids[plc.segments[s][1]];
        const Key2 k = key2(a, b);
        subsegments_[k] = static_cast<int>(s);
        segment_subs_[s].insert(k);
        seg_of[k] = static_cast<int>(s);
        ensure(std::max(a, b));
        vertex_on_segment_[a] = vertex_on_segment_[b] = 1;
    }
    for (size_t f = 0; f < plc.facets.size(); ++f) {
        const auto& poly = plc.facets[f].polygon;
        for (size_t t = 0; t < poly.size(); ++t) {
            const Key2 k = key2(input_ids[poly[t]], input_ids[poly[(t + 1) % poly.size()]]);
            auto it = seg_of.find(k);
            if (it == seg_of.end()) throw std::invalid_argument("facet edge is not a segment; normalize the PLC first");
            segment_facets_[it->second].push_back(static_cast<int>(f));
            facet_segments_[f].push_back(it->second);
        }
        facets_.emplace_back(static_cast<int>(f), plc, input_ids);
        for (const Key3& k : facets_.back().subfacets()) subfacets_[k] = static_cast<int>(f);
        auto mark = [&](int v) {
            ensure(input_ids[v]);
            vertex_facets_[input_ids[v]].push_back(static_cast<int>(f));
        };
        for (int v : poly) mark(v);
        for (int v : plc.facets[f].interior) mark(v);
    }
}

void Features::ensure(VertexId v) {
    if (static_cast<size_t>(v) >= vertex_facets_.size()) {
        vertex_facets_.resize(v + 1);
        vertex_on_segment_.resize(v + 1, 0);
    }
}

const std::vector<int>& Features::vertex_facets(VertexId v) const {
    static const std::vector<int> none;
    return static_cast<size_t>(v) < vertex_facets_.size() ? vertex_facets_[v] : none;
}

bool Features::on_boundary(VertexId v) const {
    if (static_cast<size_t>(v) >= vertex_facets_.size()) return false;
    return vertex_on_segment_[v] || !vertex_facets_[v].empty();
}

std::vector<Key2> Features::facet_boundary(int f) const {
    std::vector<Key2> out;
    for (int s : facet_segments_[f]) out.insert(out.end(), segment_subs_[s].begin(), segment_subs_[s].end());
    return out;
}

void Features::split_subsegment(Key2 s, VertexId m, Point pm, std::vector<FeatureRef>& touched) {
    auto it = subsegments_.find(s);
    if (it == subsegments_.end()) throw std::logic_error("splitting an unknown subsegment");
    const int seg = it->second;
    subsegments_.erase(it);
    segment_subs_[seg].erase(s);
    ensure(m);
    vertex_on_segment_[m] = 1;
    for (const Key2 half : {key2(s[0], m), key2(m, s[1])}) {
        subsegments_[half] = seg;
        segment_subs_[seg].insert(half);
        touched.push_back({{half[0], half[1], kNone}, seg});
    }
    for (int f : segment_facets_[seg]) add_to_facet(f, m, pm, touched);
}

void Features::add_to_facet(int f, VertexId m, Point pm, std::vector<FeatureRef>& touched) {
    std::vector<Key3> removed, created;
    facets_[f].insert(m, pm, removed, created);
    for (const Key3& k : removed) subfacets_.erase(k);
    for (const Key3& k : created) {
        subfacets_[k] = f;
        touched.push_back({k, f});
    }
    ensure(m);
    if (std::find(vertex_facets_[m].begin(), vertex_facets_[m].end(), f) == vertex_facets_[m].end())
        vertex_facets_[m].push_back(f);
}

std::vector<FeatureRef> Features::all() const {
    std::vector<FeatureRef> out;
    for (const auto& [k, s] : subsegments_) out.push_back({{k[0], k[1], kNone}, s});
    for (const auto& [k, f] : subfacets_) out.push_back({k, f});
    return out;
}

}  // namespace globemesh::detail
