#include "globemesh/refiner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <queue>
#include <set>
#include <unordered_set>

#include "boundary.hpp"
#include "globemesh/optimizer.hpp"
#include "globemesh/regions.hpp"

namespace globemesh {

const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::Steiner: return "STEINER";
        case EventKind::BoundaryMidpoint: return "BOUNDARY_MIDPOINT";
        case EventKind::BoundaryFront: return "BOUNDARY_FRONT";
        case EventKind::Delete: return "DELETE";
        case EventKind::FallbackSliver: return "FALLBACK_SLIVER";
        case EventKind::Spindle: return "SPINDLE";
        case EventKind::HeuristicCaseC: return "HEURISTIC_CASE_C";
    }
    return "?";
}

std::optional<EventKind> event_kind_from_string(const std::string& s) {
    for (EventKind k : {EventKind::Steiner, EventKind::BoundaryMidpoint, EventKind::BoundaryFront, EventKind::Delete,
                        EventKind::FallbackSliver, EventKind::Spindle, EventKind::HeuristicCaseC})
        if (s == to_string(k)) return k;
    return std::nullopt;
}

long EventLog::insertions() const {
    long n = 0;
    for (const auto& e : events)
        if (e.kind != EventKind::Delete && e.kind != EventKind::HeuristicCaseC) ++n;
    return n;
}

long EventLog::count(EventKind k) const {
    return std::count_if(events.begin(), events.end(), [k](const InsertionEvent& e) { return e.kind == k; });
}

FrontSplit front_split_point(Point v, Point center, double l_mid, double gamma, double l_eff) {
    const double d = gamma * l_eff;
    if (!(d < l_mid * (1.0 - 1e-9))) return {center, l_mid, false};
    return {v + d * normalized(center - v), d, true};
}

namespace {

using namespace detail;

struct Info {
    SimplexId simplex = kNone;
    std::vector<Point> pts;
    std::vector<int> ids;
    QualityMeasures m;
    Classification cls = Classification::Good;
    std::array<int, 2> edge{};  // local slots of the shortest edge
    bool exempt = false;        // sliver traced to a fallback vertex
};

struct Plan {
    Candidate cand;
    PlacementProblem problem;  // empty feasible when the point did not come from the optimizer
    EventKind kind = EventKind::Steiner;
    bool optimized = false;
};

// Angle placement keeps only the planes closest to the feasible region.
constexpr size_t kMaxPlanes = 12;
constexpr int kRelocationPasses = 20;

struct WorkItem {
    double key = 0.0;
    SimplexId simplex = kNone;
    long seq = 0;
    int generation = 0;
    long stamp = 0;
    bool probed = false;
    std::optional<Plan> cached;

    bool operator>(const WorkItem& o) const {
        if (key != o.key) return key > o.key;
        if (simplex != o.simplex) return simplex > o.simplex;
        return seq > o.seq;
    }
};

struct Encroachment {
    FeatureRef feature;
    double l_mid = 0.0;
};

class Refiner {
  public:
    Refiner(const Plc& plc, const RefinementConfig& cfg, const std::vector<PreprocessRecord>& pre);
    RefineResult run();

  private:
    // mesh bookkeeping
    void grow_labels();
    void scan_features(SimplexId s, std::vector<FeatureRef>& out) const;
    void note_touched(const std::vector<FeatureRef>& refs);
    void after_insert(const InsertResult& r);
    void after_remove(const RemoveResult& r);
    bool feature_alive(const FeatureRef& f) const;
    std::vector<VertexId> feature_vertices(const FeatureRef& f) const;
    int check_feature(const FeatureRef& f) const;  // 0 ok, 1 missing, 2 encroached
    void enforce_conformity();
    void flood();
    bool is_feature_face(const Simplex& S, int k) const;

    // insertion primitives
    VertexId insert_point(Point p, Provenance prov, InsertionEvent ev);
    void delete_free_in_ball(Point c, double r);
    void check_cap();

    // boundary handling
    double l_mid(const FeatureRef& f) const;
    double r_v(VertexId v) const;
    void split(const FeatureRef& f, std::optional<double> l_eff, const Info* driver);
    std::vector<Encroachment> encroachments(Point p) const;
    std::vector<Key2> encroached_segments(Point p, const std::vector<Key2>& among) const;

    // quality
    std::optional<Info> assess(SimplexId s) const;
    bool poor(const Info& info) const;
    void enqueue(SimplexId s);
    void rebuild_queue();
    std::optional<WorkItem> pop_fresh();
    Plan plan(const Info& info, const std::vector<Point>& extra_sites,
              const std::vector<Constraint>& extra_constraints) const;
    void process_single(WorkItem item);
    void multi_round();
    InsertionEvent quality_event(const Info& info, const Plan& plan, double l_eff) const;

    MeshSnapshot snapshot() const;

    Plc plc_;
    RefinementConfig cfg_;
    Triangulation tri_;
    std::vector<VertexId> input_ids_;
    std::unique_ptr<Features> feat_;
    std::vector<signed char> label_;
    std::vector<char> queued_;
    bool labels_dirty_ = true;
    std::set<FeatureRef> pending_segments_, pending_facets_;
    std::vector<char> fallback_vertex_;
    std::priority_queue<WorkItem, std::vector<WorkItem>, std::greater<>> queue_;
    long seq_ = 0;
    EventLog log_;
    RefineStats stats_;
    double scale_ = 1.0;
};

Refiner::Refiner(const Plc& plc, const RefinementConfig& cfg, const std::vector<PreprocessRecord>& pre)
    : plc_(plc), cfg_(cfg), tri_(plc.dim, Box::around(plc.vertices)) {
    scale_ = plc_.scale();
    for (const Point& p : plc_.vertices) input_ids_.push_back(tri_.insert(p, Provenance::Input));
    feat_ = std::make_unique<Features>(plc_, input_ids_);
    log_.config = cfg_;
    // Preprocessing heuristics are logged for inspection; replay skips them.
    for (const auto& r : pre) {
        if (!r.heuristic_case_c) continue;
        InsertionEvent ev;
        ev.seq = static_cast<long>(log_.events.size());
        ev.kind = EventKind::HeuristicCaseC;
        ev.point = r.placed;
        ev.feature = (r.on_facet ? "facet " : "segment ") + std::to_string(r.feature);
        log_.events.push_back(std::move(ev));
    }
    for (const auto& f : feat_->all()) (f.facet() ? pending_facets_ : pending_segments_).insert(f);
}

void Refiner::grow_labels() {
    const size_t n = static_cast<size_t>(tri_.simplex_slots());
    if (label_.size() < n) label_.resize(n, 0);
    if (queued_.size() < n) queued_.resize(n, 0);
}

void Refiner::scan_features(SimplexId s, std::vector<FeatureRef>& out) const {
    const auto& v = tri_.simplex(s).v;
    const int d = tri_.dim();
    for (int i = 0; i <= d; ++i)
        for (int j = i + 1; j <= d; ++j) {
            const Key2 k = key2(v[i], v[j]);
            if (auto it = feat_->subsegments().find(k); it != feat_->subsegments().end())
                out.push_back({{k[0], k[1], kNone}, it->second});
        }
    if (d == 3) {
        for (int o = 0; o < 4; ++o) {
            Key3 k{};
            int n = 0;
            for (int i = 0; i < 4; ++i)
                if (i != o) k[n++] = v[i];
            k = key3(k[0], k[1], k[2]);
            if (auto it = feat_->subfacets().find(k); it != feat_->subfacets().end()) out.push_back({k, it->second});
        }
    }
}

void Refiner::note_touched(const std::vector<FeatureRef>& refs) {
    for (const auto& f : refs) (f.facet() ? pending_facets_ : pending_segments_).insert(f);
}

void Refiner::after_insert(const InsertResult& r) {
    grow_labels();
    std::vector<FeatureRef> touched;
    for (const SimplexId s : r.removed) scan_features(s, touched);
    for (size_t i = 0; i < r.created.size(); ++i) {
        label_[r.created[i]] = label_[r.created_from[i]];
        scan_features(r.created[i], touched);
    }
    note_touched(touched);
    if (!labels_dirty_)
        for (const SimplexId s : r.created) enqueue(s);
}

void Refiner::after_remove(const RemoveResult& r) {
    grow_labels();
    ++stats_.deletions;
    if (r.rebuilt) {
        ++stats_.rebuilds;
        labels_dirty_ = true;
        note_touched(feat_->all());
        return;
    }
    const signed char lab = r.removed.empty() ? 0 : label_[r.removed.front()];
    std::vector<FeatureRef> touched;
    for (const SimplexId s : r.created) {
        label_[s] = lab;
        scan_features(s, touched);
    }
    note_touched(touched);
    if (!labels_dirty_)
        for (const SimplexId s : r.created) enqueue(s);
}

bool Refiner::feature_alive(const FeatureRef& f) const {
    if (f.facet()) return feat_->is_subfacet(f.key);
    return feat_->is_subsegment({f.key[0], f.key[1]});
}

std::vector<VertexId> Refiner::feature_vertices(const FeatureRef& f) const {
    if (f.facet()) return {f.key[0], f.key[1], f.key[2]};
    return {f.key[0], f.key[1]};
}

int Refiner::check_feature(const FeatureRef& f) const {
    const auto fv = feature_vertices(f);
    const auto around = tri_.simplices_with(fv);
    if (around.empty()) return 1;
    if (!f.facet()) {
        const Point a = tri_.point(fv[0]), b = tri_.point(fv[1]);
        for (const SimplexId s : around)
            for (const VertexId v : tri_.simplex_vertices(s)) {
                if (v == fv[0] || v == fv[1]) continue;
                if (encroaches_segment(tri_.point(v), a, b)) return 2;
            }
        return 0;
    }
    const std::array<Point, 3> t{tri_.point(fv[0]), tri_.point(fv[1]), tri_.point(fv[2])};
    const Sphere eq = circumsphere(t);
    const auto& on_same = feat_->facets()[f.parent];
    for (const SimplexId s : around)
        for (const VertexId v : tri_.simplex_vertices(s)) {
            if (v == fv[0] || v == fv[1] || v == fv[2] || on_same.has_vertex(v)) continue;
            if (distance(tri_.point(v), eq.center) < eq.radius * (1.0 - 1e-12)) return 2;
        }
    return 0;
}

void Refiner::enforce_conformity() {
    while (!pending_segments_.empty() || !pending_facets_.empty()) {
        auto& set = !pending_segments_.empty() ? pending_segments_ : pending_facets_;
        const FeatureRef f = *set.begin();
        set.erase(set.begin());
        if (!feature_alive(f)) continue;
        const int status = check_feature(f);
        if (status == 0) continue;
        if (status == 1) labels_dirty_ = true;
        split(f, std::nullopt, nullptr);
    }
    if (labels_dirty_) flood();
}

bool Refiner::is_feature_face(const Simplex& S, int k) const {
    if (tri_.dim() == 2) {
        Key2 e{};
        int n = 0;
        for (int i = 0; i < 3; ++i)
            if (i != k) e[n++] = S.v[i];
        return feat_->is_subsegment(key2(e[0], e[1]));
    }
    Key3 f{};
    int n = 0;
    for (int i = 0; i < 4; ++i)
        if (i != k) f[n++] = S.v[i];
    return feat_->is_subfacet(key3(f[0], f[1], f[2]));
}

void Refiner::flood() {
    grow_labels();
    const auto live = tri_.live_simplices();
    for (const SimplexId s : live) label_[s] = 0;
    auto fill = [&](std::vector<SimplexId> todo) {
        for (const SimplexId s : todo) label_[s] = -1;
        for (size_t i = 0; i < todo.size(); ++i) {
            const Simplex& S = tri_.simplex(todo[i]);
            for (int k = 0; k <= tri_.dim(); ++k) {
                const SimplexId n = S.nbr[k];
                if (n == kNone || label_[n] == -1 || is_feature_face(S, k)) continue;
                label_[n] = -1;
                todo.push_back(n);
            }
        }
    };
    std::vector<SimplexId> seeds;
    for (const SimplexId s : live)
        if (tri_.touches_scaffold(s)) seeds.push_back(s);
    fill(seeds);
    for (const Point& h : plc_.holes)
        if (auto s = tri_.locate(h); s && label_[*s] != -1) fill({*s});
    for (const SimplexId s : live)
        if (label_[s] == 0) label_[s] = 1;
    labels_dirty_ = false;
    rebuild_queue();
}

void Refiner::check_cap() {
    if (stats_.insertions >= cfg_.max_insertions)
        throw InsertionCapError("insertion cap of " + std::to_string(cfg_.max_insertions) + " reached", log_);
}

VertexId Refiner::insert_point(Point p, Provenance prov, InsertionEvent ev) {
    check_cap();
    InsertResult r;
    const VertexId v = tri_.insert(p, prov, &r);
    ++stats_.insertions;
    double md = std::numeric_limits<double>::infinity();
    for (const VertexId w : tri_.link_vertices(v))
        if (!tri_.is_scaffold(w)) md = std::min(md, distance(tri_.point(v), tri_.point(w)));
    ev.seq = static_cast<long>(log_.events.size());
    ev.vertex = v;
    ev.point = tri_.point(v);
    ev.min_dist = md;
    if (ev.edge[0] != kNone)
        ev.edge_dist = std::min(distance(ev.point, tri_.point(ev.edge[0])), distance(ev.point, tri_.point(ev.edge[1])));
    if (static_cast<size_t>(v) >= fallback_vertex_.size()) fallback_vertex_.resize(v + 1, 0);
    fallback_vertex_[v] = ev.kind == EventKind::FallbackSliver;
    if (ev.kind == EventKind::FallbackSliver) ++stats_.fallback;
    if (ev.kind == EventKind::Spindle) ++stats_.spindle;
    log_.events.push_back(std::move(ev));
    after_insert(r);
    return v;
}

void Refiner::delete_free_in_ball(Point c, double r) {
    for (const VertexId v : tri_.vertices_in_ball(c, r)) {
        if (tri_.vertex(v).provenance != Provenance::FreeSteiner) continue;
        InsertionEvent ev;
        ev.seq = static_cast<long>(log_.events.size());
        ev.kind = EventKind::Delete;
        ev.vertex = v;
        ev.point = tri_.point(v);
        RemoveResult r;
        tri_.remove(v, &r);
        log_.events.push_back(std::move(ev));
        after_remove(r);
    }
}

double Refiner::l_mid(const FeatureRef& f) const {
    if (!f.facet()) return 0.5 * distance(tri_.point(f.key[0]), tri_.point(f.key[1]));
    const std::array<Point, 3> t{tri_.point(f.key[0]), tri_.point(f.key[1]), tri_.point(f.key[2])};
    return circumsphere(t).radius;
}

double Refiner::r_v(VertexId v) const {
    double r = std::numeric_limits<double>::infinity();
    for (const VertexId w : tri_.link_vertices(v))
        if (!tri_.is_scaffold(w)) r = std::min(r, distance(tri_.point(v), tri_.point(w)));
    return r;
}

std::vector<Key2> Refiner::encroached_segments(Point p, const std::vector<Key2>& among) const {
    std::vector<Key2> out;
    for (const Key2& k : among)
        if (encroaches_segment(p, tri_.point(k[0]), tri_.point(k[1]))) out.push_back(k);
    return out;
}

// Splits a subsegment or subfacet. With l_eff the split point moves toward the feature vertex
// with the smallest adjacent edge (front placement); otherwise midpoint / circumcenter.
void Refiner::split(const FeatureRef& f, std::optional<double> l_eff, const Info* driver) {
    const bool front = l_eff && !cfg_.classic_boundary;
    const auto fv = feature_vertices(f);
    InsertionEvent ev;
    ev.feature = (f.facet() ? "facet " : "segment ") + std::to_string(f.parent);
    if (driver) {
        ev.l_min = driver->m.shortest_edge;
        ev.edge = {driver->ids[driver->edge[0]], driver->ids[driver->edge[1]]};
    }
    ev.l_eff = l_eff.value_or(0.0);

    if (!f.facet()) {
        const Point a = tri_.point(fv[0]), b = tri_.point(fv[1]);
        const double half = 0.5 * distance(a, b);
        Point m = 0.5 * (a + b);
        double radius = half;
        ev.kind = EventKind::BoundaryMidpoint;
        if (front) {
            const VertexId v = r_v(fv[1]) < r_v(fv[0]) ? fv[1] : fv[0];
            const FrontSplit fs = front_split_point(tri_.point(v), m, half, cfg_.gamma, *l_eff);
            if (fs.front) {
                m = fs.point;
                radius = fs.radius;
                ev.kind = EventKind::BoundaryFront;
            }
        }
        // Other subsegments the new point would encroach are split first.
        {
            std::vector<Key2> others;
            for (const auto& [k, s] : feat_->subsegments())
                if (k != Key2{fv[0], fv[1]} && (k[0] == fv[0] || k[0] == fv[1] || k[1] == fv[0] || k[1] == fv[1]))
                    others.push_back(k);
            const auto hit = encroached_segments(m, others);
            if (!hit.empty() && ev.kind == EventKind::BoundaryFront) {
                for (const Key2& k : hit) split({{k[0], k[1], kNone}, feat_->subsegments().at(k)}, std::nullopt, nullptr);
                return;
            }
        }
        delete_free_in_ball(m, radius);
        if (!feature_alive(f)) return;
        ev.active = {"segment " + std::to_string(f.parent)};
        const VertexId mv = insert_point(m, Provenance::BoundarySteiner, ev);
        std::vector<FeatureRef> touched;
        feat_->split_subsegment({fv[0], fv[1]}, mv, tri_.point(mv), touched);
        note_touched(touched);
        return;
    }

    FacetMesh& fm = feat_->facets()[f.parent];
    const std::array<Point, 3> t{tri_.point(fv[0]), tri_.point(fv[1]), tri_.point(fv[2])};
    const Sphere cc = circumsphere(t);
    Point m = cc.center;
    double radius = cc.radius;
    ev.kind = EventKind::BoundaryMidpoint;
    if (front) {
        VertexId v = fv[0];
        double best = r_v(fv[0]);
        for (int i = 1; i < 3; ++i)
            if (const double r = r_v(fv[i]); r < best) best = r, v = fv[i];
        const FrontSplit fs = front_split_point(tri_.point(v), cc.center, cc.radius, cfg_.gamma, *l_eff);
        if (fs.front) {
            m = fs.point;
            radius = fs.radius;
            ev.kind = EventKind::BoundaryFront;
        }
    }
    const auto boundary = feat_->facet_boundary(f.parent);
    auto hit = encroached_segments(m, boundary);
    if (hit.empty() && !fm.inside_polygon(m)) {
        // Outside the polygon without encroaching: split the nearest boundary piece.
        double best = std::numeric_limits<double>::infinity();
        Key2 pick{};
        for (const Key2& k : boundary)
            if (const double d = distance(m, 0.5 * (tri_.point(k[0]) + tri_.point(k[1]))); d < best) best = d, pick = k;
        hit = {pick};
    }
    if (!hit.empty()) {
        for (const Key2& k : hit)
            if (feat_->is_subsegment(k)) split({{k[0], k[1], kNone}, feat_->subsegments().at(k)}, std::nullopt, nullptr);
        pending_facets_.insert(f);
        return;
    }
    delete_free_in_ball(m, radius);
    if (!feature_alive(f)) return;
    ev.active = {"facet " + std::to_string(f.parent)};
    const VertexId mv = insert_point(m, Provenance::BoundarySteiner, ev);
    std::vector<FeatureRef> touched;
    feat_->add_to_facet(f.parent, mv, tri_.point(mv), touched);
    note_touched(touched);
}

std::vector<Encroachment> Refiner::encroachments(Point p) const {
    const auto cavity = tri_.conflict_region(p);
    const std::unordered_set<SimplexId> in(cavity.begin(), cavity.end());
    std::vector<FeatureRef> refs;
    for (const SimplexId s : cavity) scan_features(s, refs);
    std::sort(refs.begin(), refs.end());
    refs.erase(std::unique(refs.begin(), refs.end()), refs.end());
    std::vector<Encroachment> out;
    for (const auto& f : refs) {
        const auto fv = feature_vertices(f);
        bool hit;
        if (!f.facet()) {
            hit = encroaches_segment(p, tri_.point(fv[0]), tri_.point(fv[1]));
        } else {
            hit = encroaches_facet(p, tri_.point(fv[0]), tri_.point(fv[1]), tri_.point(fv[2]));
        }
        if (!hit) {
            // A feature face with every incident simplex in the cavity would be destroyed.
            const auto around = tri_.simplices_with(fv);
            hit = !around.empty() && std::all_of(around.begin(), around.end(), [&](SimplexId s) { return in.count(s) != 0; });
        }
        if (hit) out.push_back({f, l_mid(f)});
    }
    return out;
}

std::optional<Info> Refiner::assess(SimplexId s) const {
    if (s < 0 || s >= tri_.simplex_slots() || !tri_.simplex(s).alive) return std::nullopt;
    Info info;
    info.simplex = s;
    info.pts = tri_.simplex_points(s);
    for (const VertexId v : tri_.simplex_vertices(s)) info.ids.push_back(v);
    info.m = measure_or_degenerate(info.pts);
    info.cls = classify(info.m, cfg_);
    info.edge = shortest_edge(info.pts, info.ids);
    if (info.cls == Classification::Sliver)
        for (const VertexId v : info.ids)
            if (static_cast<size_t>(v) < fallback_vertex_.size() && fallback_vertex_[v]) info.exempt = true;
    return info;
}

bool Refiner::poor(const Info& info) const {
    if (info.m.degenerate) return false;
    if (info.cls == Classification::LargeRho) return true;
    return info.cls == Classification::Sliver && !info.exempt;
}

void Refiner::enqueue(SimplexId s) {
    grow_labels();
    if (queued_[s] || label_[s] != 1) return;
    const auto info = assess(s);
    if (!info || !poor(*info)) return;
    WorkItem w;
    w.simplex = s;
    w.seq = seq_++;
    w.key = cfg_.ordering == Ordering::ShortestFirst ? info->m.shortest_edge : static_cast<double>(w.seq);
    w.generation = tri_.generation();
    w.stamp = tri_.mutation_count();
    queued_[s] = 1;
    queue_.push(std::move(w));
}

void Refiner::rebuild_queue() {
    queue_ = {};
    std::fill(queued_.begin(), queued_.end(), 0);
    for (const SimplexId s : tri_.live_simplices()) enqueue(s);
}

std::optional<WorkItem> Refiner::pop_fresh() {
    while (!queue_.empty()) {
        WorkItem w = queue_.top();
        queue_.pop();
        ++stats_.queue_pops;
        if (w.simplex < static_cast<SimplexId>(queued_.size())) queued_[w.simplex] = 0;
        if (w.generation != tri_.generation() || !tri_.simplex(w.simplex).alive || label_[w.simplex] != 1) {
            ++stats_.stale_pops;
            continue;
        }
        return w;
    }
    return std::nullopt;
}

Plan Refiner::plan(const Info& info, const std::vector<Point>& extra_sites,
                   const std::vector<Constraint>& extra_constraints) const {
    Plan out;
    const QualityMeasures& m = info.m;
    const double l = m.shortest_edge;
    const bool large = info.cls == Classification::LargeRho;
    const Point pa = info.pts[info.edge[0]], pb = info.pts[info.edge[1]];

    auto circumcenter_plan = [&](EventKind kind) {
        Plan p;
        p.cand.point = m.circumcenter;
        p.cand.active_set = {"circumcenter"};
        p.kind = kind;
        return p;
    };
    if (cfg_.placement == PlacementMode::Circumcenter)
        return circumcenter_plan(large ? EventKind::Steiner : EventKind::FallbackSliver);

    PlacementProblem prob;
    prob.dim = tri_.dim();
    EventKind kind = EventKind::Steiner;
    // Slightly inside rho* so a vertex on the region boundary yields a strictly good element.
    const double rho_in = cfg_.rho_star * (1.0 - 1e-9);
    const bool sliver_fallback = !large && !(m.rho > cfg_.alpha);
    if (sliver_fallback) {
        prob.feasible.constraints.push_back(Constraint::inside({m.circumcenter, m.circumradius * (1.0 - 1e-9)}));
        kind = EventKind::FallbackSliver;
    } else {
        prob.feasible.constraints.push_back(picking_constraint(m.circumcenter, m.rho, l, cfg_.alpha));
    }
    if (tri_.dim() == 2) {
        const int third = 3 - info.edge[0] - info.edge[1];
        prob.feasible.constraints.push_back(Constraint::inside(petal(pa, pb, rho_in, info.pts[third])));
    } else {
        const FacetChoice fc = smallest_facet(info.pts, info.ids);
        auto globe = [&](const std::array<int, 3>& f, int opp) {
            const std::array<Point, 3> t{info.pts[f[0]], info.pts[f[1]], info.pts[f[2]]};
            return snow_globe(t, info.pts[opp], rho_in);
        };
        auto g = globe(fc.facet, fc.opposite);
        if (!g) g = globe(fc.other_facet, fc.other_opposite);
        if (g) {
            prob.feasible.constraints.push_back(Constraint::inside(*g));
        } else {
            prob.feasible.constraints.push_back(spindle_torus(info.pts[fc.edge[0]], info.pts[fc.edge[1]], rho_in));
            if (kind == EventKind::Steiner) kind = EventKind::Spindle;
        }
    }
    for (const auto& c : extra_constraints) prob.feasible.constraints.push_back(c);

    const auto ball = prob.feasible.bounding_ball();
    const auto region = tri_.simplices_meeting_ball(ball->center, ball->radius, info.simplex);
    std::vector<VertexId> site_ids;
    for (const SimplexId s : region)
        for (const VertexId v : tri_.simplex_vertices(s))
            if (!tri_.is_scaffold(v)) site_ids.push_back(v);
    std::sort(site_ids.begin(), site_ids.end());
    site_ids.erase(std::unique(site_ids.begin(), site_ids.end()), site_ids.end());
    for (const VertexId v : site_ids) prob.sites.push_back(tri_.point(v));
    for (const Point& p : extra_sites) prob.sites.push_back(p);

    const double max_side = cfg_.sliver_length_factor * l;
    if (cfg_.placement == PlacementMode::Angle) {
        prob.objective = Objective::WeightedPlaneDistance;
        // Faces the new vertex would connect to: the boundary of the cavity at the region center.
        const auto cavity = tri_.conflict_region(ball->center);
        const std::unordered_set<SimplexId> in(cavity.begin(), cavity.end());
        const int d = tri_.dim();
        for (const SimplexId s : cavity) {
            const Simplex& S = tri_.simplex(s);
            for (int o = 0; o <= d; ++o) {
                if (S.nbr[o] != kNone && in.count(S.nbr[o])) continue;
                std::array<VertexId, 3> f{kNone, kNone, kNone};
                int n = 0;
                bool scaffold = false;
                for (int i = 0; i <= d; ++i)
                    if (i != o) {
                        f[n++] = S.v[i];
                        scaffold = scaffold || tri_.is_scaffold(S.v[i]);
                    }
                if (scaffold) continue;
                if (d == 2) {
                    const Point a = tri_.point(f[0]), b = tri_.point(f[1]);
                    const double len = distance(a, b);
                    if (!(len < max_side)) continue;
                    prob.planes.push_back(WeightedPlane::through(a, b, a + Point{0, 0, len}, len));
                } else {
                    const Point a = tri_.point(f[0]), b = tri_.point(f[1]), c = tri_.point(f[2]);
                    const double side = std::min({distance(a, b), distance(b, c), distance(a, c)});
                    const double area = triangle_area(a, b, c);
                    if (!(side < max_side) || !(area > 1e-14 * side * side)) continue;
                    prob.planes.push_back(WeightedPlane::through(a, b, c, area));
                }
            }
        }
        if (prob.planes.size() > kMaxPlanes) {
            auto near = [&](const WeightedPlane& pl) { return pl.value(ball->center); };
            std::stable_sort(prob.planes.begin(), prob.planes.end(),
                             [&](const WeightedPlane& x, const WeightedPlane& y) { return near(x) < near(y); });
            prob.planes.resize(kMaxPlanes);
        }
        if (prob.planes.empty()) prob.objective = Objective::MinDistance;
    } else if (tri_.dim() == 3) {
        std::vector<IndexedPoint> verts;
        for (const VertexId v : site_ids) verts.push_back({v, tri_.point(v)});
        std::set<std::array<int, 3>> faces;
        for (const SimplexId s : region) {
            const auto sv = tri_.simplex_vertices(s);
            for (int o = 0; o < 4; ++o) {
                std::array<int, 3> f{};
                int n = 0;
                bool scaffold = false;
                for (int i = 0; i < 4; ++i)
                    if (i != o) {
                        f[n++] = sv[i];
                        scaffold = scaffold || tri_.is_scaffold(sv[i]);
                    }
                if (!scaffold) faces.insert(key3(f[0], f[1], f[2]));
            }
        }
        const std::vector<std::array<int, 3>> face_list(faces.begin(), faces.end());
        prob.avoid = enumerate_forbidden(verts, *ball, std::numeric_limits<double>::infinity(), max_side, cfg_.rho_star,
                                         cfg_.sigma_star, face_list);
    }

    try {
        out.cand = prob.objective == Objective::MinDistance ? solve(prob) : solve_weighted(prob);
    } catch (const InfeasibleError&) {
        if (!extra_constraints.empty()) throw;
        return circumcenter_plan(kind == EventKind::Spindle ? EventKind::Steiner : kind);
    }
    out.optimized = true;
    out.kind = out.cand.fallback ? EventKind::FallbackSliver : kind;
    out.problem = std::move(prob);
    return out;
}

InsertionEvent Refiner::quality_event(const Info& info, const Plan& plan, double l_eff) const {
    InsertionEvent ev;
    ev.kind = plan.kind;
    ev.l_min = info.m.shortest_edge;
    ev.l_eff = l_eff;
    ev.edge = {info.ids[info.edge[0]], info.ids[info.edge[1]]};
    ev.active = plan.cand.active_set;
    return ev;
}

void Refiner::process_single(WorkItem item) {
    const auto info = assess(item.simplex);
    if (!info || !poor(*info)) return;
    Plan p;
    if (item.probed && item.cached && item.stamp == tri_.mutation_count()) p = *item.cached;
    else p = plan(*info, {}, {});

    auto enc = encroachments(p.cand.point);
    if (enc.empty()) {
        insert_point(p.cand.point, Provenance::FreeSteiner, quality_event(*info, p, item.key));
        return;
    }
    double l_eff = info->m.shortest_edge;
    for (const auto& e : enc) l_eff = std::min(l_eff, e.l_mid / cfg_.alpha);
    if (!item.probed && cfg_.ordering == Ordering::ShortestFirst && l_eff < item.key * (1.0 - 1e-12)) {
        item.key = l_eff;
        item.probed = true;
        item.cached = p;
        item.stamp = tri_.mutation_count();
        item.seq = seq_++;
        ++stats_.repushes;
        queued_[item.simplex] = 1;
        queue_.push(std::move(item));
        return;
    }
    // A point of the same feasible set that stays clear of the encroached features.
    if (p.optimized) {
        std::vector<Constraint> keep_out;
        for (int attempt = 0; attempt < 3 && !enc.empty(); ++attempt) {
            for (const auto& e : enc) {
                const auto fv = feature_vertices(e.feature);
                Sphere s;
                if (fv.size() == 2) {
                    s = {0.5 * (tri_.point(fv[0]) + tri_.point(fv[1])), e.l_mid};
                } else {
                    const std::array<Point, 3> t{tri_.point(fv[0]), tri_.point(fv[1]), tri_.point(fv[2])};
                    s = circumsphere(t);
                }
                keep_out.push_back(Constraint::outside(s));
            }
            Plan q;
            try {
                q = plan(*info, {}, keep_out);
            } catch (const InfeasibleError&) {
                break;
            }
            if (q.cand.fallback) break;
            auto again = encroachments(q.cand.point);
            if (again.empty()) {
                insert_point(q.cand.point, Provenance::FreeSteiner, quality_event(*info, q, l_eff));
                return;
            }
            enc = std::move(again);
        }
    }
    const auto pick = std::min_element(enc.begin(), enc.end(), [](const Encroachment& a, const Encroachment& b) {
        if (a.l_mid != b.l_mid) return a.l_mid < b.l_mid;
        return a.feature < b.feature;
    });
    split(pick->feature, l_eff, &*info);
    enqueue(item.simplex);
}

void Refiner::multi_round() {
    struct Member {
        WorkItem item;
        Info info;
        Plan plan;
    };
    const int round = static_cast<int>(stats_.multi_rounds++);
    std::vector<Member> batch;
    std::vector<RelocationItem> reloc;

    auto batch_points = [&](size_t skip) {
        std::vector<Point> pts;
        for (size_t i = 0; i < batch.size(); ++i)
            if (i != skip) pts.push_back(reloc[i].current.point);
        return pts;
    };
    auto run_relocation = [&]() {
        if (reloc.size() < 2) return;
        const auto hist = relocate(reloc, kRelocationPasses, 1e-6);
        log_.rounds.push_back({round, static_cast<int>(reloc.size()), hist});
    };

    while (static_cast<int>(batch.size()) < cfg_.batch_cap) {
        auto item = pop_fresh();
        if (!item) break;
        const auto info = assess(item->simplex);
        if (!info || !poor(*info)) continue;
        Plan p = plan(*info, batch_points(batch.size()), {});
        if (!p.optimized || p.kind == EventKind::FallbackSliver || !encroachments(p.cand.point).empty()) {
            if (batch.empty()) {
                process_single(*item);
                return;
            }
            // Boundary work ends the round; the remaining candidates are placed again.
            process_single(*item);
            std::vector<Member> kept;
            std::vector<RelocationItem> kept_reloc;
            for (auto& mb : batch) {
                const auto fresh = assess(mb.item.simplex);
                if (!fresh || !poor(*fresh) || label_[mb.item.simplex] != 1) continue;
                std::vector<Point> others;
                for (const auto& k : kept_reloc) others.push_back(k.current.point);
                Plan q;
                try {
                    q = plan(*fresh, others, {});
                } catch (const InfeasibleError&) {
                    enqueue(mb.item.simplex);
                    continue;
                }
                if (!q.optimized || q.kind == EventKind::FallbackSliver) {
                    enqueue(mb.item.simplex);
                    continue;
                }
                RelocationItem ri;
                ri.base = q.problem;
                ri.current = q.cand;
                ri.base.sites.resize(ri.base.sites.size() - others.size());
                kept_reloc.push_back(std::move(ri));
                kept.push_back({mb.item, *fresh, q});
            }
            batch = std::move(kept);
            reloc = std::move(kept_reloc);
            run_relocation();
            break;
        }
        const double guard = cfg_.alpha * info->m.shortest_edge;
        if (!batch.empty() && p.problem.value(p.cand.point) < guard * (1.0 - 1e-12)) {
            enqueue(item->simplex);
            break;
        }
        RelocationItem ri;
        ri.base = p.problem;
        ri.current = p.cand;
        ri.base.sites.resize(ri.base.sites.size() - batch.size());
        batch.push_back({*item, *info, p});
        reloc.push_back(std::move(ri));
        run_relocation();
    }

    for (size_t i = 0; i < batch.size(); ++i) {
        Member& mb = batch[i];
        const Point pt = reloc[i].current.point;
        const double need = cfg_.alpha * mb.info.m.shortest_edge * (1.0 - 1e-9);
        bool ok = encroachments(pt).empty();
        if (ok) {
            for (const VertexId v : tri_.vertices_in_ball(pt, need))
                if (!tri_.is_scaffold(v)) ok = false;
        }
        if (!ok) {
            enqueue(mb.item.simplex);
            continue;
        }
        Plan p = mb.plan;
        p.cand = reloc[i].current;
        InsertionEvent ev = quality_event(mb.info, p, mb.item.key);
        ev.round = round;
        insert_point(pt, Provenance::FreeSteiner, std::move(ev));
    }
}

MeshSnapshot Refiner::snapshot() const {
    MeshSnapshot s;
    s.dim = tri_.dim();
    std::vector<int> index(tri_.vertex_slots(), -1);
    for (const VertexId v : tri_.live_vertices(false)) {
        index[v] = static_cast<int>(s.points.size());
        s.points.push_back(tri_.point(v));
        s.provenance.push_back(tri_.vertex(v).provenance);
        s.source_ids.push_back(v);
        s.fallback_vertex.push_back(static_cast<size_t>(v) < fallback_vertex_.size() ? fallback_vertex_[v] : 0);
    }
    for (VertexId v = 0; v < tri_.vertex_slots(); ++v) s.all_points.push_back(tri_.point(v));
    for (const SimplexId c : tri_.live_simplices()) {
        const auto& sv = tri_.simplex(c).v;
        s.all_simplices.push_back(sv);
        if (label_[c] != 1) continue;
        std::array<int, 4> cell{-1, -1, -1, -1};
        for (int i = 0; i <= s.dim; ++i) cell[i] = index[sv[i]];
        s.cells.push_back(cell);
    }
    for (const auto& [k, seg] : feat_->subsegments()) {
        s.boundary_edges.push_back({index[k[0]], index[k[1]]});
        s.boundary_edge_parent.push_back(seg);
        if (s.dim == 2) {
            s.boundary_faces.push_back({index[k[0]], index[k[1]], -1});
            s.boundary_parent.push_back(seg);
        }
    }
    for (const auto& [k, f] : feat_->subfacets()) {
        s.boundary_faces.push_back({index[k[0]], index[k[1]], index[k[2]]});
        s.boundary_parent.push_back(f);
    }
    return s;
}

RefineResult Refiner::run() {
    const auto t0 = std::chrono::steady_clock::now();
    enforce_conformity();
    while (true) {
        if (!pending_segments_.empty() || !pending_facets_.empty() || labels_dirty_) {
            enforce_conformity();
            continue;
        }
        if (queue_.empty()) break;
        if (cfg_.insertion == InsertionMode::Multi && cfg_.placement != PlacementMode::Circumcenter) {
            multi_round();
        } else {
            auto item = pop_fresh();
            if (!item) break;
            process_single(*item);
        }
    }
    stats_.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    RefineResult out;
    out.mesh = snapshot();
    out.log = log_;
    out.stats = stats_;
    out.plc = plc_;
    return out;
}

}  // namespace

RefineResult refine(const Plc& input, const RefinementConfig& cfg) {
    validate(cfg);
    Plc plc = input;
    normalize(plc);
    if (plc.dim != cfg.dim) throw std::invalid_argument("configuration dimension does not match the PLC");
    validate(plc);
    std::vector<PreprocessRecord> records;
    if (cfg.preprocess) {
        auto pre = preprocess_plc(plc, cfg);
        plc = std::move(pre.plc);
        records = std::move(pre.records);
    }
    Refiner r(plc, cfg, records);
    return r.run();
}

MeshSnapshot replay(const Plc& input, const EventLog& log) {
    Plc plc = input;
    normalize(plc);
    Triangulation tri = bootstrap(plc);
    for (const auto& e : log.events) {
        if (e.kind == EventKind::HeuristicCaseC) continue;
        if (e.kind == EventKind::Delete) {
            tri.remove(e.vertex);
            continue;
        }
        const Provenance prov = (e.kind == EventKind::BoundaryMidpoint || e.kind == EventKind::BoundaryFront)
                                    ? Provenance::BoundarySteiner
                                    : Provenance::FreeSteiner;
        const VertexId v = tri.insert(e.point, prov);
        if (v != e.vertex) throw std::runtime_error("replay diverged at event " + std::to_string(e.seq));
    }
    MeshSnapshot s;
    s.dim = tri.dim();
    for (VertexId v = 0; v < tri.vertex_slots(); ++v) s.all_points.push_back(tri.point(v));
    for (const SimplexId c : tri.live_simplices()) s.all_simplices.push_back(tri.simplex(c).v);
    return s;
}

bool same_triangulation(const MeshSnapshot& a, const MeshSnapshot& b) {
    if (a.dim != b.dim || a.all_points != b.all_points) return false;
    auto canon = [](const MeshSnapshot& m) {
        auto cells = m.all_simplices;
        for (auto& c : cells) std::sort(c.begin(), c.begin() + m.dim + 1);
        std::sort(cells.begin(), cells.end());
        return cells;
    };
    return canon(a) == canon(b);
}

}  // namespace globemesh
