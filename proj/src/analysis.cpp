#include "globemesh/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <boost/geometry.hpp>
#include <boost/geometry/index/rtree.hpp>

#include "globemesh/predicates.hpp"

namespace globemesh {

namespace bg = boost::geometry;
namespace bgi = boost::geometry::index;

namespace {

using BPoint = bg::model::point<double, 3, bg::cs::cartesian>;
using BBox = bg::model::box<BPoint>;
using Entry = std::pair<BPoint, int>;
using RTree = bgi::rtree<Entry, bgi::rstar<16>>;

BPoint bp(Point p) { return BPoint(p.x, p.y, p.z); }

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

// ---------------------------------------------------------------------------

LfsField::LfsField(const Plc& plc) : plc_(plc) {
    for (size_t v = 0; v < plc.vertices.size(); ++v) features_.push_back({0, {static_cast<int>(v)}, {}, {}});
    for (const auto& s : plc.segments) {
        std::vector<int> vs{s[0], s[1]};
        std::sort(vs.begin(), vs.end());
        features_.push_back({1, vs, {}, {}});
    }
    if (plc.dim == 3) {
        for (const auto& f : plc.facets) {
            Feature ft{2, f.polygon, {}, facet_normal(plc, f)};
            ft.verts.insert(ft.verts.end(), f.interior.begin(), f.interior.end());
            std::sort(ft.verts.begin(), ft.verts.end());
            for (int v : f.polygon) ft.polygon.push_back(plc.vertices[v]);
            features_.push_back(std::move(ft));
        }
    }
    bool any = false;
    for (size_t i = 0; i < features_.size() && !any; ++i)
        for (size_t j = i + 1; j < features_.size() && !any; ++j) any = !incident(features_[i], features_[j]);
    if (!any) throw std::invalid_argument("local feature size needs two nonincident features");
}

bool LfsField::incident(const Feature& a, const Feature& b) const {
    size_t i = 0, j = 0;
    while (i < a.verts.size() && j < b.verts.size()) {
        if (a.verts[i] == b.verts[j]) return true;
        if (a.verts[i] < b.verts[j]) ++i;
        else ++j;
    }
    return false;
}

double LfsField::dist(const Feature& f, Point x) const {
    if (f.kind == 0) return distance(x, plc_.vertices[f.verts[0]]);
    if (f.kind == 1) {
        const Point a = plc_.vertices[f.verts[0]], b = plc_.vertices[f.verts[1]];
        return distance(x, closest_on_segment(x, a, b));
    }
    const size_t k = f.polygon.size();
    const double h = dot(x - f.polygon[0], f.normal);
    const Point q = x - h * f.normal;
    bool inside = true;
    for (size_t i = 0; i < k && inside; ++i) {
        const Point a = f.polygon[i], b = f.polygon[(i + 1) % k];
        if (dot(cross(b - a, q - a), f.normal) < 0.0) inside = false;
    }
    if (inside) return std::abs(h);
    double d = kInf;
    for (size_t i = 0; i < k; ++i) d = std::min(d, distance(x, closest_on_segment(x, f.polygon[i], f.polygon[(i + 1) % k])));
    return d;
}

double LfsField::operator()(Point x) const {
    std::vector<std::pair<double, int>> order;
    order.reserve(features_.size());
    for (size_t i = 0; i < features_.size(); ++i) order.emplace_back(dist(features_[i], x), static_cast<int>(i));
    std::sort(order.begin(), order.end());
    for (size_t j = 1; j < order.size(); ++j)
        for (size_t i = 0; i < j; ++i)
            if (!incident(features_[order[i].second], features_[order[j].second])) return order[j].first;
    return kInf;
}

double local_feature_size(const Plc& plc, Point x) { return LfsField(plc)(x); }

bool lipschitz_check(const Plc& plc, int pairs, uint64_t seed, const std::function<double(Point)>& f) {
    std::function<double(Point)> g = f;
    std::optional<LfsField> field;
    if (!g) {
        field.emplace(plc);
        g = [&](Point p) { return (*field)(p); };
    }
    Box box = Box::around(plc.vertices);
    const double pad = 0.1 * box.diameter();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto sample = [&] {
        Point p;
        for (int i = 0; i < plc.dim; ++i) p[i] = box.lo[i] - pad + (box.hi[i] - box.lo[i] + 2 * pad) * u(rng);
        return p;
    };
    for (int i = 0; i < pairs; ++i) {
        const Point x = sample();
        const Point y = i % 10 == 0 ? x : sample();
        if (std::abs(g(x) - g(y)) > distance(x, y) + 1e-9) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------

std::vector<DelaunayViolation> verify_delaunay(int dim, const std::vector<Point>& points,
                                               const std::vector<std::array<int, 4>>& simplices) {
    std::vector<char> live(points.size(), 0);
    for (const auto& s : simplices)
        for (int i = 0; i <= dim; ++i) live[s[i]] = 1;
    std::vector<Entry> entries;
    for (size_t v = 0; v < points.size(); ++v)
        if (live[v]) entries.emplace_back(bp(points[v]), static_cast<int>(v));
    const RTree tree(entries.begin(), entries.end());

    std::vector<DelaunayViolation> out;
    std::vector<Point> pts(dim + 1);
    std::vector<Entry> hits;
    for (size_t s = 0; s < simplices.size(); ++s) {
        const auto& S = simplices[s];
        for (int i = 0; i <= dim; ++i) pts[i] = points[S[i]];
        hits.clear();
        try {
            const Sphere c = circumsphere(pts);
            const double r = c.radius * (1.0 + 1e-7) + 1e-300;
            const BBox q(bp(c.center - Point{r, r, dim == 3 ? r : 0.0}), bp(c.center + Point{r, r, dim == 3 ? r : 0.0}));
            tree.query(bgi::intersects(q), std::back_inserter(hits));
        } catch (const GeometryError&) {
            hits = entries;
        }
        std::sort(hits.begin(), hits.end(), [](const Entry& a, const Entry& b) { return a.second < b.second; });
        for (const auto& [p, v] : hits) {
            if (std::find(S.begin(), S.begin() + dim + 1, v) != S.begin() + dim + 1) continue;
            if (in_circumsphere(pts, points[v]) == Sign::Positive) out.push_back({static_cast<int>(s), v});
        }
    }
    return out;
}

std::vector<DelaunayViolation> verify_delaunay(const MeshSnapshot& mesh) {
    return verify_delaunay(mesh.dim, mesh.all_points, mesh.all_simplices);
}

std::vector<std::string> conformity_violations(const MeshSnapshot& mesh, const Plc& plc) {
    std::vector<std::string> out;
    const int d = mesh.dim;
    std::vector<char> live(mesh.all_points.size(), 0);
    std::set<std::array<int, 2>> edges;
    std::set<std::array<int, 3>> faces;
    for (const auto& s : mesh.all_simplices) {
        for (int i = 0; i <= d; ++i) live[s[i]] = 1;
        for (int i = 0; i <= d; ++i)
            for (int j = i + 1; j <= d; ++j) edges.insert({std::min(s[i], s[j]), std::max(s[i], s[j])});
        if (d == 3)
            for (int o = 0; o < 4; ++o) {
                std::array<int, 3> f{};
                int n = 0;
                for (int i = 0; i < 4; ++i)
                    if (i != o) f[n++] = s[i];
                std::sort(f.begin(), f.end());
                faces.insert(f);
            }
    }
    std::map<Point, int> by_point;
    for (size_t v = 0; v < mesh.all_points.size(); ++v)
        if (live[v]) by_point.emplace(mesh.all_points[v], static_cast<int>(v));
    const double scale = plc.scale();
    auto vertex_id = [&](int i) {
        auto it = by_point.find(plc.vertices[i]);
        return it == by_point.end() ? -1 : it->second;
    };

    for (size_t s = 0; s < plc.segments.size(); ++s) {
        const Point a = plc.vertices[plc.segments[s][0]], b = plc.vertices[plc.segments[s][1]];
        const int ia = vertex_id(plc.segments[s][0]), ib = vertex_id(plc.segments[s][1]);
        if (ia < 0 || ib < 0) {
            out.push_back("segment " + std::to_string(s) + ": endpoint missing from the mesh");
            continue;
        }
        const double len = distance(a, b);
        std::vector<std::pair<double, int>> on;
        for (size_t v = 0; v < mesh.all_points.size(); ++v) {
            if (!live[v] || static_cast<int>(v) == ia || static_cast<int>(v) == ib) continue;
            const Point p = mesh.all_points[v];
            const double t = dot(p - a, b - a) / (len * len);
            if (t <= 0.0 || t >= 1.0) continue;
            if (distance(p, a + t * (b - a)) <= 1e-9 * scale) on.emplace_back(t, static_cast<int>(v));
        }
        std::sort(on.begin(), on.end());
        std::vector<int> chain{ia};
        for (const auto& [t, v] : on) chain.push_back(v);
        chain.push_back(ib);
        for (size_t i = 0; i + 1 < chain.size(); ++i)
            if (!edges.count({std::min(chain[i], chain[i + 1]), std::max(chain[i], chain[i + 1])})) {
                out.push_back("segment " + std::to_string(s) + ": piece " + std::to_string(i) + " is not a mesh edge");
                break;
            }
    }
    if (d == 3) {
        for (size_t f = 0; f < plc.facets.size(); ++f) {
            const Facet& F = plc.facets[f];
            const Point n = facet_normal(plc, F);
            const Point o = plc.vertices[F.polygon[0]];
            const size_t k = F.polygon.size();
            double area = 0.0;
            for (size_t i = 1; i + 1 < k; ++i)
                area += triangle_area(o, plc.vertices[F.polygon[i]], plc.vertices[F.polygon[i + 1]]);
            std::unordered_set<int> on;
            for (size_t v = 0; v < mesh.all_points.size(); ++v) {
                if (!live[v]) continue;
                const Point p = mesh.all_points[v];
                if (std::abs(dot(p - o, n)) > 1e-9 * scale) continue;
                bool inside = true;
                for (size_t i = 0; i < k && inside; ++i) {
                    const Point a = plc.vertices[F.polygon[i]], b = plc.vertices[F.polygon[(i + 1) % k]];
                    if (dot(cross(b - a, p - a), n) < -1e-9 * scale * distance(a, b)) inside = false;
                }
                if (inside) on.insert(static_cast<int>(v));
            }
            double covered = 0.0;
            for (const auto& t : faces)
                if (on.count(t[0]) && on.count(t[1]) && on.count(t[2]))
                    covered += triangle_area(mesh.all_points[t[0]], mesh.all_points[t[1]], mesh.all_points[t[2]]);
            if (std::abs(covered - area) > 1e-8 * area)
                out.push_back("facet " + std::to_string(f) + ": mesh faces cover " + std::to_string(covered) + " of area " +
                              std::to_string(area));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

QualitySummary quality_summary(const MeshSnapshot& mesh, const RefinementConfig& cfg) {
    QualitySummary q;
    q.elements = static_cast<long>(mesh.cells.size());
    q.vertices = static_cast<long>(mesh.points.size());
    q.rho_histogram.assign(16, 0);
    q.min_sigma = mesh.dim == 3 ? kInf : 0.0;
    std::vector<Point> pts(mesh.dim + 1);
    for (const auto& c : mesh.cells) {
        for (int i = 0; i <= mesh.dim; ++i) pts[i] = mesh.points[c[i]];
        const QualityMeasures m = measure_or_degenerate(pts);
        q.max_rho = std::max(q.max_rho, m.rho);
        const int bin = std::clamp(static_cast<int>(std::floor((m.rho - 0.5) / 0.1)), 0, 15);
        ++q.rho_histogram[bin];
        if (mesh.dim == 2) q.min_angle_deg = std::min(q.min_angle_deg, m.min_angle * 180.0 / std::numbers::pi);
        else {
            q.min_dihedral_deg = std::min(q.min_dihedral_deg, m.min_dihedral * 180.0 / std::numbers::pi);
            q.min_sigma = std::min(q.min_sigma, m.sigma);
        }
        const Classification cls = classify(m, cfg);
        if (m.rho > cfg.rho_star) ++q.above_rho_star;
        if (cls == Classification::Sliver) {
            ++q.slivers;
            for (int i = 0; i <= mesh.dim; ++i)
                if (static_cast<size_t>(c[i]) < mesh.fallback_vertex.size() && mesh.fallback_vertex[c[i]]) {
                    ++q.slivers_from_fallback;
                    break;
                }
        }
    }
    if (mesh.dim == 3 && mesh.cells.empty()) q.min_sigma = 0.0;
    return q;
}

// ---------------------------------------------------------------------------

namespace {

bool quality_event(EventKind k) { return k == EventKind::Steiner || k == EventKind::Spindle; }

double first_l_min(const EventLog& log) {
    for (const auto& e : log.events)
        if (quality_event(e.kind) || e.kind == EventKind::FallbackSliver) return e.l_min;
    return 0.0;
}

int stage_of(double key, double l0, double alpha) {
    if (!(key > 0.0) || !(l0 > 0.0)) return std::numeric_limits<int>::min();
    return static_cast<int>(std::floor(std::log(key / l0) / std::log(alpha) + 1e-9));
}

}  // namespace

SizeAudit size_optimality_audit(const MeshSnapshot& mesh, const Plc& plc, const RefinementConfig& cfg,
                                const EventLog& log) {
    SizeAudit a;
    a.bound = 1.0 / (cfg.alpha - 1.0);
    a.limit = 1.5 * a.bound;
    const LfsField lfs(plc);
    std::vector<double> r(mesh.points.size(), kInf);
    for (const auto& c : mesh.cells)
        for (int i = 0; i <= mesh.dim; ++i)
            for (int j = i + 1; j <= mesh.dim; ++j) {
                const double l = distance(mesh.points[c[i]], mesh.points[c[j]]);
                r[c[i]] = std::min(r[c[i]], l);
                r[c[j]] = std::min(r[c[j]], l);
            }
    for (size_t v = 0; v < mesh.points.size(); ++v) {
        if (mesh.provenance[v] == Provenance::Input || !std::isfinite(r[v])) continue;
        ++a.steiner_vertices;
        const double ratio = lfs(mesh.points[v]) / r[v];
        if (ratio > a.max_ratio) {
            a.max_ratio = ratio;
            a.worst_vertex = static_cast<int>(v);
        }
    }
    // Per-stage upper bound on the local feature size at each quality insertion.
    const double l0 = first_l_min(log);
    const double beta = cfg.beta();
    for (const auto& e : log.events) {
        if (!quality_event(e.kind)) continue;
        const int n = std::max(0, stage_of(e.l_eff > 0 ? e.l_eff : e.l_min, l0, cfg.alpha));
        const double bound = (std::pow(beta, n + 1) - 1.0) / (beta - 1.0) * e.l_min;
        ++a.stage_checks;
        if (lfs(e.point) > bound) ++a.stage_flags;
    }
    a.pass = a.max_ratio <= a.limit;
    return a;
}

FrontAudit front_audit(const EventLog& log, const RefinementConfig& cfg, const Plc* plc) {
    FrontAudit a;
    a.l0 = first_l_min(log);
    const double alpha = cfg.alpha, beta = cfg.beta();
    constexpr int kBefore = std::numeric_limits<int>::min();
    std::map<int, RTree> trees;
    std::unordered_map<int, std::pair<int, Point>> where;  // vertex -> (stage, point)
    std::map<int, StageRow> rows;
    auto note = [&](const std::string& s) {
        if (a.details.size() < 20) a.details.push_back(s);
    };
    if (plc)
        for (const Point& p : plc->vertices) trees[kBefore].insert({bp(p), -1});

    for (const auto& e : log.events) {
        if (e.kind == EventKind::HeuristicCaseC) continue;
        if (e.kind == EventKind::Delete) {
            if (auto it = where.find(e.vertex); it != where.end()) {
                trees[it->second.first].remove(Entry{bp(it->second.second), e.vertex});
                where.erase(it);
            }
            continue;
        }
        const double key = e.l_eff > 0 ? e.l_eff : e.l_min;
        const int stage = key > 0 ? stage_of(key, a.l0, alpha) : kBefore;
        if (quality_event(e.kind)) {
            ++a.events_checked;
            const std::string tag = "event " + std::to_string(e.seq) + " (" + to_string(e.kind) + ")";
            // With the input vertices known, the distance is measured here rather than trusted.
            double md = e.min_dist;
            if (plc) {
                md = kInf;
                for (auto& [s, tree] : trees)
                    for (auto it = tree.qbegin(bgi::nearest(bp(e.point), 1)); it != tree.qend(); ++it)
                        md = std::min(md, bg::distance(it->first, bp(e.point)));
            }
            if (md < alpha * e.l_min * (1.0 - 1e-9)) {
                ++a.min_distance_violations;
                note(tag + ": min distance " + std::to_string(md) + " < alpha l_min " + std::to_string(alpha * e.l_min));
            }
            if (e.kind == EventKind::Steiner &&
                (e.edge_dist < alpha * e.l_min * (1.0 - 1e-9) || e.edge_dist > beta * e.l_min * (1.0 + 1e-9))) {
                ++a.band_violations;
                note(tag + ": edge distance " + std::to_string(e.edge_dist) + " outside the front band");
            }
            StageRow& row = rows[stage];
            if (row.events == 0) {
                row.stage = stage;
                row.min_key = row.max_key = key;
                row.min_clearance = kInf;
                row.required = std::pow(alpha, stage - 1) * a.l0;
            }
            ++row.events;
            row.min_key = std::min(row.min_key, key);
            row.max_key = std::max(row.max_key, key);
            double clear = kInf;
            for (auto& [s, tree] : trees) {
                if (s >= stage) break;
                for (auto it = tree.qbegin(bgi::nearest(bp(e.point), 1)); it != tree.qend(); ++it)
                    clear = std::min(clear, bg::distance(it->first, bp(e.point)));
            }
            row.min_clearance = std::min(row.min_clearance, clear);
            if (clear < row.required * (1.0 - 1e-9)) {
                ++a.stage_violations;
                note(tag + ": within " + std::to_string(clear) + " of an earlier-stage vertex (stage " + std::to_string(stage) + ")");
            }
        }
        trees[stage].insert({bp(e.point), e.vertex});
        where[e.vertex] = {stage, e.point};
    }
    for (const auto& rr : log.rounds)
        for (size_t i = 1; i < rr.history.size(); ++i)
            if (rr.history[i] < rr.history[i - 1] - 1e-12 * std::abs(rr.history[i - 1])) {
                ++a.round_violations;
                note("round " + std::to_string(rr.round) + ": relocation min distance decreased at pass " + std::to_string(i));
                break;
            }
    for (auto& [s, row] : rows) a.stages.push_back(row);
    return a;
}

ChargeReport charge_report(const EventLog& log) {
    ChargeReport c;
    std::map<std::array<int, 2>, long> per;
    for (const auto& e : log.events) {
        if (!quality_event(e.kind) && e.kind != EventKind::FallbackSliver) continue;
        if (e.edge[0] == kNone) continue;
        ++c.charged_events;
        ++per[{std::min(e.edge[0], e.edge[1]), std::max(e.edge[0], e.edge[1])}];
    }
    c.edges = static_cast<long>(per.size());
    for (const auto& [edge, n] : per) {
        c.max_per_edge = std::max(c.max_per_edge, n);
        ++c.histogram[n];
    }
    return c;
}

RefineResult baseline_circumcenter_refine(const Plc& plc, RefinementConfig cfg) {
    cfg.placement = PlacementMode::Circumcenter;
    cfg.insertion = InsertionMode::Single;
    return refine(plc, cfg);
}

AuditReport audit(const RefineResult& result, const AuditOptions& opt) {
    AuditReport r;
    const auto& cfg = result.log.config;
    r.config = cfg;
    r.delaunay_violations = static_cast<long>(verify_delaunay(result.mesh).size());
    const auto conf = conformity_violations(result.mesh, result.plc);
    r.conformity_violations = static_cast<long>(conf.size());
    r.quality = quality_summary(result.mesh, cfg);
    r.front = front_audit(result.log, cfg, &result.plc);
    r.charges = charge_report(result.log);
    r.fallback_events = result.log.count(EventKind::FallbackSliver);
    r.insertions = result.log.insertions();
    if (opt.size_audit) r.size = size_optimality_audit(result.mesh, result.plc, cfg, result.log);
    if (opt.baseline) {
        const auto base = baseline_circumcenter_refine(result.plc, cfg);
        if (!base.mesh.points.empty())
            r.baseline_ratio = static_cast<double>(result.mesh.points.size()) / static_cast<double>(base.mesh.points.size());
    }

    if (r.delaunay_violations) r.failures.push_back(std::to_string(r.delaunay_violations) + " Delaunay violations");
    for (const auto& c : conf) r.failures.push_back("conformity: " + c);
    if (r.quality.above_rho_star) r.failures.push_back(std::to_string(r.quality.above_rho_star) + " elements above rho*");
    if (const long bad = r.quality.slivers - r.quality.slivers_from_fallback; bad > 0)
        r.failures.push_back(std::to_string(bad) + " slivers not traced to fallback insertions");
    if (!r.front.pass()) r.failures.push_back("front audit: " + (r.front.details.empty() ? std::string("violations") : r.front.details[0]));
    if (opt.size_audit && cfg.preprocess && cfg.dim == 2 && !r.size.pass)
        r.failures.push_back("size audit: max lfs/r_v " + std::to_string(r.size.max_ratio) + " above " + std::to_string(r.size.limit));
    return r;
}

}  // namespace globemesh
