#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "boundary.hpp"
#include "globemesh/refiner.hpp"
#include "globemesh/regions.hpp"

namespace globemesh {

namespace {

struct Hit {
    int vertex = -1;
    bool on_facet = false;
    int feature = -1;  // segment index or facet index
};

std::vector<int> identity(size_t n) {
    std::vector<int> ids(n);
    for (size_t i = 0; i < n; ++i) ids[i] = static_cast<int>(i);
    return ids;
}

bool facet_has(const Facet& f, int v) {
    return std::find(f.polygon.begin(), f.polygon.end(), v) != f.polygon.end() ||
           std::find(f.interior.begin(), f.interior.end(), v) != f.interior.end();
}

// Segments encroached by p (vertex index v of plc).
std::vector<int> segments_hit(const Plc& plc, int v, Point p) {
    std::vector<int> out;
    for (size_t s = 0; s < plc.segments.size(); ++s) {
        const auto [a, b] = plc.segments[s];
        if (a == v || b == v) continue;
        if (encroaches_segment(p, plc.vertices[a], plc.vertices[b])) out.push_back(static_cast<int>(s));
    }
    return out;
}

std::vector<std::array<int, 3>> facet_triangles(const Plc& plc, int f) {
    const detail::FacetMesh fm(f, plc, identity(plc.vertices.size()));
    return fm.subfacets();
}

std::vector<Hit> find_hits(const Plc& plc) {
    std::vector<Hit> out;
    for (size_t v = 0; v < plc.vertices.size(); ++v)
        for (int s : segments_hit(plc, static_cast<int>(v), plc.vertices[v])) out.push_back({static_cast<int>(v), false, s});
    if (plc.dim == 3) {
        for (size_t f = 0; f < plc.facets.size(); ++f) {
            const auto tris = facet_triangles(plc, static_cast<int>(f));
            for (size_t v = 0; v < plc.vertices.size(); ++v) {
                if (facet_has(plc.facets[f], static_cast<int>(v))) continue;
                const Point p = plc.vertices[v];
                for (const auto& t : tris)
                    if (encroaches_facet(p, plc.vertices[t[0]], plc.vertices[t[1]], plc.vertices[t[2]])) {
                        out.push_back({static_cast<int>(v), true, static_cast<int>(f)});
                        break;
                    }
            }
        }
    }
    return out;
}

// Local sizing estimate: nearest other vertex or nonincident segment.
double sizing(const Plc& plc, int v) {
    const Point p = plc.vertices[v];
    double d = std::numeric_limits<double>::infinity();
    for (size_t w = 0; w < plc.vertices.size(); ++w)
        if (static_cast<int>(w) != v) d = std::min(d, distance(p, plc.vertices[w]));
    for (const auto& s : plc.segments) {
        if (s[0] == v || s[1] == v) continue;
        d = std::min(d, distance(p, closest_on_segment(p, plc.vertices[s[0]], plc.vertices[s[1]])));
    }
    return d;
}

double clearance(const Plc& plc, Point q, int skip = -1) {
    double d = std::numeric_limits<double>::infinity();
    for (size_t w = 0; w < plc.vertices.size(); ++w)
        if (static_cast<int>(w) != skip) d = std::min(d, distance(q, plc.vertices[w]));
    return d;
}

// Inserts vertex m into every facet polygon having a-b as a boundary edge.
void insert_into_polygons(Plc& plc, int a, int b, int m) {
    for (auto& f : plc.facets) {
        auto& poly = f.polygon;
        const size_t k = poly.size();
        for (size_t i = 0; i < k; ++i) {
            const int p = poly[i], q = poly[(i + 1) % k];
            if ((p == a && q == b) || (p == b && q == a)) {
                poly.insert(poly.begin() + static_cast<long>(i) + 1, m);
                break;
            }
        }
    }
}

int split_segment(Plc& plc, int s, Point m) {
    const int id = static_cast<int>(plc.vertices.size());
    plc.vertices.push_back(m);
    const auto [a, b] = plc.segments[s];
    plc.segments[s] = {a, id};
    plc.segments.push_back({id, b});
    if (plc.dim == 3) insert_into_polygons(plc, a, b, id);
    return id;
}

// Best point of segment ab at distance t in [lo, hi] from a, where p encroaches neither
// piece; maximizes clearance to other vertices.
std::optional<Point> slide(const Plc& plc, Point p, Point a, Point b, double lo, double hi) {
    const double len = distance(a, b);
    hi = std::min(hi, len * (1.0 - 1e-6));
    if (!(hi >= lo)) return std::nullopt;
    const Point dir = (b - a) / len;
    std::optional<Point> best;
    double best_clear = -1.0;
    constexpr int kSamples = 64;
    for (int i = 0; i <= kSamples; ++i) {
        const Point q = a + (lo + (hi - lo) * i / kSamples) * dir;
        if (encroaches_segment(p, a, q) || encroaches_segment(p, q, b)) continue;
        const double c = clearance(plc, q);
        if (c > best_clear) best_clear = c, best = q;
    }
    return best;
}

bool duplicate(const Plc& plc, Point q) { return clearance(plc, q) <= 1e-9 * plc.scale(); }

bool resolve_segment(Plc& plc, const Hit& h, std::vector<PreprocessRecord>& records) {
    const Point p = plc.vertices[h.vertex];
    const auto [ia, ib] = plc.segments[h.feature];
    const Point A = plc.vertices[ia], B = plc.vertices[ib];
    const Point m = closest_on_segment(p, A, B);
    const double pm = distance(p, m);
    PreprocessRecord rec;
    rec.input_vertex = h.vertex;
    rec.feature = h.feature;
    rec.projection = m;
    rec.placed = m;
    const bool near_a = distance(A, m) <= distance(B, m);
    const int anchor = near_a ? ia : ib;
    const Point a = near_a ? A : B, b = near_a ? B : A;
    if (distance(a, m) < pm) {
        auto q = slide(plc, p, a, b, pm, 2.0 * pm);
        if (q) {
            rec.placed = *q;
            rec.anchor = anchor;
        } else {
            // No admissible point in the interval: best clearance anywhere on the segment.
            q = slide(plc, p, a, b, 1e-3 * distance(a, b), distance(a, b));
            rec.heuristic_case_c = true;
            if (q) rec.placed = *q;
        }
    }
    if (duplicate(plc, rec.placed)) return false;
    split_segment(plc, h.feature, rec.placed);
    records.push_back(rec);
    return true;
}

bool resolve_facet(Plc& plc, const Hit& h, std::vector<PreprocessRecord>& records) {
    Facet& f = plc.facets[h.feature];
    const Point p = plc.vertices[h.vertex];
    const Point n = facet_normal(plc, f);
    const Point o = plc.vertices[f.polygon[0]];
    const Point m = p - dot(p - o, n) * n;
    const double pm = distance(p, m);
    PreprocessRecord rec;
    rec.input_vertex = h.vertex;
    rec.feature = h.feature;
    rec.on_facet = true;
    rec.projection = m;
    rec.placed = m;

    const detail::FacetMesh fm(h.feature, plc, identity(plc.vertices.size()));
    // Boundary segment of the facet nearest to m.
    int near_seg = -1;
    double near_d = std::numeric_limits<double>::infinity();
    const size_t k = f.polygon.size();
    for (size_t i = 0; i < k; ++i) {
        const int a = f.polygon[i], b = f.polygon[(i + 1) % k];
        const double d = distance(m, closest_on_segment(m, plc.vertices[a], plc.vertices[b]));
        if (d < near_d) {
            near_d = d;
            for (size_t s = 0; s < plc.segments.size(); ++s)
                if ((plc.segments[s][0] == a && plc.segments[s][1] == b) || (plc.segments[s][0] == b && plc.segments[s][1] == a))
                    near_seg = static_cast<int>(s);
        }
    }

    if (!fm.inside_polygon(m, -1e-9) || near_d <= 1e-9 * plc.scale()) {
        // Projection falls on or beyond the facet boundary: place a point on that segment instead.
        rec.heuristic_case_c = true;
        if (near_seg < 0) return false;
        const auto [ia, ib] = plc.segments[near_seg];
        const Point a = plc.vertices[ia], b = plc.vertices[ib];
        const double len = distance(a, b);
        const Point dir = (b - a) / len;
        Point best = closest_on_segment(m, a, b);
        double best_clear = -1.0;
        for (int i = 1; i < 64; ++i) {
            const Point q = a + (len * i / 64.0) * dir;
            if (encroaches_segment(p, a, q) || encroaches_segment(p, q, b)) continue;
            if (const double c = clearance(plc, q); c > best_clear) best_clear = c, best = q;
        }
        rec.feature = near_seg;
        rec.on_facet = false;
        rec.placed = best;
        if (duplicate(plc, best)) return false;
        split_segment(plc, near_seg, best);
        records.push_back(rec);
        return true;
    }

    int anchor = -1;
    double ad = std::numeric_limits<double>::infinity();
    auto consider = [&](int v) {
        if (const double d = distance(plc.vertices[v], m); d < ad) ad = d, anchor = v;
    };
    for (int v : f.polygon) consider(v);
    for (int v : f.interior) consider(v);
    if (ad < pm && ad > 0.0) {
        const Point a = plc.vertices[anchor];
        const Point dir = (m - a) / ad;
        double best_clear = -1.0;
        for (int i = 0; i < 32; ++i) {
            const Point q = a + pm * (1.0 + i / 32.0) * dir;
            if (!fm.inside_polygon(q, 0.0)) continue;
            // p must not encroach any triangle of the facet with q inserted.
            Plc trial = plc;
            trial.vertices.push_back(q);
            trial.facets[h.feature].interior.push_back(static_cast<int>(trial.vertices.size()) - 1);
            bool ok = true;
            for (const auto& t : facet_triangles(trial, h.feature))
                if (encroaches_facet(p, trial.vertices[t[0]], trial.vertices[t[1]], trial.vertices[t[2]])) ok = false;
            if (!ok) continue;
            if (const double c = clearance(plc, q); c > best_clear) {
                best_clear = c;
                rec.placed = q;
                rec.anchor = anchor;
            }
        }
    }
    if (duplicate(plc, rec.placed)) return false;
    plc.vertices.push_back(rec.placed);
    f.interior.push_back(static_cast<int>(plc.vertices.size()) - 1);
    records.push_back(rec);
    return true;
}

}  // namespace

PreprocessResult preprocess_plc(const Plc& input, const RefinementConfig&) {
    PreprocessResult out;
    out.plc = input;
    normalize(out.plc);
    Plc& plc = out.plc;
    const size_t cap = 64 * (plc.vertices.size() + 4);
    std::set<std::tuple<int, bool, int>> stuck;
    for (size_t iter = 0; iter < cap; ++iter) {
        auto hits = find_hits(plc);
        std::erase_if(hits, [&](const Hit& h) { return stuck.count({h.vertex, h.on_facet, h.feature}) != 0; });
        if (hits.empty()) break;
        // Smallest local size first; segments before facets.
        std::vector<double> size(plc.vertices.size(), -1.0);
        auto key = [&](const Hit& h) {
            if (size[h.vertex] < 0) size[h.vertex] = sizing(plc, h.vertex);
            return std::make_tuple(size[h.vertex], h.on_facet, h.vertex, h.feature);
        };
        const Hit h = *std::min_element(hits.begin(), hits.end(), [&](const Hit& a, const Hit& b) { return key(a) < key(b); });
        const bool moved = h.on_facet ? resolve_facet(plc, h, out.records) : resolve_segment(plc, h, out.records);
        if (!moved) stuck.insert({h.vertex, h.on_facet, h.feature});
    }
    return out;
}

std::vector<std::pair<int, std::string>> encroaching_input_vertices(const Plc& input) {
    Plc plc = input;
    normalize(plc);
    std::vector<std::pair<int, std::string>> out;
    for (const Hit& h : find_hits(plc))
        out.emplace_back(h.vertex, (h.on_facet ? "facet " : "segment ") + std::to_string(h.feature));
    return out;
}

}  // namespace globemesh
