#include "globemesh/plc.hpp"

#include <algorithm>
#include <map>
#include <numbers>
#include <set>

#include "globemesh/predicates.hpp"

namespace globemesh {

namespace {

std::string describe(const std::vector<ValidationIssue>& issues) {
    std::string s = "invalid PLC:";
    for (const auto& i : issues) {
        s += "\n  " + i.feature;
        if (i.line >= 0) s += " (line " + std::to_string(i.line) + ")";
        s += ": " + i.message;
    }
    return s;
}

int line_of(const std::vector<int>& lines, size_t i) { return i < lines.size() ? lines[i] : -1; }

double angle_between(Point u, Point v) {
    const double c = dot(u, v) / (norm(u) * norm(v));
    return std::acos(std::clamp(c, -1.0, 1.0));
}

bool polygon_convex(const Plc& plc, const std::vector<int>& poly, Point n) {
    const size_t k = poly.size();
    const double tol = 1e-12 * plc.scale() * plc.scale();
    for (size_t i = 0; i < k; ++i) {
        const Point a = plc.vertices[poly[i]], b = plc.vertices[poly[(i + 1) % k]], c = plc.vertices[poly[(i + 2) % k]];
        if (dot(cross(b - a, c - b), n) < -tol) return false;
    }
    return true;
}

// Merge B into A across their shared edge u-v; empty result when they are not mergeable.
std::vector<int> merge_polygons(std::vector<int> a, std::vector<int> b) {
    std::vector<int> shared;
    for (int x : a)
        if (std::find(b.begin(), b.end(), x) != b.end()) shared.push_back(x);
    if (shared.size() != 2) return {};
    const size_t na = a.size(), nb = b.size();
    size_t ia = na;
    for (size_t i = 0; i < na; ++i) {
        const int p = a[i], q = a[(i + 1) % na];
        if ((p == shared[0] && q == shared[1]) || (p == shared[1] && q == shared[0])) ia = i;
    }
    if (ia == na) return {};
    const int u = a[ia], v = a[(ia + 1) % na];
    // Rotate a to start at v and end at u.
    std::rotate(a.begin(), a.begin() + (ia + 1) % na, a.end());
    // b must traverse v->u in the opposite sense; orient it so that it contains u->v.
    auto pos = [&](int x) { return static_cast<size_t>(std::find(b.begin(), b.end(), x) - b.begin()); };
    if (b[(pos(u) + 1) % nb] != v) std::reverse(b.begin(), b.end());
    if (b[(pos(u) + 1) % nb] != v) return {};
    std::rotate(b.begin(), b.begin() + pos(u), b.end());  // b = [u, v, ...]
    std::vector<int> out = a;                             // [v, ..., u]
    for (size_t i = 2; i < nb; ++i) out.push_back(b[i]);
    return out;
}

}  // namespace

double Plc::scale() const {
    if (vertices.empty()) return 1.0;
    const double d = Box::around(vertices).diameter();
    return d > 0.0 ? d : 1.0;
}

ValidationError::ValidationError(std::vector<ValidationIssue> issues)
    : std::runtime_error(describe(issues)), issues_(std::move(issues)) {}

Point facet_normal(const Plc& plc, const Facet& f) {
    Point n{};
    const size_t k = f.polygon.size();
    for (size_t i = 0; i < k; ++i) {
        const Point a = plc.vertices[f.polygon[i]], b = plc.vertices[f.polygon[(i + 1) % k]];
        n.x += (a.y - b.y) * (a.z + b.z);
        n.y += (a.z - b.z) * (a.x + b.x);
        n.z += (a.x - b.x) * (a.y + b.y);
    }
    const double len = norm(n);
    return len > 0.0 ? n / len : n;
}

void normalize(Plc& plc) {
    if (plc.dim != 3) return;
    const double tol = 1e-10;
    bool merged = true;
    while (merged) {
        merged = false;
        for (size_t i = 0; i < plc.facets.size() && !merged; ++i) {
            for (size_t j = i + 1; j < plc.facets.size() && !merged; ++j) {
                const Point ni = facet_normal(plc, plc.facets[i]), nj = facet_normal(plc, plc.facets[j]);
                if (norm(cross(ni, nj)) > tol) continue;
                auto poly = merge_polygons(plc.facets[i].polygon, plc.facets[j].polygon);
                if (poly.empty()) continue;
                Facet f{poly, {}};
                const Point n = facet_normal(plc, f);
                if (norm(n) == 0.0 || !polygon_convex(plc, poly, n)) continue;
                plc.facets[i].polygon = poly;
                for (int v : plc.facets[j].interior) plc.facets[i].interior.push_back(v);
                plc.facets.erase(plc.facets.begin() + static_cast<long>(j));
                if (j < plc.facet_lines.size()) plc.facet_lines.erase(plc.facet_lines.begin() + static_cast<long>(j));
                merged = true;
            }
        }
    }
    std::set<std::array<int, 2>> seen;
    for (auto s : plc.segments) seen.insert({std::min(s[0], s[1]), std::max(s[0], s[1])});
    for (const Facet& f : plc.facets) {
        const size_t k = f.polygon.size();
        for (size_t t = 0; t < k; ++t) {
            const int a = f.polygon[t], b = f.polygon[(t + 1) % k];
            const std::array<int, 2> key{std::min(a, b), std::max(a, b)};
            if (seen.insert(key).second) plc.segments.push_back(key);
        }
    }
}

std::vector<ValidationIssue> check(const Plc& plc, double min_angle_deg) {
    std::vector<ValidationIssue> issues;
    auto add = [&](std::string feature, std::string msg, int line) { issues.push_back({std::move(feature), std::move(msg), line}); };

    if (plc.dim != 2 && plc.dim != 3) {
        add("plc", "dimension must be 2 or 3", -1);
        return issues;
    }
    const size_t nv = plc.vertices.size();
    if (nv < static_cast<size_t>(plc.dim + 1)) add("plc", "needs at least " + std::to_string(plc.dim + 1) + " vertices", -1);
    for (size_t i = 0; i < nv; ++i) {
        const Point p = plc.vertices[i];
        if (!is_finite(p)) add("vertex " + std::to_string(i), "non-finite coordinate", line_of(plc.vertex_lines, i));
        else if (plc.dim == 2 && p.z != 0.0) add("vertex " + std::to_string(i), "2D vertex with nonzero z", line_of(plc.vertex_lines, i));
    }
    if (!issues.empty()) return issues;
    const double scale = plc.scale();
    {
        std::vector<size_t> order(nv);
        for (size_t i = 0; i < nv; ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return plc.vertices[a] < plc.vertices[b]; });
        for (size_t i = 0; i < nv; ++i)
            for (size_t j = i + 1; j < nv; ++j) {
                const Point a = plc.vertices[order[i]], b = plc.vertices[order[j]];
                if (b.x - a.x > 1e-12 * scale) break;
                if (distance(a, b) <= 1e-12 * scale)
                    add("vertex " + std::to_string(std::max(order[i], order[j])),
                        "duplicates vertex " + std::to_string(std::min(order[i], order[j])),
                        line_of(plc.vertex_lines, std::max(order[i], order[j])));
            }
    }
    if (nv >= static_cast<size_t>(plc.dim + 1)) {
        // Affine dimension check.
        bool full = false;
        const Point o = plc.vertices[0];
        for (size_t i = 1; i < nv && !full; ++i)
            for (size_t j = i + 1; j < nv && !full; ++j) {
                if (plc.dim == 2) {
                    full = orient2d(o, plc.vertices[i], plc.vertices[j]) != Sign::Zero;
                } else {
                    for (size_t k = j + 1; k < nv && !full; ++k)
                        full = orient3d(o, plc.vertices[i], plc.vertices[j], plc.vertices[k]) != Sign::Zero;
                }
            }
        if (!full) add("plc", "vertices do not span the space", -1);
    }

    std::set<std::array<int, 2>> seen;
    bool refs_ok = true;
    for (size_t s = 0; s < plc.segments.size(); ++s) {
        const auto [a, b] = plc.segments[s];
        const std::string name = "segment " + std::to_string(s);
        const int line = line_of(plc.segment_lines, s);
        if (a < 0 || b < 0 || a >= static_cast<int>(nv) || b >= static_cast<int>(nv)) {
            add(name, "references a missing vertex", line);
            refs_ok = false;
            continue;
        }
        if (a == b) {
            add(name, "degenerate (both endpoints equal)", line);
            refs_ok = false;
            continue;
        }
        if (!seen.insert({std::min(a, b), std::max(a, b)}).second) add(name, "duplicate segment", line);
    }
    for (size_t f = 0; f < plc.facets.size(); ++f) {
        const auto& poly = plc.facets[f].polygon;
        const std::string name = "facet " + std::to_string(f);
        const int line = line_of(plc.facet_lines, f);
        if (plc.dim != 3) {
            add(name, "facets are only allowed in 3D", line);
            continue;
        }
        if (poly.size() < 3) {
            add(name, "needs at least 3 vertices", line);
            refs_ok = false;
            continue;
        }
        bool ok = true;
        for (int v : poly)
            if (v < 0 || v >= static_cast<int>(nv)) ok = false;
        if (!ok) {
            add(name, "references a missing vertex", line);
            refs_ok = false;
            continue;
        }
        if (std::set<int>(poly.begin(), poly.end()).size() != poly.size()) {
            add(name, "repeats a vertex", line);
            refs_ok = false;
            continue;
        }
        const Point n = facet_normal(plc, plc.facets[f]);
        if (norm(n) == 0.0) {
            add(name, "degenerate (zero area)", line);
            refs_ok = false;
            continue;
        }
        const Point p0 = plc.vertices[poly[0]];
        for (int v : poly)
            if (std::abs(dot(plc.vertices[v] - p0, n)) > 1e-8 * scale) {
                add(name, "nonplanar (vertex " + std::to_string(v) + " off the plane)", line);
                ok = false;
                break;
            }
        if (ok && !polygon_convex(plc, poly, n)) add(name, "facet polygon must be convex", line);
        for (int v : plc.facets[f].interior) {
            if (v < 0 || v >= static_cast<int>(nv)) {
                add(name, "interior point references a missing vertex", line);
                refs_ok = false;
            } else if (std::abs(dot(plc.vertices[v] - p0, n)) > 1e-8 * scale) {
                add(name, "interior vertex " + std::to_string(v) + " off the plane", line);
            }
        }
    }
    for (size_t h = 0; h < plc.holes.size(); ++h)
        if (!is_finite(plc.holes[h])) add("hole " + std::to_string(h), "non-finite coordinate", -1);
    if (!refs_ok) return issues;

    // Segment crossings and vertices on segment interiors (2D).
    if (plc.dim == 2) {
        for (size_t s = 0; s < plc.segments.size(); ++s) {
            const Point a = plc.vertices[plc.segments[s][0]], b = plc.vertices[plc.segments[s][1]];
            for (size_t v = 0; v < nv; ++v) {
                if (static_cast<int>(v) == plc.segments[s][0] || static_cast<int>(v) == plc.segments[s][1]) continue;
                const Point p = plc.vertices[v];
                if (orient2d(a, b, p) == Sign::Zero && dot(p - a, b - a) > 0 && dot(p - b, a - b) > 0)
                    add("segment " + std::to_string(s), "passes through vertex " + std::to_string(v), line_of(plc.segment_lines, s));
            }
            for (size_t t = s + 1; t < plc.segments.size(); ++t) {
                const auto e = plc.segments[s], g = plc.segments[t];
                if (e[0] == g[0] || e[0] == g[1] || e[1] == g[0] || e[1] == g[1]) continue;
                const Point c = plc.vertices[g[0]], d = plc.vertices[g[1]];
                const int o1 = to_int(orient2d(a, b, c)), o2 = to_int(orient2d(a, b, d));
                const int o3 = to_int(orient2d(c, d, a)), o4 = to_int(orient2d(c, d, b));
                if (o1 * o2 < 0 && o3 * o4 < 0)
                    add("segment " + std::to_string(s), "crosses segment " + std::to_string(t), line_of(plc.segment_lines, s));
            }
        }
    }

    // Small angles between features sharing a vertex.
    const double min_angle = min_angle_deg * std::numbers::pi / 180.0 - 1e-9;
    std::vector<std::vector<int>> around(nv);
    for (const auto& s : plc.segments) {
        around[s[0]].push_back(s[1]);
        around[s[1]].push_back(s[0]);
    }
    for (size_t v = 0; v < nv; ++v) {
        auto& nb = around[v];
        std::sort(nb.begin(), nb.end());
        nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
        for (size_t i = 0; i < nb.size(); ++i)
            for (size_t j = i + 1; j < nb.size(); ++j) {
                const double ang = angle_between(plc.vertices[nb[i]] - plc.vertices[v], plc.vertices[nb[j]] - plc.vertices[v]);
                if (ang < min_angle)
                    add("vertex " + std::to_string(v),
                        "segments to " + std::to_string(nb[i]) + " and " + std::to_string(nb[j]) + " meet at " +
                            std::to_string(ang * 180.0 / std::numbers::pi) + " degrees",
                        line_of(plc.vertex_lines, v));
            }
    }
    if (plc.dim == 3) {
        // Acute dihedral angles between facets sharing an edge.
        std::map<std::array<int, 2>, std::vector<size_t>> by_edge;
        for (size_t f = 0; f < plc.facets.size(); ++f) {
            const auto& poly = plc.facets[f].polygon;
            for (size_t t = 0; t < poly.size(); ++t) {
                const int a = poly[t], b = poly[(t + 1) % poly.size()];
                by_edge[{std::min(a, b), std::max(a, b)}].push_back(f);
            }
        }
        for (const auto& [edge, fs] : by_edge) {
            const Point a = plc.vertices[edge[0]], b = plc.vertices[edge[1]];
            const Point e = normalized(b - a);
            for (size_t i = 0; i < fs.size(); ++i)
                for (size_t j = i + 1; j < fs.size(); ++j) {
                    auto inward = [&](size_t f) {
                        Point c{};
                        for (int v : plc.facets[f].polygon) c += plc.vertices[v];
                        c = c / static_cast<double>(plc.facets[f].polygon.size());
                        const Point d = c - a;
                        return d - dot(d, e) * e;
                    };
                    const double ang = angle_between(inward(fs[i]), inward(fs[j]));
                    if (ang < std::numbers::pi / 2 - 1e-9)
                        add("facet " + std::to_string(fs[i]),
                            "meets facet " + std::to_string(fs[j]) + " at an acute dihedral angle of " +
                                std::to_string(ang * 180.0 / std::numbers::pi) + " degrees",
                            line_of(plc.facet_lines, fs[i]));
                }
        }
    }
    return issues;
}

void validate(const Plc& plc, double min_angle_deg) {
    auto issues = check(plc, min_angle_deg);
    if (!issues.empty()) throw ValidationError(std::move(issues));
}

}  // namespace globemesh
