#include "globemesh/triangulation.hpp"

#include <algorithm>
#include <climits>
#include <map>
#include <unordered_set>

#include "globemesh/plc.hpp"

namespace globemesh {

namespace {

using FaceKey = std::array<int, 3>;

FaceKey face_key(const Simplex& s, int dim, int opposite) {
    FaceKey key{INT_MAX, INT_MAX, INT_MAX};
    int n = 0;
    for (int i = 0; i <= dim; ++i)
        if (i != opposite) key[n++] = s.v[i];
    std::sort(key.begin(), key.begin() + n);
    return key;
}

}  // namespace

const char* to_string(Provenance p) {
    switch (p) {
        case Provenance::Input: return "input";
        case Provenance::FreeSteiner: return "free_steiner";
        case Provenance::BoundarySteiner: return "boundary_steiner";
        case Provenance::Scaffold: return "scaffold";
    }
    return "?";
}

Triangulation::Triangulation(int dim, const Box& domain, double scaffold_factor) : dim_(dim), domain_(domain) {
    if (dim != 2 && dim != 3) throw TriangulationError("dimension must be 2 or 3");
    domain_diameter_ = domain.diameter();
    double half = 0.0;
    for (int i = 0; i < dim; ++i) half = std::max(half, 0.5 * (domain.hi[i] - domain.lo[i]));
    if (!(half > 0.0)) half = 1.0;
    if (!(domain_diameter_ > 0.0)) domain_diameter_ = 2.0 * half;
    const Point c = domain.center();
    const double h = scaffold_factor * half + half;
    scaffold_box_ = Box{c, c};
    for (int i = 0; i < dim; ++i) {
        scaffold_box_.lo[i] = c[i] - h;
        scaffold_box_.hi[i] = c[i] + h;
    }
    init_scaffold();
}

void Triangulation::init_scaffold() {
    // One large simplex around the box |x - c| <= h; its corners touch the box only at a vertex.
    if (vertices_.empty()) {
        const Point c = scaffold_box_.center();
        const double h = 0.5 * (scaffold_box_.hi.x - scaffold_box_.lo.x);
        const double far = dim_ == 2 ? 3.0 : 5.0;
        for (int i = 0; i <= dim_; ++i) {
            Point p = c + Point{-h, -h, dim_ == 3 ? -h : 0.0};
            if (i > 0) p[i - 1] = c[i - 1] + far * h;
            vertices_.push_back({p, Provenance::Scaffold});
        }
    }
    std::array<VertexId, 4> v{0, 1, 2, dim_ == 3 ? 3 : kNone};
    std::vector<Point> pts;
    for (int i = 0; i <= dim_; ++i) pts.push_back(vertices_[v[i]].point);
    if (orient(pts) == Sign::Negative) std::swap(v[0], v[1]);
    last_ = add_simplex(v);
}

SimplexId Triangulation::add_simplex(const std::array<VertexId, 4>& v) {
    Simplex s;
    s.v = v;
    simplices_.push_back(s);
    const SimplexId id = static_cast<SimplexId>(simplices_.size()) - 1;
    for (int i = 0; i <= dim_; ++i) vertices_[v[i]].incident = id;
    ++live_count_;
    return id;
}

void Triangulation::kill_simplex(SimplexId s) {
    simplices_[s].alive = false;
    --live_count_;
}

Sign Triangulation::orient_with(const Simplex& s, int k, Point p) const {
    std::array<Point, 4> pts;
    for (int i = 0; i <= dim_; ++i) pts[i] = i == k ? p : vertices_[s.v[i]].point;
    return orient(std::span<const Point>(pts.data(), dim_ + 1));
}

std::vector<Point> Triangulation::simplex_points(SimplexId s) const {
    std::vector<Point> pts;
    for (int i = 0; i <= dim_; ++i) pts.push_back(vertices_[simplices_[s].v[i]].point);
    return pts;
}

bool Triangulation::touches_scaffold(SimplexId s) const {
    for (int i = 0; i <= dim_; ++i)
        if (is_scaffold(simplices_[s].v[i])) return true;
    return false;
}

std::vector<SimplexId> Triangulation::live_simplices() const {
    std::vector<SimplexId> out;
    out.reserve(live_count_);
    for (SimplexId s = 0; s < simplex_slots(); ++s)
        if (simplices_[s].alive) out.push_back(s);
    return out;
}

std::vector<VertexId> Triangulation::live_vertices(bool include_scaffold) const {
    std::vector<VertexId> out;
    for (VertexId v = include_scaffold ? 0 : scaffold_count(); v < vertex_slots(); ++v)
        if (vertices_[v].alive) out.push_back(v);
    return out;
}

std::optional<SimplexId> Triangulation::walk(Point p, SimplexId start) const {
    SimplexId s = start;
    if (s == kNone || s >= simplex_slots() || !simplices_[s].alive) {
        s = kNone;
        for (SimplexId t = simplex_slots() - 1; t >= 0; --t)
            if (simplices_[t].alive) { s = t; break; }
    }
    const long cap = 4L * live_count_ + 64;
    for (long iter = 0; iter < cap; ++iter) {
        const Simplex& S = simplices_[s];
        bool moved = false;
        for (int k = 0; k <= dim_; ++k) {
            if (orient_with(S, k, p) == Sign::Negative) {
                if (S.nbr[k] == kNone) return std::nullopt;
                s = S.nbr[k];
                moved = true;
                break;
            }
        }
        if (!moved) {
            last_ = s;
            return s;
        }
    }
    // The visibility walk terminates on Delaunay triangulations; scan as a last resort.
    for (SimplexId t = 0; t < simplex_slots(); ++t) {
        if (!simplices_[t].alive) continue;
        bool inside = true;
        for (int k = 0; k <= dim_ && inside; ++k) inside = orient_with(simplices_[t], k, p) != Sign::Negative;
        if (inside) return t;
    }
    return std::nullopt;
}

std::optional<SimplexId> Triangulation::locate(Point p) const {
    if (!is_finite(p)) return std::nullopt;
    const auto found = walk(p, last_);
    if (!found) return std::nullopt;
    // Collect every simplex containing p across facets that p lies on; lowest id wins.
    std::vector<SimplexId> todo{*found};
    std::unordered_set<SimplexId> seen{*found};
    SimplexId best = *found;
    while (!todo.empty()) {
        const SimplexId s = todo.back();
        todo.pop_back();
        best = std::min(best, s);
        const Simplex& S = simplices_[s];
        for (int k = 0; k <= dim_; ++k) {
            if (orient_with(S, k, p) != Sign::Zero) continue;
            const SimplexId n = S.nbr[k];
            if (n == kNone || seen.count(n)) continue;
            seen.insert(n);
            bool inside = true;
            for (int j = 0; j <= dim_ && inside; ++j) inside = orient_with(simplices_[n], j, p) != Sign::Negative;
            if (inside) todo.push_back(n);
        }
    }
    return best;
}

bool Triangulation::coincident(Point p, SimplexId s) const {
    const double tol = 1e-12 * domain_diameter_;
    for (int i = 0; i <= dim_; ++i)
        if (distance(vertices_[simplices_[s].v[i]].point, p) <= tol) return true;
    return false;
}

std::vector<SimplexId> Triangulation::grow_cavity(Point p, SimplexId start) const {
    std::vector<SimplexId> cavity{start};
    std::unordered_set<SimplexId> in_cavity{start};
    std::unordered_set<SimplexId> rejected;
    std::array<Point, 4> pts;
    for (size_t i = 0; i < cavity.size(); ++i) {
        const Simplex& S = simplices_[cavity[i]];
        for (int k = 0; k <= dim_; ++k) {
            const SimplexId n = S.nbr[k];
            if (n == kNone || in_cavity.count(n) || rejected.count(n)) continue;
            const Simplex& N = simplices_[n];
            for (int j = 0; j <= dim_; ++j) pts[j] = vertices_[N.v[j]].point;
            if (in_circumsphere(std::span<const Point>(pts.data(), dim_ + 1), p) == Sign::Positive) {
                cavity.push_back(n);
                in_cavity.insert(n);
            } else {
                rejected.insert(n);
            }
        }
    }
    return cavity;
}

std::vector<SimplexId> Triangulation::conflict_region(Point p) const {
    if (dim_ == 2) p.z = 0.0;
    const auto start = walk(p, last_);
    if (!start) return {};
    return grow_cavity(p, *start);
}

std::vector<SimplexId> Triangulation::simplices_meeting_ball(Point c, double r, SimplexId hint) const {
    if (dim_ == 2) c.z = 0.0;
    const auto found = walk(c, hint != kNone && simplices_[hint].alive ? hint : last_);
    if (!found) return {};
    const SimplexId start = *found;
    // Simplices whose circumball meets the query ball form a connected superset of the
    // simplices meeting the ball itself.
    std::vector<SimplexId> todo{start};
    std::unordered_set<SimplexId> seen{start};
    std::array<Point, 4> pts;
    for (size_t i = 0; i < todo.size(); ++i) {
        const Simplex& S = simplices_[todo[i]];
        for (int k = 0; k <= dim_; ++k) {
            const SimplexId n = S.nbr[k];
            if (n == kNone || seen.count(n)) continue;
            seen.insert(n);
            const Simplex& N = simplices_[n];
            for (int j = 0; j <= dim_; ++j) pts[j] = vertices_[N.v[j]].point;
            Sphere cs;
            try {
                cs = circumsphere(std::span<const Point>(pts.data(), dim_ + 1));
            } catch (const std::exception&) {
                todo.push_back(n);
                continue;
            }
            if (distance(cs.center, c) <= cs.radius + r) todo.push_back(n);
        }
    }
    std::sort(todo.begin(), todo.end());
    return todo;
}

std::vector<VertexId> Triangulation::vertices_in_ball(Point c, double r, SimplexId hint) const {
    if (dim_ == 2) c.z = 0.0;
    std::vector<VertexId> out;
    for (const SimplexId s : simplices_meeting_ball(c, r, hint))
        for (int j = 0; j <= dim_; ++j) {
            const VertexId v = simplices_[s].v[j];
            if (distance(vertices_[v].point, c) < r) out.push_back(v);
        }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<SimplexId> Triangulation::simplices_with(std::span<const VertexId> face) const {
    std::vector<SimplexId> out;
    if (face.empty()) return out;
    for (const VertexId v : face)
        if (v < 0 || v >= vertex_slots() || !vertices_[v].alive) return out;
    for (const SimplexId s : star(face[0])) {
        const auto sv = simplex_vertices(s);
        bool all = true;
        for (const VertexId v : face) all = all && std::find(sv.begin(), sv.end(), v) != sv.end();
        if (all) out.push_back(s);
    }
    std::sort(out.begin(), out.end());
    return out;
}

VertexId Triangulation::insert(Point p, Provenance prov, InsertResult* out) {
    if (!is_finite(p)) throw TriangulationError("non-finite insertion point");
    if (prov == Provenance::Scaffold) throw TriangulationError("scaffold vertices cannot be inserted");
    if (dim_ == 2) p.z = 0.0;
    vertices_.push_back({p, prov});
    const VertexId id = static_cast<VertexId>(vertices_.size()) - 1;
    try {
        insert_existing(id, out);
    } catch (...) {
        vertices_.pop_back();
        throw;
    }
    return id;
}

void Triangulation::insert_existing(VertexId id, InsertResult* out) {
    const Point p = vertices_[id].point;
    const auto start = walk(p, last_);
    if (!start) throw TriangulationError("point outside the triangulated domain: " + to_string(p));
    if (coincident(p, *start)) throw TriangulationError("point coincides with an existing vertex: " + to_string(p));

    const std::vector<SimplexId> cavity = grow_cavity(p, *start);
    const std::unordered_set<SimplexId> in_cavity(cavity.begin(), cavity.end());

    // Validate every new simplex before touching the structure.
    for (const SimplexId c : cavity) {
        const Simplex& S = simplices_[c];
        for (int k = 0; k <= dim_; ++k) {
            const SimplexId n = S.nbr[k];
            if (n != kNone && in_cavity.count(n)) continue;
            if (orient_with(S, k, p) != Sign::Positive)
                throw TriangulationError("cavity is not star-shaped around " + to_string(p));
        }
    }

    std::map<FaceKey, std::pair<SimplexId, int>> open;
    std::vector<SimplexId> created, created_from;
    for (const SimplexId c : cavity) {
        for (int k = 0; k <= dim_; ++k) {
            const SimplexId n = simplices_[c].nbr[k];
            if (n != kNone && in_cavity.count(n)) continue;
            std::array<VertexId, 4> v = simplices_[c].v;
            v[k] = id;
            const SimplexId t = add_simplex(v);
            created.push_back(t);
            created_from.push_back(c);
            simplices_[t].nbr[k] = n;
            if (n != kNone) {
                for (int j = 0; j <= dim_; ++j)
                    if (simplices_[n].nbr[j] == c) simplices_[n].nbr[j] = t;
            }
            for (int j = 0; j <= dim_; ++j) {
                if (j == k) continue;
                const FaceKey key = face_key(simplices_[t], dim_, j);
                if (auto it = open.find(key); it != open.end()) {
                    simplices_[t].nbr[j] = it->second.first;
                    simplices_[it->second.first].nbr[it->second.second] = t;
                    open.erase(it);
                } else {
                    open.emplace(key, std::make_pair(t, j));
                }
            }
        }
    }
    if (!open.empty()) throw TriangulationError("internal error: unmatched cavity facets");
    for (const SimplexId c : cavity) kill_simplex(c);
    last_ = created.front();
    ++mutations_;
    if (out) {
        out->vertex = id;
        out->removed = cavity;
        out->created = std::move(created);
        out->created_from = std::move(created_from);
    }
}

std::vector<SimplexId> Triangulation::star(VertexId v) const {
    std::vector<SimplexId> out;
    const SimplexId s0 = vertices_.at(v).incident;
    if (s0 == kNone || !simplices_[s0].alive) return out;
    std::unordered_set<SimplexId> seen{s0};
    out.push_back(s0);
    for (size_t i = 0; i < out.size(); ++i) {
        const Simplex& S = simplices_[out[i]];
        for (int k = 0; k <= dim_; ++k) {
            if (S.v[k] == v) continue;  // the facet opposite v does not contain v
            const SimplexId n = S.nbr[k];
            if (n == kNone || seen.count(n)) continue;
            seen.insert(n);
            out.push_back(n);
        }
    }
    return out;
}

std::vector<VertexId> Triangulation::link_vertices(VertexId v) const {
    std::vector<VertexId> out;
    for (const SimplexId s : star(v))
        for (int i = 0; i <= dim_; ++i)
            if (simplices_[s].v[i] != v) out.push_back(simplices_[s].v[i]);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

SimplexId Triangulation::find_simplex_with(std::span<const VertexId> face) const {
    if (face.empty()) return kNone;
    for (const VertexId v : face)
        if (v < 0 || v >= vertex_slots() || !vertices_[v].alive) return kNone;
    SimplexId best = kNone;
    for (const SimplexId s : star(face[0])) {
        const auto sv = simplex_vertices(s);
        bool all = true;
        for (const VertexId v : face) all = all && std::find(sv.begin(), sv.end(), v) != sv.end();
        if (all && (best == kNone || s < best)) best = s;
    }
    return best;
}

void Triangulation::remove(VertexId v, RemoveResult* out) {
    if (v < 0 || v >= vertex_slots() || !vertices_[v].alive) throw TriangulationError("no such vertex");
    const Provenance prov = vertices_[v].provenance;
    if (prov == Provenance::Input) throw TriangulationError("input vertices cannot be deleted");
    if (prov == Provenance::Scaffold) throw TriangulationError("scaffold vertices cannot be deleted");
    RemoveResult local;
    if (remove_locally(v, false, &local) || remove_locally(v, true, &local)) {
        ++mutations_;
        if (out) *out = std::move(local);
        return;
    }
    vertices_[v].alive = false;
    rebuild(out);
    ++mutations_;
}

bool Triangulation::remove_locally(VertexId v, bool reverse_order, RemoveResult* out) {
    const std::vector<SimplexId> star_cells = star(v);
    std::vector<VertexId> link = link_vertices(v);
    if (reverse_order) std::reverse(link.begin(), link.end());

    std::vector<Point> link_pts;
    for (const VertexId w : link) link_pts.push_back(vertices_[w].point);
    Triangulation local(dim_, Box::around(link_pts), 4.0);
    std::map<VertexId, VertexId> to_local, to_global;
    try {
        for (const VertexId w : link) {
            const VertexId lw = local.insert(vertices_[w].point, Provenance::Input);
            to_local[w] = lw;
            to_global[lw] = w;
        }
    } catch (const std::exception&) {
        return false;
    }

    struct BoundaryFacet {
        SimplexId owner;
        int k;
        SimplexId outer;
    };
    std::map<FaceKey, BoundaryFacet> boundary;
    double star_volume = 0.0;
    for (const SimplexId s : star_cells) {
        const Simplex& S = simplices_[s];
        const int k = static_cast<int>(std::find(S.v.begin(), S.v.begin() + dim_ + 1, v) - S.v.begin());
        boundary.emplace(face_key(S, dim_, k), BoundaryFacet{s, k, S.nbr[k]});
        const auto pts = simplex_points(s);
        star_volume += dim_ == 2 ? triangle_area(pts[0], pts[1], pts[2]) : std::abs(tet_volume(pts[0], pts[1], pts[2], pts[3]));
    }

    auto global_key = [&](SimplexId t, int j) {
        Simplex g = local.simplex(t);
        for (int i = 0; i <= dim_; ++i) g.v[i] = local.is_scaffold(g.v[i]) ? -1 - g.v[i] : to_global.at(g.v[i]);
        return face_key(g, dim_, j);
    };

    // Seed the flood fill with the local simplex on the v side of each boundary facet.
    std::vector<SimplexId> region;
    std::unordered_set<SimplexId> in_region;
    for (const auto& [key, bf] : boundary) {
        const Simplex& S = simplices_[bf.owner];
        std::vector<VertexId> lface;
        for (int i = 0; i <= dim_; ++i)
            if (i != bf.k) lface.push_back(to_local.at(S.v[i]));
        SimplexId seed = kNone;
        for (const SimplexId t : local.star(lface[0])) {
            const auto tv = local.simplex_vertices(t);
            if (!std::all_of(lface.begin(), lface.end(), [&](VertexId w) { return std::find(tv.begin(), tv.end(), w) != tv.end(); }))
                continue;
            VertexId x = kNone;
            for (const VertexId w : tv)
                if (std::find(lface.begin(), lface.end(), w) == lface.end()) x = w;
            if (local.is_scaffold(x)) continue;
            if (orient_with(S, bf.k, local.point(x)) == Sign::Positive) seed = t;
        }
        if (seed == kNone) return false;
        if (in_region.insert(seed).second) region.push_back(seed);
    }
    for (size_t i = 0; i < region.size(); ++i) {
        const SimplexId t = region[i];
        if (local.touches_scaffold(t)) return false;
        for (int j = 0; j <= dim_; ++j) {
            if (boundary.count(global_key(t, j))) continue;
            const SimplexId n = local.simplex(t).nbr[j];
            if (n == kNone) return false;
            if (in_region.insert(n).second) region.push_back(n);
        }
    }
    double region_volume = 0.0;
    for (const SimplexId t : region) {
        const auto pts = local.simplex_points(t);
        region_volume += dim_ == 2 ? triangle_area(pts[0], pts[1], pts[2]) : std::abs(tet_volume(pts[0], pts[1], pts[2], pts[3]));
    }
    if (std::abs(region_volume - star_volume) > 1e-9 * star_volume) return false;

    // Commit.
    std::sort(region.begin(), region.end());
    std::map<SimplexId, SimplexId> local_to_new;
    std::vector<SimplexId> created;
    for (const SimplexId t : region) {
        std::array<VertexId, 4> gv{kNone, kNone, kNone, kNone};
        for (int i = 0; i <= dim_; ++i) gv[i] = to_global.at(local.simplex(t).v[i]);
        const SimplexId ns = add_simplex(gv);
        local_to_new[t] = ns;
        created.push_back(ns);
    }
    for (const SimplexId t : region) {
        const SimplexId ns = local_to_new[t];
        for (int j = 0; j <= dim_; ++j) {
            const FaceKey key = global_key(t, j);
            if (auto it = boundary.find(key); it != boundary.end()) {
                const BoundaryFacet& bf = it->second;
                simplices_[ns].nbr[j] = bf.outer;
                if (bf.outer != kNone)
                    for (int i = 0; i <= dim_; ++i)
                        if (simplices_[bf.outer].nbr[i] == bf.owner) simplices_[bf.outer].nbr[i] = ns;
            } else {
                simplices_[ns].nbr[j] = local_to_new.at(local.simplex(t).nbr[j]);
            }
        }
    }
    for (const SimplexId s : star_cells) kill_simplex(s);
    vertices_[v].alive = false;
    vertices_[v].incident = kNone;
    last_ = created.empty() ? kNone : created.front();
    if (out) {
        out->removed = star_cells;
        out->created = std::move(created);
        out->rebuilt = false;
    }
    return true;
}

void Triangulation::rebuild(RemoveResult* out) {
    std::vector<SimplexId> removed = live_simplices();
    for (const SimplexId s : removed) kill_simplex(s);
    const SimplexId first_new = simplex_slots();
    init_scaffold();
    for (VertexId w = scaffold_count(); w < vertex_slots(); ++w)
        if (vertices_[w].alive) insert_existing(w, nullptr);
    ++generation_;
    if (out) {
        out->removed = std::move(removed);
        out->created.clear();
        for (SimplexId s = first_new; s < simplex_slots(); ++s)
            if (simplices_[s].alive) out->created.push_back(s);
        out->rebuilt = true;
    }
}

Triangulation bootstrap(const Plc& plc) {
    validate(plc);
    Triangulation tri(plc.dim, Box::around(plc.vertices));
    for (const Point& p : plc.vertices) tri.insert(p, Provenance::Input);
    return tri;
}

}  // namespace globemesh
