#include "globemesh/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

namespace globemesh {

WeightedPlane WeightedPlane::through(Point a, Point b, Point c, double weight) {
    const Point n = normalized(cross(b - a, c - a));
    return {n, dot(n, a), weight};
}

double PlacementProblem::value(Point p) const {
    double v = std::numeric_limits<double>::infinity();
    if (objective == Objective::MinDistance) {
        for (const Point& s : sites) v = std::min(v, distance(p, s));
    } else {
        for (const auto& pl : planes) v = std::min(v, pl.value(p));
    }
    return v;
}

bool PlacementProblem::is_feasible(Point p, double slack) const {
    if (dim == 2 && std::abs(p.z) > slack) return false;
    return feasible.contains(p, slack);
}

int PlacementProblem::avoided_by(Point p, double slack) const {
    for (size_t i = 0; i < avoid.size(); ++i)
        if (avoid[i].contains(p, slack)) return static_cast<int>(i);
    return -1;
}

double PlacementProblem::scale() const {
    if (auto b = feasible.bounding_ball()) return std::max(b->radius, 1e-300);
    std::vector<Point> pts = sites;
    for (const auto& c : feasible.constraints)
        if (c.kind != ConstraintKind::Halfspace && c.kind != ConstraintKind::Slab) pts.push_back(c.center);
    if (pts.empty()) return 1.0;
    const double d = Box::around(pts).diameter();
    return d > 0.0 ? d : 1.0;
}

namespace {

struct Surface {
    bool sphere = false;
    Point n{};
    double off = 0.0;
    Point c{};
    double r = 0.0;
    std::string tag;
};

// Orthonormalized linear system a . p = b.
class LinearSystem {
  public:
    explicit LinearSystem(double tol) : tol_(tol) {}

    bool add(Point a, double b) {
        const double len = norm(a);
        if (len < 1e-300) return std::abs(b) <= tol_;
        a = a / len;
        b /= len;
        for (size_t i = 0; i < q_.size(); ++i) {
            const double t = dot(a, q_[i]);
            a -= t * q_[i];
            b -= t * beta_[i];
        }
        const double rest = norm(a);
        if (rest < 1e-9) return std::abs(b) <= tol_;
        q_.push_back(a / rest);
        beta_.push_back(b / rest);
        return true;
    }

    int rank() const { return static_cast<int>(q_.size()); }

    Point particular() const {
        Point x{};
        for (size_t i = 0; i < q_.size(); ++i) x += beta_[i] * q_[i];
        return x;
    }

    // Orthonormal basis of the solution directions.
    std::vector<Point> null_basis() const {
        std::vector<Point> all = q_, out;
        while (all.size() < 3) {
            Point best{};
            double bl = -1.0;
            for (int e = 0; e < 3; ++e) {
                Point v{};
                v[e] = 1.0;
                for (const Point& u : all) v -= dot(v, u) * u;
                if (norm(v) > bl) {
                    bl = norm(v);
                    best = v;
                }
            }
            best = best / bl;
            all.push_back(best);
            out.push_back(best);
        }
        return out;
    }

  private:
    double tol_;
    std::vector<Point> q_;
    std::vector<double> beta_;
};

Point project_dir(const std::vector<Point>& basis, Point v) {
    Point out{};
    for (const Point& u : basis) out += dot(v, u) * u;
    return out;
}

void for_each_subset(int n, int k, const std::function<void(const std::vector<int>&)>& fn) {
    if (k > n || k < 0) return;
    std::vector<int> idx(k);
    for (int i = 0; i < k; ++i) idx[i] = i;
    while (true) {
        fn(idx);
        int i = k - 1;
        while (i >= 0 && idx[i] == n - k + i) --i;
        if (i < 0) return;
        ++idx[i];
        for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

struct Found {
    Point p;
    double value;
    std::vector<std::string> active;
};

class Enumerator {
  public:
    Enumerator(const PlacementProblem& prob, const std::vector<int>& enforced)
        : prob_(prob), enforced_(enforced), scale_(prob.scale()), tol_(1e-9 * prob.scale()) {
        ball_ = prob.feasible.bounding_ball();
        collect_surfaces();
        collect_generators();
    }

    std::vector<Found> run() {
        const int d = prob_.dim;
        const int ng = static_cast<int>(gen_count());
        const int ns = static_cast<int>(surfaces_.size());
        for (int k = 1; k <= d + 1; ++k) {
            for_each_subset(ng, k, [&](const std::vector<int>& gs) {
                if (!pair_ok(gs)) return;
                const int max_m = d + 1 - k;
                for (int m = 0; m <= max_m; ++m)
                    for_each_subset(ns, m, [&](const std::vector<int>& ss) { combo(gs, ss); });
            });
        }
        for (const auto& c : prob_.feasible.constraints)
            if (c.kind == ConstraintKind::InsideSpindleTorus) torus_candidates(c);
        return std::move(found_);
    }

    int combinations() const { return combos_; }

  private:
    size_t gen_count() const {
        return prob_.objective == Objective::MinDistance ? sites_.size() : planes_.size();
    }

    void collect_surfaces() {
        auto near_ball = [&](const Surface& s) {
            if (!ball_) return true;
            const double R = ball_->radius * (1.0 + 1e-9) + tol_;
            if (s.sphere) return std::abs(distance(ball_->center, s.c) - s.r) <= R;
            return std::abs(dot(s.n, ball_->center) - s.off) <= R;
        };
        auto push = [&](Surface s) {
            if (near_ball(s)) surfaces_.push_back(std::move(s));
        };
        const auto& cs = prob_.feasible.constraints;
        for (size_t i = 0; i < cs.size(); ++i) {
            const auto& c = cs[i];
            const std::string tag = "feasible[" + std::to_string(i) + "]";
            switch (c.kind) {
                case ConstraintKind::InsideSphere:
                case ConstraintKind::OutsideSphere: push({true, {}, 0.0, c.center, c.radius, tag}); break;
                case ConstraintKind::Halfspace: push({false, c.normal, c.offset, {}, 0.0, tag}); break;
                case ConstraintKind::Slab:
                    push({false, c.normal, c.offset + c.half_width, {}, 0.0, tag + ".upper"});
                    push({false, c.normal, c.offset - c.half_width, {}, 0.0, tag + ".lower"});
                    break;
                case ConstraintKind::InsideSpindleTorus: break;  // sampled separately
            }
        }
        for (const int i : enforced_) {
            const ForbiddenRegion& f = prob_.avoid[i];
            const std::string tag = "avoid[" + std::to_string(i) + "]";
            push({true, {}, 0.0, f.upper().center, f.sphere_radius, tag + ".upper_sphere"});
            push({true, {}, 0.0, f.lower().center, f.sphere_radius, tag + ".lower_sphere"});
            push({false, f.normal, dot(f.normal, f.center) + f.slab_half_height, {}, 0.0, tag + ".top"});
            push({false, f.normal, dot(f.normal, f.center) - f.slab_half_height, {}, 0.0, tag + ".bottom"});
        }
    }

    void collect_generators() {
        if (prob_.objective == Objective::MinDistance) {
            std::vector<int> idx(prob_.sites.size());
            for (size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
            if (ball_) {
                double U = std::numeric_limits<double>::infinity();
                for (const Point& s : prob_.sites) U = std::min(U, distance(ball_->center, s) + ball_->radius);
                std::vector<int> keep;
                for (int i : idx)
                    if (distance(ball_->center, prob_.sites[i]) - ball_->radius <= U * (1.0 + 1e-9) + tol_) keep.push_back(i);
                idx = keep;
            }
            sites_ = idx;
        } else {
            double U = std::numeric_limits<double>::infinity();
            auto gap = [&](const WeightedPlane& pl) { return std::abs(dot(pl.normal, ball_->center) - pl.offset); };
            if (ball_)
                for (const auto& pl : prob_.planes) U = std::min(U, pl.weight * (gap(pl) + ball_->radius));
            for (size_t i = 0; i < prob_.planes.size(); ++i) {
                const auto& pl = prob_.planes[i];
                if (ball_ && pl.weight * std::max(0.0, gap(pl) - ball_->radius) > U * (1.0 + 1e-9) + tol_) continue;
                planes_.push_back(static_cast<int>(i));
            }
        }
    }

    bool pair_ok(const std::vector<int>& gs) const {
        if (!ball_ || prob_.objective != Objective::MinDistance) return true;
        for (size_t i = 0; i < gs.size(); ++i)
            for (size_t j = i + 1; j < gs.size(); ++j) {
                const Point a = prob_.sites[sites_[gs[i]]], b = prob_.sites[sites_[gs[j]]];
                const double len = distance(a, b);
                if (len == 0.0) return false;
                const double off = std::abs(dot(b - a, ball_->center - 0.5 * (a + b))) / len;
                if (off > ball_->radius * (1.0 + 1e-9) + tol_) return false;
            }
        return true;
    }

    void combo(const std::vector<int>& gs, const std::vector<int>& ss) {
        ++combos_;
        LinearSystem sys(tol_);
        if (prob_.dim == 2 && !sys.add({0, 0, 1}, 0.0)) return;
        const Surface* sphere = nullptr;
        for (const int si : ss) {
            const Surface& s = surfaces_[si];
            if (!s.sphere) {
                if (!sys.add(s.n, s.off)) return;
            } else if (!sphere) {
                sphere = &s;
            } else {
                const Point dc = s.c - sphere->c;
                if (norm(dc) < 1e-14 * scale_) return;
                if (!sys.add(dc, 0.5 * (dot(dc, s.c + sphere->c) - s.r * s.r + sphere->r * sphere->r))) return;
            }
        }
        if (prob_.objective == Objective::MinDistance) {
            const Point s0 = prob_.sites[sites_[gs[0]]];
            for (size_t i = 1; i < gs.size(); ++i) {
                const Point si = prob_.sites[sites_[gs[i]]];
                if (!sys.add(si - s0, 0.5 * dot(si - s0, si + s0))) return;
            }
            emit(sys, sphere, s0, true, gs, ss, 0);
        } else {
            const WeightedPlane& p0 = prob_.planes[planes_[gs[0]]];
            const int patterns = 1 << (gs.size() - 1);
            for (int mask = 0; mask < patterns; ++mask) {
                LinearSystem s2 = sys;
                bool ok = true;
                for (size_t i = 1; i < gs.size() && ok; ++i) {
                    const WeightedPlane& pi = prob_.planes[planes_[gs[i]]];
                    const double sg = (mask >> (i - 1)) & 1 ? -1.0 : 1.0;
                    ok = s2.add(p0.weight * p0.normal - sg * pi.weight * pi.normal, p0.weight * p0.offset - sg * pi.weight * pi.offset);
                }
                if (ok) emit(s2, sphere, p0.normal, false, gs, ss, mask);
            }
        }
    }

    // Stationary points of the target on the solution manifold of sys (and the sphere).
    void emit(const LinearSystem& sys, const Surface* sphere, Point target, bool target_is_point, const std::vector<int>& gs,
              const std::vector<int>& ss, int mask) {
        const Point x0 = sys.particular();
        const std::vector<Point> basis = sys.null_basis();
        std::array<Point, 2> pts;
        int np = 0;
        if (!sphere) {
            if (basis.empty()) {
                pts[np++] = x0;
            } else if (target_is_point) {
                pts[np++] = x0 + project_dir(basis, target - x0);
            } else {
                return;  // linear target on an affine set: extremes lie on other generators
            }
        } else {
            const Point c = x0 + project_dir(basis, sphere->c - x0);
            const double r2 = sphere->r * sphere->r - distance2(c, sphere->c);
            const double tol2 = 2.0 * tol_ * sphere->r;
            if (r2 < -tol2) return;
            const double r = std::sqrt(std::max(0.0, r2));
            if (basis.empty()) {
                if (std::abs(distance(c, sphere->c) - sphere->r) > tol_) return;
                pts[np++] = c;
            } else {
                Point dir = project_dir(basis, target_is_point ? target - c : target);
                if (norm(dir) <= 1e-12 * std::max(1.0, norm(target_is_point ? target - c : target))) {
                    // Constant target: take the lexicographically smallest point.
                    dir = Point{};
                    for (int e = 0; e < 3; ++e) {
                        Point u{};
                        u[e] = -1.0;
                        const Point w = project_dir(basis, u);
                        if (norm(w) > 1e-9) {
                            dir = w;
                            break;
                        }
                    }
                    if (norm(dir) == 0.0) return;
                    pts[np++] = c + r * normalized(dir);
                } else {
                    dir = normalized(dir);
                    pts[np++] = c + r * dir;
                    pts[np++] = c - r * dir;
                }
            }
        }
        for (int i = 0; i < np; ++i) consider(pts[i], gs, ss, mask);
    }

    void consider(Point p, const std::vector<int>& gs, const std::vector<int>& ss, int mask) {
        if (!is_finite(p)) return;
        if (prob_.dim == 2) p.z = 0.0;
        if (!acceptable(p)) return;
        std::vector<std::string> active;
        for (size_t i = 0; i < gs.size(); ++i) {
            if (prob_.objective == Objective::MinDistance) {
                active.push_back("site " + std::to_string(sites_[gs[i]]));
            } else {
                const bool neg = i > 0 && ((mask >> (i - 1)) & 1);
                active.push_back("plane " + std::to_string(planes_[gs[i]]) + (neg ? "-" : "+"));
            }
        }
        for (const int s : ss) active.push_back(surfaces_[s].tag);
        found_.push_back({p, prob_.value(p), std::move(active)});
    }

    bool acceptable(Point p) const {
        if (!prob_.is_feasible(p, tol_)) return false;
        for (const int i : enforced_)
            if (prob_.avoid[i].contains(p, tol_)) return false;
        return true;
    }

    // Spindle torus surfaces are sampled parametrically and polished by pattern search.
    void torus_candidates(const Constraint& c) {
        const SpindleFrame f = spindle_frame(c);
        Point u = cross(f.axis, Point{1, 0, 0});
        if (norm(u) < 0.5) u = cross(f.axis, Point{0, 1, 0});
        u = normalized(u);
        const Point v = cross(f.axis, u);
        auto at = [&](double phi, double th) {
            const double x = f.radius * std::cos(th);
            const double r = f.h + f.radius * std::sin(th);
            return f.mid + x * f.axis + std::max(0.0, r) * (std::cos(phi) * u + std::sin(phi) * v);
        };
        const int n = prob_.dim == 2 ? 1 : 48;
        const int m = 96;
        struct S {
            double value;
            double phi, th;
        };
        std::vector<S> samples;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) {
                const double phi = 2.0 * std::numbers::pi * i / n, th = 2.0 * std::numbers::pi * j / m;
                const Point p = at(phi, th);
                if (acceptable(p)) samples.push_back({prob_.value(p), phi, th});
            }
        std::sort(samples.begin(), samples.end(), [](const S& a, const S& b) { return a.value > b.value; });
        if (samples.size() > 4) samples.resize(4);
        for (S s : samples) {
            double step = std::numbers::pi / 48.0;
            while (step > 1e-10) {
                bool improved = false;
                for (const auto& [dp, dt] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
                    if (prob_.dim == 2 && dp != 0) continue;
                    const double phi = s.phi + dp * step, th = s.th + dt * step;
                    const Point p = at(phi, th);
                    if (!acceptable(p)) continue;
                    const double val = prob_.value(p);
                    if (val > s.value) {
                        s = {val, phi, th};
                        improved = true;
                    }
                }
                if (!improved) step *= 0.5;
            }
            const Point p = at(s.phi, s.th);
            found_.push_back({p, s.value, {"torus " + c.describe()}});
        }
    }

    const PlacementProblem& prob_;
    std::vector<int> enforced_;
    double scale_;
    double tol_;
    std::optional<Sphere> ball_;
    std::vector<Surface> surfaces_;
    std::vector<int> sites_;
    std::vector<int> planes_;
    std::vector<Found> found_;
    int combos_ = 0;
};

std::optional<Found> pick(const std::vector<Found>& found) {
    if (found.empty()) return std::nullopt;
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& f : found) best = std::max(best, f.value);
    const double cut = best - 1e-10 * std::abs(best);
    const Found* out = nullptr;
    for (const auto& f : found)
        if (f.value >= cut && (!out || f.p < out->p)) out = &f;
    return *out;
}

Candidate solve_impl(const PlacementProblem& prob) {
    if (prob.dim != 2 && prob.dim != 3) throw std::invalid_argument("placement problem dimension must be 2 or 3");
    if (prob.objective == Objective::MinDistance && prob.sites.empty()) throw std::invalid_argument("placement problem has no sites");
    if (prob.objective == Objective::WeightedPlaneDistance && prob.planes.empty())
        throw std::invalid_argument("weighted placement problem has no planes");
    if (prob.feasible.constraints.empty()) throw std::invalid_argument("placement problem has no feasible constraint");

    const double slack = 1e-9 * prob.scale();
    std::vector<int> enforced;
    std::optional<Found> unconstrained;
    int combos = 0;
    for (size_t iter = 0; iter <= prob.avoid.size(); ++iter) {
        Enumerator en(prob, enforced);
        const auto found = en.run();
        combos += en.combinations();
        const auto best = pick(found);
        if (iter == 0) {
            if (!best) throw InfeasibleError("feasible region yields no candidate");
            unconstrained = best;
        }
        if (!best) break;
        std::vector<int> hit;
        for (size_t i = 0; i < prob.avoid.size(); ++i)
            if (prob.avoid[i].contains(best->p, slack) && std::find(enforced.begin(), enforced.end(), static_cast<int>(i)) == enforced.end())
                hit.push_back(static_cast<int>(i));
        if (hit.empty()) return {best->p, best->value, best->active, false, combos};
        enforced.insert(enforced.end(), hit.begin(), hit.end());
        std::sort(enforced.begin(), enforced.end());
    }
    return {unconstrained->p, unconstrained->value, unconstrained->active, true, combos};
}

}  // namespace

Candidate solve(const PlacementProblem& problem) {
    if (problem.objective != Objective::MinDistance) throw std::invalid_argument("solve expects the min-distance objective");
    return solve_impl(problem);
}

Candidate solve_weighted(const PlacementProblem& problem) {
    if (problem.objective != Objective::WeightedPlaneDistance) throw std::invalid_argument("solve_weighted expects the weighted-plane objective");
    return solve_impl(problem);
}

std::optional<Candidate> grid_oracle(const PlacementProblem& prob, int resolution) {
    if (resolution < 2) throw std::invalid_argument("grid resolution must be at least 2");
    Box box;
    if (auto b = prob.feasible.bounding_ball()) {
        box = {b->center, b->center};
        for (int i = 0; i < 3; ++i) {
            box.lo[i] -= b->radius;
            box.hi[i] += b->radius;
        }
    } else {
        box = Box::around(prob.sites);
    }
    if (prob.dim == 2) box.lo.z = box.hi.z = 0.0;
    std::optional<Candidate> best;
    const int nz = prob.dim == 2 ? 1 : resolution;
    auto coord = [&](int axis, int i) { return box.lo[axis] + (box.hi[axis] - box.lo[axis]) * i / (resolution - 1); };
    for (int i = 0; i < resolution; ++i)
        for (int j = 0; j < resolution; ++j)
            for (int k = 0; k < nz; ++k) {
                const Point p{coord(0, i), coord(1, j), prob.dim == 2 ? 0.0 : coord(2, k)};
                if (!prob.is_feasible(p, 0.0) || prob.avoided_by(p, 0.0) >= 0) continue;
                const double v = prob.value(p);
                if (!best || v > best->value) best = Candidate{p, v, {"grid"}, false, 0};
            }
    return best;
}

double item_value(const std::vector<RelocationItem>& items, size_t i) {
    double v = items[i].base.value(items[i].current.point);
    for (size_t j = 0; j < items.size(); ++j)
        if (j != i) v = std::min(v, distance(items[i].current.point, items[j].current.point));
    return v;
}

double batch_min_distance(const std::vector<RelocationItem>& items) {
    double v = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < items.size(); ++i) v = std::min(v, item_value(items, i));
    return v;
}

double relocate_round(std::vector<RelocationItem>& items) {
    double moved = 0.0;
    for (size_t i = 0; i < items.size(); ++i) {
        PlacementProblem p = items[i].base;
        for (size_t j = 0; j < items.size(); ++j)
            if (j != i) p.sites.push_back(items[j].current.point);
        const double before = item_value(items, i);
        try {
            Candidate c = solve(p);
            if (c.fallback && !items[i].current.fallback) continue;
            // Only strict improvements move, so ties cannot oscillate.
            if (c.value > before + 1e-12 * std::max(1.0, std::abs(before))) {
                moved = std::max(moved, distance(c.point, items[i].current.point));
                items[i].current = c;
            }
        } catch (const InfeasibleError& e) {
            items[i].flagged = true;
            items[i].error = e.what();
        }
    }
    return moved;
}

std::vector<double> relocate(std::vector<RelocationItem>& items, int max_passes, double tol) {
    std::vector<double> history{batch_min_distance(items)};
    double scale = 0.0;
    for (const auto& it : items) scale = std::max(scale, it.base.scale());
    for (int pass = 0; pass < max_passes; ++pass) {
        const double moved = relocate_round(items);
        history.push_back(batch_min_distance(items));
        if (moved < tol * scale) break;
    }
    return history;
}

}  // namespace globemesh
