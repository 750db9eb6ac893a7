#include "globemesh/regions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace globemesh {

const char* to_string(ConstraintKind k) {
    switch (k) {
        case ConstraintKind::InsideSphere: return "inside_sphere";
        case ConstraintKind::OutsideSphere: return "outside_sphere";
        case ConstraintKind::Halfspace: return "halfspace";
        case ConstraintKind::Slab: return "slab";
        case ConstraintKind::InsideSpindleTorus: return "inside_spindle_torus";
    }
    return "?";
}

Constraint Constraint::inside(Sphere s) {
    if (!(s.radius > 0.0)) throw std::invalid_argument("sphere radius must be positive");
    Constraint c;
    c.kind = ConstraintKind::InsideSphere;
    c.center = s.center;
    c.radius = s.radius;
    return c;
}

Constraint Constraint::outside(Sphere s) {
    Constraint c = inside(s);
    c.kind = ConstraintKind::OutsideSphere;
    return c;
}

Constraint Constraint::halfspace(Point normal, double offset) {
    Constraint c;
    c.kind = ConstraintKind::Halfspace;
    const double n = norm(normal);
    c.normal = normalized(normal);
    c.offset = offset / n;
    return c;
}

Constraint Constraint::slab(Point normal, double offset, double half_width) {
    Constraint c = halfspace(normal, offset);
    c.kind = ConstraintKind::Slab;
    c.half_width = half_width / norm(normal);
    return c;
}

Constraint Constraint::spindle(Point a, Point b, double rho) {
    if (!(rho >= 0.5)) throw std::invalid_argument("spindle ratio must be at least 1/2");
    if (a == b) throw std::invalid_argument("spindle axis is degenerate");
    Constraint c;
    c.kind = ConstraintKind::InsideSpindleTorus;
    c.a = a;
    c.b = b;
    c.rho = rho;
    return c;
}

SpindleFrame spindle_frame(const Constraint& c) {
    const double l = distance(c.a, c.b);
    const double r = c.rho * l;
    return {0.5 * (c.a + c.b), (c.b - c.a) / l, std::sqrt(std::max(0.0, r * r - 0.25 * l * l)), r};
}

double Constraint::violation(Point p) const {
    switch (kind) {
        case ConstraintKind::InsideSphere: return distance(p, center) - radius;
        case ConstraintKind::OutsideSphere: return radius - distance(p, center);
        case ConstraintKind::Halfspace: return dot(normal, p) - offset;
        case ConstraintKind::Slab: return std::abs(dot(normal, p) - offset) - half_width;
        case ConstraintKind::InsideSpindleTorus: {
            const SpindleFrame f = spindle_frame(*this);
            const Point d = p - f.mid;
            const double x = dot(d, f.axis);
            const double r = norm(d - x * f.axis);
            return std::hypot(x, r - f.h) - f.radius;
        }
    }
    return 0.0;
}

std::string Constraint::describe() const {
    std::ostringstream os;
    os.precision(17);
    os << to_string(kind);
    switch (kind) {
        case ConstraintKind::InsideSphere:
        case ConstraintKind::OutsideSphere: os << " c=" << to_string(center) << " r=" << radius; break;
        case ConstraintKind::Halfspace: os << " n=" << to_string(normal) << " d=" << offset; break;
        case ConstraintKind::Slab: os << " n=" << to_string(normal) << " d=" << offset << " w=" << half_width; break;
        case ConstraintKind::InsideSpindleTorus: os << " a=" << to_string(a) << " b=" << to_string(b) << " rho=" << rho; break;
    }
    return os.str();
}

double Region::violation(Point p) const {
    double v = -std::numeric_limits<double>::infinity();
    for (const auto& c : constraints) v = std::max(v, c.violation(p));
    return v;
}

std::optional<Sphere> Region::bounding_ball() const {
    std::optional<Sphere> best;
    for (const auto& c : constraints) {
        Sphere s;
        if (c.kind == ConstraintKind::InsideSphere) {
            s = {c.center, c.radius};
        } else if (c.kind == ConstraintKind::InsideSpindleTorus) {
            const SpindleFrame f = spindle_frame(c);
            s = {f.mid, f.h + f.radius};
        } else {
            continue;
        }
        if (!best || s.radius < best->radius) best = s;
    }
    return best;
}

bool ForbiddenRegion::contains(Point p, double slack) const {
    const double z = dot(p - center, normal);
    if (!(std::abs(z) < slab_half_height - slack)) return false;
    const double du = distance(p, upper().center) - sphere_radius;
    const double dl = distance(p, lower().center) - sphere_radius;
    return (du < -slack && dl > slack) || (dl < -slack && du > slack);
}

Sphere picking_region(Point circumcenter, double rho, double l, double alpha) {
    if (!(rho > alpha)) throw std::invalid_argument("picking region is empty: rho <= alpha");
    return {circumcenter, (rho - alpha) * l};
}

Constraint picking_constraint(Point circumcenter, double rho, double l, double alpha) {
    return Constraint::inside(picking_region(circumcenter, rho, l, alpha));
}

Sphere petal(Point p, Point q, double rho_star, Point hint) {
    if (rho_star < 0.5) throw std::invalid_argument("petal ratio must be at least 1/2");
    const double l = distance(p, q);
    if (!(l > 0.0)) throw std::invalid_argument("petal edge is degenerate");
    const Point mid = 0.5 * (p + q);
    Point n{-(q.y - p.y), q.x - p.x, 0.0};
    n = n / l;
    if (dot(hint - mid, n) < 0) n = -n;
    const double r = rho_star * l;
    const double off = std::sqrt(std::max(0.0, r * r - 0.25 * l * l));
    return {mid + off * n, r};
}

std::optional<Sphere> snow_globe(std::span<const Point> facet, Point fourth, double rho_star) {
    if (facet.size() != 3) throw std::invalid_argument("snow globe needs a triangular facet");
    const Sphere cc = circumsphere(facet);
    const double lt = std::min({distance(facet[0], facet[1]), distance(facet[1], facet[2]), distance(facet[0], facet[2])});
    if (cc.radius / lt > rho_star) return std::nullopt;
    Point n = normalized(cross(facet[1] - facet[0], facet[2] - facet[0]));
    if (dot(fourth - cc.center, n) < 0) n = -n;
    const double r = rho_star * lt;
    const double off = std::sqrt(std::max(0.0, r * r - cc.radius * cc.radius));
    return Sphere{cc.center + off * n, r};
}

ForbiddenRegion forbidden_region(std::span<const Point> base, double rho_star, double sigma_star) {
    if (base.size() != 3) throw std::invalid_argument("forbidden region needs a triangular base");
    const Sphere cc = circumsphere(base);
    ForbiddenRegion f;
    f.center = cc.center;
    f.base_radius = cc.radius;
    f.normal = normalized(cross(base[1] - base[0], base[2] - base[0]));
    f.l = std::min({distance(base[0], base[1]), distance(base[1], base[2]), distance(base[0], base[2])});
    f.area = triangle_area(base[0], base[1], base[2]);
    f.sphere_radius = rho_star * f.l;
    f.axis_offset = std::sqrt(std::max(0.0, f.sphere_radius * f.sphere_radius - cc.radius * cc.radius));
    f.slab_half_height = 3.0 * sigma_star * f.l * f.l * f.l / f.area;
    return f;
}

std::vector<ForbiddenRegion> enumerate_forbidden(std::span<const IndexedPoint> vertices, Sphere locale, double reach,
                                                 double max_base_side, double rho_star, double sigma_star,
                                                 std::span<const std::array<int, 3>> faces) {
    std::vector<IndexedPoint> near;
    for (const auto& v : vertices)
        if (distance(v.p, locale.center) <= reach) near.push_back(v);
    std::sort(near.begin(), near.end(), [](const IndexedPoint& a, const IndexedPoint& b) { return a.id < b.id; });

    std::set<std::array<int, 3>> allowed(faces.begin(), faces.end());
    std::vector<ForbiddenRegion> out;
    auto consider = [&](const IndexedPoint& a, const IndexedPoint& b, const IndexedPoint& c) {
        const std::array<Point, 3> pts{a.p, b.p, c.p};
        const double l = std::min({distance(a.p, b.p), distance(b.p, c.p), distance(a.p, c.p)});
        if (!(l < max_base_side)) return;
        if (triangle_area(a.p, b.p, c.p) <= 1e-14 * l * l) return;
        ForbiddenRegion f;
        try {
            f = forbidden_region(pts, rho_star, sigma_star);
        } catch (const std::exception&) {
            return;
        }
        const Sphere bb = f.bounding_ball();
        if (distance(bb.center, locale.center) > bb.radius + locale.radius) return;
        if (std::abs(dot(locale.center - f.center, f.normal)) > f.slab_half_height + locale.radius) return;
        f.base = {a.id, b.id, c.id};
        out.push_back(f);
    };
    if (!allowed.empty()) {
        std::map<int, Point> pos;
        for (const auto& v : near) pos[v.id] = v.p;
        for (const auto& t : allowed) {
            if (!pos.count(t[0]) || !pos.count(t[1]) || !pos.count(t[2])) continue;
            consider({t[0], pos[t[0]]}, {t[1], pos[t[1]]}, {t[2], pos[t[2]]});
        }
        return out;
    }
    const size_t n = near.size();
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j)
            for (size_t k = j + 1; k < n; ++k) consider(near[i], near[j], near[k]);
    return out;
}

bool encroaches_segment(Point p, Point a, Point b) { return dot(p - a, p - b) < 0.0; }

bool encroaches_facet(Point p, Point a, Point b, Point c) {
    const std::array<Point, 3> t{a, b, c};
    const Sphere s = circumsphere(t);
    return distance(p, s.center) < s.radius;
}

Constraint spindle_torus(Point a, Point b, double rho) {
    if (rho < std::sqrt(2.0)) throw std::invalid_argument("spindle torus needs rho >= sqrt(2)");
    return Constraint::spindle(a, b, rho);
}

}  // namespace globemesh
