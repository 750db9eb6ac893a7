#include "globemesh/quality.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "globemesh/predicates.hpp"

namespace globemesh {

const char* to_string(PlacementMode m) {
    switch (m) {
        case PlacementMode::Distance: return "distance";
        case PlacementMode::Angle: return "angle";
        case PlacementMode::Circumcenter: return "circumcenter";
    }
    return "?";
}
const char* to_string(InsertionMode m) { return m == InsertionMode::Single ? "single" : "multi"; }
const char* to_string(Ordering o) { return o == Ordering::ShortestFirst ? "shortest-first" : "fifo"; }
const char* to_string(Classification c) {
    switch (c) {
        case Classification::Good: return "good";
        case Classification::LargeRho: return "large_rho";
        case Classification::Sliver: return "sliver";
    }
    return "?";
}

RefinementConfig RefinementConfig::defaults(int dim) {
    RefinementConfig c;
    c.dim = dim;
    if (dim == 2) {
        c.rho_star = std::sqrt(5.0) / 2.0;  // min angle arcsin(1/sqrt 5)
        c.alpha = 1.05;
    } else {
        c.rho_star = 2.0;
        c.alpha = 1.2;
    }
    c.gamma = c.alpha;
    c.sigma_star = 0.01;
    c.sliver_length_factor = c.rho_star;
    return c;
}

void validate(const RefinementConfig& c) {
    auto fail = [](const std::string& m) { throw std::invalid_argument("invalid configuration: " + m); };
    if (c.dim != 2 && c.dim != 3) fail("dimension must be 2 or 3");
    if (!(c.rho_star > 1.0)) fail("rho* must exceed 1");
    if (!(c.alpha > 1.0 && c.alpha < c.rho_star)) fail("alpha must satisfy 1 < alpha < rho*");
    if (!(c.sigma_star > 0.0)) fail("sigma* must be positive");
    if (!(c.gamma >= c.alpha && c.gamma <= c.beta())) fail("gamma must satisfy alpha <= gamma <= beta = 2 rho*");
    if (c.dim == 3 && c.placement != PlacementMode::Circumcenter && c.rho_star < 2.0)
        fail("3D snow-globe placement needs rho* >= 2");
    if (c.placement == PlacementMode::Angle && c.insertion == InsertionMode::Multi)
        fail("angle placement is only available with single insertion");
    if (c.max_insertions <= 0) fail("max insertions must be positive");
    if (!(c.sliver_length_factor > 0.0)) fail("sliver length factor must be positive");
    if (c.batch_cap < 1) fail("batch cap must be positive");
}

QualityMeasures measure(std::span<const Point> s) {
    auto m = measure_or_degenerate(s);
    if (m.degenerate) throw DegenerateSimplexError();
    return m;
}

QualityMeasures measure_or_degenerate(std::span<const Point> s) {
    if (s.size() != 3 && s.size() != 4) throw std::invalid_argument("measure expects a triangle or tetrahedron");
    QualityMeasures m;
    const size_t n = s.size();
    double lmin = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j) lmin = std::min(lmin, distance(s[i], s[j]));
    m.shortest_edge = lmin;
    if (orient(s) == Sign::Zero || !(lmin > 0.0)) {
        m.degenerate = true;
        m.rho = std::numeric_limits<double>::infinity();
        return m;
    }
    Sphere cs;
    try {
        cs = circumsphere(s);
    } catch (const std::exception&) {
        m.degenerate = true;
        m.rho = std::numeric_limits<double>::infinity();
        return m;
    }
    m.circumcenter = cs.center;
    m.circumradius = cs.radius;
    m.rho = cs.radius / lmin;
    if (n == 3) {
        double amin = std::numbers::pi;
        for (int i = 0; i < 3; ++i) {
            const Point u = s[(i + 1) % 3] - s[i], v = s[(i + 2) % 3] - s[i];
            amin = std::min(amin, std::atan2(norm(cross(u, v)), dot(u, v)));
        }
        m.min_angle = amin;
    } else {
        m.sigma = std::abs(tet_volume(s[0], s[1], s[2], s[3])) / (lmin * lmin * lmin);
        double dmin = std::numbers::pi;
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j) {
                int k = 0;
                while (k == i || k == j) ++k;
                int l = 6 - i - j - k;
                const Point e = normalized(s[j] - s[i]);
                Point u = s[k] - s[i], v = s[l] - s[i];
                u -= dot(u, e) * e;
                v -= dot(v, e) * e;
                dmin = std::min(dmin, std::atan2(norm(cross(u, v)), dot(u, v)));
            }
        m.min_dihedral = dmin;
    }
    return m;
}

Classification classify(const QualityMeasures& m, const RefinementConfig& cfg) {
    if (m.degenerate || m.rho > cfg.rho_star) return Classification::LargeRho;
    if (cfg.dim == 3 && m.sigma < cfg.sigma_star) return Classification::Sliver;
    return Classification::Good;
}

namespace {

bool shorter(double a, double b) { return a < b * (1.0 - 1e-12); }

}  // namespace

std::array<int, 2> shortest_edge(std::span<const Point> pts, std::span<const int> ids) {
    const int n = static_cast<int>(pts.size());
    std::array<int, 2> best{-1, -1};
    double bl = 0.0;
    auto key = [&](int i, int j) { return std::array<int, 2>{std::min(ids[i], ids[j]), std::max(ids[i], ids[j])}; };
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double l = distance(pts[i], pts[j]);
            if (best[0] < 0 || shorter(l, bl) || (!shorter(bl, l) && key(i, j) < key(best[0], best[1]))) {
                best = ids[i] < ids[j] ? std::array<int, 2>{i, j} : std::array<int, 2>{j, i};
                bl = l;
            }
        }
    return best;
}

FacetChoice smallest_facet(std::span<const Point> tet, std::span<const int> ids) {
    if (tet.size() != 4) throw std::invalid_argument("smallest_facet expects a tetrahedron");
    const auto e = shortest_edge(tet, ids);
    int others[2], n = 0;
    for (int i = 0; i < 4; ++i)
        if (i != e[0] && i != e[1]) others[n++] = i;
    auto adjacent = [&](int c) { return std::min(distance(tet[e[0]], tet[c]), distance(tet[e[1]], tet[c])); };
    auto sorted_facet = [&](int c) {
        std::array<int, 3> f{e[0], e[1], c};
        std::sort(f.begin(), f.end(), [&](int a, int b) { return ids[a] < ids[b]; });
        return f;
    };
    auto id_key = [&](const std::array<int, 3>& f) { return std::array<int, 3>{ids[f[0]], ids[f[1]], ids[f[2]]}; };
    const double l0 = adjacent(others[0]), l1 = adjacent(others[1]);
    int pick = 0;
    if (shorter(l1, l0)) pick = 1;
    else if (!shorter(l0, l1) && id_key(sorted_facet(others[1])) < id_key(sorted_facet(others[0]))) pick = 1;
    FacetChoice fc;
    fc.edge = e;
    fc.facet = sorted_facet(others[pick]);
    fc.opposite = others[1 - pick];
    fc.other_facet = sorted_facet(others[1 - pick]);
    fc.other_opposite = others[pick];
    return fc;
}

double queue_key(double l_min, std::optional<double> l_mid, double alpha) {
    if (!l_mid) return l_min;
    return std::min(l_min, *l_mid / alpha);
}

}  // namespace globemesh
