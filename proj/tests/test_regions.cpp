#include <doctest.h>

#include <cmath>
#include <random>

#include "globemesh/quality.hpp"
#include "globemesh/regions.hpp"

using namespace globemesh;

namespace {
const double kS3 = std::sqrt(3.0);
const Point kEq[] = {{0, 0, 0}, {1, 0, 0}, {0.5, kS3 / 2, 0}};
const Point kEqCenter{0.5, kS3 / 6, 0};
}  // namespace

TEST_CASE("picking region") {
    const auto s = picking_region({1, 2, 3}, 3, 2, 1.5);
    CHECK(s.radius == doctest::Approx(3.0));
    CHECK(picking_region({}, 2, 1, 1).radius == doctest::Approx(1.0));
    CHECK_THROWS(picking_region({}, 1.5, 1, 1.5));
}

TEST_CASE("picking region lies inside the circumsphere") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int i = 0; i < 200; ++i) {
        const Point t[] = {{u(rng), u(rng), u(rng)}, {u(rng), u(rng), u(rng)}, {u(rng), u(rng), u(rng)}, {u(rng), u(rng), u(rng)}};
        const auto m = measure_or_degenerate(t);
        if (m.degenerate || m.rho <= 1.2) continue;
        const auto pr = picking_region(m.circumcenter, m.rho, m.shortest_edge, 1.2);
        for (int k = 0; k < 20; ++k) {
            Point d{u(rng), u(rng), u(rng)};
            if (norm(d) == 0) continue;
            const Point p = pr.center + (pr.radius * std::abs(u(rng))) * normalized(d);
            CHECK(distance(p, m.circumcenter) <= m.circumradius * (1 + 1e-12));
            CHECK(distance(p, t[0]) >= 1.2 * m.shortest_edge * (1 - 1e-12));
        }
    }
}

TEST_CASE("petal") {
    auto p = petal({0, 0}, {1, 0}, 1.0, {0.5, 5});
    CHECK(p.center.x == doctest::Approx(0.5));
    CHECK(p.center.y == doctest::Approx(std::sqrt(0.75)));
    CHECK(p.radius == doctest::Approx(1.0));
    p = petal({0, 0}, {1, 0}, 1.0, {0.5, -5});
    CHECK(p.center.y == doctest::Approx(-std::sqrt(0.75)));
    p = petal({0, 0}, {1, 0}, 0.5, {0.5, 1});
    CHECK(p.center.y == doctest::Approx(0.0));
    CHECK(p.radius == doctest::Approx(0.5));
    CHECK_THROWS(petal({0, 0}, {1, 0}, 0.4, {0.5, 1}));
}

TEST_CASE("snow globe") {
    auto g = snow_globe(kEq, {0.5, 0.3, 1}, 2.0);
    REQUIRE(g.has_value());
    CHECK(g->radius == doctest::Approx(2.0));
    CHECK(g->center.z == doctest::Approx(std::sqrt(4 - 1.0 / 3)).epsilon(1e-12));
    for (const Point& v : kEq) CHECK(std::abs(distance(v, g->center) - g->radius) <= 1e-10);
    auto below = snow_globe(kEq, {0.5, 0.3, -1}, 2.0);
    CHECK(below->center.z < 0);
    // Facet with Y/l = 3: isoceles with base l and huge apex angle.
    const double l = 1.0;
    const double Y = 3.0;
    const double half = 0.5 * l;
    const double yc = -std::sqrt(Y * Y - half * half);
    const Point flat[] = {{-half, 0, 0}, {half, 0, 0}, {2.9, yc + std::sqrt(Y * Y - 2.9 * 2.9), 0}};
    const auto m = measure(std::span<const Point>(flat, 3));
    CHECK(m.rho > 2.0);
    CHECK_FALSE(snow_globe(flat, {0, 0, 1}, 2.0).has_value());
    // Y = rho* l exactly: diametral sphere.
    const double rs = 1.0 / kS3;
    auto eqg = snow_globe(kEq, {0.5, 0.3, 1}, rs + 1e-15);
    REQUIRE(eqg.has_value());
    CHECK(distance(eqg->center, kEqCenter) <= 1e-6);
}

TEST_CASE("forbidden region") {
    const auto f = forbidden_region(kEq, 2.0, 0.01);
    CHECK(f.slab_half_height == doctest::Approx(0.03 / (kS3 / 4)).epsilon(1e-12));
    CHECK(f.slab_half_height == doctest::Approx(0.069282).epsilon(1e-5));
    for (const Sphere& s : {f.upper(), f.lower()})
        for (const Point& v : kEq) CHECK(std::abs(distance(v, s.center) - s.radius) <= 1e-10);
    // Above the centroid the circumradius is large: outside the hourglass.
    CHECK_FALSE(f.contains(kEqCenter + Point{0, 0, 0.05}));
    CHECK_FALSE(f.contains(kEqCenter + Point{0, 0, 1.0}));
    // Just above the circumcircle rim the tet is a sliver.
    const Point rim = kEqCenter + (1.0 / kS3) * Point{0, -1, 0} + Point{0, 0, 0.01};
    CHECK(f.contains(rim));
    const Point t[] = {kEq[0], kEq[1], kEq[2], rim};
    const auto m = measure(t);
    CHECK(m.rho <= 2.0);
    CHECK(m.sigma < 0.01);
}

TEST_CASE("forbidden membership implies a sliver-range tetrahedron") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-1, 1);
    int members = 0;
    for (int b = 0; b < 40; ++b) {
        const Point base[] = {{u(rng), u(rng), 0.1 * u(rng)}, {u(rng), u(rng), 0.1 * u(rng)}, {u(rng), u(rng), 0.1 * u(rng)}};
        if (triangle_area(base[0], base[1], base[2]) < 0.05) continue;
        const auto f = forbidden_region(base, 2.0, 0.01);
        const auto bb = f.bounding_ball();
        int found = 0;
        for (int k = 0; k < 200000 && found < 1000; ++k) {
            // Sample near the base plane where the region lives.
            Point d{u(rng), u(rng), 0};
            const Point in_plane = d.x * normalized(base[1] - base[0]) + d.y * normalized(cross(f.normal, base[1] - base[0]));
            const Point p = f.center + bb.radius * in_plane + (f.slab_half_height * u(rng)) * f.normal;
            if (!f.contains(p)) continue;
            ++found;
            const Point t[] = {base[0], base[1], base[2], p};
            const auto m = measure_or_degenerate(t);
            const double R = m.circumradius;
            const double V = m.sigma * std::pow(m.shortest_edge, 3);
            CHECK(R <= 2.0 * f.l * (1 + 1e-9));
            CHECK(V < 0.01 * std::pow(f.l, 3) * (1 + 1e-9));
            if (std::abs(m.shortest_edge - f.l) <= 1e-12 * f.l) CHECK(classify(m, [] {
                auto c = RefinementConfig::defaults(3);
                return c;
            }()) == Classification::Sliver);
        }
        members += found;
    }
    CHECK(members > 1000);
}

TEST_CASE("enumerate_forbidden matches brute force") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<IndexedPoint> cluster;
    for (int i = 0; i < 5; ++i) cluster.push_back({i * 3 + 1, {u(rng), u(rng), 0.2 * u(rng)}});
    const Sphere locale{{0, 0, 0}, 0.3};
    const auto list = enumerate_forbidden(cluster, locale, 100.0, 10.0, 2.0, 0.01);
    std::vector<std::array<int, 3>> brute;
    for (int i = 0; i < 5; ++i)
        for (int j = i + 1; j < 5; ++j)
            for (int k = j + 1; k < 5; ++k) {
                const Point b[] = {cluster[i].p, cluster[j].p, cluster[k].p};
                const auto f = forbidden_region(b, 2.0, 0.01);
                const auto bb = f.bounding_ball();
                if (distance(bb.center, locale.center) > bb.radius + locale.radius) continue;
                if (std::abs(dot(locale.center - f.center, f.normal)) > f.slab_half_height + locale.radius) continue;
                brute.push_back({cluster[i].id, cluster[j].id, cluster[k].id});
            }
    REQUIRE(list.size() == brute.size());
    for (size_t i = 0; i < list.size(); ++i) CHECK(list[i].base == brute[i]);
    CHECK(enumerate_forbidden({}, locale, 1.0, 1.0, 2.0, 0.01).empty());
    // A far triangle never meets the locale.
    const std::vector<IndexedPoint> far{{0, {100, 0, 0}}, {1, {101, 0, 0}}, {2, {100, 1, 0}}};
    CHECK(enumerate_forbidden(far, locale, 1000.0, 10.0, 2.0, 0.01).empty());
}

TEST_CASE("encroachment") {
    CHECK(encroaches_segment({1, 0.5}, {0, 0}, {2, 0}));
    CHECK_FALSE(encroaches_segment({1, 1.5}, {0, 0}, {2, 0}));
    CHECK_FALSE(encroaches_segment({1, 1.0}, {0, 0}, {2, 0}));
    CHECK(encroaches_facet(kEqCenter + Point{0, 0, 0.1}, kEq[0], kEq[1], kEq[2]));
    CHECK_FALSE(encroaches_facet(kEqCenter + Point{0, 0, 0.6}, kEq[0], kEq[1], kEq[2]));
}

TEST_CASE("spindle torus") {
    const Point a{0, 0, 0}, b{1, 0, 0};
    const auto t = spindle_torus(a, b, 1.5);
    const auto pet = petal(a, b, 1.5, {0.5, 1, 0});
    // A point inside the generating petal.
    CHECK(t.contains({0.5, 0.5, 0}));
    CHECK(t.contains({0.5, 0, 0.5}));
    CHECK_FALSE(t.contains({3.0, 0, 0}));
    CHECK_THROWS(spindle_torus(a, b, 1.2));
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-4, 4);
    for (int i = 0; i < 1000; ++i) {
        const Point q{u(rng), u(rng), u(rng)};
        const double x = q.x, r = std::hypot(q.y, q.z);
        const bool in_petal = distance({x, r, 0}, pet.center) <= pet.radius;
        CHECK(t.contains(q) == in_petal);
    }
}

TEST_CASE("region boundaries sample at the threshold") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-1, 1);
    const auto g = *snow_globe(kEq, {0.5, 0.3, 1}, 2.0);
    const auto c = Constraint::inside(g);
    const auto t = spindle_torus({0, 0, 0}, {1, 0, 0}, 2.0);
    const auto fr = spindle_frame(t);
    for (int i = 0; i < 1000; ++i) {
        Point d{u(rng), u(rng), u(rng)};
        if (norm(d) < 1e-3) continue;
        d = normalized(d);
        CHECK(std::abs(c.violation(g.center + g.radius * d)) <= 1e-8);
        const double th = M_PI * u(rng), phi = M_PI * u(rng);
        const double r = fr.h + fr.radius * std::sin(th);
        if (r < 0) continue;
        const Point p = fr.mid + (fr.radius * std::cos(th)) * fr.axis + r * Point{0, std::cos(phi), std::sin(phi)};
        CHECK(std::abs(t.violation(p)) <= 1e-8);
    }
}
