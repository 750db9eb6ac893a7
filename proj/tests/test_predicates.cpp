#include <doctest.h>

#include <cmath>
#include <random>

#include "globemesh/predicates.hpp"
#include "oracle.hpp"

using namespace globemesh;

TEST_CASE("orient basic cases") {
    const Point tri[] = {{0, 0}, {1, 0}, {0, 1}};
    CHECK(orient(tri) == Sign::Positive);
    const Point line[] = {{0, 0}, {1, 0}, {2, 0}};
    CHECK(orient(line) == Sign::Zero);
    const Point tet[] = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    CHECK(orient(tet) == Sign::Positive);
    const Point bad[] = {{0, 0}, {NAN, 0}, {0, 1}};
    CHECK_THROWS(orient(bad));
}

TEST_CASE("in_circumsphere basic cases") {
    const Point tri[] = {{0, 0}, {1, 0}, {0, 1}};
    CHECK(in_circumsphere(tri, {0.5, 0.5}) == Sign::Positive);
    CHECK(in_circumsphere(tri, {2, 2}) == Sign::Negative);
    CHECK(in_circumsphere(tri, {1, 1}) == Sign::Zero);
    CHECK(oracle::incircle(tri[0], tri[1], tri[2], {1, 1}) == 0);
    const Point cw[] = {{0, 0}, {0, 1}, {1, 0}};
    CHECK(in_circumsphere(cw, {0.5, 0.5}) == Sign::Positive);
    const Point flat[] = {{0, 0}, {1, 0}, {2, 0}};
    CHECK_THROWS(in_circumsphere(flat, {0.5, 0.5}));

    const Point tet[] = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    CHECK(in_circumsphere(tet, {0.25, 0.25, 0.25}) == Sign::Positive);
    CHECK(in_circumsphere(tet, {1, 1, 1}) == Sign::Zero);
    CHECK(in_circumsphere(tet, {2, 2, 2}) == Sign::Negative);
    CHECK(oracle::insphere(tet[0], tet[1], tet[2], tet[3], {0.25, 0.25, 0.25}) == 1);
}

TEST_CASE("circumsphere examples") {
    const Point tri[] = {{0, 0}, {1, 0}, {0, 1}};
    auto s = circumsphere(tri);
    CHECK(s.center.x == doctest::Approx(0.5));
    CHECK(s.center.y == doctest::Approx(0.5));
    CHECK(s.radius == doctest::Approx(std::sqrt(0.5)));

    const Point reg[] = {{0, 0, 0}, {1, 0, 0}, {0.5, std::sqrt(3.0) / 2, 0}, {0.5, std::sqrt(3.0) / 6, std::sqrt(2.0 / 3.0)}};
    s = circumsphere(reg);
    CHECK(s.radius == doctest::Approx(std::sqrt(6.0) / 4).epsilon(1e-12));
    for (const Point& p : reg) CHECK(std::abs(distance(p, s.center) - s.radius) / s.radius < 1e-10);

    const Point seg[] = {{0, 0}, {2, 0}};
    s = circumsphere(seg);
    CHECK(s.center.x == doctest::Approx(1.0));
    CHECK(s.radius == doctest::Approx(1.0));

    const Point facet[] = {{0, 0, 1}, {1, 0, 1}, {0, 1, 1}};
    s = circumsphere(facet);
    CHECK(s.center.z == doctest::Approx(1.0));
    CHECK(s.radius == doctest::Approx(std::sqrt(0.5)));
    const Point deg[] = {{0, 0}, {1, 0}, {2, 0}};
    CHECK_THROWS(circumsphere(deg));
}

TEST_CASE("circumsphere equidistance on random inputs") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-10, 10);
    double worst = 0;
    for (int i = 0; i < 10000; ++i) {
        const int n = 2 + i % 3;
        std::vector<Point> pts(n);
        for (auto& p : pts) p = {u(rng), u(rng), n == 3 && i % 2 ? 0.0 : u(rng)};
        Sphere s;
        try {
            s = circumsphere(pts);
        } catch (const GeometryError&) {
            continue;
        }
        for (const Point& p : pts) worst = std::max(worst, std::abs(distance(p, s.center) - s.radius) / s.radius);
    }
    CHECK(worst <= 1e-10);
}

namespace {

// Near-degenerate generator: exact lattice configurations nudged by a few ulps.
Point nudge(Point p, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> k(-3, 3);
    for (int i = 0; i < 3; ++i) {
        int steps = k(rng);
        while (steps > 0) { p[i] = std::nextafter(p[i], INFINITY); --steps; }
        while (steps < 0) { p[i] = std::nextafter(p[i], -INFINITY); ++steps; }
    }
    return p;
}

}  // namespace

TEST_CASE("predicates agree with rational oracle on near-degenerate inputs") {
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> u(-1, 1);
    std::uniform_real_distribution<double> t(-2, 3);
    int mismatches = 0, zeros = 0;
    const int n = 25000;
    for (int i = 0; i < n; ++i) {
        // orient2d: c nearly on line ab
        Point a{u(rng), u(rng)}, b{u(rng), u(rng)};
        const double s = t(rng);
        Point c = nudge(a + s * (b - a), rng);
        c.z = 0;
        const int o = oracle::orient2d(a, b, c);
        zeros += o == 0;
        mismatches += to_int(orient2d(a, b, c)) != o;

        // orient3d: d nearly on plane abc
        Point a3{u(rng), u(rng), u(rng)}, b3{u(rng), u(rng), u(rng)}, c3{u(rng), u(rng), u(rng)};
        const Point d3 = nudge(a3 + t(rng) * (b3 - a3) + t(rng) * (c3 - a3), rng);
        mismatches += to_int(orient3d(a3, b3, c3, d3)) != oracle::orient3d(a3, b3, c3, d3);

        // incircle: d nearly on the circle through lattice points
        const double r = 0.5 + std::abs(u(rng));
        Point p2[4];
        for (int k = 0; k < 4; ++k) {
            const double ang = 6.283185307179586 * u(rng);
            p2[k] = nudge({r * std::cos(ang), r * std::sin(ang)}, rng);
            p2[k].z = 0;
        }
        if (oracle::orient2d(p2[0], p2[1], p2[2]) != 0)
            mismatches += to_int(incircle(p2[0], p2[1], p2[2], p2[3])) != oracle::incircle(p2[0], p2[1], p2[2], p2[3]);

        // insphere: e nearly on the sphere
        Point p3[5];
        for (int k = 0; k < 5; ++k) {
            Point v{u(rng), u(rng), u(rng)};
            v = v / norm(v) * r;
            p3[k] = nudge(v, rng);
        }
        if (oracle::orient3d(p3[0], p3[1], p3[2], p3[3]) != 0)
            mismatches += to_int(insphere(p3[0], p3[1], p3[2], p3[3], p3[4])) != oracle::insphere(p3[0], p3[1], p3[2], p3[3], p3[4]);
    }
    // Exactly representable degenerate cases, e.g. integer lattices.
    for (int i = 0; i < 1000; ++i) {
        std::uniform_int_distribution<int> g(-50, 50);
        const Point a{double(g(rng)), double(g(rng))}, d{double(g(rng)), double(g(rng))};
        const Point b = a + d, c = a + 2.0 * d;
        CHECK(orient2d(a, b, c) == Sign::Zero);
        const Point sq[] = {{0, 0}, {double(g(rng) + 100), 0}, {0, double(g(rng) + 100)}};
        CHECK(incircle(sq[0], sq[1], sq[2], {sq[1].x, sq[2].y}) == Sign::Zero);
    }
    CHECK(mismatches == 0);
    MESSAGE("near-degenerate configurations: ", 4 * n, ", exact zeros among orient2d: ", zeros);
}
