#include <doctest.h>

#include <cmath>
#include <random>

#include "globemesh/quality.hpp"

using namespace globemesh;

namespace {
const Point kRegular[] = {{0, 0, 0}, {1, 0, 0}, {0.5, std::sqrt(3.0) / 2, 0}, {0.5, std::sqrt(3.0) / 6, std::sqrt(2.0 / 3.0)}};
}

TEST_CASE("measure examples") {
    const Point eq[] = {{0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2}};
    auto m = measure(eq);
    CHECK(m.rho == doctest::Approx(1 / std::sqrt(3.0)).epsilon(1e-12));
    CHECK(m.min_angle == doctest::Approx(M_PI / 3));

    m = measure(kRegular);
    CHECK(m.rho == doctest::Approx(std::sqrt(6.0) / 4).epsilon(1e-12));
    CHECK(m.sigma == doctest::Approx(std::sqrt(2.0) / 12).epsilon(1e-12));
    CHECK(m.min_dihedral == doctest::Approx(std::acos(1.0 / 3)).epsilon(1e-12));

    // Near-flat tetrahedron: volume 1e-6/6, shortest edge sqrt(1/2 + 1e-12).
    const Point flat[] = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0.5, 0.5, 1e-6}};
    m = measure(flat);
    const double l = std::sqrt(0.5 + 1e-12);
    CHECK(m.shortest_edge == doctest::Approx(l));
    CHECK(m.sigma == doctest::Approx((1e-6 / 6) / (l * l * l)).epsilon(1e-9));

    const Point degenerate[] = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}};
    CHECK_THROWS_AS(measure(degenerate), DegenerateSimplexError);
    CHECK(std::isinf(measure_or_degenerate(degenerate).rho));
}

TEST_CASE("classify") {
    auto cfg = RefinementConfig::defaults(3);
    cfg.rho_star = 2;
    cfg.sigma_star = 0.01;
    CHECK(classify(measure(kRegular), cfg) == Classification::Good);
    const Point needle[] = {{0, 0, 0}, {10, 0, 0}, {5, 0.3, 0}, {5, 0.1, 0.3}};
    const auto nm = measure(needle);
    CHECK(nm.rho > 2);
    CHECK(classify(nm, cfg) == Classification::LargeRho);
    // The near-flat tet from the measure examples has a huge circumradius: it is not a sliver.
    const Point flat[] = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0.5, 0.5, 1e-6}};
    CHECK(classify(measure(flat), cfg) == Classification::LargeRho);
    // A genuine sliver: four points near a common circle, alternating above and below.
    const double h = 0.01;
    const Point sliver[] = {{1, 0, h}, {-1, 0, h}, {0, 1, -h}, {0, -1, -h}};
    const auto sm = measure(sliver);
    CHECK(sm.rho <= 2);
    CHECK(sm.sigma < 0.01);
    CHECK(classify(sm, cfg) == Classification::Sliver);
    auto looser = cfg;
    looser.sigma_star = 0.1;
    CHECK(classify(sm, looser) == Classification::Sliver);
    auto cfg2 = RefinementConfig::defaults(2);
    const Point eq[] = {{0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2}};
    CHECK(classify(measure(eq), cfg2) == Classification::Good);
}

TEST_CASE("measure is scale covariant") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int i = 0; i < 200; ++i) {
        Point t[4];
        for (auto& p : t) p = {u(rng), u(rng), u(rng)};
        const auto m = measure_or_degenerate(t);
        if (m.degenerate) continue;
        const double s = 0.001 + 37.0 * std::abs(u(rng));
        Point ts[4];
        for (int k = 0; k < 4; ++k) ts[k] = s * t[k];
        const auto ms = measure(ts);
        CHECK(std::abs(ms.rho - m.rho) <= 1e-10 * m.rho);
        CHECK(std::abs(ms.sigma - m.sigma) <= 1e-10 * m.sigma);
        CHECK(ms.shortest_edge == doctest::Approx(s * m.shortest_edge).epsilon(1e-12));
    }
}

TEST_CASE("smallest_facet") {
    const int ids[] = {10, 11, 12, 13};
    // Shortest edge 0-1, the next adjacent edge 0-3.
    const Point t[] = {{0, 0, 0}, {0.5, 0, 0}, {0, 3, 0}, {0, 0, 0.8}};
    auto fc = smallest_facet(t, ids);
    CHECK(fc.facet == std::array<int, 3>{0, 1, 3});
    CHECK(fc.opposite == 2);
    CHECK(fc.other_facet == std::array<int, 3>{0, 1, 2});

    fc = smallest_facet(kRegular, ids);
    CHECK(fc.facet == std::array<int, 3>{0, 1, 2});
    CHECK(fc.edge == std::array<int, 2>{0, 1});

    // Unit edge with all other edges equal to 2: lexicographic tie-break.
    const double y = std::sqrt(4 - 0.25);
    const Point iso[] = {{0, 0, 0}, {1, 0, 0}, {0.5, y, 0}, {0.5, y / 3, std::sqrt(4 - 0.25 - y * y / 9)}};
    fc = smallest_facet(iso, ids);
    CHECK(fc.edge == std::array<int, 2>{0, 1});
    CHECK(fc.facet == std::array<int, 3>{0, 1, 2});

    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int i = 0; i < 500; ++i) {
        Point r[4];
        for (auto& p : r) p = {u(rng), u(rng), u(rng)};
        const auto f = smallest_facet(r, ids);
        const auto e = shortest_edge(r, ids);
        CHECK(std::count(f.facet.begin(), f.facet.end(), e[0]) == 1);
        CHECK(std::count(f.facet.begin(), f.facet.end(), e[1]) == 1);
    }
}

TEST_CASE("queue_key") {
    CHECK(queue_key(0.4, std::nullopt, 1.25) == 0.4);
    CHECK(queue_key(0.4, 1.0, 1.25) == doctest::Approx(0.4));
    CHECK(queue_key(0.9, 0.5, 1.25) == doctest::Approx(0.4));
}

TEST_CASE("configuration validation") {
    auto c = RefinementConfig::defaults(3);
    CHECK_NOTHROW(validate(c));
    CHECK(c.beta() == doctest::Approx(4.0));
    c.alpha = 3;
    CHECK_THROWS(validate(c));
    c = RefinementConfig::defaults(2);
    CHECK_NOTHROW(validate(c));
    CHECK(c.rho_star == doctest::Approx(1.118).epsilon(1e-3));
    c.placement = PlacementMode::Angle;
    c.insertion = InsertionMode::Multi;
    CHECK_THROWS(validate(c));
}
