#include <doctest.h>

#include <cmath>

#include "globemesh/analysis.hpp"
#include "globemesh/refiner.hpp"

using namespace globemesh;

namespace {

Plc unit_square(std::vector<Point> extra = {}) {
    Plc p;
    p.dim = 2;
    p.vertices = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    p.segments = {{{0, 1}}, {{1, 2}}, {{2, 3}}, {{3, 0}}};
    for (Point q : extra) p.vertices.push_back(q);
    return p;
}

Plc unit_cube(std::vector<Point> extra = {}) {
    Plc p;
    p.dim = 3;
    for (double z : {0.0, 1.0})
        for (double y : {0.0, 1.0})
            for (double x : {0.0, 1.0}) p.vertices.push_back({x, y, z});
    p.facets = {{{0, 1, 3, 2}, {}}, {{4, 5, 7, 6}, {}}, {{0, 1, 5, 4}, {}},
                {{2, 3, 7, 6}, {}}, {{0, 2, 6, 4}, {}}, {{1, 3, 7, 5}, {}}};
    for (Point q : extra) p.vertices.push_back(q);
    return p;
}

const std::vector<Point> kScatter2 = {{0.5, 0.5}, {0.53, 0.5}, {0.3, 0.72}, {0.8, 0.2}};

void check_quality(const RefineResult& r, const RefinementConfig& cfg) {
    const auto q = quality_summary(r.mesh, cfg);
    CHECK(q.above_rho_star == 0);
    CHECK(q.max_rho <= cfg.rho_star * (1 + 1e-9));
    CHECK(q.slivers == q.slivers_from_fallback);
    CHECK(verify_delaunay(r.mesh).empty());
    CHECK(conformity_violations(r.mesh, r.plc).empty());
}

}  // namespace

TEST_CASE("front split placement") {
    auto fs = front_split_point({0, 0}, {1, 0}, 1.0, 1.2, 0.5);
    CHECK(fs.front);
    CHECK(fs.point.x == doctest::Approx(0.6));
    CHECK(fs.point.y == 0.0);
    CHECK(fs.radius == doctest::Approx(0.6));

    // gamma * l_eff beyond l_mid: the midpoint, as in classic refinement.
    fs = front_split_point({0, 0}, {1, 0}, 1.0, 1.2, 1.0);
    CHECK_FALSE(fs.front);
    CHECK(fs.point == Point{1, 0});
    CHECK(fs.radius == 1.0);

    // Facet: toward the circumcenter, and inside the triangle.
    const Point a{0, 0, 0}, b{2, 0, 0}, c{0.8, 1.5, 0};
    const Point t[] = {a, b, c};
    const Sphere cc = circumsphere(t);
    fs = front_split_point(a, cc.center, cc.radius, 1.2, 0.3);
    REQUIRE(fs.front);
    CHECK(distance(fs.point, a) == doctest::Approx(0.36));
    const double area = triangle_area(a, b, c);
    const double sum = triangle_area(fs.point, b, c) + triangle_area(a, fs.point, c) + triangle_area(a, b, fs.point);
    CHECK(sum == doctest::Approx(area));
}

TEST_CASE("unit square needs no Steiner points") {
    const auto cfg = RefinementConfig::defaults(2);
    const auto r = refine(unit_square(), cfg);
    CHECK(r.log.insertions() == 0);
    CHECK(r.mesh.cells.size() == 2);
    CHECK(quality_summary(r.mesh, cfg).min_angle_deg >= 26.5);
}

TEST_CASE("2D refinement meets the angle bound and audits") {
    for (auto placement : {PlacementMode::Distance, PlacementMode::Angle}) {
        auto cfg = RefinementConfig::defaults(2);
        cfg.placement = placement;
        const auto r = refine(unit_square(kScatter2), cfg);
        CHECK(r.log.insertions() > 0);
        check_quality(r, cfg);
        CHECK(quality_summary(r.mesh, cfg).min_angle_deg >= 26.5);
        const auto fa = front_audit(r.log, cfg, &r.plc);
        CHECK(fa.pass());
        // Lemma-style bounds on every quality insertion.
        for (const auto& e : r.log.events)
            if (e.kind == EventKind::Steiner) {
                CHECK(e.min_dist >= cfg.alpha * e.l_min * (1 - 1e-9));
                CHECK(e.edge_dist <= cfg.beta() * e.l_min * (1 + 1e-9));
            }
    }
}

TEST_CASE("classic boundary handling only inserts midpoints") {
    auto cfg = RefinementConfig::defaults(2);
    cfg.classic_boundary = true;
    const auto r = refine(unit_square(kScatter2), cfg);
    check_quality(r, cfg);
    CHECK(r.log.count(EventKind::BoundaryFront) == 0);
}

TEST_CASE("unit cube, 3D defaults") {
    const auto cfg = RefinementConfig::defaults(3);
    const auto r = refine(unit_cube(), cfg);
    check_quality(r, cfg);
    CHECK(quality_summary(r.mesh, cfg).max_rho <= 2.0);
}

TEST_CASE("cube with free vertices, SINGLE and MULTI") {
    for (auto mode : {InsertionMode::Single, InsertionMode::Multi}) {
        auto cfg = RefinementConfig::defaults(3);
        cfg.insertion = mode;
        const auto r = refine(unit_cube({{0.5, 0.5, 0.5}, {0.58, 0.5, 0.5}, {0.3, 0.7, 0.4}}), cfg);
        check_quality(r, cfg);
        const auto fa = front_audit(r.log, cfg, &r.plc);
        CHECK(fa.pass());
        if (mode == InsertionMode::Multi) {
            CHECK_FALSE(r.log.rounds.empty());
            for (const auto& h : r.log.rounds)
                for (size_t i = 1; i < h.history.size(); ++i) CHECK(h.history[i] >= h.history[i - 1] * (1 - 1e-12));
        }
    }
}

TEST_CASE("replay reproduces the mesh") {
    for (int dim : {2, 3}) {
        const auto cfg = RefinementConfig::defaults(dim);
        const Plc plc = dim == 2 ? unit_square(kScatter2) : unit_cube({{0.5, 0.5, 0.5}, {0.6, 0.5, 0.5}});
        const auto r = refine(plc, cfg);
        CHECK(same_triangulation(replay(r.plc, r.log), r.mesh));
    }
}

TEST_CASE("runs are deterministic") {
    auto cfg = RefinementConfig::defaults(2);
    cfg.insertion = InsertionMode::Multi;
    const auto a = refine(unit_square(kScatter2), cfg);
    const auto b = refine(unit_square(kScatter2), cfg);
    REQUIRE(a.log.events.size() == b.log.events.size());
    for (size_t i = 0; i < a.log.events.size(); ++i) {
        CHECK(a.log.events[i].point == b.log.events[i].point);
        CHECK(a.log.events[i].kind == b.log.events[i].kind);
    }
    CHECK(a.mesh.points == b.mesh.points);
}

TEST_CASE("FIFO ordering also terminates with quality") {
    auto cfg = RefinementConfig::defaults(2);
    cfg.ordering = Ordering::Fifo;
    const auto r = refine(unit_square(kScatter2), cfg);
    check_quality(r, cfg);
}

TEST_CASE("insertion cap aborts with the log") {
    auto cfg = RefinementConfig::defaults(2);
    cfg.max_insertions = 3;
    try {
        refine(unit_square(kScatter2), cfg);
        FAIL("expected the cap to trigger");
    } catch (const InsertionCapError& e) {
        CHECK(e.log().insertions() >= 3);
    }
}

TEST_CASE("configuration and input errors") {
    auto cfg = RefinementConfig::defaults(2);
    cfg.rho_star = 2;
    cfg.alpha = cfg.gamma = 3;
    CHECK_THROWS_AS(refine(unit_square(), cfg), std::invalid_argument);

    // PLC dimension must match the configuration.
    CHECK_THROWS_AS(refine(unit_cube(), RefinementConfig::defaults(2)), std::invalid_argument);

    Plc bad = unit_square();
    bad.segments.push_back({{0, 7}});
    CHECK_THROWS_AS(refine(bad, RefinementConfig::defaults(2)), ValidationError);
}

TEST_CASE("event kinds round-trip through strings") {
    for (auto k : {EventKind::Steiner, EventKind::BoundaryMidpoint, EventKind::BoundaryFront, EventKind::Delete,
                   EventKind::FallbackSliver, EventKind::Spindle, EventKind::HeuristicCaseC})
        CHECK(event_kind_from_string(to_string(k)) == k);
    CHECK_FALSE(event_kind_from_string("NOPE").has_value());
}
