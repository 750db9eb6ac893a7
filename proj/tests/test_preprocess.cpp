#include <doctest.h>

#include "globemesh/refiner.hpp"

using namespace globemesh;

namespace {

Plc square_with(Point p) {
    Plc plc;
    plc.dim = 2;
    plc.vertices = {{0, 0}, {1, 0}, {1, 1}, {0, 1}, p};
    plc.segments = {{{0, 1}}, {{1, 2}}, {{2, 3}}, {{3, 0}}};
    return plc;
}

}  // namespace

TEST_CASE("projection kept when far from the endpoints") {
    const Plc plc = square_with({0.3, 0.1});
    // (0.3, 0.1) sits on the boundary of the left segment's diametral disk too, so only the
    // bottom segment is checked here.
    REQUIRE_FALSE(encroaching_input_vertices(plc).empty());
    const auto pre = preprocess_plc(plc, RefinementConfig::defaults(2));
    const PreprocessRecord* hit = nullptr;
    for (const auto& rec : pre.records)
        if (rec.feature == 0) hit = &rec;
    REQUIRE(hit != nullptr);
    const auto& r = *hit;
    CHECK(r.projection.x == doctest::Approx(0.3));
    CHECK(r.projection.y == 0.0);
    CHECK(r.placed == r.projection);
    CHECK(r.anchor == -1);
    CHECK_FALSE(r.heuristic_case_c);
    CHECK(encroaching_input_vertices(pre.plc).empty());
    CHECK(pre.plc.segments.size() == 4 + pre.records.size());
}

TEST_CASE("projection slid away from a close endpoint") {
    const Plc plc = square_with({0.2, 0.24});
    const auto pre = preprocess_plc(plc, RefinementConfig::defaults(2));
    REQUIRE_FALSE(pre.records.empty());
    const auto& r = pre.records[0];
    REQUIRE(r.anchor == 0);
    const double am = distance(pre.plc.vertices[0], r.placed);
    CHECK(am >= 0.24 - 1e-12);
    CHECK(am <= 0.48 + 1e-12);
    CHECK(r.placed.y == 0.0);
    CHECK(encroaching_input_vertices(pre.plc).empty());
}

TEST_CASE("nothing to do leaves the PLC alone") {
    const Plc plc = square_with({0.5, 0.5});
    const auto pre = preprocess_plc(plc, RefinementConfig::defaults(2));
    CHECK(pre.records.empty());
    CHECK(pre.plc.vertices.size() == plc.vertices.size());
    CHECK(pre.plc.segments == plc.segments);
}

TEST_CASE("vertex above a facet") {
    Plc plc;
    plc.dim = 3;
    for (double z : {0.0, 1.0})
        for (double y : {0.0, 1.0})
            for (double x : {0.0, 1.0}) plc.vertices.push_back({x, y, z});
    plc.facets = {{{0, 1, 3, 2}, {}}, {{4, 5, 7, 6}, {}}, {{0, 1, 5, 4}, {}},
                  {{2, 3, 7, 6}, {}}, {{0, 2, 6, 4}, {}}, {{1, 3, 7, 5}, {}}};
    plc.vertices.push_back({0.45, 0.55, 0.1});
    CHECK_FALSE(encroaching_input_vertices(plc).empty());
    const auto pre = preprocess_plc(plc, RefinementConfig::defaults(3));
    REQUIRE_FALSE(pre.records.empty());
    const PreprocessRecord* bottom = nullptr;
    for (const auto& r : pre.records)
        if (r.on_facet && r.feature == 0) bottom = &r;
    REQUIRE(bottom != nullptr);
    CHECK(bottom->projection.z == 0.0);
    CHECK(bottom->projection.x == doctest::Approx(0.45));
    CHECK(encroaching_input_vertices(pre.plc).empty());
    for (const auto& r : pre.records)
        if (r.anchor >= 0 && !r.heuristic_case_c) {
            const double pm = distance(pre.plc.vertices[r.input_vertex], r.projection);
            const double am = distance(pre.plc.vertices[r.anchor], r.placed);
            CHECK(am >= pm * (1 - 1e-9));
            CHECK(am <= 2 * pm * (1 + 1e-9));
        }
}
