#include <doctest.h>

#include <cmath>
#include <random>

#include "globemesh/optimizer.hpp"
#include "random_problems.hpp"

using namespace globemesh;

namespace {

PlacementProblem unit_square_problem() {
    PlacementProblem p;
    p.dim = 2;
    p.sites = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    p.feasible.constraints = {Constraint::halfspace({-1, 0, 0}, 0), Constraint::halfspace({1, 0, 0}, 1),
                              Constraint::halfspace({0, -1, 0}, 0), Constraint::halfspace({0, 1, 0}, 1)};
    return p;
}

double grid_spacing(const PlacementProblem& p, int res) {
    const auto b = p.feasible.bounding_ball();
    return 2.0 * b->radius / (res - 1);
}

}  // namespace

TEST_CASE("unit square: the Voronoi vertex wins") {
    const auto c = solve(unit_square_problem());
    CHECK(c.point.x == doctest::Approx(0.5));
    CHECK(c.point.y == doctest::Approx(0.5));
    CHECK(c.value == doctest::Approx(std::sqrt(0.5)));
    CHECK_FALSE(c.fallback);
    CHECK(c.active_set.size() >= 1);
    CHECK(c.active_set.size() <= 3);
    const auto g = grid_oracle(unit_square_problem(), 101);
    REQUIRE(g.has_value());
    CHECK(std::abs(g->point.x - 0.5) <= 0.01);
    CHECK(std::abs(g->point.y - 0.5) <= 0.01);
}

TEST_CASE("two sites and a disk") {
    PlacementProblem p;
    p.dim = 2;
    p.sites = {{0, 0}, {2, 0}};
    p.feasible.constraints = {Constraint::inside({{1, 0}, 0.5})};
    const auto c = solve(p);
    CHECK(c.value == doctest::Approx(std::sqrt(1.25)));
    CHECK(c.point.x == doctest::Approx(1.0));
    CHECK(c.point.y == doctest::Approx(-0.5));  // lexicographically smaller of the tie
}

TEST_CASE("infeasible and empty oracle") {
    PlacementProblem p;
    p.dim = 3;
    p.sites = {{0, 0, 0}};
    p.feasible.constraints = {Constraint::inside({{0, 0, 0}, 1}), Constraint::outside({{0, 0, 0}, 2})};
    CHECK_THROWS_AS(solve(p), InfeasibleError);
    CHECK_FALSE(grid_oracle(p, 21).has_value());
}

TEST_CASE("weighted plane objective") {
    PlacementProblem p;
    p.dim = 3;
    p.objective = Objective::WeightedPlaneDistance;
    p.planes = {{{0, 0, 1}, 0.0, 1.0}};
    p.feasible.constraints = {Constraint::inside({{0, 0, 1}, 0.5})};
    auto c = solve_weighted(p);
    CHECK(c.point.z == doctest::Approx(1.5));
    CHECK(c.value == doctest::Approx(1.5));

    p.planes = {{{0, 0, 1}, 0.0, 1.0}, {{0, 0, 1}, 2.0, 1.0}};
    p.feasible.constraints = {Constraint::inside({{0, 0, 1}, 1})};
    c = solve_weighted(p);
    CHECK(c.value == doctest::Approx(1.0));
    CHECK(c.point.z == doctest::Approx(1.0));
    CHECK(c.point.x == doctest::Approx(-1.0));

    // 2z = 3 - z at z = 1; within the ball of radius 0.5 that equidistance point is optimal.
    p.planes = {{{0, 0, 1}, 0.0, 2.0}, {{0, 0, 1}, 3.0, 1.0}};
    p.feasible.constraints = {Constraint::inside({{0, 0, 1}, 0.5})};
    c = solve_weighted(p);
    CHECK(c.value == doctest::Approx(2.0));
    CHECK(c.point.z == doctest::Approx(1.0));
    // With radius 5 the far pole below the first plane does better (value 7 at z = -4).
    p.feasible.constraints = {Constraint::inside({{0, 0, 1}, 5})};
    c = solve_weighted(p);
    CHECK(c.value == doctest::Approx(7.0));
    const auto g = grid_oracle(p, 61);
    CHECK(c.value >= g->value - 1e-9);
}

TEST_CASE("solve matches the grid oracle on random problems") {
    for (int dim : {2, 3}) {
        std::mt19937_64 rng(1000 + dim);
        const int res = dim == 2 ? 121 : 31;
        int worse = 0, fallbacks = 0;
        for (int i = 0; i < 40; ++i) {
            const auto p = testing_support::random_problem(dim, rng);
            const auto c = solve(p);
            fallbacks += c.fallback;
            const auto g = grid_oracle(p, res);
            if (!c.fallback) {
                CHECK(p.is_feasible(c.point, 1e-9 * p.scale()));
                CHECK(p.avoided_by(c.point, 1e-9 * p.scale()) < 0);
                CHECK(c.active_set.size() <= static_cast<size_t>(dim + 1));
                if (g && c.value < g->value - 2 * grid_spacing(p, res)) ++worse;
            }
        }
        CHECK(worse == 0);
        MESSAGE("dim ", dim, " fallbacks: ", fallbacks);
    }
}

TEST_CASE("translation and scale equivariance") {
    std::mt19937_64 rng(77);
    for (int i = 0; i < 20; ++i) {
        auto p = testing_support::random_problem(3, rng, 0);
        const auto c = solve(p);
        const Point shift{3.5, -2.25, 10};
        const double s = 2.5;
        PlacementProblem q = p;
        for (auto& x : q.sites) x = s * x + shift;
        for (auto& k : q.feasible.constraints) {
            k.center = s * k.center + shift;
            k.radius *= s;
        }
        const auto d = solve(q);
        CHECK(d.value == doctest::Approx(s * c.value).epsilon(1e-9));
        CHECK(distance(d.point, s * c.point + shift) <= 1e-7 * s * c.value);
    }
}

TEST_CASE("relocation") {
    SUBCASE("single candidate equals solve") {
        PlacementProblem p;
        p.dim = 2;
        p.sites = {{0, 0}, {2, 0}};
        p.feasible.constraints = {Constraint::inside({{1, 0}, 0.5})};
        std::vector<RelocationItem> items{{p, {{1, 0.2}, 0}}};
        relocate(items);
        const auto c = solve(p);
        CHECK(distance(items[0].current.point, c.point) <= 1e-12);
    }
    SUBCASE("greedy pair improves and converges") {
        // The greedy first vertex takes the bottom of its disk, right where the second
        // vertex's disk sits; relocation moves it to the top.
        PlacementProblem a, b;
        a.dim = b.dim = 2;
        a.sites = b.sites = {{0, 0}, {4, 0}};
        a.feasible.constraints = {Constraint::inside({{2, -0.1}, 1.0})};
        b.feasible.constraints = {Constraint::inside({{2, -1.5}, 0.6})};
        const auto ga = solve(a);
        PlacementProblem b2 = b;
        b2.sites.push_back(ga.point);
        const auto gb = solve(b2);
        std::vector<RelocationItem> items{{a, ga}, {b, gb}};
        const auto hist = relocate(items);
        CHECK(hist.size() >= 2);
        for (size_t i = 1; i < hist.size(); ++i) CHECK(hist[i] >= hist[i - 1]);
        const double moved = relocate_round(items);
        CHECK(moved <= 1e-9 * 4);
        CHECK(hist.back() > hist.front() + 0.5);
        MESSAGE("greedy min distance ", hist.front(), " relocated ", hist.back());
    }
    SUBCASE("symmetric pair is a fixed point") {
        PlacementProblem a, b;
        a.dim = b.dim = 2;
        a.sites = b.sites = {{-1, 0}, {1, 0}};
        a.feasible.constraints = {Constraint::inside({{0, 1}, 0.5})};
        b.feasible.constraints = {Constraint::inside({{0, -1}, 0.5})};
        std::vector<RelocationItem> items{{a, solve(a)}, {b, solve(b)}};
        relocate(items);
        const Point pa = items[0].current.point, pb = items[1].current.point;
        relocate_round(items);
        CHECK(distance(pa, items[0].current.point) <= 1e-9);
        CHECK(distance(pb, items[1].current.point) <= 1e-9);
    }
}

TEST_CASE("avoid regions force a different optimum or a fallback") {
    PlacementProblem p;
    p.dim = 3;
    p.sites = {{0, 0, 0}, {1, 0, 0}, {0.5, 0.8, 0}};
    p.feasible.constraints = {Constraint::inside({{0.5, 0.3, 0.5}, 0.4})};
    const auto free = solve(p);
    // A large flat region covering the free optimum.
    const Point base[] = {free.point + Point{-0.3, -0.2, 0}, free.point + Point{0.3, -0.2, 0}, free.point + Point{0, 0.35, 0}};
    auto f = forbidden_region(base, 2.0, 0.2);
    const Point rim = f.center + f.base_radius * normalized(base[0] - f.center) + Point{0, 0, 0.001};
    (void)rim;
    p.avoid.push_back(f);
    const auto c = solve(p);
    if (!c.fallback) {
        CHECK(p.avoided_by(c.point, 1e-9) < 0);
        CHECK(c.value <= free.value + 1e-12);
    }
}
