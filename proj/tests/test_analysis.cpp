#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "globemesh/analysis.hpp"

using namespace globemesh;

namespace {

Plc square_plc(double s = 1.0) {
    Plc p;
    p.dim = 2;
    p.vertices = {{0, 0}, {s, 0}, {s, s}, {0, s}};
    p.segments = {{{0, 1}}, {{1, 2}}, {{2, 3}}, {{3, 0}}};
    return p;
}

Plc square_with_hole() {
    Plc p = square_plc(4.0);
    for (Point q : {Point{1.0, 1.0}, Point{1.6, 1.0}, Point{1.6, 1.5}, Point{1.0, 1.5}}) p.vertices.push_back(q);
    p.segments.insert(p.segments.end(), {{{4, 5}}, {{5, 6}}, {{6, 7}}, {{7, 4}}});
    p.holes = {{1.3, 1.2}};
    p.vertices.push_back({3.0, 3.2});
    return p;
}

// lfs from sampled features: each segment becomes points at spacing <= h, so every distance
// is overestimated by at most h / 2.
double sampled_lfs(const Plc& plc, Point x, double h) {
    struct F {
        std::vector<int> verts;
        std::vector<Point> samples;
    };
    std::vector<F> fs;
    for (size_t v = 0; v < plc.vertices.size(); ++v) fs.push_back({{static_cast<int>(v)}, {plc.vertices[v]}});
    for (const auto& s : plc.segments) {
        const Point a = plc.vertices[s[0]], b = plc.vertices[s[1]];
        const int n = static_cast<int>(std::ceil(distance(a, b) / h));
        F f{{s[0], s[1]}, {}};
        for (int i = 0; i <= n; ++i) f.samples.push_back(a + (static_cast<double>(i) / n) * (b - a));
        fs.push_back(f);
    }
    auto dist = [&](const F& f) {
        double d = std::numeric_limits<double>::infinity();
        for (Point q : f.samples) d = std::min(d, distance(q, x));
        return d;
    };
    auto incident = [](const F& a, const F& b) {
        for (int v : a.verts)
            if (std::find(b.verts.begin(), b.verts.end(), v) != b.verts.end()) return true;
        return false;
    };
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < fs.size(); ++i)
        for (size_t j = i + 1; j < fs.size(); ++j)
            if (!incident(fs[i], fs[j])) best = std::min(best, std::max(dist(fs[i]), dist(fs[j])));
    return best;
}

}  // namespace

TEST_CASE("lfs on the unit square") {
    const Plc sq = square_plc();
    CHECK(local_feature_size(sq, {0.5, 0}) == doctest::Approx(0.5));
    CHECK(local_feature_size(sq, {0, 0}) == doctest::Approx(1.0));
}

TEST_CASE("lfs agrees with a dense-sampling estimate") {
    for (const Plc& plc : {square_plc(), square_with_hole()}) {
        const LfsField lfs(plc);
        const double h = 0.01 * plc.scale();
        for (int i = 0; i <= 12; ++i)
            for (int j = 0; j <= 12; ++j) {
                const double s = plc.vertices[2].x;
                const Point x{s * i / 12.0, s * j / 12.0};
                CHECK(std::abs(lfs(x) - sampled_lfs(plc, x, h)) <= 2 * h);
            }
    }
}

TEST_CASE("lfs is 1-Lipschitz; a scaled copy is not") {
    const Plc plc = square_with_hole();
    CHECK(lipschitz_check(plc, 10000));
    const LfsField lfs(plc);
    CHECK_FALSE(lipschitz_check(plc, 2000, 7, [&](Point x) { return 3.0 * lfs(x); }));
}

TEST_CASE("lfs needs two nonincident features") {
    Plc p;
    p.dim = 2;
    p.vertices = {{0, 0}};
    CHECK_THROWS_AS(LfsField{p}, std::invalid_argument);
    // Two endpoints of one segment are already a nonincident pair.
    p.vertices.push_back({1, 0});
    p.segments = {{{0, 1}}};
    CHECK(LfsField(p)({0.5, 0}) == doctest::Approx(0.5));
}

TEST_CASE("flipped diagonal gives two Delaunay violations") {
    const std::vector<Point> pts = {{0, 0}, {1, -1}, {2, 0}, {1, 0.5}};
    const std::vector<std::array<int, 4>> bad = {{0, 1, 2, -1}, {0, 2, 3, -1}};
    CHECK(verify_delaunay(2, pts, bad).size() == 2);
    const std::vector<std::array<int, 4>> good = {{0, 1, 3, -1}, {1, 2, 3, -1}};
    CHECK(verify_delaunay(2, pts, good).empty());
}

TEST_CASE("refined meshes pass the oracles") {
    Plc plc = square_plc();
    plc.vertices.push_back({0.5, 0.5});
    plc.vertices.push_back({0.55, 0.5});
    const auto cfg = RefinementConfig::defaults(2);
    const auto r = refine(plc, cfg);
    CHECK(verify_delaunay(r.mesh).empty());
    CHECK(conformity_violations(r.mesh, r.plc).empty());
    const auto size = size_optimality_audit(r.mesh, r.plc, cfg, r.log);
    CHECK(size.bound == doctest::Approx(1.0 / (cfg.alpha - 1.0)));
    CHECK(size.limit == doctest::Approx(1.5 * size.bound));
    CHECK(size.steiner_vertices > 0);
    CHECK(size.max_ratio > 0.0);
    CHECK(size.pass);
    const auto rep = audit(r, {true, true});
    CHECK(rep.pass());
    REQUIRE(rep.baseline_ratio.has_value());
    CHECK(*rep.baseline_ratio < 1.0);
}

TEST_CASE("quality summary of the two-triangle square") {
    const auto r = refine(square_plc(), RefinementConfig::defaults(2));
    const auto q = quality_summary(r.mesh, RefinementConfig::defaults(2));
    CHECK(q.elements == 2);
    CHECK(q.vertices == 4);
    CHECK(q.max_rho == doctest::Approx(std::sqrt(0.5)));
    CHECK(q.min_angle_deg == doctest::Approx(45.0));
    long total = 0;
    for (long n : q.rho_histogram) total += n;
    CHECK(total == 2);
}

TEST_CASE("front audit flags synthetic violations") {
    auto cfg = RefinementConfig::defaults(2);
    const Plc plc = square_plc(10.0);
    EventLog log;
    log.config = cfg;
    InsertionEvent ok;
    ok.kind = EventKind::Steiner;
    ok.vertex = 10;
    ok.point = {5, 5};
    ok.l_min = ok.l_eff = 1.0;
    ok.min_dist = 5.0;
    ok.edge_dist = 1.5;
    ok.edge = {0, 1};
    log.events.push_back(ok);
    auto a = front_audit(log, cfg, &plc);
    CHECK(a.pass());

    InsertionEvent close = ok;
    close.seq = 1;
    close.vertex = 11;
    close.point = {5.5, 5};  // 0.5 from the previous vertex, below alpha l_min
    close.edge = {2, 3};
    log.events.push_back(close);
    InsertionEvent far = ok;
    far.seq = 2;
    far.vertex = 12;
    far.point = {2, 8};
    far.edge_dist = 10.0;  // beyond beta l_min
    log.events.push_back(far);
    log.rounds.push_back({0, 0, {1.0, 1.2, 1.1}});
    a = front_audit(log, cfg, &plc);
    CHECK(a.min_distance_violations == 1);
    CHECK(a.band_violations == 1);
    CHECK(a.round_violations == 1);
    CHECK_FALSE(a.pass());
    CHECK_FALSE(a.details.empty());

    const auto ch = charge_report(log);
    CHECK(ch.charged_events == 3);
    CHECK(ch.edges == 2);
    CHECK(ch.max_per_edge == 2);
    CHECK(ch.histogram.at(1) == 1);
    CHECK(ch.histogram.at(2) == 1);
}
