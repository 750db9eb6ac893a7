// Acceptance suite: one PASS/FAIL line per criterion, details indented beneath.
// Usage: acceptance [DATA_DIR] [--expect-fail N]...
// A criterion named by --expect-fail still prints FAIL but does not set the exit code.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "globemesh/analysis.hpp"
#include "globemesh/io.hpp"
#include "globemesh/optimizer.hpp"
#include "globemesh/refiner.hpp"
#include "random_problems.hpp"

namespace gm = globemesh;

namespace {

// Pinned tolerances.
constexpr double kRhoSlack = 1e-9;          // relative, on rho <= rho*
constexpr double kMinAngleDeg = 26.5;       // criterion 2
constexpr double kFallbackShare = 0.05;     // criterion 3
constexpr int kProblemsPerDim = 100;        // criterion 4
constexpr int kGrid2 = 201, kGrid3 = 121;   // criterion 4
constexpr double kSizeLimit = 7.5;          // criterion 7
constexpr double kBaselineRatio = 0.85;     // criterion 8
constexpr double kIntervalSlack = 1e-9;     // criterion 9, relative
constexpr long kMaxCharges = 2;             // criterion 10
constexpr double kSecondsPerCase = 60.0;    // criterion 1
constexpr size_t kMaxVertices = 50000;      // criterion 1

const std::vector<std::string> kSuite2 = {"square_points", "rectangle_slit", "square_hole", "l_shape", "u_shape",
                                          "hexagon_hole", "octagon_hole", "spiral", "two_rooms", "house",
                                          "two_holes", "encroach_a", "encroach_b"};
const std::vector<std::string> kSuite3 = {"cube", "box", "box_hole", "hex_prism", "l_block", "tower", "cube_points", "box_small_hole"};

struct Case {
    std::string name;
    gm::Plc plc;
};

struct Outcome {
    bool pass = true;
    std::vector<std::string> notes;
    void fail(const std::string& s) {
        pass = false;
        notes.push_back("FAIL " + s);
    }
    void note(const std::string& s) { notes.push_back(s); }
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::set<int> g_expected;
int g_expected_failures = 0;

int report(int id, const char* title, const Outcome& o) {
    const bool known = !o.pass && g_expected.count(id);
    std::printf("[%s] criterion %d: %s%s\n", o.pass ? "PASS" : "FAIL", id, title, known ? " (known failure)" : "");
    for (const auto& n : o.notes) std::printf("    %s\n", n.c_str());
    std::fflush(stdout);
    if (known) ++g_expected_failures;
    return o.pass || known ? 0 : 1;
}

gm::RefinementConfig multi(gm::RefinementConfig c) {
    c.insertion = gm::InsertionMode::Multi;
    return c;
}

struct Run {
    gm::RefineResult res;
    double seconds = 0.0;
    std::string error;
};

Run run(const gm::Plc& plc, const gm::RefinementConfig& cfg) {
    Run r;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        r.res = gm::refine(plc, cfg);
    } catch (const std::exception& e) {
        r.error = e.what();
    }
    r.seconds = seconds_since(t0);
    return r;
}

}  // namespace

int main(int argc, char** argv) {
    std::string dir = GLOBEMESH_DATA_DIR;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--expect-fail" && i + 1 < argc) g_expected.insert(std::atoi(argv[++i]));
        else dir = a;
    }
    std::vector<Case> cases2, cases3;
    try {
        for (const auto& n : kSuite2) cases2.push_back({n, gm::io::parse_input(dir + "/" + n + ".poly").plc});
        for (const auto& n : kSuite3) cases3.push_back({n, gm::io::parse_input(dir + "/" + n + ".smesh").plc});
    } catch (const std::exception& e) {
        std::printf("cannot load suite: %s\n", e.what());
        return 2;
    }
    std::vector<const Case*> all;
    for (const auto& c : cases2) all.push_back(&c);
    for (const auto& c : cases3) all.push_back(&c);

    std::printf("suite: %zu 2D, %zu 3D inputs from %s\n", cases2.size(), cases3.size(), dir.c_str());
    int failures = 0;

    // Default SINGLE and MULTI runs are shared by several criteria.
    std::map<std::string, Run> single, multis;
    for (const Case* c : all) {
        const auto cfg = gm::RefinementConfig::defaults(c->plc.dim);
        single[c->name] = run(c->plc, cfg);
        multis[c->name] = run(c->plc, multi(cfg));
    }

    // 1. Termination and quality.
    {
        Outcome o;
        for (const Case* c : all) {
            const Run& r = single.at(c->name);
            if (!r.error.empty()) {
                o.fail(c->name + ": " + r.error);
                continue;
            }
            const auto cfg = gm::RefinementConfig::defaults(c->plc.dim);
            const auto q = gm::quality_summary(r.res.mesh, cfg);
            const auto dv = gm::verify_delaunay(r.res.mesh).size();
            o.note(fmt("%-15s %6zu vertices %7ld elements  max rho %.6f / %.6f  delaunay violations %zu  %.2fs", c->name.c_str(),
                       r.res.mesh.points.size(), q.elements, q.max_rho, cfg.rho_star, dv, r.seconds));
            if (q.max_rho > cfg.rho_star * (1 + kRhoSlack)) o.fail(c->name + ": rho above rho*");
            if (dv) o.fail(c->name + ": Delaunay violations");
            if (r.seconds > kSecondsPerCase) o.fail(c->name + ": over the time limit");
            if (r.res.mesh.points.size() > kMaxVertices) o.fail(c->name + ": over the vertex budget");
        }
        if (cases2.size() < 10 || cases3.size() < 5) o.fail("suite too small");
        failures += report(1, "termination, rho <= rho*, exact Delaunay", o);
    }

    // 2. 2D minimum angle.
    {
        Outcome o;
        double worst = 180.0;
        for (const auto& c : cases2) {
            const Run& r = single.at(c.name);
            if (!r.error.empty()) {
                o.fail(c.name + ": no mesh");
                continue;
            }
            const auto q = gm::quality_summary(r.res.mesh, gm::RefinementConfig::defaults(2));
            worst = std::min(worst, q.min_angle_deg);
            if (q.min_angle_deg < kMinAngleDeg) o.fail(fmt("%s: min angle %.4f", c.name.c_str(), q.min_angle_deg));
        }
        o.note(fmt("smallest angle %.4f deg (threshold %.2f)", worst, kMinAngleDeg));
        failures += report(2, "2D minimum angle", o);
    }

    // 3. Sliver accounting.
    {
        Outcome o;
        long fallback = 0, insertions = 0;
        for (const auto& c : cases3)
            for (const auto* runs : {&single, &multis}) {
                const Run& r = runs->at(c.name);
                if (!r.error.empty()) {
                    o.fail(c.name + ": no mesh");
                    continue;
                }
                const auto q = gm::quality_summary(r.res.mesh, r.res.log.config);
                fallback += r.res.log.count(gm::EventKind::FallbackSliver);
                insertions += r.res.log.insertions();
                if (q.slivers > q.slivers_from_fallback)
                    o.fail(fmt("%s: %ld slivers, %ld from fallback", c.name.c_str(), q.slivers, q.slivers_from_fallback));
            }
        const double share = insertions ? static_cast<double>(fallback) / static_cast<double>(insertions) : 0.0;
        o.note(fmt("fallback insertions %ld of %ld (%.2f%%, limit %.0f%%)", fallback, insertions, 100 * share, 100 * kFallbackShare));
        if (share > kFallbackShare) o.fail("fallback share too high");
        failures += report(3, "no slivers except from fallback", o);
    }

    // 4. Optimizer versus grid oracle.
    {
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        for (int dim : {2, 3}) {
            std::mt19937_64 rng(4242 + dim);
            const int res = dim == 2 ? kGrid2 : kGrid3;
            int bad = 0, empty = 0;
            double worst = std::numeric_limits<double>::infinity();
            for (int i = 0; i < kProblemsPerDim; ++i) {
                const auto p = testing_support::random_problem(dim, rng);
                const auto g = gm::grid_oracle(p, res);
                if (!g) {
                    ++empty;
                    continue;
                }
                const double h = 2.0 * p.feasible.bounding_ball()->radius / (res - 1);
                double v = -std::numeric_limits<double>::infinity();
                try {
                    v = gm::solve(p).value;
                } catch (const gm::InfeasibleError&) {
                }
                const double margin = (v - (g->value - 2 * h)) / h;
                worst = std::min(worst, margin);
                if (margin < 0) ++bad;
            }
            o.note(fmt("%dD: %d problems, grid %d, %d below oracle - 2h, %d with no feasible grid point, worst margin %.3f h", dim,
                       kProblemsPerDim, res, bad, empty, worst));
            if (bad) o.fail(fmt("%dD solver below the grid oracle", dim));
        }
        o.note(fmt("%.1fs", seconds_since(t0)));
        failures += report(4, "solve >= grid oracle - 2 spacing", o);
    }

    // 5. Front band, SINGLE and MULTI.
    {
        Outcome o;
        long events = 0;
        for (const Case* c : all)
            for (const auto* runs : {&single, &multis}) {
                const Run& r = runs->at(c->name);
                if (!r.error.empty()) {
                    o.fail(c->name + ": no log");
                    continue;
                }
                const auto fa = gm::front_audit(r.res.log, r.res.log.config, &r.res.plc);
                events += fa.events_checked;
                if (fa.min_distance_violations || fa.band_violations || fa.stage_violations)
                    o.fail(fmt("%s (%s): %ld min-distance, %ld band, %ld stage", c->name.c_str(), gm::to_string(r.res.log.config.insertion),
                               fa.min_distance_violations, fa.band_violations, fa.stage_violations));
            }
        o.note(fmt("%ld events checked", events));
        failures += report(5, "front audit clean in SINGLE and MULTI", o);
    }

    // 6. MULTI relocation monotonicity.
    {
        Outcome o;
        long histories = 0, passes = 0;
        for (const Case* c : all) {
            const Run& r = multis.at(c->name);
            if (!r.error.empty()) {
                o.fail(c->name + ": no log");
                continue;
            }
            const auto fa = gm::front_audit(r.res.log, r.res.log.config, &r.res.plc);
            histories += static_cast<long>(r.res.log.rounds.size());
            for (const auto& h : r.res.log.rounds) passes += static_cast<long>(h.history.size());
            if (fa.round_violations) o.fail(fmt("%s: %ld decreasing histories", c->name.c_str(), fa.round_violations));
            if (!fa.pass()) o.fail(c->name + ": MULTI log breaks a SINGLE invariant");
        }
        o.note(fmt("%ld relocation histories, %ld passes", histories, passes));
        if (histories == 0) o.fail("no MULTI relocation was exercised");
        failures += report(6, "MULTI min-distance histories non-decreasing", o);
    }

    // 7. Size optimality with alpha = 1.2.
    {
        Outcome o;
        double worst = 0.0;
        auto cfg = gm::RefinementConfig::defaults(2);
        cfg.rho_star = cfg.sliver_length_factor = std::sqrt(2.0);
        cfg.alpha = cfg.gamma = 1.2;
        for (const auto& c : cases2) {
            const Run r = run(c.plc, cfg);
            if (!r.error.empty()) {
                o.fail(c.name + ": " + r.error);
                continue;
            }
            const auto s = gm::size_optimality_audit(r.res.mesh, r.res.plc, cfg, r.res.log);
            worst = std::max(worst, s.max_ratio);
            o.note(fmt("%-15s max lfs/r_v %.4f", c.name.c_str(), s.max_ratio));
            if (s.max_ratio > kSizeLimit) o.fail(c.name);
        }
        o.note(fmt("max lfs/r_v %.4f; reference 1/(alpha-1) = %.4f; limit %.2f (rho* = sqrt 2)", worst, 1.0 / (cfg.alpha - 1.0), kSizeLimit));
        failures += report(7, "size audit lfs/r_v <= 7.5 at alpha = 1.2", o);
    }

    // 8. Vertex count against circumcenter placement.
    {
        Outcome o;
        double sum = 0.0;
        int n = 0;
        for (const auto& c : cases2) {
            const Run& r = single.at(c.name);
            if (!r.error.empty()) continue;
            const auto base = gm::baseline_circumcenter_refine(r.res.plc, r.res.log.config);
            const double ratio = static_cast<double>(r.res.mesh.points.size()) / static_cast<double>(base.mesh.points.size());
            o.note(fmt("%-15s petal %5zu  circumcenter %5zu  ratio %.4f", c.name.c_str(), r.res.mesh.points.size(),
                       base.mesh.points.size(), ratio));
            sum += ratio;
            ++n;
        }
        const double mean = n ? sum / n : 1.0;
        o.note(fmt("mean ratio %.4f (limit %.2f)", mean, kBaselineRatio));
        if (mean > kBaselineRatio) o.fail("not enough savings");
        failures += report(8, "petal placement uses >= 15% fewer vertices", o);
    }

    // 9. Preprocessing.
    {
        Outcome o;
        long slid = 0, records = 0;
        for (const Case* c : all) {
            const auto pre = gm::preprocess_plc(c->plc, gm::RefinementConfig::defaults(c->plc.dim));
            records += static_cast<long>(pre.records.size());
            const auto left = gm::encroaching_input_vertices(pre.plc);
            if (!left.empty()) o.fail(fmt("%s: vertex %d still encroaches %s", c->name.c_str(), left[0].first, left[0].second.c_str()));
            for (const auto& rec : pre.records) {
                if (rec.anchor < 0 || rec.heuristic_case_c) continue;
                ++slid;
                const gm::Point p = pre.plc.vertices[rec.input_vertex];
                const double pm = gm::distance(p, rec.projection);
                const double am = gm::distance(pre.plc.vertices[rec.anchor], rec.placed);
                if (am < pm * (1 - kIntervalSlack) || am > 2 * pm * (1 + kIntervalSlack))
                    o.fail(fmt("%s: |am'| = %.6g outside [%.6g, %.6g]", c->name.c_str(), am, pm, 2 * pm));
            }
        }
        o.note(fmt("%ld auxiliary vertices, %ld slid", records, slid));
        failures += report(9, "no encroaching input vertices; |pm| <= |am'| <= 2|pm|", o);
    }

    // 10. Charges per driving edge.
    {
        Outcome o;
        long worst = 0;
        for (const auto& c : cases2) {
            const Run& r = single.at(c.name);
            if (!r.error.empty()) continue;
            const auto ch = gm::charge_report(r.res.log);
            worst = std::max(worst, ch.max_per_edge);
            if (ch.max_per_edge > kMaxCharges) o.fail(fmt("%s: %ld charges on one edge", c.name.c_str(), ch.max_per_edge));
        }
        o.note(fmt("petal path: max %ld charges per edge (limit %ld)", worst, kMaxCharges));
        // Circumcenter trend: two free vertices at distance D/k inside the unit square.
        for (int k : {10, 100, 1000}) {
            gm::Plc plc;
            plc.dim = 2;
            const double d = std::sqrt(2.0) / k;
            plc.vertices = {{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}, {0.5 + d, 0.5}};
            plc.segments = {{{0, 1}}, {{1, 2}}, {{2, 3}}, {{3, 0}}};
            for (bool circ : {false, true}) {
                auto cfg = gm::RefinementConfig::defaults(2);
                if (circ) cfg.placement = gm::PlacementMode::Circumcenter;
                const Run r = run(plc, cfg);
                if (!r.error.empty()) {
                    o.fail(r.error);
                    continue;
                }
                const auto ch = gm::charge_report(r.res.log);
                const double mean = ch.edges ? static_cast<double>(ch.charged_events) / static_cast<double>(ch.edges) : 0.0;
                o.note(fmt("D/l_min = %4d  log(D/l_min) = %.3f  %-12s charged %5ld over %5ld edges, mean %.3f, max %ld", k, std::log(k),
                           circ ? "circumcenter" : "petal", ch.charged_events, ch.edges, mean, ch.max_per_edge));
                if (!circ && ch.max_per_edge > kMaxCharges) o.fail(fmt("petal path on D/l_min = %d", k));
            }
        }
        failures += report(10, "petal path charges <= 2 per edge; circumcenter trend reported", o);
    }

    // 11. Determinism.
    {
        Outcome o;
        int compared = 0;
        for (const Case* c : all)
            for (const auto* runs : {&single, &multis}) {
                const Run& a = runs->at(c->name);
                if (!a.error.empty()) continue;
                const Run b = run(c->plc, a.res.log.config);
                gm::io::RunManifest m;
                m.inputs = {c->name};
                m.config = a.res.log.config;
                const std::string ea = gm::io::events_jsonl(a.res.log, m), eb = gm::io::events_jsonl(b.res.log, m);
                ++compared;
                if (ea != eb) o.fail(fmt("%s (%s): event logs differ", c->name.c_str(), gm::to_string(m.config.insertion)));
                if (gm::io::node_text(a.res.mesh, m) != gm::io::node_text(b.res.mesh, m)) o.fail(c->name + ": meshes differ");
            }
        o.note(fmt("%d run pairs compared byte for byte", compared));
        failures += report(11, "identical event logs across runs", o);
    }

    std::printf("%s: %d of 11 criteria failed", failures ? "FAIL" : "PASS", failures + g_expected_failures);
    if (g_expected_failures) std::printf(" (%d known)", g_expected_failures);
    std::printf("\n");
    return failures ? 1 : 0;
}
