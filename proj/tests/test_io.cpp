#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "globemesh/io.hpp"

using namespace globemesh;

namespace {

const char* kSquarePoly = R"(# unit square
4 2 0 1
1 0 0 1
2 1 0 1
3 1 1 1
4 0 1 1
4 1
1 1 2 1
2 2 3 1
3 3 4 1
4 4 1 1
0
)";

const char* kCubeSmesh = R"(8 3 0 0
0 0 0 0
1 1 0 0
2 0 1 0
3 1 1 0
4 0 0 1
5 1 0 1
6 0 1 1
7 1 1 1
12 0
3 0 1 3
3 0 3 2
3 4 5 7
3 4 7 6
3 0 1 5
3 0 5 4
3 2 3 7
3 2 7 6
3 0 2 6
3 0 6 4
3 1 3 7
3 1 7 5
0
0
)";

size_t count(const std::string& s, const std::string& what) {
    size_t n = 0;
    for (size_t p = s.find(what); p != std::string::npos; p = s.find(what, p + 1)) ++n;
    return n;
}

io::RunManifest manifest(const RefinementConfig& cfg) {
    io::RunManifest m;
    m.inputs = {"in.poly"};
    m.config = cfg;
    m.outputs["mesh"] = "out.1";
    return m;
}

}  // namespace

TEST_CASE("square .poly") {
    const auto in = io::parse_text("", kSquarePoly, false);
    CHECK(in.plc.dim == 2);
    CHECK(in.plc.vertices.size() == 4);
    CHECK(in.plc.segments.size() == 4);
    CHECK(in.plc.holes.empty());
    CHECK(in.index_base == 1);
    CHECK(in.plc.segments[3] == std::array<int, 2>{3, 0});
}

TEST_CASE("vertices from a separate .node, zero-based") {
    const std::string node = "4 2 0 0\n0 0 0\n1 2 0\n2 2 2\n3 0 2\n";
    const std::string poly = "0 2 0 0\n4 0\n0 0 1\n1 1 2\n2 2 3\n3 3 0\n1\n0 0.5 0.5\n";
    const auto in = io::parse_text(node, poly, false);
    CHECK(in.index_base == 0);
    CHECK(in.plc.vertices.size() == 4);
    CHECK(in.plc.holes.size() == 1);
    CHECK(in.plc.segments[3] == std::array<int, 2>{3, 0});
}

TEST_CASE("cube .smesh with 12 triangles") {
    const auto in = io::parse_text("", kCubeSmesh, true);
    CHECK(in.plc.dim == 3);
    CHECK(in.plc.facets.size() == 12);
    CHECK(in.index_base == 0);
    Plc p = in.plc;
    normalize(p);
    CHECK(p.facets.size() == 6);
}

TEST_CASE("parse errors carry line numbers") {
    std::string bad = kCubeSmesh;
    bad.replace(bad.find("3 1 7 5"), 7, "3 1 7 99");
    try {
        io::parse_text("", bad, true, "cube");
        FAIL("expected a parse error");
    } catch (const io::ParseError& e) {
        CHECK(e.line() == 22);
        CHECK(std::string(e.what()).find("99") != std::string::npos);
    }

    try {
        io::parse_text("", "four 2 0 0\n", false);
        FAIL("expected a parse error");
    } catch (const io::ParseError& e) {
        CHECK(e.line() == 1);
    }

    // Wrong dimension for the dialect.
    CHECK_THROWS_AS(io::parse_text("", kSquarePoly, true), io::ParseError);
    // Truncated segment block.
    CHECK_THROWS_AS(io::parse_text("", "3 2 0 0\n1 0 0\n2 1 0\n3 0 1\n3 0\n1 1 2\n", false), io::ParseError);
}

TEST_CASE("geometric problems are reported by validation") {
    // Self-crossing bow tie.
    const std::string poly = "4 2 0 0\n1 0 0\n2 1 1\n3 1 0\n4 0 1\n4 0\n1 1 2\n2 2 3\n3 3 4\n4 4 1\n0\n";
    try {
        io::parse_text("", poly, false);
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        REQUIRE_FALSE(e.issues().empty());
        CHECK(e.issues()[0].line > 0);
    }
    // Nonplanar quad facet.
    std::string smesh = "4 3 0 0\n0 0 0 0\n1 1 0 0\n2 1 1 0.1\n3 0 1 0\n1 0\n4 0 1 2 3\n0\n";
    CHECK_THROWS_AS(io::parse_text("", smesh, true), ValidationError);
}

TEST_CASE(".node round trip is bit exact") {
    MeshSnapshot mesh;
    mesh.dim = 2;
    mesh.points = {{0.1, 1.0 / 3.0}, {std::sqrt(2.0), -1e-300}, {123456.789, 2.5e-7}};
    mesh.cells = {{0, 1, 2, -1}};
    const auto text = io::node_text(mesh, manifest(RefinementConfig::defaults(2)));
    int dim = 0;
    const auto back = io::parse_node(text, &dim);
    CHECK(dim == 2);
    CHECK(back == mesh.points);
    CHECK(io::format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("exports") {
    Plc plc = io::parse_text("", kSquarePoly, false).plc;
    plc.vertices.push_back({0.5, 0.5});
    plc.vertices.push_back({0.56, 0.5});
    const auto cfg = RefinementConfig::defaults(2);
    const auto r = refine(plc, cfg);
    const auto m = manifest(cfg);

    const std::string svg = io::svg_text(r.mesh, m);
    CHECK(count(svg, "<path") == r.mesh.cells.size());
    CHECK(count(svg, "class=\"poor\"") == 0);
    CHECK(svg.find("<metadata>") != std::string::npos);

    const std::string ele = io::ele_text(r.mesh, m);
    CHECK(ele.find(std::to_string(r.mesh.cells.size()) + " 3 0") != std::string::npos);

    const auto cube = refine(io::parse_text("", kCubeSmesh, true).plc, RefinementConfig::defaults(3));
    const std::string vtk = io::vtk_text(cube.mesh, manifest(RefinementConfig::defaults(3)));
    CHECK(vtk.rfind("# vtk DataFile Version 3.0\n", 0) == 0);
    CHECK(count(vtk, "\n10\n") + 1 >= cube.mesh.cells.size());
    CHECK(vtk.find("CELL_TYPES " + std::to_string(cube.mesh.cells.size())) != std::string::npos);
    CHECK(vtk.find("RunManifest") != std::string::npos);
}

TEST_CASE("report and event log embed the manifest") {
    Plc plc = io::parse_text("", kSquarePoly, false).plc;
    plc.vertices.push_back({0.5, 0.5});
    plc.vertices.push_back({0.56, 0.5});
    auto cfg = RefinementConfig::defaults(2);
    cfg.insertion = InsertionMode::Multi;
    const auto r = refine(plc, cfg);
    const auto m = manifest(cfg);

    const auto rep = nlohmann::json::parse(io::report_json(audit(r), m));
    CHECK(rep["manifest"]["config"]["mode"] == to_string(InsertionMode::Multi));
    CHECK(rep["manifest"]["inputs"][0] == "in.poly");
    CHECK(rep["pass"] == true);
    CHECK(rep["size"]["bound"].get<double>() == doctest::Approx(20.0));

    const std::string log = io::events_jsonl(r.log, m);
    std::istringstream in(log);
    std::string line;
    size_t lines = 0, events = 0;
    while (std::getline(in, line)) {
        const auto j = nlohmann::json::parse(line);
        if (lines == 0) CHECK(j["type"] == "manifest");
        if (j["type"] == "event") {
            CHECK(j["seq"].get<long>() == r.log.events[events].seq);
            CHECK(event_kind_from_string(j["kind"].get<std::string>()) == r.log.events[events].kind);
            ++events;
        }
        ++lines;
    }
    CHECK(events == r.log.events.size());
    CHECK(lines == 1 + r.log.events.size() + r.log.rounds.size());
    CHECK(io::events_jsonl(r.log, m) == log);
}

TEST_CASE("atomic writes") {
    const auto dir = std::filesystem::temp_directory_path() / "globemesh_io_test";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "out.txt").string();
    io::write_atomic(path, "first\n");
    io::write_atomic(path, "second\n");
    std::ifstream f(path);
    std::string s;
    std::getline(f, s);
    CHECK(s == "second");
    CHECK_FALSE(std::filesystem::exists(path + ".tmp"));
    CHECK_THROWS(io::write_atomic((dir / "missing" / "x.txt").string(), "x"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("files on disk") {
    const auto dir = std::filesystem::temp_directory_path() / "globemesh_parse_test";
    std::filesystem::create_directories(dir);
    io::write_atomic((dir / "sq.poly").string(), kSquarePoly);
    const auto in = io::parse_input((dir / "sq.poly").string());
    CHECK(in.plc.vertices.size() == 4);
    CHECK(in.paths.size() == 1);
    CHECK_THROWS_AS(io::parse_input((dir / "nothing.poly").string()), io::ParseError);
    CHECK_THROWS_AS(io::parse_input((dir / "sq.txt").string()), io::ParseError);
    std::filesystem::remove_all(dir);
}
