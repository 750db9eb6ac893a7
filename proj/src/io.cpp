#include "globemesh/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

#include <json.hpp>

namespace globemesh::io {

using nlohmann::json;
namespace fs = std::filesystem;

ParseError::ParseError(std::string path, int line, const std::string& message)
    : std::runtime_error(path + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + message),
      path_(std::move(path)),
      line_(line) {}

namespace {

struct Record {
    int line = 0;
    std::vector<std::string> tok;
};

// Non-empty lines with comments stripped.
class Reader {
  public:
    Reader(const std::string& text, std::string name) : name_(std::move(name)) {
        std::istringstream in(text);
        std::string s;
        int n = 0;
        while (std::getline(in, s)) {
            ++n;
            if (const auto h = s.find('#'); h != std::string::npos) s.erase(h);
            std::istringstream ls(s);
            Record r{n, {}};
            std::string t;
            while (ls >> t) r.tok.push_back(t);
            if (!r.tok.empty()) recs_.push_back(std::move(r));
        }
        last_line_ = n;
    }

    bool done() const { return pos_ >= recs_.size(); }
    const Record& next(const char* what) {
        if (done()) throw ParseError(name_, last_line_, std::string("unexpected end of file, expected ") + what);
        return recs_[pos_++];
    }
    const std::string& name() const { return name_; }

    [[noreturn]] void fail(int line, const std::string& msg) const { throw ParseError(name_, line, msg); }

    long integer(const Record& r, size_t i, const char* what) const {
        if (i >= r.tok.size()) fail(r.line, std::string("missing ") + what);
        const std::string& s = r.tok[i];
        char* end = nullptr;
        errno = 0;
        const long v = std::strtol(s.c_str(), &end, 10);
        if (errno != 0 || end == s.c_str() || *end != '\0') fail(r.line, std::string("bad ") + what + " '" + s + "'");
        return v;
    }

    double real(const Record& r, size_t i, const char* what) const {
        if (i >= r.tok.size()) fail(r.line, std::string("missing ") + what);
        const std::string& s = r.tok[i];
        char* end = nullptr;
        errno = 0;
        const double v = std::strtod(s.c_str(), &end);
        if (end == s.c_str() || *end != '\0' || !std::isfinite(v)) fail(r.line, std::string("bad ") + what + " '" + s + "'");
        return v;
    }

  private:
    std::string name_;
    std::vector<Record> recs_;
    size_t pos_ = 0;
    int last_line_ = 0;
};

struct NodeBlock {
    int dim = 0;
    int base = 1;
    std::vector<Point> pts;
    std::vector<int> lines;
};

// Header "<count> <dim> <attrs> <markers>" then "<id> x y [z] ...". A zero count returns
// an empty block with dim set.
NodeBlock read_nodes(Reader& rd, int expect_dim) {
    NodeBlock nb;
    const Record& h = rd.next("node header");
    const long n = rd.integer(h, 0, "vertex count");
    if (n < 0) rd.fail(h.line, "negative vertex count");
    nb.dim = h.tok.size() > 1 ? static_cast<int>(rd.integer(h, 1, "dimension")) : expect_dim;
    if (expect_dim != 0 && nb.dim != expect_dim)
        rd.fail(h.line, "dimension " + std::to_string(nb.dim) + " where " + std::to_string(expect_dim) + " is required");
    if (nb.dim != 2 && nb.dim != 3) rd.fail(h.line, "dimension must be 2 or 3");
    const long attrs = h.tok.size() > 2 ? rd.integer(h, 2, "attribute count") : 0;
    const long markers = h.tok.size() > 3 ? rd.integer(h, 3, "marker count") : 0;
    if (attrs < 0 || markers < 0 || markers > 1) rd.fail(h.line, "malformed node header");
    for (long i = 0; i < n; ++i) {
        const Record& r = rd.next("vertex line");
        const long id = rd.integer(r, 0, "vertex id");
        if (i == 0) {
            if (id != 0 && id != 1) rd.fail(r.line, "first vertex id must be 0 or 1");
            nb.base = static_cast<int>(id);
        }
        if (id != nb.base + i) rd.fail(r.line, "vertex ids must be consecutive (expected " + std::to_string(nb.base + i) + ")");
        Point p;
        p.x = rd.real(r, 1, "x coordinate");
        p.y = rd.real(r, 2, "y coordinate");
        if (nb.dim == 3) p.z = rd.real(r, 3, "z coordinate");
        if (r.tok.size() > static_cast<size_t>(1 + nb.dim + attrs + markers)) rd.fail(r.line, "too many fields");
        nb.pts.push_back(p);
        nb.lines.push_back(r.line);
    }
    return nb;
}

int vertex_ref(const Reader& rd, const Record& r, size_t i, int base, size_t n) {
    const long id = rd.integer(r, i, "vertex reference");
    const long idx = id - base;
    if (idx < 0 || idx >= static_cast<long>(n))
        rd.fail(r.line, "references vertex " + std::to_string(id) + " of " + std::to_string(n));
    return static_cast<int>(idx);
}

void read_holes(Reader& rd, Plc& plc) {
    if (rd.done()) return;  // hole block optional at end of file
    const Record& h = rd.next("hole count");
    const long n = rd.integer(h, 0, "hole count");
    if (n < 0) rd.fail(h.line, "negative hole count");
    for (long i = 0; i < n; ++i) {
        const Record& r = rd.next("hole line");
        Point p;
        p.x = rd.real(r, 1, "hole x");
        p.y = rd.real(r, 2, "hole y");
        if (plc.dim == 3) p.z = rd.real(r, 3, "hole z");
        plc.holes.push_back(p);
    }
    // Region attributes, if any, are ignored.
}

// Vertices come from the poly/smesh file itself, or from the node file when its count is 0.
void take_nodes(Reader& poly, const std::string& node_text, const std::string& node_name, int dim, InputFile& out) {
    NodeBlock nb = read_nodes(poly, dim);
    if (nb.pts.empty()) {
        if (node_text.empty()) throw ParseError(poly.name(), -1, "no vertices listed and no .node file found");
        Reader nr(node_text, node_name);
        nb = read_nodes(nr, dim);
        out.paths.insert(out.paths.begin(), node_name);
    }
    out.plc.dim = dim;
    out.plc.vertices = std::move(nb.pts);
    out.plc.vertex_lines = std::move(nb.lines);
    out.index_base = nb.base;
}

InputFile parse_impl(const std::string& node_text, const std::string& node_name, const std::string& poly_text,
                     const std::string& poly_name, bool smesh) {
    InputFile out;
    out.paths.push_back(poly_name);
    Reader rd(poly_text, poly_name);
    const int dim = smesh ? 3 : 2;
    take_nodes(rd, node_text, node_name, dim, out);
    Plc& plc = out.plc;
    const size_t n = plc.vertices.size();
    const int base = out.index_base;
    if (!smesh) {
        const Record& h = rd.next("segment header");
        const long m = rd.integer(h, 0, "segment count");
        if (m < 0) rd.fail(h.line, "negative segment count");
        for (long i = 0; i < m; ++i) {
            const Record& r = rd.next("segment line");
            const int a = vertex_ref(rd, r, 1, base, n);
            const int b = vertex_ref(rd, r, 2, base, n);
            plc.segments.push_back({a, b});
            plc.segment_lines.push_back(r.line);
        }
    } else {
        const Record& h = rd.next("facet header");
        const long m = rd.integer(h, 0, "facet count");
        if (m < 0) rd.fail(h.line, "negative facet count");
        const long markers = h.tok.size() > 1 ? rd.integer(h, 1, "marker count") : 0;
        for (long i = 0; i < m; ++i) {
            const Record& r = rd.next("facet line");
            const long k = rd.integer(r, 0, "corner count");
            if (k < 3) rd.fail(r.line, "facet needs at least 3 corners");
            if (r.tok.size() < static_cast<size_t>(1 + k) || r.tok.size() > static_cast<size_t>(1 + k + markers))
                rd.fail(r.line, "facet has " + std::to_string(r.tok.size() - 1) + " fields for " + std::to_string(k) + " corners");
            Facet f;
            for (long j = 0; j < k; ++j) f.polygon.push_back(vertex_ref(rd, r, static_cast<size_t>(1 + j), base, n));
            plc.facets.push_back(std::move(f));
            plc.facet_lines.push_back(r.line);
        }
    }
    read_holes(rd, plc);
    validate(plc);
    return out;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path, -1, "cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json point_json(Point p, int dim) {
    json a = json::array({p.x, p.y});
    if (dim == 3) a.push_back(p.z);
    return a;
}

json manifest_obj(const RunManifest& m) {
    json j;
    j["inputs"] = m.inputs;
    j["config"] = json::parse(config_json(m.config));
    j["outputs"] = m.outputs;
    j["formats"] = m.formats;
    return j;
}

std::string comment_header(const char* what, const RunManifest& m) {
    return std::string("# globemesh ") + what + "\n# manifest " + manifest_json(m) + "\n";
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

int corners(const MeshSnapshot& mesh) { return mesh.dim == 2 ? 3 : 4; }

}  // namespace

InputFile parse_text(const std::string& node_text, const std::string& poly_text, bool poly_is_smesh, const std::string& name) {
    return parse_impl(node_text, name + ".node", poly_text, name + (poly_is_smesh ? ".smesh" : ".poly"), poly_is_smesh);
}

InputFile parse_input(const std::string& path) {
    const fs::path p(path);
    const std::string ext = p.extension().string();
    fs::path stem = p;
    stem.replace_extension();
    std::string poly_path;
    bool smesh = false;
    if (ext == ".poly" || ext == ".smesh") {
        poly_path = path;
        smesh = ext == ".smesh";
    } else if (ext == ".node") {
        if (fs::exists(fs::path(stem).concat(".poly"))) {
            poly_path = fs::path(stem).concat(".poly").string();
        } else if (fs::exists(fs::path(stem).concat(".smesh"))) {
            poly_path = fs::path(stem).concat(".smesh").string();
            smesh = true;
        } else {
            throw ParseError(path, -1, "no matching .poly or .smesh file");
        }
    } else {
        throw ParseError(path, -1, "expected a .poly, .smesh or .node file");
    }
    const std::string node_path = fs::path(stem).concat(".node").string();
    const std::string node = fs::exists(node_path) ? slurp(node_path) : std::string();
    return parse_impl(node, node_path, slurp(poly_path), poly_path, smesh);
}

std::vector<Point> parse_node(const std::string& text, int* dim, const std::string& name) {
    Reader rd(text, name);
    NodeBlock nb = read_nodes(rd, 0);
    if (dim) *dim = nb.dim;
    return nb.pts;
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string config_json(const RefinementConfig& c) {
    json j;
    j["dim"] = c.dim;
    j["rho_star"] = c.rho_star;
    j["sigma_star"] = c.sigma_star;
    j["alpha"] = c.alpha;
    j["gamma"] = c.gamma;
    j["beta"] = c.beta();
    j["placement"] = to_string(c.placement);
    j["mode"] = to_string(c.insertion);
    j["ordering"] = to_string(c.ordering);
    j["preprocess"] = c.preprocess;
    j["classic_boundary"] = c.classic_boundary;
    j["max_insertions"] = c.max_insertions;
    j["sliver_length_factor"] = c.sliver_length_factor;
    j["batch_cap"] = c.batch_cap;
    return j.dump();
}

std::string manifest_json(const RunManifest& m) { return manifest_obj(m).dump(); }

void write_atomic(const std::string& path, const std::string& content) {
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + path);
        out << content;
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw std::runtime_error("cannot write " + path);
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw std::runtime_error("cannot write " + path + ": " + ec.message());
    }
}

std::string node_text(const MeshSnapshot& mesh, const RunManifest& m, int base) {
    std::string s = comment_header("mesh vertices", m);
    s += std::to_string(mesh.points.size()) + " " + std::to_string(mesh.dim) + " 0 0\n";
    for (size_t i = 0; i < mesh.points.size(); ++i) {
        const Point p = mesh.points[i];
        s += std::to_string(i + base) + " " + format_double(p.x) + " " + format_double(p.y);
        if (mesh.dim == 3) s += " " + format_double(p.z);
        s += "\n";
    }
    return s;
}

std::string ele_text(const MeshSnapshot& mesh, const RunManifest& m, int base) {
    const int k = corners(mesh);
    std::string s = comment_header(mesh.dim == 2 ? "mesh triangles" : "mesh tetrahedra", m);
    s += std::to_string(mesh.cells.size()) + " " + std::to_string(k) + " 0\n";
    for (size_t i = 0; i < mesh.cells.size(); ++i) {
        s += std::to_string(i + base);
        for (int j = 0; j < k; ++j) s += " " + std::to_string(mesh.cells[i][j] + base);
        s += "\n";
    }
    return s;
}

std::string svg_text(const MeshSnapshot& mesh, const RunManifest& m) {
    double x0 = std::numeric_limits<double>::infinity(), y0 = x0, x1 = -x0, y1 = -x0;
    for (const Point& p : mesh.points) {
        x0 = std::min(x0, p.x), x1 = std::max(x1, p.x);
        y0 = std::min(y0, p.y), y1 = std::max(y1, p.y);
    }
    if (mesh.points.empty()) x0 = y0 = 0.0, x1 = y1 = 1.0;
    const double w = std::max(x1 - x0, 1e-300), h = std::max(y1 - y0, 1e-300);
    const double pad = 0.02 * std::max(w, h);
    const double px = 800.0, py = 800.0 * h / w;
    std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + format_double(px) + "\" height=\"" +
         format_double(py) + "\" viewBox=\"" + format_double(x0 - pad) + " " + format_double(-y1 - pad) + " " +
         format_double(w + 2 * pad) + " " + format_double(h + 2 * pad) + "\">\n";
    s += "<metadata>" + xml_escape(manifest_json(m)) + "</metadata>\n";
    s += "<style>path{fill:#dde6f0;stroke:#345;vector-effect:non-scaling-stroke;stroke-width:0.5}"
         "path.poor{fill:#e05050}line{stroke:#000;vector-effect:non-scaling-stroke;stroke-width:2}</style>\n";
    // y is flipped so the picture is upright.
    auto xy = [&](const Point& p) { return format_double(p.x) + " " + format_double(-p.y); };
    s += "<g id=\"triangles\">\n";
    for (const auto& c : mesh.cells) {
        const Point t[3] = {mesh.points[c[0]], mesh.points[c[1]], mesh.points[c[2]]};
        const QualityMeasures q = measure_or_degenerate(t);
        const bool poor = q.degenerate || classify(q, m.config) != Classification::Good;
        s += std::string("<path") + (poor ? " class=\"poor\"" : "") + " d=\"M " + xy(t[0]) + " L " + xy(t[1]) + " L " +
             xy(t[2]) + " Z\"/>\n";
    }
    s += "</g>\n<g id=\"boundary\">\n";
    for (const auto& e : mesh.boundary_edges) {
        const Point a = mesh.points[e[0]], b = mesh.points[e[1]];
        s += "<line x1=\"" + format_double(a.x) + "\" y1=\"" + format_double(-a.y) + "\" x2=\"" + format_double(b.x) +
             "\" y2=\"" + format_double(-b.y) + "\"/>\n";
    }
    s += "</g>\n</svg>\n";
    return s;
}

std::string vtk_text(const MeshSnapshot& mesh, const RunManifest& m) {
    const int k = corners(mesh);
    std::string s = "# vtk DataFile Version 3.0\nglobemesh refined mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    // The manifest travels as a byte array in the dataset's field data.
    const std::string man = manifest_json(m);
    s += "FIELD FieldData 1\nRunManifest 1 " + std::to_string(man.size()) + " unsigned_char\n";
    for (size_t i = 0; i < man.size(); ++i) {
        s += std::to_string(static_cast<unsigned char>(man[i]));
        s += (i + 1) % 32 == 0 || i + 1 == man.size() ? "\n" : " ";
    }
    s += "POINTS " + std::to_string(mesh.points.size()) + " double\n";
    for (const Point& p : mesh.points) s += format_double(p.x) + " " + format_double(p.y) + " " + format_double(p.z) + "\n";
    s += "CELLS " + std::to_string(mesh.cells.size()) + " " + std::to_string(mesh.cells.size() * (k + 1)) + "\n";
    for (const auto& c : mesh.cells) {
        s += std::to_string(k);
        for (int j = 0; j < k; ++j) s += " " + std::to_string(c[j]);
        s += "\n";
    }
    s += "CELL_TYPES " + std::to_string(mesh.cells.size()) + "\n";
    const std::string type = mesh.dim == 3 ? "10\n" : "5\n";
    for (size_t i = 0; i < mesh.cells.size(); ++i) s += type;
    s += "CELL_DATA " + std::to_string(mesh.cells.size()) + "\nSCALARS rho double 1\nLOOKUP_TABLE default\n";
    for (const auto& c : mesh.cells) {
        Point t[4];
        for (int j = 0; j < k; ++j) t[j] = mesh.points[c[j]];
        const QualityMeasures q = measure_or_degenerate(std::span<const Point>(t, static_cast<size_t>(k)));
        s += format_double(std::isfinite(q.rho) ? q.rho : -1.0) + "\n";
    }
    return s;
}

std::string report_json(const AuditReport& r, const RunManifest& m) {
    json j;
    j["format"] = kReportFormatVersion;
    j["manifest"] = manifest_obj(m);
    j["pass"] = r.pass();
    j["failures"] = r.failures;
    j["insertions"] = r.insertions;
    j["fallback_events"] = r.fallback_events;
    j["delaunay_violations"] = r.delaunay_violations;
    j["conformity_violations"] = r.conformity_violations;
    const QualitySummary& q = r.quality;
    j["quality"] = {{"elements", q.elements},
                    {"vertices", q.vertices},
                    {"max_rho", q.max_rho},
                    {"above_rho_star", q.above_rho_star},
                    {"slivers", q.slivers},
                    {"slivers_from_fallback", q.slivers_from_fallback},
                    {"rho_histogram", q.rho_histogram}};
    if (r.config.dim == 2) {
        j["quality"]["min_angle_deg"] = q.min_angle_deg;
    } else {
        j["quality"]["min_dihedral_deg"] = q.min_dihedral_deg;
        j["quality"]["min_sigma"] = q.min_sigma;
    }
    j["size"] = {{"max_ratio", r.size.max_ratio},
                 {"bound", r.size.bound},
                 {"limit", r.size.limit},
                 {"worst_vertex", r.size.worst_vertex},
                 {"steiner_vertices", r.size.steiner_vertices},
                 {"stage_checks", r.size.stage_checks},
                 {"stage_flags", r.size.stage_flags},
                 {"pass", r.size.pass}};
    json stages = json::array();
    for (const StageRow& row : r.front.stages)
        stages.push_back({{"stage", row.stage},
                          {"events", row.events},
                          {"min_key", row.min_key},
                          {"max_key", row.max_key},
                          {"min_clearance", row.min_clearance},
                          {"required", row.required}});
    j["front"] = {{"pass", r.front.pass()},
                  {"events_checked", r.front.events_checked},
                  {"min_distance_violations", r.front.min_distance_violations},
                  {"band_violations", r.front.band_violations},
                  {"stage_violations", r.front.stage_violations},
                  {"round_violations", r.front.round_violations},
                  {"l0", r.front.l0},
                  {"stages", stages},
                  {"details", r.front.details}};
    json hist = json::object();
    for (const auto& [count, edges] : r.charges.histogram) hist[std::to_string(count)] = edges;
    j["charges"] = {{"charged_events", r.charges.charged_events},
                    {"edges", r.charges.edges},
                    {"max_per_edge", r.charges.max_per_edge},
                    {"histogram", hist}};
    j["baseline_ratio"] = r.baseline_ratio ? json(*r.baseline_ratio) : json(nullptr);
    return j.dump(2) + "\n";
}

std::string events_jsonl(const EventLog& log, const RunManifest& m) {
    const int dim = log.config.dim;
    std::string s = json{{"type", "manifest"}, {"format", kEventFormatVersion}, {"manifest", manifest_obj(m)}}.dump() + "\n";
    for (const InsertionEvent& e : log.events) {
        json j = {{"type", "event"},
                  {"seq", e.seq},
                  {"kind", to_string(e.kind)},
                  {"vertex", e.vertex},
                  {"point", point_json(e.point, dim)},
                  {"l_min", e.l_min},
                  {"l_eff", e.l_eff},
                  {"min_dist", e.min_dist},
                  {"edge_dist", e.edge_dist},
                  {"edge", {e.edge[0], e.edge[1]}},
                  {"feature", e.feature},
                  {"round", e.round},
                  {"active", e.active}};
        s += j.dump() + "\n";
    }
    for (const RoundRecord& r : log.rounds)
        s += json{{"type", "relocation"}, {"round", r.round}, {"batch", r.batch}, {"history", r.history}}.dump() + "\n";
    return s;
}

void write_mesh(const std::string& base, const MeshSnapshot& mesh, const RunManifest& m, int index_base) {
    write_atomic(base + ".node", node_text(mesh, m, index_base));
    write_atomic(base + ".ele", ele_text(mesh, m, index_base));
}

}  // namespace globemesh::io
