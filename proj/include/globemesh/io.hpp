#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "globemesh/analysis.hpp"
#include "globemesh/plc.hpp"
#include "globemesh/refiner.hpp"

namespace globemesh::io {

inline constexpr const char* kMeshFormatVersion = "triangle-node-ele/1";
inline constexpr const char* kReportFormatVersion = "globemesh-report/1";
inline constexpr const char* kEventFormatVersion = "globemesh-events/1";

/// Malformed input file. `line` is 1-based, or -1 when the problem is not tied to a line.
class ParseError : public std::runtime_error {
  public:
    ParseError(std::string path, int line, const std::string& message);
    const std::string& path() const { return path_; }
    int line() const { return line_; }

  private:
    std::string path_;
    int line_;
};

struct InputFile {
    Plc plc;
    int index_base = 1;              ///< 0 or 1, detected from the first vertex id
    std::vector<std::string> paths;  ///< files actually read
};

/// Reads `.node`+`.poly` (2D) or `.node`+`.smesh` (3D). `path` may name the `.poly`/`.smesh`
/// file or the `.node` file; a companion file with the same stem is looked up when needed.
/// The returned PLC is validated: ValidationError carries the offending lines.
InputFile parse_input(const std::string& path);

/// Parses in-memory contents. `node_text` may be empty when the `.poly`/`.smesh` text lists
/// its own vertices. `poly_is_smesh` selects the facet dialect.
InputFile parse_text(const std::string& node_text, const std::string& poly_text, bool poly_is_smesh,
                     const std::string& name = "<memory>");

/// Reads only a `.node` file (e.g. a refined mesh) into a vertex list.
std::vector<Point> parse_node(const std::string& text, int* dim = nullptr, const std::string& name = "<memory>");

struct RunManifest {
    std::vector<std::string> inputs;
    RefinementConfig config;
    std::map<std::string, std::string> outputs;  ///< role -> path (mesh, report, events, export)
    std::map<std::string, std::string> formats;  ///< role -> format version
};

/// Single-line JSON rendering of the manifest.
std::string manifest_json(const RunManifest& m);
std::string config_json(const RefinementConfig& cfg);

/// 17 significant digits; parsing the text yields the same double.
std::string format_double(double x);

/// Writes to a temporary file in the target directory, then renames over `path`.
/// Throws std::runtime_error when the path cannot be written.
void write_atomic(const std::string& path, const std::string& content);

/// `.node` text for the mesh points. Each output starts with `#` lines carrying the manifest.
std::string node_text(const MeshSnapshot& mesh, const RunManifest& m, int index_base = 1);
/// `.ele` text: triangles (2D) or tetrahedra (3D).
std::string ele_text(const MeshSnapshot& mesh, const RunManifest& m, int index_base = 1);
/// SVG 1.1: one path per triangle, boundary subsegments highlighted, poor triangles colored.
std::string svg_text(const MeshSnapshot& mesh, const RunManifest& m);
/// Legacy VTK ASCII unstructured grid (tetrahedra as cell type 10, triangles as 5).
std::string vtk_text(const MeshSnapshot& mesh, const RunManifest& m);
/// JSON document for an audit report.
std::string report_json(const AuditReport& r, const RunManifest& m);
/// JSONL: a manifest line, one line per insertion event, one per relocation history.
std::string events_jsonl(const EventLog& log, const RunManifest& m);

/// Writes `<base>.node` and `<base>.ele`.
void write_mesh(const std::string& base, const MeshSnapshot& mesh, const RunManifest& m, int index_base = 1);

}  // namespace globemesh::io
