// Command-line front end: globemesh refine INPUT [options]

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

#include "globemesh/analysis.hpp"
#include "globemesh/io.hpp"
#include "globemesh/refiner.hpp"

namespace gm = globemesh;

namespace {

enum Exit { kOk = 0, kUsage = 1, kInvalid = 2, kCap = 3, kAuditFailed = 4, kInternal = 5 };

struct Options {
    std::string input;
    std::string output;
    std::optional<double> rho_star, sigma_star, alpha, gamma;
    std::string placement, mode, ordering;
    bool no_preprocess = false;
    bool classic_boundary = false;
    std::optional<long> max_insertions;
    std::string report, events;
    std::vector<std::string> export_spec;
    bool run_audit = false;
    bool baseline = false;
    bool quiet = false;
};

gm::RefinementConfig make_config(const Options& o, int dim) {
    gm::RefinementConfig c = gm::RefinementConfig::defaults(dim);
    if (o.rho_star) c.rho_star = c.sliver_length_factor = *o.rho_star;
    if (o.sigma_star) c.sigma_star = *o.sigma_star;
    if (o.alpha) c.alpha = c.gamma = *o.alpha;
    if (o.gamma) c.gamma = *o.gamma;
    if (o.placement == "angle") c.placement = gm::PlacementMode::Angle;
    if (o.placement == "circumcenter") c.placement = gm::PlacementMode::Circumcenter;
    if (o.mode == "multi") c.insertion = gm::InsertionMode::Multi;
    if (o.ordering == "fifo") c.ordering = gm::Ordering::Fifo;
    c.preprocess = !o.no_preprocess;
    c.classic_boundary = o.classic_boundary;
    if (o.max_insertions) c.max_insertions = *o.max_insertions;
    return c;
}

int run(const Options& o) {
    gm::io::InputFile in;
    try {
        in = gm::io::parse_input(o.input);
    } catch (const gm::io::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInvalid;
    } catch (const gm::ValidationError& e) {
        std::cerr << "error: invalid PLC in " << o.input << "\n";
        for (const auto& i : e.issues())
            std::cerr << "  " << (i.line > 0 ? "line " + std::to_string(i.line) + ": " : std::string()) << i.feature << ": "
                      << i.message << "\n";
        return kInvalid;
    }

    const gm::RefinementConfig cfg = make_config(o, in.plc.dim);
    try {
        gm::validate(cfg);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInvalid;
    }
    if (!o.export_spec.empty() && o.export_spec[0] == "svg" && in.plc.dim != 2) {
        std::cerr << "error: SVG export needs a 2D input; use --export vtk\n";
        return kInvalid;
    }

    gm::io::RunManifest man;
    man.inputs = in.paths;
    man.config = cfg;
    std::string base = o.output;
    if (base.empty()) {
        std::filesystem::path p(o.input);
        p.replace_extension();
        base = p.string() + ".1";
    }
    man.outputs["mesh"] = base;
    man.formats["mesh"] = gm::io::kMeshFormatVersion;
    if (!o.report.empty()) man.outputs["report"] = o.report, man.formats["report"] = gm::io::kReportFormatVersion;
    if (!o.events.empty()) man.outputs["events"] = o.events, man.formats["events"] = gm::io::kEventFormatVersion;
    if (!o.export_spec.empty()) {
        man.outputs["export"] = o.export_spec[1];
        man.formats["export"] = o.export_spec[0] == "svg" ? "svg-1.1" : "vtk-legacy-3.0";
    }

    gm::RefineResult res;
    try {
        res = gm::refine(in.plc, cfg);
    } catch (const gm::InsertionCapError& e) {
        std::cerr << "error: " << e.what() << "\n";
        if (!o.events.empty()) gm::io::write_atomic(o.events, gm::io::events_jsonl(e.log(), man));
        return kCap;
    } catch (const gm::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInvalid;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInvalid;
    }

    gm::io::write_mesh(base, res.mesh, man, in.index_base);
    if (!o.events.empty()) gm::io::write_atomic(o.events, gm::io::events_jsonl(res.log, man));
    if (!o.export_spec.empty()) {
        const std::string& path = o.export_spec[1];
        gm::io::write_atomic(path, o.export_spec[0] == "svg" ? gm::io::svg_text(res.mesh, man) : gm::io::vtk_text(res.mesh, man));
    }

    std::optional<gm::AuditReport> rep;
    if (o.run_audit || !o.report.empty() || o.baseline) {
        gm::AuditOptions ao;
        ao.baseline = o.baseline;
        rep = gm::audit(res, ao);
        if (!o.report.empty()) gm::io::write_atomic(o.report, gm::io::report_json(*rep, man));
    }

    if (!o.quiet) {
        std::printf("%s: %zu vertices, %zu %s, %ld insertions\n", o.input.c_str(), res.mesh.points.size(), res.mesh.cells.size(),
                    in.plc.dim == 2 ? "triangles" : "tetrahedra", res.log.insertions());
        if (rep) {
            const auto& q = rep->quality;
            std::printf("max rho %.6f (rho* %.6f)", q.max_rho, cfg.rho_star);
            if (cfg.dim == 2) std::printf(", min angle %.4f deg", q.min_angle_deg);
            else std::printf(", min dihedral %.4f deg, slivers %ld (fallback %ld)", q.min_dihedral_deg, q.slivers, q.slivers_from_fallback);
            std::printf("\nsize audit max lfs/r_v %.4f (reference %.4f, limit %.4f)\n", rep->size.max_ratio, rep->size.bound, rep->size.limit);
            std::printf("front audit %s, charges max %ld per edge\n", rep->front.pass() ? "clean" : "VIOLATIONS", rep->charges.max_per_edge);
            if (rep->baseline_ratio) std::printf("vertices / circumcenter baseline %.4f\n", *rep->baseline_ratio);
            std::printf("audit %s\n", rep->pass() ? "pass" : "FAIL");
            for (const auto& f : rep->failures) std::printf("  %s\n", f.c_str());
        }
    }
    if (o.run_audit && rep && !rep->pass()) return kAuditFailed;
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Delaunay refinement with snow-globe and petal Steiner placement"};
    app.require_subcommand(1);
    Options o;
    CLI::App* refine = app.add_subcommand("refine", "Refine a .poly (2D) or .smesh (3D) PLC");
    refine->add_option("input", o.input, "Input .poly, .smesh or .node file")->required();
    refine->add_option("-o,--output", o.output, "Output base name for .node/.ele (default INPUT.1)");
    refine->add_option("--rho-star", o.rho_star, "Radius-edge ratio target");
    refine->add_option("--sigma-star", o.sigma_star, "Volume-edge ratio sliver threshold (3D)");
    refine->add_option("--alpha", o.alpha, "Front spacing constant, 1 < alpha < rho*");
    refine->add_option("--gamma", o.gamma, "Boundary front constant, alpha <= gamma <= 2 rho*");
    refine->add_option("--placement", o.placement, "Steiner placement")
        ->check(CLI::IsMember({"distance", "angle", "circumcenter"}))
        ->default_val("distance");
    refine->add_option("--mode", o.mode, "Single or multi-vertex insertion")->check(CLI::IsMember({"single", "multi"}))->default_val("single");
    refine->add_option("--ordering", o.ordering, "Queue ordering")
        ->check(CLI::IsMember({"shortest-first", "fifo"}))
        ->default_val("shortest-first");
    refine->add_flag("--no-preprocess", o.no_preprocess, "Skip input-vertex encroachment preprocessing");
    refine->add_flag("--classic-boundary", o.classic_boundary, "Midpoint/circumcenter boundary splits");
    refine->add_option("--max-insertions", o.max_insertions, "Insertion cap (exit 3 when reached)")->check(CLI::PositiveNumber);
    refine->add_option("--report", o.report, "Write the JSON audit report");
    refine->add_option("--events", o.events, "Write the JSONL event log");
    refine->add_option("--export", o.export_spec, "Export mesh: svg PATH or vtk PATH")->expected(2);
    refine->add_flag("--audit", o.run_audit, "Run the audit suite; exit 4 on failure");
    refine->add_flag("--baseline", o.baseline, "Also refine with circumcenter placement and report the vertex ratio");
    refine->add_flag("-q,--quiet", o.quiet, "No summary on stdout");

    try {
        app.parse(argc, argv);
        if (!o.export_spec.empty() && o.export_spec[0] != "svg" && o.export_spec[0] != "vtk")
            throw CLI::ValidationError("--export", "format must be svg or vtk");
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help() << (app.got_subcommand(refine) ? refine->help() : "");
        return kUsage;
    }

    try {
        return run(o);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInternal;
    }
}
