// gridforge command-line driver: generate / quality / verify / svg.
// Exit codes: 0 ok, 2 configuration, 3 numerical failure, 4 I/O.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gridforge/gridforge.hpp"

using namespace gridforge;
using nlohmann::json;

namespace {

int exit_code(ErrorKind k)
{
    switch (k) {
    case ErrorKind::config: return 2;
    case ErrorKind::numerical: return 3;
    case ErrorKind::io: return 4;
    }
    return 1;
}

const char* kind_name(ErrorKind k)
{
    switch (k) {
    case ErrorKind::config: return "config";
    case ErrorKind::numerical: return "numerical";
    case ErrorKind::io: return "io";
    }
    return "unknown";
}

void report_error(bool as_json, const char* kind, const std::string& code, const std::string& msg)
{
    if (as_json) {
        json j;
        j["error"] = {{"kind", kind}, {"code", code}, {"message", msg}};
        std::cerr << j.dump() << "\n";
    } else {
        std::cerr << "gridforge: " << kind << " error (" << code << "): " << msg << "\n";
    }
}

void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        detail::fail(ErrorKind::io, "open_failed", "cannot write " + path);
    out << text;
    if (!out)
        detail::fail(ErrorKind::io, "write_failed", "error while writing " + path);
}

AnalyticField resolve_flux(const std::string& arg)
{
    if (arg == "solovev" || arg == "annulus")
        return field_from_json(json(arg));
    std::ifstream in(arg);
    if (!in)
        detail::fail(ErrorKind::io, "open_failed", "'" + arg + "' is neither a known field nor a readable file");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        detail::config_failure("bad_flux", arg + ": " + e.what());
    }
    return field_from_json(j);
}

std::string fmt(double v)
{
    char b[40];
    std::snprintf(b, sizeof b, "%.10g", v);
    return b;
}

std::string svg_for(const GridFile& f, const SvgOptions& so, bool contours)
{
    if (!contours)
        return emit_svg(f.grid, so);
    const RunConfig cfg = run_config_of(f);
    return emit_svg_with_contours(f.grid, so, cfg.field(), f.constant("psi0"), f.constant("psi1"),
                                  !cfg.is_annulus());
}

json quality_json(const GridFile& f)
{
    const QualityReport q = quality_report(f.grid);
    json j;
    j["kind"] = f.kind;
    j["n1"] = f.n1();
    j["n2"] = f.n2();
    j["lu_min"] = q.lu_min;
    j["lu_max"] = q.lu_max;
    j["lv_min"] = q.lv_min;
    j["lv_max"] = q.lv_max;
    j["a_u"] = q.a_u;
    j["a_v"] = q.a_v;
    j["area"] = q.area;
    j["green_area"] = q.green_area;
    j["boundary_angle"] = q.boundary_angle;
    j["nonorthogonality"] = q.nonorthogonality;
    j["jacobian_consistency"] = jacobian_consistency(f.grid);
    if (f.provenance.contains("closure_error"))
        j["closure_error"] = f.provenance.at("closure_error");
    return j;
}

BenchmarkProblem problem_for(const std::string& name, const GridFile& f)
{
    BenchmarkProblem pb;
    if (name == "flux_aligned")
        pb = BenchmarkProblem::flux_aligned();
    else if (name == "localized")
        pb = BenchmarkProblem::localized({f.constant("frame_x"), f.constant("frame_y")});
    else
        detail::config_failure("unknown_problem", "problem must be flux_aligned or localized, got '" + name + "'");
    pb.psi0 = f.constant("psi0");
    pb.psi1 = f.constant("psi1");
    return pb;
}

double benchmark_error(const GridFile& f, const std::string& problem)
{
    const RunConfig cfg = run_config_of(f);
    return solve_benchmark(cfg.field(), f.grid, f.constant("psi0"), f.constant("psi1"), problem_for(problem, f))
        .rel_error;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Structured elliptic and flux-aligned grids between two flux contours"};
    app.require_subcommand(1);
    bool error_json = false;
    app.add_flag("--error-json", error_json, "Report failures as one JSON object on stderr");

    // generate
    RunConfig cfg;
    std::string flux_arg = "solovev", type_arg = "monitor", weight_arg = "grad_psi", first_line_arg = "inner";
    std::vector<double> center;
    std::string out_path, gen_svg;
    std::size_t gen_stride = 1;
    auto* gen = app.add_subcommand("generate", "Build a grid and write it as JSON");
    gen->add_option("--flux", flux_arg, "solovev, annulus, or a JSON field file")->capture_default_str();
    gen->add_option("--psi0", cfg.psi0, "Inner contour")->capture_default_str();
    gen->add_option("--psi1", cfg.psi1, "Outer contour")->capture_default_str();
    gen->add_option("--type", type_arg, "orthogonal, conformal, adapted or monitor")->capture_default_str();
    gen->add_option("--nu", cfg.n_u, "Cells across the contours")->capture_default_str();
    gen->add_option("--nv", cfg.n_v, "Cells around")->capture_default_str();
    gen->add_option("--nodes-per-cell", cfg.nodes_per_cell, "Gauss points per cell and direction")
        ->capture_default_str();
    gen->add_option("--k", cfg.k, "Monitor anisotropy")->capture_default_str();
    gen->add_option("--eps", cfg.eps, "Monitor isotropic floor")->capture_default_str();
    gen->add_option("--weight", weight_arg, "unity or grad_psi")->capture_default_str();
    gen->add_option("--first-line", first_line_arg, "Orthogonal grids: seed on the inner or outer contour")
        ->capture_default_str();
    gen->add_option("--center", center, "Point inside the inner contour (x y)")->expected(2);
    gen->add_option("--rtol", cfg.rtol, "Streamline relative tolerance")->capture_default_str();
    gen->add_option("--atol", cfg.atol, "Streamline absolute tolerance")->capture_default_str();
    gen->add_option("--solver-tol", cfg.solver_tolerance, "Relative residual for CG")->capture_default_str();
    gen->add_option("--lattice-zeta", cfg.lattice_zeta, "Solver lattice rows (0: automatic)")->capture_default_str();
    gen->add_option("--lattice-eta", cfg.lattice_eta, "Solver lattice columns (0: automatic)")->capture_default_str();
    bool no_richardson = false;
    gen->add_flag("--no-richardson", no_richardson, "Skip the refined second solve");
    gen->add_option("--out", out_path, "Grid file to write")->required();
    gen->add_option("--svg", gen_svg, "Also write an SVG wireframe");
    gen->add_option("--stride", gen_stride, "SVG line stride")->capture_default_str();

    // quality
    std::string grid_path, json_out;
    auto* qual = app.add_subcommand("quality", "Cell size and shape report");
    qual->add_option("grid", grid_path, "Grid file")->required();
    qual->add_option("--json", json_out, "Also write the report as JSON");

    // verify
    std::string problem = "flux_aligned";
    std::vector<std::size_t> sweep;
    auto* ver = app.add_subcommand("verify", "Solve a benchmark problem on a grid");
    ver->add_option("grid", grid_path, "Grid file")->required();
    ver->add_option("--problem", problem, "flux_aligned or localized")->capture_default_str();
    ver->add_option("--sweep", sweep, "Regenerate at these nu values (nv scaled alike) and report orders")
        ->delimiter(',');
    ver->add_option("--json", json_out, "Also write the report as JSON");

    // svg
    std::string svg_out;
    SvgOptions so;
    bool no_contours = false;
    auto* svg = app.add_subcommand("svg", "Wireframe plot of a grid");
    svg->add_option("grid", grid_path, "Grid file")->required();
    svg->add_option("--out", svg_out, "SVG file to write")->required();
    svg->add_option("--stride", so.stride, "Draw every n-th line")->capture_default_str();
    svg->add_option("--width", so.width, "Width in pixels")->capture_default_str();
    svg->add_flag("--no-contours", no_contours, "Skip the flux contours");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        report_error(error_json, "config", "bad_arguments", e.what());
        return 2;
    }

    try {
        if (*gen) {
            cfg.flux = resolve_flux(flux_arg);
            cfg.type = parse_grid_type(type_arg);
            if (weight_arg != "unity" && weight_arg != "grad_psi")
                detail::config_failure("bad_weight", "weight must be unity or grad_psi");
            cfg.weight = weight_arg == "unity" ? WeightMode::unity : WeightMode::grad_psi;
            if (first_line_arg != "inner" && first_line_arg != "outer")
                detail::config_failure("bad_first_line", "first line must be inner or outer");
            cfg.first_line = first_line_arg == "inner" ? FirstLine::inner : FirstLine::outer;
            if (center.size() == 2)
                cfg.center = Point{center[0], center[1]};
            cfg.richardson = !no_richardson;
            cfg.validate();
            const RunResult r = run_generate(cfg);
            write_grid_file(out_path, r.file);
            if (!gen_svg.empty()) {
                SvgOptions gso;
                gso.stride = gen_stride;
                write_text(gen_svg, svg_for(r.file, gso, true));
            }
            const GridFile& f = r.file;
            if (f.kind == "elliptic")
                std::cout << "c0 " << fmt(f.constant("c0")) << "\nu1 " << fmt(f.constant("u1")) << "\n";
            else
                std::cout << "f0 " << fmt(f.constant("f0")) << "\nzeta1 " << fmt(f.constant("zeta1")) << "\n";
            std::cout << "nodes " << f.grid.size() << " (" << f.n1() << " x " << f.n2() << ")\n"
                      << "time " << fmt(r.seconds) << " s\n";
        } else if (*qual) {
            const GridFile f = read_grid_file(grid_path);
            const json q = quality_json(f);
            for (const auto& [k, v] : q.items())
                std::cout << k << " " << (v.is_number_float() ? fmt(v.get<double>()) : v.dump()) << "\n";
            if (!json_out.empty())
                write_text(json_out, q.dump(1) + "\n");
        } else if (*ver) {
            const GridFile f = read_grid_file(grid_path);
            json rep;
            rep["problem"] = problem;
            if (sweep.empty()) {
                const double e = benchmark_error(f, problem);
                rep["rel_error"] = e;
                std::cout << problem << " rel_error " << fmt(e) << "\n";
            } else {
                const RunConfig base = run_config_of(f);
                std::vector<double> errors;
                for (std::size_t nu : sweep) {
                    RunConfig c = base;
                    c.n_u = nu;
                    c.n_v = std::max<std::size_t>(4, base.n_v * nu / base.n_u);
                    c.nodes_per_cell = 1;
                    const GridFile g = run_generate(c).file;
                    errors.push_back(benchmark_error(g, problem));
                    std::cout << "nu " << nu << " nv " << c.n_v << " rel_error " << fmt(errors.back()) << "\n";
                    rep["series"].push_back({{"nu", nu}, {"nv", c.n_v}, {"rel_error", errors.back()}});
                }
                const std::vector<double> orders = convergence_order(errors);
                std::cout << "orders";
                for (double o : orders)
                    std::cout << " " << fmt(o);
                std::cout << "\n";
                rep["orders"] = orders;
            }
            if (!json_out.empty())
                write_text(json_out, rep.dump(1) + "\n");
        } else if (*svg) {
            const GridFile f = read_grid_file(grid_path);
            write_text(svg_out, svg_for(f, so, !no_contours));
        }
    } catch (const Error& e) {
        report_error(error_json, kind_name(e.kind()), e.code(), e.what());
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        report_error(error_json, "numerical", "internal", e.what());
        return 3;
    }
    return 0;
}
