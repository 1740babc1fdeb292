#pragma once

// One validated description of a grid run, shared by the CLI and the tests.
// It is stored in every grid file so that quality/verify/svg can rebuild the
// flux field and regenerate refinement series.

#include <chrono>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <variant>

#include <json.hpp>

#include "gridforge/error.hpp"
#include "gridforge/final_grid.hpp"
#include "gridforge/flux.hpp"
#include "gridforge/io.hpp"
#include "gridforge/ortho_grid.hpp"

namespace gridforge {

enum class GridType { orthogonal, conformal, adapted, monitor };

inline const char* grid_type_name(GridType t)
{
    switch (t) {
    case GridType::orthogonal: return "orthogonal";
    case GridType::conformal: return "conformal";
    case GridType::adapted: return "adapted";
    case GridType::monitor: return "monitor";
    }
    return "?";
}

/// JSON description of a field: {type, A, c[12], R0, amplitude} for the
/// Solovʼev equilibrium, {type, center, scale} for the annulus.
inline nlohmann::json field_to_json(const AnalyticField& f)
{
    nlohmann::json j;
    j["type"] = f.name();
    if (const auto* a = std::get_if<Annulus>(&f.kind)) {
        j["center"] = {a->center.x, a->center.y};
        j["scale"] = a->scale;
    } else if (const auto* s = std::get_if<SolovevField>(&f.kind)) {
        j["A"] = s->A;
        j["c"] = s->c;
        j["R0"] = s->R0;
        j["amplitude"] = s->amplitude;
        j["inverse_aspect_ratio"] = s->inverse_aspect_ratio;
        j["elongation"] = s->elongation;
        j["triangularity"] = s->triangularity;
    }
    return j;
}

/// Named fields ("solovev", "annulus") or a JSON description.
inline AnalyticField field_from_json(const nlohmann::json& j)
{
    if (j.is_string()) {
        const std::string name = j.get<std::string>();
        if (name == "solovev")
            return {SolovevField::standard_x()};
        if (name == "annulus")
            return {Annulus{}};
        detail::config_failure("unknown_flux", "flux must be 'solovev', 'annulus' or a JSON file, got '" + name + "'");
    }
    try {
        const std::string type = j.at("type").get<std::string>();
        if (type == "annulus") {
            Annulus a;
            if (j.contains("center"))
                a.center = {j.at("center").at(0).get<double>(), j.at("center").at(1).get<double>()};
            a.scale = j.value("scale", 1.0);
            if (!(a.scale > 0.0) || !std::isfinite(a.scale))
                detail::config_failure("bad_flux", "annulus scale must be positive");
            return {a};
        }
        if (type == "solovev") {
            SolovevField s = SolovevField::standard_x();
            s.A = j.at("A").get<double>();
            const auto& c = j.at("c");
            if (!c.is_array() || c.size() != s.c.size())
                detail::config_failure("bad_flux", "solovev field needs 12 coefficients in 'c'");
            for (std::size_t i = 0; i < s.c.size(); ++i)
                s.c[i] = c.at(i).get<double>();
            s.R0 = j.at("R0").get<double>();
            s.amplitude = j.value("amplitude", 1.0);
            s.inverse_aspect_ratio = j.value("inverse_aspect_ratio", s.inverse_aspect_ratio);
            s.elongation = j.value("elongation", s.elongation);
            s.triangularity = j.value("triangularity", s.triangularity);
            if (!(s.R0 > 0.0) || !std::isfinite(s.R0) || !std::isfinite(s.amplitude) || s.amplitude == 0.0)
                detail::config_failure("bad_flux", "solovev field needs R0 > 0 and a nonzero amplitude");
            return {s};
        }
        detail::config_failure("unknown_flux", "unsupported field type '" + type + "'");
    } catch (const nlohmann::json::exception& e) {
        detail::config_failure("bad_flux", std::string("bad field description: ") + e.what());
    }
}

struct RunConfig {
    AnalyticField flux{SolovevField::standard_x()};
    double psi0 = -20.0, psi1 = -1.0;
    GridType type = GridType::monitor;
    std::size_t n_u = 32, n_v = 320;
    std::size_t nodes_per_cell = 1;
    double k = 0.1, eps = 0.001;
    WeightMode weight = WeightMode::grad_psi;
    FirstLine first_line = FirstLine::inner; ///< orthogonal grids only
    std::optional<Point> center;             ///< point inside the contours; per-flux default
    double rtol = 1e-11, atol = 1e-13;
    double solver_tolerance = 1e-11;
    std::size_t lattice_zeta = 0, lattice_eta = 0; ///< 0: automatic
    bool richardson = true;

    void validate() const
    {
        if (!is_annulus() && !std::holds_alternative<SolovevField>(flux.kind))
            detail::config_failure("unknown_flux", "grids need a 'solovev' or 'annulus' field");
        if (!std::isfinite(psi0) || !std::isfinite(psi1) || psi0 == psi1)
            detail::config_failure("equal_contours", "psi0 and psi1 must be finite and differ");
        if (n_u < 2 || n_v < 4)
            detail::config_failure("bad_resolution", "need nu >= 2 and nv >= 4");
        if (nodes_per_cell < 1 || nodes_per_cell > 16)
            detail::config_failure("bad_resolution", "nodes per cell must be in 1..16");
        if (!(k > 0.0) || !(eps >= 0.0))
            detail::config_failure("bad_monitor", "monitor parameters need k > 0 and eps >= 0");
        if (!(rtol > 0.0) || !(atol > 0.0) || !(solver_tolerance > 0.0))
            detail::config_failure("bad_tolerance", "tolerances must be positive");
        if (is_annulus() && (psi0 <= 0.0 || psi1 <= 0.0))
            detail::config_failure("bad_contour", "annulus contours need psi > 0");
        if (const auto* s = std::get_if<SolovevField>(&flux.kind)) {
            // both contours must be closed surfaces on the axis side of the separatrix
            if (const auto xp = x_point(*s)) {
                const double sep = s->jet(*xp).psi;
                const double axis = s->jet({s->R0, 0.0}).psi;
                const bool inside = axis < sep ? std::max(psi0, psi1) < sep : std::min(psi0, psi1) > sep;
                if (!inside) {
                    std::ostringstream os;
                    os << "contours must lie inside the separatrix (psi = " << sep << " at the X-point)";
                    detail::config_failure("open_contour", os.str());
                }
            }
        }
    }

    bool is_annulus() const { return std::holds_alternative<Annulus>(flux.kind); }

    Point center_hint() const
    {
        if (center)
            return *center;
        if (const auto* a = std::get_if<Annulus>(&flux.kind))
            return a->center;
        return {std::get<SolovevField>(flux.kind).R0, 0.0};
    }
    // about a tenth of the minor radius for the standard equilibrium
    double search_radius() const { return is_annulus() ? 0.5 : 0.09 * std::get<SolovevField>(flux.kind).R0; }

    const AnalyticField& field() const { return flux; }

    ChiSpec chi() const
    {
        switch (type) {
        case GridType::conformal: return ChiSpec::conformal();
        case GridType::adapted: return ChiSpec::adapted(weight);
        case GridType::monitor: return ChiSpec::monitor(k, eps);
        case GridType::orthogonal: break;
        }
        detail::config_failure("no_chi", "orthogonal grids have no conduction tensor");
    }

    IntegratorConfig ode() const
    {
        IntegratorConfig c;
        c.rtol = rtol;
        c.atol = atol;
        return c;
    }
};

inline GridType parse_grid_type(const std::string& s)
{
    for (GridType t : {GridType::orthogonal, GridType::conformal, GridType::adapted, GridType::monitor})
        if (s == grid_type_name(t))
            return t;
    detail::config_failure("unknown_type", "unknown grid type '" + s + "'");
}

inline nlohmann::json to_json(const RunConfig& c)
{
    nlohmann::json j;
    j["flux"] = field_to_json(c.flux);
    j["psi0"] = c.psi0;
    j["psi1"] = c.psi1;
    j["type"] = grid_type_name(c.type);
    j["nu"] = c.n_u;
    j["nv"] = c.n_v;
    j["nodes_per_cell"] = c.nodes_per_cell;
    j["k"] = c.k;
    j["eps"] = c.eps;
    j["weight"] = c.weight == WeightMode::unity ? "unity" : "grad_psi";
    j["first_line"] = c.first_line == FirstLine::inner ? "inner" : "outer";
    const Point p = c.center_hint();
    j["center"] = {p.x, p.y};
    j["rtol"] = c.rtol;
    j["atol"] = c.atol;
    j["solver_tolerance"] = c.solver_tolerance;
    j["lattice_zeta"] = c.lattice_zeta;
    j["lattice_eta"] = c.lattice_eta;
    j["richardson"] = c.richardson;
    return j;
}

inline RunConfig run_config_from_json(const nlohmann::json& j)
{
    RunConfig c;
    try {
        c.flux = field_from_json(j.at("flux"));
        c.psi0 = j.at("psi0").get<double>();
        c.psi1 = j.at("psi1").get<double>();
        c.type = parse_grid_type(j.at("type").get<std::string>());
        c.n_u = j.at("nu").get<std::size_t>();
        c.n_v = j.at("nv").get<std::size_t>();
        c.nodes_per_cell = j.value("nodes_per_cell", std::size_t{1});
        c.k = j.value("k", 0.1);
        c.eps = j.value("eps", 0.001);
        c.weight = j.value("weight", std::string("grad_psi")) == "unity" ? WeightMode::unity : WeightMode::grad_psi;
        c.first_line = j.value("first_line", std::string("inner")) == "outer" ? FirstLine::outer : FirstLine::inner;
        if (j.contains("center"))
            c.center = Point{j.at("center").at(0).get<double>(), j.at("center").at(1).get<double>()};
        c.rtol = j.value("rtol", 1e-11);
        c.atol = j.value("atol", 1e-13);
        c.solver_tolerance = j.value("solver_tolerance", 1e-11);
        c.lattice_zeta = j.value("lattice_zeta", std::size_t{0});
        c.lattice_eta = j.value("lattice_eta", std::size_t{0});
        c.richardson = j.value("richardson", true);
    } catch (const nlohmann::json::exception& e) {
        detail::fail(ErrorKind::io, "schema_error", std::string("bad run configuration: ") + e.what());
    }
    c.validate();
    return c;
}

/// The run configuration recorded in a grid file.
inline RunConfig run_config_of(const GridFile& f)
{
    if (!f.provenance.is_object() || !f.provenance.contains("config"))
        detail::fail(ErrorKind::io, "schema_error", "grid file carries no run configuration");
    return run_config_from_json(f.provenance.at("config"));
}

struct RunResult {
    GridFile file;
    double seconds = 0.0;
};

inline RunResult run_generate(const RunConfig& cfg)
{
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const AnalyticField& field = cfg.field();
    nlohmann::json prov;
    prov["config"] = to_json(cfg);
    prov["generator"] = "gridforge";
    RunResult r;
    if (cfg.type == GridType::orthogonal) {
        OrthogonalOptions o;
        o.weight = cfg.weight;
        o.first_line = cfg.first_line;
        o.center_hint = cfg.center_hint();
        o.search_radius = cfg.search_radius();
        o.ode = cfg.ode();
        const FluxAlignedGrid g =
            generate_orthogonal(field, cfg.psi0, cfg.psi1, cfg.n_u, cfg.n_v, o, cfg.nodes_per_cell);
        prov["closure_error"] = g.closure_error;
        r.file = to_grid_file(g, prov);
    } else {
        EllipticOptions o;
        o.lattice.center_hint = cfg.center_hint();
        o.lattice.search_radius = cfg.search_radius();
        o.lattice_zeta = cfg.lattice_zeta;
        o.lattice_eta = cfg.lattice_eta;
        o.richardson = cfg.richardson;
        o.solver.tolerance = cfg.solver_tolerance;
        o.ode = cfg.ode();
        const ChiSpec chi = cfg.chi();
        const EllipticGrid g = build_elliptic(field, cfg.psi0, cfg.psi1, chi, cfg.n_u, cfg.n_v, o, cfg.nodes_per_cell);
        prov["chi"] = chi.name();
        prov["closure_error"] = g.v_closure_error;
        prov["solver_iterations"] = g.solver_iterations;
        prov["solver_residual"] = g.solver_residual;
        r.file = to_grid_file(g, prov);
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

} // namespace gridforge
