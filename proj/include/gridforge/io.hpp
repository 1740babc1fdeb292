#pragma once

// JSON grid container. Doubles go through nlohmann's shortest round-trip
// formatting, so reading a file back reproduces every value bit for bit.

#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gridforge/error.hpp"
#include "gridforge/final_grid.hpp"
#include "gridforge/grid.hpp"
#include "gridforge/ortho_grid.hpp"

namespace gridforge {

inline constexpr int grid_schema_version = 1;

struct GridFile {
    int schema_version = grid_schema_version;
    std::string kind;                   ///< "flux_aligned" or "elliptic"
    CurvilinearGrid grid;
    std::vector<double> h;              ///< flux_aligned only, may be empty
    std::map<std::string, double> constants;
    nlohmann::json provenance = nlohmann::json::object();

    std::size_t n1() const { return grid.n1(); }
    std::size_t n2() const { return grid.n2(); }
    double constant(const std::string& name) const
    {
        const auto it = constants.find(name);
        if (it == constants.end())
            detail::fail(ErrorKind::io, "schema_error", "grid file has no constant '" + name + "'");
        return it->second;
    }
};

inline GridFile to_grid_file(const FluxAlignedGrid& g, nlohmann::json provenance = nlohmann::json::object())
{
    GridFile f;
    f.kind = "flux_aligned";
    f.grid = g;
    f.h = g.h;
    f.constants = {{"f0", g.f0},       {"zeta1", g.zeta1()},          {"psi0", g.psi0},
                   {"psi1", g.psi1},   {"frame_x", g.frame.center.x}, {"frame_y", g.frame.center.y}};
    f.provenance = std::move(provenance);
    return f;
}

inline GridFile to_grid_file(const EllipticGrid& g, nlohmann::json provenance = nlohmann::json::object())
{
    GridFile f;
    f.kind = "elliptic";
    f.grid = g;
    f.constants = {{"c0", g.c0},       {"u1", g.u1()},                {"psi0", g.psi0},
                   {"psi1", g.psi1},   {"frame_x", g.frame.center.x}, {"frame_y", g.frame.center.y}};
    f.provenance = std::move(provenance);
    return f;
}

namespace detail {

[[noreturn]] inline void schema_failure(const std::string& msg)
{
    fail(ErrorKind::io, "schema_error", msg);
}

inline nlohmann::json finite_array(const std::vector<double>& v, const char* name)
{
    for (double d : v)
        if (!std::isfinite(d))
            fail(ErrorKind::numerical, "non_finite", std::string("array '") + name + "' holds a non-finite value");
    return v;
}

inline std::vector<double> read_array(const nlohmann::json& parent, const char* name, std::size_t expected)
{
    if (!parent.is_object() || !parent.contains(name))
        schema_failure(std::string("missing array '") + name + "'");
    const nlohmann::json& a = parent.at(name);
    if (!a.is_array())
        schema_failure(std::string("'") + name + "' is not an array");
    if (a.size() != expected) {
        std::ostringstream os;
        os << "array '" << name << "' has " << a.size() << " entries, expected " << expected;
        schema_failure(os.str());
    }
    std::vector<double> v;
    v.reserve(a.size());
    for (const auto& e : a) {
        if (!e.is_number())
            schema_failure(std::string("array '") + name + "' holds a non-number");
        v.push_back(e.get<double>());
    }
    return v;
}

inline const nlohmann::json& member(const nlohmann::json& j, const char* name)
{
    if (!j.is_object() || !j.contains(name))
        schema_failure(std::string("missing field '") + name + "'");
    return j.at(name);
}

inline std::size_t read_count(const nlohmann::json& j, const char* name)
{
    const nlohmann::json& v = member(j, name);
    if (!v.is_number_unsigned() || v.get<std::size_t>() == 0)
        schema_failure(std::string("'") + name + "' must be a positive integer");
    return v.get<std::size_t>();
}

constexpr const char* curve_fields[] = {"x", "y", "dx", "dy", "g1x", "g1y", "g2x", "g2y"};

template <class C> // BoundaryCurve, const or not
auto curve_slots(C& c)
{
    return std::array{&c.x, &c.y, &c.dx, &c.dy, &c.g1x, &c.g1y, &c.g2x, &c.g2y};
}

constexpr const char* node_fields[] = {"x", "y", "d1x", "d1y", "d2x", "d2y"};

template <class G> // CurvilinearGrid, const or not
auto node_slots(G& g)
{
    return std::array{&g.x, &g.y, &g.d1x, &g.d1y, &g.d2x, &g.d2y};
}

} // namespace detail

inline nlohmann::json to_json(const GridFile& f)
{
    const std::size_t n = f.grid.size();
    nlohmann::json j;
    j["schema_version"] = f.schema_version;
    j["kind"] = f.kind;
    j["n1"] = f.n1();
    j["n2"] = f.n2();
    j["nodes_per_cell"] = f.grid.nodes_per_cell;
    j["coord1_max"] = f.grid.coord1_max;
    j["coord1_nodes"] = detail::finite_array(f.grid.coord1, "coord1_nodes");
    j["coord2_nodes"] = detail::finite_array(f.grid.coord2, "coord2_nodes");
    j["constants"] = f.constants;
    nlohmann::json arrays = nlohmann::json::object();
    for (std::size_t k = 0; k < 6; ++k) {
        const std::vector<double>& v = *detail::node_slots(f.grid)[k];
        if (v.size() != n)
            detail::config_failure("bad_grid", std::string("node array '") + detail::node_fields[k] + "' has the wrong size");
        arrays[detail::node_fields[k]] = detail::finite_array(v, detail::node_fields[k]);
    }
    if (!f.h.empty())
        arrays["h"] = detail::finite_array(f.h, "h");
    j["arrays"] = std::move(arrays);
    nlohmann::json boundary = nlohmann::json::object();
    for (auto [name, curve] : {std::pair{"inner", &f.grid.inner}, std::pair{"outer", &f.grid.outer}}) {
        if (curve->size() == 0)
            continue;
        nlohmann::json c = nlohmann::json::object();
        for (std::size_t k = 0; k < 8; ++k)
            c[detail::curve_fields[k]] = detail::finite_array(*detail::curve_slots(*curve)[k], detail::curve_fields[k]);
        boundary[name] = std::move(c);
    }
    j["boundary"] = std::move(boundary);
    j["provenance"] = f.provenance;
    return j;
}

inline GridFile grid_file_from_json(const nlohmann::json& j)
{
    if (!j.is_object())
        detail::schema_failure("grid file is not a JSON object");
    GridFile f;
    const nlohmann::json& ver = detail::member(j, "schema_version");
    if (!ver.is_number_integer())
        detail::schema_failure("schema_version must be an integer");
    f.schema_version = ver.get<int>();
    if (f.schema_version != grid_schema_version)
        detail::schema_failure("unsupported schema_version " + std::to_string(f.schema_version));
    const nlohmann::json& kind = detail::member(j, "kind");
    if (!kind.is_string() || (kind != "flux_aligned" && kind != "elliptic"))
        detail::schema_failure("kind must be \"flux_aligned\" or \"elliptic\"");
    f.kind = kind.get<std::string>();

    const std::size_t n1 = detail::read_count(j, "n1"), n2 = detail::read_count(j, "n2");
    f.grid.nodes_per_cell = j.contains("nodes_per_cell") ? detail::read_count(j, "nodes_per_cell") : 1;
    f.grid.coord1 = detail::read_array(j, "coord1_nodes", n1);
    f.grid.coord2 = detail::read_array(j, "coord2_nodes", n2);
    const nlohmann::json& cmax = detail::member(j, "coord1_max");
    if (!cmax.is_number())
        detail::schema_failure("coord1_max must be a number");
    f.grid.coord1_max = cmax.get<double>();

    const nlohmann::json& consts = detail::member(j, "constants");
    if (!consts.is_object())
        detail::schema_failure("constants must be an object");
    for (const auto& [key, value] : consts.items()) {
        if (!value.is_number())
            detail::schema_failure("constant '" + key + "' is not a number");
        f.constants[key] = value.get<double>();
    }
    for (const char* required : {"psi0", "psi1"})
        (void)f.constant(required);
    (void)f.constant(f.kind == "elliptic" ? "c0" : "f0");
    (void)f.constant(f.kind == "elliptic" ? "u1" : "zeta1");

    const nlohmann::json& arrays = detail::member(j, "arrays");
    for (std::size_t k = 0; k < 6; ++k)
        *detail::node_slots(f.grid)[k] = detail::read_array(arrays, detail::node_fields[k], n1 * n2);
    if (arrays.contains("h"))
        f.h = detail::read_array(arrays, "h", n1 * n2);

    if (j.contains("boundary")) {
        const nlohmann::json& b = j.at("boundary");
        if (!b.is_object())
            detail::schema_failure("boundary must be an object");
        for (auto [name, curve] : {std::pair{"inner", &f.grid.inner}, std::pair{"outer", &f.grid.outer}}) {
            if (!b.contains(name))
                continue;
            for (std::size_t k = 0; k < 8; ++k)
                *detail::curve_slots(*curve)[k] = detail::read_array(b.at(name), detail::curve_fields[k], n2);
        }
    }
    if (j.contains("provenance"))
        f.provenance = j.at("provenance");
    return f;
}

inline std::string dump_grid_file(const GridFile& f) { return to_json(f).dump(1) + "\n"; }

inline void write_grid_file(const std::string& path, const GridFile& f)
{
    const std::string text = dump_grid_file(f);
    std::ofstream out(path, std::ios::binary);
    if (!out)
        detail::fail(ErrorKind::io, "open_failed", "cannot write " + path);
    out << text;
    if (!out)
        detail::fail(ErrorKind::io, "write_failed", "error while writing " + path);
}

inline GridFile read_grid_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        detail::fail(ErrorKind::io, "open_failed", "cannot read " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        detail::schema_failure(path + ": " + e.what());
    }
    return grid_file_from_json(j);
}

} // namespace gridforge
