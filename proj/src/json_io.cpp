#include "pcond/json_io.hpp"

#include <cmath>
#include <stdexcept>

namespace pcond {

namespace {

nlohmann::json value_entry(double v, bool zero, bool inf) {
    if (zero) return "0";
    if (inf) return "inf";
    return v;
}

double parse_value_entry(const nlohmann::json& e, bool& zero, bool& inf) {
    zero = inf = false;
    if (e.is_string()) {
        const std::string s = e.get<std::string>();
        if (s == "0") {
            zero = true;
            return 0.0;
        }
        if (s == "inf") {
            inf = true;
            return std::numeric_limits<double>::infinity();
        }
        throw std::invalid_argument("conductivity entry string must be \"0\" or \"inf\"");
    }
    if (!e.is_number()) {
        throw std::invalid_argument("conductivity entry must be a number or \"0\"/\"inf\"");
    }
    const double v = e.get<double>();
    if (v == 0.0) zero = true;
    return v;
}

}  // namespace

nlohmann::json mesh_to_json(const Mesh2D& mesh) {
    nlohmann::json j;
    auto& vertices = j["vertices"] = nlohmann::json::array();
    for (const auto& v : mesh.vertices()) vertices.push_back({v.x, v.y});
    auto& triangles = j["triangles"] = nlohmann::json::array();
    for (const auto& t : mesh.triangles()) triangles.push_back({t[0], t[1], t[2]});
    j["boundary_vertices"] = mesh.boundary_vertices();
    return j;
}

Mesh2D mesh_from_json(const nlohmann::json& j) {
    std::vector<Vec2> vertices;
    for (const auto& v : j.at("vertices")) {
        vertices.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
    }
    std::vector<std::array<int, 3>> triangles;
    for (const auto& t : j.at("triangles")) {
        triangles.push_back({t.at(0).get<int>(), t.at(1).get<int>(), t.at(2).get<int>()});
    }
    std::vector<int> boundary = j.at("boundary_vertices").get<std::vector<int>>();
    return Mesh2D(std::move(vertices), std::move(triangles), std::move(boundary));
}

nlohmann::json conductivity_to_json(const ConductivityField& sigma) {
    nlohmann::json entries = nlohmann::json::array();
    for (std::size_t t = 0; t < sigma.values.size(); ++t) {
        entries.push_back(value_entry(sigma.values[t], sigma.d0_mask[t] != 0,
                                      sigma.dinf_mask[t] != 0));
    }
    return entries;
}

ConductivityField conductivity_from_json(const nlohmann::json& j) {
    ConductivityField sigma = ConductivityField::uniform(j.size(), 1.0);
    for (std::size_t t = 0; t < j.size(); ++t) {
        bool zero = false, inf = false;
        const double v = parse_value_entry(j.at(t), zero, inf);
        if (zero) {
            sigma.set_zero(static_cast<int>(t));
        } else if (inf) {
            sigma.set_infinite(static_cast<int>(t));
        } else {
            sigma.set_value(static_cast<int>(t), v);
        }
    }
    return sigma;
}

nlohmann::json domain_to_json(const Mesh2D& mesh, const ConductivityField& sigma) {
    nlohmann::json j = mesh_to_json(mesh);
    j["conductivity"] = conductivity_to_json(sigma);
    return j;
}

std::pair<Mesh2D, ConductivityField> domain_from_json(const nlohmann::json& j) {
    Mesh2D mesh = mesh_from_json(j);
    ConductivityField sigma = conductivity_from_json(j.at("conductivity"));
    if (sigma.values.size() != mesh.triangle_count()) {
        throw std::invalid_argument("domain_from_json: conductivity size mismatch");
    }
    return {std::move(mesh), std::move(sigma)};
}

nlohmann::json interval_to_json(const oned::PiecewiseConductivity1D& sigma) {
    nlohmann::json j;
    j["breakpoints"] = sigma.breakpoints;
    auto& values = j["values"] = nlohmann::json::array();
    for (double v : sigma.piece_values) {
        values.push_back(value_entry(v, v == 0.0, std::isinf(v)));
    }
    return j;
}

oned::PiecewiseConductivity1D interval_from_json(const nlohmann::json& j) {
    std::vector<double> breakpoints = j.at("breakpoints").get<std::vector<double>>();
    std::vector<double> values;
    for (const auto& e : j.at("values")) {
        bool zero = false, inf = false;
        const double v = parse_value_entry(e, zero, inf);
        values.push_back(inf ? std::numeric_limits<double>::infinity() : (zero ? 0.0 : v));
    }
    return oned::PiecewiseConductivity1D::make(std::move(breakpoints), std::move(values));
}

}  // namespace pcond
