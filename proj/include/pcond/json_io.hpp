#pragma once

#include <utility>

#include <json.hpp>

#include "pcond/field.hpp"
#include "pcond/mesh.hpp"
#include "pcond/oned.hpp"

namespace pcond {

// Mesh and conductivity serialize to one JSON document: vertex coordinate
// pairs, triangle index triples, boundary loop, and per-triangle
// conductivity entries that are finite numbers or the tags "0" / "inf".

nlohmann::json mesh_to_json(const Mesh2D& mesh);
Mesh2D mesh_from_json(const nlohmann::json& j);

nlohmann::json conductivity_to_json(const ConductivityField& sigma);
ConductivityField conductivity_from_json(const nlohmann::json& j);

nlohmann::json domain_to_json(const Mesh2D& mesh, const ConductivityField& sigma);
std::pair<Mesh2D, ConductivityField> domain_from_json(const nlohmann::json& j);

// 1D conductivities use a breakpoint array plus a value array with the same
// "0" / "inf" tags.
nlohmann::json interval_to_json(const oned::PiecewiseConductivity1D& sigma);
oned::PiecewiseConductivity1D interval_from_json(const nlohmann::json& j);

}  // namespace pcond
