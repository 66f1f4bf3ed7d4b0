#pragma once

#include <span>
#include <string>
#include <vector>

#include "pcond/enclosure.hpp"
#include "pcond/field.hpp"
#include "pcond/mesh.hpp"

namespace pcond::svg {

/// Mesh triangles colored by conductivity (zero regions blue, infinite
/// regions dark red, finite values on a gray ramp); optional overlay of a
/// vertex field rendered as a warm/cold ramp instead.
std::string render_field(const Mesh2D& mesh, const ConductivityField& sigma,
                         const std::vector<double>* vertex_values);

/// Field plot with the reconstructed hull polygon and the probe directions
/// drawn on top.
std::string render_hull_overlay(const Mesh2D& mesh, const ConductivityField& sigma,
                                const enclosure::HullPolygon& hull);

void write_file(const std::string& path, const std::string& content);

}  // namespace pcond::svg
