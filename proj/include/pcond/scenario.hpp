#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pcond/field.hpp"
#include "pcond/mesh.hpp"
#include "pcond/oned.hpp"

namespace pcond {

// Scenario JSON schema, version "1". Parsing is strict: unknown keys are
// rejected everywhere, and each kind has its own required sections. The
// schema is documented in the repository README.

struct RectGeometry {
    int nx = 0;
    int ny = 0;
    double width = 0.0;
    double height = 0.0;
    Vec2 origin{0.0, 0.0};
};

struct Region {
    enum class Shape { Disk, Box } shape = Shape::Disk;
    Disk disk;
    Box2 box;
    double value = 1.0;  // 0.0 and +inf encode the degenerate tags
};

struct BoundarySpec {
    enum class Kind { Affine, WolffProbe, Values } kind = Kind::Affine;
    // affine: coeffs[0] * x + coeffs[1] * y + coeffs[2]
    double coeffs[3] = {0.0, 0.0, 0.0};
    // wolff-probe
    Vec2 rho{1.0, 0.0};
    double t = 0.0;
    double tau = 1.0;
    std::pair<double, double> wave_initial{0.0, 1.0};
    // custom values
    std::vector<double> values;
};

struct ProbeSpec {
    int directions = 16;
    std::vector<double> tau;
};

struct Scenario {
    std::string kind;  // forward | oned | enclosure | rellich | monotonicity | wolff
    double p = 2.0;
    SolverConfig solver;
    std::string output_prefix;

    // 2D kinds
    std::optional<RectGeometry> geometry;
    double background = 1.0;
    std::vector<Region> regions;            // painted over the background
    std::vector<Region> regions_secondary;  // monotonicity: extra regions for sigma1
    std::optional<BoundarySpec> boundary;

    // enclosure
    ProbeSpec probes;
    std::pair<double, double> wave_initial{0.0, 1.0};

    // rellich
    double sigma_vertex_coeffs[3] = {0.0, 0.0, 1.0};
    Vec2 alpha{1.0, 0.0};

    // oned
    std::optional<oned::PiecewiseConductivity1D> interval;
    oned::DirichletPair bc_1d;

    std::string source_path;
    std::string content_hash;  // FNV-1a of the scenario file bytes
};

/// Parses and validates a scenario file. Throws SchemaError with the
/// offending key or field in the message.
Scenario parse_scenario(const std::string& path);

struct StageStatus {
    std::string name;
    bool ok = false;
    std::string detail;
};

struct RunSummary {
    std::string scenario_hash;
    double wall_time_seconds = 0.0;
    std::vector<StageStatus> stages;
    std::vector<std::string> outputs;  // files written, all existing on success
    bool all_ok() const;
};

/// Dispatches the scenario to the matching module and writes its outputs
/// (JSON fields, CSV sweeps, SVG plots) under out_dir. Errors from modules
/// propagate as exceptions; the CLI maps them to exit codes.
RunSummary run_scenario(const Scenario& scenario, const std::string& out_dir, bool verbose);

/// Builds the mesh and conductivity of a 2D scenario (exposed for tests).
Mesh2D scenario_mesh(const Scenario& scenario);
ConductivityField scenario_conductivity(const Scenario& scenario, const Mesh2D& mesh,
                                        bool secondary = false);

}  // namespace pcond
