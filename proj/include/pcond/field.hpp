#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "pcond/mesh.hpp"

namespace pcond {

/// Per-triangle conductivity on [0, inf]. Degenerate regions are tagged by
/// masks; values hold 0.0 / +inf sentinels there so the field serializes
/// without a side channel.
struct ConductivityField {
    std::vector<double> values;
    std::vector<std::uint8_t> d0_mask;
    std::vector<std::uint8_t> dinf_mask;

    static ConductivityField uniform(std::size_t n_triangles, double value);

    void set_value(int t, double v);
    void set_zero(int t);
    void set_infinite(int t);

    bool finite_at(int t) const { return !d0_mask[t] && !dinf_mask[t]; }
    bool has_degenerate() const;
};

/// Dirichlet data: one value per boundary vertex, in mesh boundary order.
struct BoundaryTrace {
    std::vector<double> values;
};

BoundaryTrace trace_from_function(const Mesh2D& mesh, const std::function<double(Vec2)>& f);

/// Minimization knobs. The exponent p travels separately with each operation.
struct SolverConfig {
    double epsilon_reg = 1e-6;
    double tol_energy = 1e-12;
    double tol_residual = 1e-8;
    int max_iters = 200;
};

void validate_config(const SolverConfig& cfg);

/// Rejects p outside the open interval (1, inf).
void validate_exponent(double p);

struct ValidationReport {
    bool ok = true;
    std::vector<std::string> violations;
};

/// Checks the admissibility hypotheses of the degenerate direct problem:
/// masks disjoint, finite part bounded away from 0 and inf, closed zero and
/// infinite regions not touching each other or the domain boundary (shared
/// vertices), and the infinite region not covering the whole domain.
ValidationReport validate_field(const Mesh2D& mesh, const ConductivityField& sigma);

/// Throws std::invalid_argument listing all violations.
void require_valid_field(const Mesh2D& mesh, const ConductivityField& sigma);

// Shape masks used to paint inclusion regions (triangle centroid membership).
struct Disk {
    Vec2 center;
    double radius = 0.0;
};

struct Box2 {
    Vec2 lo;
    Vec2 hi;
};

bool contains(const Disk& d, Vec2 x);
bool contains(const Box2& b, Vec2 x);

void paint(const Mesh2D& mesh, ConductivityField& sigma, const Disk& shape, double value);
void paint(const Mesh2D& mesh, ConductivityField& sigma, const Box2& shape, double value);

}  // namespace pcond
