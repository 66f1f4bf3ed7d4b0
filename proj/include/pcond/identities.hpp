#pragma once

#include <span>
#include <utility>

#include "pcond/field.hpp"
#include "pcond/mesh.hpp"

namespace pcond {

struct RellichReport {
    double lhs = 0.0;              // \int (alpha . grad sigma) |grad u|^p
    double rhs_normal_term = 0.0;  // \int_bdry alpha.nu sigma |grad u|^p
    double rhs_flux_term = 0.0;    // p \int_bdry (alpha . grad u) sigma |grad u|^{p-2} du/dnu
    double residual = 0.0;         // |lhs - rhs_normal_term + rhs_flux_term|
    Vec2 alpha{};
};

/// Assembles both sides of the Rellich identity for the solution with trace
/// f. The conductivity lives at vertices (P1) so its gradient exists; the
/// solve itself uses the vertex-averaged per-triangle field.
RellichReport rellich_check(const Mesh2D& mesh, std::span<const double> sigma_vertex, double p,
                            const BoundaryTrace& f, Vec2 alpha, const SolverConfig& cfg);

struct MonotonicityReport {
    double lower = 0.0;
    double middle = 0.0;
    double upper = 0.0;
    std::pair<double, double> margins{0.0, 0.0};  // (middle - lower, upper - middle)
};

/// Evaluates the monotonicity sandwich
///   (p-1) \int (sigma0 / sigma1^{1/(p-1)}) (sigma1^{1/(p-1)} - sigma0^{1/(p-1)}) |grad u0|^p
///     <= <(Lambda_{sigma1} - Lambda_{sigma0}) f, f>
///     <= \int (sigma1 - sigma0) |grad u0|^p.
/// Requires both fields finite and positive (no degenerate regions).
MonotonicityReport monotonicity_check(const Mesh2D& mesh, const ConductivityField& sigma0,
                                      const ConductivityField& sigma1, double p,
                                      const BoundaryTrace& f, const SolverConfig& cfg);

}  // namespace pcond
