#pragma once

#include <span>
#include <utility>
#include <vector>

#include "pcond/field.hpp"
#include "pcond/mesh.hpp"

namespace pcond {

/// Discrete solution: P1 vertex values, the exact per-triangle gradients of
/// their interpolant, and the (unregularized) energy \int sigma |grad u|^p.
struct PotentialField {
    std::vector<double> vertex_values;
    std::vector<Vec2> gradients;
    double energy = 0.0;
};

struct SolveReport {
    int iterations = 0;
    double final_energy = 0.0;
    double residual = 0.0;
    std::vector<double> dinf_component_values;
    bool converged = false;
};

/// Reduction of vertex unknowns: boundary vertices are fixed, each connected
/// component of the infinite region collapses to a single unknown, interior
/// vertices of the zero region are excluded (their value is arbitrary and
/// set to 0), and zero-region triangles drop out of every integral.
struct DofMap {
    static constexpr int kFixed = -1;
    static constexpr int kExcluded = -2;

    std::vector<int> vertex_dof;  // free dof index, kFixed, or kExcluded
    int free_count = 0;
    std::vector<std::vector<int>> dinf_components;  // vertex lists
    std::vector<int> dinf_component_dof;
    std::vector<char> tri_active;  // finite-conductivity triangles

    bool is_free(int v) const { return vertex_dof[v] >= 0; }
};

/// Assumes the field has been validated.
DofMap build_dof_map(const Mesh2D& mesh, const ConductivityField& sigma);

/// \int sigma |grad u|^p as an extended real: zero-region triangles
/// contribute nothing, infinite-region triangles contribute +inf unless the
/// interpolant is exactly constant there (tested on vertex values).
double energy(const Mesh2D& mesh, const ConductivityField& sigma, double p,
              const PotentialField& u);

/// Norm of the unregularized weak-form pairings against interior hat
/// functions (infinite-region components collapsed to one test function),
/// scaled by the energy. Returns +inf if u is not constant on some
/// infinite-region triangle.
double weak_residual(const Mesh2D& mesh, const ConductivityField& sigma, double p,
                     std::span<const double> vertex_values);

/// Minimizes \int sigma (|grad u|^2 + eps^2)^{p/2} over P1 functions with
/// the prescribed trace by damped Newton with epsilon-continuation, starting
/// from the p=2 solution (or the caller's initial guess). Throws SolveError
/// when the iteration cap or the Hessian fallbacks are exhausted before the
/// weak residual reaches cfg.tol_residual.
std::pair<PotentialField, SolveReport> solve(const Mesh2D& mesh, const ConductivityField& sigma,
                                             double p, const BoundaryTrace& f,
                                             const SolverConfig& cfg,
                                             const std::vector<double>* initial_guess = nullptr);

}  // namespace pcond
