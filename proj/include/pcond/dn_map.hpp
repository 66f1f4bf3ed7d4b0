#pragma once

#include <vector>

#include "pcond/field.hpp"
#include "pcond/mesh.hpp"
#include "pcond/solver.hpp"

namespace pcond {

struct WeakPairing {
    double value = 0.0;
    BoundaryTrace f;
    BoundaryTrace g;
    SolveReport solve_report;
};

/// P1 extension of boundary data by the discrete harmonic (p=2, sigma=1)
/// lift; cheap, deterministic, and independent of p.
std::vector<double> harmonic_extension(const Mesh2D& mesh, const BoundaryTrace& g);

/// Harmonic extension post-processed to be constant on each component of
/// the infinite region (value: component mean), so its gradient vanishes
/// there as the pairing requires.
std::vector<double> flattened_extension(const Mesh2D& mesh, const ConductivityField& sigma,
                                        const BoundaryTrace& g);

/// <Lambda_sigma f, g> = \int sigma |grad fbar|^{p-2} grad fbar . grad gbar
/// where fbar is the energy minimizer with trace f. When g equals f the
/// minimizer itself serves as the extension gbar, which makes the diagonal
/// pairing coincide with the minimal energy exactly.
WeakPairing weak_dn(const Mesh2D& mesh, const ConductivityField& sigma, double p,
                    const BoundaryTrace& f, const BoundaryTrace& g, const SolverConfig& cfg);

/// Pairing evaluated against a caller-supplied solution for f (reuses one
/// solve across many test functions g).
double weak_dn_with_solution(const Mesh2D& mesh, const ConductivityField& sigma, double p,
                             const PotentialField& fbar, const BoundaryTrace& g);

struct HomogeneityReport {
    double t = 1.0;
    double scaling_lhs = 0.0;       // <Lambda(t f), g>
    double scaling_rhs = 0.0;       // |t|^{p-2} t <Lambda f, g>
    double scaling_deviation = 0.0;
    double gateaux_lhs = 0.0;       // (1/t)[<Lambda(a + t f) - Lambda(a), g>]
    double gateaux_rhs = 0.0;       // |t|^{p-2} <Lambda f, g>
    double gateaux_deviation = 0.0;
};

/// Verifies the two homogeneity identities of the pairing for t != 0;
/// deviations are relative to the right-hand sides.
HomogeneityReport dn_homogeneity_check(const Mesh2D& mesh, const ConductivityField& sigma,
                                       double p, const BoundaryTrace& f, const BoundaryTrace& g,
                                       double t, const SolverConfig& cfg);

}  // namespace pcond
