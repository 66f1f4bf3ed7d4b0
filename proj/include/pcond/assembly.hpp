#pragma once

#include <array>
#include <span>
#include <vector>

#include "pcond/mesh.hpp"

namespace pcond::assembly {

/// P1 gradient of u on every triangle.
std::vector<Vec2> gradients(const Mesh2D& mesh, std::span<const double> u);

// The kernels below integrate only over triangles with active[t] != 0
// (the finite-conductivity part; zero and infinite regions enter the
// variational problem through triangle deletion and DOF merging instead).
//
// Parallel versions run a triangle pass followed by an ordered reduction or
// a vertex-gather pass, so results do not depend on the number of threads.
// The serial scatter-loop reference implementations in assembly::ref are
// kept for correctness testing and benchmarking.

/// \int sigma (|grad u|^2 + eps^2)^{p/2}; eps = 0 gives the plain p-energy.
double energy(const Mesh2D& mesh, std::span<const double> sigma, std::span<const char> active,
              double p, double eps, std::span<const double> u);

/// Per-vertex gradient of the regularized energy.
std::vector<double> energy_gradient(const Mesh2D& mesh, std::span<const double> sigma,
                                    std::span<const char> active, double p, double eps,
                                    std::span<const double> u);

/// Unregularized weak-form pairings \int sigma |grad u|^{p-2} grad u . grad phi_v
/// against every hat function (zero-gradient triangles contribute zero).
std::vector<double> vertex_residual(const Mesh2D& mesh, std::span<const double> sigma,
                                    std::span<const char> active, double p,
                                    std::span<const double> u);

/// \int sigma |grad u|^{p-2} grad u . grad v (unregularized).
double pairing(const Mesh2D& mesh, std::span<const double> sigma, std::span<const char> active,
               double p, std::span<const double> u, std::span<const double> v);

/// Per-triangle 3x3 Hessian blocks of the regularized energy, row-major in
/// the triangle's local vertex order. Inactive triangles get zero blocks.
std::vector<std::array<double, 9>> hessian_blocks(const Mesh2D& mesh,
                                                  std::span<const double> sigma,
                                                  std::span<const char> active, double p,
                                                  double eps, std::span<const double> u);

namespace ref {

double energy(const Mesh2D& mesh, std::span<const double> sigma, std::span<const char> active,
              double p, double eps, std::span<const double> u);

std::vector<double> energy_gradient(const Mesh2D& mesh, std::span<const double> sigma,
                                    std::span<const char> active, double p, double eps,
                                    std::span<const double> u);

std::vector<double> vertex_residual(const Mesh2D& mesh, std::span<const double> sigma,
                                    std::span<const char> active, double p,
                                    std::span<const double> u);

double pairing(const Mesh2D& mesh, std::span<const double> sigma, std::span<const char> active,
               double p, std::span<const double> u, std::span<const double> v);

}  // namespace ref

}  // namespace pcond::assembly
