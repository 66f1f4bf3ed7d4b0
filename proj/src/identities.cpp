#include "pcond/identities.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include "pcond/dn_map.hpp"
#include "pcond/solver.hpp"

namespace pcond {

namespace {

Vec2 guarded_flux(double p, Vec2 g) {
    const double g2 = norm2(g);
    if (g2 == 0.0) return {0.0, 0.0};
    return std::pow(g2, 0.5 * (p - 2.0)) * g;
}

}  // namespace

RellichReport rellich_check(const Mesh2D& mesh, std::span<const double> sigma_vertex, double p,
                            const BoundaryTrace& f, Vec2 alpha, const SolverConfig& cfg) {
    validate_exponent(p);
    if (sigma_vertex.size() != mesh.vertex_count()) {
        throw std::invalid_argument("rellich_check: vertex field size mismatch");
    }
    for (double s : sigma_vertex) {
        if (!std::isfinite(s) || !(s > 0.0)) {
            throw std::invalid_argument("rellich_check: vertex conductivity must be positive");
        }
    }

    // Solve with the vertex-averaged per-triangle conductivity (approximate
    // conversion; the identity's residual absorbs the difference).
    ConductivityField sigma_tri = ConductivityField::uniform(mesh.triangle_count(), 1.0);
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles()[t];
        sigma_tri.values[t] =
            (sigma_vertex[tri[0]] + sigma_vertex[tri[1]] + sigma_vertex[tri[2]]) / 3.0;
    }
    auto [u, report] = solve(mesh, sigma_tri, p, f, cfg);

    RellichReport out;
    out.alpha = alpha;

    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles()[t];
        const int ti = static_cast<int>(t);
        Vec2 grad_sigma{};
        for (int j = 0; j < 3; ++j) {
            grad_sigma = grad_sigma + sigma_vertex[tri[j]] * mesh.hat_gradient(ti, j);
        }
        const double gnorm2 = norm2(u.gradients[t]);
        out.lhs += mesh.area(ti) * dot(alpha, grad_sigma) * std::pow(gnorm2, 0.5 * p);
    }

    // Boundary edge -> owning triangle.
    std::map<std::pair<int, int>, int> edge_owner;
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles()[t];
        for (int j = 0; j < 3; ++j) {
            const int a = tri[j], b = tri[(j + 1) % 3];
            edge_owner[{std::min(a, b), std::max(a, b)}] = static_cast<int>(t);
        }
    }

    const std::size_t nb = mesh.boundary_count();
    for (std::size_t k = 0; k < nb; ++k) {
        const int v0 = mesh.boundary_vertices()[k];
        const int v1 = mesh.boundary_vertices()[(k + 1) % nb];
        const int t = edge_owner.at({std::min(v0, v1), std::max(v0, v1)});
        const Vec2 nu = mesh.boundary_normals()[k];
        const double len = norm(mesh.vertices()[v1] - mesh.vertices()[v0]);
        const double sigma_edge = 0.5 * (sigma_vertex[v0] + sigma_vertex[v1]);
        const Vec2 g = u.gradients[t];
        const Vec2 flux = guarded_flux(p, g);
        out.rhs_normal_term += dot(alpha, nu) * sigma_edge * std::pow(norm2(g), 0.5 * p) * len;
        out.rhs_flux_term += p * dot(alpha, g) * sigma_edge * dot(flux, nu) * len;
    }

    out.residual = std::abs(out.lhs - out.rhs_normal_term + out.rhs_flux_term);
    return out;
}

MonotonicityReport monotonicity_check(const Mesh2D& mesh, const ConductivityField& sigma0,
                                      const ConductivityField& sigma1, double p,
                                      const BoundaryTrace& f, const SolverConfig& cfg) {
    validate_exponent(p);
    if (sigma0.has_degenerate() || sigma1.has_degenerate()) {
        throw std::invalid_argument("monotonicity_check: fields must be finite and positive");
    }

    auto [u0, report0] = solve(mesh, sigma0, p, f, cfg);
    auto [u1, report1] = solve(mesh, sigma1, p, f, cfg);

    MonotonicityReport out;
    out.middle = u1.energy - u0.energy;  // diagonal pairings equal the minimal energies

    const double q = 1.0 / (p - 1.0);
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        const int ti = static_cast<int>(t);
        const double s0 = sigma0.values[t];
        const double s1 = sigma1.values[t];
        const double gp = std::pow(norm2(u0.gradients[t]), 0.5 * p);
        const double weight = mesh.area(ti) * gp;
        out.lower += weight * (p - 1.0) * (s0 / std::pow(s1, q)) *
                     (std::pow(s1, q) - std::pow(s0, q));
        out.upper += weight * (s1 - s0);
    }
    out.margins = {out.middle - out.lower, out.upper - out.middle};
    return out;
}

}  // namespace pcond
