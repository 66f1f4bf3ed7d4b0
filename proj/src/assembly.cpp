#include "pcond/assembly.hpp"

#include <cmath>

namespace pcond::assembly {

namespace {

// |g|^{p-2} g with the zero-gradient guard (the flux vanishes continuously
// as |g| -> 0 for every p > 1).
inline Vec2 unregularized_flux(double p, Vec2 g) {
    const double g2 = norm2(g);
    if (g2 == 0.0) return {0.0, 0.0};
    return std::pow(g2, 0.5 * (p - 2.0)) * g;
}

inline Vec2 p1_gradient(const Mesh2D& mesh, std::span<const double> u, int t) {
    const auto& tri = mesh.triangles()[t];
    return u[tri[0]] * mesh.hat_gradient(t, 0) + u[tri[1]] * mesh.hat_gradient(t, 1) +
           u[tri[2]] * mesh.hat_gradient(t, 2);
}

}  // namespace

std::vector<Vec2> gradients(const Mesh2D& mesh, std::span<const double> u) {
    const int nt = static_cast<int>(mesh.triangle_count());
    std::vector<Vec2> g(nt);
#pragma omp parallel for schedule(static)
    for (int t = 0; t < nt; ++t) {
        g[t] = p1_gradient(mesh, u, t);
    }
    return g;
}

double energy(const Mesh2D& mesh, std::span<const double> sigma, std::span<const char> active,
              double p, double eps, std::span<const double> u) {
    const int nt = static_cast<int>(mesh.triangle_count());
    std::vector<double> terms(nt, 0.0);
#pragma omp parallel for schedule(static)
    for (int t = 0; t < nt; ++t) {
        if (!active[t]) continue;
        const Vec2 g = p1_gradient(mesh, u, t);
        terms[t] = mesh.area(t) * sigma[t] * std::pow(norm2(g) + eps * eps, 0.5 * p);
    }
    double total = 0.0;
    for (double term : terms) total += term;  // fixed order, thread-count independent
    return total;
}

std::vector<double> energy_gradient(const Mesh2D& mesh, std::span<const double> sigma,
                                    std::span<const char> active, double p, double eps,
                                    std::span<const double> u) {
    const int nt = static_cast<int>(mesh.triangle_count());
    const int nv = static_cast<int>(mesh.vertex_count());

    // Triangle pass: weighted gradient w_t = area sigma p (|g|^2+eps^2)^{(p-2)/2} g.
    std::vector<Vec2> weighted(nt, Vec2{});
#pragma omp parallel for schedule(static)
    for (int t = 0; t < nt; ++t) {
        if (!active[t]) continue;
        const Vec2 g = p1_gradient(mesh, u, t);
        const double w = mesh.area(t) * sigma[t] * p * std::pow(norm2(g) + eps * eps, 0.5 * p - 1.0);
        weighted[t] = w * g;
    }

    // Vertex gather pass: deterministic regardless of thread count.
    std::vector<double> grad(nv, 0.0);
#pragma omp parallel for schedule(static)
    for (int v = 0; v < nv; ++v) {
        double acc = 0.0;
        for (int t : mesh.triangles_at_vertex(v)) {
            if (!active[t]) continue;
            const auto& tri = mesh.triangles()[t];
            const int local = tri[0] == v ? 0 : (tri[1] == v ? 1 : 2);
            acc += dot(weighted[t], mesh.hat_gradient(t, local));
        }
        grad[v] = acc;
    }
    return grad;
}

std::vector<double> vertex_residual(const Mesh2D& mesh, std::span<const double> sigma,
                                    std::span<const char> active, double p,
                                    std::span<const double> u) {
    const int nt = static_cast<int>(mesh.triangle_count());
    const int nv = static_cast<int>(mesh.vertex_count());

    std::vector<Vec2> weighted(nt, Vec2{});
#pragma omp parallel for schedule(static)
    for (int t = 0; t < nt; ++t) {
        if (!active[t]) continue;
        weighted[t] = mesh.area(t) * sigma[t] * unregularized_flux(p, p1_gradient(mesh, u, t));
    }

    std::vector<double> res(nv, 0.0);
#pragma omp parallel for schedule(static)
    for (int v = 0; v < nv; ++v) {
        double acc = 0.0;
        for (int t : mesh.triangles_at_vertex(v)) {
            if (!active[t]) continue;
            const auto& tri = mesh.triangles()[t];
            const int local = tri[0] == v ? 0 : (tri[1] == v ? 1 : 2);
            acc += dot(weighted[t], mesh.hat_gradient(t, local));
        }
        res[v] = acc;
    }
    return res;
}

double pairing(const Mesh2D& mesh, std::span<const double> sigma, std::span<const char> active,
               double p, std::span<const double> u, std::span<const double> v) {
    const int nt = static_cast<int>(mesh.triangle_count());
    std::vector<double> terms(nt, 0.0);
#pragma omp parallel for schedule(static)
    for (int t = 0; t < nt; ++t) {
        if (!active[t]) continue;
        const Vec2 gu = p1_gradient(mesh, u, t);
        const Vec2 gv = p1_gradient(mesh, v, t);
        terms[t] = mesh.area(t) * sigma[t] * dot(unregularized_flux(p, gu), gv);
    }
    double total = 0.0;
    for (double term : terms) total += term;
    return total;
}

std::vector<std::array<double, 9>> hessian_blocks(const Mesh2D& mesh,
                                                  std::span<const double> sigma,
                                                  std::span<const char> active, double p,
                                                  double eps, std::span<const double> u) {
    const int nt = static_cast<int>(mesh.triangle_count());
    std::vector<std::array<double, 9>> blocks(nt, std::array<double, 9>{});
#pragma omp parallel for schedule(static)
    for (int t = 0; t < nt; ++t) {
        if (!active[t]) continue;
        const Vec2 g = p1_gradient(mesh, u, t);
        const double q = norm2(g) + eps * eps;
        const double scale = mesh.area(t) * sigma[t] * p;
        const double w0 = scale * std::pow(q, 0.5 * p - 1.0);
        // p = 2 zeroes the anisotropic term; skip the pow to avoid 0 * inf at q = 0
        const double w1 = p == 2.0 ? 0.0 : scale * (p - 2.0) * std::pow(q, 0.5 * p - 2.0);
        std::array<Vec2, 3> hat;
        std::array<double, 3> gdot;
        for (int j = 0; j < 3; ++j) {
            hat[j] = mesh.hat_gradient(t, j);
            gdot[j] = dot(g, hat[j]);
        }
        auto& blk = blocks[t];
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                blk[3 * i + j] = w0 * dot(hat[i], hat[j]) + w1 * gdot[i] * gdot[j];
            }
        }
    }
    return blocks;
}

namespace ref {

double energy(const Mesh2D& mesh, std::span<const double> sigma, std::span<const char> active,
              double p, double eps, std::span<const double> u) {
    double total = 0.0;
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        if (!active[t]) continue;
        const Vec2 g = p1_gradient(mesh, u, static_cast<int>(t));
        total += mesh.area(static_cast<int>(t)) * sigma[t] *
                 std::pow(norm2(g) + eps * eps, 0.5 * p);
    }
    return total;
}

std::vector<double> energy_gradient(const Mesh2D& mesh, std::span<const double> sigma,
                                    std::span<const char> active, double p, double eps,
                                    std::span<const double> u) {
    std::vector<double> grad(mesh.vertex_count(), 0.0);
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        if (!active[t]) continue;
        const int ti = static_cast<int>(t);
        const Vec2 g = p1_gradient(mesh, u, ti);
        const double w =
            mesh.area(ti) * sigma[t] * p * std::pow(norm2(g) + eps * eps, 0.5 * p - 1.0);
        const auto& tri = mesh.triangles()[t];
        for (int j = 0; j < 3; ++j) {
            grad[tri[j]] += w * dot(g, mesh.hat_gradient(ti, j));
        }
    }
    return grad;
}

std::vector<double> vertex_residual(const Mesh2D& mesh, std::span<const double> sigma,
                                    std::span<const char> active, double p,
                                    std::span<const double> u) {
    std::vector<double> res(mesh.vertex_count(), 0.0);
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        if (!active[t]) continue;
        const int ti = static_cast<int>(t);
        const Vec2 flux =
            mesh.area(ti) * sigma[t] * unregularized_flux(p, p1_gradient(mesh, u, ti));
        const auto& tri = mesh.triangles()[t];
        for (int j = 0; j < 3; ++j) {
            res[tri[j]] += dot(flux, mesh.hat_gradient(ti, j));
        }
    }
    return res;
}

double pairing(const Mesh2D& mesh, std::span<const double> sigma, std::span<const char> active,
               double p, std::span<const double> u, std::span<const double> v) {
    double total = 0.0;
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        if (!active[t]) continue;
        const int ti = static_cast<int>(t);
        const Vec2 gu = p1_gradient(mesh, u, ti);
        const Vec2 gv = p1_gradient(mesh, v, ti);
        total += mesh.area(ti) * sigma[t] * dot(unregularized_flux(p, gu), gv);
    }
    return total;
}

}  // namespace ref

}  // namespace pcond::assembly
