#include "pcond/dn_map.hpp"

#include <cmath>
#include <stdexcept>

#include "pcond/assembly.hpp"

namespace pcond {

namespace {

std::vector<char> active_triangles(const Mesh2D& mesh, const ConductivityField& sigma) {
    std::vector<char> active(mesh.triangle_count());
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        active[t] = sigma.finite_at(t) ? 1 : 0;
    }
    return active;
}

}  // namespace

std::vector<double> harmonic_extension(const Mesh2D& mesh, const BoundaryTrace& g) {
    const ConductivityField ones = ConductivityField::uniform(mesh.triangle_count(), 1.0);
    SolverConfig cfg;
    auto [field, report] = solve(mesh, ones, 2.0, g, cfg);
    return std::move(field.vertex_values);
}

std::vector<double> flattened_extension(const Mesh2D& mesh, const ConductivityField& sigma,
                                        const BoundaryTrace& g) {
    std::vector<double> ext = harmonic_extension(mesh, g);
    const DofMap dof = build_dof_map(mesh, sigma);
    for (const auto& component : dof.dinf_components) {
        double mean = 0.0;
        for (int v : component) mean += ext[v];
        mean /= static_cast<double>(component.size());
        for (int v : component) ext[v] = mean;
    }
    return ext;
}

WeakPairing weak_dn(const Mesh2D& mesh, const ConductivityField& sigma, double p,
                    const BoundaryTrace& f, const BoundaryTrace& g, const SolverConfig& cfg) {
    validate_exponent(p);
    if (g.values.size() != mesh.boundary_count()) {
        throw std::invalid_argument("weak_dn: test trace size mismatch");
    }
    auto [fbar, report] = solve(mesh, sigma, p, f, cfg);

    WeakPairing pairing;
    pairing.f = f;
    pairing.g = g;
    pairing.solve_report = report;

    const std::vector<char> active = active_triangles(mesh, sigma);
    if (g.values == f.values) {
        // gbar = fbar is an admissible extension; the pairing is the energy.
        pairing.value = assembly::pairing(mesh, sigma.values, active, p, fbar.vertex_values,
                                          fbar.vertex_values);
        return pairing;
    }
    const std::vector<double> gbar = flattened_extension(mesh, sigma, g);
    pairing.value = assembly::pairing(mesh, sigma.values, active, p, fbar.vertex_values, gbar);
    return pairing;
}

double weak_dn_with_solution(const Mesh2D& mesh, const ConductivityField& sigma, double p,
                             const PotentialField& fbar, const BoundaryTrace& g) {
    const std::vector<char> active = active_triangles(mesh, sigma);
    const std::vector<double> gbar = flattened_extension(mesh, sigma, g);
    return assembly::pairing(mesh, sigma.values, active, p, fbar.vertex_values, gbar);
}

HomogeneityReport dn_homogeneity_check(const Mesh2D& mesh, const ConductivityField& sigma,
                                       double p, const BoundaryTrace& f, const BoundaryTrace& g,
                                       double t, const SolverConfig& cfg) {
    validate_exponent(p);
    if (t == 0.0) throw std::invalid_argument("dn_homogeneity_check: t must be nonzero");

    const double base = weak_dn(mesh, sigma, p, f, g, cfg).value;
    const double hom = std::pow(std::abs(t), p - 2.0) * t;

    BoundaryTrace tf;
    tf.values.reserve(f.values.size());
    for (double v : f.values) tf.values.push_back(t * v);

    HomogeneityReport report;
    report.t = t;
    report.scaling_lhs = weak_dn(mesh, sigma, p, tf, g, cfg).value;
    report.scaling_rhs = hom * base;
    report.scaling_deviation = std::abs(report.scaling_lhs - report.scaling_rhs) /
                               std::max(std::abs(report.scaling_rhs), 1e-300);

    // Gateaux difference quotient at constant data a: Lambda(a) pairs to zero
    // and Lambda(a + t f) = Lambda(t f) by translation invariance, so the
    // quotient equals |t|^{p-2} <Lambda f, g> when the pairing is exact.
    const double a = 1.0;
    BoundaryTrace shifted;
    shifted.values.reserve(f.values.size());
    for (double v : f.values) shifted.values.push_back(a + t * v);
    BoundaryTrace constant;
    constant.values.assign(f.values.size(), a);

    const double at_shifted = weak_dn(mesh, sigma, p, shifted, g, cfg).value;
    const double at_constant = weak_dn(mesh, sigma, p, constant, g, cfg).value;
    report.gateaux_lhs = (at_shifted - at_constant) / t;
    report.gateaux_rhs = std::pow(std::abs(t), p - 2.0) * base;
    report.gateaux_deviation = std::abs(report.gateaux_lhs - report.gateaux_rhs) /
                               std::max(std::abs(report.gateaux_rhs), 1e-300);
    return report;
}

}  // namespace pcond
