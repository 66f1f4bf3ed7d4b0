#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "pcond/assembly.hpp"
#include "pcond/dn_map.hpp"
#include "pcond/solver.hpp"

using namespace pcond;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

BoundaryTrace x1_trace(const Mesh2D& mesh) {
    return trace_from_function(mesh, [](Vec2 x) { return x.x; });
}

}  // namespace

TEST_CASE("diagonal pairing equals the minimal energy") {
    const Mesh2D mesh = build_rect_mesh(16, 16, 1.0, 1.0);
    auto sigma = ConductivityField::uniform(mesh.triangle_count(), 1.0);
    paint(mesh, sigma, Disk{{0.5, 0.5}, 0.2}, 2.0);
    const SolverConfig cfg;
    const BoundaryTrace f = trace_from_function(
        mesh, [](Vec2 x) { return x.x + 0.3 * std::sin(2.0 * x.y); });

    for (double p : {1.5, 2.0, 3.0}) {
        CAPTURE(p);
        const WeakPairing pairing = weak_dn(mesh, sigma, p, f, f, cfg);
        auto [fbar, report] = solve(mesh, sigma, p, f, cfg);
        // assembled through two different kernels (pairing vs energy)
        CHECK(pairing.value == doctest::Approx(fbar.energy).epsilon(1e-10));
        CHECK(pairing.value >= 0.0);
    }
}

TEST_CASE("unit square with f = g = x1 pairs to 1") {
    const Mesh2D mesh = build_rect_mesh(16, 16, 1.0, 1.0);
    const auto sigma = ConductivityField::uniform(mesh.triangle_count(), 1.0);
    const SolverConfig cfg;
    const BoundaryTrace f = x1_trace(mesh);
    CHECK(weak_dn(mesh, sigma, 2.0, f, f, cfg).value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("constant test data annihilates the pairing") {
    const Mesh2D mesh = build_rect_mesh(12, 12, 1.0, 1.0);
    const auto sigma = ConductivityField::uniform(mesh.triangle_count(), 1.0);
    const SolverConfig cfg;
    const BoundaryTrace f = x1_trace(mesh);
    BoundaryTrace g;
    g.values.assign(mesh.boundary_count(), 4.0);
    const WeakPairing pairing = weak_dn(mesh, sigma, 2.5, f, g, cfg);
    CHECK(std::abs(pairing.value) <= 1e-12);
}

TEST_CASE("pairing is independent of the extension within solver tolerance") {
    const Mesh2D mesh = build_rect_mesh(16, 16, 1.0, 1.0);
    auto sigma = ConductivityField::uniform(mesh.triangle_count(), 1.0);
    paint(mesh, sigma, Box2{{0.4, 0.4}, {0.6, 0.6}}, kInf);
    const SolverConfig cfg;
    const BoundaryTrace f = trace_from_function(
        mesh, [](Vec2 x) { return x.x - 0.2 * x.y; });
    const BoundaryTrace g = trace_from_function(
        mesh, [](Vec2 x) { return std::cos(3.0 * x.x) * x.y; });

    for (double p : {2.0, 3.0}) {
        CAPTURE(p);
        auto [fbar, report] = solve(mesh, sigma, p, f, cfg);
        std::vector<char> active(mesh.triangle_count());
        for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
            active[t] = sigma.finite_at(static_cast<int>(t)) ? 1 : 0;
        }
        // extension 1: flattened harmonic lift; extension 2: the sigma-energy
        // minimizer with trace g (also constant on the merged component)
        const std::vector<double> ext1 = flattened_extension(mesh, sigma, g);
        auto [gbar, report2] = solve(mesh, sigma, p, g, cfg);
        const double v1 =
            assembly::pairing(mesh, sigma.values, active, p, fbar.vertex_values, ext1);
        const double v2 = assembly::pairing(mesh, sigma.values, active, p, fbar.vertex_values,
                                            gbar.vertex_values);
        const double scale = std::max({1.0, std::abs(v1), fbar.energy});
        CHECK(std::abs(v1 - v2) <= 100.0 * cfg.tol_residual * scale);
    }
}

TEST_CASE("symmetry of the bilinear pairing at p=2") {
    const Mesh2D mesh = build_rect_mesh(16, 16, 1.0, 1.0);
    auto sigma = ConductivityField::uniform(mesh.triangle_count(), 1.0);
    paint(mesh, sigma, Disk{{0.35, 0.65}, 0.18}, 3.0);
    const SolverConfig cfg;
    const BoundaryTrace f = trace_from_function(
        mesh, [](Vec2 x) { return x.x + 0.1 * std::sin(5.0 * x.y); });
    const BoundaryTrace g = trace_from_function(
        mesh, [](Vec2 x) { return x.y - 0.3 * std::cos(2.0 * x.x); });
    const double fg = weak_dn(mesh, sigma, 2.0, f, g, cfg).value;
    const double gf = weak_dn(mesh, sigma, 2.0, g, f, cfg).value;
    CHECK(fg == doctest::Approx(gf).epsilon(1e-10));
}

TEST_CASE("translation invariance in the solved argument") {
    const Mesh2D mesh = build_rect_mesh(12, 12, 1.0, 1.0);
    const auto sigma = ConductivityField::uniform(mesh.triangle_count(), 1.0);
    const SolverConfig cfg;
    const BoundaryTrace f = trace_from_function(
        mesh, [](Vec2 x) { return x.x * x.x + 0.5 * x.y; });
    const BoundaryTrace g = trace_from_function(
        mesh, [](Vec2 x) { return std::sin(2.0 * x.x + x.y); });
    for (double p : {1.5, 3.0}) {
        const double base = weak_dn(mesh, sigma, p, f, g, cfg).value;
        BoundaryTrace shifted;
        for (double v : f.values) shifted.values.push_back(v + 11.0);
        const double moved = weak_dn(mesh, sigma, p, shifted, g, cfg).value;
        CHECK(moved == doctest::Approx(base).epsilon(1e-7));
    }
}

TEST_CASE("diagonal monotonicity in sigma") {
    const Mesh2D mesh = build_rect_mesh(12, 12, 1.0, 1.0);
    const SolverConfig cfg;
    const BoundaryTrace f = trace_from_function(
        mesh, [](Vec2 x) { return x.x + 0.2 * x.y * x.y; });
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> lo(0.5, 1.5), bump(0.0, 2.0);
    for (int trial = 0; trial < 5; ++trial) {
        auto sigma0 = ConductivityField::uniform(mesh.triangle_count(), 1.0);
        auto sigma1 = sigma0;
        for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
            sigma0.values[t] = lo(rng);
            sigma1.values[t] = sigma0.values[t] + bump(rng);
        }
        for (double p : {1.5, 2.0, 3.0}) {
            const double d0 = weak_dn(mesh, sigma0, p, f, f, cfg).value;
            const double d1 = weak_dn(mesh, sigma1, p, f, f, cfg).value;
            CHECK(d1 - d0 >= -cfg.tol_residual * std::max(1.0, std::abs(d0)));
        }
    }
}

TEST_CASE("homogeneity identities of the pairing") {
    const Mesh2D mesh = build_rect_mesh(12, 12, 1.0, 1.0);
    auto sigma = ConductivityField::uniform(mesh.triangle_count(), 1.0);
    paint(mesh, sigma, Disk{{0.5, 0.5}, 0.15}, 2.0);
    const SolverConfig cfg;
    const BoundaryTrace f = trace_from_function(
        mesh, [](Vec2 x) { return x.x + 0.25 * std::sin(3.0 * x.y); });
    const BoundaryTrace g = trace_from_function(
        mesh, [](Vec2 x) { return x.y + 0.1 * std::cos(4.0 * x.x); });

    SUBCASE("t = 1 is the identity") {
        const auto report = dn_homogeneity_check(mesh, sigma, 2.0, f, g, 1.0, cfg);
        CHECK(report.scaling_deviation <= 1e-12);
        CHECK(report.gateaux_deviation <= 1e-12);
    }
    SUBCASE("p = 2 scales linearly, any p scales by |t|^{p-2} t") {
        for (double p : {1.5, 2.0, 3.0}) {
            for (double t : {-2.0, 0.5, 3.0}) {
                CAPTURE(p);
                CAPTURE(t);
                const auto report = dn_homogeneity_check(mesh, sigma, p, f, g, t, cfg);
                CHECK(report.scaling_deviation <= 1e-6);
                CHECK(report.gateaux_deviation <= 1e-6);
            }
        }
    }
    SUBCASE("difference quotient amplifies like t^{p-2} below p=2") {
        const double p = 1.5;
        const auto at_01 = dn_homogeneity_check(mesh, sigma, p, f, g, 0.1, cfg);
        const auto at_001 = dn_homogeneity_check(mesh, sigma, p, f, g, 0.01, cfg);
        // the quotient grows by 10^{2-p} per decade of shrinking t
        const double ratio = at_001.gateaux_lhs / at_01.gateaux_lhs;
        CHECK(ratio == doctest::Approx(std::pow(10.0, 2.0 - p)).epsilon(1e-4));
        CHECK(std::abs(at_001.gateaux_lhs) > std::abs(at_001.scaling_lhs));
    }
    SUBCASE("t = 0 is rejected") {
        CHECK_THROWS_AS(dn_homogeneity_check(mesh, sigma, 2.0, f, g, 0.0, cfg),
                        std::invalid_argument);
    }
}
