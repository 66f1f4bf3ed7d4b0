#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "pcond/identities.hpp"
#include "pcond/solver.hpp"

using namespace pcond;

namespace {

std::vector<double> vertex_field(const Mesh2D& mesh, const std::function<double(Vec2)>& f) {
    std::vector<double> out(mesh.vertex_count());
    for (std::size_t v = 0; v < mesh.vertex_count(); ++v) out[v] = f(mesh.vertices()[v]);
    return out;
}

}  // namespace

TEST_CASE("rellich: constant conductivity makes the boundary terms cancel") {
    const SolverConfig cfg;
    std::vector<double> residuals;
    for (int n : {8, 16, 32}) {
        const Mesh2D mesh = build_rect_mesh(n, n, 1.0, 1.0);
        const auto sigma = vertex_field(mesh, [](Vec2) { return 1.0; });
        const BoundaryTrace f = trace_from_function(
            mesh, [](Vec2 x) { return x.x + 0.3 * std::sin(2.0 * x.y); });
        const RellichReport report = rellich_check(mesh, sigma, 2.0, f, {0.7, -0.4}, cfg);
        CHECK(report.lhs == doctest::Approx(0.0).epsilon(1e-12));
        residuals.push_back(report.residual);
    }
    CHECK(residuals[1] < residuals[0]);
    CHECK(residuals[2] < residuals[1]);
}

TEST_CASE("rellich: p=2 closed-form benchmark") {
    // sigma = 1 + x, u = log(1 + x): sigma u' = 1, so u solves the equation.
    // With alpha = e1 the volume term is \int (1+x)^{-2} = 1/2 and the two
    // boundary integrals evaluate to -1/2 and (with the p factor) -1.
    const SolverConfig cfg;
    std::vector<double> residuals, normal_err, flux_err;
    for (int n : {8, 16, 32}) {
        const Mesh2D mesh = build_rect_mesh(n, n, 1.0, 1.0);
        const auto sigma = vertex_field(mesh, [](Vec2 x) { return 1.0 + x.x; });
        const BoundaryTrace f = trace_from_function(
            mesh, [](Vec2 x) { return std::log(1.0 + x.x); });
        const RellichReport report = rellich_check(mesh, sigma, 2.0, f, {1.0, 0.0}, cfg);
        CAPTURE(n);
        CHECK(report.lhs == doctest::Approx(0.5).epsilon(0.01));
        residuals.push_back(report.residual);
        normal_err.push_back(std::abs(report.rhs_normal_term + 0.5));
        flux_err.push_back(std::abs(report.rhs_flux_term + 1.0));
    }
    // the boundary integrals carry the O(h) discrete-flux error
    for (auto* seq : {&residuals, &normal_err, &flux_err}) {
        CHECK((*seq)[1] < (*seq)[0]);
        CHECK((*seq)[2] < (*seq)[1]);
    }
    CHECK(residuals[2] <= 4e-2);
    CHECK(flux_err[2] <= 0.1);
}

TEST_CASE("rellich: radial p=3 benchmark with constant sigma") {
    const SolverConfig cfg;
    std::vector<double> residuals;
    for (int n : {8, 16, 32}) {
        const Mesh2D mesh = translated(build_rect_mesh(n, n, 1.0, 1.0), {1.0, 1.0});
        const auto sigma = vertex_field(mesh, [](Vec2) { return 1.0; });
        const BoundaryTrace f = trace_from_function(
            mesh, [](Vec2 x) { return std::sqrt(std::hypot(x.x, x.y)); });
        const RellichReport report = rellich_check(mesh, sigma, 3.0, f, {0.3, 0.9}, cfg);
        CHECK(report.lhs == doctest::Approx(0.0).epsilon(1e-12));
        residuals.push_back(report.residual);
    }
    CHECK(residuals[2] < residuals[0]);
}

TEST_CASE("rellich input validation") {
    const Mesh2D mesh = build_rect_mesh(8, 8, 1.0, 1.0);
    const SolverConfig cfg;
    const BoundaryTrace f = trace_from_function(mesh, [](Vec2 x) { return x.x; });
    std::vector<double> bad(mesh.vertex_count(), 1.0);
    bad[3] = -2.0;
    CHECK_THROWS_AS(rellich_check(mesh, bad, 2.0, f, {1.0, 0.0}, cfg), std::invalid_argument);
    std::vector<double> short_field(3, 1.0);
    CHECK_THROWS_AS(rellich_check(mesh, short_field, 2.0, f, {1.0, 0.0}, cfg),
                    std::invalid_argument);
}

TEST_CASE("monotonicity: identical fields give the zero sandwich") {
    const Mesh2D mesh = build_rect_mesh(12, 12, 1.0, 1.0);
    const auto sigma = ConductivityField::uniform(mesh.triangle_count(), 1.3);
    const SolverConfig cfg;
    const BoundaryTrace f = trace_from_function(mesh, [](Vec2 x) { return x.x; });
    const MonotonicityReport report = monotonicity_check(mesh, sigma, sigma, 2.0, f, cfg);
    CHECK(report.lower == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(report.middle == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(report.upper == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("monotonicity: constant-conductivity closed form (1/2, 1, 1)") {
    const Mesh2D mesh = build_rect_mesh(16, 16, 1.0, 1.0);
    const auto sigma0 = ConductivityField::uniform(mesh.triangle_count(), 1.0);
    const auto sigma1 = ConductivityField::uniform(mesh.triangle_count(), 2.0);
    const SolverConfig cfg;
    const BoundaryTrace f = trace_from_function(mesh, [](Vec2 x) { return x.x; });
    const MonotonicityReport report = monotonicity_check(mesh, sigma0, sigma1, 2.0, f, cfg);
    CHECK(report.lower == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(report.middle == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(report.upper == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("monotonicity: block inclusion at p=3 sandwiches strictly") {
    const Mesh2D mesh = build_rect_mesh(16, 16, 1.0, 1.0);
    const auto sigma0 = ConductivityField::uniform(mesh.triangle_count(), 1.0);
    auto sigma1 = sigma0;
    paint(mesh, sigma1, Box2{{0.25, 0.25}, {0.75, 0.75}}, 2.0);
    const SolverConfig cfg;
    const BoundaryTrace f = trace_from_function(mesh, [](Vec2 x) { return x.x; });
    const MonotonicityReport report = monotonicity_check(mesh, sigma0, sigma1, 3.0, f, cfg);
    const double slack = 10.0 * cfg.tol_residual * std::max(1.0, std::abs(report.middle));
    CHECK(report.margins.first >= -slack);
    CHECK(report.margins.second >= -slack);
    CHECK(report.middle > 0.0);
}

TEST_CASE("monotonicity: swapping the fields flips the pairing difference") {
    const Mesh2D mesh = build_rect_mesh(12, 12, 1.0, 1.0);
    auto sigma0 = ConductivityField::uniform(mesh.triangle_count(), 1.0);
    auto sigma1 = sigma0;
    paint(mesh, sigma1, Disk{{0.5, 0.5}, 0.2}, 3.0);
    const SolverConfig cfg;
    const BoundaryTrace f = trace_from_function(
        mesh, [](Vec2 x) { return x.x + 0.2 * x.y; });
    for (double p : {1.5, 2.0, 3.0}) {
        CAPTURE(p);
        const MonotonicityReport fwd = monotonicity_check(mesh, sigma0, sigma1, p, f, cfg);
        const MonotonicityReport bwd = monotonicity_check(mesh, sigma1, sigma0, p, f, cfg);
        CHECK(bwd.middle == doctest::Approx(-fwd.middle).epsilon(1e-9));
        const double slack = 10.0 * cfg.tol_residual * std::max(1.0, std::abs(fwd.middle));
        // the inequality holds in both orders of the arguments
        CHECK(fwd.margins.first >= -slack);
        CHECK(fwd.margins.second >= -slack);
        CHECK(bwd.margins.first >= -slack);
        CHECK(bwd.margins.second >= -slack);
    }
}

TEST_CASE("monotonicity: random pairs with sigma1 >= sigma0") {
    const Mesh2D mesh = build_rect_mesh(12, 12, 1.0, 1.0);
    const SolverConfig cfg;
    const BoundaryTrace f = trace_from_function(
        mesh, [](Vec2 x) { return x.x - 0.3 * std::cos(2.0 * x.y); });
    std::mt19937 rng(2718);
    std::uniform_real_distribution<double> base(0.3, 2.0), bump(0.0, 1.5);
    const double ps[] = {1.5, 2.0, 3.0};
    for (int trial = 0; trial < 9; ++trial) {
        auto sigma0 = ConductivityField::uniform(mesh.triangle_count(), 1.0);
        auto sigma1 = sigma0;
        for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
            sigma0.values[t] = base(rng);
            sigma1.values[t] = sigma0.values[t] + bump(rng);
        }
        const double p = ps[trial % 3];
        CAPTURE(trial);
        const MonotonicityReport report = monotonicity_check(mesh, sigma0, sigma1, p, f, cfg);
        const double slack = 10.0 * cfg.tol_residual * std::max(1.0, std::abs(report.middle));
        CHECK(report.margins.first >= -slack);
        CHECK(report.margins.second >= -slack);
        CHECK(report.lower >= -slack);  // nonnegative lower bound when sigma1 >= sigma0
    }
}

TEST_CASE("monotonicity: p=2 lower bound simplifies algebraically") {
    const Mesh2D mesh = build_rect_mesh(12, 12, 1.0, 1.0);
    std::mt19937 rng(31415);
    std::uniform_real_distribution<double> base(0.4, 2.0), bump(0.0, 1.0);
    auto sigma0 = ConductivityField::uniform(mesh.triangle_count(), 1.0);
    auto sigma1 = sigma0;
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        sigma0.values[t] = base(rng);
        sigma1.values[t] = sigma0.values[t] + bump(rng);
    }
    const SolverConfig cfg;
    const BoundaryTrace f = trace_from_function(mesh, [](Vec2 x) { return x.x + x.y; });
    const MonotonicityReport report = monotonicity_check(mesh, sigma0, sigma1, 2.0, f, cfg);

    auto [u0, r0] = solve(mesh, sigma0, 2.0, f, cfg);
    double simplified = 0.0;
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        const double s0 = sigma0.values[t], s1 = sigma1.values[t];
        simplified += mesh.area(static_cast<int>(t)) * (s0 / s1) * (s1 - s0) *
                      norm2(u0.gradients[t]);
    }
    CHECK(report.lower == doctest::Approx(simplified).epsilon(1e-12));
}

TEST_CASE("monotonicity rejects degenerate fields") {
    const Mesh2D mesh = build_rect_mesh(8, 8, 1.0, 1.0);
    auto sigma0 = ConductivityField::uniform(mesh.triangle_count(), 1.0);
    auto sigma1 = sigma0;
    paint(mesh, sigma1, Box2{{0.25, 0.25}, {0.75, 0.75}},
          std::numeric_limits<double>::infinity());
    const SolverConfig cfg;
    const BoundaryTrace f = trace_from_function(mesh, [](Vec2 x) { return x.x; });
    CHECK_THROWS_AS(monotonicity_check(mesh, sigma0, sigma1, 2.0, f, cfg),
                    std::invalid_argument);
}
