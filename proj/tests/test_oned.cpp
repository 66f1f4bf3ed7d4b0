#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracle_util.hpp"
#include "pcond/json_io.hpp"
#include "pcond/oned.hpp"

using namespace pcond::oned;
using pcond::interval_from_json;
using pcond::interval_to_json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

PiecewiseConductivity1D two_piece() {
    return PiecewiseConductivity1D::make({0.0, 0.5, 1.0}, {1.0, 2.0});
}

// Quadrature oracle for \int_a^b sigma^{1/(1-p)} evaluating sigma pointwise.
double invariant_by_quadrature(const PiecewiseConductivity1D& sigma, double p) {
    double total = 0.0;
    for (std::size_t k = 0; k < sigma.piece_count(); ++k) {
        total += oracle::integrate(
            [&](double x) {
                const double s = sigma.value_at(x);
                return std::isinf(s) ? 0.0 : std::pow(s, 1.0 / (1.0 - p));
            },
            sigma.breakpoints[k], sigma.breakpoints[k + 1]);
    }
    return total;
}

// Weak pairing by quadrature against an explicit linear test function.
double pairing_by_quadrature(const PiecewiseConductivity1D& sigma, double p, DirichletPair bc,
                             DirichletPair test) {
    const Solution1D u = solve_1d(sigma, p, bc);
    const double len = sigma.b() - sigma.a();
    const double slope = (test.at_b - test.at_a) / len;
    double total = 0.0;
    for (std::size_t k = 0; k < sigma.piece_count(); ++k) {
        const double lo = sigma.breakpoints[k], hi = sigma.breakpoints[k + 1];
        if (std::isinf(sigma.piece_values[k])) continue;  // admissible h has h' = 0 there
        total += oracle::integrate(
            [&](double x) { return sigma.value_at(x) * phi(p, u.derivative(x)) * slope; }, lo, hi);
    }
    // The omitted D-infinity mass must be carried by steeper slopes elsewhere;
    // for piecewise-linear h with uniform slope outside D_inf the pairing value
    // scales by len / (len - |D_inf|).
    double inf_len = 0.0;
    for (std::size_t k = 0; k < sigma.piece_count(); ++k) {
        if (std::isinf(sigma.piece_values[k])) inf_len += sigma.breakpoints[k + 1] - sigma.breakpoints[k];
    }
    if (inf_len > 0.0) total *= len / (len - inf_len);
    return total;
}

}  // namespace

TEST_CASE("uniform conductivity gives the linear solution") {
    const auto sigma = PiecewiseConductivity1D::make({0.0, 1.0}, {1.0});
    for (double p : {1.5, 2.0, 3.0, 7.5}) {
        const Solution1D u = solve_1d(sigma, p, {0.0, 1.0});
        for (double x : {0.1, 0.25, 0.5, 0.9}) {
            CHECK(u.value(x) == doctest::Approx(x).epsilon(1e-14));
            CHECK(u.derivative(x) == doctest::Approx(1.0).epsilon(1e-14));
        }
        CHECK(u.flux() == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("two-piece example matches the closed-form integral oracle") {
    const auto sigma = two_piece();
    const double p = 2.0;
    // F(1) = 0.5 * 1 + 0.5 * (1/2) = 3/4
    CHECK(invariant_by_quadrature(sigma, p) == doctest::Approx(0.75).epsilon(1e-12));
    const Solution1D u = solve_1d(sigma, p, {0.0, 1.0});
    CHECK(u.weight_total() == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(u.value(0.5) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(u.flux() == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("zero region forces plateaus and zero energy") {
    const auto sigma = PiecewiseConductivity1D::make({0.0, 0.4, 0.6, 1.0}, {1.0, 0.0, 1.0});
    const Solution1D u = solve_1d(sigma, 2.0, {0.0, 1.0});
    CHECK(u.zero_region_case());
    for (double x : {0.0, 0.2, 0.4}) CHECK(u.value(x) == doctest::Approx(0.0).epsilon(1e-14));
    for (double x : {0.6, 0.8, 1.0}) CHECK(u.value(x) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(u.energy() == 0.0);
    CHECK(u.flux() == 0.0);
    // bridge is C^1: derivative vanishes at the zero-piece endpoints
    CHECK(u.derivative(0.4 + 1e-12) == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(u.derivative(0.6 - 1e-12) == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("infinite region freezes the solution and drops out of the weight") {
    const auto sigma = PiecewiseConductivity1D::make({0.0, 0.4, 0.6, 1.0}, {1.0, kInf, 1.0});
    const Solution1D u = solve_1d(sigma, 2.0, {0.0, 1.0});
    CHECK(u.weight_total() == doctest::Approx(0.8).epsilon(1e-14));
    CHECK(u.value(0.4) == doctest::Approx(u.value(0.6)).epsilon(1e-14));
    CHECK(u.derivative(0.5) == 0.0);
    CHECK(u.value(0.5) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("dn map matches the derived formulas") {
    SUBCASE("zero region gives the zero functional") {
        const auto sigma = PiecewiseConductivity1D::make({0.0, 0.4, 0.6, 1.0}, {1.0, 0.0, 1.0});
        for (auto bc : {DirichletPair{0.0, 1.0}, DirichletPair{-2.0, 5.0}}) {
            const NeumannPair out = dn_map_1d(sigma, 2.5, bc);
            CHECK(out.at_a == 0.0);
            CHECK(out.at_b == 0.0);
        }
    }
    SUBCASE("p=2 linear case") {
        const auto sigma = PiecewiseConductivity1D::make({0.0, 1.0}, {1.0});
        const NeumannPair out = dn_map_1d(sigma, 2.0, {0.0, 1.0});
        CHECK(out.at_a == doctest::Approx(-1.0).epsilon(1e-14));
        CHECK(out.at_b == doctest::Approx(1.0).epsilon(1e-14));
    }
    SUBCASE("p=3 flux and quadrature cross-check") {
        const auto sigma = PiecewiseConductivity1D::make({0.0, 1.0}, {1.0});
        const NeumannPair out = dn_map_1d(sigma, 3.0, {0.0, 2.0});
        CHECK(out.at_b == doctest::Approx(4.0).epsilon(1e-14));
        CHECK(out.at_a == doctest::Approx(-4.0).epsilon(1e-14));
        const double quad = pairing_by_quadrature(sigma, 3.0, {0.0, 2.0}, {0.0, 1.0});
        CHECK(out.at_b == doctest::Approx(quad).epsilon(1e-9));
    }
}

TEST_CASE("weak pairing formulas") {
    const auto sigma = two_piece();
    SUBCASE("constant test functions annihilate the pairing") {
        CHECK(weak_pairing_1d(sigma, 2.0, {0.0, 1.0}, {3.0, 3.0}) == 0.0);
    }
    SUBCASE("diagonal equals the Dirichlet energy for sigma = 1") {
        const auto ones = PiecewiseConductivity1D::make({0.0, 1.0}, {1.0});
        CHECK(weak_pairing_1d(ones, 2.0, {0.0, 1.0}, {0.0, 1.0}) ==
              doctest::Approx(1.0).epsilon(1e-14));
    }
    SUBCASE("piecewise example pairs to 4/3 and matches quadrature") {
        CHECK(weak_pairing_1d(sigma, 2.0, {0.0, 1.0}, {0.0, 1.0}) ==
              doctest::Approx(4.0 / 3.0).epsilon(1e-14));
        CHECK(pairing_by_quadrature(sigma, 2.0, {0.0, 1.0}, {0.0, 1.0}) ==
              doctest::Approx(4.0 / 3.0).epsilon(1e-9));
    }
}

TEST_CASE("recover_invariant") {
    SUBCASE("uniform unit conductivity gives 1") {
        const auto sigma = PiecewiseConductivity1D::make({0.0, 1.0}, {1.0});
        for (double p : {1.5, 2.0, 3.0}) {
            const auto rec = recover_invariant(
                [&](DirichletPair bc) { return dn_map_1d(sigma, p, bc); }, p);
            CHECK_FALSE(rec.zero_inclusion);
            CHECK(rec.value == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
    SUBCASE("piecewise example recovers 0.75") {
        const auto sigma = two_piece();
        const auto rec =
            recover_invariant([&](DirichletPair bc) { return dn_map_1d(sigma, 2.0, bc); }, 2.0);
        CHECK(rec.value == doctest::Approx(0.75).epsilon(1e-12));
    }
    SUBCASE("zero region is flagged") {
        const auto sigma = PiecewiseConductivity1D::make({0.0, 0.4, 0.6, 1.0}, {1.0, 0.0, 1.0});
        const auto rec =
            recover_invariant([&](DirichletPair bc) { return dn_map_1d(sigma, 2.0, bc); }, 2.0);
        CHECK(rec.zero_inclusion);
    }
}

TEST_CASE("strong map recovered from the weak pairing via epsilon tests") {
    const std::vector<double> schedule{0.2, 0.1, 0.05, 0.02};
    SUBCASE("uniform sigma recovers (-1, 1) for every epsilon") {
        const auto sigma = PiecewiseConductivity1D::make({0.0, 1.0}, {1.0});
        const auto oracle_fn = make_epsilon_oracle(sigma, 2.0, {0.0, 1.0});
        const auto result = strong_from_weak_1d(oracle_fn, schedule, 1e-10);
        CHECK(result.converged);
        CHECK(result.pair.at_a == doctest::Approx(-1.0).epsilon(1e-9));
        CHECK(result.pair.at_b == doctest::Approx(1.0).epsilon(1e-9));
        for (double v : result.values_at_b) CHECK(v == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("piecewise sigma: flux is constant so every window is exact") {
        const auto sigma = two_piece();
        const auto oracle_fn = make_epsilon_oracle(sigma, 2.0, {0.0, 1.0});
        const auto result = strong_from_weak_1d(oracle_fn, schedule, 1e-10);
        const NeumannPair dn = dn_map_1d(sigma, 2.0, {0.0, 1.0});
        CHECK(result.converged);
        CHECK(result.pair.at_b == doctest::Approx(dn.at_b).epsilon(1e-9));
        CHECK(result.pair.at_a == doctest::Approx(dn.at_a).epsilon(1e-9));
        // windows wider and narrower than the last piece agree (constant flux)
        CHECK(result.values_at_b.front() ==
              doctest::Approx(result.values_at_b.back()).epsilon(1e-9));
    }
    SUBCASE("window overlapping a degenerate piece is rejected") {
        const auto sigma =
            PiecewiseConductivity1D::make({0.0, 0.4, 0.8, 1.0}, {1.0, kInf, 1.0});
        const auto oracle_fn = make_epsilon_oracle(sigma, 2.0, {0.0, 1.0});
        CHECK_THROWS_AS(oracle_fn(0.5, true), std::invalid_argument);
        CHECK_NOTHROW(oracle_fn(0.1, true));
    }
}

TEST_CASE("dn map invariants") {
    const auto sigma = PiecewiseConductivity1D::make({0.0, 0.3, 0.7, 1.0}, {2.0, 0.5, 1.5});
    for (double p : {1.5, 2.0, 3.0}) {
        const NeumannPair base = dn_map_1d(sigma, p, {0.25, 1.5});
        SUBCASE("conservation: components sum to zero") {
            CHECK(base.at_a + base.at_b == doctest::Approx(0.0).epsilon(1e-14));
        }
        SUBCASE("homogeneity in the boundary data") {
            for (double t : {-2.0, -1.0, 0.5, 3.0}) {
                const NeumannPair scaled = dn_map_1d(sigma, p, {t * 0.25, t * 1.5});
                const double factor = std::pow(std::abs(t), p - 2.0) * t;
                CHECK(scaled.at_b == doctest::Approx(factor * base.at_b).epsilon(1e-12));
                CHECK(scaled.at_a == doctest::Approx(factor * base.at_a).epsilon(1e-12));
            }
        }
        SUBCASE("translation invariance") {
            const NeumannPair shifted = dn_map_1d(sigma, p, {0.25 + 7.0, 1.5 + 7.0});
            CHECK(shifted.at_b == doctest::Approx(base.at_b).epsilon(1e-12));
        }
    }
}

TEST_CASE("recovery composed with solve is exact for random conductivities") {
    std::mt19937 rng(20240817);
    std::uniform_real_distribution<double> value(0.1, 10.0);
    std::uniform_int_distribution<int> pieces(1, 10);
    for (int trial = 0; trial < 25; ++trial) {
        const int n = pieces(rng);
        std::vector<double> bps{0.0};
        std::uniform_real_distribution<double> step(0.05, 1.0);
        for (int k = 0; k < n; ++k) bps.push_back(bps.back() + step(rng));
        std::vector<double> vals;
        for (int k = 0; k < n; ++k) vals.push_back(value(rng));
        const auto sigma = PiecewiseConductivity1D::make(bps, vals);
        for (double p : {1.5, 2.0, 3.0}) {
            double expected = 0.0;
            for (int k = 0; k < n; ++k) {
                expected += (bps[k + 1] - bps[k]) * std::pow(vals[k], 1.0 / (1.0 - p));
            }
            const auto rec = recover_invariant(
                [&](DirichletPair bc) { return dn_map_1d(sigma, p, bc); }, p);
            CHECK(rec.value == doctest::Approx(expected).epsilon(1e-12));
        }
    }
}

TEST_CASE("energy minimality against piecewise-linear competitors") {
    const auto sigma = PiecewiseConductivity1D::make({0.0, 0.3, 0.7, 1.0}, {2.0, 0.5, 1.5});
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> bump(-0.5, 0.5);
    for (double p : {1.5, 2.0, 3.0}) {
        const Solution1D u = solve_1d(sigma, p, {0.0, 1.0});
        const double e_min = u.energy();
        for (int trial = 0; trial < 20; ++trial) {
            // competitor: u plus a random piecewise-linear zero-trace wiggle
            const double x1 = 0.25, x2 = 0.75;
            const double d1 = bump(rng), d2 = bump(rng);
            auto competitor_derivative = [&](double x) {
                double slope = 0.0;
                if (x < x1) {
                    slope = d1 / x1;
                } else if (x < x2) {
                    slope = (d2 - d1) / (x2 - x1);
                } else {
                    slope = -d2 / (1.0 - x2);
                }
                return u.derivative(x) + slope;
            };
            double energy = 0.0;
            for (std::size_t k = 0; k < sigma.piece_count(); ++k) {
                energy += oracle::integrate(
                    [&](double x) {
                        return sigma.value_at(x) * std::pow(std::abs(competitor_derivative(x)), p);
                    },
                    sigma.breakpoints[k], sigma.breakpoints[k + 1], 1e-10);
            }
            CHECK(energy >= e_min - 1e-9);
        }
    }
}

TEST_CASE("validation of piecewise conductivities") {
    CHECK_THROWS_AS(PiecewiseConductivity1D::make({0.0, 0.5, 1.0}, {0.0, 1.0}),
                    std::invalid_argument);  // zero piece touches endpoint
    CHECK_THROWS_AS(PiecewiseConductivity1D::make({0.0, 0.3, 0.6, 1.0}, {1.0, 0.0, kInf}),
                    std::invalid_argument);  // inf piece touches endpoint
    CHECK_THROWS_AS(
        PiecewiseConductivity1D::make({0.0, 0.2, 0.5, 0.7, 1.0}, {1.0, 0.0, kInf, 1.0}),
        std::invalid_argument);  // zero and inf pieces touch
    CHECK_THROWS_AS(PiecewiseConductivity1D::make({0.0, 1.0}, {kInf}), std::invalid_argument);

    // adjacent same-tag degenerate pieces merge
    const auto merged = PiecewiseConductivity1D::make({0.0, 0.2, 0.4, 0.6, 1.0},
                                                      {1.0, 0.0, 0.0, 1.0});
    CHECK(merged.piece_count() == 3);

    CHECK_THROWS_AS(solve_1d(two_piece(), 1.0, {0.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(solve_1d(two_piece(), 0.5, {0.0, 1.0}), std::invalid_argument);
}

TEST_CASE("interval JSON round trip") {
    const auto sigma =
        PiecewiseConductivity1D::make({0.0, 0.25, 0.5, 0.75, 1.0}, {1.0, 0.0, 1.0, 2.5});
    const auto j = interval_to_json(sigma);
    const auto back = interval_from_json(j);
    CHECK(back.breakpoints == sigma.breakpoints);
    CHECK(back.piece_values == sigma.piece_values);
}
