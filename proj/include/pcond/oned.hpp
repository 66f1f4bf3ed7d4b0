#pragma once

#include <functional>
#include <span>
#include <vector>

namespace pcond::oned {

/// Piecewise constant conductivity on an interval ]a,b[. A piece value of
/// 0.0 marks a zero-conductivity interval, +inf an infinite-conductivity
/// interval; everything else must be finite and positive.
///
/// make() merges adjacent pieces carrying the same degenerate tag, then
/// validates: degenerate closures must not touch each other or the endpoints,
/// and at least one piece must be finite.
struct PiecewiseConductivity1D {
    std::vector<double> breakpoints;
    std::vector<double> piece_values;

    static PiecewiseConductivity1D make(std::vector<double> breakpoints,
                                        std::vector<double> piece_values);

    double a() const { return breakpoints.front(); }
    double b() const { return breakpoints.back(); }
    std::size_t piece_count() const { return piece_values.size(); }
    bool has_zero_region() const;
    bool has_infinite_region() const;

    /// Pointwise value, right-continuous at interior breakpoints.
    double value_at(double x) const;

    /// Index of the piece containing x (right-continuous; x clamped to ]a,b[).
    std::size_t piece_index(double x) const;
};

struct DirichletPair {
    double at_a = 0.0;
    double at_b = 0.0;
};

struct NeumannPair {
    double at_a = 0.0;
    double at_b = 0.0;
};

/// |c|^{p-2} c, the scalar flux nonlinearity, with phi(0) = 0.
double phi(double p, double c);

/// Inverse of phi: |y|^{(2-p)/(p-1)} y.
double phi_inverse(double p, double y);

/// Closed-form solution of the two-point Dirichlet problem.
///
/// Zero-region case: constant at_a left of the zero set, constant at_b right
/// of it, with a C^1 smoothstep bridge across each zero interval (flux and
/// energy vanish). Otherwise u(x) = A + (B-A) F(x) / F(b) with
/// F(x) = \int_a^x sigma^{1/(1-p)}, interpreting inf^{1/(1-p)} as 0.
class Solution1D {
public:
    double value(double x) const;
    double derivative(double x) const;

    /// sigma |u'|^{p-2} u', constant across the interval.
    double flux() const { return flux_; }

    /// \int_a^b sigma |u'|^p.
    double energy() const { return energy_; }

    /// F(b) = \int_a^b sigma^{1/(1-p)} (0 contribution from infinite pieces).
    double weight_total() const { return weight_total_; }

    bool zero_region_case() const { return zero_case_; }

private:
    friend Solution1D solve_1d(const PiecewiseConductivity1D&, double, DirichletPair);

    PiecewiseConductivity1D sigma_;
    double p_ = 2.0;
    DirichletPair bc_;
    bool zero_case_ = false;
    double flux_ = 0.0;
    double energy_ = 0.0;
    double weight_total_ = 0.0;
    std::vector<double> piece_weight_;  // sigma^{1/(1-p)} per piece
    std::vector<double> cum_weight_;    // F at breakpoints
    double slope_c_ = 0.0;              // (B-A)/F(b)
    std::vector<double> level_at_start_;  // u at each piece start (zero-region case)
    std::vector<double> bridge_delta_;    // increment across each zero piece
};

Solution1D solve_1d(const PiecewiseConductivity1D& sigma, double p, DirichletPair bc);

/// Strong DN map (-flux at a, +flux at b); identically (0,0) when a zero
/// region is present. Throws when the total weight degenerates (both
/// endpoints inside the closure of the infinite region).
NeumannPair dn_map_1d(const PiecewiseConductivity1D& sigma, double p, DirichletPair bc);

/// Weak pairing <Lambda(A,B), (alpha,beta)> = flux * (beta - alpha).
double weak_pairing_1d(const PiecewiseConductivity1D& sigma, double p, DirichletPair bc,
                       DirichletPair test);

struct InvariantRecovery {
    bool zero_inclusion = false;
    double value = 0.0;  // \int sigma^{1/(1-p)} when a zero region was not flagged
};

using DnOracle = std::function<NeumannPair(DirichletPair)>;

/// Probes the DN oracle over a fixed set of boundary pairs. All-zero output
/// flags a zero inclusion; otherwise the probe (0,1) determines
/// \int sigma^{1/(1-p)} by inverting phi on the measured flux.
InvariantRecovery recover_invariant(const DnOracle& dn, double p);

/// Weak pairing evaluated against the epsilon-slope test function anchored
/// at one endpoint: h' = 1/eps on [b-eps, b] (at_b) or h' = -1/eps on
/// [a, a+eps] (not at_b), constant elsewhere.
using EpsilonPairingOracle = std::function<double(double eps, bool at_b)>;

/// Builds the standard oracle by composite quadrature of
/// sigma |u'|^{p-2} u' h' against the closed-form solution. Throws if the
/// epsilon window touches a degenerate piece.
EpsilonPairingOracle make_epsilon_oracle(const PiecewiseConductivity1D& sigma, double p,
                                         DirichletPair bc);

struct StrongFromWeakResult {
    NeumannPair pair;
    bool converged = false;
    std::vector<double> values_at_a;  // one entry per epsilon in the schedule
    std::vector<double> values_at_b;
};

/// Recovers the strong DN pair from the weak pairing by driving the
/// epsilon-slope test functions through the given decreasing schedule and
/// checking stabilization at the smallest epsilon.
StrongFromWeakResult strong_from_weak_1d(const EpsilonPairingOracle& weak,
                                         std::span<const double> epsilon_schedule,
                                         double tol);

}  // namespace pcond::oned
