#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pcond/field.hpp"
#include "pcond/mesh.hpp"
#include "pcond/solver.hpp"
#include "pcond/wolff.hpp"

namespace pcond::enclosure {

struct IndicatorSample {
    wolff::ProbeParams probe;
    double value = 0.0;  // tau^{d-p} (pairing_sigma - pairing_background), d = 2
    double pairing_sigma = 0.0;
    double pairing_background = 0.0;
    double tau_scale = 1.0;  // the tau^{d-p} factor applied to the difference
};

/// Evaluates indicator samples for one (conductivity, wave) pair. For p = 2
/// the stiffness factorizations of both the probed field and the unit
/// background are cached, so a full direction/tau sweep costs one linear
/// solve per pairing. Requires a unit background: every triangle touching
/// the domain boundary must carry conductivity 1.
class IndicatorEngine {
public:
    IndicatorEngine(const Mesh2D& mesh, const ConductivityField& sigma, double p,
                    const wolff::WolffWave& wave, SolverConfig cfg);
    ~IndicatorEngine();
    IndicatorEngine(IndicatorEngine&&) noexcept;

    IndicatorSample indicator(const wolff::ProbeParams& probe) const;

    /// 10x the background self-consistency |indicator(sigma == 1)| measured
    /// through two independent solve paths, floored at round-off scale
    /// relative to the pairings themselves.
    double noise_floor(const wolff::ProbeParams& probe) const;

    const Mesh2D& mesh() const { return mesh_; }
    double exponent() const { return p_; }

private:
    struct Impl;
    const Mesh2D& mesh_;
    double p_;
    std::unique_ptr<Impl> impl_;
};

/// One-shot indicator evaluation (builds a throwaway engine).
IndicatorSample indicator(const Mesh2D& mesh, const ConductivityField& sigma, double p,
                          const wolff::WolffWave& wave, const wolff::ProbeParams& probe,
                          const SolverConfig& cfg);

struct SupportEstimate {
    Vec2 rho{1.0, 0.0};
    double h_est = 0.0;
    std::vector<double> tau_grid;
    double fit_slope = 0.0;
    double fit_intercept = 0.0;
    double fit_residual = 0.0;
    bool conclusive = false;
    std::string note;
};

/// Evaluates the indicator at t = 0 over the tau grid and fits
/// log|I| - d log(tau) by a line in p*tau; the slope estimates the support
/// function sup_{x in D} x.rho. Inconclusive when the indicator drowns in
/// the noise floor, flips sign, or wanders non-monotonically.
SupportEstimate support_estimate(const Mesh2D& mesh, const ConductivityField& sigma, double p,
                                 const wolff::WolffWave& wave, Vec2 rho,
                                 std::span<const double> tau_grid, const SolverConfig& cfg);

SupportEstimate support_estimate(const IndicatorEngine& engine, Vec2 rho,
                                 std::span<const double> tau_grid);

struct HullPolygon {
    std::vector<Vec2> directions;  // conclusive directions used
    std::vector<double> offsets;   // h_est per used direction
    std::vector<Vec2> vertices;    // counterclockwise convex polygon
};

/// Intersects the half-planes {x.rho <= h_est} over conclusive directions,
/// starting from the given clip box (the domain's bounding box expanded by
/// the fit tolerance). Throws InconclusiveError when fewer than 3 conclusive
/// directions remain, they fail to span the circle, or the intersection is
/// empty.
HullPolygon reconstruct_hull(std::span<const SupportEstimate> estimates, const Box2& clip);

enum class InclusionClass { None, Conducting, Insulating, Unclassified };

const char* to_string(InclusionClass c);

/// Signs of the indicator at the supplied probes: eventually positive means
/// a conducting inclusion, eventually negative an insulating one, magnitudes
/// below the noise floor mean none, and disagreement beyond the floor is
/// left unclassified.
InclusionClass classify_inclusion(std::span<const IndicatorSample> samples,
                                  double noise_rel = 1e-9);

struct ScalingCheck {
    double lhs = 0.0;  // I(t)
    double rhs = 0.0;  // e^{p tau (t0 - t)} I(t0)
    double relative_error = 0.0;
    bool skipped = false;  // both sides below the noise floor
};

/// Transport identity between offsets: the boundary data scales exactly, so
/// the discrete indicators must match up to solver round-off.
ScalingCheck scaling_identity_check(const Mesh2D& mesh, const ConductivityField& sigma, double p,
                                    const wolff::WolffWave& wave, Vec2 rho, double t, double t0,
                                    double tau, const SolverConfig& cfg);

}  // namespace pcond::enclosure
