#pragma once

#include <vector>

#include "pcond/geometry.hpp"
#include "pcond/mesh.hpp"

namespace pcond::wolff {

/// V(a,b) = ((2p-3) b^2 + (p-1) a^2) / ((p-1) b^2 + a^2). Undefined at the
/// phase-plane origin, which trajectories never reach.
double potential_v(double p, double a, double b);

/// Right-hand side of w'' = -V(w, w') w. Rejects (a,b) = (0,0).
double wolff_rhs(double p, double a, double b);

struct IntegrationOptions {
    double rel_tol = 1e-12;
    double abs_tol = 1e-12;
    int samples_per_period = 4096;
    long max_steps = 2000000;
    double periodicity_tol = 1e-8;
    double mean_tol = 1e-8;
};

struct WaveSample {
    double s = 0.0;
    double w = 0.0;
    double dw = 0.0;
};

/// One period of the oscillatory solution of w'' + V(w,w') w = 0, sampled on
/// a uniform grid with cubic Hermite interpolation for off-grid queries.
/// Immutable after construction.
class WolffWave {
public:
    double p() const { return p_; }
    double period() const { return period_; }
    double initial_value() const { return samples_.front().w; }
    double initial_slope() const { return samples_.front().dw; }

    /// w(s), extended periodically to the whole line.
    double value(double s) const;
    /// w'(s), extended periodically.
    double slope(double s) const;

    /// Measured bounds c, C with c <= w^2 + w'^2 <= C over the period
    /// (the existence constants of the periodic-solution lemma are
    /// existential only, so they are reported, not prescribed).
    double min_phase_norm2() const { return min_norm2_; }
    double max_phase_norm2() const { return max_norm2_; }

    /// |\int_0^period w ds| from the sample grid (diagnostic).
    double mean_residual() const { return mean_residual_; }

    const std::vector<WaveSample>& samples() const { return samples_; }

private:
    friend WolffWave integrate_wave(double, double, double, const IntegrationOptions&);

    double p_ = 2.0;
    double period_ = 0.0;
    double min_norm2_ = 0.0;
    double max_norm2_ = 0.0;
    double mean_residual_ = 0.0;
    std::vector<WaveSample> samples_;  // uniform grid, s = 0 .. period inclusive
};

/// Integrates the wave ODE with an adaptive Dormand-Prince 5(4) scheme from
/// (w, w')(0) = (a0, b0) != (0, 0). The period is detected as the return of
/// the phase-plane trajectory to the ray through the initial state with
/// matching orientation (the phase angle rotates monotonically, so this is
/// the accumulated winding reaching one full turn). Throws on step-budget
/// exhaustion or when the mean-zero / periodicity checks fail.
WolffWave integrate_wave(double p, double a0, double b0, const IntegrationOptions& opts = {});

/// Probe frame for the enclosure method: unit direction rho, its rotation
/// rho_perp, half-space offset t and frequency tau > 0.
struct ProbeParams {
    Vec2 rho{1.0, 0.0};
    Vec2 rho_perp{0.0, 1.0};
    double t = 0.0;
    double tau = 1.0;

    static ProbeParams from_direction(Vec2 rho, double t, double tau);
    void validate() const;
};

struct PlaneWaveValue {
    double value = 0.0;
    Vec2 gradient{};
};

/// h(x) = exp(tau (rho.x - t)) w(tau rho_perp.x) and its analytic gradient
/// tau h(x) [w rho + w' rho_perp] / w -- evaluated from interpolated (w, w').
PlaneWaveValue plane_wave(const WolffWave& wave, const ProbeParams& probe, Vec2 x);

/// Interpolates the plane wave onto the mesh and returns the norm of the
/// discrete weak residual of div(|grad h|^{p-2} grad h) over interior hat
/// functions, relative to the boundary-flux scale. Throws when the probe is
/// not resolved by the mesh (tau * max edge > 0.5).
double p_harmonicity_residual(const WolffWave& wave, const ProbeParams& probe, const Mesh2D& mesh,
                              double p);

}  // namespace pcond::wolff
