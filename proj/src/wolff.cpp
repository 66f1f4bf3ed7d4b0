#include "pcond/wolff.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "pcond/assembly.hpp"

namespace pcond::wolff {

namespace {

using State = std::array<double, 2>;

State rhs(double p, const State& y) { return {y[1], wolff_rhs(p, y[0], y[1])}; }

// Dormand-Prince 5(4) tableau.
constexpr double kA21 = 1.0 / 5.0;
constexpr double kA31 = 3.0 / 40.0, kA32 = 9.0 / 40.0;
constexpr double kA41 = 44.0 / 45.0, kA42 = -56.0 / 15.0, kA43 = 32.0 / 9.0;
constexpr double kA51 = 19372.0 / 6561.0, kA52 = -25360.0 / 2187.0, kA53 = 64448.0 / 6561.0,
                 kA54 = -212.0 / 729.0;
constexpr double kA61 = 9017.0 / 3168.0, kA62 = -355.0 / 33.0, kA63 = 46732.0 / 5247.0,
                 kA64 = 49.0 / 176.0, kA65 = -5103.0 / 18656.0;
constexpr double kB1 = 35.0 / 384.0, kB3 = 500.0 / 1113.0, kB4 = 125.0 / 192.0,
                 kB5 = -2187.0 / 6784.0, kB6 = 11.0 / 84.0;
constexpr double kE1 = 5179.0 / 57600.0, kE3 = 7571.0 / 16695.0, kE4 = 393.0 / 640.0,
                 kE5 = -92097.0 / 339200.0, kE6 = 187.0 / 2100.0, kE7 = 1.0 / 40.0;

struct StepResult {
    State y;
    double error = 0.0;  // scaled error estimate
};

StepResult dp45_step(double p, const State& y, double h, double atol, double rtol) {
    const State k1 = rhs(p, y);
    const State k2 = rhs(p, {y[0] + h * kA21 * k1[0], y[1] + h * kA21 * k1[1]});
    const State k3 = rhs(p, {y[0] + h * (kA31 * k1[0] + kA32 * k2[0]),
                             y[1] + h * (kA31 * k1[1] + kA32 * k2[1])});
    const State k4 = rhs(p, {y[0] + h * (kA41 * k1[0] + kA42 * k2[0] + kA43 * k3[0]),
                             y[1] + h * (kA41 * k1[1] + kA42 * k2[1] + kA43 * k3[1])});
    const State k5 =
        rhs(p, {y[0] + h * (kA51 * k1[0] + kA52 * k2[0] + kA53 * k3[0] + kA54 * k4[0]),
                y[1] + h * (kA51 * k1[1] + kA52 * k2[1] + kA53 * k3[1] + kA54 * k4[1])});
    const State k6 = rhs(
        p, {y[0] + h * (kA61 * k1[0] + kA62 * k2[0] + kA63 * k3[0] + kA64 * k4[0] + kA65 * k5[0]),
            y[1] + h * (kA61 * k1[1] + kA62 * k2[1] + kA63 * k3[1] + kA64 * k4[1] + kA65 * k5[1])});

    State y5;
    for (int i = 0; i < 2; ++i) {
        y5[i] = y[i] + h * (kB1 * k1[i] + kB3 * k3[i] + kB4 * k4[i] + kB5 * k5[i] + kB6 * k6[i]);
    }
    const State k7 = rhs(p, y5);
    State y4;
    for (int i = 0; i < 2; ++i) {
        y4[i] = y[i] + h * (kE1 * k1[i] + kE3 * k3[i] + kE4 * k4[i] + kE5 * k5[i] + kE6 * k6[i] +
                            kE7 * k7[i]);
    }

    double err = 0.0;
    for (int i = 0; i < 2; ++i) {
        const double scale = atol + rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
        const double e = (y5[i] - y4[i]) / scale;
        err += e * e;
    }
    return {y5, std::sqrt(0.5 * err)};
}

// Adaptive integration from y over a fixed span; returns the end state.
State integrate_span(double p, State y, double span, double atol, double rtol, long& step_budget) {
    double s = 0.0;
    double h = std::min(0.05, span);
    while (s < span) {
        if (step_budget-- <= 0) {
            throw std::runtime_error("integrate_wave: step budget exhausted");
        }
        h = std::min(h, span - s);
        const StepResult r = dp45_step(p, y, h, atol, rtol);
        if (r.error <= 1.0) {
            y = r.y;
            s += h;
        }
        const double factor =
            std::clamp(0.9 * std::pow(std::max(r.error, 1e-10), -0.2), 0.2, 5.0);
        h = std::min(h * factor, span - s > 0.0 ? span - s : h * factor);
        if (h <= 0.0) h = 1e-14;
    }
    return y;
}

double angle_between(const State& from, const State& to) {
    return std::atan2(from[0] * to[1] - from[1] * to[0], from[0] * to[0] + from[1] * to[1]);
}

// Cubic Hermite basis on [0,1].
double hermite(double f0, double d0, double f1, double d1, double xi) {
    const double xi2 = xi * xi, xi3 = xi2 * xi;
    return (2.0 * xi3 - 3.0 * xi2 + 1.0) * f0 + (xi3 - 2.0 * xi2 + xi) * d0 +
           (-2.0 * xi3 + 3.0 * xi2) * f1 + (xi3 - xi2) * d1;
}

}  // namespace

double potential_v(double p, double a, double b) {
    const double denom = (p - 1.0) * b * b + a * a;
    if (denom == 0.0) {
        throw std::invalid_argument("potential_v: undefined at the phase-plane origin");
    }
    return ((2.0 * p - 3.0) * b * b + (p - 1.0) * a * a) / denom;
}

double wolff_rhs(double p, double a, double b) { return -potential_v(p, a, b) * a; }

WolffWave integrate_wave(double p, double a0, double b0, const IntegrationOptions& opts) {
    if (!(p > 1.0) || !std::isfinite(p)) {
        throw std::invalid_argument("integrate_wave: p must lie in (1, inf)");
    }
    if (a0 == 0.0 && b0 == 0.0) {
        throw std::invalid_argument("integrate_wave: initial data must not vanish");
    }

    long budget = opts.max_steps;
    const State y0{a0, b0};

    // Pass 1: locate the period. The phase angle of (w, w') decreases
    // strictly, so the period is the arc length at which the accumulated
    // winding reaches -2*pi.
    double period = 0.0;
    {
        State y = y0;
        double s = 0.0, rotation = 0.0;
        double h = 0.05;
        bool found = false;
        while (!found) {
            if (budget-- <= 0) {
                throw std::runtime_error("integrate_wave: period not found within step budget");
            }
            const StepResult r = dp45_step(p, y, h, opts.abs_tol, opts.rel_tol);
            if (r.error <= 1.0) {
                const double dtheta = angle_between(y, r.y);
                if (rotation + dtheta <= -2.0 * std::numbers::pi) {
                    // Bisect the step for the exact return point.
                    double lo = 0.0, hi = h;
                    for (int it = 0; it < 80 && hi - lo > 1e-16 * std::max(1.0, s); ++it) {
                        const double mid = 0.5 * (lo + hi);
                        long sub_budget = 100000;
                        const State ym = integrate_span(p, y, mid, opts.abs_tol, opts.rel_tol,
                                                        sub_budget);
                        if (rotation + angle_between(y, ym) <= -2.0 * std::numbers::pi) {
                            hi = mid;
                        } else {
                            lo = mid;
                        }
                    }
                    period = s + 0.5 * (lo + hi);
                    found = true;
                } else {
                    rotation += dtheta;
                    y = r.y;
                    s += h;
                }
            }
            const double factor =
                std::clamp(0.9 * std::pow(std::max(r.error, 1e-10), -0.2), 0.2, 5.0);
            h *= factor;
        }
    }

    // Pass 2: resample one period on a uniform grid.
    WolffWave wave;
    wave.p_ = p;
    wave.period_ = period;
    const int n = opts.samples_per_period;
    wave.samples_.resize(n + 1);
    wave.samples_[0] = {0.0, a0, b0};
    {
        State y = y0;
        const double ds = period / n;
        for (int k = 1; k <= n; ++k) {
            y = integrate_span(p, y, ds, opts.abs_tol, opts.rel_tol, budget);
            wave.samples_[k] = {k * ds, y[0], y[1]};
        }
        // Re-integrate past one period and compare against the stored grid.
        State z = y;
        const int quarter = n / 4;
        for (int rep = 1; rep <= 3; ++rep) {
            z = integrate_span(p, z, quarter * ds, opts.abs_tol, opts.rel_tol, budget);
            const WaveSample& ref = wave.samples_[rep * quarter];
            const double scale = std::max(1.0, std::sqrt(a0 * a0 + b0 * b0));
            if (std::abs(z[0] - ref.w) > opts.periodicity_tol * scale ||
                std::abs(z[1] - ref.dw) > opts.periodicity_tol * scale) {
                throw std::runtime_error("integrate_wave: periodicity check failed");
            }
        }
        const double scale = std::max(1.0, std::sqrt(a0 * a0 + b0 * b0));
        if (std::abs(y[0] - a0) > opts.periodicity_tol * scale ||
            std::abs(y[1] - b0) > opts.periodicity_tol * scale) {
            throw std::runtime_error("integrate_wave: trajectory does not close up");
        }
    }

    // Mean-zero check (composite Simpson; n is even).
    {
        double mean = wave.samples_[0].w + wave.samples_[n].w;
        for (int k = 1; k < n; ++k) {
            mean += 2.0 * (1 + k % 2) * wave.samples_[k].w;
        }
        mean *= (period / n) / 3.0;
        wave.mean_residual_ = std::abs(mean);
        const double scale = std::max(1.0, std::sqrt(a0 * a0 + b0 * b0));
        if (wave.mean_residual_ > opts.mean_tol * scale) {
            throw std::runtime_error("integrate_wave: mean-zero check failed");
        }
    }

    wave.min_norm2_ = std::numeric_limits<double>::infinity();
    wave.max_norm2_ = 0.0;
    for (const auto& smp : wave.samples_) {
        const double r2 = smp.w * smp.w + smp.dw * smp.dw;
        wave.min_norm2_ = std::min(wave.min_norm2_, r2);
        wave.max_norm2_ = std::max(wave.max_norm2_, r2);
    }
    return wave;
}

double WolffWave::value(double s) const {
    const int n = static_cast<int>(samples_.size()) - 1;
    double sm = s - period_ * std::floor(s / period_);
    const double ds = period_ / n;
    int k = std::min(static_cast<int>(sm / ds), n - 1);
    const double xi = (sm - k * ds) / ds;
    const WaveSample& s0 = samples_[k];
    const WaveSample& s1 = samples_[k + 1];
    return hermite(s0.w, ds * s0.dw, s1.w, ds * s1.dw, xi);
}

double WolffWave::slope(double s) const {
    const int n = static_cast<int>(samples_.size()) - 1;
    double sm = s - period_ * std::floor(s / period_);
    const double ds = period_ / n;
    int k = std::min(static_cast<int>(sm / ds), n - 1);
    const double xi = (sm - k * ds) / ds;
    const WaveSample& s0 = samples_[k];
    const WaveSample& s1 = samples_[k + 1];
    // Hermite on w' with the ODE supplying w''.
    const double dd0 = wolff_rhs(p_, s0.w, s0.dw);
    const double dd1 = wolff_rhs(p_, s1.w, s1.dw);
    return hermite(s0.dw, ds * dd0, s1.dw, ds * dd1, xi);
}

ProbeParams ProbeParams::from_direction(Vec2 rho, double t, double tau) {
    const Vec2 unit = normalized(rho);
    ProbeParams probe{unit, perp(unit), t, tau};
    probe.validate();
    return probe;
}

void ProbeParams::validate() const {
    if (std::abs(norm(rho) - 1.0) > 1e-12 || std::abs(norm(rho_perp) - 1.0) > 1e-12) {
        throw std::invalid_argument("ProbeParams: rho and rho_perp must be unit vectors");
    }
    if (std::abs(dot(rho, rho_perp)) > 1e-12) {
        throw std::invalid_argument("ProbeParams: rho and rho_perp must be orthogonal");
    }
    if (!(tau > 0.0)) {
        throw std::invalid_argument("ProbeParams: tau must be positive");
    }
}

PlaneWaveValue plane_wave(const WolffWave& wave, const ProbeParams& probe, Vec2 x) {
    const double amplitude = std::exp(probe.tau * (dot(probe.rho, x) - probe.t));
    const double phase = probe.tau * dot(probe.rho_perp, x);
    const double w = wave.value(phase);
    const double dw = wave.slope(phase);
    PlaneWaveValue out;
    out.value = amplitude * w;
    out.gradient = probe.tau * amplitude * (w * probe.rho + dw * probe.rho_perp);
    return out;
}

double p_harmonicity_residual(const WolffWave& wave, const ProbeParams& probe, const Mesh2D& mesh,
                              double p) {
    if (probe.tau * mesh.max_edge_length() > 0.5) {
        throw std::invalid_argument(
            "p_harmonicity_residual: probe unresolved by the mesh (tau * h > 0.5)");
    }
    std::vector<double> u(mesh.vertex_count());
    for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
        u[v] = plane_wave(wave, probe, mesh.vertices()[v]).value;
    }
    const std::vector<char> active(mesh.triangle_count(), 1);
    const std::vector<double> ones(mesh.triangle_count(), 1.0);
    const std::vector<double> r = assembly::vertex_residual(mesh, ones, active, p, u);

    double interior2 = 0.0, boundary2 = 0.0;
    std::size_t n_int = 0, n_bdy = 0;
    for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
        if (mesh.is_boundary_vertex(static_cast<int>(v))) {
            boundary2 += r[v] * r[v];
            ++n_bdy;
        } else {
            interior2 += r[v] * r[v];
            ++n_int;
        }
    }
    if (boundary2 == 0.0 || n_int == 0) return std::sqrt(interior2);
    // RMS interior pairing against the RMS boundary flux
    return std::sqrt((interior2 / n_int) / (boundary2 / n_bdy));
}

}  // namespace pcond::wolff
