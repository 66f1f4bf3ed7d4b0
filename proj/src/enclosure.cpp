#include "pcond/enclosure.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "pcond/assembly.hpp"
#include "pcond/dn_map.hpp"
#include "pcond/errors.hpp"

namespace pcond::enclosure {

namespace {

constexpr int kDim = 2;

BoundaryTrace probe_trace(const Mesh2D& mesh, const wolff::WolffWave& wave,
                          const wolff::ProbeParams& probe) {
    BoundaryTrace f;
    f.values.reserve(mesh.boundary_count());
    for (int v : mesh.boundary_vertices()) {
        f.values.push_back(wolff::plane_wave(wave, probe, mesh.vertices()[v]).value);
    }
    return f;
}

void require_unit_background(const Mesh2D& mesh, const ConductivityField& sigma) {
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles()[t];
        const bool touches_boundary = mesh.is_boundary_vertex(tri[0]) ||
                                      mesh.is_boundary_vertex(tri[1]) ||
                                      mesh.is_boundary_vertex(tri[2]);
        if (!touches_boundary) continue;
        if (!sigma.finite_at(static_cast<int>(t)) || sigma.values[t] != 1.0) {
            throw std::invalid_argument(
                "enclosure: inclusion must be embedded in a unit background away from the boundary");
        }
    }
}

// Dirichlet solve with a cached stiffness factorization; exact for p = 2
// where the energy is quadratic.
class P2Cache {
public:
    P2Cache(const Mesh2D& mesh, const ConductivityField& sigma)
        : mesh_(mesh), sigma_(sigma), dof_(build_dof_map(mesh, sigma)) {
        const std::vector<double> zeros(mesh.vertex_count(), 0.0);
        const auto blocks =
            assembly::hessian_blocks(mesh, sigma_.values, dof_.tri_active, 2.0, 0.0, zeros);
        std::vector<Eigen::Triplet<double>> triplets;
        triplets.reserve(9 * blocks.size());
        for (std::size_t t = 0; t < blocks.size(); ++t) {
            if (!dof_.tri_active[t]) continue;
            const auto& tri = mesh.triangles()[t];
            for (int i = 0; i < 3; ++i) {
                const int di = dof_.vertex_dof[tri[i]];
                if (di < 0) continue;
                for (int j = 0; j < 3; ++j) {
                    const int dj = dof_.vertex_dof[tri[j]];
                    if (dj < 0) continue;
                    triplets.emplace_back(di, dj, blocks[t][3 * i + j]);
                }
            }
        }
        Eigen::SparseMatrix<double> h(dof_.free_count, dof_.free_count);
        h.setFromTriplets(triplets.begin(), triplets.end());
        ldlt_.compute(h);
        if (ldlt_.info() != Eigen::Success) {
            throw SolveError("enclosure: stiffness factorization failed");
        }
    }

    double diagonal_pairing(const BoundaryTrace& f) const {
        std::vector<double> u(mesh_.vertex_count(), 0.0);
        for (std::size_t k = 0; k < mesh_.boundary_count(); ++k) {
            u[mesh_.boundary_vertices()[k]] = f.values[k];
        }
        const std::vector<double> grad =
            assembly::energy_gradient(mesh_, sigma_.values, dof_.tri_active, 2.0, 0.0, u);
        Eigen::VectorXd g = Eigen::VectorXd::Zero(dof_.free_count);
        for (std::size_t v = 0; v < u.size(); ++v) {
            const int d = dof_.vertex_dof[v];
            if (d >= 0) g[d] += grad[v];
        }
        const Eigen::VectorXd step = ldlt_.solve(-g);
        for (std::size_t v = 0; v < u.size(); ++v) {
            const int d = dof_.vertex_dof[v];
            if (d >= 0) u[v] += step[d];
        }
        return assembly::energy(mesh_, sigma_.values, dof_.tri_active, 2.0, 0.0, u);
    }

private:
    const Mesh2D& mesh_;
    ConductivityField sigma_;
    DofMap dof_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
};

}  // namespace

struct IndicatorEngine::Impl {
    ConductivityField sigma;
    ConductivityField background;
    wolff::WolffWave wave;
    SolverConfig cfg;
    std::unique_ptr<P2Cache> sigma_cache;       // p = 2 only
    std::unique_ptr<P2Cache> background_cache;  // p = 2 only

    double diagonal_pairing(const Mesh2D& mesh, double p, const ConductivityField& field,
                            const P2Cache* cache, const BoundaryTrace& f) const {
        if (cache != nullptr) return cache->diagonal_pairing(f);
        auto [fbar, report] = solve(mesh, field, p, f, cfg);
        return fbar.energy;
    }
};

IndicatorEngine::IndicatorEngine(const Mesh2D& mesh, const ConductivityField& sigma, double p,
                                 const wolff::WolffWave& wave, SolverConfig cfg)
    : mesh_(mesh), p_(p), impl_(std::make_unique<Impl>()) {
    validate_exponent(p);
    validate_config(cfg);
    require_valid_field(mesh, sigma);
    require_unit_background(mesh, sigma);
    impl_->sigma = sigma;
    impl_->background = ConductivityField::uniform(mesh.triangle_count(), 1.0);
    impl_->wave = wave;
    impl_->cfg = cfg;
    if (p == 2.0) {
        impl_->sigma_cache = std::make_unique<P2Cache>(mesh, impl_->sigma);
        impl_->background_cache = std::make_unique<P2Cache>(mesh, impl_->background);
    }
}

IndicatorEngine::~IndicatorEngine() = default;
IndicatorEngine::IndicatorEngine(IndicatorEngine&&) noexcept = default;

IndicatorSample IndicatorEngine::indicator(const wolff::ProbeParams& probe) const {
    probe.validate();
    if (probe.tau * mesh_.max_edge_length() > 0.5) {
        throw std::invalid_argument("indicator: probe unresolved by the mesh (tau * h > 0.5)");
    }
    const BoundaryTrace f = probe_trace(mesh_, impl_->wave, probe);

    IndicatorSample sample;
    sample.probe = probe;
    sample.pairing_sigma =
        impl_->diagonal_pairing(mesh_, p_, impl_->sigma, impl_->sigma_cache.get(), f);
    sample.pairing_background = impl_->diagonal_pairing(mesh_, p_, impl_->background,
                                                        impl_->background_cache.get(), f);
    sample.tau_scale = std::pow(probe.tau, double(kDim) - p_);
    sample.value = sample.tau_scale * (sample.pairing_sigma - sample.pairing_background);
    return sample;
}

double IndicatorEngine::noise_floor(const wolff::ProbeParams& probe) const {
    const BoundaryTrace f = probe_trace(mesh_, impl_->wave, probe);
    const double cached = impl_->diagonal_pairing(mesh_, p_, impl_->background,
                                                  impl_->background_cache.get(), f);
    auto [fbar, report] = solve(mesh_, impl_->background, p_, f, impl_->cfg);
    const double generic = fbar.energy;
    const double scale = std::pow(probe.tau, double(kDim) - p_);
    const double self = scale * std::abs(cached - generic);
    const double roundoff = 1e-9 * scale * (std::abs(cached) + std::abs(generic));
    return std::max(10.0 * self, roundoff);
}

IndicatorSample indicator(const Mesh2D& mesh, const ConductivityField& sigma, double p,
                          const wolff::WolffWave& wave, const wolff::ProbeParams& probe,
                          const SolverConfig& cfg) {
    return IndicatorEngine(mesh, sigma, p, wave, cfg).indicator(probe);
}

SupportEstimate support_estimate(const IndicatorEngine& engine, Vec2 rho,
                                 std::span<const double> tau_grid) {
    if (tau_grid.size() < 4) {
        throw std::invalid_argument("support_estimate: need at least 4 tau values");
    }
    for (std::size_t i = 0; i + 1 < tau_grid.size(); ++i) {
        if (!(tau_grid[i] < tau_grid[i + 1])) {
            throw std::invalid_argument("support_estimate: tau grid must increase");
        }
    }
    if (tau_grid.back() * engine.mesh().max_edge_length() > 0.5) {
        throw std::invalid_argument("support_estimate: tau grid unresolved by the mesh");
    }

    SupportEstimate est;
    est.rho = normalized(rho);
    est.tau_grid.assign(tau_grid.begin(), tau_grid.end());

    std::vector<double> values, floors;
    for (double tau : tau_grid) {
        const auto probe = wolff::ProbeParams::from_direction(est.rho, 0.0, tau);
        values.push_back(engine.indicator(probe).value);
        floors.push_back(engine.noise_floor(probe));
    }

    for (std::size_t i = 0; i < values.size(); ++i) {
        if (std::abs(values[i]) <= floors[i]) {
            est.note = "direction inconclusive: indicator below noise floor";
            return est;
        }
    }
    const double sign = values.front() > 0.0 ? 1.0 : -1.0;
    for (double v : values) {
        if (v * sign <= 0.0) {
            est.note = "direction inconclusive: indicator changes sign";
            return est;
        }
    }

    // Fit log|I| = h * (p tau) + a * log(tau) + b. The exponential rate in
    // p*tau estimates the support function; the log(tau) term absorbs the
    // algebraic growth allowed between the constant lower bound and the
    // tau^d upper bound, so its amplitude is clamped to [0, d].
    const double p = engine.exponent();
    const std::size_t m = values.size();
    std::vector<double> xs(m), zs(m), ys(m);
    for (std::size_t i = 0; i < m; ++i) {
        xs[i] = p * est.tau_grid[i];
        zs[i] = std::log(est.tau_grid[i]);
        ys[i] = std::log(std::abs(values[i]));
    }
    auto fit_two = [&](double amplitude, double& slope, double& intercept) {
        double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double yi = ys[i] - amplitude * zs[i];
            sx += xs[i];
            sy += yi;
            sxx += xs[i] * xs[i];
            sxy += xs[i] * yi;
        }
        const double n = static_cast<double>(m);
        slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        intercept = (sy - slope * sx) / n;
    };

    // unconstrained 3-parameter normal equations, unknowns (h, amplitude, b)
    double normal[3][4] = {};
    for (std::size_t i = 0; i < m; ++i) {
        const double row[3] = {xs[i], zs[i], 1.0};
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) normal[r][c] += row[r] * row[c];
            normal[r][3] += row[r] * ys[i];
        }
    }
    double amplitude = double(kDim);
    bool solvable = true;
    for (int col = 0; col < 3 && solvable; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 3; ++r) {
            if (std::abs(normal[r][col]) > std::abs(normal[pivot][col])) pivot = r;
        }
        if (std::abs(normal[pivot][col]) < 1e-13) {
            solvable = false;
            break;
        }
        std::swap(normal[col], normal[pivot]);
        for (int r = 0; r < 3; ++r) {
            if (r == col) continue;
            const double factor = normal[r][col] / normal[col][col];
            for (int c = col; c < 4; ++c) normal[r][c] -= factor * normal[col][c];
        }
    }
    if (solvable) amplitude = normal[1][3] / normal[1][1];
    amplitude = std::clamp(amplitude, 0.0, double(kDim));
    fit_two(amplitude, est.fit_slope, est.fit_intercept);

    double ss = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double r = ys[i] - (est.fit_slope * xs[i] + amplitude * zs[i] + est.fit_intercept);
        ss += r * r;
    }
    est.fit_residual = std::sqrt(ss / static_cast<double>(m));
    est.h_est = est.fit_slope;

    // Guard against wildly non-monotone data that a line cannot describe.
    bool increasing = true, decreasing = true;
    for (std::size_t i = 0; i + 1 < ys.size(); ++i) {
        if (ys[i + 1] < ys[i]) increasing = false;
        if (ys[i + 1] > ys[i]) decreasing = false;
    }
    if (!increasing && !decreasing && est.fit_residual > 1.0) {
        est.note = "direction inconclusive: non-monotone indicator magnitude";
        return est;
    }

    est.conclusive = true;
    return est;
}

SupportEstimate support_estimate(const Mesh2D& mesh, const ConductivityField& sigma, double p,
                                 const wolff::WolffWave& wave, Vec2 rho,
                                 std::span<const double> tau_grid, const SolverConfig& cfg) {
    const IndicatorEngine engine(mesh, sigma, p, wave, cfg);
    return support_estimate(engine, rho, tau_grid);
}

namespace {

std::vector<Vec2> clip_halfplane(const std::vector<Vec2>& poly, Vec2 rho, double offset) {
    std::vector<Vec2> out;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 cur = poly[i];
        const Vec2 nxt = poly[(i + 1) % n];
        const bool cur_in = dot(cur, rho) <= offset;
        const bool nxt_in = dot(nxt, rho) <= offset;
        if (cur_in) out.push_back(cur);
        if (cur_in != nxt_in) {
            const double denom = dot(nxt - cur, rho);
            const double s = (offset - dot(cur, rho)) / denom;
            out.push_back(cur + s * (nxt - cur));
        }
    }
    return out;
}

}  // namespace

HullPolygon reconstruct_hull(std::span<const SupportEstimate> estimates, const Box2& clip) {
    HullPolygon hull;
    std::vector<double> angles;
    for (const auto& est : estimates) {
        if (!est.conclusive) continue;
        hull.directions.push_back(est.rho);
        hull.offsets.push_back(est.h_est);
        angles.push_back(std::atan2(est.rho.y, est.rho.x));
    }
    if (hull.directions.size() < 3) {
        throw InconclusiveError("reconstruct_hull: fewer than 3 conclusive directions");
    }
    std::sort(angles.begin(), angles.end());
    double max_gap = angles.front() + 2.0 * std::numbers::pi - angles.back();
    for (std::size_t i = 0; i + 1 < angles.size(); ++i) {
        max_gap = std::max(max_gap, angles[i + 1] - angles[i]);
    }
    if (max_gap >= std::numbers::pi) {
        throw InconclusiveError("reconstruct_hull: conclusive directions do not span the circle");
    }

    std::vector<Vec2> poly{
        {clip.lo.x, clip.lo.y}, {clip.hi.x, clip.lo.y}, {clip.hi.x, clip.hi.y}, {clip.lo.x, clip.hi.y}};
    for (std::size_t k = 0; k < hull.directions.size(); ++k) {
        poly = clip_halfplane(poly, hull.directions[k], hull.offsets[k]);
        if (poly.size() < 3) {
            throw InconclusiveError("reconstruct_hull: contradictory estimates (empty intersection)");
        }
    }
    hull.vertices = std::move(poly);
    return hull;
}

const char* to_string(InclusionClass c) {
    switch (c) {
        case InclusionClass::None: return "NONE";
        case InclusionClass::Conducting: return "CONDUCTING";
        case InclusionClass::Insulating: return "INSULATING";
        case InclusionClass::Unclassified: return "UNCLASSIFIED";
    }
    return "UNCLASSIFIED";
}

InclusionClass classify_inclusion(std::span<const IndicatorSample> samples, double noise_rel) {
    if (samples.empty()) {
        throw std::invalid_argument("classify_inclusion: no samples");
    }
    int positive = 0, negative = 0;
    for (const auto& sample : samples) {
        const double floor = noise_rel * sample.tau_scale *
                             (std::abs(sample.pairing_sigma) + std::abs(sample.pairing_background));
        if (std::abs(sample.value) <= floor) continue;
        (sample.value > 0.0 ? positive : negative) += 1;
    }
    if (positive == 0 && negative == 0) return InclusionClass::None;
    if (negative == 0) return InclusionClass::Conducting;
    if (positive == 0) return InclusionClass::Insulating;
    return InclusionClass::Unclassified;
}

ScalingCheck scaling_identity_check(const Mesh2D& mesh, const ConductivityField& sigma, double p,
                                    const wolff::WolffWave& wave, Vec2 rho, double t, double t0,
                                    double tau, const SolverConfig& cfg) {
    const IndicatorEngine engine(mesh, sigma, p, wave, cfg);
    const Vec2 unit = normalized(rho);
    const IndicatorSample at_t =
        engine.indicator(wolff::ProbeParams::from_direction(unit, t, tau));
    const IndicatorSample at_t0 =
        engine.indicator(wolff::ProbeParams::from_direction(unit, t0, tau));

    ScalingCheck check;
    check.lhs = at_t.value;
    check.rhs = std::exp(p * tau * (t0 - t)) * at_t0.value;
    const double floor_t = engine.noise_floor(at_t.probe);
    const double floor_t0 = engine.noise_floor(at_t0.probe);
    if (std::abs(at_t.value) <= floor_t && std::abs(at_t0.value) <= floor_t0) {
        check.skipped = true;
        return check;
    }
    check.relative_error = std::abs(check.lhs - check.rhs) / std::max(std::abs(check.rhs), 1e-300);
    return check;
}

}  // namespace pcond::enclosure
