#include "pcond/solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "pcond/assembly.hpp"
#include "pcond/errors.hpp"

namespace pcond {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class UnionFind {
public:
    explicit UnionFind(int n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

    int find(int v) {
        while (parent_[v] != v) {
            parent_[v] = parent_[parent_[v]];
            v = parent_[v];
        }
        return v;
    }

    void unite(int a, int b) { parent_[find(a)] = find(b); }

private:
    std::vector<int> parent_;
};

bool dinf_triangles_constant(const Mesh2D& mesh, const ConductivityField& sigma,
                             std::span<const double> u) {
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        if (!sigma.dinf_mask[t]) continue;
        const auto& tri = mesh.triangles()[t];
        if (u[tri[0]] != u[tri[1]] || u[tri[0]] != u[tri[2]]) return false;
    }
    return true;
}

// Sum of per-vertex pairings over each free dof (merged components collapse
// onto a single entry, realizing the zero-total-flux test function).
Eigen::VectorXd reduce_to_dofs(const DofMap& dof, std::span<const double> per_vertex) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(dof.free_count);
    for (std::size_t v = 0; v < dof.vertex_dof.size(); ++v) {
        const int d = dof.vertex_dof[v];
        if (d >= 0) out[d] += per_vertex[v];
    }
    return out;
}

double scaled_residual(const Mesh2D& mesh, const ConductivityField& sigma, const DofMap& dof,
                       double p, std::span<const double> u) {
    const std::vector<double> r =
        assembly::vertex_residual(mesh, sigma.values, dof.tri_active, p, u);
    const double rnorm = reduce_to_dofs(dof, r).norm();
    const double e = assembly::energy(mesh, sigma.values, dof.tri_active, p, 0.0, u);
    if (e == 0.0) return rnorm;
    return rnorm / e;
}

struct NewtonWorkspace {
    const Mesh2D& mesh;
    const ConductivityField& sigma;
    const DofMap& dof;
    const SolverConfig& cfg;

    double regularized_energy(double p, double eps, std::span<const double> u) const {
        return assembly::energy(mesh, sigma.values, dof.tri_active, p, eps, u);
    }

    Eigen::VectorXd gradient(double p, double eps, std::span<const double> u) const {
        const std::vector<double> g =
            assembly::energy_gradient(mesh, sigma.values, dof.tri_active, p, eps, u);
        return reduce_to_dofs(dof, g);
    }

    Eigen::SparseMatrix<double> hessian(double p, double eps, std::span<const double> u) const {
        const auto blocks = assembly::hessian_blocks(mesh, sigma.values, dof.tri_active, p, eps, u);
        std::vector<Eigen::Triplet<double>> triplets;
        triplets.reserve(9 * blocks.size());
        for (std::size_t t = 0; t < blocks.size(); ++t) {
            if (!dof.tri_active[t]) continue;
            const auto& tri = mesh.triangles()[t];
            for (int i = 0; i < 3; ++i) {
                const int di = dof.vertex_dof[tri[i]];
                if (di < 0) continue;
                for (int j = 0; j < 3; ++j) {
                    const int dj = dof.vertex_dof[tri[j]];
                    if (dj < 0) continue;
                    triplets.emplace_back(di, dj, blocks[t][3 * i + j]);
                }
            }
        }
        Eigen::SparseMatrix<double> h(dof.free_count, dof.free_count);
        h.setFromTriplets(triplets.begin(), triplets.end());
        return h;
    }

    void apply_step(std::vector<double>& u, const Eigen::VectorXd& step, double t) const {
        for (std::size_t v = 0; v < u.size(); ++v) {
            const int d = dof.vertex_dof[v];
            if (d >= 0) u[v] += t * step[d];
        }
    }
};

// Damped Newton on the regularized energy for one continuation stage.
// Returns when the relative energy decrease drops below tol_energy (and, on
// the final stage, the unregularized weak residual is below tol_residual),
// the gradient vanishes, or no further progress is possible.
void newton_stage(const NewtonWorkspace& ws, double p, double eps, std::vector<double>& u,
                  int& iterations_used, bool enforce_residual) {
    double e_current = ws.regularized_energy(p, eps, u);
    int futile_steps = 0;
    double previous_gnorm = std::numeric_limits<double>::infinity();
    double previous_drop = std::numeric_limits<double>::infinity();

    while (iterations_used < ws.cfg.max_iters) {
        const Eigen::VectorXd g = ws.gradient(p, eps, u);
        const double gnorm = g.norm();
        // The scaled weak residual is about gnorm / (p E) plus the eps bias,
        // so this target overshoots the tolerance by a factor 10.
        double gtol = 1e-14 * std::max(1.0, std::abs(e_current));
        if (enforce_residual) {
            gtol = std::max(gtol, std::min(0.1, 0.1 * p * ws.cfg.tol_residual *
                                                    std::max(e_current, 1e-300)));
        }
        if (gnorm <= gtol) return;
        // Numerical floor: the energy no longer moves and the gradient has
        // stopped collapsing.
        const double e_noise = 4.0 * std::numeric_limits<double>::epsilon() *
                               std::max(std::abs(e_current), 1e-300);
        if (previous_drop <= e_noise && gnorm > 0.5 * previous_gnorm) {
            if (++futile_steps >= 3) return;
        } else {
            futile_steps = 0;
        }
        previous_gnorm = gnorm;

        Eigen::SparseMatrix<double> h = ws.hessian(p, eps, u);
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
        Eigen::VectorXd direction;
        bool have_direction = false;

        double shift = 0.0;
        for (int attempt = 0; attempt < 5; ++attempt) {
            if (attempt > 0) {
                // Levenberg shift against indefiniteness from round-off.
                double max_diag = 0.0;
                for (int k = 0; k < h.outerSize(); ++k) {
                    max_diag = std::max(max_diag, h.coeff(k, k));
                }
                const double new_shift = (shift == 0.0 ? 1e-10 * std::max(max_diag, 1.0)
                                                       : shift * 100.0);
                Eigen::SparseMatrix<double> identity(ws.dof.free_count, ws.dof.free_count);
                identity.setIdentity();
                h = h + (new_shift - shift) * identity;
                shift = new_shift;
            }
            ldlt.compute(h);
            if (ldlt.info() != Eigen::Success) continue;
            direction = ldlt.solve(-g);
            if (ldlt.info() != Eigen::Success) continue;
            if (g.dot(direction) < 0.0 && direction.allFinite()) {
                have_direction = true;
                break;
            }
        }
        if (!have_direction) {
            direction = -g;  // steepest-descent fallback
            if (!(g.dot(direction) < 0.0)) {
                throw SolveError("solve: descent-direction fallback exhausted");
            }
        }

        const double slope = g.dot(direction);
        double step = 1.0;
        double e_next = 0.0;
        bool accepted = false;
        std::vector<double> trial = u;
        for (int backtrack = 0; backtrack < 60; ++backtrack) {
            trial = u;
            ws.apply_step(trial, direction, step);
            e_next = ws.regularized_energy(p, eps, trial);
            if (std::isfinite(e_next) && e_next <= e_current + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        ++iterations_used;
        if (!accepted) return;  // stationary to line-search resolution

        u = std::move(trial);
        const double drop = e_current - e_next;
        e_current = e_next;
        previous_drop = drop;
        // On residual-enforcing stages the gradient target above decides;
        // the energy criterion alone quits too early on flat landscapes.
        if (!enforce_residual &&
            drop <= ws.cfg.tol_energy * std::max(std::abs(e_current), 1e-300)) {
            return;
        }
    }
}

}  // namespace

DofMap build_dof_map(const Mesh2D& mesh, const ConductivityField& sigma) {
    const int nv = static_cast<int>(mesh.vertex_count());
    const int nt = static_cast<int>(mesh.triangle_count());

    DofMap dof;
    dof.tri_active.resize(nt);
    for (int t = 0; t < nt; ++t) dof.tri_active[t] = sigma.finite_at(t) ? 1 : 0;

    UnionFind components(nv);
    std::vector<char> in_dinf(nv, 0), in_active(nv, 0);
    for (int t = 0; t < nt; ++t) {
        const auto& tri = mesh.triangles()[t];
        if (sigma.dinf_mask[t]) {
            for (int j = 0; j < 3; ++j) in_dinf[tri[j]] = 1;
            components.unite(tri[0], tri[1]);
            components.unite(tri[0], tri[2]);
        } else if (dof.tri_active[t]) {
            for (int j = 0; j < 3; ++j) in_active[tri[j]] = 1;
        }
    }

    dof.vertex_dof.assign(nv, DofMap::kExcluded);
    int next = 0;
    for (int v = 0; v < nv; ++v) {
        if (mesh.is_boundary_vertex(v)) {
            dof.vertex_dof[v] = DofMap::kFixed;
        } else if (!in_dinf[v] && in_active[v]) {
            dof.vertex_dof[v] = next++;
        }
    }

    std::vector<int> root_component(nv, -1);
    for (int v = 0; v < nv; ++v) {
        if (!in_dinf[v]) continue;
        const int root = components.find(v);
        if (root_component[root] < 0) {
            root_component[root] = static_cast<int>(dof.dinf_components.size());
            dof.dinf_components.emplace_back();
            dof.dinf_component_dof.push_back(next++);
        }
        const int c = root_component[root];
        dof.dinf_components[c].push_back(v);
        dof.vertex_dof[v] = dof.dinf_component_dof[c];
    }
    dof.free_count = next;
    return dof;
}

double energy(const Mesh2D& mesh, const ConductivityField& sigma, double p,
              const PotentialField& u) {
    validate_exponent(p);
    if (!dinf_triangles_constant(mesh, sigma, u.vertex_values)) return kInf;
    std::vector<char> active(mesh.triangle_count());
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) active[t] = sigma.finite_at(t) ? 1 : 0;
    return assembly::energy(mesh, sigma.values, active, p, 0.0, u.vertex_values);
}

double weak_residual(const Mesh2D& mesh, const ConductivityField& sigma, double p,
                     std::span<const double> vertex_values) {
    validate_exponent(p);
    if (!dinf_triangles_constant(mesh, sigma, vertex_values)) return kInf;
    const DofMap dof = build_dof_map(mesh, sigma);
    return scaled_residual(mesh, sigma, dof, p, vertex_values);
}

std::pair<PotentialField, SolveReport> solve(const Mesh2D& mesh, const ConductivityField& sigma,
                                             double p, const BoundaryTrace& f,
                                             const SolverConfig& cfg,
                                             const std::vector<double>* initial_guess) {
    validate_exponent(p);
    validate_config(cfg);
    require_valid_field(mesh, sigma);
    if (f.values.size() != mesh.boundary_count()) {
        throw std::invalid_argument("solve: boundary trace size mismatch");
    }
    for (double value : f.values) {
        if (!std::isfinite(value)) throw std::invalid_argument("solve: boundary data must be finite");
    }

    const std::size_t nv = mesh.vertex_count();
    PotentialField field;
    SolveReport report;

    const auto [fmin, fmax] = std::minmax_element(f.values.begin(), f.values.end());
    const DofMap dof = build_dof_map(mesh, sigma);

    if (*fmin == *fmax) {
        // Constant data minimizes with zero energy; return it directly.
        field.vertex_values.assign(nv, *fmin);
        field.gradients.assign(mesh.triangle_count(), Vec2{});
        field.energy = 0.0;
        report.final_energy = 0.0;
        report.residual = 0.0;
        report.converged = true;
        for (std::size_t c = 0; c < dof.dinf_components.size(); ++c) {
            report.dinf_component_values.push_back(*fmin);
        }
        return {std::move(field), std::move(report)};
    }

    // The energy is invariant under adding constants; centering the data
    // removes the float cancellation a large offset would otherwise inject
    // into every gradient evaluation.
    double center = 0.0;
    for (double value : f.values) center += value;
    center /= static_cast<double>(f.values.size());

    std::vector<double> u(nv, 0.0);
    for (std::size_t k = 0; k < mesh.boundary_count(); ++k) {
        u[mesh.boundary_vertices()[k]] = f.values[k] - center;
    }
    NewtonWorkspace ws{mesh, sigma, dof, cfg};
    int iterations = 0;

    if (initial_guess != nullptr) {
        if (initial_guess->size() != nv) {
            throw std::invalid_argument("solve: initial guess size mismatch");
        }
        for (std::size_t v = 0; v < nv; ++v) {
            if (dof.vertex_dof[v] >= 0) u[v] = (*initial_guess)[v] - center;
        }
        // Flatten each merged component so its vertices agree bit-for-bit.
        for (const auto& component : dof.dinf_components) {
            double mean = 0.0;
            for (int v : component) mean += u[v];
            mean /= static_cast<double>(component.size());
            for (int v : component) u[v] = mean;
        }
        if (p == 2.0) newton_stage(ws, 2.0, cfg.epsilon_reg, u, iterations, true);
    } else {
        // p=2 start: a single linear solve lands on the quadratic minimizer.
        newton_stage(ws, 2.0, cfg.epsilon_reg, u, iterations, p == 2.0);
    }

    if (p != 2.0) {
        std::vector<double> stages;
        const double floor = std::max(cfg.epsilon_reg, 1e-12);
        for (double eps = 1e-2; eps > floor * (1.0 + 1e-9); eps *= 0.1) stages.push_back(eps);
        stages.push_back(floor);
        for (double eps : stages) {
            newton_stage(ws, p, eps, u, iterations, eps == stages.back());
        }
        // The unregularized residual can stall above tolerance for p < 2 when
        // gradients vanish somewhere; continue shrinking eps in that case.
        double eps_extra = stages.back();
        while (p < 2.0 && eps_extra > 1e-10 &&
               scaled_residual(mesh, sigma, dof, p, u) > cfg.tol_residual &&
               iterations < cfg.max_iters) {
            eps_extra *= 0.1;
            newton_stage(ws, p, eps_extra, u, iterations, true);
        }
    }

    report.iterations = iterations;
    report.residual = scaled_residual(mesh, sigma, dof, p, u);
    report.converged = report.residual <= cfg.tol_residual;
    if (!report.converged) {
        char msg[160];
        std::snprintf(msg, sizeof(msg),
                      "solve: weak residual %.3e above tolerance %.3e after %d iterations",
                      report.residual, cfg.tol_residual, iterations);
        throw SolveError(msg);
    }

    // Undo the centering; excluded zero-region vertices stay pinned at 0.
    for (std::size_t v = 0; v < nv; ++v) {
        if (dof.vertex_dof[v] != DofMap::kExcluded) u[v] += center;
    }
    for (std::size_t k = 0; k < mesh.boundary_count(); ++k) {
        u[mesh.boundary_vertices()[k]] = f.values[k];  // trace reproduced exactly
    }

    field.vertex_values = std::move(u);
    field.gradients = assembly::gradients(mesh, field.vertex_values);
    field.energy =
        assembly::energy(mesh, sigma.values, dof.tri_active, p, 0.0, field.vertex_values);
    report.final_energy = field.energy;
    for (const auto& component : dof.dinf_components) {
        report.dinf_component_values.push_back(field.vertex_values[component.front()]);
    }
    return {std::move(field), std::move(report)};
}

}  // namespace pcond
