#include "pcond/field.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace pcond {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

ConductivityField ConductivityField::uniform(std::size_t n_triangles, double value) {
    ConductivityField f;
    f.values.assign(n_triangles, value);
    f.d0_mask.assign(n_triangles, 0);
    f.dinf_mask.assign(n_triangles, 0);
    return f;
}

void ConductivityField::set_value(int t, double v) {
    values[t] = v;
    d0_mask[t] = 0;
    dinf_mask[t] = 0;
}

void ConductivityField::set_zero(int t) {
    values[t] = 0.0;
    d0_mask[t] = 1;
    dinf_mask[t] = 0;
}

void ConductivityField::set_infinite(int t) {
    values[t] = kInf;
    d0_mask[t] = 0;
    dinf_mask[t] = 1;
}

bool ConductivityField::has_degenerate() const {
    return std::any_of(d0_mask.begin(), d0_mask.end(), [](std::uint8_t m) { return m != 0; }) ||
           std::any_of(dinf_mask.begin(), dinf_mask.end(), [](std::uint8_t m) { return m != 0; });
}

BoundaryTrace trace_from_function(const Mesh2D& mesh, const std::function<double(Vec2)>& f) {
    BoundaryTrace trace;
    trace.values.reserve(mesh.boundary_count());
    for (int v : mesh.boundary_vertices()) {
        trace.values.push_back(f(mesh.vertices()[v]));
    }
    return trace;
}

void validate_config(const SolverConfig& cfg) {
    if (!(cfg.epsilon_reg >= 0.0)) throw std::invalid_argument("SolverConfig: epsilon_reg must be >= 0");
    if (!(cfg.tol_energy > 0.0)) throw std::invalid_argument("SolverConfig: tol_energy must be > 0");
    if (!(cfg.tol_residual > 0.0)) throw std::invalid_argument("SolverConfig: tol_residual must be > 0");
    if (cfg.max_iters < 1) throw std::invalid_argument("SolverConfig: max_iters must be >= 1");
}

void validate_exponent(double p) {
    if (!(p > 1.0) || !std::isfinite(p)) {
        throw std::invalid_argument("p must lie in (1, inf)");
    }
}

ValidationReport validate_field(const Mesh2D& mesh, const ConductivityField& sigma) {
    ValidationReport report;
    auto fail = [&report](const std::string& msg) {
        report.ok = false;
        report.violations.push_back(msg);
    };

    const std::size_t nt = mesh.triangle_count();
    if (sigma.values.size() != nt || sigma.d0_mask.size() != nt || sigma.dinf_mask.size() != nt) {
        fail("field size does not match mesh");
        return report;
    }

    bool any_finite_triangle = false;
    for (std::size_t t = 0; t < nt; ++t) {
        if (sigma.d0_mask[t] && sigma.dinf_mask[t]) {
            fail("masks overlap at triangle " + std::to_string(t));
        }
        if (!sigma.d0_mask[t] && !sigma.dinf_mask[t]) {
            const double v = sigma.values[t];
            if (!std::isfinite(v) || !(v > 0.0)) {
                fail("finite part not bounded in (0, inf) at triangle " + std::to_string(t));
            }
        }
        if (!sigma.dinf_mask[t]) any_finite_triangle = true;
    }
    if (!any_finite_triangle) {
        fail("D_inf covers the whole domain");
    }

    // Shared-vertex contact test between closed regions and the boundary.
    const std::size_t nv = mesh.vertex_count();
    std::vector<char> touches_d0(nv, 0), touches_dinf(nv, 0);
    for (std::size_t t = 0; t < nt; ++t) {
        if (!sigma.d0_mask[t] && !sigma.dinf_mask[t]) continue;
        for (int j = 0; j < 3; ++j) {
            const int v = mesh.triangles()[t][j];
            if (sigma.d0_mask[t]) touches_d0[v] = 1;
            if (sigma.dinf_mask[t]) touches_dinf[v] = 1;
        }
    }
    bool d0_dinf_contact = false, d0_boundary = false, dinf_boundary = false;
    for (std::size_t v = 0; v < nv; ++v) {
        if (touches_d0[v] && touches_dinf[v]) d0_dinf_contact = true;
        if (touches_d0[v] && mesh.is_boundary_vertex(static_cast<int>(v))) d0_boundary = true;
        if (touches_dinf[v] && mesh.is_boundary_vertex(static_cast<int>(v))) dinf_boundary = true;
    }
    if (d0_dinf_contact) fail("D0 touches D_inf");
    if (d0_boundary) fail("D0 touches boundary");
    if (dinf_boundary) fail("D_inf touches boundary");

    return report;
}

void require_valid_field(const Mesh2D& mesh, const ConductivityField& sigma) {
    const ValidationReport report = validate_field(mesh, sigma);
    if (report.ok) return;
    std::ostringstream msg;
    msg << "invalid conductivity field:";
    for (const auto& v : report.violations) msg << " [" << v << "]";
    throw std::invalid_argument(msg.str());
}

bool contains(const Disk& d, Vec2 x) { return norm2(x - d.center) <= d.radius * d.radius; }

bool contains(const Box2& b, Vec2 x) {
    return x.x >= b.lo.x && x.x <= b.hi.x && x.y >= b.lo.y && x.y <= b.hi.y;
}

namespace {

template <typename Shape>
void paint_impl(const Mesh2D& mesh, ConductivityField& sigma, const Shape& shape, double value) {
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        if (!contains(shape, mesh.centroid(static_cast<int>(t)))) continue;
        const int ti = static_cast<int>(t);
        if (value == 0.0) {
            sigma.set_zero(ti);
        } else if (std::isinf(value)) {
            sigma.set_infinite(ti);
        } else {
            sigma.set_value(ti, value);
        }
    }
}

}  // namespace

void paint(const Mesh2D& mesh, ConductivityField& sigma, const Disk& shape, double value) {
    paint_impl(mesh, sigma, shape, value);
}

void paint(const Mesh2D& mesh, ConductivityField& sigma, const Box2& shape, double value) {
    paint_impl(mesh, sigma, shape, value);
}

}  // namespace pcond
