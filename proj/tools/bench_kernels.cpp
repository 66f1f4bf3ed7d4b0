// Timing comparison of the OpenMP assembly kernels against the serial
// reference loops on a large structured mesh.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "pcond/assembly.hpp"
#include "pcond/mesh.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

template <typename F>
double time_best_of(int reps, F&& body) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto start = Clock::now();
        body();
        best = std::min(best, seconds_since(start));
    }
    return best;
}

}  // namespace

int main(int argc, char** argv) {
    int n = 384;
    if (argc > 1) n = std::atoi(argv[1]);
    const double p = 3.0;
    const double eps = 1e-6;

    std::printf("mesh %dx%d", n, n);
#ifdef _OPENMP
    std::printf(", %d threads\n", omp_get_max_threads());
#else
    std::printf(", OpenMP disabled\n");
#endif

    const pcond::Mesh2D mesh = pcond::build_rect_mesh(n, n, 1.0, 1.0);
    const std::size_t nt = mesh.triangle_count();
    const std::size_t nv = mesh.vertex_count();
    std::printf("%zu triangles, %zu vertices\n\n", nt, nv);

    std::vector<double> sigma(nt);
    std::vector<char> active(nt, 1);
    for (std::size_t t = 0; t < nt; ++t) {
        const pcond::Vec2 c = mesh.centroid(static_cast<int>(t));
        sigma[t] = 1.0 + 0.5 * std::sin(3.0 * c.x) * std::cos(2.0 * c.y);
    }
    std::vector<double> u(nv), v(nv);
    for (std::size_t i = 0; i < nv; ++i) {
        const pcond::Vec2 x = mesh.vertices()[i];
        u[i] = std::sin(2.0 * x.x + 0.3) * std::cos(1.5 * x.y);
        v[i] = x.x * x.x - 0.7 * x.y;
    }

    namespace asm_ = pcond::assembly;
    const int reps = 5;

    struct Row {
        const char* name;
        double serial;
        double parallel;
        double check;
    };
    std::vector<Row> rows;

    {
        double e_ref = 0.0, e_par = 0.0;
        const double ts = time_best_of(reps, [&] { e_ref = asm_::ref::energy(mesh, sigma, active, p, eps, u); });
        const double tp = time_best_of(reps, [&] { e_par = asm_::energy(mesh, sigma, active, p, eps, u); });
        rows.push_back({"energy", ts, tp, std::abs(e_ref - e_par) / std::abs(e_ref)});
    }
    {
        std::vector<double> g_ref, g_par;
        const double ts = time_best_of(reps, [&] { g_ref = asm_::ref::energy_gradient(mesh, sigma, active, p, eps, u); });
        const double tp = time_best_of(reps, [&] { g_par = asm_::energy_gradient(mesh, sigma, active, p, eps, u); });
        double diff = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < g_ref.size(); ++i) {
            diff = std::max(diff, std::abs(g_ref[i] - g_par[i]));
            scale = std::max(scale, std::abs(g_ref[i]));
        }
        rows.push_back({"energy_gradient", ts, tp, diff / scale});
    }
    {
        std::vector<double> r_ref, r_par;
        const double ts = time_best_of(reps, [&] { r_ref = asm_::ref::vertex_residual(mesh, sigma, active, p, u); });
        const double tp = time_best_of(reps, [&] { r_par = asm_::vertex_residual(mesh, sigma, active, p, u); });
        double diff = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < r_ref.size(); ++i) {
            diff = std::max(diff, std::abs(r_ref[i] - r_par[i]));
            scale = std::max(scale, std::abs(r_ref[i]));
        }
        rows.push_back({"vertex_residual", ts, tp, diff / scale});
    }
    {
        double w_ref = 0.0, w_par = 0.0;
        const double ts = time_best_of(reps, [&] { w_ref = asm_::ref::pairing(mesh, sigma, active, p, u, v); });
        const double tp = time_best_of(reps, [&] { w_par = asm_::pairing(mesh, sigma, active, p, u, v); });
        rows.push_back({"pairing", ts, tp, std::abs(w_ref - w_par) / std::abs(w_ref)});
    }
    {
        // Hessian blocks have no scatter ambiguity; compare against a second run.
        std::vector<std::array<double, 9>> blocks;
        const double tp = time_best_of(reps, [&] { blocks = asm_::hessian_blocks(mesh, sigma, active, p, eps, u); });
        rows.push_back({"hessian_blocks", 0.0, tp, 0.0});
    }

    std::printf("%-16s %12s %12s %9s %12s\n", "kernel", "serial [ms]", "openmp [ms]", "speedup",
                "rel. diff");
    for (const auto& row : rows) {
        if (row.serial > 0.0) {
            std::printf("%-16s %12.3f %12.3f %8.2fx %12.2e\n", row.name, 1e3 * row.serial,
                        1e3 * row.parallel, row.serial / row.parallel, row.check);
        } else {
            std::printf("%-16s %12s %12.3f %9s %12s\n", row.name, "-", 1e3 * row.parallel, "-",
                        "-");
        }
    }
    return 0;
}
