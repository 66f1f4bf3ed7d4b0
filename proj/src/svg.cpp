#include "pcond/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pcond::svg {

namespace {

constexpr int kWidthPx = 720;

struct Frame {
    Box2 world;
    double scale;
    double height_px;

    double px(double x) const { return (x - world.lo.x) * scale + 10.0; }
    double py(double y) const { return height_px - ((y - world.lo.y) * scale) + 10.0; }
};

Frame make_frame(const Mesh2D& mesh) {
    Box2 box{mesh.vertices().front(), mesh.vertices().front()};
    for (const auto& v : mesh.vertices()) {
        box.lo.x = std::min(box.lo.x, v.x);
        box.lo.y = std::min(box.lo.y, v.y);
        box.hi.x = std::max(box.hi.x, v.x);
        box.hi.y = std::max(box.hi.y, v.y);
    }
    const double span_x = std::max(box.hi.x - box.lo.x, 1e-12);
    const double span_y = std::max(box.hi.y - box.lo.y, 1e-12);
    const double scale = (kWidthPx - 20.0) / span_x;
    return {box, scale, span_y * scale};
}

std::string gray_ramp(double s) {
    const int level = static_cast<int>(std::clamp(230.0 - 170.0 * s, 0.0, 255.0));
    char buf[16];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", level, level, level);
    return buf;
}

std::string heat_ramp(double s) {
    // cold blue -> white -> warm red
    const double r = std::clamp(2.0 * s, 0.0, 1.0);
    const double b = std::clamp(2.0 * (1.0 - s), 0.0, 1.0);
    const double g = std::min(r, b);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", static_cast<int>(255 * r),
                  static_cast<int>(255 * g), static_cast<int>(255 * b));
    return buf;
}

void open_svg(std::ostringstream& out, const Frame& frame) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidthPx << "\" height=\""
        << static_cast<int>(frame.height_px + 20.0) << "\">\n";
}

void triangle_path(std::ostringstream& out, const Frame& frame, const Mesh2D& mesh, int t,
                   const std::string& fill) {
    const auto& tri = mesh.triangles()[t];
    out << "<path d=\"M";
    for (int j = 0; j < 3; ++j) {
        const Vec2 v = mesh.vertices()[tri[j]];
        out << (j == 0 ? "" : " L") << frame.px(v.x) << ' ' << frame.py(v.y);
    }
    out << " Z\" fill=\"" << fill << "\" stroke=\"none\"/>\n";
}

std::string render_body(const Mesh2D& mesh, const ConductivityField& sigma,
                        const std::vector<double>* vertex_values, const Frame& frame) {
    std::ostringstream out;
    double lo = 0.0, hi = 1.0;
    if (vertex_values != nullptr && !vertex_values->empty()) {
        lo = *std::min_element(vertex_values->begin(), vertex_values->end());
        hi = *std::max_element(vertex_values->begin(), vertex_values->end());
    } else {
        lo = 1e300;
        hi = -1e300;
        for (std::size_t t = 0; t < sigma.values.size(); ++t) {
            if (!sigma.finite_at(static_cast<int>(t))) continue;
            lo = std::min(lo, sigma.values[t]);
            hi = std::max(hi, sigma.values[t]);
        }
        if (lo > hi) lo = hi = 1.0;
    }
    const double span = std::max(hi - lo, 1e-300);

    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        const int ti = static_cast<int>(t);
        std::string fill;
        if (sigma.d0_mask[t]) {
            fill = "#4060d0";
        } else if (sigma.dinf_mask[t]) {
            fill = "#902020";
        } else if (vertex_values != nullptr) {
            const auto& tri = mesh.triangles()[t];
            const double mean = ((*vertex_values)[tri[0]] + (*vertex_values)[tri[1]] +
                                 (*vertex_values)[tri[2]]) /
                                3.0;
            fill = heat_ramp((mean - lo) / span);
        } else {
            fill = gray_ramp((sigma.values[t] - lo) / span);
        }
        triangle_path(out, frame, mesh, ti, fill);
    }

    // domain outline
    out << "<path d=\"M";
    const auto& loop = mesh.boundary_vertices();
    for (std::size_t k = 0; k < loop.size(); ++k) {
        const Vec2 v = mesh.vertices()[loop[k]];
        out << (k == 0 ? "" : " L") << frame.px(v.x) << ' ' << frame.py(v.y);
    }
    out << " Z\" fill=\"none\" stroke=\"#000000\" stroke-width=\"1.5\"/>\n";
    return out.str();
}

}  // namespace

std::string render_field(const Mesh2D& mesh, const ConductivityField& sigma,
                         const std::vector<double>* vertex_values) {
    const Frame frame = make_frame(mesh);
    std::ostringstream out;
    open_svg(out, frame);
    out << render_body(mesh, sigma, vertex_values, frame);
    out << "</svg>\n";
    return out.str();
}

std::string render_hull_overlay(const Mesh2D& mesh, const ConductivityField& sigma,
                                const enclosure::HullPolygon& hull) {
    const Frame frame = make_frame(mesh);
    std::ostringstream out;
    open_svg(out, frame);
    out << render_body(mesh, sigma, nullptr, frame);

    if (!hull.vertices.empty()) {
        out << "<path d=\"M";
        for (std::size_t k = 0; k < hull.vertices.size(); ++k) {
            out << (k == 0 ? "" : " L") << frame.px(hull.vertices[k].x) << ' '
                << frame.py(hull.vertices[k].y);
        }
        out << " Z\" fill=\"#20a04020\" stroke=\"#108030\" stroke-width=\"2\"/>\n";
    }
    for (std::size_t k = 0; k < hull.directions.size(); ++k) {
        const Vec2 tip = hull.offsets[k] * hull.directions[k];
        out << "<circle cx=\"" << frame.px(tip.x) << "\" cy=\"" << frame.py(tip.y)
            << "\" r=\"2.5\" fill=\"#108030\"/>\n";
    }
    out << "</svg>\n";
    return out.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("svg: cannot open " + path);
    out << content;
}

}  // namespace pcond::svg
