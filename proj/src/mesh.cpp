#include "pcond/mesh.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>

namespace pcond {

namespace {

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
    return 0.5 * cross(b - a, c - a);
}

}  // namespace

Mesh2D::Mesh2D(std::vector<Vec2> vertices,
               std::vector<std::array<int, 3>> triangles,
               std::vector<int> boundary_vertices)
    : vertices_(std::move(vertices)),
      triangles_(std::move(triangles)),
      boundary_vertices_(std::move(boundary_vertices)) {
    const int nv = static_cast<int>(vertices_.size());
    if (nv < 3 || triangles_.empty()) {
        throw std::invalid_argument("Mesh2D: need at least 3 vertices and 1 triangle");
    }

    areas_.resize(triangles_.size());
    hat_gradients_.resize(3 * triangles_.size());
    vertex_triangles_.resize(nv);
    total_area_ = 0.0;
    max_edge_ = 0.0;

    for (std::size_t t = 0; t < triangles_.size(); ++t) {
        const auto& tri = triangles_[t];
        for (int j = 0; j < 3; ++j) {
            if (tri[j] < 0 || tri[j] >= nv) {
                throw std::invalid_argument("Mesh2D: triangle vertex index out of range");
            }
        }
        const Vec2 a = vertices_[tri[0]];
        const Vec2 b = vertices_[tri[1]];
        const Vec2 c = vertices_[tri[2]];
        const double area = signed_area(a, b, c);
        if (!(area > 0.0)) {
            throw std::invalid_argument("Mesh2D: triangle " + std::to_string(t) +
                                        " has non-positive signed area");
        }
        areas_[t] = area;
        total_area_ += area;

        // grad of hat at local vertex j: perpendicular of opposite edge / (2 area)
        const Vec2 edges[3] = {c - b, a - c, b - a};
        for (int j = 0; j < 3; ++j) {
            hat_gradients_[3 * t + j] = (1.0 / (2.0 * area)) * perp(edges[j]);
            max_edge_ = std::max(max_edge_, norm(edges[j]));
            vertex_triangles_[tri[j]].push_back(static_cast<int>(t));
        }
    }

    // Boundary edges are those adjacent to exactly one triangle.
    std::map<std::pair<int, int>, int> edge_count;
    for (const auto& tri : triangles_) {
        for (int j = 0; j < 3; ++j) {
            int u = tri[j], v = tri[(j + 1) % 3];
            edge_count[{std::min(u, v), std::max(u, v)}] += 1;
        }
    }

    const std::size_t nb = boundary_vertices_.size();
    if (nb < 3) {
        throw std::invalid_argument("Mesh2D: boundary needs at least 3 vertices");
    }
    boundary_flag_.assign(nv, 0);
    boundary_index_.assign(nv, -1);
    double loop_area2 = 0.0;
    std::size_t boundary_edges = 0;
    for (const auto& [edge, count] : edge_count) {
        if (count == 1) ++boundary_edges;
        if (count > 2) throw std::invalid_argument("Mesh2D: non-manifold edge");
    }
    for (std::size_t k = 0; k < nb; ++k) {
        const int u = boundary_vertices_[k];
        const int v = boundary_vertices_[(k + 1) % nb];
        if (u < 0 || u >= nv) throw std::invalid_argument("Mesh2D: boundary index out of range");
        if (boundary_flag_[u]) {
            throw std::invalid_argument("Mesh2D: boundary polygon revisits a vertex");
        }
        boundary_flag_[u] = 1;
        boundary_index_[u] = static_cast<int>(k);
        auto it = edge_count.find({std::min(u, v), std::max(u, v)});
        if (it == edge_count.end() || it->second != 1) {
            throw std::invalid_argument("Mesh2D: boundary polygon edge is not a mesh boundary edge");
        }
        loop_area2 += cross(vertices_[u], vertices_[v]);
    }
    if (boundary_edges != nb) {
        throw std::invalid_argument("Mesh2D: boundary polygon does not cover all boundary edges");
    }
    if (!(loop_area2 > 0.0)) {
        throw std::invalid_argument("Mesh2D: boundary polygon must be counterclockwise");
    }

    boundary_normals_.resize(nb);
    for (std::size_t k = 0; k < nb; ++k) {
        const Vec2 u = vertices_[boundary_vertices_[k]];
        const Vec2 v = vertices_[boundary_vertices_[(k + 1) % nb]];
        // outward normal of a counterclockwise loop: clockwise quarter turn
        boundary_normals_[k] = normalized(Vec2{(v - u).y, -(v - u).x});
    }
}

Vec2 Mesh2D::centroid(int t) const {
    const auto& tri = triangles_[t];
    return (1.0 / 3.0) * (vertices_[tri[0]] + vertices_[tri[1]] + vertices_[tri[2]]);
}

Mesh2D build_rect_mesh(int nx, int ny, double width, double height) {
    if (nx < 2 || ny < 2) {
        throw std::invalid_argument("build_rect_mesh: nx and ny must be at least 2");
    }
    if (!(width > 0.0) || !(height > 0.0)) {
        throw std::invalid_argument("build_rect_mesh: width and height must be positive");
    }

    const double hx = width / nx;
    const double hy = height / ny;
    std::vector<Vec2> vertices;
    vertices.reserve(std::size_t(nx + 1) * (ny + 1));
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i <= nx; ++i) {
            vertices.push_back({i * hx, j * hy});
        }
    }
    auto vid = [nx](int i, int j) { return j * (nx + 1) + i; };

    std::vector<std::array<int, 3>> triangles;
    triangles.reserve(2 * std::size_t(nx) * ny);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int v00 = vid(i, j), v10 = vid(i + 1, j);
            const int v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
            if ((i + j) % 2 == 0) {
                triangles.push_back({v00, v10, v11});
                triangles.push_back({v00, v11, v01});
            } else {
                triangles.push_back({v00, v10, v01});
                triangles.push_back({v10, v11, v01});
            }
        }
    }

    std::vector<int> boundary;
    boundary.reserve(2 * std::size_t(nx + ny));
    for (int i = 0; i < nx; ++i) boundary.push_back(vid(i, 0));
    for (int j = 0; j < ny; ++j) boundary.push_back(vid(nx, j));
    for (int i = nx; i > 0; --i) boundary.push_back(vid(i, ny));
    for (int j = ny; j > 0; --j) boundary.push_back(vid(0, j));

    return Mesh2D(std::move(vertices), std::move(triangles), std::move(boundary));
}

Mesh2D translated(const Mesh2D& mesh, Vec2 shift) {
    std::vector<Vec2> vertices = mesh.vertices();
    for (auto& v : vertices) v = v + shift;
    return Mesh2D(std::move(vertices), mesh.triangles(), mesh.boundary_vertices());
}

}  // namespace pcond
