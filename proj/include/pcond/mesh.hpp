#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "pcond/geometry.hpp"

namespace pcond {

/// Conforming triangle mesh of a simply connected polygonal domain.
///
/// Derived geometry (areas, P1 hat-function gradients, vertex->triangle
/// adjacency, boundary flags and outward normals) is computed once at
/// construction; instances are immutable afterwards and safe to share
/// across threads.
class Mesh2D {
public:
    /// Throws std::invalid_argument if any triangle has non-positive signed
    /// area or if boundary_vertices do not trace the closed simple polygon
    /// bounding the triangulation counterclockwise.
    Mesh2D(std::vector<Vec2> vertices,
           std::vector<std::array<int, 3>> triangles,
           std::vector<int> boundary_vertices);

    const std::vector<Vec2>& vertices() const { return vertices_; }
    const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
    const std::vector<int>& boundary_vertices() const { return boundary_vertices_; }

    /// Outward unit normal of the boundary edge from boundary_vertices[k]
    /// to boundary_vertices[(k+1) % n].
    const std::vector<Vec2>& boundary_normals() const { return boundary_normals_; }

    std::size_t vertex_count() const { return vertices_.size(); }
    std::size_t triangle_count() const { return triangles_.size(); }
    std::size_t boundary_count() const { return boundary_vertices_.size(); }

    double area(int t) const { return areas_[t]; }
    double total_area() const { return total_area_; }
    double max_edge_length() const { return max_edge_; }

    /// Gradient of the P1 hat function attached to local vertex j of triangle t.
    Vec2 hat_gradient(int t, int j) const { return hat_gradients_[3 * std::size_t(t) + j]; }

    Vec2 centroid(int t) const;

    const std::vector<int>& triangles_at_vertex(int v) const { return vertex_triangles_[v]; }
    bool is_boundary_vertex(int v) const { return boundary_flag_[v] != 0; }

    /// Position of vertex v in boundary_vertices(), or -1 for interior vertices.
    int boundary_index(int v) const { return boundary_index_[v]; }

private:
    std::vector<Vec2> vertices_;
    std::vector<std::array<int, 3>> triangles_;
    std::vector<int> boundary_vertices_;
    std::vector<Vec2> boundary_normals_;

    std::vector<double> areas_;
    std::vector<Vec2> hat_gradients_;
    std::vector<std::vector<int>> vertex_triangles_;
    std::vector<char> boundary_flag_;
    std::vector<int> boundary_index_;
    double total_area_ = 0.0;
    double max_edge_ = 0.0;
};

/// Structured triangulation of the axis-aligned rectangle [0,width]x[0,height]
/// with nx-by-ny cells, each split along a diagonal whose direction alternates
/// in a checkerboard, so the pattern is symmetric under refinement. Boundary
/// runs counterclockwise starting at the origin. Requires nx, ny >= 2.
Mesh2D build_rect_mesh(int nx, int ny, double width, double height);

/// Same mesh shifted by a constant offset.
Mesh2D translated(const Mesh2D& mesh, Vec2 shift);

}  // namespace pcond
