#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mce/geometry.hpp"

namespace mce {

/// Edge of a macro triangulation. `tris[0]` is always the lower incident
/// triangle index; `tris[1]` is -1 on boundary edges.
struct Edge {
    std::array<int, 2> verts{};
    std::array<int, 2> tris{-1, -1};
    int incidence = 0;  ///< number of incident triangles (> 2 only for broken input)
    std::string tag;    ///< empty for interior edges

    bool on_boundary() const { return incidence == 1; }
};

/// Type I triangulation: the user-facing mesh that carries one pressure dof per triangle.
///
/// Connectivity is derived from the triangle list on construction. Construction does
/// not reject invalid geometry; use validate_mesh() for a full report.
class MacroMesh {
public:
    MacroMesh() = default;

    /// Builds edges and adjacency. `boundary_tags` lists (vertex, vertex, tag) for
    /// boundary edges; unlisted boundary edges get `default_tag`.
    MacroMesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles,
              const std::vector<std::pair<std::array<int, 2>, std::string>>& boundary_tags = {},
              const std::string& default_tag = "wall");

    const std::vector<Vec2>& vertices() const { return vertices_; }
    const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
    const std::vector<Edge>& edges() const { return edges_; }

    int num_vertices() const { return static_cast<int>(vertices_.size()); }
    int num_triangles() const { return static_cast<int>(triangles_.size()); }
    int num_edges() const { return static_cast<int>(edges_.size()); }
    int num_boundary_edges() const;

    const Vec2& vertex(int v) const { return vertices_[v]; }
    std::array<Vec2, 3> triangle_points(int t) const;
    /// Local edge k of triangle t joins local vertices k and k+1 (mod 3).
    int triangle_edge(int t, int k) const { return triangle_edges_[t][k]; }
    double triangle_area(int t) const;
    /// Returns -1 when (a, b) is not an edge of the mesh.
    int find_edge(int a, int b) const;
    /// Unit normal of boundary edge e pointing out of the domain.
    Vec2 outward_normal(int e) const;
    double edge_length(int e) const;

    friend bool operator==(const MacroMesh& a, const MacroMesh& b);

private:
    static std::uint64_t edge_key(int a, int b);

    std::vector<Vec2> vertices_;
    std::vector<std::array<int, 3>> triangles_;
    std::vector<Edge> edges_;
    std::vector<std::array<int, 3>> triangle_edges_;
    std::unordered_map<std::uint64_t, int> edge_lookup_;
};

/// Uniform nx-by-ny grid on the axis-aligned box [lo, hi], every cell split along its
/// lower-left to upper-right diagonal. Sides are tagged "left", "right", "bottom", "top".
MacroMesh generate_rectangle_mesh(int nx, int ny, Vec2 lo, Vec2 hi);

/// n-by-n grid on the unit square.
MacroMesh generate_unit_square_mesh(int n);

/// Cook's membrane: the n-by-n parameter grid mapped bilinearly onto the quadrilateral
/// (0,0), (48,44), (48,60), (0,44). Tags: "clamped" (x = 0), "loaded" (x = 48),
/// "traction-free" (top and bottom).
MacroMesh generate_cook_mesh(int n);

/// Reads the `mce-mesh 1` text format. Clockwise triangles are reoriented and a
/// warning is appended to `warnings` when given.
MacroMesh read_mesh(std::istream& in, std::vector<std::string>* warnings = nullptr);
void write_mesh(std::ostream& out, const MacroMesh& mesh);

/// Lists violated mesh invariants; empty when the mesh is valid.
std::vector<std::string> validate_mesh(const MacroMesh& mesh);

}  // namespace mce
