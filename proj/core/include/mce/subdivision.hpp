#pragma once

#include <array>
#include <vector>

#include "mce/mesh.hpp"

namespace mce {

enum class NodeRole { MacroVertex, EdgeNode, Centroid };

/// Local node numbering inside one macro triangle:
/// 0..2 macro vertices, 3..5 edge nodes (node 3 + k sits on local edge k), 6 centroid.
inline constexpr int kLocalNodes = 7;
inline constexpr int kCentroidNode = 6;
inline constexpr int kSubTriangles = 6;

/// Local node triple of subtriangle s. Subtriangles 2k and 2k+1 are the two halves of
/// the centroid fan triangle on local edge k; all are counterclockwise.
constexpr std::array<int, 3> subtriangle_nodes(int s) {
    const int k = s / 2;
    if (s % 2 == 0) return {kCentroidNode, k, 3 + k};
    return {kCentroidNode, 3 + k, (k + 1) % 3};
}

constexpr NodeRole node_role(int local_node) {
    if (local_node < 3) return NodeRole::MacroVertex;
    if (local_node < 6) return NodeRole::EdgeNode;
    return NodeRole::Centroid;
}

/// How boundary edges are split. Normal uses the foot of the perpendicular from the
/// centroid. NormalOrMidpoint falls back to the edge midpoint where that foot leaves the
/// open edge, which happens at obtuse boundary corners.
enum class BoundarySplit { Normal, NormalOrMidpoint };

struct SubTriangle {
    std::array<Vec2, 3> points;
    std::array<NodeRole, 3> roles;
};

/// Type III refinement of a macro mesh: centroids, edge split points and the
/// split-line directions that carry the edge bubbles.
class SubdividedMesh {
public:
    const MacroMesh& mesh() const { return mesh_; }

    const Vec2& centroid(int t) const { return centroids_[t]; }
    const Vec2& split_point(int e) const { return split_points_[e]; }
    /// Unit vector along the split line of edge e, pointing from the centroid of the
    /// lower-index incident triangle toward the split point.
    const Vec2& direction(int e) const { return directions_[e]; }

    /// Coordinates of the 7 local nodes of macro triangle t.
    std::array<Vec2, kLocalNodes> local_nodes(int t) const;
    std::array<SubTriangle, kSubTriangles> children(int t) const;

    friend SubdividedMesh subdivide(const MacroMesh& mesh, BoundarySplit split);

private:
    MacroMesh mesh_;
    std::vector<Vec2> centroids_;
    std::vector<Vec2> split_points_;
    std::vector<Vec2> directions_;
};

/// Throws GeometryError when a split point falls within 1e-10 |E| of an edge endpoint
/// or outside the edge.
SubdividedMesh subdivide(const MacroMesh& mesh, BoundarySplit split = BoundarySplit::Normal);

}  // namespace mce
