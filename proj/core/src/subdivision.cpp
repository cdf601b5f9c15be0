#include "mce/subdivision.hpp"

#include <string>

#include "mce/error.hpp"

namespace mce {

namespace {

constexpr double kEndpointTolerance = 1e-10;

[[noreturn]] void needle(int e, const std::string& why) {
    throw GeometryError("edge " + std::to_string(e) + ": " + why);
}

}  // namespace

std::array<Vec2, kLocalNodes> SubdividedMesh::local_nodes(int t) const {
    const auto p = mesh_.triangle_points(t);
    std::array<Vec2, kLocalNodes> nodes;
    for (int k = 0; k < 3; ++k) {
        nodes[k] = p[k];
        nodes[3 + k] = split_points_[mesh_.triangle_edge(t, k)];
    }
    nodes[kCentroidNode] = centroids_[t];
    return nodes;
}

std::array<SubTriangle, kSubTriangles> SubdividedMesh::children(int t) const {
    const auto nodes = local_nodes(t);
    std::array<SubTriangle, kSubTriangles> out;
    for (int s = 0; s < kSubTriangles; ++s) {
        const auto ids = subtriangle_nodes(s);
        for (int i = 0; i < 3; ++i) {
            out[s].points[i] = nodes[ids[i]];
            out[s].roles[i] = node_role(ids[i]);
        }
    }
    return out;
}

SubdividedMesh subdivide(const MacroMesh& mesh, BoundarySplit split) {
    SubdividedMesh sub;
    sub.mesh_ = mesh;
    sub.centroids_.resize(mesh.num_triangles());
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto p = mesh.triangle_points(t);
        sub.centroids_[t] = centroid(p[0], p[1], p[2]);
    }

    sub.split_points_.resize(mesh.num_edges());
    sub.directions_.resize(mesh.num_edges());
    for (int e = 0; e < mesh.num_edges(); ++e) {
        const Edge& edge = mesh.edges()[e];
        const Vec2 a = mesh.vertex(edge.verts[0]);
        const Vec2 b = mesh.vertex(edge.verts[1]);
        const Vec2 ab = b - a;
        const Vec2 c0 = sub.centroids_[edge.tris[0]];

        // r parametrizes the edge: x_m = a + r (b - a).
        double r = 0.0;
        if (edge.incidence == 2) {
            const Vec2 c1 = sub.centroids_[edge.tris[1]];
            const Vec2 cc = c1 - c0;
            const double det = cross(ab, cc);
            if (det == 0.0) needle(e, "centroid segment parallel to the shared edge");
            // a + r ab = c0 + s cc
            r = cross(c0 - a, cc) / det;
            const double s = cross(c0 - a, ab) / det;
            if (s <= 0.0 || s >= 1.0) needle(e, "centroid segment does not cross the shared edge");
        } else if (edge.incidence == 1) {
            r = dot(c0 - a, ab) / dot(ab, ab);
            if (split == BoundarySplit::NormalOrMidpoint && !(r > kEndpointTolerance && r < 1.0 - kEndpointTolerance)) {
                r = 0.5;
            }
        } else {
            needle(e, "edge has " + std::to_string(edge.incidence) + " incident triangles");
        }
        if (!(r > kEndpointTolerance && r < 1.0 - kEndpointTolerance)) {
            needle(e, "split point falls outside the open edge (needle element)");
        }
        const Vec2 xm = a + r * ab;
        sub.split_points_[e] = xm;
        const Vec2 d = xm - c0;
        sub.directions_[e] = d / norm(d);
    }
    return sub;
}

}  // namespace mce
