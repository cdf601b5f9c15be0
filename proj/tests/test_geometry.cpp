#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "mce/error.hpp"
#include "mce/mesh.hpp"
#include "mce/subdivision.hpp"

using namespace mce;

namespace {

MacroMesh reference_triangle() { return MacroMesh({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}}); }

/// Unit square with randomly perturbed interior vertices.
MacroMesh perturbed_square(int n, double amount, unsigned seed) {
    MacroMesh base = generate_unit_square_mesh(n);
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> d(-amount / n, amount / n);
    std::vector<Vec2> verts = base.vertices();
    for (auto& v : verts) {
        if (v.x > 0 && v.x < 1 && v.y > 0 && v.y < 1) v += Vec2{d(rng), d(rng)};
    }
    return MacroMesh(verts, base.triangles());
}

}  // namespace

TEST(UnitSquareMesh, CountsForOneCell) {
    const MacroMesh m = generate_unit_square_mesh(1);
    EXPECT_EQ(m.num_vertices(), 4);
    EXPECT_EQ(m.num_triangles(), 2);
    EXPECT_EQ(m.num_edges(), 5);
    EXPECT_EQ(m.num_boundary_edges(), 4);
}

TEST(UnitSquareMesh, CountsForTwoCells) {
    const MacroMesh m = generate_unit_square_mesh(2);
    EXPECT_EQ(m.num_vertices(), 9);
    EXPECT_EQ(m.num_triangles(), 8);
    EXPECT_EQ(m.num_edges(), 16);
}

TEST(UnitSquareMesh, EqualAreasForN4) {
    const MacroMesh m = generate_unit_square_mesh(4);
    ASSERT_EQ(m.num_triangles(), 32);
    for (int t = 0; t < 32; ++t) EXPECT_NEAR(m.triangle_area(t), 1.0 / 32.0, 1e-15);
}

TEST(UnitSquareMesh, CountingIdentitiesUpTo16) {
    for (int n = 1; n <= 16; ++n) {
        const MacroMesh m = generate_unit_square_mesh(n);
        EXPECT_EQ(m.num_triangles(), 2 * n * n);
        EXPECT_EQ(m.num_vertices(), (n + 1) * (n + 1));
        EXPECT_EQ(m.num_edges(), 3 * n * n + 2 * n);
        EXPECT_EQ(m.num_boundary_edges(), 4 * n);
        EXPECT_TRUE(validate_mesh(m).empty());
    }
}

TEST(UnitSquareMesh, AllOuterEdgesTagged) {
    const MacroMesh m = generate_unit_square_mesh(3);
    for (const Edge& e : m.edges()) {
        if (e.on_boundary()) {
            EXPECT_FALSE(e.tag.empty());
        } else {
            EXPECT_TRUE(e.tag.empty());
        }
    }
}

TEST(UnitSquareMesh, RejectsZero) { EXPECT_THROW(generate_unit_square_mesh(0), ConfigError); }

TEST(CookMesh, OneCellIsTheQuadrilateral) {
    const MacroMesh m = generate_cook_mesh(1);
    ASSERT_EQ(m.num_vertices(), 4);
    EXPECT_EQ(m.vertex(0), (Vec2{0, 0}));
    EXPECT_EQ(m.vertex(1), (Vec2{48, 44}));
    EXPECT_EQ(m.vertex(3), (Vec2{48, 60}));
    EXPECT_EQ(m.vertex(2), (Vec2{0, 44}));
}

TEST(CookMesh, LeftMidpointAndPositiveAreas) {
    const MacroMesh m = generate_cook_mesh(2);
    // vertex (i=0, j=1)
    EXPECT_NEAR(m.vertex(3).x, 0.0, 1e-14);
    EXPECT_NEAR(m.vertex(3).y, 22.0, 1e-14);
    for (int t = 0; t < m.num_triangles(); ++t) EXPECT_GT(m.triangle_area(t), 0.0);
    EXPECT_TRUE(validate_mesh(m).empty());
}

TEST(CookMesh, TagsAndRejectsZero) {
    const MacroMesh m = generate_cook_mesh(4);
    int clamped = 0, loaded = 0, free = 0;
    for (const Edge& e : m.edges()) {
        if (e.tag == "clamped") ++clamped;
        if (e.tag == "loaded") ++loaded;
        if (e.tag == "traction-free") ++free;
    }
    EXPECT_EQ(clamped, 4);
    EXPECT_EQ(loaded, 4);
    EXPECT_EQ(free, 8);
    EXPECT_THROW(generate_cook_mesh(0), ConfigError);
}

TEST(Subdivide, ReferenceTriangleBottomEdge) {
    const SubdividedMesh s = subdivide(reference_triangle());
    const int e = s.mesh().find_edge(0, 1);
    ASSERT_GE(e, 0);
    EXPECT_NEAR(s.centroid(0).x, 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(s.centroid(0).y, 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(s.split_point(e).x, 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(s.split_point(e).y, 0.0, 1e-15);
    EXPECT_NEAR(s.direction(e).x, 0.0, 1e-15);
    EXPECT_NEAR(s.direction(e).y, -1.0, 1e-15);
}

TEST(Subdivide, SharedDiagonalSplitsAtCenter) {
    const MacroMesh m({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 1, 2}, {0, 2, 3}});
    const SubdividedMesh s = subdivide(m);
    const int e = m.find_edge(0, 2);
    EXPECT_NEAR(s.split_point(e).x, 0.5, 1e-15);
    EXPECT_NEAR(s.split_point(e).y, 0.5, 1e-15);
}

TEST(Subdivide, InvariantsOnPerturbedMeshes) {
    for (unsigned seed = 1; seed <= 5; ++seed) {
        const MacroMesh m = perturbed_square(6, 0.2, seed);
        ASSERT_TRUE(validate_mesh(m).empty());
        const SubdividedMesh s = subdivide(m);
        for (int t = 0; t < m.num_triangles(); ++t) {
            const auto p = m.triangle_points(t);
            const Vec2 c = s.centroid(t);
            EXPECT_NEAR(c.x, (p[0].x + p[1].x + p[2].x) / 3.0, 1e-15);
            EXPECT_NEAR(c.y, (p[0].y + p[1].y + p[2].y) / 3.0, 1e-15);
            double sum = 0.0;
            for (const auto& child : s.children(t)) {
                const double a = signed_area(child.points[0], child.points[1], child.points[2]);
                EXPECT_GT(a, 0.0);
                sum += a;
            }
            EXPECT_NEAR(sum, m.triangle_area(t), 1e-12 * m.triangle_area(t));
        }
        for (int e = 0; e < m.num_edges(); ++e) {
            const Edge& edge = m.edges()[e];
            const Vec2 xm = s.split_point(e);
            const Vec2 c0 = s.centroid(edge.tris[0]);
            const Vec2 nu = s.direction(e);
            EXPECT_NEAR(norm(nu), 1.0, 1e-14);
            EXPECT_GT(dot(nu, xm - c0), 0.0);
            const Vec2 recomputed = (xm - c0) / norm(xm - c0);
            EXPECT_NEAR(recomputed.x, nu.x, 1e-14);
            EXPECT_NEAR(recomputed.y, nu.y, 1e-14);
            const Vec2 a = m.vertex(edge.verts[0]), b = m.vertex(edge.verts[1]);
            // x_m on the edge line, strictly inside
            const double r = dot(xm - a, b - a) / dot(b - a, b - a);
            EXPECT_GT(r, 0.0);
            EXPECT_LT(r, 1.0);
            EXPECT_NEAR(cross(b - a, xm - a) / norm(b - a), 0.0, 1e-12);
            if (edge.incidence == 2) {
                const Vec2 c1 = s.centroid(edge.tris[1]);
                EXPECT_NEAR(cross(c1 - c0, xm - c0), 0.0, 1e-12 * dot(c1 - c0, c1 - c0));
            } else {
                EXPECT_NEAR(dot(xm - c0, b - a), 0.0, 1e-12);
            }
        }
    }
}

TEST(Subdivide, RejectsNeedleBoundaryTriangle) {
    // the perpendicular foot of the centroid falls left of the edge (0,0)-(1,0)
    const MacroMesh m({{0, 0}, {1, 0}, {-5, 0.1}}, {{0, 1, 2}});
    EXPECT_THROW(subdivide(m), GeometryError);
    EXPECT_NO_THROW(subdivide(m, BoundarySplit::NormalOrMidpoint));
}

TEST(Subdivide, RejectsCentroidSegmentMissingTheEdge) {
    // both centroids lie beyond x = 1, so their segment crosses y = 0 outside the edge
    const MacroMesh m({{0, 0}, {1, 0}, {5, 1}, {5, -1}}, {{0, 1, 2}, {1, 0, 3}});
    EXPECT_THROW(subdivide(m, BoundarySplit::NormalOrMidpoint), GeometryError);
}

TEST(Subdivide, MidpointFallbackOnlyWhereNeeded) {
    const MacroMesh m = generate_cook_mesh(16);
    EXPECT_THROW(subdivide(m), GeometryError);
    const SubdividedMesh s = subdivide(m, BoundarySplit::NormalOrMidpoint);
    int fallbacks = 0, boundary = 0;
    for (int e = 0; e < m.num_edges(); ++e) {
        const Edge& edge = m.edges()[e];
        if (!edge.on_boundary()) continue;
        ++boundary;
        const Vec2 a = m.vertex(edge.verts[0]), b = m.vertex(edge.verts[1]);
        const Vec2 mid = 0.5 * (a + b);
        if (norm(s.split_point(e) - mid) < 1e-12 && std::abs(dot(s.split_point(e) - s.centroid(edge.tris[0]), b - a)) > 1e-9) {
            ++fallbacks;
            EXPECT_NE(edge.tag, "clamped");
        }
    }
    EXPECT_GT(fallbacks, 0);
    EXPECT_LT(fallbacks, boundary / 2);
}

TEST(MeshIo, ReadsTwoTriangleSquare) {
    std::istringstream in(
        "mce-mesh 1\nvertices 4\n0 0\n1 0\n1 1\n0 1\ntriangles 2\n0 1 2\n0 2 3\n");
    const MacroMesh m = read_mesh(in);
    EXPECT_EQ(m.num_edges(), 5);
    for (const Edge& e : m.edges()) {
        if (e.on_boundary()) EXPECT_EQ(e.tag, "wall");
    }
}

TEST(MeshIo, ReadsBoundaryTags) {
    std::istringstream in(
        "mce-mesh 1\nvertices 3\n0 0\n1 0\n0 1\ntriangles 1\n0 1 2\nboundary 1\n0 1 floor\n");
    const MacroMesh m = read_mesh(in);
    EXPECT_EQ(m.edges()[m.find_edge(0, 1)].tag, "floor");
    EXPECT_EQ(m.edges()[m.find_edge(1, 2)].tag, "wall");
}

TEST(MeshIo, IndexOutOfRangeNamesTheLine) {
    std::istringstream in("mce-mesh 1\nvertices 3\n0 0\n1 0\n0 1\ntriangles 1\n0 1 7\n");
    try {
        read_mesh(in);
        FAIL() << "expected a MeshError";
    } catch (const MeshError& e) {
        EXPECT_NE(std::string(e.what()).find("line 7"), std::string::npos) << e.what();
    }
}

TEST(MeshIo, MalformedHeader) {
    std::istringstream in("mesh 2\nvertices 0\n");
    try {
        read_mesh(in);
        FAIL() << "expected a MeshError";
    } catch (const MeshError& e) {
        EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos) << e.what();
    }
}

TEST(MeshIo, TruncatedInputIsAnError) {
    std::istringstream in("mce-mesh 1\nvertices 3\n0 0\n1 0\n");
    EXPECT_THROW(read_mesh(in), MeshError);
}

TEST(MeshIo, ClockwiseTriangleIsReorientedWithWarning) {
    std::istringstream in("mce-mesh 1\nvertices 3\n0 0\n1 0\n0 1\ntriangles 1\n0 2 1\n");
    std::vector<std::string> warnings;
    const MacroMesh m = read_mesh(in, &warnings);
    EXPECT_EQ(warnings.size(), 1u);
    EXPECT_GT(m.triangle_area(0), 0.0);
    EXPECT_GT(signed_area(m.triangle_points(0)[0], m.triangle_points(0)[1], m.triangle_points(0)[2]), 0.0);
}

TEST(MeshIo, RoundTripIsExact) {
    const MacroMesh m = generate_unit_square_mesh(3);
    std::stringstream buf;
    write_mesh(buf, m);
    const MacroMesh back = read_mesh(buf);
    EXPECT_TRUE(back == m);

    // awkward coordinates survive bit for bit
    const MacroMesh p = perturbed_square(4, 0.3, 11);
    std::stringstream buf2;
    write_mesh(buf2, p);
    const MacroMesh q = read_mesh(buf2);
    ASSERT_EQ(q.num_vertices(), p.num_vertices());
    for (int v = 0; v < p.num_vertices(); ++v) {
        EXPECT_EQ(q.vertex(v).x, p.vertex(v).x);
        EXPECT_EQ(q.vertex(v).y, p.vertex(v).y);
    }
    EXPECT_TRUE(q == p);
}

TEST(ValidateMesh, ValidMeshHasEmptyReport) { EXPECT_TRUE(validate_mesh(generate_unit_square_mesh(2)).empty()); }

TEST(ValidateMesh, FlippedTriangle) {
    const MacroMesh m({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 1, 2}, {0, 3, 2}});
    const auto report = validate_mesh(m);
    ASSERT_FALSE(report.empty());
    bool found = false;
    for (const auto& r : report) found |= r.find("negative area at triangle 1") != std::string::npos;
    EXPECT_TRUE(found);
}

TEST(ValidateMesh, DuplicatedVertex) {
    const MacroMesh m({{0, 0}, {1, 0}, {0, 1}, {1, 0}}, {{0, 1, 2}, {1, 3, 2}});
    bool found = false;
    for (const auto& r : validate_mesh(m)) found |= r.find("degenerate edge") != std::string::npos;
    EXPECT_TRUE(found);
}

TEST(ValidateMesh, HangingVertex) {
    // vertex 4 sits on the edge (0,1) of the first triangle without splitting it
    const MacroMesh m({{0, 0}, {2, 0}, {1, 1}, {1, -1}, {1, 0}}, {{0, 1, 2}, {0, 3, 4}, {4, 3, 1}});
    bool found = false;
    for (const auto& r : validate_mesh(m)) found |= r.find("hanging vertex") != std::string::npos;
    EXPECT_TRUE(found);
}
