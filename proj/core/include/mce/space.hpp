#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mce/subdivision.hpp"

namespace mce {

// ---------------------------------------------------------------------------
// Edge bubbles

/// Hierarchical bubble of one edge: piecewise affine on the type III subtriangles of
/// each incident macro triangle, equal to the split direction at the edge node, zero at
/// all macro vertices and other edge nodes. The centroid value is chosen so that the
/// divergence is one constant on all six subtriangles.
struct EdgeBubble {
    struct Side {
        int triangle = -1;
        int local_edge = -1;
        /// Nodal values in the local node order of SubdividedMesh::local_nodes().
        std::array<Vec2, kLocalNodes> values{};
        /// Constant divergence on the triangle, |E| (nu . n_E) / (2 |T|).
        double divergence = 0.0;
    };

    int edge = -1;
    Vec2 direction;
    std::array<Side, 2> sides{};
    int num_sides = 0;
};

EdgeBubble compute_bubble(const SubdividedMesh& sub, int edge);

/// Centroid value of the bubble of local edge `local_edge` on triangle t, from the
/// equal-divergence conditions on the two fan triangles that do not touch the edge.
Vec2 bubble_centroid_value(const SubdividedMesh& sub, int t, int local_edge);

/// CSV dump of all bubble tables: `edge,triangle,node,role,value_x,value_y`.
void write_bubble_csv(std::ostream& out, const SubdividedMesh& sub);

namespace debug {
/// Closed-form centroid value u_m = D (x_m - x_o) with the labelling x_l, x_r = split
/// points of the two other edges (counterclockwise order) and x_i = x_o. Only used to
/// compare against bubble_centroid_value(); the labels are a guess.
Vec2 closed_form_centroid_value(const SubdividedMesh& sub, int t, int local_edge);
}  // namespace debug

// ---------------------------------------------------------------------------
// Spaces

enum class BcKind {
    Natural,     ///< no strong constraint
    NormalOnly,  ///< strong u.n = g.n; boundary bubbles fixed by flux matching
    Dirichlet,   ///< strong u = g
};

enum class ConstraintMode { FullDirichlet, NormalOnly, Unconstrained };

/// Strong boundary conditions per boundary tag plus the boundary datum g.
struct BoundarySpec {
    BcKind default_kind = BcKind::Dirichlet;
    std::map<std::string, BcKind> per_tag;
    VectorFn data;  ///< empty means homogeneous

    BcKind kind(const std::string& tag) const;
    Vec2 value(const Vec2& x) const { return data ? data(x) : Vec2{}; }

    static BoundarySpec uniform(ConstraintMode mode, VectorFn data = {});
};

struct SpaceOptions {
    /// Without bubbles the velocity space is plain vector P1 on the macro triangles.
    bool with_bubbles = true;
};

/// Per macro triangle basis data. Local dofs 0..5 are vertex dofs (2k + c), 6..8 the
/// bubbles of local edges 0..2.
struct LocalElement {
    std::array<Vec2, kLocalNodes> nodes{};
    int num_dofs = 0;
    std::array<int, 9> dofs{};
    std::array<std::array<Vec2, kLocalNodes>, 9> values{};
    /// gradients[s][i]: gradient of local basis function i on subtriangle s.
    std::array<std::array<Mat2, 9>, kSubTriangles> gradients{};
    std::array<double, kSubTriangles> sub_areas{};
    /// Macro-constant divergence of each local basis function.
    std::array<double, 9> divergence{};
    double area = 0.0;
};

/// The enriched velocity space V_h together with the piecewise constant pressure
/// space. Velocity coefficient vectors always use the full numbering
/// [2 dofs per vertex | 1 dof per edge]; vertex dofs are coordinates in the vertex
/// frame (identity except on normal-only boundary vertices).
class FESpace {
public:
    const SubdividedMesh& subdivision() const { return *sub_; }
    const MacroMesh& mesh() const { return sub_->mesh(); }
    const BoundarySpec& boundary() const { return boundary_; }
    bool has_bubbles() const { return options_.with_bubbles; }

    int num_velocity_dofs() const { return static_cast<int>(fixed_.size()); }
    int num_pressure_dofs() const { return mesh().num_triangles(); }
    int num_free_velocity_dofs() const { return num_free_; }

    int vertex_dof(int v, int component) const { return 2 * v + component; }
    int bubble_dof(int e) const { return has_bubbles() ? 2 * mesh().num_vertices() + e : -1; }

    bool is_fixed(int dof) const { return fixed_[dof] != 0; }
    double fixed_value(int dof) const { return fixed_values_[dof]; }
    /// Position among the free dofs, or -1 for fixed dofs.
    int free_index(int dof) const { return free_index_[dof]; }
    /// Columns are the directions of the two vertex dofs.
    const Mat2& vertex_frame(int v) const { return frames_[v]; }
    BcKind edge_kind(int e) const;

    const LocalElement& element(int t) const { return elements_[t]; }

    /// Full velocity vector with fixed dofs at their values and free dofs from `free`.
    std::vector<double> expand(std::span<const double> free) const;

    friend FESpace build_space(std::shared_ptr<const SubdividedMesh> sub, BoundarySpec boundary,
                               SpaceOptions options);

private:
    std::shared_ptr<const SubdividedMesh> sub_;
    BoundarySpec boundary_;
    SpaceOptions options_;
    std::vector<char> fixed_;
    std::vector<double> fixed_values_;
    std::vector<int> free_index_;
    int num_free_ = 0;
    std::vector<Mat2> frames_;
    std::vector<LocalElement> elements_;
};

/// Throws ConfigError when the boundary spec names tags absent from the mesh.
FESpace build_space(std::shared_ptr<const SubdividedMesh> sub, BoundarySpec boundary,
                    SpaceOptions options = {});
FESpace build_space(const SubdividedMesh& sub, BoundarySpec boundary, SpaceOptions options = {});

// ---------------------------------------------------------------------------
// Evaluation and projections

/// Values of a velocity field at the 7 local nodes of macro triangle t.
std::array<Vec2, kLocalNodes> local_node_values(const FESpace& space, std::span<const double> coeffs,
                                                int t);

/// Index of the subtriangle of t containing `point`; throws GeometryError when the
/// point lies outside t beyond a 1e-12 barycentric tolerance.
int locate_subtriangle(const FESpace& space, int t, const Vec2& point);

Vec2 eval_velocity(const FESpace& space, std::span<const double> coeffs, int t, const Vec2& point);
Mat2 eval_velocity_gradient(const FESpace& space, std::span<const double> coeffs, int t,
                            const Vec2& point);
/// Gradient on subtriangle s of macro triangle t.
Mat2 subtriangle_gradient(const FESpace& space, std::span<const double> coeffs, int t, int s);

struct MacroDivergence {
    double value = 0.0;          ///< area-weighted mean over the six subtriangles
    double max_deviation = 0.0;  ///< largest |div_s - value| over subtriangles
};

MacroDivergence macro_divergence(const FESpace& space, std::span<const double> coeffs, int t);

/// Elementwise means of f (degree-6 quadrature on each macro triangle).
std::vector<double> project_p0(const ScalarFn& f, const MacroMesh& mesh);

/// Vertex dofs take nodal values of u; each bubble amplitude matches the normal flux of
/// u through its edge exactly (5-point Gauss on the edge). Returns the full velocity
/// coefficient vector, ignoring strong constraints.
std::vector<double> fortin_interpolate(const VectorFn& u, const FESpace& space);

}  // namespace mce
