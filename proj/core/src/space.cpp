#include "mce/space.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <set>

#include "mce/error.hpp"
#include "mce/quadrature.hpp"

namespace mce {

namespace {

constexpr double kCornerAngle = 1e-8;
constexpr double kLocateTolerance = 1e-12;
constexpr int kEdgeGaussPoints = 5;

Vec2 column(const Mat2& m, int c) { return {m(0, c), m(1, c)}; }

/// Outward unit normal of local edge k of a counterclockwise triangle.
Vec2 local_outward_normal(const std::array<Vec2, 3>& p, int k) {
    const Vec2 d = p[(k + 1) % 3] - p[k];
    return Vec2{d.y, -d.x} / norm(d);
}

/// Gradients of the barycentric coordinates of a counterclockwise triangle.
std::array<Vec2, 3> barycentric_gradients(const Vec2& a, const Vec2& b, const Vec2& c) {
    const double two_area = 2.0 * signed_area(a, b, c);
    return {Vec2{b.y - c.y, c.x - b.x} / two_area, Vec2{c.y - a.y, a.x - c.x} / two_area,
            Vec2{a.y - b.y, b.x - a.x} / two_area};
}

/// Normal flux through edge (a, b) of the linear interpolant between values ua and ub.
double linear_flux(const Vec2& ua, const Vec2& ub, const Vec2& n, double length) {
    return 0.5 * length * (dot(ua, n) + dot(ub, n));
}

double bubble_amplitude(double flux_residual, const Vec2& nu, const Vec2& n, double length, int e) {
    const double nn = dot(nu, n);
    if (std::abs(nn) < 1e-12) {
        throw GeometryError("edge " + std::to_string(e) + ": split direction tangent to the edge");
    }
    return flux_residual / (0.5 * length * nn);
}

}  // namespace

// ---------------------------------------------------------------------------
// Bubbles

Vec2 bubble_centroid_value(const SubdividedMesh& sub, int t, int local_edge) {
    const MacroMesh& mesh = sub.mesh();
    const auto p = mesh.triangle_points(t);
    const int e = mesh.triangle_edge(t, local_edge);
    const double area = mesh.triangle_area(t);
    const Vec2 nu = sub.direction(e);
    const Vec2 c = sub.centroid(t);
    const double target = mesh.edge_length(e) * dot(nu, local_outward_normal(p, local_edge)) / (2.0 * area);

    // On the fan triangle (c, p_j, p_j+1) the bubble is u_m times the hat of c, whose
    // gradient is the inward normal of edge j divided by the centroid's distance to it.
    std::array<Vec2, 2> rows;
    for (int i = 0; i < 2; ++i) {
        const int j = (local_edge + 1 + i) % 3;
        const Vec2 inward = -local_outward_normal(p, j);
        const double dist = dot(c - p[j], inward);
        rows[i] = inward / dist;
    }
    const double det = cross(rows[0], rows[1]);
    if (std::abs(det) < 1e-300) {
        throw GeometryError("triangle " + std::to_string(t) + ": singular bubble system");
    }
    // rows[i] . u = target for i = 0, 1
    return Vec2{target * (rows[1].y - rows[0].y), target * (rows[0].x - rows[1].x)} / det;
}

EdgeBubble compute_bubble(const SubdividedMesh& sub, int edge) {
    const MacroMesh& mesh = sub.mesh();
    if (edge < 0 || edge >= mesh.num_edges()) throw ConfigError("edge id out of range");
    const Edge& ed = mesh.edges()[edge];
    EdgeBubble b;
    b.edge = edge;
    b.direction = sub.direction(edge);
    b.num_sides = std::min(ed.incidence, 2);
    for (int i = 0; i < b.num_sides; ++i) {
        auto& side = b.sides[i];
        side.triangle = ed.tris[i];
        for (int k = 0; k < 3; ++k) {
            if (mesh.triangle_edge(side.triangle, k) == edge) side.local_edge = k;
        }
        side.values.fill(Vec2{});
        side.values[3 + side.local_edge] = b.direction;
        side.values[kCentroidNode] = bubble_centroid_value(sub, side.triangle, side.local_edge);
        const auto p = mesh.triangle_points(side.triangle);
        side.divergence = mesh.edge_length(edge) *
                          dot(b.direction, local_outward_normal(p, side.local_edge)) /
                          (2.0 * mesh.triangle_area(side.triangle));
    }
    return b;
}

void write_bubble_csv(std::ostream& out, const SubdividedMesh& sub) {
    static constexpr const char* kRoles[] = {"vertex", "edge", "centroid"};
    out << "edge,triangle,node,role,value_x,value_y\n";
    out << std::setprecision(17);
    for (int e = 0; e < sub.mesh().num_edges(); ++e) {
        const EdgeBubble b = compute_bubble(sub, e);
        for (int i = 0; i < b.num_sides; ++i) {
            for (int n = 0; n < kLocalNodes; ++n) {
                out << e << ',' << b.sides[i].triangle << ',' << n << ','
                    << kRoles[static_cast<int>(node_role(n))] << ',' << b.sides[i].values[n].x << ','
                    << b.sides[i].values[n].y << '\n';
            }
        }
    }
}

namespace debug {

Vec2 closed_form_centroid_value(const SubdividedMesh& sub, int t, int local_edge) {
    const auto nodes = sub.local_nodes(t);
    const Vec2 xm = nodes[3 + local_edge];
    const Vec2 xo = nodes[kCentroidNode];
    const Vec2 xl = nodes[3 + (local_edge + 1) % 3];
    const Vec2 xr = nodes[3 + (local_edge + 2) % 3];
    const double area = sub.mesh().triangle_area(t);
    const double num = xr.x * (xm.y - xl.y) + xm.x * (xl.y - xr.y) + xl.x * (xr.y - xm.y);
    const double d = num / (2.0 * area * norm(xo - xm));
    return d * (xm - xo);
}

}  // namespace debug

// ---------------------------------------------------------------------------
// Boundary specification

BcKind BoundarySpec::kind(const std::string& tag) const {
    const auto it = per_tag.find(tag);
    return it == per_tag.end() ? default_kind : it->second;
}

BoundarySpec BoundarySpec::uniform(ConstraintMode mode, VectorFn data) {
    BoundarySpec spec;
    switch (mode) {
        case ConstraintMode::FullDirichlet: spec.default_kind = BcKind::Dirichlet; break;
        case ConstraintMode::NormalOnly: spec.default_kind = BcKind::NormalOnly; break;
        case ConstraintMode::Unconstrained: spec.default_kind = BcKind::Natural; break;
    }
    spec.data = std::move(data);
    return spec;
}

BcKind FESpace::edge_kind(int e) const {
    const Edge& edge = mesh().edges()[e];
    return edge.on_boundary() ? boundary_.kind(edge.tag) : BcKind::Natural;
}

std::vector<double> FESpace::expand(std::span<const double> free) const {
    if (static_cast<int>(free.size()) != num_free_) throw ConfigError("free vector has wrong size");
    std::vector<double> full(fixed_.size());
    for (std::size_t i = 0; i < full.size(); ++i) {
        full[i] = fixed_[i] ? fixed_values_[i] : free[free_index_[i]];
    }
    return full;
}

// ---------------------------------------------------------------------------
// Space construction

namespace {

LocalElement make_element(const FESpace& space, int t) {
    const SubdividedMesh& sub = space.subdivision();
    const MacroMesh& mesh = space.mesh();
    LocalElement el;
    el.nodes = sub.local_nodes(t);
    el.area = mesh.triangle_area(t);
    const auto p = mesh.triangle_points(t);
    const auto& tri = mesh.triangles()[t];

    std::array<std::array<double, 3>, kLocalNodes> lambda{};
    for (int n = 0; n < kLocalNodes; ++n) lambda[n] = barycentric(p[0], p[1], p[2], el.nodes[n]);
    for (int k = 0; k < 3; ++k) lambda[k] = {k == 0 ? 1.0 : 0.0, k == 1 ? 1.0 : 0.0, k == 2 ? 1.0 : 0.0};

    for (int k = 0; k < 3; ++k) {
        for (int c = 0; c < 2; ++c) {
            const int i = 2 * k + c;
            el.dofs[i] = space.vertex_dof(tri[k], c);
            const Vec2 dir = column(space.vertex_frame(tri[k]), c);
            for (int n = 0; n < kLocalNodes; ++n) el.values[i][n] = lambda[n][k] * dir;
        }
    }
    el.num_dofs = 6;
    if (space.has_bubbles()) {
        for (int k = 0; k < 3; ++k) {
            const int i = 6 + k;
            const int e = mesh.triangle_edge(t, k);
            el.dofs[i] = space.bubble_dof(e);
            el.values[i].fill(Vec2{});
            el.values[i][3 + k] = sub.direction(e);
            el.values[i][kCentroidNode] = bubble_centroid_value(sub, t, k);
        }
        el.num_dofs = 9;
    }

    el.divergence.fill(0.0);
    for (int s = 0; s < kSubTriangles; ++s) {
        const auto ids = subtriangle_nodes(s);
        const Vec2 a = el.nodes[ids[0]], b = el.nodes[ids[1]], c = el.nodes[ids[2]];
        el.sub_areas[s] = signed_area(a, b, c);
        if (!(el.sub_areas[s] > 0.0)) {
            throw GeometryError("triangle " + std::to_string(t) + ": degenerate subtriangle " +
                                std::to_string(s));
        }
        const auto grads = barycentric_gradients(a, b, c);
        for (int i = 0; i < el.num_dofs; ++i) {
            Mat2 g;
            for (int j = 0; j < 3; ++j) g += outer(el.values[i][ids[j]], grads[j]);
            el.gradients[s][i] = g;
            el.divergence[i] += el.sub_areas[s] * g.trace();
        }
    }
    for (int i = 0; i < el.num_dofs; ++i) el.divergence[i] /= el.area;
    return el;
}

}  // namespace

FESpace build_space(std::shared_ptr<const SubdividedMesh> sub, BoundarySpec boundary,
                    SpaceOptions options) {
    if (!sub) throw ConfigError("build_space: null subdivision");
    const MacroMesh& mesh = sub->mesh();

    std::set<std::string> tags;
    for (const auto& e : mesh.edges()) {
        if (e.on_boundary()) tags.insert(e.tag);
    }
    for (const auto& [tag, kind] : boundary.per_tag) {
        if (!tags.contains(tag)) throw ConfigError("boundary condition given for unknown tag '" + tag + "'");
    }

    FESpace space;
    space.sub_ = std::move(sub);
    space.boundary_ = std::move(boundary);
    space.options_ = options;

    const int nv = mesh.num_vertices();
    const int ndofs = 2 * nv + (options.with_bubbles ? mesh.num_edges() : 0);
    space.fixed_.assign(ndofs, 0);
    space.fixed_values_.assign(ndofs, 0.0);
    space.frames_.assign(nv, Mat2{{{{1.0, 0.0}, {0.0, 1.0}}}});

    // Strongest boundary kind touching each vertex, and normals of normal-only edges.
    std::vector<BcKind> vkind(nv, BcKind::Natural);
    std::vector<std::vector<Vec2>> vnormals(nv);
    for (int e = 0; e < mesh.num_edges(); ++e) {
        const Edge& edge = mesh.edges()[e];
        if (!edge.on_boundary()) continue;
        const BcKind kind = space.edge_kind(e);
        for (int v : edge.verts) {
            vkind[v] = std::max(vkind[v], kind);
            if (kind == BcKind::NormalOnly) vnormals[v].push_back(mesh.outward_normal(e));
        }
    }

    for (int v = 0; v < nv; ++v) {
        const Vec2 g = space.boundary_.value(mesh.vertex(v));
        bool full = vkind[v] == BcKind::Dirichlet;
        if (vkind[v] == BcKind::NormalOnly) {
            const Vec2 n = vnormals[v].front();
            for (const Vec2& m : vnormals[v]) {
                if (std::abs(std::atan2(cross(n, m), dot(n, m))) > kCornerAngle) full = true;
            }
            if (!full) {
                const Vec2 t = perp(n);
                space.frames_[v] = Mat2{{{{n.x, t.x}, {n.y, t.y}}}};
                space.fixed_[2 * v] = 1;
                space.fixed_values_[2 * v] = dot(g, n);
            }
        }
        if (full) {
            space.fixed_[2 * v] = space.fixed_[2 * v + 1] = 1;
            space.fixed_values_[2 * v] = g.x;
            space.fixed_values_[2 * v + 1] = g.y;
        }
    }

    if (options.with_bubbles) {
        for (int e = 0; e < mesh.num_edges(); ++e) {
            const Edge& edge = mesh.edges()[e];
            if (!edge.on_boundary() || space.edge_kind(e) == BcKind::Natural) continue;
            const Vec2 a = mesh.vertex(edge.verts[0]);
            const Vec2 b = mesh.vertex(edge.verts[1]);
            const Vec2 n = mesh.outward_normal(e);
            const double len = mesh.edge_length(e);
            // Both endpoints have their normal component fixed, so the vertex part of
            // the flux is known.
            const auto normal_part = [&](int v) {
                const Mat2& f = space.frames_[v];
                double un = space.fixed_values_[2 * v] * dot(column(f, 0), n);
                if (space.fixed_[2 * v + 1]) un += space.fixed_values_[2 * v + 1] * dot(column(f, 1), n);
                return un;
            };
            const double vertex_flux = 0.5 * len * (normal_part(edge.verts[0]) + normal_part(edge.verts[1]));
            const double flux = space.boundary_.data
                                    ? integrate_segment(a, b, kEdgeGaussPoints,
                                                        [&](const Vec2& x) { return dot(space.boundary_.data(x), n); })
                                    : 0.0;
            const int dof = 2 * nv + e;
            space.fixed_[dof] = 1;
            space.fixed_values_[dof] = bubble_amplitude(flux - vertex_flux, space.sub_->direction(e), n, len, e);
        }
    }

    space.free_index_.assign(ndofs, -1);
    for (int i = 0; i < ndofs; ++i) {
        if (!space.fixed_[i]) space.free_index_[i] = space.num_free_++;
    }

    space.elements_.reserve(mesh.num_triangles());
    for (int t = 0; t < mesh.num_triangles(); ++t) space.elements_.push_back(make_element(space, t));
    return space;
}

FESpace build_space(const SubdividedMesh& sub, BoundarySpec boundary, SpaceOptions options) {
    return build_space(std::make_shared<const SubdividedMesh>(sub), std::move(boundary), options);
}

// ---------------------------------------------------------------------------
// Evaluation

std::array<Vec2, kLocalNodes> local_node_values(const FESpace& space, std::span<const double> coeffs,
                                                int t) {
    const LocalElement& el = space.element(t);
    std::array<Vec2, kLocalNodes> out{};
    for (int i = 0; i < el.num_dofs; ++i) {
        const double c = coeffs[el.dofs[i]];
        if (c == 0.0) continue;
        for (int n = 0; n < kLocalNodes; ++n) out[n] += c * el.values[i][n];
    }
    return out;
}

int locate_subtriangle(const FESpace& space, int t, const Vec2& point) {
    const LocalElement& el = space.element(t);
    int best = -1;
    double best_min = -1e300;
    for (int s = 0; s < kSubTriangles; ++s) {
        const auto ids = subtriangle_nodes(s);
        const auto lam = barycentric(el.nodes[ids[0]], el.nodes[ids[1]], el.nodes[ids[2]], point);
        const double m = std::min({lam[0], lam[1], lam[2]});
        if (m > best_min) {
            best_min = m;
            best = s;
        }
    }
    if (best_min < -kLocateTolerance) {
        throw GeometryError("point outside triangle " + std::to_string(t));
    }
    return best;
}

Vec2 eval_velocity(const FESpace& space, std::span<const double> coeffs, int t, const Vec2& point) {
    const int s = locate_subtriangle(space, t, point);
    const LocalElement& el = space.element(t);
    const auto ids = subtriangle_nodes(s);
    const auto vals = local_node_values(space, coeffs, t);
    const auto lam = barycentric(el.nodes[ids[0]], el.nodes[ids[1]], el.nodes[ids[2]], point);
    return lam[0] * vals[ids[0]] + lam[1] * vals[ids[1]] + lam[2] * vals[ids[2]];
}

Mat2 subtriangle_gradient(const FESpace& space, std::span<const double> coeffs, int t, int s) {
    const LocalElement& el = space.element(t);
    Mat2 g;
    for (int i = 0; i < el.num_dofs; ++i) g += coeffs[el.dofs[i]] * el.gradients[s][i];
    return g;
}

Mat2 eval_velocity_gradient(const FESpace& space, std::span<const double> coeffs, int t,
                            const Vec2& point) {
    return subtriangle_gradient(space, coeffs, t, locate_subtriangle(space, t, point));
}

MacroDivergence macro_divergence(const FESpace& space, std::span<const double> coeffs, int t) {
    const LocalElement& el = space.element(t);
    std::array<double, kSubTriangles> div{};
    double mean = 0.0;
    for (int s = 0; s < kSubTriangles; ++s) {
        div[s] = subtriangle_gradient(space, coeffs, t, s).trace();
        mean += el.sub_areas[s] * div[s];
    }
    MacroDivergence out;
    out.value = mean / el.area;
    for (double d : div) out.max_deviation = std::max(out.max_deviation, std::abs(d - out.value));
    return out;
}

std::vector<double> project_p0(const ScalarFn& f, const MacroMesh& mesh) {
    std::vector<double> out(mesh.num_triangles());
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto p = mesh.triangle_points(t);
        out[t] = integrate_triangle(p[0], p[1], p[2], 6, f) / mesh.triangle_area(t);
    }
    return out;
}

std::vector<double> fortin_interpolate(const VectorFn& u, const FESpace& space) {
    const MacroMesh& mesh = space.mesh();
    std::vector<double> coeffs(space.num_velocity_dofs(), 0.0);
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        const Vec2 value = u(mesh.vertex(v));
        const Mat2& f = space.vertex_frame(v);
        coeffs[2 * v] = dot(column(f, 0), value);
        coeffs[2 * v + 1] = dot(column(f, 1), value);
    }
    if (!space.has_bubbles()) return coeffs;
    for (int e = 0; e < mesh.num_edges(); ++e) {
        const Edge& edge = mesh.edges()[e];
        const Vec2 a = mesh.vertex(edge.verts[0]);
        const Vec2 b = mesh.vertex(edge.verts[1]);
        const double len = norm(b - a);
        const Vec2 n = Vec2{b.y - a.y, a.x - b.x} / len;
        const double flux = integrate_segment(a, b, kEdgeGaussPoints, [&](const Vec2& x) { return dot(u(x), n); });
        const double vertex_flux = linear_flux(u(a), u(b), n, len);
        coeffs[space.bubble_dof(e)] = bubble_amplitude(flux - vertex_flux, space.subdivision().direction(e), n, len, e);
    }
    return coeffs;
}

}  // namespace mce
