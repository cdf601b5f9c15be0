#include "mce/forms.hpp"

#include <algorithm>
#include <exception>
#include <iomanip>
#include <ostream>
#include <thread>

#include "mce/error.hpp"
#include "mce/quadrature.hpp"

namespace mce {

namespace {

constexpr int kEdgePoints = 3;
constexpr int kBodyForceDegree = 4;
constexpr int kSourceDegree = 6;

struct Entry {
    int row;
    int col;
    double value;
};

/// Contributions of one macro triangle in the full numbering
/// [velocity dofs | pressure per triangle | multiplier].
struct LocalBuffer {
    std::vector<Entry> matrix;
    std::vector<std::pair<int, double>> rhs;

    void add(int r, int c, double v) {
        if (v != 0.0) matrix.push_back({r, c, v});
    }
    void add_rhs(int r, double v) {
        if (v != 0.0) rhs.push_back({r, v});
    }
};

class Assembler {
public:
    Assembler(const FESpace& space, bool multiplier)
        : space_(space), nvel_(space.num_velocity_dofs()), np_(space.num_pressure_dofs()),
          multiplier_(multiplier) {}

    int pressure(int t) const { return nvel_ + t; }
    int multiplier() const { return nvel_ + np_; }
    bool has_pressure() const { return with_pressure_; }
    void set_velocity_only() { with_pressure_ = false; }

    template <typename Kernel>
    void run(Kernel&& kernel, int threads) {
        const int nt = space_.mesh().num_triangles();
        buffers_.assign(nt, {});
        const auto work = [&](int begin, int end) {
            for (int t = begin; t < end; ++t) kernel(t, buffers_[t]);
        };
        threads = std::clamp(threads, 1, std::max(1, nt));
        if (threads == 1) {
            work(0, nt);
            return;
        }
        std::vector<std::exception_ptr> errors(threads);
        std::vector<std::thread> pool;
        const int chunk = (nt + threads - 1) / threads;
        for (int i = 0; i < threads; ++i) {
            pool.emplace_back([&, i] {
                try {
                    work(std::min(nt, i * chunk), std::min(nt, (i + 1) * chunk));
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }

    /// Eliminates fixed velocity dofs and sums contributions in triangle order.
    SaddleSystem finish(bool symmetric) {
        SaddleSystem sys;
        sys.num_velocity = space_.num_free_velocity_dofs();
        sys.num_pressure = with_pressure_ ? np_ : 0;
        sys.num_multiplier = (with_pressure_ && multiplier_) ? 1 : 0;
        sys.symmetric = symmetric;
        const int n = sys.size();
        sys.rhs = Eigen::VectorXd::Zero(n);

        const auto reduced = [&](int full) {
            if (full < nvel_) return space_.free_index(full);
            return sys.num_velocity + (full - nvel_);
        };
        std::vector<Eigen::Triplet<double>> triplets;
        std::size_t total = 0;
        for (const auto& b : buffers_) total += b.matrix.size();
        triplets.reserve(total);
        for (const auto& b : buffers_) {
            for (const auto& [row, col, value] : b.matrix) {
                const int r = reduced(row);
                if (r < 0) continue;
                const int c = reduced(col);
                if (c < 0) {
                    sys.rhs[r] -= value * space_.fixed_value(col);
                } else {
                    triplets.emplace_back(r, c, value);
                }
            }
            for (const auto& [row, value] : b.rhs) {
                const int r = reduced(row);
                if (r >= 0) sys.rhs[r] += value;
            }
        }
        sys.matrix.resize(n, n);
        sys.matrix.setFromTriplets(triplets.begin(), triplets.end());
        sys.matrix.makeCompressed();
        buffers_.clear();
        return sys;
    }

private:
    const FESpace& space_;
    int nvel_;
    int np_;
    bool multiplier_;
    bool with_pressure_ = true;
    std::vector<LocalBuffer> buffers_;
};

/// Values of all local basis functions at barycentric point `lam` of subtriangle s.
std::array<Vec2, 9> basis_at(const LocalElement& el, int s, const std::array<double, 3>& lam) {
    const auto ids = subtriangle_nodes(s);
    std::array<Vec2, 9> out{};
    for (int i = 0; i < el.num_dofs; ++i) {
        out[i] = lam[0] * el.values[i][ids[0]] + lam[1] * el.values[i][ids[1]] + lam[2] * el.values[i][ids[2]];
    }
    return out;
}

void add_viscous(const LocalElement& el, double mu, LocalBuffer& buf) {
    if (mu == 0.0) return;
    for (int i = 0; i < el.num_dofs; ++i) {
        for (int j = 0; j < el.num_dofs; ++j) {
            double v = 0.0;
            for (int s = 0; s < kSubTriangles; ++s) v += el.sub_areas[s] * ddot(el.gradients[s][i], el.gradients[s][j]);
            buf.add(el.dofs[i], el.dofs[j], mu * v);
        }
    }
}

void add_elastic(const LocalElement& el, double mu, double lambda, LocalBuffer& buf) {
    for (int i = 0; i < el.num_dofs; ++i) {
        for (int j = 0; j < el.num_dofs; ++j) {
            double v = 0.0;
            for (int s = 0; s < kSubTriangles; ++s) {
                const Mat2& gi = el.gradients[s][i];
                const Mat2& gj = el.gradients[s][j];
                v += el.sub_areas[s] * (2.0 * mu * ddot(gi.sym(), gj.sym()) + lambda * gi.trace() * gj.trace());
            }
            buf.add(el.dofs[i], el.dofs[j], v);
        }
    }
}

/// Consistent P1 mass on every subtriangle: |s|/12 sum_ab (1 + delta_ab) phi_i(a).phi_j(b).
void add_mass(const LocalElement& el, double sigma, LocalBuffer& buf) {
    if (sigma == 0.0) return;
    for (int i = 0; i < el.num_dofs; ++i) {
        for (int j = 0; j < el.num_dofs; ++j) {
            double v = 0.0;
            for (int s = 0; s < kSubTriangles; ++s) {
                const auto ids = subtriangle_nodes(s);
                double m = 0.0;
                for (int a = 0; a < 3; ++a)
                    for (int b = 0; b < 3; ++b)
                        m += (a == b ? 2.0 : 1.0) * dot(el.values[i][ids[a]], el.values[j][ids[b]]);
                v += el.sub_areas[s] / 12.0 * m;
            }
            buf.add(el.dofs[i], el.dofs[j], sigma * v);
        }
    }
}

/// -b(p, v) in velocity rows and -b(q, u) in (negated) pressure rows.
void add_coupling(const LocalElement& el, int prow, LocalBuffer& buf) {
    for (int i = 0; i < el.num_dofs; ++i) {
        const double b = el.area * el.divergence[i];
        buf.add(el.dofs[i], prow, -b);
        buf.add(prow, el.dofs[i], -b);
    }
}

void add_body_force(const LocalElement& el, const VectorFn& f, LocalBuffer& buf) {
    if (!f) return;
    std::array<double, 9> load{};
    for (int s = 0; s < kSubTriangles; ++s) {
        const auto ids = subtriangle_nodes(s);
        const Vec2 a = el.nodes[ids[0]], b = el.nodes[ids[1]], c = el.nodes[ids[2]];
        for (const auto& q : quadrature_rule(kBodyForceDegree)) {
            const Vec2 x = a + q.point.x * (b - a) + q.point.y * (c - a);
            const Vec2 fx = f(x);
            const auto phi = basis_at(el, s, {1.0 - q.point.x - q.point.y, q.point.x, q.point.y});
            const double w = q.weight * 2.0 * el.sub_areas[s];
            for (int i = 0; i < el.num_dofs; ++i) load[i] += w * dot(fx, phi[i]);
        }
    }
    for (int i = 0; i < el.num_dofs; ++i) buf.add_rhs(el.dofs[i], load[i]);
}

/// One half of a boundary macro edge: the edge of subtriangle s between local nodes
/// ids[1] and ids[2].
struct SubEdge {
    int s;
    Vec2 a;
    Vec2 b;
};

std::array<SubEdge, 2> sub_edges(const LocalElement& el, int k) {
    std::array<SubEdge, 2> out;
    for (int h = 0; h < 2; ++h) {
        const int s = 2 * k + h;
        const auto ids = subtriangle_nodes(s);
        out[h] = {s, el.nodes[ids[1]], el.nodes[ids[2]]};
    }
    return out;
}

/// Calls fn(x, weight, phi) at the Gauss points of both halves of local edge k.
template <typename Fn>
void for_edge_points(const LocalElement& el, int k, Fn&& fn) {
    for (const SubEdge& se : sub_edges(el, k)) {
        const double len = norm(se.b - se.a);
        for (const auto& [r, w] : gauss_legendre(kEdgePoints)) {
            const auto phi = basis_at(el, se.s, {0.0, 1.0 - r, r});
            fn(se.a + r * (se.b - se.a), w * len, phi, se.s);
        }
    }
}

void add_tractions(const FESpace& space, const ProblemCoefficients& coeffs, int t, LocalBuffer& buf) {
    if (coeffs.traction.empty()) return;
    const MacroMesh& mesh = space.mesh();
    const LocalElement& el = space.element(t);
    for (int k = 0; k < 3; ++k) {
        const Edge& edge = mesh.edges()[mesh.triangle_edge(t, k)];
        if (!edge.on_boundary()) continue;
        const auto it = coeffs.traction.find(edge.tag);
        if (it == coeffs.traction.end()) continue;
        std::array<double, 9> load{};
        for_edge_points(el, k, [&](const Vec2& x, double w, const std::array<Vec2, 9>& phi, int) {
            const Vec2 g = it->second(x);
            for (int i = 0; i < el.num_dofs; ++i) load[i] += w * dot(g, phi[i]);
        });
        for (int i = 0; i < el.num_dofs; ++i) buf.add_rhs(el.dofs[i], load[i]);
    }
}

bool needs_multiplier(const FESpace& space, const BoundarySpec* weak, MeanZero mode) {
    if (mode != MeanZero::Auto) return mode == MeanZero::On;
    for (int e = 0; e < space.mesh().num_edges(); ++e) {
        const Edge& edge = space.mesh().edges()[e];
        if (!edge.on_boundary()) continue;
        const bool strong = space.edge_kind(e) != BcKind::Natural;
        const bool weakly = weak && weak->kind(edge.tag) != BcKind::Natural;
        if (!strong && !weakly) return false;
    }
    return true;
}

void validate_brinkman(const FESpace& space, const ProblemCoefficients& c) {
    const int nt = space.mesh().num_triangles();
    if (!c.mu_field.empty() && static_cast<int>(c.mu_field.size()) != nt)
        throw ConfigError("mu field size does not match the triangle count");
    if (!c.sigma_field.empty() && static_cast<int>(c.sigma_field.size()) != nt)
        throw ConfigError("sigma field size does not match the triangle count");
    double max_mu = 0.0;
    for (int t = 0; t < nt; ++t) {
        const double mu = c.mu_at(t), sigma = c.sigma_at(t);
        if (mu < 0.0 || sigma < 0.0) throw ConfigError("mu and sigma must be non-negative");
        if (!(mu + sigma > 0.0)) {
            throw ConfigError("mu + sigma must be positive (triangle " + std::to_string(t) + ")");
        }
        max_mu = std::max(max_mu, mu);
    }
    if (max_mu == 0.0) {
        for (int e = 0; e < space.mesh().num_edges(); ++e) {
            if (space.mesh().edges()[e].on_boundary() && space.edge_kind(e) == BcKind::Dirichlet) {
                throw ConfigError(
                    "mu = 0 (Darcy) cannot carry a full Dirichlet condition; constrain the normal "
                    "component only (normal-only mode)");
            }
        }
    }
}

void validate_elasticity(const FESpace& space, const ProblemCoefficients& c) {
    for (int t = 0; t < space.mesh().num_triangles(); ++t) {
        if (!(c.mu_at(t) > 0.0)) throw ConfigError("elasticity needs mu > 0");
    }
    if (!(c.lambda > 0.0)) throw ConfigError("elasticity needs lambda > 0");
}

void validate_gamma(const ProblemCoefficients& c) {
    if (!(c.gamma > 0.0)) throw ConfigError("Nitsche penalty gamma must be positive");
}

/// Shared Brinkman bulk terms of triangle t.
void brinkman_bulk(const FESpace& space, const ProblemCoefficients& coeffs, Assembler& as, int t,
                   LocalBuffer& buf, bool multiplier) {
    const LocalElement& el = space.element(t);
    add_viscous(el, coeffs.mu_at(t), buf);
    add_mass(el, coeffs.sigma_at(t), buf);
    add_coupling(el, as.pressure(t), buf);
    add_body_force(el, coeffs.body_force, buf);
    add_tractions(space, coeffs, t, buf);
    if (coeffs.mass_source) {
        const auto p = space.mesh().triangle_points(t);
        buf.add_rhs(as.pressure(t), -integrate_triangle(p[0], p[1], p[2], kSourceDegree, coeffs.mass_source));
    }
    if (multiplier) {
        buf.add(as.pressure(t), as.multiplier(), el.area);
        buf.add(as.multiplier(), as.pressure(t), el.area);
    }
}

}  // namespace

std::string SaddleSystem::block_of(int row) const {
    if (row < num_velocity) return "velocity";
    if (row < num_velocity + num_pressure) return "pressure";
    return "multiplier";
}

FieldSolution extract_solution(const FESpace& space, const SaddleSystem& system, const Eigen::VectorXd& x) {
    if (x.size() != system.size()) throw ConfigError("solution vector has wrong size");
    FieldSolution out;
    out.velocity = space.expand(std::span<const double>(x.data(), system.num_velocity));
    out.pressure.assign(x.data() + system.num_velocity, x.data() + system.num_velocity + system.num_pressure);
    if (system.num_multiplier) out.multiplier = x[system.size() - 1];
    return out;
}

SaddleSystem assemble_elasticity(const FESpace& space, const ProblemCoefficients& coeffs,
                                 const AssemblyOptions& options) {
    validate_elasticity(space, coeffs);
    Assembler as(space, false);
    as.set_velocity_only();
    as.run(
        [&](int t, LocalBuffer& buf) {
            const LocalElement& el = space.element(t);
            add_elastic(el, coeffs.mu_at(t), coeffs.lambda, buf);
            add_body_force(el, coeffs.body_force, buf);
            add_tractions(space, coeffs, t, buf);
        },
        options.threads);
    return as.finish(true);
}

SaddleSystem assemble_brinkman(const FESpace& space, const ProblemCoefficients& coeffs,
                               const AssemblyOptions& options) {
    validate_brinkman(space, coeffs);
    const bool mult = needs_multiplier(space, nullptr, options.mean_zero);
    Assembler as(space, mult);
    as.run([&](int t, LocalBuffer& buf) { brinkman_bulk(space, coeffs, as, t, buf, mult); }, options.threads);
    return as.finish(true);
}

SaddleSystem assemble_nitsche_elasticity(const FESpace& space, const ProblemCoefficients& coeffs,
                                         const BoundarySpec& weak, const AssemblyOptions& options) {
    validate_elasticity(space, coeffs);
    validate_gamma(coeffs);
    const MacroMesh& mesh = space.mesh();
    bool any_dirichlet = false;
    for (const auto& e : mesh.edges()) {
        if (e.on_boundary() && weak.kind(e.tag) == BcKind::Dirichlet) any_dirichlet = true;
    }

    Assembler as(space, false);
    as.set_velocity_only();
    as.run(
        [&](int t, LocalBuffer& buf) {
            const LocalElement& el = space.element(t);
            const double mu = coeffs.mu_at(t);
            const double lambda = coeffs.lambda;
            const double gamma = coeffs.gamma;
            add_elastic(el, mu, lambda, buf);
            add_body_force(el, coeffs.body_force, buf);
            add_tractions(space, coeffs, t, buf);

            for (int k = 0; k < 3; ++k) {
                const int e = mesh.triangle_edge(t, k);
                const Edge& edge = mesh.edges()[e];
                if (!edge.on_boundary()) continue;
                const BcKind kind = weak.kind(edge.tag);
                if (kind == BcKind::Natural) continue;
                const bool tangential = kind == BcKind::Dirichlet;
                const Vec2 n = mesh.outward_normal(e);
                const Vec2 tau = perp(n);
                const double h = mesh.edge_length(e);

                // Normal and tangential tractions of each basis function on each subtriangle.
                const auto traction = [&](int s, int i) {
                    const Mat2& g = el.gradients[s][i];
                    const Mat2 sig = 2.0 * mu * g.sym() + lambda * g.trace() * Mat2{{{{1.0, 0.0}, {0.0, 1.0}}}};
                    const Vec2 sn = sig.apply(n);
                    return std::pair{dot(n, sn), dot(tau, sn)};
                };

                std::array<std::array<double, 9>, 9> m{};
                std::array<double, 9> flux{};
                std::array<double, 9> rhs{};
                double data_flux = 0.0;
                for_edge_points(el, k, [&](const Vec2& x, double w, const std::array<Vec2, 9>& phi, int s) {
                    const Vec2 g = weak.value(x);
                    const double gn = dot(g, n), gt = dot(g, tau);
                    data_flux += w * gn;
                    for (int i = 0; i < el.num_dofs; ++i) {
                        const auto [sni, sti] = traction(s, i);
                        const double vn = dot(phi[i], n), vt = dot(phi[i], tau);
                        flux[i] += w * vn;
                        rhs[i] += w * gn * (gamma / h * mu * vn - sni);
                        if (tangential) rhs[i] += w * gt * (gamma / h * mu * vt - sti);
                        for (int j = 0; j < el.num_dofs; ++j) {
                            const auto [snj, stj] = traction(s, j);
                            const double un = dot(phi[j], n), ut = dot(phi[j], tau);
                            double v = -snj * vn - sni * un + gamma / h * mu * un * vn;
                            if (tangential) v += -stj * vt - sti * ut + gamma / h * mu * ut * vt;
                            m[i][j] += w * v;
                        }
                    }
                });
                // lambda part of the normal penalty acts on edge means of u.n
                const double lam_pen = gamma * lambda / (h * h);
                for (int i = 0; i < el.num_dofs; ++i) {
                    rhs[i] += lam_pen * data_flux * flux[i];
                    buf.add_rhs(el.dofs[i], rhs[i]);
                    for (int j = 0; j < el.num_dofs; ++j) {
                        buf.add(el.dofs[i], el.dofs[j], m[i][j] + lam_pen * flux[i] * flux[j]);
                    }
                }
            }
        },
        options.threads);
    SaddleSystem sys = as.finish(true);
    if (!any_dirichlet) {
        sys.warnings.push_back(
            "no weakly clamped edge: only normal components are constrained, rigid motions "
            "tangent to the boundary stay in the kernel");
    }
    return sys;
}

SaddleSystem assemble_nitsche_brinkman_tangential(const FESpace& space, const ProblemCoefficients& coeffs,
                                                  const AssemblyOptions& options) {
    validate_brinkman(space, coeffs);
    validate_gamma(coeffs);
    const MacroMesh& mesh = space.mesh();
    const bool mult = needs_multiplier(space, nullptr, options.mean_zero);
    Assembler as(space, mult);
    as.run(
        [&](int t, LocalBuffer& buf) {
            brinkman_bulk(space, coeffs, as, t, buf, mult);
            const LocalElement& el = space.element(t);
            const double mu = coeffs.mu_at(t);
            if (mu == 0.0) return;
            for (int k = 0; k < 3; ++k) {
                const int e = mesh.triangle_edge(t, k);
                if (!mesh.edges()[e].on_boundary() || space.edge_kind(e) != BcKind::NormalOnly) continue;
                const Vec2 n = mesh.outward_normal(e);
                const Vec2 tau = perp(n);
                const double pen = coeffs.gamma * mu / mesh.edge_length(e);
                std::array<std::array<double, 9>, 9> m{};
                std::array<double, 9> rhs{};
                for_edge_points(el, k, [&](const Vec2& x, double w, const std::array<Vec2, 9>& phi, int s) {
                    const double gt = dot(space.boundary().value(x), tau);
                    for (int i = 0; i < el.num_dofs; ++i) {
                        const double dni = mu * dot(tau, el.gradients[s][i].apply(n));
                        const double vt = dot(phi[i], tau);
                        rhs[i] += w * gt * (pen * vt - dni);
                        for (int j = 0; j < el.num_dofs; ++j) {
                            const double dnj = mu * dot(tau, el.gradients[s][j].apply(n));
                            const double ut = dot(phi[j], tau);
                            m[i][j] += w * (-dnj * vt - dni * ut + pen * ut * vt);
                        }
                    }
                });
                for (int i = 0; i < el.num_dofs; ++i) {
                    buf.add_rhs(el.dofs[i], rhs[i]);
                    for (int j = 0; j < el.num_dofs; ++j) buf.add(el.dofs[i], el.dofs[j], m[i][j]);
                }
            }
        },
        options.threads);
    return as.finish(true);
}

SaddleSystem assemble_nitsche_slip(const FESpace& space, const ProblemCoefficients& coeffs,
                                   const BoundarySpec& weak, const AssemblyOptions& options) {
    validate_brinkman(space, coeffs);
    validate_gamma(coeffs);
    const MacroMesh& mesh = space.mesh();
    const bool mult = needs_multiplier(space, &weak, options.mean_zero);
    Assembler as(space, mult);
    as.run(
        [&](int t, LocalBuffer& buf) {
            brinkman_bulk(space, coeffs, as, t, buf, mult);
            const LocalElement& el = space.element(t);
            const double mu = coeffs.mu_at(t);
            const double sigma = coeffs.sigma_at(t);
            for (int k = 0; k < 3; ++k) {
                const int e = mesh.triangle_edge(t, k);
                const Edge& edge = mesh.edges()[e];
                if (!edge.on_boundary() || weak.kind(edge.tag) != BcKind::NormalOnly) continue;
                const Vec2 n = mesh.outward_normal(e);
                const double pen = coeffs.gamma * (mu + sigma) / mesh.edge_length(e);
                std::array<std::array<double, 9>, 9> m{};
                std::array<double, 9> rhs{};
                std::array<double, 9> flux{};
                for_edge_points(el, k, [&](const Vec2& x, double w, const std::array<Vec2, 9>& phi, int s) {
                    const double gn = dot(weak.value(x), n);
                    for (int i = 0; i < el.num_dofs; ++i) {
                        const double dni = mu * dot(n, el.gradients[s][i].apply(n));
                        const double vn = dot(phi[i], n);
                        flux[i] += w * vn;
                        rhs[i] += w * gn * (pen * vn - dni);
                        for (int j = 0; j < el.num_dofs; ++j) {
                            const double dnj = mu * dot(n, el.gradients[s][j].apply(n));
                            const double un = dot(phi[j], n);
                            m[i][j] += w * (-dnj * vn - dni * un + pen * un * vn);
                        }
                    }
                });
                for (int i = 0; i < el.num_dofs; ++i) {
                    buf.add_rhs(el.dofs[i], rhs[i]);
                    // -c((u,p),v) contributes +(p, v.n); the pressure rows get nothing back.
                    buf.add(el.dofs[i], as.pressure(t), flux[i]);
                    for (int j = 0; j < el.num_dofs; ++j) buf.add(el.dofs[i], el.dofs[j], m[i][j]);
                }
            }
        },
        options.threads);
    return as.finish(false);
}

void write_matrix_market(std::ostream& out, const Eigen::SparseMatrix<double>& matrix) {
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << matrix.rows() << ' ' << matrix.cols() << ' ' << matrix.nonZeros() << '\n';
    out << std::setprecision(17);
    for (int c = 0; c < matrix.outerSize(); ++c) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(matrix, c); it; ++it) {
            out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
        }
    }
}

}  // namespace mce
