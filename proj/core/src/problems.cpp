#include "mce/problems.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>

#include "mce/error.hpp"
#include "mce/quadrature.hpp"

namespace mce {

namespace {

using std::numbers::pi;

constexpr double kFdStep = 1e-5;
constexpr int kErrorDegree = 6;

/// Laplacian of u from central differences of its gradient.
Vec2 fd_laplacian(const TensorFn& grad, const Vec2& x) {
    const Vec2 dx{kFdStep, 0.0}, dy{0.0, kFdStep};
    const Mat2 gxp = grad(x + dx), gxm = grad(x - dx), gyp = grad(x + dy), gym = grad(x - dy);
    return Vec2{(gxp(0, 0) - gxm(0, 0)) + (gyp(0, 1) - gym(0, 1)),
                (gxp(1, 0) - gxm(1, 0)) + (gyp(1, 1) - gym(1, 1))} /
           (2.0 * kFdStep);
}

Vec2 fd_gradient(const ScalarFn& f, const Vec2& x) {
    const Vec2 dx{kFdStep, 0.0}, dy{0.0, kFdStep};
    return Vec2{f(x + dx) - f(x - dx), f(x + dy) - f(x - dy)} / (2.0 * kFdStep);
}

double max_abs(std::initializer_list<double> values) {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace

// ---------------------------------------------------------------------------
// Manufactured cases

ManufacturedCase case_stokes() {
    ManufacturedCase c;
    c.name = "stokes";
    c.model = Model::Brinkman;
    c.velocity = [](const Vec2& x) {
        return Vec2{20.0 * x.x * std::pow(x.y, 3), 5.0 * std::pow(x.x, 4) - 5.0 * std::pow(x.y, 4)};
    };
    c.velocity_gradient = [](const Vec2& x) {
        return Mat2{{{{20.0 * std::pow(x.y, 3), 60.0 * x.x * x.y * x.y},
                      {20.0 * std::pow(x.x, 3), -20.0 * std::pow(x.y, 3)}}}};
    };
    c.pressure = [](const Vec2& x) { return 60.0 * x.y * x.x * x.x - 20.0 * std::pow(x.y, 3) - 5.0; };
    c.coefficients.mu = 1.0;
    c.coefficients.sigma = 0.0;
    c.coefficients.body_force = [](const Vec2&) { return Vec2{}; };
    c.mode = ConstraintMode::FullDirichlet;
    c.formulation = Formulation::Strong;
    c.domain = generate_unit_square_mesh;
    return c;
}

ManufacturedCase case_darcy(double mu, double sigma) {
    ManufacturedCase c;
    c.name = "darcy";
    c.model = Model::Brinkman;
    c.velocity = [](const Vec2& x) {
        const double sx = std::sin(pi * x.x), sy = std::sin(pi * x.y);
        return Vec2{-pi * sx * sx * std::sin(2 * pi * x.y), pi * std::sin(2 * pi * x.x) * sy * sy};
    };
    c.velocity_gradient = [](const Vec2& x) {
        const double sx = std::sin(pi * x.x), sy = std::sin(pi * x.y);
        const double s2x = std::sin(2 * pi * x.x), s2y = std::sin(2 * pi * x.y);
        return Mat2{{{{-pi * pi * s2x * s2y, -2 * pi * pi * sx * sx * std::cos(2 * pi * x.y)},
                      {2 * pi * pi * std::cos(2 * pi * x.x) * sy * sy, pi * pi * s2x * s2y}}}};
    };
    c.pressure = [](const Vec2& x) { return std::sin(pi * x.x) - 2.0 / pi; };
    c.coefficients.mu = mu;
    c.coefficients.sigma = sigma;
    c.coefficients.body_force = [mu, sigma](const Vec2& x) {
        const double sx = std::sin(pi * x.x), sy = std::sin(pi * x.y);
        const double s2x = std::sin(2 * pi * x.x), s2y = std::sin(2 * pi * x.y);
        const Vec2 u{-pi * sx * sx * s2y, pi * s2x * sy * sy};
        const Vec2 grad_p{pi * std::cos(pi * x.x), 0.0};
        const Vec2 lap{2 * std::pow(pi, 3) * s2y * (1 - 2 * std::cos(2 * pi * x.x)),
                       -2 * std::pow(pi, 3) * s2x * (1 - 2 * std::cos(2 * pi * x.y))};
        return sigma * u + grad_p - mu * lap;
    };
    c.coefficients.mass_source = [](const Vec2&) { return 0.0; };
    c.mode = ConstraintMode::NormalOnly;
    c.formulation = Formulation::NitscheTangential;
    c.domain = generate_unit_square_mesh;
    return c;
}

ManufacturedCase case_elasticity(double lambda, double mu) {
    ManufacturedCase c = case_stokes();
    c.name = "elasticity";
    c.model = Model::Elasticity;
    c.pressure = nullptr;
    c.coefficients.mu = mu;
    c.coefficients.lambda = lambda;
    c.coefficients.body_force = [mu](const Vec2& x) {
        return Vec2{-mu * 120.0 * x.x * x.y, -mu * (60.0 * x.x * x.x - 60.0 * x.y * x.y)};
    };
    return c;
}

double consistency_residual(const ManufacturedCase& c, int samples, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> coord(0.05, 0.95);
    const ProblemCoefficients& k = c.coefficients;
    double worst = 0.0;
    for (int i = 0; i < samples; ++i) {
        const Vec2 x{coord(rng), coord(rng)};
        const Vec2 u = c.velocity(x);
        const Mat2 g = c.velocity_gradient(x);
        const Vec2 lap = fd_laplacian(c.velocity_gradient, x);
        const Vec2 f = k.body_force ? k.body_force(x) : Vec2{};

        // the supplied gradient must match the velocity
        const Vec2 dux = (c.velocity(x + Vec2{kFdStep, 0}) - c.velocity(x - Vec2{kFdStep, 0})) / (2 * kFdStep);
        const Vec2 duy = (c.velocity(x + Vec2{0, kFdStep}) - c.velocity(x - Vec2{0, kFdStep})) / (2 * kFdStep);
        const double grad_scale = std::max(1.0, max_abs({g(0, 0), g(0, 1), g(1, 0), g(1, 1)}));
        worst = std::max(worst, max_abs({dux.x - g(0, 0), dux.y - g(1, 0), duy.x - g(0, 1), duy.y - g(1, 1)}) /
                                    grad_scale);

        Vec2 r;
        double scale = 1.0;
        if (c.model == Model::Brinkman) {
            const Vec2 gp = fd_gradient(c.pressure, x);
            r = -k.mu * lap + k.sigma * u + gp - f;
            scale = std::max(scale, max_abs({f.x, f.y, k.sigma * u.x, k.sigma * u.y, gp.x, gp.y, k.mu * lap.x,
                                             k.mu * lap.y}));
            const double g_src = k.mass_source ? k.mass_source(x) : 0.0;
            worst = std::max(worst, std::abs(g.trace() - g_src) / grad_scale);
        } else {
            const ScalarFn div = [&](const Vec2& y) { return c.velocity_gradient(y).trace(); };
            const Vec2 grad_div = fd_gradient(div, x);
            r = -k.mu * lap - (k.mu + k.lambda) * grad_div - f;
            scale = std::max(scale, max_abs({f.x, f.y, k.mu * lap.x, k.mu * lap.y}));
        }
        worst = std::max(worst, max_abs({r.x, r.y}) / scale);
    }
    return worst;
}

double lame_lambda(double young, double nu) { return young * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)); }
double lame_mu(double young, double nu) { return young / (2.0 * (1.0 + nu)); }

CooksSetup case_cooks(double nu, int n) {
    if (!(nu > 0.0 && nu < 0.5)) throw ConfigError("Poisson ratio must lie in (0, 0.5)");
    constexpr double young = 200.0;
    CooksSetup s;
    s.mesh = generate_cook_mesh(n);
    s.coefficients.mu = lame_mu(young, nu);
    s.coefficients.lambda = lame_lambda(young, nu);
    s.coefficients.traction["loaded"] = [](const Vec2&) { return Vec2{0.0, 1.0}; };
    s.boundary.default_kind = BcKind::Natural;
    s.boundary.per_tag["clamped"] = BcKind::Dirichlet;
    s.tip_vertex = (n + 1) * (n + 1) - 1;
    return s;
}

// ---------------------------------------------------------------------------
// Solving

namespace {

CaseSolution finish_solve(std::shared_ptr<const SubdividedMesh> sub, FESpace space, const SaddleSystem& sys) {
    CaseSolution out;
    out.subdivision = std::move(sub);
    out.report = solve(sys);
    out.space = std::make_shared<const FESpace>(std::move(space));
    out.fields = extract_solution(*out.space, sys, out.report.solution);
    return out;
}

}  // namespace

CaseSolution solve_case(const ManufacturedCase& c, int n, const RunOptions& options) {
    auto sub = std::make_shared<const SubdividedMesh>(subdivide(c.domain(n)));
    ProblemCoefficients coeffs = c.coefficients;
    if (options.gamma > 0.0) coeffs.gamma = options.gamma;
    AssemblyOptions aopt;
    aopt.threads = options.threads;

    switch (c.formulation) {
        case Formulation::Strong: {
            FESpace space = build_space(sub, BoundarySpec::uniform(c.mode, c.velocity));
            const SaddleSystem sys = c.model == Model::Elasticity ? assemble_elasticity(space, coeffs, aopt)
                                                                  : assemble_brinkman(space, coeffs, aopt);
            return finish_solve(sub, std::move(space), sys);
        }
        case Formulation::NitscheTangential: {
            FESpace space = build_space(sub, BoundarySpec::uniform(ConstraintMode::NormalOnly, c.velocity));
            const SaddleSystem sys = assemble_nitsche_brinkman_tangential(space, coeffs, aopt);
            return finish_solve(sub, std::move(space), sys);
        }
        case Formulation::NitscheSlip: {
            FESpace space = build_space(sub, BoundarySpec::uniform(ConstraintMode::Unconstrained));
            const SaddleSystem sys = assemble_nitsche_slip(
                space, coeffs, BoundarySpec::uniform(ConstraintMode::NormalOnly, c.velocity), aopt);
            return finish_solve(sub, std::move(space), sys);
        }
        case Formulation::NitscheElasticity: {
            FESpace space = build_space(sub, BoundarySpec::uniform(ConstraintMode::Unconstrained));
            const SaddleSystem sys = assemble_nitsche_elasticity(
                space, coeffs, BoundarySpec::uniform(ConstraintMode::FullDirichlet, c.velocity), aopt);
            return finish_solve(sub, std::move(space), sys);
        }
    }
    throw ConfigError("unknown formulation");
}

double cooks_tip_displacement(const CooksSetup& setup, bool compatible, const RunOptions& options) {
    auto sub = std::make_shared<const SubdividedMesh>(subdivide(setup.mesh, BoundarySplit::NormalOrMidpoint));
    SpaceOptions sopt;
    sopt.with_bubbles = compatible;
    FESpace space = build_space(sub, setup.boundary, sopt);
    AssemblyOptions aopt;
    aopt.threads = options.threads;
    const SaddleSystem sys = assemble_elasticity(space, setup.coefficients, aopt);
    const CaseSolution sol = finish_solve(sub, std::move(space), sys);
    return sol.fields.velocity[sol.space->vertex_dof(setup.tip_vertex, 1)];
}

// ---------------------------------------------------------------------------
// Errors

ErrorRecord error_norms(const FESpace& space, const FieldSolution& sol, const ManufacturedCase& c) {
    const MacroMesh& mesh = space.mesh();
    const bool with_p = c.model == Model::Brinkman && c.pressure && !sol.pressure.empty();
    std::vector<double> p0;
    if (with_p) p0 = project_p0(c.pressure, mesh);

    double l2u = 0, h1u = 0, l2p = 0, p0p = 0, div = 0, energy = 0;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const LocalElement& el = space.element(t);
        const auto vals = local_node_values(space, sol.velocity, t);
        const double mu = c.coefficients.mu_at(t);
        const double sigma = c.coefficients.sigma_at(t);
        const double lambda = c.coefficients.lambda;
        const double ph = with_p ? sol.pressure[t] : 0.0;
        if (with_p) p0p += el.area * (p0[t] - ph) * (p0[t] - ph);

        for (int s = 0; s < kSubTriangles; ++s) {
            const auto ids = subtriangle_nodes(s);
            const Vec2 a = el.nodes[ids[0]], b = el.nodes[ids[1]], cc = el.nodes[ids[2]];
            const Mat2 gh = subtriangle_gradient(space, sol.velocity, t, s);
            for (const auto& q : quadrature_rule(kErrorDegree)) {
                const double l1 = q.point.x, l2 = q.point.y, l0 = 1.0 - l1 - l2;
                const Vec2 x = l0 * a + l1 * b + l2 * cc;
                const double w = q.weight * 2.0 * el.sub_areas[s];
                const Vec2 e = c.velocity(x) - (l0 * vals[ids[0]] + l1 * vals[ids[1]] + l2 * vals[ids[2]]);
                const Mat2 ge = c.velocity_gradient(x) - gh;
                const double de = ge.trace();
                l2u += w * dot(e, e);
                h1u += w * ddot(ge, ge);
                div += w * de * de;
                if (c.model == Model::Elasticity) {
                    const Mat2 se = ge.sym();
                    energy += w * (2.0 * mu * ddot(se, se) + lambda * de * de);
                } else {
                    const double pe = with_p ? c.pressure(x) - ph : 0.0;
                    l2p += w * pe * pe;
                    energy += w * (mu * ddot(ge, ge) + sigma * dot(e, e) + de * de + pe * pe / (mu + sigma));
                }
            }
        }
    }
    return {std::sqrt(l2u), std::sqrt(h1u), std::sqrt(l2p), std::sqrt(p0p), std::sqrt(div), std::sqrt(energy)};
}

double divergence_defect(const FESpace& space, const FieldSolution& sol, const ScalarFn& g) {
    std::vector<double> g0(space.mesh().num_triangles(), 0.0);
    if (g) g0 = project_p0(g, space.mesh());
    double worst = 0.0;
    for (int t = 0; t < space.mesh().num_triangles(); ++t) {
        worst = std::max(worst, std::abs(macro_divergence(space, sol.velocity, t).value - g0[t]));
    }
    return worst;
}

double boundary_flux(const FESpace& space, const FieldSolution& sol) {
    const MacroMesh& mesh = space.mesh();
    double flux = 0.0;
    for (int e = 0; e < mesh.num_edges(); ++e) {
        const Edge& edge = mesh.edges()[e];
        if (!edge.on_boundary()) continue;
        const int t = edge.tris[0];
        int k = 0;
        while (mesh.triangle_edge(t, k) != e) ++k;
        const auto vals = local_node_values(space, sol.velocity, t);
        const auto nodes = space.element(t).nodes;
        const Vec2 n = mesh.outward_normal(e);
        const int a = k, m = 3 + k, b = (k + 1) % 3;
        flux += 0.5 * norm(nodes[m] - nodes[a]) * dot(vals[a] + vals[m], n);
        flux += 0.5 * norm(nodes[b] - nodes[m]) * dot(vals[m] + vals[b], n);
    }
    return flux;
}

// ---------------------------------------------------------------------------
// Studies

double fit_slope(const std::vector<double>& h, const std::vector<double>& err, int last) {
    const int n = static_cast<int>(std::min(h.size(), err.size()));
    const int first = std::max(0, n - last);
    const int m = n - first;
    if (m < 2) return std::numeric_limits<double>::quiet_NaN();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = first; i < n; ++i) {
        if (!(err[i] > 0.0) || !(h[i] > 0.0)) return std::numeric_limits<double>::quiet_NaN();
        const double x = std::log(h[i]), y = std::log(err[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

ConvergenceTable run_convergence(const ManufacturedCase& c, const std::vector<int>& levels,
                                 const RunOptions& options,
                                 const std::function<void(int, const CaseSolution&)>& on_level) {
    if (levels.size() < 3) throw ConfigError("a convergence study needs at least three levels");
    ConvergenceTable table;
    table.case_name = c.name;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        const CaseSolution sol = solve_case(c, levels[i], options);
        ConvergenceRecord rec;
        rec.level = static_cast<int>(i);
        rec.n = levels[i];
        rec.nno = sol.subdivision->mesh().num_vertices();
        rec.h = 1.0 / std::sqrt(static_cast<double>(rec.nno));
        rec.errors = error_norms(*sol.space, sol.fields, c);
        if (c.model == Model::Brinkman) {
            rec.max_divergence_defect = divergence_defect(*sol.space, sol.fields, c.coefficients.mass_source);
        }
        rec.relative_residual = sol.report.relative_residual;
        table.rows.push_back(rec);
        if (on_level) on_level(rec.level, sol);
    }
    std::vector<double> h;
    for (const auto& r : table.rows) h.push_back(r.h);
    const auto slope = [&](double ErrorRecord::*field) {
        std::vector<double> e;
        for (const auto& r : table.rows) e.push_back(r.errors.*field);
        return fit_slope(h, e);
    };
    table.slopes = {slope(&ErrorRecord::l2_u), slope(&ErrorRecord::h1_u), slope(&ErrorRecord::l2_p),
                    slope(&ErrorRecord::p0_p), slope(&ErrorRecord::div),  slope(&ErrorRecord::energy)};
    return table;
}

void write_convergence_csv(std::ostream& out, const ConvergenceTable& table) {
    out << "level,n,NNO,h,err_l2_u,err_h1_u,err_l2_p,err_p0p,err_div,"
           "slope_l2_u,slope_h1_u,slope_l2_p,slope_p0p,slope_div\n";
    const auto flags = out.flags();
    const auto precision = out.precision();
    out << std::scientific << std::setprecision(17);
    const ErrorRecord& s = table.slopes;
    for (const auto& r : table.rows) {
        const ErrorRecord& e = r.errors;
        out << r.level << ',' << r.n << ',' << r.nno << ',' << r.h << ',' << e.l2_u << ',' << e.h1_u << ','
            << e.l2_p << ',' << e.p0_p << ',' << e.div << ',' << s.l2_u << ',' << s.h1_u << ',' << s.l2_p << ','
            << s.p0_p << ',' << s.div << '\n';
    }
    out.flags(flags);
    out.precision(precision);
}

std::vector<LockingRow> run_locking_study(const std::vector<double>& nus, int n, const RunOptions& options) {
    std::vector<LockingRow> rows;
    for (double nu : nus) {
        const CooksSetup setup = case_cooks(nu, n);
        rows.push_back({nu, cooks_tip_displacement(setup, true, options),
                        cooks_tip_displacement(setup, false, options)});
    }
    return rows;
}

CouplingSetup make_coupling_setup(CouplingScenario scenario, double mu, int grid) {
    if (grid < 2 || grid % 2 != 0) throw ConfigError("coupling grid must be a positive even number of cells");
    if (!(mu >= 0.0)) throw ConfigError("mu must be non-negative");
    CouplingSetup s;
    s.mesh = generate_rectangle_mesh(grid, grid, {0.0, 0.0}, {2.0, 2.0});
    const int nt = s.mesh.num_triangles();
    s.coefficients.mu_field.resize(nt);
    s.coefficients.sigma_field.resize(nt);
    for (int t = 0; t < nt; ++t) {
        const auto p = s.mesh.triangle_points(t);
        const Vec2 c = centroid(p[0], p[1], p[2]);
        if (scenario == CouplingScenario::Normal) {
            const bool stokes = c.y <= 1.0;
            s.coefficients.mu_field[t] = stokes ? 1.0 : mu;
            s.coefficients.sigma_field[t] = stokes ? 0.0 : 1.0;
        } else {
            const bool stokes = c.x > 1.0;
            s.coefficients.mu_field[t] = stokes ? 100.0 : mu;
            s.coefficients.sigma_field[t] = stokes ? 0.0 : 1e3;
        }
    }
    s.coefficients.body_force = [](const Vec2&) { return Vec2{0.0, 100.0}; };
    s.coefficients.mass_source = [](const Vec2&) { return 0.0; };
    s.boundary.default_kind = BcKind::Natural;
    s.boundary.per_tag["right"] = BcKind::Dirichlet;
    s.boundary.per_tag["left"] =
        scenario == CouplingScenario::Normal ? BcKind::Dirichlet : BcKind::NormalOnly;
    return s;
}

std::vector<CouplingResult> run_brinkman_coupling(CouplingScenario scenario, const std::vector<double>& mus,
                                                  int grid, const RunOptions& options) {
    std::vector<CouplingResult> results;
    for (double mu : mus) {
        const CouplingSetup setup = make_coupling_setup(scenario, mu, grid);
        auto sub = std::make_shared<const SubdividedMesh>(subdivide(setup.mesh));
        FESpace space = build_space(sub, setup.boundary);
        AssemblyOptions aopt;
        aopt.threads = options.threads;
        const SaddleSystem sys = assemble_brinkman(space, setup.coefficients, aopt);
        CouplingResult r;
        r.mu = mu;
        r.solution = finish_solve(sub, std::move(space), sys);
        const FESpace& sp = *r.solution.space;
        r.max_divergence_defect = divergence_defect(sp, r.solution.fields, setup.coefficients.mass_source);
        r.net_flux = boundary_flux(sp, r.solution.fields);
        const MacroMesh& mesh = sp.mesh();
        for (int v = 0; v < mesh.num_vertices(); ++v) {
            const Vec2 x = mesh.vertex(v);
            if (std::abs(x.y - 1.0) < 1e-12) {
                const Mat2& f = sp.vertex_frame(v);
                const double c0 = r.solution.fields.velocity[sp.vertex_dof(v, 0)];
                const double c1 = r.solution.fields.velocity[sp.vertex_dof(v, 1)];
                r.profile.emplace_back(x.x, f(1, 0) * c0 + f(1, 1) * c1);
            }
        }
        std::sort(r.profile.begin(), r.profile.end());
        results.push_back(std::move(r));
    }
    return results;
}

int second_difference_sign_changes(const std::vector<std::pair<double, double>>& profile, double center,
                                   double half_width, double noise) {
    double scale = 0.0;
    for (const auto& [x, u] : profile) scale = std::max(scale, std::abs(u));
    int changes = 0;
    int last_sign = 0;
    for (std::size_t i = 1; i + 1 < profile.size(); ++i) {
        if (std::abs(profile[i].first - center) > half_width) continue;
        const double d2 = profile[i + 1].second - 2.0 * profile[i].second + profile[i - 1].second;
        if (std::abs(d2) <= noise * scale) continue;
        const int sign = d2 > 0.0 ? 1 : -1;
        if (last_sign != 0 && sign != last_sign) ++changes;
        last_sign = sign;
    }
    return changes;
}

}  // namespace mce
