#include "mce_cli/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>

#include <CLI11.hpp>

#include "mce/error.hpp"
#include "mce/io.hpp"
#include "mce/problems.hpp"

namespace mce::cli {

namespace {

namespace fs = std::filesystem;

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    return out;
}

RunOptions run_options(const RunConfig& cfg) {
    RunOptions opts;
    opts.threads = cfg.threads;
    if (cfg.gamma) opts.gamma = *cfg.gamma;
    return opts;
}

MacroMesh load_mesh(const std::string& path, std::ostream& out) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open mesh file '" + path + "'");
    std::vector<std::string> warnings;
    MacroMesh mesh = read_mesh(in, &warnings);
    for (const auto& w : warnings) out << "warning: " << w << '\n';
    return mesh;
}

void print_errors(std::ostream& out, const ErrorRecord& e) {
    out << "  |u-u_h|_L2 = " << e.l2_u << "  |u-u_h|_H1 = " << e.h1_u << "  |p-p_h|_L2 = " << e.l2_p
        << "  |pi0 p-p_h| = " << e.p0_p << '\n';
}

int run_manufactured(const RunConfig& cfg, std::ostream& out) {
    ManufacturedCase c;
    if (cfg.subcommand == "stokes") {
        c = case_stokes();
        if (!cfg.mu.empty()) c.coefficients.mu = cfg.mu.front();
        if (cfg.sigma) c.coefficients.sigma = *cfg.sigma;
    } else {
        c = case_darcy(cfg.mu.empty() ? 0.0 : cfg.mu.front(), cfg.sigma.value_or(1.0));
    }
    if (cfg.subcommand == "stokes" && (!cfg.mu.empty() || cfg.sigma)) {
        // keep the exact solution consistent with the chosen coefficients
        const double mu = c.coefficients.mu, sigma = c.coefficients.sigma;
        const VectorFn u = c.velocity;
        c.coefficients.body_force = [mu, sigma, u](const Vec2& x) {
            return (mu - 1.0) * Vec2{-120.0 * x.x * x.y, -60.0 * x.x * x.x + 60.0 * x.y * x.y} + sigma * u(x);
        };
    }
    if (cfg.bc == "strong") c.formulation = Formulation::Strong;
    else if (cfg.bc == "nitsche-tangential") c.formulation = Formulation::NitscheTangential;
    else if (cfg.bc == "nitsche-slip") c.formulation = Formulation::NitscheSlip;

    const RunOptions opts = run_options(cfg);
    out << c.name << ": consistency residual " << consistency_residual(c, 100, cfg.seed) << '\n';

    const fs::path dir(cfg.out);
    if (!cfg.mesh_file.empty()) {
        const MacroMesh mesh = load_mesh(cfg.mesh_file, out);
        c.domain = [mesh](int) { return mesh; };
        const CaseSolution sol = solve_case(c, 0, opts);
        out << "mesh " << cfg.mesh_file << ": " << mesh.num_triangles() << " triangles\n";
        print_errors(out, error_norms(*sol.space, sol.fields, c));
        out << "  max divergence defect = " << divergence_defect(*sol.space, sol.fields, c.coefficients.mass_source)
            << '\n';
        write_vtk((dir / (c.name + "_solution.vtk")).string(), *sol.space, sol.fields);
        return 0;
    }

    const int finest = static_cast<int>(cfg.levels.size()) - 1;
    const ConvergenceTable table = run_convergence(c, cfg.levels, opts, [&](int level, const CaseSolution& sol) {
        if (level == finest) write_vtk((dir / (c.name + "_solution.vtk")).string(), *sol.space, sol.fields);
    });
    {
        std::ofstream csv = open_output(dir / (c.name + "_convergence.csv"));
        write_convergence_csv(csv, table);
    }
    for (const auto& r : table.rows) {
        out << "n = " << r.n << " (NNO " << r.nno << ")\n";
        print_errors(out, r.errors);
    }
    const ErrorRecord& s = table.slopes;
    out << "slopes: L2 u " << s.l2_u << ", H1 u " << s.h1_u << ", L2 p " << s.l2_p << ", pi0 p " << s.p0_p << '\n';
    return 0;
}

int run_cooks(const RunConfig& cfg, std::ostream& out) {
    const auto rows = run_locking_study(cfg.nu, cfg.grid.value_or(16), run_options(cfg));
    std::ofstream csv = open_output(fs::path(cfg.out) / "cooks_tips.csv");
    csv << "nu,tip_compatible,tip_affine\n" << std::scientific << std::setprecision(17);
    for (const auto& r : rows) {
        csv << r.nu << ',' << r.tip_compatible << ',' << r.tip_affine << '\n';
        out << "nu = " << r.nu << ": tip " << r.tip_compatible << " (affine " << r.tip_affine << ")\n";
    }
    return 0;
}

int run_brinkman(const RunConfig& cfg, std::ostream& out) {
    const bool normal = cfg.scenario == "normal";
    const CouplingScenario scenario = normal ? CouplingScenario::Normal : CouplingScenario::Tangential;
    std::vector<double> mus = cfg.mu;
    if (mus.empty()) mus = normal ? std::vector<double>{1.0, 1e-2, 1e-3, 1e-6} : std::vector<double>{10.0, 1.0, 0.1, 0.01};
    const auto results = run_brinkman_coupling(scenario, mus, cfg.grid.value_or(40), run_options(cfg));

    const fs::path dir(cfg.out);
    const std::string stem = "brinkman_" + cfg.scenario;
    std::ofstream summary = open_output(dir / (stem + "_summary.csv"));
    summary << "mu,max_divergence_defect,net_flux,relative_residual,sign_changes\n"
            << std::scientific << std::setprecision(17);
    for (const auto& r : results) {
        const int changes = second_difference_sign_changes(r.profile, 1.0, 0.25);
        summary << r.mu << ',' << r.max_divergence_defect << ',' << r.net_flux << ','
                << r.solution.report.relative_residual << ',' << changes << '\n';
        const std::string tag = stem + "_mu" + format_double(r.mu);
        std::ofstream profile = open_output(dir / (tag + "_profile.csv"));
        profile << "x,u_y\n" << std::scientific << std::setprecision(17);
        for (const auto& [x, u] : r.profile) profile << x << ',' << u << '\n';
        write_vtk((dir / (tag + ".vtk")).string(), *r.solution.space, r.solution.fields);
        out << "mu = " << r.mu << ": divergence defect " << r.max_divergence_defect << ", sign changes "
            << changes << '\n';
    }
    return 0;
}

int run_mesh_info(const RunConfig& cfg, std::ostream& out) {
    const MacroMesh mesh = load_mesh(cfg.mesh_file, out);
    out << "vertices " << mesh.num_vertices() << '\n';
    out << "triangles " << mesh.num_triangles() << '\n';
    out << "edges " << mesh.num_edges() << " (" << mesh.num_boundary_edges() << " boundary)\n";
    std::map<std::string, int> tags;
    for (const Edge& e : mesh.edges()) {
        if (e.on_boundary()) ++tags[e.tag];
    }
    for (const auto& [tag, count] : tags) out << "  " << tag << ": " << count << '\n';
    double lo = 0.0, hi = 0.0;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const double a = mesh.triangle_area(t);
        lo = t == 0 ? a : std::min(lo, a);
        hi = t == 0 ? a : std::max(hi, a);
    }
    out << "area range " << lo << " .. " << hi << '\n';
    const auto issues = validate_mesh(mesh);
    for (const auto& issue : issues) out << "invalid: " << issue << '\n';
    if (!issues.empty()) return 1;
    subdivide(mesh);
    out << "subdivision ok\n";
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Divergence-free macro element solver for elasticity and Brinkman flow", "mce"};
    app.require_subcommand(1);

    std::map<std::string, std::string> given;
    std::string config_file;
    std::string experiment;

    CLI::App* run = app.add_subcommand("run", "Run an experiment: stokes, darcy, cooks or brinkman");
    run->add_option("experiment", experiment, "stokes | darcy | cooks | brinkman")->required();
    const std::map<std::string, std::string> help{
        {"levels", "Comma separated grid sizes"},
        {"nu", "Comma separated Poisson ratios (cooks)"},
        {"mu", "Viscosity; comma separated list for brinkman"},
        {"sigma", "Friction coefficient"},
        {"gamma", "Nitsche penalty"},
        {"bc", "strong | nitsche-tangential | nitsche-slip"},
        {"mesh-file", "Solve on this mesh instead of the generated ones"},
        {"out", "Output directory"},
        {"threads", "Assembly threads"},
        {"grid", "Cells per side (cooks, brinkman)"},
        {"seed", "Seed of the randomized consistency check"},
        {"scenario", "normal | tangential (brinkman)"},
    };
    for (const auto& key : config_keys()) run->add_option("--" + key, given[key], help.at(key));
    run->add_option("--config", config_file, "key = value file; command line flags take precedence");

    CLI::App* info = app.add_subcommand("mesh-info", "Summarize and validate a mesh file");
    info->add_option("--mesh-file", given["mesh-file"], "Mesh file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 1;
    }

    try {
        RunConfig cfg;
        cfg.subcommand = info->parsed() ? "mesh-info" : experiment;
        if (!config_file.empty()) {
            std::ifstream in(config_file);
            if (!in) throw ConfigError("cannot open config file '" + config_file + "'");
            read_config(in, cfg);
        }
        CLI::App* used = info->parsed() ? info : run;
        for (const auto& [key, value] : given) {
            const CLI::Option* opt = used->get_option_no_throw("--" + key);
            if (opt != nullptr && opt->count() > 0) cfg.set(key, value);
        }
        cfg.validate();
        if (cfg.subcommand == "mesh-info") return run_mesh_info(cfg, out);

        fs::create_directories(cfg.out);
        if (cfg.subcommand == "cooks") return run_cooks(cfg, out);
        if (cfg.subcommand == "brinkman") return run_brinkman(cfg, out);
        return run_manufactured(cfg, out);
    } catch (const SolverError& e) {
        err << "solver failure: " << e.what() << '\n';
        return 2;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace mce::cli
