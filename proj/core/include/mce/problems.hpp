#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "mce/forms.hpp"
#include "mce/solver.hpp"

namespace mce {

enum class Model { Elasticity, Brinkman };

/// How a case is discretized: strong or Nitsche boundary conditions.
enum class Formulation {
    Strong,               ///< constraints of `ManufacturedCase::mode` imposed on the space
    NitscheTangential,    ///< strong normal component, Nitsche on the tangential one (Brinkman)
    NitscheSlip,          ///< Nitsche on the normal component, unconstrained space (Brinkman)
    NitscheElasticity,    ///< all boundary data weakly, unconstrained space (elasticity)
};

/// Exact fields plus the data that makes them solve the governing equations.
struct ManufacturedCase {
    std::string name;
    Model model = Model::Brinkman;
    VectorFn velocity;
    TensorFn velocity_gradient;  ///< (grad u)_ij = d u_i / d x_j
    ScalarFn pressure;           ///< empty for elasticity
    ProblemCoefficients coefficients;
    ConstraintMode mode = ConstraintMode::FullDirichlet;
    Formulation formulation = Formulation::Strong;
    std::function<MacroMesh(int)> domain;
};

/// Stokes flow on the unit square: u = (20xy^3, 5x^4 - 5y^4), p = 60yx^2 - 20y^3 - 5, f = 0.
ManufacturedCase case_stokes();

/// Brinkman problem with the Darcy solution u = (-pi sin^2(pi x) sin(2 pi y),
/// pi sin(2 pi x) sin^2(pi y)), p = sin(pi x) - 2/pi on the unit square, u.n = 0 strongly.
/// For mu > 0 the tangential condition is imposed by Nitsche's method and f gains -mu lap u.
ManufacturedCase case_darcy(double mu = 0.0, double sigma = 1.0);

/// Linear elasticity with the divergence-free Stokes velocity as displacement:
/// f = -mu lap u, independent of lambda.
ManufacturedCase case_elasticity(double lambda, double mu = 1.0);

/// Largest scaled residual of the strong equations at random points (unit square),
/// with derivatives of the supplied gradient and pressure taken by central differences.
double consistency_residual(const ManufacturedCase& c, int samples = 100, unsigned seed = 7);

/// Plane-strain Lame parameters from Young's modulus and Poisson ratio.
double lame_lambda(double young, double nu);
double lame_mu(double young, double nu);

struct CooksSetup {
    MacroMesh mesh;
    ProblemCoefficients coefficients;
    BoundarySpec boundary;
    int tip_vertex = -1;  ///< vertex at (48, 60)
};

/// Cook's membrane, E = 200, clamped at x = 0, traction (0, 1) at x = 48.
/// Throws ConfigError unless 0 < nu < 0.5. The domain has obtuse corners at (48, 44) and
/// (0, 44), so solvers subdivide it with BoundarySplit::NormalOrMidpoint.
CooksSetup case_cooks(double nu, int n = 16);

struct RunOptions {
    int threads = 1;
    double gamma = 0.0;  ///< overrides the case penalty when positive
};

/// Everything produced by one discrete solve.
struct CaseSolution {
    std::shared_ptr<const SubdividedMesh> subdivision;
    std::shared_ptr<const FESpace> space;
    FieldSolution fields;
    SolveReport report;
};

CaseSolution solve_case(const ManufacturedCase& c, int n, const RunOptions& options = {});

/// Vertical tip displacement of Cook's membrane with the compatible element or with plain
/// vector P1 elements on the same macro mesh.
double cooks_tip_displacement(const CooksSetup& setup, bool compatible, const RunOptions& options = {});

struct ErrorRecord {
    double l2_u = 0.0;
    double h1_u = 0.0;     ///< H1 seminorm
    double l2_p = 0.0;
    double p0_p = 0.0;     ///< ||pi_0 p - p_h||
    double div = 0.0;      ///< ||div u - div u_h||
    double energy = 0.0;   ///< |||u - u_h|||_E for elasticity, |||u - u_h, p - p_h|||_B for Brinkman
};

/// Errors by degree-6 quadrature on every subtriangle.
ErrorRecord error_norms(const FESpace& space, const FieldSolution& sol, const ManufacturedCase& c);

struct ConvergenceRecord {
    int level = 0;
    int n = 0;
    int nno = 0;  ///< number of macro vertices
    double h = 0.0;  ///< 1 / sqrt(nno)
    ErrorRecord errors;
    double max_divergence_defect = 0.0;
    double relative_residual = 0.0;
};

struct ConvergenceTable {
    std::string case_name;
    std::vector<ConvergenceRecord> rows;
    ErrorRecord slopes;  ///< least-squares log-log slopes over the last three levels
};

/// Least-squares slope of log(err) against log(h) over the last `last` entries.
double fit_slope(const std::vector<double>& h, const std::vector<double>& err, int last = 3);

/// Needs at least three levels. `on_level` sees every discrete solution before it is dropped.
ConvergenceTable run_convergence(const ManufacturedCase& c, const std::vector<int>& levels,
                                 const RunOptions& options = {},
                                 const std::function<void(int, const CaseSolution&)>& on_level = {});

/// `level,n,NNO,h,err_l2_u,err_h1_u,err_l2_p,err_p0p,err_div,slope_l2_u,...` with one
/// header row and full-precision scientific floats.
void write_convergence_csv(std::ostream& out, const ConvergenceTable& table);

/// max_T |(div u_h)|_T - (pi_0 g)|_T| over macro triangles.
double divergence_defect(const FESpace& space, const FieldSolution& sol, const ScalarFn& g);

/// Net outflow of the discrete velocity through the domain boundary.
double boundary_flux(const FESpace& space, const FieldSolution& sol);

struct LockingRow {
    double nu = 0.0;
    double tip_compatible = 0.0;
    double tip_affine = 0.0;
};

std::vector<LockingRow> run_locking_study(const std::vector<double>& nus, int n = 16,
                                          const RunOptions& options = {});

enum class CouplingScenario { Normal, Tangential };

/// Coupled Stokes-Brinkman flow on (0,2)^2 with f = (0, 100).
/// Normal: u = 0 at x = 0 and x = 2; mu = 1, sigma = 0 for y <= 1 and sigma = 1 with the
/// given mu above. Tangential: u.n = 0 at x = 0, u = 0 at x = 2; mu = 100, sigma = 0 for
/// x > 1 and sigma = 1e3 with the given mu for x <= 1. Top and bottom are traction free.
struct CouplingSetup {
    MacroMesh mesh;
    ProblemCoefficients coefficients;
    BoundarySpec boundary;
};

/// `grid` cells per side; must be even so that x = 1 and y = 1 are mesh lines.
CouplingSetup make_coupling_setup(CouplingScenario scenario, double mu, int grid);

struct CouplingResult {
    double mu = 0.0;
    CaseSolution solution;
    double max_divergence_defect = 0.0;
    double net_flux = 0.0;
    /// (x, u_y) at the mesh vertices on y = 1.
    std::vector<std::pair<double, double>> profile;
};

std::vector<CouplingResult> run_brinkman_coupling(CouplingScenario scenario, const std::vector<double>& mus,
                                                  int grid = 40, const RunOptions& options = {});

/// Sign changes of the second difference of the profile values restricted to
/// |x - center| <= half_width. Second differences below `noise` * max|u| count as zero.
int second_difference_sign_changes(const std::vector<std::pair<double, double>>& profile, double center,
                                   double half_width, double noise = 1e-6);

}  // namespace mce
