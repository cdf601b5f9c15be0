#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "mce/space.hpp"

namespace mce {

/// Material and data of the elasticity and Brinkman problems. mu and sigma may be
/// overridden per macro triangle through the `*_field` vectors.
struct ProblemCoefficients {
    double mu = 1.0;      ///< viscosity or shear modulus
    double lambda = 0.0;  ///< first Lame coefficient (elasticity)
    double sigma = 0.0;   ///< friction coefficient (Brinkman)
    double gamma = 10.0;  ///< Nitsche penalty
    std::vector<double> mu_field;
    std::vector<double> sigma_field;
    VectorFn body_force;
    ScalarFn mass_source;
    /// Surface loads on natural boundary edges, by tag.
    std::map<std::string, VectorFn> traction;

    double mu_at(int t) const { return mu_field.empty() ? mu : mu_field[t]; }
    double sigma_at(int t) const { return sigma_field.empty() ? sigma : sigma_field[t]; }
};

enum class MeanZero { Auto, On, Off };

struct AssemblyOptions {
    int threads = 1;
    /// Auto appends the mean-zero pressure multiplier when no boundary edge is natural.
    MeanZero mean_zero = MeanZero::Auto;
};

/// Reduced linear system over [free velocity | pressure | multiplier].
///
/// Pressure test rows are negated so that the Brinkman saddle point form
/// a(u,v) - b(p,v) + b(q,u) becomes the symmetric matrix [A -B^T; -B 0].
struct SaddleSystem {
    Eigen::SparseMatrix<double> matrix;
    Eigen::VectorXd rhs;
    int num_velocity = 0;
    int num_pressure = 0;
    int num_multiplier = 0;
    bool symmetric = true;
    std::vector<std::string> warnings;

    int size() const { return num_velocity + num_pressure + num_multiplier; }
    /// "velocity", "pressure" or "multiplier".
    std::string block_of(int row) const;
};

/// Velocity in the full space numbering plus one pressure value per macro triangle.
struct FieldSolution {
    std::vector<double> velocity;
    std::vector<double> pressure;
    double multiplier = 0.0;
};

FieldSolution extract_solution(const FESpace& space, const SaddleSystem& system,
                               const Eigen::VectorXd& x);

/// a_E(u,v) = (2 mu eps(u), eps(v)) + (lambda div u, div v) with load (f, v) plus
/// tractions on natural edges. Velocity block only.
SaddleSystem assemble_elasticity(const FESpace& space, const ProblemCoefficients& coeffs,
                                 const AssemblyOptions& options = {});

/// Brinkman saddle point system with strongly imposed boundary conditions.
SaddleSystem assemble_brinkman(const FESpace& space, const ProblemCoefficients& coeffs,
                               const AssemblyOptions& options = {});

/// Elasticity on an unconstrained space with Nitsche terms on the edges whose kind in
/// `weak` is Dirichlet (full vector datum) or NormalOnly (normal datum, zero tangential
/// traction). The lambda part of the normal penalty acts on edge means of u.n.
SaddleSystem assemble_nitsche_elasticity(const FESpace& space, const ProblemCoefficients& coeffs,
                                         const BoundarySpec& weak,
                                         const AssemblyOptions& options = {});

/// Brinkman on a normal-constrained space with the tangential datum imposed by Nitsche's
/// method on every normal-only edge. All added terms carry mu.
SaddleSystem assemble_nitsche_brinkman_tangential(const FESpace& space,
                                                  const ProblemCoefficients& coeffs,
                                                  const AssemblyOptions& options = {});

/// Brinkman on an unconstrained space with the normal datum imposed weakly on edges whose
/// kind in `weak` is NormalOnly (slip). The pressure test function is absent from the
/// transposed consistency term, so the matrix is not symmetric.
SaddleSystem assemble_nitsche_slip(const FESpace& space, const ProblemCoefficients& coeffs,
                                   const BoundarySpec& weak = BoundarySpec::uniform(ConstraintMode::NormalOnly),
                                   const AssemblyOptions& options = {});

/// Coordinate-format Matrix Market export (1-based, `general`).
void write_matrix_market(std::ostream& out, const Eigen::SparseMatrix<double>& matrix);

}  // namespace mce
