#include <gtest/gtest.h>

#include <random>

#include <Eigen/Dense>

#include "mce/error.hpp"
#include "mce/solver.hpp"
#include "mce/forms.hpp"

using namespace mce;

namespace {

SaddleSystem dense_system(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, int nv, int np, int nm) {
    SaddleSystem s;
    s.matrix = a.sparseView();
    s.rhs = b;
    s.num_velocity = nv;
    s.num_pressure = np;
    s.num_multiplier = nm;
    return s;
}

Eigen::MatrixXd random_spd(int n, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> d;
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = d(rng);
    return m * m.transpose() + n * Eigen::MatrixXd::Identity(n, n);
}

}  // namespace

TEST(Solver, Identity) {
    Eigen::VectorXd b(4);
    b << 1, -2, 3, 0.5;
    const SolveReport r = solve(dense_system(Eigen::MatrixXd::Identity(4, 4), b, 4, 0, 0));
    EXPECT_LT((r.solution - b).norm(), 1e-15);
    EXPECT_LT(r.relative_residual, 1e-15);
    EXPECT_NEAR(r.condition_estimate, 1.0, 1e-12);
    EXPECT_NEAR(r.log_abs_determinant, 0.0, 1e-14);
}

TEST(Solver, NeedsPivoting) {
    Eigen::MatrixXd a(2, 2);
    a << 0, 1, 1, 0;
    Eigen::VectorXd b(2);
    b << 1, 2;
    const SolveReport r = solve(dense_system(a, b, 1, 1, 0));
    EXPECT_NEAR(r.solution[0], 2.0, 1e-15);
    EXPECT_NEAR(r.solution[1], 1.0, 1e-15);
}

TEST(Solver, ConstantPressureModeIsReported) {
    // [A -B^T; -B 0] with B annihilating the constant pressure vector
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4, 4);
    a(0, 0) = 2;
    a(1, 1) = 3;
    a(0, 2) = a(2, 0) = -1;
    a(0, 3) = a(3, 0) = 1;
    a(1, 2) = a(2, 1) = -1;
    a(1, 3) = a(3, 1) = 1;
    try {
        solve(dense_system(a, Eigen::VectorXd::Ones(4), 2, 2, 0));
        FAIL() << "expected SolverError";
    } catch (const SolverError& e) {
        EXPECT_EQ(e.block(), "pressure");
        EXPECT_NE(std::string(e.what()).find("multiplier"), std::string::npos);
    }
}

TEST(Solver, NearlySingularIsRejected) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(3, 3);
    a(2, 2) = 1e-16;
    EXPECT_THROW(solve(dense_system(a, Eigen::VectorXd::Ones(3), 3, 0, 0)), SolverError);
}

TEST(Solver, MismatchedBlocks) {
    EXPECT_THROW(solve(dense_system(Eigen::MatrixXd::Identity(3, 3), Eigen::VectorXd::Ones(3), 2, 0, 0)),
                 SolverError);
}

TEST(Solver, RandomSpd) {
    const Eigen::MatrixXd a = random_spd(50, 3);
    Eigen::VectorXd x(50);
    for (int i = 0; i < 50; ++i) x[i] = std::sin(i + 1.0);
    const Eigen::VectorXd b = a * x;
    const SolveReport r = solve(dense_system(a, b, 50, 0, 0));
    EXPECT_LT((r.solution - x).norm() / x.norm(), 1e-12);
    EXPECT_LT(r.relative_residual, 1e-14);
    const Eigen::PartialPivLU<Eigen::MatrixXd> dense(a);
    double logdet = 0.0;
    for (int i = 0; i < 50; ++i) logdet += std::log(std::abs(dense.matrixLU()(i, i)));
    EXPECT_NEAR(r.log_abs_determinant, logdet, 1e-9 * std::abs(logdet));
}

TEST(Solver, RefinementNeverIncreasesTheResidual) {
    const Eigen::MatrixXd a = random_spd(30, 8);
    const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(30, -1, 1);
    const SaddleSystem sys = dense_system(a, b, 30, 0, 0);
    const DirectSolver solver(sys);
    Eigen::VectorXd x0 = Eigen::VectorXd::Constant(30, 0.1);
    const double r0 = (b - a * x0).norm() / b.norm();
    const SolveReport r = solver.refine(x0, 3);
    EXPECT_LE(r.relative_residual, r0);
    EXPECT_LT(r.relative_residual, 1e-14);

    const SolveReport exact = solver.solve();
    const SolveReport again = refine_iteratively(sys, exact.solution);
    EXPECT_LE(again.relative_residual, exact.relative_residual);
    EXPECT_LT((again.solution - exact.solution).norm(), 1e-14 * exact.solution.norm());
}

TEST(Solver, Deterministic) {
    const Eigen::MatrixXd a = random_spd(40, 21);
    const SaddleSystem sys = dense_system(a, Eigen::VectorXd::Ones(40), 40, 0, 0);
    const SolveReport r1 = solve(sys), r2 = solve(sys);
    EXPECT_EQ(r1.solution, r2.solution);
    EXPECT_EQ(r1.condition_estimate, r2.condition_estimate);
}

TEST(Solver, MeanZeroMultiplierAgainstDenseLu) {
    const auto sub = std::make_shared<const SubdividedMesh>(subdivide(generate_unit_square_mesh(3)));
    ProblemCoefficients c;
    c.mu = 1.0;
    c.sigma = 0.5;
    c.body_force = [](const Vec2& x) { return Vec2{std::sin(4 * x.y), x.x * x.y}; };
    const FESpace strong = build_space(sub, BoundarySpec::uniform(ConstraintMode::FullDirichlet));
    const FESpace free = build_space(sub, BoundarySpec::uniform(ConstraintMode::Unconstrained));
    // the slip system has a nonzero multiplier, the strong one a zero multiplier
    for (const SaddleSystem& sys : {assemble_brinkman(strong, c), assemble_nitsche_slip(free, c)}) {
        ASSERT_EQ(sys.num_multiplier, 1);
        const Eigen::MatrixXd dense(sys.matrix);
        const Eigen::FullPivLU<Eigen::MatrixXd> lu(dense);
        ASSERT_TRUE(lu.isInvertible());
        const Eigen::VectorXd x = lu.solve(sys.rhs);
        const SolveReport r = solve(sys);
        EXPECT_LT((r.solution - x).norm(), 1e-10 * x.norm());
        EXPECT_LT(r.relative_residual, 1e-12);
        double logdet = 0.0;
        for (int i = 0; i < dense.rows(); ++i) logdet += std::log(std::abs(lu.matrixLU()(i, i)));
        EXPECT_NEAR(r.log_abs_determinant, logdet, 1e-8 * std::abs(logdet));
    }
}
