#include "mce/solver.hpp"

#include <chrono>
#include <cmath>
#include <random>

#include <Eigen/SparseLU>

#include "mce/error.hpp"

namespace mce {

namespace {

using SparseMatrix = Eigen::SparseMatrix<double>;
using LU = Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>;

constexpr double kSingularCondition = 1e13;
constexpr int kProbes = 2;

double one_norm(const SparseMatrix& a) {
    double best = 0.0;
    for (int c = 0; c < a.outerSize(); ++c) {
        double sum = 0.0;
        for (SparseMatrix::InnerIterator it(a, c); it; ++it) sum += std::abs(it.value());
        best = std::max(best, sum);
    }
    return best;
}

Eigen::VectorXd probe_vector(int n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Eigen::VectorXd r(n);
    for (int i = 0; i < n; ++i) r[i] = dist(rng);
    return r;
}

/// Name of the block holding the largest share of a (near) null vector.
std::string dominant_block(const SaddleSystem& sys, const Eigen::VectorXd& y) {
    const double v = y.head(sys.num_velocity).squaredNorm();
    const double p = y.segment(sys.num_velocity, sys.num_pressure).squaredNorm();
    const double m = y.tail(sys.num_multiplier).squaredNorm();
    if (p >= v && p >= m) return "pressure";
    if (v >= m) return "velocity";
    return "multiplier";
}

[[noreturn]] void report_singular(const SaddleSystem& sys, const Eigen::VectorXd& null_direction) {
    const std::string block = dominant_block(sys, null_direction);
    std::string hint;
    if (block == "pressure" && sys.num_multiplier == 0) {
        hint = " (pressure is only determined up to a constant; add the mean-zero multiplier)";
    }
    throw SolverError("singular system: null space concentrated in the " + block + " block" + hint, block);
}

}  // namespace

/// The mean-zero multiplier adds a dense row that ruins the fill-reducing ordering. When
/// the constant pressure z spans the kernel of the remaining block K, the bordered system
/// [K a; c^T 0] is solved through T = K with pressure column j replaced by a: x = x^ + alpha z
/// with x^_j = 0, T (x^ with lambda in slot j) = b and alpha = (d - c^T x^) / (c^T z).
/// log|det M| = log|det T| + log|c^T z|.
struct DirectSolver::Impl {
    const SaddleSystem& system;
    LU lu;
    bool folded = false;
    int pinned = -1;
    Eigen::VectorXd border_row;  // c restricted to the first n - 1 unknowns
    double border_z = 0.0;       // c^T z
    double norm1 = 0.0;
    double condition = 0.0;
    double factor_seconds = 0.0;

    explicit Impl(const SaddleSystem& sys) : system(sys) {}

    Eigen::VectorXd residual(const Eigen::VectorXd& x) const { return system.rhs - system.matrix * x; }

    double relative(const Eigen::VectorXd& r) const {
        const double b = system.rhs.norm();
        return b > 0.0 ? r.norm() / b : r.norm();
    }

    Eigen::VectorXd apply_inverse(const Eigen::VectorXd& r) const {
        if (!folded) return lu.solve(r);
        const int m = static_cast<int>(r.size()) - 1;
        Eigen::VectorXd t = lu.solve(r.head(m));
        const double lambda = t[pinned];
        t[pinned] = 0.0;
        const double alpha = (r[m] - border_row.dot(t)) / border_z;
        Eigen::VectorXd x(m + 1);
        x.head(m) = t;
        x.segment(system.num_velocity, system.num_pressure).array() += alpha;
        x[m] = lambda;
        return x;
    }

    double log_abs_determinant() const {
        return lu.logAbsDeterminant() + (folded ? std::log(std::abs(border_z)) : 0.0);
    }

    /// Sets up the folded factorization when the structure allows it.
    bool try_fold() {
        const SaddleSystem& s = system;
        if (s.num_multiplier != 1 || s.num_pressure == 0) return false;
        const int m = s.size() - 1;
        const int p0 = s.num_velocity;
        const SparseMatrix& a = s.matrix;

        Eigen::VectorXd kz = Eigen::VectorXd::Zero(m);
        double kmax = 0.0;
        SparseMatrix t(m, m);
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(a.nonZeros());
        border_row = Eigen::VectorXd::Zero(m);
        border_z = 0.0;
        for (int col = 0; col < a.outerSize(); ++col) {
            for (SparseMatrix::InnerIterator it(a, col); it; ++it) {
                const int r = static_cast<int>(it.row());
                const double v = it.value();
                if (r == m) {
                    if (col < m) border_row[col] = v;
                    if (col >= p0 && col < p0 + s.num_pressure) border_z += v;
                    continue;
                }
                if (col == m) {
                    trip.emplace_back(r, p0, v);  // multiplier column takes the pinned slot
                    continue;
                }
                if (col >= p0 && col < p0 + s.num_pressure) kz[r] += v;
                kmax = std::max(kmax, std::abs(v));
                if (col != p0) trip.emplace_back(r, col, v);
            }
        }
        if (kmax == 0.0 || kz.cwiseAbs().maxCoeff() > 1e-10 * kmax) return false;
        if (!(std::abs(border_z) > 0.0)) return false;
        t.setFromTriplets(trip.begin(), trip.end());
        t.makeCompressed();
        lu.analyzePattern(t);
        lu.factorize(t);
        if (lu.info() != Eigen::Success) return false;
        folded = true;
        pinned = p0;
        return true;
    }
};

DirectSolver::DirectSolver(const SaddleSystem& system) : impl_(std::make_unique<Impl>(system)) {
    const auto start = std::chrono::steady_clock::now();
    const int n = system.size();
    if (system.matrix.rows() != n || system.matrix.cols() != n || system.rhs.size() != n) {
        throw SolverError("system dimensions do not match its block sizes");
    }
    impl_->norm1 = one_norm(system.matrix);

    if (!impl_->try_fold()) {
        impl_->lu.analyzePattern(system.matrix);
        impl_->lu.factorize(system.matrix);
    }

    if (impl_->lu.info() != Eigen::Success) {
        // Exactly singular: factor a slightly shifted matrix only to locate the kernel.
        SparseMatrix shifted = system.matrix;
        for (int i = 0; i < n; ++i) shifted.coeffRef(i, i) += 1e-10 * std::max(impl_->norm1, 1.0);
        LU probe;
        probe.compute(shifted);
        if (probe.info() != Eigen::Success) throw SolverError("factorization failed: " + impl_->lu.lastErrorMessage());
        report_singular(system, probe.solve(probe_vector(n, 1)));
    }

    double inv = 0.0;
    Eigen::VectorXd worst;
    for (int k = 0; k < kProbes; ++k) {
        const Eigen::VectorXd r = probe_vector(n, 1 + k);
        const Eigen::VectorXd y = impl_->apply_inverse(r);
        const double ratio = y.lpNorm<1>() / r.lpNorm<1>();
        if (!std::isfinite(ratio) || ratio > inv) {
            inv = std::isfinite(ratio) ? ratio : std::numeric_limits<double>::infinity();
            worst = y;
        }
    }
    impl_->condition = impl_->norm1 * inv;
    if (!(impl_->condition < kSingularCondition)) report_singular(system, worst);
    impl_->factor_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

DirectSolver::~DirectSolver() = default;
DirectSolver::DirectSolver(DirectSolver&&) noexcept = default;
DirectSolver& DirectSolver::operator=(DirectSolver&&) noexcept = default;

SolveReport DirectSolver::refine(const Eigen::VectorXd& x0, int rounds) const {
    const auto start = std::chrono::steady_clock::now();
    SolveReport rep;
    rep.solution = x0;
    Eigen::VectorXd r = impl_->residual(x0);
    double best = r.norm();
    for (int k = 0; k < rounds && best > 0.0; ++k) {
        const Eigen::VectorXd candidate = rep.solution + impl_->apply_inverse(r);
        const Eigen::VectorXd rc = impl_->residual(candidate);
        if (!(rc.norm() < best)) break;
        rep.solution = candidate;
        r = rc;
        best = rc.norm();
        ++rep.refinement_steps;
    }
    rep.relative_residual = impl_->relative(r);
    rep.log_abs_determinant = impl_->log_abs_determinant();
    rep.condition_estimate = impl_->condition;
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

SolveReport DirectSolver::solve() const {
    const auto start = std::chrono::steady_clock::now();
    SolveReport rep = refine(impl_->apply_inverse(impl_->system.rhs));
    rep.wall_seconds = impl_->factor_seconds +
                       std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

SolveReport solve(const SaddleSystem& system) { return DirectSolver(system).solve(); }

SolveReport refine_iteratively(const SaddleSystem& system, const Eigen::VectorXd& x0) {
    return DirectSolver(system).refine(x0);
}

}  // namespace mce
