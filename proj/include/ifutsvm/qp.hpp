#ifndef IFUTSVM_QP_HPP
#define IFUTSVM_QP_HPP

#include "ifutsvm/core.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <string>

namespace ifutsvm {

/// maximize c^T z - 1/2 z^T Q z  subject to  0 <= z <= upper.
template <typename Scalar>
struct BoxQP {
    MatrixX<Scalar> Q;
    VectorX<Scalar> c;
    VectorX<Scalar> upper;

    Index size() const noexcept { return c.size(); }

    void validate() const {
        if (Q.rows() != Q.cols() || Q.rows() != c.size() || upper.size() != c.size())
            throw DimensionMismatch("BoxQP: inconsistent dimensions");
        const Scalar tol = Scalar(1e-10) * std::max(Scalar(1), Q.cwiseAbs().maxCoeff());
        if (Q.size() > 0 && (Q - Q.transpose()).cwiseAbs().maxCoeff() > tol)
            throw NumericError("BoxQP: Q is not symmetric");
        if (upper.size() > 0 && !(upper.minCoeff() >= Scalar(0)))
            throw NumericError("BoxQP: upper bounds must be non-negative");
    }
};

/// Same problem with Q held as W^T W. Each coordinate update touches one
/// column of W and the running product W z, so Q is never formed.
template <typename Scalar>
struct FactoredBoxQP {
    MatrixX<Scalar> W;
    VectorX<Scalar> c;
    VectorX<Scalar> upper;

    Index size() const noexcept { return c.size(); }

    void validate() const {
        if (W.cols() != c.size() || upper.size() != c.size())
            throw DimensionMismatch("FactoredBoxQP: inconsistent dimensions");
        if (upper.size() > 0 && !(upper.minCoeff() >= Scalar(0)))
            throw NumericError("FactoredBoxQP: upper bounds must be non-negative");
    }
};

struct SolverOptions {
    double tol = 1e-6;
    long max_iter = 10000;
    /// Diagonal entries below this are treated as zero curvature.
    double diagonal_floor = 1e-12;
};

template <typename Scalar>
struct QPSolution {
    VectorX<Scalar> z;
    Scalar objective = 0;
    Scalar kkt_residual = 0;
    long iterations = 0;
};

/// Thrown when the sweep budget runs out; carries the best iterate.
class NonConvergence : public NumericError {
public:
    NonConvergence(Eigen::VectorXd best, double objective, double residual, long iterations)
        : NumericError("box QP did not converge: KKT residual " + std::to_string(residual) + " after " +
                       std::to_string(iterations) + " sweeps"),
          best_(std::move(best)),
          objective_(objective),
          residual_(residual),
          iterations_(iterations) {}

    const Eigen::VectorXd& best() const noexcept { return best_; }
    double objective() const noexcept { return objective_; }
    double residual() const noexcept { return residual_; }
    long iterations() const noexcept { return iterations_; }

private:
    Eigen::VectorXd best_;
    double objective_;
    double residual_;
    long iterations_;
};

namespace detail {

template <typename Scalar>
Scalar clamp_box(Scalar v, Scalar upper) {
    return std::min(std::max(v, Scalar(0)), upper);
}

/// max_i |clamp(z_i - g_i, 0, u_i) - z_i| for the minimisation gradient g = Qz - c.
template <typename Scalar>
Scalar projected_residual(const VectorX<Scalar>& z, const VectorX<Scalar>& g, const VectorX<Scalar>& upper) {
    Scalar r = 0;
    for (Index i = 0; i < z.size(); ++i) r = std::max(r, std::abs(clamp_box(z(i) - g(i), upper(i)) - z(i)));
    return r;
}

/// Exact maximiser of the objective along coordinate i.
template <typename Scalar>
Scalar coordinate_step(Scalar zi, Scalar gi, Scalar qii, Scalar upper, Scalar floor) {
    if (qii > floor) return clamp_box(zi - gi / qii, upper);
    // No curvature: the objective is linear in z_i, so move to the bound
    // the projected gradient points at.
    if (gi < 0) return upper;
    if (gi > 0) return Scalar(0);
    return zi;
}

template <typename Scalar>
VectorX<Scalar> start_point(Index k, const VectorX<Scalar>& upper, const VectorX<Scalar>* warm) {
    VectorX<Scalar> z = VectorX<Scalar>::Zero(k);
    if (warm != nullptr && warm->size() == k)
        for (Index i = 0; i < k; ++i) z(i) = clamp_box((*warm)(i), upper(i));
    return z;
}

}  // namespace detail

/// Dual objective c^T z - 1/2 z^T Q z.
template <typename Scalar>
Scalar box_qp_objective(const BoxQP<Scalar>& p, const VectorX<Scalar>& z) {
    return p.c.dot(z) - Scalar(0.5) * z.dot(p.Q * z);
}

template <typename Scalar>
Scalar box_qp_objective(const FactoredBoxQP<Scalar>& p, const VectorX<Scalar>& z) {
    return p.c.dot(z) - Scalar(0.5) * (p.W * z).squaredNorm();
}

/// Cyclic coordinate ascent with exact clipped coordinate updates. Every
/// iterate is feasible; the sweep stops once the projected-gradient KKT
/// residual is at most `opts.tol`.
template <typename Scalar>
QPSolution<Scalar> solve_box_qp(const BoxQP<Scalar>& p, const SolverOptions& opts = {},
                                const VectorX<Scalar>* warm_start = nullptr) {
    p.validate();
    if (!(opts.tol > 0)) throw std::invalid_argument("solver tolerance must be positive");
    const Index k = p.size();
    const Scalar floor = static_cast<Scalar>(opts.diagonal_floor);
    QPSolution<Scalar> sol;
    sol.z = detail::start_point(k, p.upper, warm_start);
    VectorX<Scalar> g = p.Q * sol.z - p.c;

    for (long sweep = 0;; ++sweep) {
        if (sweep % 64 == 63) g.noalias() = p.Q * sol.z - p.c;  // cancel drift in the running gradient
        sol.kkt_residual = detail::projected_residual(sol.z, g, p.upper);
        if (sol.kkt_residual <= static_cast<Scalar>(opts.tol)) {
            g.noalias() = p.Q * sol.z - p.c;
            sol.kkt_residual = detail::projected_residual(sol.z, g, p.upper);
            if (sol.kkt_residual <= static_cast<Scalar>(opts.tol)) {
                sol.iterations = sweep;
                break;
            }
        }
        if (sweep >= opts.max_iter) {
            throw NonConvergence(sol.z.template cast<double>(), static_cast<double>(box_qp_objective(p, sol.z)),
                                 static_cast<double>(sol.kkt_residual), sweep);
        }
#ifndef NDEBUG
        const Scalar before = box_qp_objective(p, sol.z);
#endif
        for (Index i = 0; i < k; ++i) {
            const Scalar zi = detail::coordinate_step(sol.z(i), g(i), p.Q(i, i), p.upper(i), floor);
            const Scalar delta = zi - sol.z(i);
            if (delta != Scalar(0)) {
                g.noalias() += delta * p.Q.col(i);
                sol.z(i) = zi;
            }
        }
#ifndef NDEBUG
        const Scalar after = box_qp_objective(p, sol.z);
        assert(after >= before - Scalar(1e-9) * (Scalar(1) + std::abs(before)));
#endif
    }
    sol.objective = box_qp_objective(p, sol.z);
    return sol;
}

template <typename Scalar>
QPSolution<Scalar> solve_box_qp(const FactoredBoxQP<Scalar>& p, const SolverOptions& opts = {},
                                const VectorX<Scalar>* warm_start = nullptr) {
    p.validate();
    if (!(opts.tol > 0)) throw std::invalid_argument("solver tolerance must be positive");
    const Index k = p.size();
    const Scalar floor = static_cast<Scalar>(opts.diagonal_floor);
    const VectorX<Scalar> diag = p.W.colwise().squaredNorm().transpose();
    QPSolution<Scalar> sol;
    sol.z = detail::start_point(k, p.upper, warm_start);
    VectorX<Scalar> wz = p.W * sol.z;

    for (long sweep = 0;; ++sweep) {
        if (sweep % 64 == 63) wz.noalias() = p.W * sol.z;
        const VectorX<Scalar> g = p.W.transpose() * wz - p.c;
        sol.kkt_residual = detail::projected_residual(sol.z, g, p.upper);
        if (sol.kkt_residual <= static_cast<Scalar>(opts.tol)) {
            sol.iterations = sweep;
            break;
        }
        if (sweep >= opts.max_iter) {
            throw NonConvergence(sol.z.template cast<double>(), static_cast<double>(box_qp_objective(p, sol.z)),
                                 static_cast<double>(sol.kkt_residual), sweep);
        }
        for (Index i = 0; i < k; ++i) {
            const Scalar gi = p.W.col(i).dot(wz) - p.c(i);
            const Scalar zi = detail::coordinate_step(sol.z(i), gi, diag(i), p.upper(i), floor);
            const Scalar delta = zi - sol.z(i);
            if (delta != Scalar(0)) {
                wz.noalias() += delta * p.W.col(i);
                sol.z(i) = zi;
            }
        }
    }
    sol.objective = box_qp_objective(p, sol.z);
    return sol;
}

/// (M + ridge I) x = rhs.
template <typename Scalar>
struct SpdSystem {
    MatrixX<Scalar> M;
    Scalar ridge = 0;
    VectorX<Scalar> rhs;
};

/// Cholesky factor of M + ridge I, reusable across right-hand sides.
template <typename Scalar>
class SpdFactor {
public:
    SpdFactor() = default;

    template <typename Derived>
    SpdFactor(const Eigen::MatrixBase<Derived>& m, Scalar ridge) {
        if (m.rows() != m.cols()) throw DimensionMismatch("SPD system matrix must be square");
        if (ridge < Scalar(0)) throw std::invalid_argument("ridge must be non-negative");
        MatrixX<Scalar> a = m;
        a.diagonal().array() += ridge;
        llt_.compute(a);
        if (llt_.info() != Eigen::Success)
            throw NumericError("Cholesky factorization failed (matrix not positive definite); increase the ridge");
        // LLT accepts tiny positive pivots on singular input; reject those too.
        const Scalar min_pivot = llt_.matrixLLT().diagonal().minCoeff();
        const Scalar scale = a.diagonal().cwiseAbs().maxCoeff();
        if (min_pivot * min_pivot <= static_cast<Scalar>(a.rows()) * std::numeric_limits<Scalar>::epsilon() * scale)
            throw NumericError("Cholesky factorization is numerically singular; increase the ridge");
    }

    Index size() const noexcept { return llt_.rows(); }

    template <typename Derived>
    MatrixX<Scalar> solve(const Eigen::MatrixBase<Derived>& b) const {
        return llt_.solve(b);
    }

    /// L^{-1} B, so that B^T (M + ridge I)^{-1} B = (L^{-1} B)^T (L^{-1} B).
    template <typename Derived>
    MatrixX<Scalar> half_solve(const Eigen::MatrixBase<Derived>& b) const {
        return llt_.matrixL().solve(b);
    }

    /// L^{-T} Y, completing a solve started with half_solve.
    template <typename Derived>
    MatrixX<Scalar> back_solve(const Eigen::MatrixBase<Derived>& y) const {
        return llt_.matrixU().solve(y);
    }

private:
    Eigen::LLT<MatrixX<Scalar>> llt_;
};

template <typename Scalar>
VectorX<Scalar> spd_solve(const SpdSystem<Scalar>& system) {
    if (system.rhs.size() != system.M.rows()) throw DimensionMismatch("SPD right-hand side has wrong length");
    return SpdFactor<Scalar>(system.M, system.ridge).solve(system.rhs);
}

}  // namespace ifutsvm

#endif  // IFUTSVM_QP_HPP
