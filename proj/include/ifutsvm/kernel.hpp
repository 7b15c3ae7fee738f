#ifndef IFUTSVM_KERNEL_HPP
#define IFUTSVM_KERNEL_HPP

#include "ifutsvm/core.hpp"

#include <algorithm>
#include <cmath>

namespace ifutsvm {

/// Gaussian bandwidth: K(p, q) = exp(-|p - q|^2 / (2 width^2)).
struct KernelSpec {
    double width = 1.0;

    explicit KernelSpec(double w = 1.0) : width(w) {
        if (!(w > 0.0) || !std::isfinite(w)) throw std::invalid_argument("kernel width must be positive");
    }
    bool operator==(const KernelSpec&) const = default;
};

template <typename DerivedP, typename DerivedQ>
typename DerivedP::Scalar gaussian(const Eigen::MatrixBase<DerivedP>& p, const Eigen::MatrixBase<DerivedQ>& q,
                                   const KernelSpec& spec) {
    using Scalar = typename DerivedP::Scalar;
    if (p.size() != q.size()) throw DimensionMismatch("gaussian: vectors differ in dimension");
    const Scalar w = static_cast<Scalar>(spec.width);
    // Reshape so row and column vectors may be mixed.
    const Scalar sq = (p.reshaped() - q.reshaped()).squaredNorm();
    return std::exp(-sq / (Scalar(2) * w * w));
}

/// Kernel functors consumed by the geometry helpers below. Each takes two
/// row expressions.
struct GaussianKernel {
    KernelSpec spec;
    template <typename A, typename B>
    auto operator()(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) const {
        return gaussian(a, b, spec);
    }
};

struct LinearKernel {
    template <typename A, typename B>
    auto operator()(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) const {
        if (a.size() != b.size()) throw DimensionMismatch("linear kernel: vectors differ in dimension");
        return a.reshaped().dot(b.reshaped());
    }
};

/// Rectangular Gram matrix K(A, B^T): entry (i, j) = K(A_i, B_j).
template <typename DerivedA, typename DerivedB>
MatrixX<typename DerivedA::Scalar> gram(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b,
                                        const KernelSpec& spec) {
    using Scalar = typename DerivedA::Scalar;
    if (a.cols() != b.cols()) throw DimensionMismatch("gram: sample sets differ in feature dimension");
    const Scalar scale = Scalar(-1) / (Scalar(2) * static_cast<Scalar>(spec.width) * static_cast<Scalar>(spec.width));
    const VectorX<Scalar> an = a.rowwise().squaredNorm();
    const VectorX<Scalar> bn = b.rowwise().squaredNorm();
    MatrixX<Scalar> k = Scalar(-2) * (a * b.transpose());
    k.colwise() += an;
    k.rowwise() += bn.transpose();
    return (k.array().max(Scalar(0)) * scale).exp().matrix();
}

/// Square self-Gram K(A, A^T); exactly symmetric with a unit diagonal.
template <typename DerivedA>
MatrixX<typename DerivedA::Scalar> gram(const Eigen::MatrixBase<DerivedA>& a, const KernelSpec& spec) {
    using Scalar = typename DerivedA::Scalar;
    MatrixX<Scalar> k = gram(a, a, spec);
    for (Index j = 0; j < k.cols(); ++j) {
        k(j, j) = Scalar(1);
        for (Index i = j + 1; i < k.rows(); ++i) k(j, i) = k(i, j);
    }
    return k;
}

/// Gram matrix for an arbitrary kernel functor (reference path, O(pq) calls).
template <typename DerivedA, typename DerivedB, typename Kernel>
MatrixX<typename DerivedA::Scalar> gram_with(const Eigen::MatrixBase<DerivedA>& a,
                                             const Eigen::MatrixBase<DerivedB>& b, const Kernel& kernel) {
    if (a.cols() != b.cols()) throw DimensionMismatch("gram: sample sets differ in feature dimension");
    MatrixX<typename DerivedA::Scalar> k(a.rows(), b.rows());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < b.rows(); ++j) k(i, j) = kernel(a.row(i), b.row(j));
    return k;
}

/// Kernel-space geometry of one class: centre C = mean of psi(x_i) and
/// radius r = max_i |psi(x_i) - C|, both expressed through Gram sums.
template <typename Scalar>
class ClassGeometry {
public:
    /// `class_gram` is K(X, X^T) for the class rows.
    explicit ClassGeometry(MatrixX<Scalar> class_gram) : gram_(std::move(class_gram)) {
        if (gram_.rows() == 0) throw InvalidDataset("class geometry of an empty class");
        if (gram_.rows() != gram_.cols()) throw DimensionMismatch("class Gram must be square");
        const Scalar m = static_cast<Scalar>(gram_.rows());
        row_means_ = gram_.rowwise().sum() / m;
        pair_mean_ = row_means_.sum() / m;
        member_distances_.resize(gram_.rows());
        for (Index i = 0; i < gram_.rows(); ++i)
            member_distances_(i) = distance_from_terms(gram_(i, i), row_means_(i));
        radius_ = member_distances_.maxCoeff();
    }

    Index size() const noexcept { return gram_.rows(); }
    Scalar radius() const noexcept { return radius_; }
    /// (1/m^2) sum_ij K(x_i, x_j), cached once per class.
    Scalar pair_mean() const noexcept { return pair_mean_; }
    const VectorX<Scalar>& member_distances() const noexcept { return member_distances_; }

    /// |psi(x) - C| from K(x, x) and the row of kernel values K(x, X^T).
    template <typename Derived>
    Scalar distance(Scalar self_kernel, const Eigen::MatrixBase<Derived>& kernel_row) const {
        if (kernel_row.size() != size()) throw DimensionMismatch("kernel row length differs from class size");
        return distance_from_terms(self_kernel, kernel_row.sum() / static_cast<Scalar>(size()));
    }

private:
    Scalar distance_from_terms(Scalar self_kernel, Scalar row_mean) const {
        const Scalar sq = self_kernel - Scalar(2) * row_mean + pair_mean_;
        return std::sqrt(std::max(sq, Scalar(0)));
    }

    MatrixX<Scalar> gram_;
    VectorX<Scalar> row_means_;
    VectorX<Scalar> member_distances_;
    Scalar pair_mean_ = 0;
    Scalar radius_ = 0;
};

/// |psi(x) - C| for the centre C of `class_rows` under `kernel`.
template <typename DerivedX, typename DerivedC, typename Kernel>
typename DerivedC::Scalar centroid_distance(const Eigen::MatrixBase<DerivedX>& x,
                                            const Eigen::MatrixBase<DerivedC>& class_rows, const Kernel& kernel) {
    using Scalar = typename DerivedC::Scalar;
    if (class_rows.rows() == 0) throw InvalidDataset("centroid distance to an empty class");
    if (x.size() != class_rows.cols()) throw DimensionMismatch("sample and class differ in feature dimension");
    const auto xr = x.reshaped().transpose();
    ClassGeometry<Scalar> geom(gram_with(class_rows, class_rows, kernel));
    VectorX<Scalar> row(class_rows.rows());
    for (Index j = 0; j < class_rows.rows(); ++j) row(j) = kernel(xr, class_rows.row(j));
    return geom.distance(kernel(xr, xr), row);
}

template <typename DerivedX, typename DerivedC>
typename DerivedC::Scalar centroid_distance(const Eigen::MatrixBase<DerivedX>& x,
                                            const Eigen::MatrixBase<DerivedC>& class_rows, const KernelSpec& spec) {
    return centroid_distance(x, class_rows, GaussianKernel{spec});
}

template <typename DerivedC, typename Kernel>
typename DerivedC::Scalar class_radius(const Eigen::MatrixBase<DerivedC>& class_rows, const Kernel& kernel) {
    using Scalar = typename DerivedC::Scalar;
    if (class_rows.rows() == 0) throw InvalidDataset("radius of an empty class");
    return ClassGeometry<Scalar>(gram_with(class_rows, class_rows, kernel)).radius();
}

template <typename DerivedC>
typename DerivedC::Scalar class_radius(const Eigen::MatrixBase<DerivedC>& class_rows, const KernelSpec& spec) {
    using Scalar = typename DerivedC::Scalar;
    if (class_rows.rows() == 0) throw InvalidDataset("radius of an empty class");
    return ClassGeometry<Scalar>(gram(class_rows, spec)).radius();
}

}  // namespace ifutsvm

#endif  // IFUTSVM_KERNEL_HPP
