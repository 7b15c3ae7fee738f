#ifndef IFUTSVM_MEMBERSHIP_HPP
#define IFUTSVM_MEMBERSHIP_HPP

#include "ifutsvm/dataset.hpp"
#include "ifutsvm/kernel.hpp"

#include <optional>

namespace ifutsvm {

/// Intuitionistic fuzzy parameters. Unset values resolve to data-driven
/// defaults: eta = 1e-4 * (class radius + 1) per class, rho = median pairwise
/// kernel-space distance over the whole training set.
struct FuzzyParams {
    std::optional<double> eta;
    std::optional<double> rho;

    void validate() const;
};

/// Per-sample membership, non-membership and score, in dataset row order,
/// plus the class partitions s1 (label +1) and s2 (label -1).
struct ScoreWeights {
    Vector membership;
    Vector nonmembership;
    /// Fraction of opposite-label samples inside the rho-neighbourhood.
    Vector heterogeneity;
    Vector score;
    Vector s1;
    Vector s2;
    double eta_positive = 0.0;
    double eta_negative = 0.0;
    double radius_positive = 0.0;
    double radius_negative = 0.0;
    double rho = 0.0;
};

/// Pairwise kernel-space distances sqrt(K_ii + K_jj - 2 K_ij).
Matrix kernel_distances(const Matrix& gram);

/// Median of the strict upper triangle of `distances`.
double median_pairwise_distance(const Matrix& distances);

/// theta_i = 1 - |psi(x_i) - C| / (r + eta) using the sample's own class.
/// `gram` is the full training Gram matrix in dataset row order.
Vector membership(const Dataset& ds, const Matrix& gram, const FuzzyParams& params);
Vector membership(const Dataset& ds, const KernelSpec& spec, const FuzzyParams& params);

/// Fraction of opposite-label samples among those within kernel distance
/// rho of each sample (closed ball, the sample itself included).
Vector heterogeneity(const Dataset& ds, const Matrix& gram, double rho);

/// sigma_i = (1 - theta_i) * (#opposite-label samples within rho) / (#samples within rho).
/// The neighbourhood is closed and contains x_i itself.
Vector nonmembership(const Dataset& ds, const Matrix& gram, double rho, const Vector& theta);
Vector nonmembership(const Dataset& ds, const KernelSpec& spec, const FuzzyParams& params, const Vector& theta);

/// Score of an intuitionistic fuzzy number; branches are checked in order:
/// sigma == 0 -> theta; theta <= sigma -> 0; otherwise (1 - sigma) / (2 - theta - sigma).
double score(double theta, double sigma);

ScoreWeights assign_scores(const Dataset& ds, const Matrix& gram, const FuzzyParams& params);
ScoreWeights assign_scores(const Dataset& ds, const KernelSpec& spec, const FuzzyParams& params);
/// Linear mode: memberships are computed in input space (linear kernel).
ScoreWeights assign_scores_linear(const Dataset& ds, const FuzzyParams& params);

}  // namespace ifutsvm

#endif  // IFUTSVM_MEMBERSHIP_HPP
