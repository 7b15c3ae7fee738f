#ifndef IFUTSVM_SAMPLING_HPP
#define IFUTSVM_SAMPLING_HPP

#include "ifutsvm/dataset.hpp"

#include <utility>

namespace ifutsvm {

/// A universum point is the midpoint of one positive and one negative sample;
/// `pairs` records (positive row, negative row) in class-local indices.
struct Universum {
    Matrix points;
    std::vector<std::pair<Index, Index>> pairs;
};

/// Undersampling, universum and reduced universum for one training set.
///
/// Sub-streams of the master seed: 0 undersampling, 1 universum pairing,
/// 2 universum reduction.
struct SamplingPlan {
    Matrix x2_star;
    /// Class-local indices into the negative rows (X2).
    IndexList x2_star_indices;
    Universum universum;
    Matrix universum_star;
    /// Row indices into `universum.points`.
    IndexList universum_star_indices;
    std::uint64_t seed = 0;
    /// Set when m1 == m2: no universum is built and the universum blocks of
    /// both duals are dropped.
    bool balanced_fallback = false;
    /// Number of averaged points added beyond m2 - m1 so that U* can hold g rows.
    Index universum_padding = 0;

    Index u() const noexcept { return universum.points.rows(); }
    Index g() const noexcept { return universum_star.rows(); }
};

/// m1 distinct negative rows drawn uniformly without replacement.
std::pair<Matrix, IndexList> undersample_majority(const Dataset& ds, std::uint64_t seed);

Universum generate_universum(const Dataset& ds, Index count, std::uint64_t seed);

/// `g` distinct rows of `universum`; returns the rows and their indices.
std::pair<Matrix, IndexList> reduce_universum(const Matrix& universum, Index g, std::uint64_t seed);

SamplingPlan build_plan(const Dataset& ds, std::uint64_t seed);

}  // namespace ifutsvm

#endif  // IFUTSVM_SAMPLING_HPP
