#ifndef IFUTSVM_TEST_HELPERS_HPP
#define IFUTSVM_TEST_HELPERS_HPP

#include "ifutsvm/dataset.hpp"

#include <random>

namespace testing {

using ifutsvm::Dataset;
using ifutsvm::Index;
using ifutsvm::LabelVector;
using ifutsvm::Matrix;
using ifutsvm::Vector;

inline Matrix random_matrix(Index rows, Index cols, std::mt19937_64& gen, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) m(i, j) = n(gen);
    return m;
}

/// Two Gaussian blobs: m1 positives around +shift, m2 negatives around -shift.
inline Dataset blobs(Index m1, Index m2, Index dim, double shift, std::uint64_t seed, double spread = 1.0) {
    std::mt19937_64 gen(seed);
    Matrix x = random_matrix(m1 + m2, dim, gen, spread);
    LabelVector y(m1 + m2);
    for (Index i = 0; i < m1 + m2; ++i) {
        const bool pos = i < m1;
        x.row(i).array() += pos ? shift : -shift;
        y(i) = pos ? 1 : -1;
    }
    return Dataset("blobs", x, y);
}

/// The 4-point separable fixture {(0,0),(0,1)} vs {(5,0),(5,1)}.
inline Dataset four_points() {
    Matrix x(4, 2);
    x << 0, 0, 0, 1, 5, 0, 5, 1;
    LabelVector y(4);
    y << 1, 1, -1, -1;
    return Dataset("four", x, y);
}

}  // namespace testing

#endif
