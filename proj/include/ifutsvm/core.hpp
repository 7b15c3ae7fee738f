#ifndef IFUTSVM_CORE_HPP
#define IFUTSVM_CORE_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ifutsvm {

using Index = Eigen::Index;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = MatrixX<double>;
using Vector = VectorX<double>;
using LabelVector = Eigen::VectorXi;
using IndexList = std::vector<Index>;

// Error classes map one-to-one onto CLI exit codes (see tools/).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    explicit ParseError(const std::string& what) : Error(what), line_(0) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class InvalidDataset : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class NumericError : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public NumericError {
public:
    using NumericError::NumericError;
};

/// Portable seeded generator. Bounded draws use rejection sampling on the raw
/// 64-bit stream so results do not depend on the standard library's
/// distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    /// Derives an independent stream from a master seed and a fixed offset.
    static Rng stream(std::uint64_t master, std::uint64_t offset) {
        std::uint64_t s = master;
        const std::uint64_t mixed = splitmix(s);
        return Rng(mixed + 0x9e3779b97f4a7c15ULL * (offset + 1));
    }

    std::uint64_t next() { return splitmix(state_); }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("Rng::below(0)");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = next();
        } while (x >= limit);
        return x % n;
    }

    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// First `count` entries of a uniformly random permutation of [0, n).
    IndexList sample_without_replacement(Index n, Index count) {
        if (count < 0 || count > n) throw std::invalid_argument("sample size exceeds population");
        IndexList pool(static_cast<std::size_t>(n));
        for (Index i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
        for (Index i = 0; i < count; ++i) {
            const auto j = i + static_cast<Index>(below(static_cast<std::uint64_t>(n - i)));
            std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
        }
        pool.resize(static_cast<std::size_t>(count));
        return pool;
    }

private:
    static std::uint64_t splitmix(std::uint64_t& s) {
        std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

/// Rows of `m` selected by `rows`, in the given order.
template <typename Derived>
MatrixX<typename Derived::Scalar> select_rows(const Eigen::MatrixBase<Derived>& m, const IndexList& rows) {
    MatrixX<typename Derived::Scalar> out(static_cast<Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = m.row(rows[i]);
    return out;
}

/// [A e]: appends a column of ones.
template <typename Derived>
MatrixX<typename Derived::Scalar> augment(const Eigen::MatrixBase<Derived>& a) {
    MatrixX<typename Derived::Scalar> out(a.rows(), a.cols() + 1);
    out.leftCols(a.cols()) = a;
    out.col(a.cols()).setOnes();
    return out;
}

}  // namespace ifutsvm

#endif  // IFUTSVM_CORE_HPP
