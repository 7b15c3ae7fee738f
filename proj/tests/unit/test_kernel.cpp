#include "helpers.hpp"

#include "ifutsvm/kernel.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>

using namespace ifutsvm;

namespace {

// (1 + a.b)^2 and its explicit feature map, for checking the Gram-sum
// expansion against coordinates in feature space.
struct Poly2 {
    template <typename A, typename B>
    double operator()(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) const {
        const double d = 1.0 + a.reshaped().dot(b.reshaped());
        return d * d;
    }
};

Vector poly2_features(const Vector& x) {
    const Index n = x.size();
    Vector phi(1 + n + n * (n + 1) / 2);
    Index k = 0;
    phi(k++) = 1.0;
    for (Index i = 0; i < n; ++i) phi(k++) = std::sqrt(2.0) * x(i);
    for (Index i = 0; i < n; ++i)
        for (Index j = i; j < n; ++j) phi(k++) = i == j ? x(i) * x(i) : std::sqrt(2.0) * x(i) * x(j);
    return phi;
}

}  // namespace

TEST_CASE("gaussian kernel values") {
    const KernelSpec one(1.0);
    Vector p(1), q(1);
    p << 0;
    q << 1;
    CHECK(gaussian(p, p, one) == 1.0);
    CHECK(gaussian(p, q, one) == doctest::Approx(0.6065307).epsilon(1e-7));
    std::mt19937_64 gen(1);
    for (int t = 0; t < 100; ++t) {
        const Matrix ab = testing::random_matrix(2, 4, gen);
        const KernelSpec s(0.3 + t * 0.05);
        CHECK(gaussian(ab.row(0), ab.row(1), s) == gaussian(ab.row(1), ab.row(0), s));
        CHECK(gaussian(ab.row(0), ab.row(0), s) == 1.0);
    }
    Vector r(2);
    r << 0, 0;
    CHECK_THROWS_AS(gaussian(p, r, one), DimensionMismatch);
    CHECK_THROWS(KernelSpec(0.0));
    CHECK_THROWS(KernelSpec(-1.0));
}

TEST_CASE("gram matrices") {
    std::mt19937_64 gen(2);
    const Matrix a = testing::random_matrix(3, 2, gen);
    const Matrix b = testing::random_matrix(2, 2, gen);
    const KernelSpec s(0.7);
    const Matrix k = gram(a, b, s);
    REQUIRE(k.rows() == 3);
    REQUIRE(k.cols() == 2);
    for (Index i = 0; i < 3; ++i)
        for (Index j = 0; j < 2; ++j) CHECK(k(i, j) == doctest::Approx(gaussian(a.row(i), b.row(j), s)).epsilon(1e-12));

    Matrix twin(2, 3);
    twin << 1, 2, 3, 1, 2, 3;
    CHECK(gram(twin, s) == Matrix::Ones(2, 2));
    CHECK_THROWS_AS(gram(a, Matrix(2, 3), s), DimensionMismatch);
}

TEST_CASE("self-Gram is symmetric, unit-diagonal and PSD over the width grid") {
    std::mt19937_64 gen(3);
    const Matrix a = testing::random_matrix(30, 4, gen);
    for (int e = -5; e <= 5; ++e) {
        const Matrix k = gram(a, KernelSpec(std::ldexp(1.0, e)));
        CHECK(k == k.transpose());
        CHECK((k.diagonal().array() == 1.0).all());
        CHECK(k.minCoeff() >= 0.0);
        CHECK(k.maxCoeff() <= 1.0);
        const double lmin = Eigen::SelfAdjointEigenSolver<Matrix>(k).eigenvalues().minCoeff();
        CHECK(lmin >= -1e-8 * 30);
    }
}

TEST_CASE("centroid distance: closed forms") {
    const KernelSpec s(1.3);
    Matrix one(1, 2);
    one << 0.4, -1.0;
    CHECK(centroid_distance(Vector(one.row(0).transpose()), one, s) == 0.0);
    Vector y(2);
    y << 1.0, 2.0;
    const double expected = std::sqrt(2.0 - 2.0 * gaussian(one.row(0), y.transpose(), s));
    CHECK(centroid_distance(y, one, s) == doctest::Approx(expected).epsilon(1e-14));
    CHECK_THROWS_AS(centroid_distance(y, Matrix(0, 2), s), InvalidDataset);
}

TEST_CASE("centroid distance matches an explicit feature map") {
    std::mt19937_64 gen(4);
    for (int t = 0; t < 20; ++t) {
        const Matrix cls = testing::random_matrix(5, 3, gen);
        const Vector x = testing::random_matrix(1, 3, gen).row(0).transpose();
        Vector centre = Vector::Zero(poly2_features(x).size());
        for (Index i = 0; i < 5; ++i) centre += poly2_features(cls.row(i).transpose()) / 5.0;
        const double oracle = (poly2_features(x) - centre).norm();
        CHECK(centroid_distance(x, cls, Poly2{}) == doctest::Approx(oracle).epsilon(1e-10));
        // the radius is attained by some member
        double r = 0.0;
        for (Index i = 0; i < 5; ++i) r = std::max(r, (poly2_features(cls.row(i).transpose()) - centre).norm());
        CHECK(class_radius(cls, Poly2{}) == doctest::Approx(r).epsilon(1e-10));
    }
}

TEST_CASE("class radius") {
    const KernelSpec s(0.8);
    Matrix single(1, 2);
    single << 1, 1;
    CHECK(class_radius(single, s) == 0.0);
    Matrix same(2, 2);
    same << 1, 1, 1, 1;
    CHECK(class_radius(same, s) == 0.0);

    std::mt19937_64 gen(5);
    for (int t = 0; t < 10; ++t) {
        const Matrix cls = testing::random_matrix(12 + t, 3, gen);
        const double r = class_radius(cls, s);
        double best = -1.0;
        for (Index i = 0; i < cls.rows(); ++i) {
            const double d = centroid_distance(Vector(cls.row(i).transpose()), cls, s);
            CHECK(d <= r + 1e-12);
            best = std::max(best, d);
        }
        CHECK(best == doctest::Approx(r).epsilon(1e-12));
    }
}
