#include "helpers.hpp"

#include "ifutsvm/membership.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>

using namespace ifutsvm;

namespace {

// Brute-force |psi(x_i) - C| with explicit kernel loops.
double brute_centre_distance(const Matrix& cls, Index i, const KernelSpec& s) {
    const Index m = cls.rows();
    double cross = 0.0, pairs = 0.0;
    for (Index j = 0; j < m; ++j) cross += gaussian(cls.row(i), cls.row(j), s);
    for (Index a = 0; a < m; ++a)
        for (Index b = 0; b < m; ++b) pairs += gaussian(cls.row(a), cls.row(b), s);
    const double sq = 1.0 - 2.0 * cross / m + pairs / (m * m);
    return std::sqrt(std::max(sq, 0.0));
}

Dataset from_rows(const Matrix& x, std::initializer_list<int> labels) {
    LabelVector y(static_cast<Index>(labels.size()));
    Index k = 0;
    for (int l : labels) y(k++) = l;
    return Dataset("d", x, y);
}

}  // namespace

TEST_CASE("score branches") {
    CHECK(score(0.7, 0.0) == 0.7);
    CHECK(score(0.2, 0.3) == 0.0);
    CHECK(score(0.8, 0.1) == doctest::Approx(0.9 / 1.1).epsilon(1e-15));
    CHECK(score(0.3, 0.3) == 0.0);
    CHECK_THROWS(score(1.2, 0.0));
    CHECK_THROWS(score(0.5, 0.6));
    CHECK_THROWS(score(0.5, -0.1));
}

TEST_CASE("membership: single-member class and radius member") {
    Matrix x(4, 2);
    x << 0, 0, 3, 3, 3.5, 3, 4, 4.2;
    const Dataset d = from_rows(x, {1, -1, -1, -1});
    const KernelSpec s(1.0);
    FuzzyParams p;
    p.eta = 0.25;
    const Vector theta = membership(d, s, p);
    CHECK(theta(0) == 1.0);
    const Matrix neg = d.negatives();
    const double r = class_radius(neg, s);
    const Vector dn = theta.tail(3);
    CHECK(dn.minCoeff() == doctest::Approx(0.25 / (r + 0.25)).epsilon(1e-12));
    for (Index i = 0; i < 4; ++i) {
        CHECK(theta(i) > 0.0);
        CHECK(theta(i) <= 1.0);
    }
}

TEST_CASE("membership matches explicit Gram loops on a 6-point class") {
    std::mt19937_64 gen(11);
    const Matrix pos = testing::random_matrix(6, 2, gen);
    const Matrix neg = testing::random_matrix(3, 2, gen, 0.5);
    Matrix x(9, 2);
    x << pos, neg;
    LabelVector y(9);
    y << 1, 1, 1, 1, 1, 1, -1, -1, -1;
    // 6 positives vs 3 negatives: encoding is kept as given, membership does not care
    const Dataset d("d", x, y);
    const KernelSpec s(0.9);
    FuzzyParams p;
    p.eta = 0.5;
    const Vector theta = membership(d, s, p);
    double r = 0.0;
    for (Index i = 0; i < 6; ++i) r = std::max(r, brute_centre_distance(pos, i, s));
    for (Index i = 0; i < 6; ++i)
        CHECK(theta(i) == doctest::Approx(1.0 - brute_centre_distance(pos, i, s) / (r + 0.5)).epsilon(1e-10));
}

TEST_CASE("nonmembership: homogeneous neighbourhood and full neighbourhood counting") {
    Matrix x(8, 1);
    x << 0, 0.1, 0.2, 0.3, 5, 5.1, 5.2, 0.15;
    const Dataset d = from_rows(x, {1, 1, 1, -1, -1, -1, -1, -1});
    const KernelSpec s(1.0);
    const Matrix k = gram(d.features(), s);
    const Vector theta = membership(d, k, FuzzyParams{});

    // rho larger than every kernel distance (<= sqrt 2): the whole set is the neighbourhood
    const Vector sigma = nonmembership(d, k, 2.0, theta);
    for (Index i = 0; i < 8; ++i) {
        const double opposite = d.labels()(i) == 1 ? 5.0 : 3.0;
        CHECK(sigma(i) == (1.0 - theta(i)) * (opposite / 8.0));
    }

    // tiny rho: only the sample itself
    const Vector lonely = nonmembership(d, k, 1e-6, theta);
    CHECK(lonely.cwiseAbs().maxCoeff() == 0.0);

    // theta = 1 kills sigma whatever the neighbourhood
    Vector ones = Vector::Ones(8);
    CHECK(nonmembership(d, k, 2.0, ones).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("heterogeneity uses a closed ball and counts the sample itself") {
    Matrix x(3, 1);
    x << 0, 1, 2;
    const Dataset d = from_rows(x, {1, -1, -1});
    const KernelSpec s(1.0);
    const Matrix k = gram(d.features(), s);
    const double edge = std::sqrt(2.0 - 2.0 * k(0, 1));
    const Vector mu = heterogeneity(d, k, edge);
    // distance exactly rho is inside
    CHECK(mu(0) == 0.5);
    CHECK(mu(1) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("assign_scores: separated clusters give s = theta") {
    const Dataset d = testing::blobs(6, 14, 2, 6.0, 21, 0.3);
    FuzzyParams p;
    p.rho = 0.5;
    const auto w = assign_scores(d, KernelSpec(1.0), p);
    for (Index i = 0; i < d.size(); ++i) {
        CHECK(w.nonmembership(i) == 0.0);
        CHECK(w.score(i) == w.membership(i));
    }
    CHECK(w.s1.size() == 6);
    CHECK(w.s2.size() == 14);
}

TEST_CASE("assign_scores: an injected outlier loses score") {
    const Dataset d = testing::blobs(8, 16, 2, 2.5, 22, 0.6);
    const KernelSpec s(1.0);
    FuzzyParams p;
    p.rho = 0.8;
    // sample 9 is a negative deep in the negative cluster; relabel it positive
    LabelVector y = d.labels();
    y(9) = 1;
    const Dataset flipped = d.with_labels(y);
    const double before = assign_scores(d, s, p).score(9);
    const double after = assign_scores(flipped, s, p).score(9);
    CHECK(after < before);
}

TEST_CASE("assign_scores is permutation-equivariant") {
    const Dataset d = testing::blobs(7, 13, 3, 1.0, 23);
    std::vector<Index> perm(static_cast<std::size_t>(d.size()));
    std::iota(perm.begin(), perm.end(), Index{0});
    std::mt19937_64 gen(1);
    std::shuffle(perm.begin(), perm.end(), gen);
    const Dataset shuffled = d.subset(perm);
    const KernelSpec s(1.5);
    const auto a = assign_scores(d, s, FuzzyParams{});
    const auto b = assign_scores(shuffled, s, FuzzyParams{});
    for (std::size_t i = 0; i < perm.size(); ++i)
        CHECK(b.score(static_cast<Index>(i)) == doctest::Approx(a.score(perm[i])).epsilon(1e-12));
}

TEST_CASE("defaults: rho is the median kernel distance, eta scales with the radius") {
    const Dataset d = testing::blobs(5, 9, 2, 1.0, 24);
    const KernelSpec s(1.0);
    const Matrix k = gram(d.features(), s);
    const auto w = assign_scores(d, k, FuzzyParams{});
    std::vector<double> dist;
    for (Index i = 0; i < d.size(); ++i)
        for (Index j = i + 1; j < d.size(); ++j) dist.push_back(std::sqrt(std::max(0.0, 2.0 - 2.0 * k(i, j))));
    std::sort(dist.begin(), dist.end());
    const std::size_t n = dist.size();
    const double median = n % 2 ? dist[n / 2] : 0.5 * (dist[n / 2 - 1] + dist[n / 2]);
    CHECK(w.rho == doctest::Approx(median).epsilon(1e-12));
    CHECK(w.eta_positive == doctest::Approx(1e-4 * (w.radius_positive + 1.0)));
    CHECK(w.eta_negative == doctest::Approx(1e-4 * (w.radius_negative + 1.0)));
}

TEST_CASE("fuzzy invariants over random data") {
    std::mt19937_64 gen(25);
    std::uniform_real_distribution<double> u(0.05, 3.0);
    for (int t = 0; t < 60; ++t) {
        const Dataset d = testing::blobs(3 + t % 7, 10 + t % 11, 1 + t % 4, u(gen) - 1.0, 100 + t);
        FuzzyParams p;
        p.eta = u(gen);
        p.rho = u(gen) * 0.5;
        const auto w = assign_scores(d, KernelSpec(u(gen)), p);
        for (Index i = 0; i < d.size(); ++i) {
            CHECK(w.membership(i) > 0.0);
            CHECK(w.membership(i) <= 1.0);
            CHECK(w.nonmembership(i) >= 0.0);
            CHECK(w.nonmembership(i) <= 1.0 - w.membership(i));
            CHECK(w.score(i) >= 0.0);
            CHECK(w.score(i) <= 1.0);
        }
    }
}

TEST_CASE("membership rejects an empty class") {
    Matrix x(2, 1);
    x << 0, 1;
    LabelVector y(2);
    y << -1, -1;
    CHECK_THROWS_AS(membership(Dataset("d", x, y), KernelSpec(1.0), FuzzyParams{}), InvalidDataset);
    FuzzyParams bad;
    bad.eta = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}
