#include "helpers.hpp"

#include "ifutsvm/sampling.hpp"

#include <doctest.h>

#include <set>

using namespace ifutsvm;

namespace {

bool has_row(const Matrix& m, const Eigen::RowVectorXd& r) {
    for (Index i = 0; i < m.rows(); ++i)
        if (m.row(i) == r) return true;
    return false;
}

std::set<Index> as_set(const IndexList& v) { return {v.begin(), v.end()}; }

}  // namespace

TEST_CASE("undersample_majority") {
    const Dataset d = testing::blobs(1, 5, 2, 1.0, 3);
    auto [rows, idx] = undersample_majority(d, 9);
    CHECK(rows.rows() == 1);
    CHECK(idx.size() == 1);
    CHECK(rows.row(0) == d.negatives().row(idx[0]));

    const Dataset even = testing::blobs(4, 4, 2, 1.0, 3);
    auto [all, all_idx] = undersample_majority(even, 1);
    CHECK(as_set(all_idx) == std::set<Index>{0, 1, 2, 3});

    const Dataset wide = testing::blobs(6, 20, 3, 1.0, 4);
    const auto a = undersample_majority(wide, 77).second;
    const auto b = undersample_majority(wide, 77).second;
    CHECK(a == b);
    CHECK(as_set(a).size() == 6);
    for (Index i : a) CHECK((i >= 0 && i < 20));

    CHECK_THROWS_AS(undersample_majority(testing::blobs(5, 3, 2, 1.0, 1), 0), InvalidDataset);
}

TEST_CASE("generate_universum") {
    Matrix x(2, 2);
    x << 0, 0, 2, 2;
    LabelVector y(2);
    y << 1, -1;
    const Dataset d("pair", x, y);
    const Universum u = generate_universum(d, 1, 5);
    CHECK(u.points.rows() == 1);
    CHECK(u.points(0, 0) == 1.0);
    CHECK(u.points(0, 1) == 1.0);
    CHECK(generate_universum(d, 0, 5).points.rows() == 0);

    // replay the pair log
    const Dataset big = testing::blobs(7, 19, 3, 1.5, 8);
    const Universum v = generate_universum(big, 40, 12);
    REQUIRE(v.pairs.size() == 40);
    const Matrix pos = big.positives();
    const Matrix neg = big.negatives();
    for (Index i = 0; i < 40; ++i) {
        const auto [p, n] = v.pairs[static_cast<std::size_t>(i)];
        const Eigen::RowVectorXd other = 2.0 * v.points.row(i) - pos.row(p);
        CHECK((other - neg.row(n)).cwiseAbs().maxCoeff() < 1e-12);
    }
    CHECK(generate_universum(big, 40, 12).points == v.points);

    LabelVector one(2);
    one << -1, -1;
    CHECK_THROWS_AS(generate_universum(Dataset("x", x, one), 1, 0), InvalidDataset);
}

TEST_CASE("reduce_universum") {
    std::mt19937_64 gen(2);
    const Matrix u = testing::random_matrix(9, 2, gen);
    auto [all, all_idx] = reduce_universum(u, 9, 4);
    CHECK(as_set(all_idx).size() == 9);
    CHECK(reduce_universum(u, 0, 4).first.rows() == 0);
    auto [part, idx] = reduce_universum(u, 4, 4);
    CHECK(part.rows() == 4);
    CHECK(as_set(idx).size() == 4);
    for (Index i = 0; i < part.rows(); ++i) CHECK(has_row(u, part.row(i)));
    CHECK_THROWS(reduce_universum(u, 10, 4));
}

TEST_CASE("build_plan sizes") {
    const SamplingPlan p = build_plan(testing::blobs(4, 10, 2, 1.0, 5), 3);
    CHECK(p.u() == 6);
    CHECK(p.g() == 2);
    CHECK(p.x2_star.rows() == 4);
    CHECK(p.universum_padding == 0);
    CHECK_FALSE(p.balanced_fallback);
    for (Index i = 0; i < p.g(); ++i) CHECK(has_row(p.universum.points, p.universum_star.row(i)));

    CHECK(build_plan(testing::blobs(5, 30, 2, 1.0, 5), 3).g() == 3);

    // u = 1 < g = 3: padded with extra averaged points
    const SamplingPlan mild = build_plan(testing::blobs(5, 6, 2, 1.0, 5), 3);
    CHECK(mild.g() == 3);
    CHECK(mild.u() == 3);
    CHECK(mild.universum_padding == 2);

    const SamplingPlan bal = build_plan(testing::blobs(5, 5, 2, 1.0, 5), 3);
    CHECK(bal.balanced_fallback);
    CHECK(bal.u() == 0);
    CHECK(bal.g() == 0);
    CHECK(bal.x2_star.rows() == 5);
}

TEST_CASE("build_plan is reproducible and seed-sensitive") {
    const Dataset d = testing::blobs(6, 25, 3, 1.0, 6);
    const SamplingPlan a = build_plan(d, 42);
    const SamplingPlan b = build_plan(d, 42);
    CHECK(a.x2_star_indices == b.x2_star_indices);
    CHECK(a.universum.points == b.universum.points);
    CHECK(a.universum_star_indices == b.universum_star_indices);
    const SamplingPlan c = build_plan(d, 43);
    CHECK((c.universum.points != a.universum.points || c.x2_star_indices != a.x2_star_indices));
}
