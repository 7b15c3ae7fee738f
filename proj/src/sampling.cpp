#include "ifutsvm/sampling.hpp"

namespace ifutsvm {

std::pair<Matrix, IndexList> undersample_majority(const Dataset& ds, std::uint64_t seed) {
    if (ds.m1() < 1) throw InvalidDataset("undersampling needs at least one positive sample");
    if (ds.m1() > ds.m2())
        throw InvalidDataset("minority convention violated: m1 = " + std::to_string(ds.m1()) +
                             " exceeds m2 = " + std::to_string(ds.m2()));
    Rng rng(seed);
    auto chosen = rng.sample_without_replacement(ds.m2(), ds.m1());
    return {select_rows(ds.negatives(), chosen), std::move(chosen)};
}

Universum generate_universum(const Dataset& ds, Index count, std::uint64_t seed) {
    if (ds.m1() == 0 || ds.m2() == 0) throw InvalidDataset("universum generation needs both classes");
    if (count < 0) throw std::invalid_argument("universum count must be non-negative");
    const Matrix pos = ds.positives();
    const Matrix neg = ds.negatives();
    Rng rng(seed);
    Universum u;
    u.points.resize(count, ds.dim());
    u.pairs.reserve(static_cast<std::size_t>(count));
    for (Index i = 0; i < count; ++i) {
        const auto p = static_cast<Index>(rng.below(static_cast<std::uint64_t>(pos.rows())));
        const auto n = static_cast<Index>(rng.below(static_cast<std::uint64_t>(neg.rows())));
        u.points.row(i) = 0.5 * (pos.row(p) + neg.row(n));
        u.pairs.emplace_back(p, n);
    }
    return u;
}

std::pair<Matrix, IndexList> reduce_universum(const Matrix& universum, Index g, std::uint64_t seed) {
    if (g < 0 || g > universum.rows())
        throw std::invalid_argument("cannot draw " + std::to_string(g) + " rows from a universum of " +
                                    std::to_string(universum.rows()));
    Rng rng(seed);
    auto chosen = rng.sample_without_replacement(universum.rows(), g);
    return {select_rows(universum, chosen), std::move(chosen)};
}

SamplingPlan build_plan(const Dataset& ds, std::uint64_t seed) {
    if (ds.m1() < 1 || ds.m2() < 1) throw InvalidDataset("sampling plan needs both classes");
    SamplingPlan plan;
    plan.seed = seed;
    auto [x2_star, x2_idx] = undersample_majority(ds, Rng::stream(seed, 0).next());
    plan.x2_star = std::move(x2_star);
    plan.x2_star_indices = std::move(x2_idx);

    if (ds.m1() == ds.m2()) {
        plan.balanced_fallback = true;
        plan.universum.points.resize(0, ds.dim());
        plan.universum_star.resize(0, ds.dim());
        return plan;
    }

    const Index u = ds.m2() - ds.m1();
    const Index g = (ds.m1() + 1) / 2;
    const Index count = std::max(u, g);
    plan.universum_padding = count - u;
    plan.universum = generate_universum(ds, count, Rng::stream(seed, 1).next());
    auto [u_star, u_idx] = reduce_universum(plan.universum.points, g, Rng::stream(seed, 2).next());
    plan.universum_star = std::move(u_star);
    plan.universum_star_indices = std::move(u_idx);
    return plan;
}

}  // namespace ifutsvm
