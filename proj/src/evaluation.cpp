#include "ifutsvm/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

namespace ifutsvm {

namespace {

constexpr double nan_value = std::numeric_limits<double>::quiet_NaN();

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::optional<double> ratio(long a, long b) {
    if (b == 0) return std::nullopt;
    return static_cast<double>(a) / static_cast<double>(b);
}

std::vector<double> sorted_unique(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

double accuracy_of(const LabelVector& truth, const LabelVector& predicted) {
    return (truth.array() == predicted.array()).cast<double>().mean();
}

/// Runs task(i) for i in [0, count) on up to `threads` workers; the first
/// exception (lowest index) is rethrown after all workers finish.
template <typename Task>
void parallel_for(std::size_t count, int threads, Task task) {
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                task(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const auto n = static_cast<std::size_t>(std::max(1, threads));
    if (n == 1 || count <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < std::min(n, count); ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

Vector stacked(const Vector& a, const Vector& b) {
    Vector z(a.size() + b.size());
    z << a, b;
    return z;
}

}  // namespace

ConfusionMatrix confusion(const LabelVector& truth, const LabelVector& predicted) {
    if (truth.size() != predicted.size()) throw DimensionMismatch("label vectors differ in length");
    ConfusionMatrix cm;
    for (Index i = 0; i < truth.size(); ++i) {
        const bool pos = truth(i) == 1;
        const bool hit = predicted(i) == truth(i);
        if (pos) (hit ? cm.tp : cm.fn) += 1;
        else (hit ? cm.tn : cm.fp) += 1;
    }
    return cm;
}

ConfusionMatrix confusion(const TwinModel& model, const Dataset& test) {
    return confusion(test.labels(), model.predict(test.features()));
}

MetricsReport metrics(const ConfusionMatrix& cm) {
    if (cm.tp < 0 || cm.fn < 0 || cm.fp < 0 || cm.tn < 0)
        throw std::invalid_argument("confusion counts must be non-negative");
    MetricsReport r;
    r.accuracy = ratio(cm.tp + cm.tn, cm.total());
    r.sensitivity = ratio(cm.tp, cm.tp + cm.fn);
    r.specificity = ratio(cm.tn, cm.tn + cm.fp);
    r.precision = ratio(cm.tp, cm.tp + cm.fp);
    return r;
}

// ---------------------------------------------------------------------------
// grid search

void ParameterGrid::validate() const {
    if (c1.empty() || c3.empty() || cu.empty() || epsilon.empty())
        throw ConfigError("every grid axis needs at least one value");
    for (double v : c1)
        if (!(v > 0)) throw ConfigError("grid c1 values must be positive");
    for (double v : c3)
        if (!(v > 0)) throw ConfigError("grid c3 values must be positive");
    for (double v : cu)
        if (!(v >= 0)) throw ConfigError("grid cu values must be non-negative");
    for (double v : epsilon)
        if (!(v >= 0 && v < 1)) throw ConfigError("grid epsilon values must lie in [0, 1)");
    for (double v : width)
        if (!(v > 0)) throw ConfigError("grid kernel widths must be positive");
}

ParameterGrid ParameterGrid::normalized() const {
    return ParameterGrid{sorted_unique(c1), sorted_unique(c3), sorted_unique(cu), sorted_unique(epsilon),
                         sorted_unique(width)};
}

std::size_t ParameterGrid::size() const {
    return c1.size() * c3.size() * cu.size() * epsilon.size() * std::max<std::size_t>(width.size(), 1);
}

ParameterGrid full_grid() {
    ParameterGrid g;
    g.c1.clear();
    for (int e = -5; e <= 5; ++e) g.c1.push_back(std::pow(10.0, e));
    g.c3 = g.c1;
    g.cu = g.c1;
    g.epsilon = {0.1, 0.3, 0.5, 0.6};
    for (int e = -5; e <= 5; ++e) g.width.push_back(std::ldexp(1.0, e));
    return g;
}

Hyperparams GridPoint::apply(Hyperparams base) const {
    base.c1 = base.c2 = c1;
    base.c3 = base.c4 = c3;
    base.cu = cu;
    base.epsilon = epsilon;
    base.kernel = width ? std::optional<KernelSpec>(KernelSpec(*width)) : std::nullopt;
    return base;
}

CvResult grid_search_cv(ModelKind kind, const Dataset& train, const ParameterGrid& grid, const Hyperparams& base,
                        const CvOptions& options) {
    grid.validate();
    base.validate();
    if (options.folds < 2) throw ConfigError("cross-validation needs at least two folds");
    const ParameterGrid g = grid.normalized();
    const auto folds = stratified_folds(train, options.folds, options.seed);
    const auto k = static_cast<std::size_t>(options.folds);

    std::vector<std::optional<double>> widths;
    for (double w : g.width) widths.emplace_back(w);
    if (widths.empty()) widths.emplace_back(std::nullopt);
    const std::vector<double> c3s = kind == ModelKind::utsvm ? std::vector<double>{g.c3.front()} : g.c3;

    const std::size_t n3 = c3s.size(), nu = g.cu.size(), ne = g.epsilon.size(), nw = widths.size();
    auto row_index = [&](std::size_t i1, std::size_t i3, std::size_t iu, std::size_t ie, std::size_t iw) {
        return (((i1 * n3 + i3) * nu + iu) * ne + ie) * nw + iw;
    };

    CvResult result;
    result.table.resize(g.c1.size() * n3 * nu * ne * nw);
    for (std::size_t i1 = 0; i1 < g.c1.size(); ++i1)
        for (std::size_t i3 = 0; i3 < n3; ++i3)
            for (std::size_t iu = 0; iu < nu; ++iu)
                for (std::size_t ie = 0; ie < ne; ++ie)
                    for (std::size_t iw = 0; iw < nw; ++iw) {
                        auto& row = result.table[row_index(i1, i3, iu, ie, iw)];
                        row.point = GridPoint{g.c1[i1], c3s[i3], g.cu[iu], g.epsilon[ie], widths[iw]};
                        row.fold_accuracy.assign(k, nan_value);
                    }
    // 0 ok, 1 failed, 2 balanced fallback; one slot per (row, fold)
    std::vector<char> status(result.table.size() * k, 0);

    auto task = [&](std::size_t t) {
        const std::size_t f = t / nw;
        const std::size_t iw = t % nw;
        const IndexList& val_rows = folds[f];
        std::vector<bool> in_val(static_cast<std::size_t>(train.size()), false);
        for (auto i : val_rows) in_val[static_cast<std::size_t>(i)] = true;
        IndexList train_rows;
        for (Index i = 0; i < train.size(); ++i)
            if (!in_val[static_cast<std::size_t>(i)]) train_rows.push_back(i);
        const Dataset tr = train.subset(train_rows);
        const Dataset va = train.subset(val_rows);
        const std::uint64_t fold_seed = Rng::stream(options.seed, 1000 + f).next();

        const auto kernel = widths[iw] ? std::optional<KernelSpec>(KernelSpec(*widths[iw])) : std::nullopt;
        Matrix tr_gram;
        if (kernel) tr_gram = gram(tr.features(), *kernel);

        auto sweep = [&](const auto& ctx, const PreparedPlane& p1, const PreparedPlane& p2, std::size_t i3) {
            const Matrix z_val = kernel ? gram(va.features(), ctx.blocks().reference, *kernel) : va.features();
            Vector warm1, warm2;
            for (std::size_t i1 = 0; i1 < g.c1.size(); ++i1)
                for (std::size_t iu = 0; iu < nu; ++iu)
                    for (std::size_t ie = 0; ie < ne; ++ie) {
                        const std::size_t r = row_index(i1, i3, iu, ie, iw);
                        const Hyperparams hp = result.table[r].point.apply(base);
                        char& st = status[r * k + f];
                        try {
                            const TwinModel model = ctx.fit(p1, p2, hp, warm1.size() ? &warm1 : nullptr,
                                                            warm2.size() ? &warm2 : nullptr);
                            warm1 = stacked(model.dual_report.alpha, model.dual_report.beta);
                            warm2 = stacked(model.dual_report.eta, model.dual_report.theta);
                            result.table[r].fold_accuracy[f] = accuracy_of(va.labels(), model.classify(z_val));
                            st = model.dual_report.balanced_fallback ? 2 : 0;
                        } catch (const NumericError&) {
                            st = 1;
                        }
                    }
        };

        if (kind == ModelKind::ifutsvm_id) {
            const IfutsvmContext ctx(tr, kernel, base.fuzzy, base.weighting, fold_seed,
                                     kernel ? &tr_gram : nullptr);
            for (std::size_t i3 = 0; i3 < n3; ++i3) {
                std::optional<PreparedPlane> p1, p2;
                try {
                    p1.emplace(ctx.plane1_problem(c3s[i3]));
                    p2.emplace(ctx.plane2_problem(c3s[i3]));
                } catch (const NumericError&) {
                    for (std::size_t i1 = 0; i1 < g.c1.size(); ++i1)
                        for (std::size_t iu = 0; iu < nu; ++iu)
                            for (std::size_t ie = 0; ie < ne; ++ie) status[row_index(i1, i3, iu, ie, iw) * k + f] = 1;
                    continue;
                }
                sweep(ctx, *p1, *p2, i3);
            }
        } else {
            const Matrix universum = baseline_universum(tr, fold_seed);
            const UtsvmContext ctx(tr, kernel, universum, kernel ? &tr_gram : nullptr);
            const PreparedPlane p1(ctx.plane1_problem(base.delta));
            const PreparedPlane p2(ctx.plane2_problem(base.delta));
            sweep(ctx, p1, p2, 0);
        }
    };
    parallel_for(k * nw, options.threads, task);

    for (std::size_t r = 0; r < result.table.size(); ++r) {
        auto& row = result.table[r];
        for (std::size_t f = 0; f < k; ++f) {
            if (status[r * k + f] == 1) ++row.failed_folds;
            if (status[r * k + f] == 2) ++row.fallback_folds;
        }
        if (row.failed_folds > 0) {
            row.mean_accuracy = nan_value;
            ++result.failed_points;
            continue;
        }
        row.mean_accuracy = std::accumulate(row.fold_accuracy.begin(), row.fold_accuracy.end(), 0.0) /
                            static_cast<double>(k);
    }

    // Complete points first. If every point lost a fold, fall back to the
    // fewest failed folds, scored over the folds that did train.
    bool have_best = false;
    int best_failed = 0;
    for (const auto& row : result.table) {
        const int failed = row.failed_folds;
        if (failed == static_cast<int>(k)) continue;
        double acc = 0.0;
        for (double a : row.fold_accuracy)
            if (!std::isnan(a)) acc += a;
        acc /= static_cast<double>(static_cast<int>(k) - failed);
        if (!have_best || failed < best_failed || (failed == best_failed && acc > result.best_accuracy)) {
            have_best = true;
            best_failed = failed;
            result.best_accuracy = acc;
            result.best_point = row.point;
        }
    }
    if (!have_best) throw NumericError("grid search: no lattice point trained successfully");
    result.best_failed_folds = best_failed;
    result.best = result.best_point.apply(base);
    return result;
}

void write_cv_csv(std::ostream& out, const CvResult& result) {
    const std::size_t k = result.table.empty() ? 0 : result.table.front().fold_accuracy.size();
    out << "c1,c2,c3,c4,cu,epsilon,width,mean_accuracy";
    for (std::size_t f = 0; f < k; ++f) out << ",fold" << f + 1;
    out << ",failed_folds,fallback_folds\n";
    for (const auto& row : result.table) {
        const auto& p = row.point;
        out << num(p.c1) << ',' << num(p.c1) << ',' << num(p.c3) << ',' << num(p.c3) << ',' << num(p.cu) << ','
            << num(p.epsilon) << ',' << (p.width ? num(*p.width) : "linear") << ',' << num(row.mean_accuracy);
        for (double a : row.fold_accuracy) out << ',' << num(a);
        out << ',' << row.failed_folds << ',' << row.fallback_folds << '\n';
    }
}

// ---------------------------------------------------------------------------
// ranks and statistics

RankTable average_ranks(const Matrix& accuracies) {
    const Index n = accuracies.rows();
    const Index p = accuracies.cols();
    if (n < 1 || p < 2) throw std::invalid_argument("ranking needs at least one row and two columns");
    if (accuracies.hasNaN()) throw std::invalid_argument("accuracy matrix contains NaN");
    RankTable t;
    t.accuracies = accuracies;
    t.ranks.resize(n, p);
    std::vector<Index> order(static_cast<std::size_t>(p));
    for (Index i = 0; i < n; ++i) {
        std::iota(order.begin(), order.end(), Index{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](Index a, Index b) { return accuracies(i, a) > accuracies(i, b); });
        for (Index s = 0; s < p;) {
            Index e = s;
            while (e + 1 < p && accuracies(i, order[static_cast<std::size_t>(e + 1)]) ==
                                    accuracies(i, order[static_cast<std::size_t>(s)]))
                ++e;
            const double r = 0.5 * static_cast<double>(s + e) + 1.0;
            for (Index j = s; j <= e; ++j) t.ranks(i, order[static_cast<std::size_t>(j)]) = r;
            s = e + 1;
        }
    }
    t.average_ranks = t.ranks.colwise().mean().transpose();
    return t;
}

FriedmanResult friedman(const Vector& average_ranks, long n, long p) {
    if (p < 2 || n < 2) throw std::invalid_argument("Friedman test needs p >= 2 and N >= 2");
    if (average_ranks.size() != p) throw DimensionMismatch("rank vector length differs from p");
    if (average_ranks.minCoeff() < 1.0 || average_ranks.maxCoeff() > static_cast<double>(p))
        throw std::invalid_argument("average ranks must lie in [1, p]");
    const double pd = static_cast<double>(p);
    const double nd = static_cast<double>(n);
    FriedmanResult r;
    r.chi_sq = 12.0 * nd / (pd * (pd + 1.0)) * (average_ranks.squaredNorm() - pd * (pd + 1.0) * (pd + 1.0) / 4.0);
    const double denom = nd * (pd - 1.0) - r.chi_sq;
    if (denom > 0.0) r.f_stat = (nd - 1.0) * r.chi_sq / denom;
    return r;
}

double nemenyi_cd(long p, long n, double q_alpha) {
    if (p < 1 || n < 1 || q_alpha < 0.0) throw std::invalid_argument("Nemenyi: p, N must be positive");
    const double pd = static_cast<double>(p);
    return q_alpha * std::sqrt(pd * (pd + 1.0) / (6.0 * static_cast<double>(n)));
}

nlohmann::json statistics_json(const RankTable& table, double q_alpha, const std::vector<std::string>& models) {
    const long n = static_cast<long>(table.ranks.rows());
    const long p = static_cast<long>(table.ranks.cols());
    if (static_cast<long>(models.size()) != p) throw DimensionMismatch("model name count differs from columns");
    nlohmann::json j;
    const auto fr = friedman(table.average_ranks, n, p);
    const double cd = nemenyi_cd(p, n, q_alpha);
    j["datasets"] = n;
    j["models"] = models;
    j["average_ranks"] = std::vector<double>(table.average_ranks.data(), table.average_ranks.data() + p);
    const Vector mean_acc = table.accuracies.colwise().mean().transpose();
    j["average_accuracy"] = std::vector<double>(mean_acc.data(), mean_acc.data() + p);
    j["chi_sq"] = fr.chi_sq;
    j["f_stat"] = fr.f_stat ? nlohmann::json(*fr.f_stat) : nlohmann::json(nullptr);
    j["q_alpha"] = q_alpha;
    j["cd"] = cd;
    auto diff = nlohmann::json::array();
    auto sig = nlohmann::json::array();
    for (long a = 0; a < p; ++a) {
        std::vector<double> drow;
        std::vector<bool> srow;
        for (long b = 0; b < p; ++b) {
            const double d = std::abs(table.average_ranks(a) - table.average_ranks(b));
            drow.push_back(d);
            srow.push_back(d > cd);
        }
        diff.push_back(drow);
        sig.push_back(srow);
    }
    j["rank_differences"] = diff;
    j["significant"] = sig;
    return j;
}

void write_rank_csv(std::ostream& out, const RankTable& table, const std::vector<std::string>& datasets,
                    const std::vector<std::string>& models) {
    if (static_cast<Index>(datasets.size()) != table.ranks.rows() ||
        static_cast<Index>(models.size()) != table.ranks.cols())
        throw DimensionMismatch("rank table labels do not match its shape");
    out << "dataset";
    for (const auto& m : models) out << ',' << m << "_acc";
    for (const auto& m : models) out << ',' << m << "_rank";
    out << '\n';
    for (Index i = 0; i < table.ranks.rows(); ++i) {
        out << datasets[static_cast<std::size_t>(i)];
        for (Index j = 0; j < table.ranks.cols(); ++j) out << ',' << num(table.accuracies(i, j));
        for (Index j = 0; j < table.ranks.cols(); ++j) out << ',' << num(table.ranks(i, j));
        out << '\n';
    }
    out << "average";
    const Vector mean_acc = table.accuracies.colwise().mean().transpose();
    for (Index j = 0; j < table.ranks.cols(); ++j) out << ',' << num(mean_acc(j));
    for (Index j = 0; j < table.ranks.cols(); ++j) out << ',' << num(table.average_ranks(j));
    out << '\n';
}

}  // namespace ifutsvm
