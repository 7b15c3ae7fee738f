#ifndef IFUTSVM_EVALUATION_HPP
#define IFUTSVM_EVALUATION_HPP

#include "ifutsvm/models.hpp"

#include <json.hpp>

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace ifutsvm {

struct ConfusionMatrix {
    long tp = 0;
    long fn = 0;
    long fp = 0;
    long tn = 0;

    long total() const noexcept { return tp + fn + fp + tn; }
};

/// Positive class is +1 (minority).
ConfusionMatrix confusion(const LabelVector& truth, const LabelVector& predicted);
ConfusionMatrix confusion(const TwinModel& model, const Dataset& test);

/// Absent values mark a zero denominator.
struct MetricsReport {
    std::optional<double> accuracy;
    std::optional<double> sensitivity;
    std::optional<double> specificity;
    std::optional<double> precision;
};

MetricsReport metrics(const ConfusionMatrix& cm);

/// Search axes. c2 follows c1 and c4 follows c3. An empty `width` list means
/// linear models. UTSVM has no c3 axis; its lattice uses c3 = c3.front().
struct ParameterGrid {
    std::vector<double> c1{1.0};
    std::vector<double> c3{1.0};
    std::vector<double> cu{1.0};
    std::vector<double> epsilon{0.5};
    std::vector<double> width;

    void validate() const;
    /// Sorted, duplicate-free copy.
    ParameterGrid normalized() const;
    std::size_t size() const;
};

/// c_i = c_u in {1e-5, ..., 1e5}, eps in {0.1, 0.3, 0.5, 0.6}, width in {2^-5, ..., 2^5}.
ParameterGrid full_grid();

struct GridPoint {
    double c1 = 1.0;
    double c3 = 1.0;
    double cu = 1.0;
    double epsilon = 0.5;
    std::optional<double> width;

    Hyperparams apply(Hyperparams base) const;
};

struct CvRow {
    GridPoint point;
    /// NaN when any fold failed to train.
    double mean_accuracy = 0.0;
    std::vector<double> fold_accuracy;
    int failed_folds = 0;
    int fallback_folds = 0;
};

struct CvResult {
    Hyperparams best;
    GridPoint best_point;
    double best_accuracy = 0.0;
    /// Lattice order: c1, then c3, cu, epsilon, width (slowest to fastest).
    std::vector<CvRow> table;
    int failed_points = 0;
    /// Folds the chosen point failed in; nonzero only when no point trained in all of them.
    int best_failed_folds = 0;
};

struct CvOptions {
    int folds = 5;
    std::uint64_t seed = 0;
    int threads = 1;
};

/// Stratified k-fold grid search. Each lattice point is scored by its mean
/// fold accuracy; the first maximum in lattice order wins. Points whose fit
/// throws a numeric error in any fold get a NaN mean and lose to every
/// complete point. When none is complete the fewest failed folds wins, then
/// the mean over the folds that trained.
/// `base` supplies everything the grid does not (fuzzy params, solver, delta).
CvResult grid_search_cv(ModelKind kind, const Dataset& train, const ParameterGrid& grid, const Hyperparams& base,
                        const CvOptions& options);

void write_cv_csv(std::ostream& out, const CvResult& result);

struct RankTable {
    Matrix accuracies;
    Matrix ranks;
    Vector average_ranks;
};

/// Rank 1 = highest accuracy per row; ties share the mean of their positions.
RankTable average_ranks(const Matrix& accuracies);

struct FriedmanResult {
    double chi_sq = 0.0;
    /// Absent when chi_sq >= N (p - 1).
    std::optional<double> f_stat;
};

FriedmanResult friedman(const Vector& average_ranks, long n, long p);

double nemenyi_cd(long p, long n, double q_alpha);

/// Summary block: chi_sq, f_stat, cd and the pairwise |R_i - R_j| > cd matrix.
nlohmann::json statistics_json(const RankTable& table, double q_alpha, const std::vector<std::string>& models);

void write_rank_csv(std::ostream& out, const RankTable& table, const std::vector<std::string>& datasets,
                    const std::vector<std::string>& models);

}  // namespace ifutsvm

#endif  // IFUTSVM_EVALUATION_HPP
