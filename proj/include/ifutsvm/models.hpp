#ifndef IFUTSVM_MODELS_HPP
#define IFUTSVM_MODELS_HPP

#include "ifutsvm/dataset.hpp"
#include "ifutsvm/kernel.hpp"
#include "ifutsvm/membership.hpp"
#include "ifutsvm/qp.hpp"
#include "ifutsvm/sampling.hpp"

#include <memory>
#include <optional>
#include <string>
#include <utility>

namespace ifutsvm {

enum class ModelKind { utsvm, ifutsvm_id };
enum class ScoreWeighting { intuitionistic, uniform };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);

struct Hyperparams {
    double c1 = 1.0;
    double c2 = 1.0;
    double c3 = 1.0;
    double c4 = 1.0;
    double cu = 1.0;
    double epsilon = 0.5;
    /// Absent: linear model in input space.
    std::optional<KernelSpec> kernel;
    /// Ridge for the UTSVM normal matrices; default 1e-7 * trace(M) / dim.
    std::optional<double> delta;
    FuzzyParams fuzzy;
    std::uint64_t seed = 0;
    /// `uniform` forces every score to 1 (ablation of the fuzzy weighting).
    ScoreWeighting weighting = ScoreWeighting::intuitionistic;
    /// Kernel mode only: measure |w| as sqrt(w^T K(D, D) w) instead of the
    /// Euclidean norm of the expansion coefficients.
    bool rkhs_norm = false;
    SolverOptions solver;

    void validate() const;
};

/// One hyperplane w^T phi + b = 0 in input or kernel-expansion coordinates.
struct Plane {
    Vector w;
    double b = 0.0;
};

/// One of the two dual problems, written generically as
///
///   min_v  1/2 |quad v|^2 + ridge/2 |v|^2 + sum_i push_upper_i xi_i + cu sum_j lambda_j
///   s.t.   push_sign * (push v)           >= 1 - xi,       xi >= 0
///          universum_sign * (universum v) >= (eps - 1) - lambda, lambda >= 0
///
/// with v = (w; b) and every block already augmented by a column of ones.
/// Its dual is the box QP  max e^T alpha + (eps - 1) e^T beta - 1/2 z^T H M^{-1} H^T z
/// with z = (alpha; beta), H = [push_sign push; universum_sign universum] and
/// M = quad^T quad + ridge I; the primal point is v = M^{-1} H^T z.
struct PlaneProblem {
    Matrix quad;
    Matrix push;
    double push_sign = 1.0;
    Matrix universum;
    double universum_sign = 1.0;
    double ridge = 0.0;
};

struct PlaneBounds {
    Vector push_upper;
    double universum_upper = 0.0;
    double epsilon = 0.0;
};

struct PlaneSolution {
    Vector v;
    Vector push_multipliers;
    Vector universum_multipliers;
    double dual_objective = 0.0;
    double kkt_residual = 0.0;
    long iterations = 0;
    /// Stacked multipliers, usable as a warm start.
    Vector z;
};

/// A plane problem with M factorised once; bounds, epsilon and the universum
/// penalty can then vary without refactorising.
class PreparedPlane {
public:
    /// Problems with more dual variables than this keep Q in factored form.
    static constexpr Index dense_limit = 2000;

    explicit PreparedPlane(PlaneProblem problem);

    const PlaneProblem& problem() const noexcept { return problem_; }
    Index dual_size() const noexcept { return h_.rows(); }

    PlaneSolution solve(const PlaneBounds& bounds, const SolverOptions& opts, const Vector* warm = nullptr) const;

    /// Primal objective at v with the optimal slacks for that v.
    double primal_objective(const Vector& v, const PlaneBounds& bounds) const;

    /// The box QP this plane reduces to (dense form).
    BoxQP<double> dual_problem(const PlaneBounds& bounds) const;

private:
    PlaneProblem problem_;
    Matrix h_;
    SpdFactor<double> factor_;
    Matrix w_;  // L^{-1} H^T, so Q = w_^T w_
    Matrix q_;  // formed when dual_size() <= dense_limit
};

struct DualReport {
    Vector alpha;  // plane 1, majority-side constraints
    Vector beta;   // plane 1, universum constraints
    Vector eta;    // plane 2, minority-side constraints
    Vector theta;  // plane 2, universum constraints
    double residual1 = 0.0;
    double residual2 = 0.0;
    long iterations1 = 0;
    long iterations2 = 0;
    double dual_objective1 = 0.0;
    double dual_objective2 = 0.0;
    double primal_objective1 = 0.0;
    double primal_objective2 = 0.0;
    bool balanced_fallback = false;
};

/// Training-time artefacts kept for logs and diagnostics; not serialised.
struct FitDiagnostics {
    std::optional<ScoreWeights> scores;
    std::optional<SamplingPlan> plan;
    Index universum_rows = 0;
};

class TwinModel {
public:
    TwinModel() = default;
    TwinModel(ModelKind kind, Hyperparams hp, Index features, Plane plane1, Plane plane2, Matrix reference);

    ModelKind kind() const noexcept { return kind_; }
    bool is_kernel() const noexcept { return hp_.kernel.has_value(); }
    const Hyperparams& hyperparams() const noexcept { return hp_; }
    Index features() const noexcept { return features_; }
    const Plane& plane1() const noexcept { return plane1_; }
    const Plane& plane2() const noexcept { return plane2_; }
    /// D = [X1; X2] in kernel mode, empty in linear mode.
    const Matrix& reference() const noexcept { return reference_; }
    double norm1() const noexcept { return norm1_; }
    double norm2() const noexcept { return norm2_; }

    DualReport dual_report;
    FitDiagnostics diagnostics;

    /// Rows of x in model coordinates: K(x, D^T) in kernel mode, x itself otherwise.
    Matrix coordinates(const Matrix& x) const;
    /// Columns f1, f2 for rows already in model coordinates.
    Matrix plane_values(const Matrix& z) const;
    /// +1 / -1 for rows already in model coordinates.
    LabelVector classify(const Matrix& z) const;

    /// Columns f1(x), f2(x) of signed plane values for each row of x.
    Matrix decision_values(const Matrix& x) const;
    /// Columns |f_i(x)| / |w_i|.
    Matrix decision_distances(const Matrix& x) const;
    /// +1 where the first plane is at least as close, else -1.
    LabelVector predict(const Matrix& x) const;

private:
    ModelKind kind_ = ModelKind::ifutsvm_id;
    Hyperparams hp_;
    Index features_ = 0;
    Plane plane1_;
    Plane plane2_;
    Matrix reference_;
    double norm1_ = 0.0;
    double norm2_ = 0.0;
};

std::pair<double, double> decision_distances(const TwinModel& model, const Vector& x);
int predict(const TwinModel& model, const Vector& x);

/// Rows of every block expressed in model coordinates (raw features in linear
/// mode, K(., D^T) in kernel mode) and augmented with a column of ones.
struct TwinBlocks {
    Matrix positives;       // E = [X1 e]
    Matrix negatives;       // F = [X2 e]
    Matrix negatives_star;  // F* = [X2* e]
    Matrix universum;       // G = [U e]
    Matrix universum_star;  // G* = [U* e]
    Matrix reference;       // D, kernel mode only
};

/// `train_gram` may pass a precomputed K(train, train^T) in dataset order.
TwinBlocks make_blocks(const Dataset& train, const std::optional<KernelSpec>& kernel, const Matrix& universum,
                       const SamplingPlan* plan, const Matrix* train_gram = nullptr);

/// Everything about an IFUTSVM-ID fit that does not depend on c1..c4, cu or
/// epsilon: scores, sampling plan and the assembled blocks.
class IfutsvmContext {
public:
    IfutsvmContext(const Dataset& train, const std::optional<KernelSpec>& kernel, const FuzzyParams& fuzzy,
                   ScoreWeighting weighting, std::uint64_t seed, const Matrix* train_gram = nullptr);

    const SamplingPlan& plan() const noexcept { return plan_; }
    const ScoreWeights& scores() const noexcept { return scores_; }
    const TwinBlocks& blocks() const noexcept { return blocks_; }
    /// Scores of the undersampled negatives, s2[x2_star_indices].
    const Vector& s2_star() const noexcept { return s2_star_; }
    /// Scores used as slack weights (all ones under uniform weighting).
    const Vector& s1_weights() const noexcept { return s1_weights_; }

    PlaneProblem plane1_problem(double c3) const;
    PlaneProblem plane2_problem(double c4) const;
    PlaneBounds plane1_bounds(const Hyperparams& hp) const;
    PlaneBounds plane2_bounds(const Hyperparams& hp) const;

    /// Solves both duals for prepared planes and assembles the model.
    TwinModel fit(const PreparedPlane& plane1, const PreparedPlane& plane2, const Hyperparams& hp,
                  const Vector* warm1 = nullptr, const Vector* warm2 = nullptr) const;

private:
    Index features_;
    std::optional<KernelSpec> kernel_;
    SamplingPlan plan_;
    ScoreWeights scores_;
    TwinBlocks blocks_;
    Vector s2_star_;
    Vector s1_weights_;
};

/// UTSVM counterpart: fixed universum, unweighted slacks, ridge delta.
class UtsvmContext {
public:
    UtsvmContext(const Dataset& train, const std::optional<KernelSpec>& kernel, const Matrix& universum,
                 const Matrix* train_gram = nullptr);

    const TwinBlocks& blocks() const noexcept { return blocks_; }

    PlaneProblem plane1_problem(const std::optional<double>& delta) const;
    PlaneProblem plane2_problem(const std::optional<double>& delta) const;
    PlaneBounds plane1_bounds(const Hyperparams& hp) const;
    PlaneBounds plane2_bounds(const Hyperparams& hp) const;

    TwinModel fit(const PreparedPlane& plane1, const PreparedPlane& plane2, const Hyperparams& hp,
                  const Vector* warm1 = nullptr, const Vector* warm2 = nullptr) const;

private:
    Index features_;
    std::optional<KernelSpec> kernel_;
    TwinBlocks blocks_;
};

/// Default UTSVM ridge 1e-7 * trace(quad^T quad) / dim.
double default_delta(const Matrix& quad);

TwinModel fit_utsvm(const Dataset& train, const Matrix& universum, const Hyperparams& hp);
TwinModel fit_ifutsvm_id(const Dataset& train, const Hyperparams& hp);

/// Universum used by the UTSVM baseline: the same random-averaging
/// construction, max(m2 - m1, ceil(m1 / 2)) points.
Matrix baseline_universum(const Dataset& train, std::uint64_t seed);

TwinModel fit_model(ModelKind kind, const Dataset& train, const Hyperparams& hp);

}  // namespace ifutsvm

#endif  // IFUTSVM_MODELS_HPP
