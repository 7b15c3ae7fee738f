#include "ifutsvm/models.hpp"

#include <cmath>

namespace ifutsvm {

namespace {

Matrix empty_rows(Index cols) { return Matrix(0, cols); }

Plane split_plane(const Vector& v) {
    return Plane{v.head(v.size() - 1), v(v.size() - 1)};
}

void check_plane(const Plane& p, const char* which) {
    if (!(p.w.norm() >= 1e-12))
        throw NumericError(std::string("degenerate hyperplane: |w") + which + "| is zero");
}

}  // namespace

std::string to_string(ModelKind kind) {
    return kind == ModelKind::utsvm ? "utsvm" : "ifutsvm-id";
}

ModelKind parse_model_kind(const std::string& name) {
    std::string lower;
    for (char ch : name) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    if (lower == "utsvm") return ModelKind::utsvm;
    if (lower == "ifutsvm-id" || lower == "ifutsvm_id" || lower == "ifutsvm") return ModelKind::ifutsvm_id;
    throw ConfigError("unknown model kind '" + name + "'");
}

void Hyperparams::validate() const {
    for (double c : {c1, c2, c3, c4})
        if (!(c > 0.0) || !std::isfinite(c)) throw ConfigError("penalty parameters c1..c4 must be positive");
    if (!(cu >= 0.0) || !std::isfinite(cu)) throw ConfigError("cu must be non-negative");
    if (!(epsilon >= 0.0 && epsilon < 1.0)) throw ConfigError("epsilon must lie in [0, 1)");
    if (delta && !(*delta >= 0.0)) throw ConfigError("delta must be non-negative");
    fuzzy.validate();
    if (!(solver.tol > 0.0) || solver.max_iter < 1) throw ConfigError("invalid solver settings");
}

// ---------------------------------------------------------------------------
// PreparedPlane

PreparedPlane::PreparedPlane(PlaneProblem problem) : problem_(std::move(problem)) {
    const Index p = problem_.quad.cols();
    if (problem_.push.cols() != p || problem_.universum.cols() != p)
        throw DimensionMismatch("plane blocks disagree on the number of coefficients");
    h_.resize(problem_.push.rows() + problem_.universum.rows(), p);
    h_.topRows(problem_.push.rows()) = problem_.push_sign * problem_.push;
    h_.bottomRows(problem_.universum.rows()) = problem_.universum_sign * problem_.universum;

    const Matrix normal = problem_.quad.transpose() * problem_.quad;
    factor_ = SpdFactor<double>(normal, problem_.ridge);
    w_ = factor_.half_solve(h_.transpose());
    if (h_.rows() <= dense_limit) {
        q_ = w_.transpose() * w_;
        q_ = 0.5 * (q_ + q_.transpose()).eval();
    }
}

BoxQP<double> PreparedPlane::dual_problem(const PlaneBounds& bounds) const {
    const Index kp = problem_.push.rows();
    const Index ku = problem_.universum.rows();
    if (bounds.push_upper.size() != kp) throw DimensionMismatch("push bound vector has wrong length");
    BoxQP<double> qp;
    qp.Q = q_.size() > 0 || h_.rows() == 0 ? q_ : Matrix(w_.transpose() * w_);
    qp.c.resize(kp + ku);
    qp.c.head(kp).setOnes();
    qp.c.tail(ku).setConstant(bounds.epsilon - 1.0);
    qp.upper.resize(kp + ku);
    qp.upper.head(kp) = bounds.push_upper;
    qp.upper.tail(ku).setConstant(bounds.universum_upper);
    return qp;
}

PlaneSolution PreparedPlane::solve(const PlaneBounds& bounds, const SolverOptions& opts, const Vector* warm) const {
    BoxQP<double> qp = dual_problem(bounds);
    QPSolution<double> sol;
    if (h_.rows() <= dense_limit) {
        sol = solve_box_qp(qp, opts, warm);
    } else {
        FactoredBoxQP<double> fqp{w_, qp.c, qp.upper};
        sol = solve_box_qp(fqp, opts, warm);
    }
    PlaneSolution out;
    out.v = factor_.back_solve(w_ * sol.z);
    out.push_multipliers = sol.z.head(problem_.push.rows());
    out.universum_multipliers = sol.z.tail(problem_.universum.rows());
    out.dual_objective = sol.objective;
    out.kkt_residual = sol.kkt_residual;
    out.iterations = sol.iterations;
    out.z = std::move(sol.z);
    return out;
}

double PreparedPlane::primal_objective(const Vector& v, const PlaneBounds& bounds) const {
    const auto& p = problem_;
    double obj = 0.5 * (p.quad * v).squaredNorm() + 0.5 * p.ridge * v.squaredNorm();
    const Vector push_slack = (1.0 - (p.push_sign * (p.push * v)).array()).max(0.0);
    obj += bounds.push_upper.dot(push_slack);
    if (p.universum.rows() > 0) {
        const Vector univ_slack = ((bounds.epsilon - 1.0) - (p.universum_sign * (p.universum * v)).array()).max(0.0);
        obj += bounds.universum_upper * univ_slack.sum();
    }
    return obj;
}

// ---------------------------------------------------------------------------
// TwinModel

TwinModel::TwinModel(ModelKind kind, Hyperparams hp, Index features, Plane plane1, Plane plane2, Matrix reference)
    : kind_(kind),
      hp_(std::move(hp)),
      features_(features),
      plane1_(std::move(plane1)),
      plane2_(std::move(plane2)),
      reference_(std::move(reference)) {
    const Index expected = is_kernel() ? reference_.rows() : features_;
    if (plane1_.w.size() != expected || plane2_.w.size() != expected)
        throw DimensionMismatch("plane coefficient length does not match the model mode");
    if (is_kernel() && reference_.cols() != features_)
        throw DimensionMismatch("reference matrix has the wrong number of features");
    if (is_kernel() && hp_.rkhs_norm) {
        const Matrix k = gram(reference_, *hp_.kernel);
        norm1_ = std::sqrt(std::max(0.0, plane1_.w.dot(k * plane1_.w)));
        norm2_ = std::sqrt(std::max(0.0, plane2_.w.dot(k * plane2_.w)));
    } else {
        norm1_ = plane1_.w.norm();
        norm2_ = plane2_.w.norm();
    }
}

Matrix TwinModel::coordinates(const Matrix& x) const {
    if (x.cols() != features_)
        throw DimensionMismatch("sample has " + std::to_string(x.cols()) + " features, model expects " +
                                std::to_string(features_));
    if (is_kernel()) return gram(x, reference_, *hp_.kernel);
    return x;
}

Matrix TwinModel::plane_values(const Matrix& z) const {
    if (z.cols() != plane1_.w.size()) throw DimensionMismatch("coordinate rows have the wrong length");
    Matrix f(z.rows(), 2);
    f.col(0) = (z * plane1_.w).array() + plane1_.b;
    f.col(1) = (z * plane2_.w).array() + plane2_.b;
    return f;
}

LabelVector TwinModel::classify(const Matrix& z) const {
    const Matrix f = plane_values(z);
    LabelVector y(z.rows());
    for (Index i = 0; i < z.rows(); ++i) y(i) = std::abs(f(i, 0)) / norm1_ <= std::abs(f(i, 1)) / norm2_ ? 1 : -1;
    return y;
}

Matrix TwinModel::decision_values(const Matrix& x) const { return plane_values(coordinates(x)); }

Matrix TwinModel::decision_distances(const Matrix& x) const {
    Matrix d = decision_values(x).cwiseAbs();
    d.col(0) /= norm1_;
    d.col(1) /= norm2_;
    return d;
}

LabelVector TwinModel::predict(const Matrix& x) const { return classify(coordinates(x)); }

std::pair<double, double> decision_distances(const TwinModel& model, const Vector& x) {
    const Matrix d = model.decision_distances(x.transpose());
    return {d(0, 0), d(0, 1)};
}

int predict(const TwinModel& model, const Vector& x) {
    return model.predict(x.transpose())(0);
}

// ---------------------------------------------------------------------------
// Block assembly

TwinBlocks make_blocks(const Dataset& train, const std::optional<KernelSpec>& kernel, const Matrix& universum,
                       const SamplingPlan* plan, const Matrix* train_gram) {
    if (universum.rows() > 0 && universum.cols() != train.dim())
        throw DimensionMismatch("universum has the wrong number of features");
    const auto pos = train.positive_indices();
    const auto neg = train.negative_indices();
    TwinBlocks b;
    if (!kernel) {
        const Index cols = train.dim() + 1;
        b.positives = augment(train.positives());
        b.negatives = augment(train.negatives());
        b.universum = universum.rows() > 0 ? augment(universum) : empty_rows(cols);
        if (plan != nullptr) {
            b.negatives_star = augment(plan->x2_star);
            b.universum_star = plan->universum_star.rows() > 0 ? augment(plan->universum_star) : empty_rows(cols);
        }
        return b;
    }

    IndexList order = pos;
    order.insert(order.end(), neg.begin(), neg.end());
    b.reference = select_rows(train.features(), order);
    Matrix kdd;
    if (train_gram != nullptr) {
        if (train_gram->rows() != train.size() || train_gram->cols() != train.size())
            throw DimensionMismatch("precomputed Gram matrix does not match the training set");
        kdd.resize(train.size(), train.size());
        for (Index j = 0; j < train.size(); ++j)
            for (Index i = 0; i < train.size(); ++i)
                kdd(i, j) = (*train_gram)(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    } else {
        kdd = gram(b.reference, *kernel);
    }
    const Index m1 = train.m1();
    const Index m2 = train.m2();
    const Index cols = train.size() + 1;
    b.positives = augment(kdd.topRows(m1));
    b.negatives = augment(kdd.bottomRows(m2));
    const Matrix kud = universum.rows() > 0 ? gram(universum, b.reference, *kernel) : Matrix(0, train.size());
    b.universum = universum.rows() > 0 ? augment(kud) : empty_rows(cols);
    if (plan != nullptr) {
        IndexList star_rows;
        for (auto i : plan->x2_star_indices) star_rows.push_back(m1 + i);
        b.negatives_star = augment(select_rows(kdd, star_rows));
        b.universum_star = plan->universum_star_indices.empty()
                               ? empty_rows(cols)
                               : augment(select_rows(kud, plan->universum_star_indices));
    }
    return b;
}

double default_delta(const Matrix& quad) {
    const double trace = quad.colwise().squaredNorm().sum();
    return 1e-7 * trace / static_cast<double>(std::max<Index>(quad.cols(), 1));
}

// ---------------------------------------------------------------------------
// IFUTSVM-ID

IfutsvmContext::IfutsvmContext(const Dataset& train, const std::optional<KernelSpec>& kernel,
                               const FuzzyParams& fuzzy, ScoreWeighting weighting, std::uint64_t seed,
                               const Matrix* train_gram)
    : features_(train.dim()), kernel_(kernel) {
    if (train.m1() < 2) throw InvalidDataset("IFUTSVM-ID needs at least two minority samples");
    if (train.m1() > train.m2()) throw InvalidDataset("minority class must be encoded +1");
    fuzzy.validate();

    Matrix local_gram;
    const Matrix* k = train_gram;
    if (k == nullptr && weighting == ScoreWeighting::intuitionistic) {
        local_gram = kernel ? gram(train.features(), *kernel) : Matrix(train.features() * train.features().transpose());
        k = &local_gram;
    }
    if (weighting == ScoreWeighting::intuitionistic) {
        if (!kernel && train_gram != nullptr) throw std::invalid_argument("linear mode computes its own Gram matrix");
        scores_ = assign_scores(train, *k, fuzzy);
        s1_weights_ = scores_.s1;
    } else {
        scores_.membership = Vector::Ones(train.size());
        scores_.nonmembership = Vector::Zero(train.size());
        scores_.heterogeneity = Vector::Zero(train.size());
        scores_.score = Vector::Ones(train.size());
        scores_.s1 = Vector::Ones(train.m1());
        scores_.s2 = Vector::Ones(train.m2());
        s1_weights_ = scores_.s1;
    }

    plan_ = build_plan(train, seed);
    s2_star_.resize(static_cast<Index>(plan_.x2_star_indices.size()));
    for (std::size_t i = 0; i < plan_.x2_star_indices.size(); ++i)
        s2_star_(static_cast<Index>(i)) = scores_.s2(plan_.x2_star_indices[i]);

    blocks_ = make_blocks(train, kernel, plan_.universum.points, &plan_, kernel ? k : nullptr);
}

PlaneProblem IfutsvmContext::plane1_problem(double c3) const {
    return PlaneProblem{blocks_.positives, blocks_.negatives_star, -1.0, blocks_.universum_star, 1.0, c3};
}

PlaneProblem IfutsvmContext::plane2_problem(double c4) const {
    return PlaneProblem{blocks_.negatives, blocks_.positives, 1.0, blocks_.universum, 1.0, c4};
}

PlaneBounds IfutsvmContext::plane1_bounds(const Hyperparams& hp) const {
    return PlaneBounds{hp.c1 * s2_star_, hp.cu, hp.epsilon};
}

PlaneBounds IfutsvmContext::plane2_bounds(const Hyperparams& hp) const {
    return PlaneBounds{hp.c2 * s1_weights_, hp.cu, hp.epsilon};
}

namespace {

TwinModel assemble(ModelKind kind, const Hyperparams& hp, Index features, const TwinBlocks& blocks,
                   const PreparedPlane& plane1, const PlaneBounds& bounds1, const PreparedPlane& plane2,
                   const PlaneBounds& bounds2, const Vector* warm1, const Vector* warm2) {
    const PlaneSolution s1 = plane1.solve(bounds1, hp.solver, warm1);
    const PlaneSolution s2 = plane2.solve(bounds2, hp.solver, warm2);
    Plane p1 = split_plane(s1.v);
    Plane p2 = split_plane(s2.v);
    check_plane(p1, "1");
    check_plane(p2, "2");
    TwinModel model(kind, hp, features, std::move(p1), std::move(p2), blocks.reference);
    auto& r = model.dual_report;
    r.alpha = s1.push_multipliers;
    r.beta = s1.universum_multipliers;
    r.eta = s2.push_multipliers;
    r.theta = s2.universum_multipliers;
    r.residual1 = s1.kkt_residual;
    r.residual2 = s2.kkt_residual;
    r.iterations1 = s1.iterations;
    r.iterations2 = s2.iterations;
    r.dual_objective1 = s1.dual_objective;
    r.dual_objective2 = s2.dual_objective;
    r.primal_objective1 = plane1.primal_objective(s1.v, bounds1);
    r.primal_objective2 = plane2.primal_objective(s2.v, bounds2);
    return model;
}

}  // namespace

TwinModel IfutsvmContext::fit(const PreparedPlane& plane1, const PreparedPlane& plane2, const Hyperparams& hp,
                              const Vector* warm1, const Vector* warm2) const {
    auto model = assemble(ModelKind::ifutsvm_id, hp, features_, blocks_, plane1, plane1_bounds(hp), plane2,
                          plane2_bounds(hp), warm1, warm2);
    model.dual_report.balanced_fallback = plan_.balanced_fallback;
    model.diagnostics.scores = scores_;
    model.diagnostics.plan = plan_;
    model.diagnostics.universum_rows = plan_.u();
    return model;
}

TwinModel fit_ifutsvm_id(const Dataset& train, const Hyperparams& hp) {
    hp.validate();
    const IfutsvmContext ctx(train, hp.kernel, hp.fuzzy, hp.weighting, hp.seed);
    const PreparedPlane p1(ctx.plane1_problem(hp.c3));
    const PreparedPlane p2(ctx.plane2_problem(hp.c4));
    return ctx.fit(p1, p2, hp);
}

// ---------------------------------------------------------------------------
// UTSVM

UtsvmContext::UtsvmContext(const Dataset& train, const std::optional<KernelSpec>& kernel, const Matrix& universum,
                           const Matrix* train_gram)
    : features_(train.dim()), kernel_(kernel) {
    if (train.m1() == 0 || train.m2() == 0) throw InvalidDataset("UTSVM needs both classes");
    blocks_ = make_blocks(train, kernel, universum, nullptr, kernel ? train_gram : nullptr);
}

PlaneProblem UtsvmContext::plane1_problem(const std::optional<double>& delta) const {
    return PlaneProblem{blocks_.positives, blocks_.negatives, -1.0, blocks_.universum, 1.0,
                        delta.value_or(default_delta(blocks_.positives))};
}

PlaneProblem UtsvmContext::plane2_problem(const std::optional<double>& delta) const {
    return PlaneProblem{blocks_.negatives, blocks_.positives, 1.0, blocks_.universum, -1.0,
                        delta.value_or(default_delta(blocks_.negatives))};
}

PlaneBounds UtsvmContext::plane1_bounds(const Hyperparams& hp) const {
    return PlaneBounds{Vector::Constant(blocks_.negatives.rows(), hp.c1), hp.cu, hp.epsilon};
}

PlaneBounds UtsvmContext::plane2_bounds(const Hyperparams& hp) const {
    return PlaneBounds{Vector::Constant(blocks_.positives.rows(), hp.c2), hp.cu, hp.epsilon};
}

TwinModel UtsvmContext::fit(const PreparedPlane& plane1, const PreparedPlane& plane2, const Hyperparams& hp,
                            const Vector* warm1, const Vector* warm2) const {
    auto model = assemble(ModelKind::utsvm, hp, features_, blocks_, plane1, plane1_bounds(hp), plane2,
                          plane2_bounds(hp), warm1, warm2);
    model.diagnostics.universum_rows = blocks_.universum.rows();
    return model;
}

TwinModel fit_utsvm(const Dataset& train, const Matrix& universum, const Hyperparams& hp) {
    hp.validate();
    const UtsvmContext ctx(train, hp.kernel, universum);
    const PreparedPlane p1(ctx.plane1_problem(hp.delta));
    const PreparedPlane p2(ctx.plane2_problem(hp.delta));
    return ctx.fit(p1, p2, hp);
}

Matrix baseline_universum(const Dataset& train, std::uint64_t seed) {
    const Index count = std::max(train.m2() - train.m1(), (train.m1() + 1) / 2);
    return generate_universum(train, count, Rng::stream(seed, 1).next()).points;
}

TwinModel fit_model(ModelKind kind, const Dataset& train, const Hyperparams& hp) {
    if (kind == ModelKind::utsvm) return fit_utsvm(train, baseline_universum(train, hp.seed), hp);
    return fit_ifutsvm_id(train, hp);
}

}  // namespace ifutsvm
