#include "ifutsvm/membership.hpp"

#include <algorithm>
#include <cmath>

namespace ifutsvm {

namespace {

void require_two_classes(const Dataset& ds) {
    if (ds.m1() == 0 || ds.m2() == 0) throw InvalidDataset("fuzzy scores need both classes to be non-empty");
}

void require_square_gram(const Dataset& ds, const Matrix& gram) {
    if (gram.rows() != ds.size() || gram.cols() != ds.size())
        throw DimensionMismatch("Gram matrix does not match the dataset size");
}

Matrix class_block(const Matrix& gram, const IndexList& rows) {
    Matrix out(static_cast<Index>(rows.size()), static_cast<Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows.size(); ++j)
            out(static_cast<Index>(i), static_cast<Index>(j)) = gram(rows[i], rows[j]);
    return out;
}

struct ClassMembership {
    double radius;
    double eta;
};

ClassMembership fill_class(const Matrix& gram, const IndexList& rows, const FuzzyParams& params, Vector& theta) {
    const ClassGeometry<double> geom(class_block(gram, rows));
    const double r = geom.radius();
    const double eta = params.eta.value_or(1e-4 * (r + 1.0));
    for (std::size_t i = 0; i < rows.size(); ++i)
        theta(rows[i]) = 1.0 - geom.member_distances()(static_cast<Index>(i)) / (r + eta);
    return {r, eta};
}

}  // namespace

void FuzzyParams::validate() const {
    if (eta && !(*eta > 0.0)) throw ConfigError("eta must be positive");
    if (rho && !(*rho > 0.0)) throw ConfigError("rho must be positive");
}

Matrix kernel_distances(const Matrix& gram) {
    const Vector diag = gram.diagonal();
    Matrix sq = -2.0 * gram;
    sq.colwise() += diag;
    sq.rowwise() += diag.transpose();
    Matrix d = sq.array().max(0.0).sqrt().matrix();
    d.diagonal().setZero();
    return d;
}

double median_pairwise_distance(const Matrix& distances) {
    std::vector<double> values;
    const Index m = distances.rows();
    values.reserve(static_cast<std::size_t>(m * (m - 1) / 2));
    for (Index j = 1; j < m; ++j)
        for (Index i = 0; i < j; ++i) values.push_back(distances(i, j));
    if (values.empty()) return 1.0;
    const auto mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    double med = values[mid];
    if (values.size() % 2 == 0) {
        const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
        med = 0.5 * (med + lower);
    }
    return med > 0.0 ? med : 1.0;
}

Vector membership(const Dataset& ds, const Matrix& gram, const FuzzyParams& params) {
    require_two_classes(ds);
    require_square_gram(ds, gram);
    params.validate();
    Vector theta(ds.size());
    fill_class(gram, ds.positive_indices(), params, theta);
    fill_class(gram, ds.negative_indices(), params, theta);
    return theta;
}

Vector membership(const Dataset& ds, const KernelSpec& spec, const FuzzyParams& params) {
    return membership(ds, gram(ds.features(), spec), params);
}

Vector heterogeneity(const Dataset& ds, const Matrix& gram, double rho) {
    require_square_gram(ds, gram);
    if (!(rho > 0.0)) throw ConfigError("rho must be positive");
    const Matrix dist = kernel_distances(gram);
    const auto& y = ds.labels();
    Vector mu(ds.size());
    for (Index i = 0; i < ds.size(); ++i) {
        Index total = 0;
        Index opposite = 0;
        for (Index j = 0; j < ds.size(); ++j) {
            if (j != i && dist(i, j) > rho) continue;
            ++total;
            if (y(j) != y(i)) ++opposite;
        }
        mu(i) = static_cast<double>(opposite) / static_cast<double>(total);
    }
    return mu;
}

Vector nonmembership(const Dataset& ds, const Matrix& gram, double rho, const Vector& theta) {
    if (theta.size() != ds.size()) throw DimensionMismatch("membership vector does not match the dataset size");
    return (1.0 - theta.array()) * heterogeneity(ds, gram, rho).array();
}

Vector nonmembership(const Dataset& ds, const KernelSpec& spec, const FuzzyParams& params, const Vector& theta) {
    const Matrix k = gram(ds.features(), spec);
    const double rho = params.rho.value_or(median_pairwise_distance(kernel_distances(k)));
    return nonmembership(ds, k, rho, theta);
}

double score(double theta, double sigma) {
    if (!(theta >= 0.0 && theta <= 1.0)) throw std::invalid_argument("membership outside [0, 1]");
    if (!(sigma >= 0.0 && sigma <= 1.0 - theta)) throw std::invalid_argument("non-membership outside [0, 1 - theta]");
    if (sigma == 0.0) return theta;
    if (theta <= sigma) return 0.0;
    return (1.0 - sigma) / (2.0 - theta - sigma);
}

ScoreWeights assign_scores(const Dataset& ds, const Matrix& gram, const FuzzyParams& params) {
    require_two_classes(ds);
    require_square_gram(ds, gram);
    params.validate();

    ScoreWeights w;
    w.membership.resize(ds.size());
    const auto pos = ds.positive_indices();
    const auto neg = ds.negative_indices();
    const auto cp = fill_class(gram, pos, params, w.membership);
    const auto cn = fill_class(gram, neg, params, w.membership);
    w.radius_positive = cp.radius;
    w.eta_positive = cp.eta;
    w.radius_negative = cn.radius;
    w.eta_negative = cn.eta;

    w.rho = params.rho.value_or(median_pairwise_distance(kernel_distances(gram)));
    w.heterogeneity = heterogeneity(ds, gram, w.rho);
    w.nonmembership = (1.0 - w.membership.array()) * w.heterogeneity.array();
    w.score.resize(ds.size());
    for (Index i = 0; i < ds.size(); ++i) w.score(i) = score(w.membership(i), w.nonmembership(i));
    w.s1.resize(static_cast<Index>(pos.size()));
    w.s2.resize(static_cast<Index>(neg.size()));
    for (std::size_t i = 0; i < pos.size(); ++i) w.s1(static_cast<Index>(i)) = w.score(pos[i]);
    for (std::size_t i = 0; i < neg.size(); ++i) w.s2(static_cast<Index>(i)) = w.score(neg[i]);
    return w;
}

ScoreWeights assign_scores(const Dataset& ds, const KernelSpec& spec, const FuzzyParams& params) {
    return assign_scores(ds, gram(ds.features(), spec), params);
}

ScoreWeights assign_scores_linear(const Dataset& ds, const FuzzyParams& params) {
    const Matrix k = ds.features() * ds.features().transpose();
    return assign_scores(ds, k, params);
}

}  // namespace ifutsvm
