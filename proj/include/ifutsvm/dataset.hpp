#ifndef IFUTSVM_DATASET_HPP
#define IFUTSVM_DATASET_HPP

#include "ifutsvm/core.hpp"

#include <string>
#include <string_view>
#include <utility>

namespace ifutsvm {

/// Binary classification data with labels in {+1, -1}.
///
/// Freshly encoded datasets (parse, noise injection) always map the minority
/// class to +1. Subsets produced by splitting inherit the parent's encoding so
/// that train and test partitions agree on what +1 means.
class Dataset {
public:
    Dataset() = default;
    Dataset(std::string name, Matrix features, LabelVector labels,
            std::string positive_token = "+1", std::string negative_token = "-1");

    const std::string& name() const noexcept { return name_; }
    const Matrix& features() const noexcept { return features_; }
    const LabelVector& labels() const noexcept { return labels_; }
    const std::string& positive_token() const noexcept { return positive_token_; }
    const std::string& negative_token() const noexcept { return negative_token_; }

    Index size() const noexcept { return features_.rows(); }
    Index dim() const noexcept { return features_.cols(); }
    Index m1() const noexcept { return m1_; }
    Index m2() const noexcept { return size() - m1_; }

    IndexList positive_indices() const;
    IndexList negative_indices() const;
    /// X1: rows labelled +1, in dataset order.
    Matrix positives() const;
    /// X2: rows labelled -1, in dataset order.
    Matrix negatives() const;

    Dataset subset(const IndexList& rows) const;
    Dataset with_features(Matrix features) const;
    Dataset with_labels(LabelVector labels) const;
    /// Swaps +1/-1 (and the token names) when +1 is the strict majority.
    Dataset minority_encoded() const;

private:
    std::string name_;
    Matrix features_;
    LabelVector labels_;
    std::string positive_token_;
    std::string negative_token_;
    Index m1_ = 0;
};

/// Parses KEEL `.dat` content. Lines starting with '@' are metadata; rows
/// follow the '@data' marker. Content without any '@' line is read as a
/// headerless CSV whose last column is the class token.
Dataset parse_keel(std::string_view text, std::string name = "dataset");

Dataset load_dataset(const std::string& path);

/// Per-class shuffled split; the training part receives round(f * class size)
/// rows of each class.
std::pair<Dataset, Dataset> stratified_split(const Dataset& ds, double train_fraction, std::uint64_t seed);

/// Per-class round-robin assignment of shuffled rows to `k` folds. Returns
/// the validation row indices of each fold.
std::vector<IndexList> stratified_folds(const Dataset& ds, int k, std::uint64_t seed);

struct NoiseSpec {
    double fraction = 0.0;
    std::uint64_t seed = 0;
};

struct NoisyDataset {
    Dataset data;
    /// Rows whose class was flipped, ascending.
    IndexList flipped;
};

NoisyDataset inject_label_noise(const Dataset& ds, const NoiseSpec& spec);

/// Column standardization with the training set's mean and population
/// standard deviation (ddof = 0). Zero-variance columns pass through.
std::pair<Dataset, Dataset> standardize(const Dataset& train, const Dataset& test);

}  // namespace ifutsvm

#endif  // IFUTSVM_DATASET_HPP
