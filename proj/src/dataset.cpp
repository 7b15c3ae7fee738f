#include "ifutsvm/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace ifutsvm {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

bool starts_with_ci(std::string_view s, std::string_view prefix) {
    if (s.size() < prefix.size()) return false;
    for (std::size_t i = 0; i < prefix.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(s[i])) != std::tolower(static_cast<unsigned char>(prefix[i])))
            return false;
    }
    return true;
}

double parse_number(std::string_view field, std::size_t line) {
    double value = 0.0;
    // from_chars rejects a leading '+', strtod accepts it.
    std::string buf(field);
    char* end = nullptr;
    value = std::strtod(buf.c_str(), &end);
    if (buf.empty() || end != buf.c_str() + buf.size() || !std::isfinite(value))
        throw ParseError("non-numeric feature value '" + buf + "'", line);
    return value;
}

}  // namespace

Dataset::Dataset(std::string name, Matrix features, LabelVector labels, std::string positive_token,
                 std::string negative_token)
    : name_(std::move(name)),
      features_(std::move(features)),
      labels_(std::move(labels)),
      positive_token_(std::move(positive_token)),
      negative_token_(std::move(negative_token)) {
    if (features_.rows() != labels_.size())
        throw InvalidDataset("feature rows (" + std::to_string(features_.rows()) + ") and labels (" +
                             std::to_string(labels_.size()) + ") differ");
    if (features_.rows() > 0 && features_.cols() < 1) throw InvalidDataset("dataset has no feature columns");
    for (Index i = 0; i < labels_.size(); ++i) {
        if (labels_(i) == 1)
            ++m1_;
        else if (labels_(i) != -1)
            throw InvalidDataset("label " + std::to_string(labels_(i)) + " is not +1 or -1");
    }
}

IndexList Dataset::positive_indices() const {
    IndexList out;
    for (Index i = 0; i < labels_.size(); ++i)
        if (labels_(i) == 1) out.push_back(i);
    return out;
}

IndexList Dataset::negative_indices() const {
    IndexList out;
    for (Index i = 0; i < labels_.size(); ++i)
        if (labels_(i) == -1) out.push_back(i);
    return out;
}

Matrix Dataset::positives() const { return select_rows(features_, positive_indices()); }
Matrix Dataset::negatives() const { return select_rows(features_, negative_indices()); }

Dataset Dataset::subset(const IndexList& rows) const {
    LabelVector labels(static_cast<Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) labels(static_cast<Index>(i)) = labels_(rows[i]);
    return Dataset(name_, select_rows(features_, rows), std::move(labels), positive_token_, negative_token_);
}

Dataset Dataset::with_features(Matrix features) const {
    return Dataset(name_, std::move(features), labels_, positive_token_, negative_token_);
}

Dataset Dataset::with_labels(LabelVector labels) const {
    return Dataset(name_, features_, std::move(labels), positive_token_, negative_token_);
}

Dataset Dataset::minority_encoded() const {
    if (m1() <= m2()) return *this;
    return Dataset(name_, features_, -labels_, negative_token_, positive_token_);
}

Dataset parse_keel(std::string_view text, std::string name) {
    const bool has_header = [&] {
        std::size_t pos = 0;
        while (pos < text.size()) {
            auto end = text.find('\n', pos);
            if (end == std::string_view::npos) end = text.size();
            const auto line = trim(text.substr(pos, end - pos));
            if (!line.empty() && line.front() == '@') return true;
            pos = end + 1;
        }
        return false;
    }();

    std::vector<std::vector<double>> rows;
    std::vector<std::string> tokens;
    bool in_data = !has_header;
    std::size_t arity = 0;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        const auto line = trim(text.substr(pos, end - pos));
        pos = end + 1;
        ++line_no;
        if (line.empty() || line.front() == '%') continue;
        if (line.front() == '@') {
            if (in_data) throw ParseError("metadata line after @data", line_no);
            if (starts_with_ci(line, "@data")) in_data = true;
            continue;
        }
        if (!in_data) throw ParseError("data row before @data", line_no);

        std::vector<std::string_view> fields;
        std::size_t start = 0;
        while (true) {
            const auto comma = line.find(',', start);
            fields.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (fields.size() < 2) throw ParseError("row needs at least one feature and a class token", line_no);
        if (arity == 0) arity = fields.size();
        if (fields.size() != arity)
            throw ParseError("expected " + std::to_string(arity) + " fields, found " + std::to_string(fields.size()),
                             line_no);
        if (fields.back().empty()) throw ParseError("empty class token", line_no);

        std::vector<double> values;
        values.reserve(arity - 1);
        for (std::size_t f = 0; f + 1 < fields.size(); ++f) values.push_back(parse_number(fields[f], line_no));
        rows.push_back(std::move(values));
        tokens.emplace_back(fields.back());
    }
    if (has_header && !in_data) throw ParseError("missing @data section");

    std::map<std::string, Index> counts;
    for (const auto& t : tokens) ++counts[t];
    if (counts.size() < 2)
        throw InvalidDataset("dataset '" + name + "' has " + std::to_string(counts.size()) +
                             " distinct class token(s); two are required");
    if (counts.size() > 2) throw InvalidDataset("dataset '" + name + "' is multiclass");

    // std::map iterates in lexicographic order, so ties favour the smaller token.
    auto it = counts.begin();
    const auto& [first_token, first_count] = *it;
    const auto& [second_token, second_count] = *std::next(it);
    const bool first_is_positive = first_count <= second_count;
    const std::string positive = first_is_positive ? first_token : second_token;
    const std::string negative = first_is_positive ? second_token : first_token;

    const auto m = static_cast<Index>(rows.size());
    Matrix features(m, static_cast<Index>(arity - 1));
    LabelVector labels(m);
    for (Index i = 0; i < m; ++i) {
        const auto& r = rows[static_cast<std::size_t>(i)];
        for (std::size_t j = 0; j < r.size(); ++j) features(i, static_cast<Index>(j)) = r[j];
        labels(i) = tokens[static_cast<std::size_t>(i)] == positive ? 1 : -1;
    }
    return Dataset(std::move(name), std::move(features), std::move(labels), positive, negative);
}

Dataset load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open dataset '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    auto stem = path.substr(path.find_last_of('/') + 1);
    if (const auto dot = stem.find_last_of('.'); dot != std::string::npos && dot > 0) stem.resize(dot);
    return parse_keel(buf.str(), stem);
}

std::pair<Dataset, Dataset> stratified_split(const Dataset& ds, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument("train_fraction must lie in (0, 1)");
    Rng rng(seed);
    IndexList train, test;
    for (const auto& cls : {ds.positive_indices(), ds.negative_indices()}) {
        const auto size = static_cast<Index>(cls.size());
        const auto n_train = static_cast<Index>(std::llround(train_fraction * static_cast<double>(size)));
        if (n_train == 0 || n_train == size)
            throw InvalidDataset("stratified split of '" + ds.name() + "' leaves a class with " +
                                 std::to_string(size) + " samples empty in one partition");
        const auto order = rng.sample_without_replacement(size, size);
        for (Index i = 0; i < size; ++i)
            (i < n_train ? train : test).push_back(cls[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])]);
    }
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {ds.subset(train), ds.subset(test)};
}

std::vector<IndexList> stratified_folds(const Dataset& ds, int k, std::uint64_t seed) {
    if (k < 2) throw std::invalid_argument("need at least two folds");
    Rng rng(seed);
    std::vector<IndexList> folds(static_cast<std::size_t>(k));
    std::size_t next = 0;
    for (const auto& cls : {ds.positive_indices(), ds.negative_indices()}) {
        const auto size = static_cast<Index>(cls.size());
        if (size < k)
            throw InvalidDataset("class with " + std::to_string(size) + " samples cannot fill " + std::to_string(k) +
                                 " folds");
        const auto order = rng.sample_without_replacement(size, size);
        // Continue the round-robin across classes so fold sizes stay balanced.
        for (Index i = 0; i < size; ++i) {
            folds[next].push_back(cls[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])]);
            next = (next + 1) % folds.size();
        }
    }
    for (auto& f : folds) std::sort(f.begin(), f.end());
    return folds;
}

NoisyDataset inject_label_noise(const Dataset& ds, const NoiseSpec& spec) {
    if (!(spec.fraction >= 0.0 && spec.fraction <= 0.5))
        throw std::invalid_argument("noise fraction must lie in [0, 0.5]");
    const auto flips = static_cast<Index>(std::llround(spec.fraction * static_cast<double>(ds.size())));
    Rng rng(spec.seed);
    auto chosen = rng.sample_without_replacement(ds.size(), flips);
    std::sort(chosen.begin(), chosen.end());
    LabelVector labels = ds.labels();
    for (auto i : chosen) labels(i) = -labels(i);
    return {ds.with_labels(std::move(labels)).minority_encoded(), std::move(chosen)};
}

std::pair<Dataset, Dataset> standardize(const Dataset& train, const Dataset& test) {
    if (train.size() == 0) throw InvalidDataset("cannot standardize an empty training set");
    if (test.size() > 0 && test.dim() != train.dim())
        throw DimensionMismatch("train and test feature counts differ");
    const Eigen::RowVectorXd mean = train.features().colwise().mean();
    Matrix centered = train.features().rowwise() - mean;
    const Eigen::RowVectorXd stddev =
        (centered.array().square().colwise().sum() / static_cast<double>(train.size())).sqrt();

    auto apply = [&](const Matrix& x) {
        Matrix out = x;
        for (Index j = 0; j < x.cols(); ++j) {
            if (stddev(j) > 0.0) out.col(j) = (x.col(j).array() - mean(j)) / stddev(j);
        }
        return out;
    };
    return {train.with_features(apply(train.features())), test.with_features(apply(test.features()))};
}

}  // namespace ifutsvm
