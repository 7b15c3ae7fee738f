#ifndef IFUTSVM_EXPERIMENT_HPP
#define IFUTSVM_EXPERIMENT_HPP

#include "ifutsvm/evaluation.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace ifutsvm {

/// Everything a batch run needs. Loaded from a JSON file; command-line flags
/// override individual fields afterwards.
struct ExperimentConfig {
    std::vector<std::string> datasets;
    std::vector<ModelKind> models{ModelKind::ifutsvm_id, ModelKind::utsvm};
    ParameterGrid grid = full_grid();
    /// train: search the grid (true) or fit `base` as given (false).
    bool search = true;
    /// Values not covered by the grid: fuzzy params, delta, solver, weighting.
    Hyperparams base;
    double train_fraction = 0.7;
    int folds = 5;
    std::vector<double> noise_levels{0.05, 0.10, 0.15, 0.20};
    std::optional<std::uint64_t> seed;
    std::string out = "out";
    int threads = 1;
    bool standardize = false;
    double q_alpha = 2.850;
    std::optional<double> f_critical;
    /// train writes it, eval reads it. Relative paths live under `out`.
    std::string model_file = "model.bin";
    /// eval: dataset to score (defaults to datasets.front()).
    std::string accuracy_matrix;
    std::string dump_plan;
    std::string dump_scores;

    /// Throws ConfigError on missing files, absent seed or bad values.
    void validate(bool need_datasets) const;
};

/// Relative paths inside the file resolve against the file's directory.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const nlohmann::json& j, const std::string& base_dir = ".");
nlohmann::json config_to_json(const ExperimentConfig& config);

/// Each command writes its outputs under config.out and returns the path of
/// the JSON report.
std::string cmd_train(const ExperimentConfig& config);
std::string cmd_eval(const ExperimentConfig& config);
std::string cmd_benchmark(const ExperimentConfig& config);
std::string cmd_noise_study(const ExperimentConfig& config);
/// Bypass mode: statistics from an external CSV accuracy matrix
/// (header "dataset,<model>,...", one row per dataset).
std::string cmd_aggregate(const ExperimentConfig& config);

struct AccuracyMatrix {
    std::vector<std::string> datasets;
    std::vector<std::string> models;
    Matrix values;
};

AccuracyMatrix read_accuracy_matrix(const std::string& path);
AccuracyMatrix parse_accuracy_matrix(const std::string& text);

/// Summary shared by benchmark and aggregate: average accuracy, ranks and,
/// with at least two models and two datasets, the Friedman/Nemenyi block.
nlohmann::json aggregate_json(const AccuracyMatrix& acc, double q_alpha, const std::optional<double>& f_critical);

}  // namespace ifutsvm

#endif  // IFUTSVM_EXPERIMENT_HPP
