// Batch front-end. stdout carries only the report path; everything else goes
// to stderr. Exit codes: 0 ok, 1 unexpected, 2 parse/data, 3 numeric, 4 config.
#include "ifutsvm/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::optional<int> threads;
    std::string dump_plan;
    std::string dump_scores;
    std::vector<std::string> datasets;
    std::string model;
    std::string input;
};

ifutsvm::ExperimentConfig build_config(const Flags& f) {
    ifutsvm::ExperimentConfig c = f.config.empty() ? ifutsvm::ExperimentConfig{} : ifutsvm::load_config(f.config);
    if (f.seed) c.seed = f.seed;
    if (!f.out.empty()) c.out = f.out;
    if (f.threads) c.threads = *f.threads;
    if (!f.dump_plan.empty()) c.dump_plan = f.dump_plan;
    if (!f.dump_scores.empty()) c.dump_scores = f.dump_scores;
    if (!f.datasets.empty()) c.datasets = f.datasets;
    if (!f.model.empty()) c.model_file = f.model;
    if (!f.input.empty()) c.accuracy_matrix = f.input;
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"IFUTSVM-ID / UTSVM training and evaluation"};
    app.require_subcommand(1);
    Flags flags;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", flags.config, "JSON experiment config");
        sub->add_option("--seed", flags.seed, "master seed (overrides config)");
        sub->add_option("--out", flags.out, "output directory (overrides config)");
        sub->add_option("--threads", flags.threads, "worker threads for grid search")->check(CLI::PositiveNumber);
        sub->add_option("--dataset", flags.datasets, "dataset file(s), replacing the config list");
    };

    auto* train = app.add_subcommand("train", "fit one model and serialize it");
    common(train);
    train->add_option("--model", flags.model, "model output path (.json for the text variant)");
    train->add_option("--dump-plan", flags.dump_plan, "write the sampling plan as CSV");
    train->add_option("--dump-scores", flags.dump_scores, "write per-sample fuzzy scores as CSV");

    auto* eval = app.add_subcommand("eval", "score a serialized model on datasets");
    common(eval);
    eval->add_option("--model", flags.model, "model file");

    auto* bench = app.add_subcommand("benchmark", "split, grid search, refit and test per dataset and model");
    common(bench);

    auto* noise = app.add_subcommand("noise-study", "benchmark under training-label noise");
    common(noise);

    auto* agg = app.add_subcommand("aggregate", "ranks and Friedman/Nemenyi statistics from an accuracy matrix");
    common(agg);
    agg->add_option("--input", flags.input, "CSV accuracy matrix: dataset,<model>,...");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 4;
    }

    try {
        const auto config = build_config(flags);
        std::string report;
        if (train->parsed()) report = ifutsvm::cmd_train(config);
        else if (eval->parsed()) report = ifutsvm::cmd_eval(config);
        else if (bench->parsed()) report = ifutsvm::cmd_benchmark(config);
        else if (noise->parsed()) report = ifutsvm::cmd_noise_study(config);
        else report = ifutsvm::cmd_aggregate(config);
        std::cout << report << '\n';
        return 0;
    } catch (const ifutsvm::ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return 2;
    } catch (const ifutsvm::InvalidDataset& e) {
        std::cerr << "invalid dataset: " << e.what() << '\n';
        return 2;
    } catch (const ifutsvm::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return 3;
    } catch (const ifutsvm::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
