#include "ifutsvm/experiment.hpp"

#include "ifutsvm/serialize.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace ifutsvm {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string resolve(const std::string& path, const std::string& base_dir) {
    if (path.empty()) return path;
    const fs::path p(path);
    return p.is_absolute() ? path : (fs::path(base_dir) / p).lexically_normal().string();
}

std::vector<double> number_list(const json& j, const char* what) {
    if (j.is_number()) return {j.get<double>()};
    if (!j.is_array()) throw ConfigError(std::string(what) + " must be a number or a list of numbers");
    std::vector<double> out;
    for (const auto& v : j) {
        if (!v.is_number()) throw ConfigError(std::string(what) + " must contain numbers only");
        out.push_back(v.get<double>());
    }
    return out;
}

ParameterGrid parse_grid(const json& j) {
    if (j.is_string()) {
        if (j == "full") return full_grid();
        throw ConfigError("unknown grid preset '" + j.get<std::string>() + "'");
    }
    if (!j.is_object()) throw ConfigError("grid must be an object or \"full\"");
    ParameterGrid g;
    for (const auto& [key, value] : j.items()) {
        if (key == "c1") g.c1 = number_list(value, "grid.c1");
        else if (key == "c3") g.c3 = number_list(value, "grid.c3");
        else if (key == "cu") g.cu = number_list(value, "grid.cu");
        else if (key == "epsilon") g.epsilon = number_list(value, "grid.epsilon");
        else if (key == "width") g.width = value.is_string() && value == "linear" ? std::vector<double>{}
                                                                                   : number_list(value, "grid.width");
        else throw ConfigError("unknown grid key '" + key + "'");
    }
    return g;
}

std::optional<double> optional_number(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    if (!j.at(key).is_number()) throw ConfigError(std::string(key) + " must be a number");
    return j.at(key).get<double>();
}

Hyperparams parse_hyperparams(const json& j, Hyperparams hp) {
    static const char* known[] = {"c1", "c2", "c3", "c4", "cu", "epsilon", "kernel_width", "delta", "eta", "rho",
                                  "tol", "max_iter", "weighting", "rkhs_norm"};
    for (const auto& item : j.items()) {
        const auto& key = item.key();
        if (std::find(std::begin(known), std::end(known), key) == std::end(known))
            throw ConfigError("unknown hyperparameter '" + key + "'");
    }
    if (auto v = optional_number(j, "c1")) hp.c1 = hp.c2 = *v;
    if (auto v = optional_number(j, "c2")) hp.c2 = *v;
    if (auto v = optional_number(j, "c3")) hp.c3 = hp.c4 = *v;
    if (auto v = optional_number(j, "c4")) hp.c4 = *v;
    if (auto v = optional_number(j, "cu")) hp.cu = *v;
    if (auto v = optional_number(j, "epsilon")) hp.epsilon = *v;
    if (j.contains("kernel_width")) {
        const auto w = optional_number(j, "kernel_width");
        if (w && !(*w > 0)) throw ConfigError("kernel_width must be positive");
        hp.kernel = w ? std::optional<KernelSpec>(KernelSpec(*w)) : std::nullopt;
    }
    if (j.contains("delta")) hp.delta = optional_number(j, "delta");
    if (j.contains("eta")) hp.fuzzy.eta = optional_number(j, "eta");
    if (j.contains("rho")) hp.fuzzy.rho = optional_number(j, "rho");
    if (auto v = optional_number(j, "tol")) hp.solver.tol = *v;
    if (auto v = optional_number(j, "max_iter")) hp.solver.max_iter = static_cast<long>(*v);
    if (j.contains("weighting")) {
        const auto w = j.at("weighting").get<std::string>();
        if (w == "uniform") hp.weighting = ScoreWeighting::uniform;
        else if (w == "intuitionistic") hp.weighting = ScoreWeighting::intuitionistic;
        else throw ConfigError("weighting must be \"intuitionistic\" or \"uniform\"");
    }
    if (j.contains("rkhs_norm")) hp.rkhs_norm = j.at("rkhs_norm").get<bool>();
    return hp;
}

json grid_json(const ParameterGrid& g) {
    return json{{"c1", g.c1}, {"c3", g.c3}, {"cu", g.cu}, {"epsilon", g.epsilon}, {"width", g.width}};
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json metrics_json(const ConfusionMatrix& cm) {
    const auto m = metrics(cm);
    return json{{"confusion", {{"tp", cm.tp}, {"fn", cm.fn}, {"fp", cm.fp}, {"tn", cm.tn}}},
                {"accuracy", opt_json(m.accuracy)},
                {"sensitivity", opt_json(m.sensitivity)},
                {"specificity", opt_json(m.specificity)},
                {"precision", opt_json(m.precision)}};
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
}

std::string out_path(const ExperimentConfig& c, const std::string& name) {
    return (fs::path(c.out) / name).string();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << text;
}

void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string csv_num(double v) {
    if (std::isnan(v)) return "nan";
    std::ostringstream s;
    s << std::setprecision(12) << v;
    return s.str();
}

std::string safe_name(std::string s) {
    for (char& ch : s)
        if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '-' && ch != '_' && ch != '.') ch = '_';
    return s;
}

/// Seed for one purpose within one dataset, independent of run order.
std::uint64_t derive_seed(std::uint64_t master, std::size_t dataset, std::uint64_t purpose) {
    return Rng::stream(Rng::stream(master, dataset).next(), purpose).next();
}

enum Purpose : std::uint64_t { split_stream = 0, cv_stream = 1, fit_stream = 2, noise_stream = 3 };

/// Recomputes the labels of `test` under the encoding of `train` when noise
/// injection swapped which token is +1.
Dataset align_encoding(const Dataset& test, const Dataset& train) {
    if (test.positive_token() == train.positive_token()) return test;
    return Dataset(test.name(), test.features(), LabelVector(-test.labels()), test.negative_token(),
                   test.positive_token());
}

struct Trial {
    Hyperparams best;
    double cv_accuracy = 0.0;
    int failed_points = 0;
    int cv_failed_folds = 0;
    std::size_t lattice_size = 0;
    ConfusionMatrix test;
};

Trial run_trial(ModelKind kind, const Dataset& train, const Dataset& test, const ExperimentConfig& c,
                std::uint64_t cv_seed, std::uint64_t fit_seed, const std::string& cv_csv) {
    Hyperparams base = c.base;
    base.seed = fit_seed;
    const CvResult cv = grid_search_cv(kind, train, c.grid, base, CvOptions{c.folds, cv_seed, c.threads});
    if (!cv_csv.empty()) {
        std::ostringstream s;
        write_cv_csv(s, cv);
        write_text(cv_csv, s.str());
    }
    Trial t;
    t.best = cv.best;
    t.cv_accuracy = cv.best_accuracy;
    t.failed_points = cv.failed_points;
    t.cv_failed_folds = cv.best_failed_folds;
    t.lattice_size = cv.table.size();
    const TwinModel model = fit_model(kind, train, cv.best);
    t.test = confusion(model, test);
    return t;
}

std::vector<std::string> model_names(const ExperimentConfig& c) {
    std::vector<std::string> names;
    for (auto k : c.models) names.push_back(to_string(k));
    return names;
}

json run_header(const ExperimentConfig& c, const std::string& command) {
    return json{{"command", command}, {"seed", *c.seed}, {"config", config_to_json(c)}};
}

std::pair<Dataset, Dataset> prepare_split(const Dataset& ds, const ExperimentConfig& c, std::uint64_t seed) {
    auto split = stratified_split(ds, c.train_fraction, seed);
    if (c.standardize) split = standardize(split.first, split.second);
    return split;
}

}  // namespace

// ---------------------------------------------------------------------------
// config

void ExperimentConfig::validate(bool need_datasets) const {
    if (!seed) throw ConfigError("a seed is required (config \"seed\" or --seed)");
    if (need_datasets && datasets.empty()) throw ConfigError("no datasets given");
    for (const auto& d : datasets)
        if (!fs::is_regular_file(d)) throw ConfigError("dataset '" + d + "' does not exist");
    if (models.empty()) throw ConfigError("no models given");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("train_fraction must lie in (0, 1)");
    if (folds < 2) throw ConfigError("folds must be at least 2");
    if (threads < 1) throw ConfigError("threads must be at least 1");
    for (double l : noise_levels)
        if (!(l >= 0.0 && l <= 0.5)) throw ConfigError("noise levels must lie in [0, 0.5]");
    grid.validate();
    base.validate();
}

ExperimentConfig parse_config(const json& j, const std::string& base_dir) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    static const char* known[] = {"datasets", "dataset_dir", "models", "grid", "hyperparams", "search",
                                  "train_fraction", "folds", "noise_levels", "seed", "out", "threads",
                                  "standardize", "q_alpha", "f_critical", "model_file", "accuracy_matrix"};
    for (const auto& item : j.items()) {
        const auto& key = item.key();
        if (std::find(std::begin(known), std::end(known), key) == std::end(known))
            throw ConfigError("unknown config key '" + key + "'");
    }
    ExperimentConfig c;
    try {
        if (j.contains("datasets"))
            for (const auto& d : j.at("datasets")) c.datasets.push_back(resolve(d.get<std::string>(), base_dir));
        if (j.contains("dataset_dir")) {
            const auto dir = resolve(j.at("dataset_dir").get<std::string>(), base_dir);
            if (!fs::is_directory(dir)) throw ConfigError("dataset_dir '" + dir + "' is not a directory");
            std::vector<std::string> found;
            for (const auto& e : fs::directory_iterator(dir))
                if (e.is_regular_file() && (e.path().extension() == ".dat" || e.path().extension() == ".csv"))
                    found.push_back(e.path().string());
            std::sort(found.begin(), found.end());
            c.datasets.insert(c.datasets.end(), found.begin(), found.end());
        }
        if (j.contains("models")) {
            c.models.clear();
            for (const auto& m : j.at("models")) c.models.push_back(parse_model_kind(m.get<std::string>()));
        }
        if (j.contains("grid")) c.grid = parse_grid(j.at("grid"));
        if (j.contains("hyperparams")) c.base = parse_hyperparams(j.at("hyperparams"), c.base);
        if (j.contains("search")) c.search = j.at("search").get<bool>();
        else if (j.contains("hyperparams") && !j.contains("grid")) c.search = false;
        if (j.contains("train_fraction")) c.train_fraction = j.at("train_fraction").get<double>();
        if (j.contains("folds")) c.folds = j.at("folds").get<int>();
        if (j.contains("noise_levels")) c.noise_levels = number_list(j.at("noise_levels"), "noise_levels");
        if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("out")) c.out = resolve(j.at("out").get<std::string>(), base_dir);
        if (j.contains("threads")) c.threads = j.at("threads").get<int>();
        if (j.contains("standardize")) c.standardize = j.at("standardize").get<bool>();
        if (j.contains("q_alpha")) c.q_alpha = j.at("q_alpha").get<double>();
        if (j.contains("f_critical")) c.f_critical = optional_number(j, "f_critical");
        if (j.contains("model_file")) c.model_file = resolve(j.at("model_file").get<std::string>(), base_dir);
        if (j.contains("accuracy_matrix"))
            c.accuracy_matrix = resolve(j.at("accuracy_matrix").get<std::string>(), base_dir);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }
    const auto dir = fs::path(path).parent_path().string();
    return parse_config(j, dir.empty() ? "." : dir);
}

json config_to_json(const ExperimentConfig& c) {
    json j;
    j["datasets"] = c.datasets;
    j["models"] = model_names(c);
    j["grid"] = grid_json(c.grid);
    j["search"] = c.search;
    j["hyperparams"] = hyperparams_to_json(c.base);
    j["train_fraction"] = c.train_fraction;
    j["folds"] = c.folds;
    j["noise_levels"] = c.noise_levels;
    j["seed"] = c.seed ? json(*c.seed) : json(nullptr);
    j["out"] = c.out;
    j["standardize"] = c.standardize;
    j["q_alpha"] = c.q_alpha;
    j["f_critical"] = opt_json(c.f_critical);
    j["model_file"] = c.model_file;
    j["accuracy_matrix"] = c.accuracy_matrix;
    return j;
}

// ---------------------------------------------------------------------------
// train / eval

std::string cmd_train(const ExperimentConfig& c) {
    c.validate(true);
    ensure_dir(c.out);
    const Dataset ds = load_dataset(c.datasets.front());
    const ModelKind kind = c.models.front();
    Hyperparams hp = c.base;
    hp.seed = *c.seed;
    json report = run_header(c, "train");
    report["dataset"] = {{"name", ds.name()}, {"path", c.datasets.front()}, {"m", ds.size()},
                         {"n", ds.dim()},      {"m1", ds.m1()},               {"m2", ds.m2()}};
    if (c.search) {
        const CvResult cv = grid_search_cv(kind, ds, c.grid, hp, CvOptions{c.folds, derive_seed(*c.seed, 0, cv_stream), c.threads});
        std::ostringstream s;
        write_cv_csv(s, cv);
        write_text(out_path(c, "cv_" + safe_name(ds.name()) + "_" + to_string(kind) + ".csv"), s.str());
        hp = cv.best;
        report["grid_search"] = {{"cv_accuracy", cv.best_accuracy},
                                 {"lattice_size", cv.table.size()},
                                 {"failed_points", cv.failed_points},
                                 {"cv_failed_folds", cv.best_failed_folds}};
    }
    const TwinModel model = fit_model(kind, ds, hp);
    const std::string model_path = resolve(c.model_file, c.out);
    save_model(model_path, model);

    const auto& r = model.dual_report;
    report["model_file"] = model_path;
    report["kind"] = to_string(kind);
    report["hyperparams"] = hyperparams_to_json(hp);
    report["dual"] = {{"plane1", {{"kkt_residual", r.residual1},
                                  {"iterations", r.iterations1},
                                  {"dual_objective", r.dual_objective1},
                                  {"primal_objective", r.primal_objective1},
                                  {"push_multipliers", r.alpha.size()},
                                  {"universum_multipliers", r.beta.size()}}},
                      {"plane2", {{"kkt_residual", r.residual2},
                                  {"iterations", r.iterations2},
                                  {"dual_objective", r.dual_objective2},
                                  {"primal_objective", r.primal_objective2},
                                  {"push_multipliers", r.eta.size()},
                                  {"universum_multipliers", r.theta.size()}}},
                      {"balanced_fallback", r.balanced_fallback}};
    report["training"] = metrics_json(confusion(model, ds));
    report["universum_rows"] = model.diagnostics.universum_rows;

    if (model.diagnostics.scores) {
        const auto& s = *model.diagnostics.scores;
        std::vector<long> counts(10, 0);
        for (Index i = 0; i < s.score.size(); ++i)
            ++counts[static_cast<std::size_t>(std::min(9.0, std::floor(s.score(i) * 10.0)))];
        report["score_histogram"] = {{"edges", {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0}},
                                     {"counts", counts}};
        report["fuzzy"] = {{"rho", s.rho},
                           {"eta_positive", s.eta_positive},
                           {"eta_negative", s.eta_negative},
                           {"radius_positive", s.radius_positive},
                           {"radius_negative", s.radius_negative}};
        if (!c.dump_scores.empty()) {
            std::ostringstream o;
            o << "index,label,membership,nonmembership,score\n";
            for (Index i = 0; i < ds.size(); ++i)
                o << i << ',' << ds.labels()(i) << ',' << csv_num(s.membership(i)) << ','
                  << csv_num(s.nonmembership(i)) << ',' << csv_num(s.score(i)) << '\n';
            write_text(c.dump_scores, o.str());
        }
    }
    if (model.diagnostics.plan) {
        const auto& p = *model.diagnostics.plan;
        report["plan"] = {{"x2_star_rows", p.x2_star.rows()},
                          {"universum_rows", p.u()},
                          {"universum_star_rows", p.g()},
                          {"universum_padding", p.universum_padding},
                          {"balanced_fallback", p.balanced_fallback}};
        if (!c.dump_plan.empty()) {
            // negative indices are class-local, universum_star indexes the universum rows
            std::ostringstream o;
            o << "set,row,index,positive,negative\n";
            for (std::size_t i = 0; i < p.x2_star_indices.size(); ++i)
                o << "x2_star," << i << ',' << p.x2_star_indices[i] << ",,\n";
            for (std::size_t i = 0; i < p.universum.pairs.size(); ++i)
                o << "universum," << i << ",," << p.universum.pairs[i].first << ',' << p.universum.pairs[i].second
                  << '\n';
            for (std::size_t i = 0; i < p.universum_star_indices.size(); ++i)
                o << "universum_star," << i << ',' << p.universum_star_indices[i] << ",,\n";
            write_text(c.dump_plan, o.str());
        }
    }
    const auto path = out_path(c, "train_report.json");
    write_json(path, report);
    return path;
}

std::string cmd_eval(const ExperimentConfig& c) {
    c.validate(true);
    ensure_dir(c.out);
    const std::string model_path = resolve(c.model_file, c.out);
    if (!fs::is_regular_file(model_path)) throw ConfigError("model file '" + model_path + "' does not exist");
    const TwinModel model = load_model(model_path);
    json report = run_header(c, "eval");
    report["model_file"] = model_path;
    report["kind"] = to_string(model.kind());
    report["hyperparams"] = hyperparams_to_json(model.hyperparams());
    report["results"] = json::array();
    for (const auto& path : c.datasets) {
        const Dataset ds = load_dataset(path);
        auto entry = metrics_json(confusion(model, ds));
        entry["dataset"] = ds.name();
        entry["path"] = path;
        report["results"].push_back(entry);
    }
    const auto path = out_path(c, "eval_report.json");
    write_json(path, report);
    return path;
}

// ---------------------------------------------------------------------------
// benchmark / noise study

std::string cmd_benchmark(const ExperimentConfig& c) {
    c.validate(true);
    ensure_dir(c.out);
    json report = run_header(c, "benchmark");
    report["datasets"] = json::array();
    json timings = json::array();
    const auto names = model_names(c);
    AccuracyMatrix acc;
    acc.models = names;
    std::vector<std::vector<double>> rows;
    std::ostringstream table;
    table << "dataset,model,accuracy_percent,cv_accuracy_percent,c1,c2,c3,c4,cu,epsilon,width\n";

    for (std::size_t d = 0; d < c.datasets.size(); ++d) {
        json entry{{"path", c.datasets[d]}};
        try {
            const Dataset ds = load_dataset(c.datasets[d]);
            entry["name"] = ds.name();
            entry["m"] = ds.size();
            entry["n"] = ds.dim();
            entry["m1"] = ds.m1();
            entry["m2"] = ds.m2();
            const auto split_seed = derive_seed(*c.seed, d, split_stream);
            const auto [train, test] = prepare_split(ds, c, split_seed);
            entry["split_seed"] = split_seed;
            entry["models"] = json::object();
            std::vector<double> row;
            for (auto kind : c.models) {
                const auto t0 = std::chrono::steady_clock::now();
                const auto cv_seed = derive_seed(*c.seed, d, cv_stream);
                const auto fit_seed = derive_seed(*c.seed, d, fit_stream);
                const Trial t = run_trial(kind, train, test, c, cv_seed, fit_seed,
                                          out_path(c, "cv_" + safe_name(ds.name()) + "_" + to_string(kind) + ".csv"));
                const double seconds =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                timings.push_back({{"dataset", ds.name()}, {"model", to_string(kind)}, {"seconds", seconds}});
                auto m = metrics_json(t.test);
                m["cv_accuracy"] = t.cv_accuracy;
                m["cv_seed"] = cv_seed;
                m["fit_seed"] = fit_seed;
                m["lattice_size"] = t.lattice_size;
                m["failed_points"] = t.failed_points;
                m["cv_failed_folds"] = t.cv_failed_folds;
                m["hyperparams"] = hyperparams_to_json(t.best);
                entry["models"][to_string(kind)] = m;
                const double a = 100.0 * *metrics(t.test).accuracy;
                row.push_back(a);
                table << ds.name() << ',' << to_string(kind) << ',' << csv_num(a) << ','
                      << csv_num(100.0 * t.cv_accuracy) << ',' << csv_num(t.best.c1) << ',' << csv_num(t.best.c2)
                      << ',' << csv_num(t.best.c3) << ',' << csv_num(t.best.c4) << ',' << csv_num(t.best.cu) << ','
                      << csv_num(t.best.epsilon) << ','
                      << (t.best.kernel ? csv_num(t.best.kernel->width) : std::string("linear")) << '\n';
            }
            rows.push_back(row);
            acc.datasets.push_back(ds.name());
            entry["status"] = "ok";
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            entry["status"] = "failed";
            entry["error"] = e.what();
        }
        report["datasets"].push_back(entry);
    }
    acc.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(names.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < names.size(); ++j)
            acc.values(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    report["aggregate"] = aggregate_json(acc, c.q_alpha, c.f_critical);
    write_text(out_path(c, "benchmark_results.csv"), table.str());
    if (acc.values.rows() >= 1 && acc.values.cols() >= 2) {
        std::ostringstream r;
        write_rank_csv(r, average_ranks(acc.values), acc.datasets, acc.models);
        write_text(out_path(c, "ranks.csv"), r.str());
    }
    // wall times vary run to run, so they stay out of the report
    write_json(out_path(c, "timings.json"), timings);
    const auto path = out_path(c, "benchmark_report.json");
    write_json(path, report);
    return path;
}

std::string cmd_noise_study(const ExperimentConfig& c) {
    c.validate(true);
    ensure_dir(c.out);
    json report = run_header(c, "noise-study");
    report["rows"] = json::array();
    report["failures"] = json::array();
    report["summary"] = json::array();
    std::ostringstream table;
    table << "dataset,level,model,accuracy_percent,flipped\n";

    for (std::size_t d = 0; d < c.datasets.size(); ++d) {
        Dataset ds;
        try {
            ds = load_dataset(c.datasets[d]);
        } catch (const std::exception& e) {
            report["failures"].push_back({{"path", c.datasets[d]}, {"error", e.what()}});
            continue;
        }
        std::vector<std::vector<double>> per_model(c.models.size());
        const auto [train, test] = prepare_split(ds, c, derive_seed(*c.seed, d, split_stream));
        for (std::size_t li = 0; li < c.noise_levels.size(); ++li) {
            const double level = c.noise_levels[li];
            // the level enters the noise seed so that each level draws its own flip set
            std::uint64_t level_bits;
            std::memcpy(&level_bits, &level, sizeof level_bits);
            const auto noise_seed = Rng::stream(derive_seed(*c.seed, d, noise_stream), level_bits).next();
            const NoisyDataset noisy = inject_label_noise(train, NoiseSpec{level, noise_seed});
            const Dataset noisy_test = align_encoding(test, noisy.data);
            {
                std::ostringstream flips;
                flips << "row\n";
                for (auto i : noisy.flipped) flips << i << '\n';
                write_text(out_path(c, "flips_" + safe_name(ds.name()) + "_" + csv_num(level) + ".csv"), flips.str());
            }
            for (std::size_t mi = 0; mi < c.models.size(); ++mi) {
                const auto kind = c.models[mi];
                try {
                    const Trial t = run_trial(kind, noisy.data, noisy_test, c, derive_seed(*c.seed, d, cv_stream),
                                              derive_seed(*c.seed, d, fit_stream), "");
                    const double a = 100.0 * *metrics(t.test).accuracy;
                    per_model[mi].push_back(a);
                    report["rows"].push_back({{"dataset", ds.name()},
                                              {"level", level},
                                              {"model", to_string(kind)},
                                              {"accuracy", a},
                                              {"noise_seed", noise_seed},
                                              {"flipped", noisy.flipped.size()},
                                              {"hyperparams", hyperparams_to_json(t.best)}});
                    table << ds.name() << ',' << csv_num(level) << ',' << to_string(kind) << ',' << csv_num(a) << ','
                          << noisy.flipped.size() << '\n';
                } catch (const ConfigError&) {
                    throw;
                } catch (const std::exception& e) {
                    report["failures"].push_back({{"dataset", ds.name()},
                                                  {"level", level},
                                                  {"model", to_string(kind)},
                                                  {"error", e.what()}});
                }
            }
        }
        for (std::size_t mi = 0; mi < c.models.size(); ++mi) {
            const auto& v = per_model[mi];
            if (v.empty()) continue;
            double mean = 0.0;
            for (double a : v) mean += a;
            report["summary"].push_back({{"dataset", ds.name()},
                                         {"model", to_string(c.models[mi])},
                                         {"levels", v.size()},
                                         {"average_accuracy", mean / static_cast<double>(v.size())}});
        }
    }
    write_text(out_path(c, "noise_results.csv"), table.str());
    const auto path = out_path(c, "noise_report.json");
    write_json(path, report);
    return path;
}

// ---------------------------------------------------------------------------
// aggregate

AccuracyMatrix parse_accuracy_matrix(const std::string& text) {
    AccuracyMatrix acc;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::vector<double>> rows;
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::string cell;
        std::istringstream ls(s);
        while (std::getline(ls, cell, ',')) {
            const auto b = cell.find_first_not_of(" \t\r");
            const auto e = cell.find_last_not_of(" \t\r");
            out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
        }
        return out;
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
        const auto cells = split(line);
        if (acc.models.empty()) {
            if (cells.size() < 2) throw ParseError("accuracy matrix header needs a dataset column and models", line_no);
            acc.models.assign(cells.begin() + 1, cells.end());
            continue;
        }
        if (cells.size() != acc.models.size() + 1)
            throw ParseError("expected " + std::to_string(acc.models.size() + 1) + " fields", line_no);
        std::vector<double> row;
        for (std::size_t i = 1; i < cells.size(); ++i) {
            std::size_t used = 0;
            double v = 0;
            try {
                v = std::stod(cells[i], &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || used != cells[i].size()) throw ParseError("non-numeric accuracy '" + cells[i] + "'", line_no);
            row.push_back(v);
        }
        acc.datasets.push_back(cells[0]);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw InvalidDataset("accuracy matrix has no rows");
    acc.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(acc.models.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            acc.values(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    return acc;
}

AccuracyMatrix read_accuracy_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open accuracy matrix '" + path + "'");
    std::ostringstream s;
    s << in.rdbuf();
    return parse_accuracy_matrix(s.str());
}

json aggregate_json(const AccuracyMatrix& acc, double q_alpha, const std::optional<double>& f_critical) {
    json j;
    j["models"] = acc.models;
    j["datasets"] = acc.datasets.size();
    const Index p = acc.values.cols();
    if (acc.values.rows() == 0) {
        j["notice"] = "no dataset completed for every model";
        return j;
    }
    const Vector mean = acc.values.colwise().mean().transpose();
    j["average_accuracy"] = std::vector<double>(mean.data(), mean.data() + p);
    if (p < 2) {
        j["notice"] = "statistics omitted: fewer than two models";
        return j;
    }
    const RankTable ranks = average_ranks(acc.values);
    j["average_ranks"] = std::vector<double>(ranks.average_ranks.data(), ranks.average_ranks.data() + p);
    if (acc.values.rows() < 2) {
        j["notice"] = "statistics omitted: fewer than two datasets";
        return j;
    }
    j["statistics"] = statistics_json(ranks, q_alpha, acc.models);
    if (f_critical) {
        j["statistics"]["f_critical"] = *f_critical;
        const auto& f = j["statistics"]["f_stat"];
        j["statistics"]["reject_null"] = f.is_null() ? json(nullptr) : json(f.get<double>() > *f_critical);
    }
    return j;
}

std::string cmd_aggregate(const ExperimentConfig& c) {
    if (c.accuracy_matrix.empty()) throw ConfigError("aggregate needs an accuracy matrix (config accuracy_matrix or --input)");
    if (!fs::is_regular_file(c.accuracy_matrix))
        throw ConfigError("accuracy matrix '" + c.accuracy_matrix + "' does not exist");
    ensure_dir(c.out);
    const AccuracyMatrix acc = read_accuracy_matrix(c.accuracy_matrix);
    json report{{"command", "aggregate"}, {"input", c.accuracy_matrix}};
    if (c.seed) report["seed"] = *c.seed;
    report["aggregate"] = aggregate_json(acc, c.q_alpha, c.f_critical);
    if (acc.values.cols() >= 2) {
        std::ostringstream r;
        write_rank_csv(r, average_ranks(acc.values), acc.datasets, acc.models);
        write_text(out_path(c, "ranks.csv"), r.str());
    }
    const auto path = out_path(c, "aggregate_report.json");
    write_json(path, report);
    return path;
}

}  // namespace ifutsvm
