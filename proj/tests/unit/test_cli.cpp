#include "helpers.hpp"

#include "ifutsvm/experiment.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

using namespace ifutsvm;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() / ("ifutsvm_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

int run(const std::string& args) {
    const std::string cmd = std::string(IFUTSVM_BINARY) + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

void write_blobs(const fs::path& p, const Dataset& d) {
    std::ostringstream s;
    s.precision(17);
    for (Index i = 0; i < d.size(); ++i) {
        for (Index j = 0; j < d.dim(); ++j) s << d.features()(i, j) << ',';
        s << (d.labels()(i) == 1 ? "positive" : "negative") << '\n';
    }
    write(p, s.str());
}

const char* small_grid = R"("grid": {"c1": [0.1, 1], "c3": [1], "cu": [0.5], "epsilon": [0.3], "width": [1, 4]})";

}  // namespace

TEST_CASE("train then eval on the four-point fixture") {
    TempDir t;
    write(t.path / "four.csv", "0,0,positive\n0,1,positive\n5,0,negative\n5,1,negative\n");
    write(t.path / "cfg.json",
          R"({"datasets": ["four.csv"], "models": ["utsvm"], "hyperparams": {"c1": 1}, "seed": 3, "out": "run"})");
    const std::string cfg = (t.path / "cfg.json").string();
    REQUIRE(run("train --config " + cfg) == 0);
    const fs::path model = t.path / "run" / "model.bin";
    REQUIRE(fs::exists(model));
    const std::string first = slurp(model);
    REQUIRE(run("eval --config " + cfg) == 0);
    const auto report = nlohmann::json::parse(slurp(t.path / "run" / "eval_report.json"));
    CHECK(report.at("results").at(0).at("accuracy").get<double>() == 1.0);

    REQUIRE(run("train --config " + cfg) == 0);
    CHECK(slurp(model) == first);
}

TEST_CASE("train dumps plan and scores") {
    TempDir t;
    write_blobs(t.path / "b.csv", testing::blobs(6, 15, 2, 1.5, 100));
    write(t.path / "cfg.json", R"({"datasets": ["b.csv"], "models": ["ifutsvm-id"], "hyperparams": {"kernel_width": 1}, "seed": 5})");
    const std::string cfg = (t.path / "cfg.json").string();
    const auto out = (t.path / "o").string();
    REQUIRE(run("train --config " + cfg + " --out " + out + " --dump-plan " + (t.path / "plan.csv").string() +
                " --dump-scores " + (t.path / "scores.csv").string()) == 0);
    const std::string scores = slurp(t.path / "scores.csv");
    CHECK(scores.rfind("index,label,membership,nonmembership,score", 0) == 0);
    CHECK(std::count(scores.begin(), scores.end(), '\n') == 22);
    CHECK(slurp(t.path / "plan.csv").rfind("set,row,index", 0) == 0);
    const auto report = nlohmann::json::parse(slurp(fs::path(out) / "train_report.json"));
    CHECK(report.contains("seed"));
}

TEST_CASE("exit codes") {
    TempDir t;
    write(t.path / "cfg.json", R"({"datasets": ["missing.dat"], "seed": 1})");
    CHECK(run("train --config " + (t.path / "cfg.json").string()) == 4);
    CHECK(run("benchmark --config " + (t.path / "nope.json").string()) == 4);
    CHECK(run("frobnicate") == 4);
    write(t.path / "bad.csv", "1,2,positive\n1,x,negative\n");
    write(t.path / "cfg2.json", R"({"datasets": ["bad.csv"], "hyperparams": {"c1": 1}, "seed": 1})");
    CHECK(run("train --config " + (t.path / "cfg2.json").string() + " --out " + (t.path / "o").string()) == 2);
    write(t.path / "cfg3.json", R"({"datasets": ["bad.csv"]})");
    CHECK(run("train --config " + (t.path / "cfg3.json").string()) == 4);  // no seed
}

TEST_CASE("benchmark and noise study agree at level zero; reports are deterministic") {
    TempDir t;
    write_blobs(t.path / "a.csv", testing::blobs(12, 30, 2, 1.2, 101));
    write_blobs(t.path / "b.csv", testing::blobs(12, 24, 3, 1.0, 102));
    std::ostringstream cfg;
    cfg << R"({"datasets": ["a.csv", "b.csv"], "models": ["ifutsvm-id", "utsvm"], )" << small_grid
        << R"(, "hyperparams": {"delta": 0.001}, "folds": 3, "noise_levels": [0, 0.05, 0.1, 0.2], "seed": 9})";
    write(t.path / "cfg.json", cfg.str());
    const std::string c = "--config " + (t.path / "cfg.json").string();
    const auto o1 = (t.path / "o1").string(), o2 = (t.path / "o2").string();

    REQUIRE(run("benchmark " + c + " --out " + o1) == 0);
    const std::string r1 = slurp(fs::path(o1) / "benchmark_report.json");
    const std::string csv1 = slurp(fs::path(o1) / "benchmark_results.csv");
    REQUIRE(run("benchmark " + c + " --out " + o1) == 0);
    CHECK(r1 == slurp(fs::path(o1) / "benchmark_report.json"));
    CHECK(csv1 == slurp(fs::path(o1) / "benchmark_results.csv"));

    // the thread count is echoed in the config block but must not change results
    REQUIRE(run("benchmark " + c + " --out " + o2 + " --threads 2") == 0);
    const auto bench = nlohmann::json::parse(r1);
    const auto threaded = nlohmann::json::parse(slurp(fs::path(o2) / "benchmark_report.json"));
    CHECK(bench.at("datasets") == threaded.at("datasets"));
    CHECK(bench.at("aggregate") == threaded.at("aggregate"));
    CHECK(bench.at("aggregate").contains("statistics"));

    REQUIRE(run("noise-study " + c + " --out " + o1) == 0);
    const std::string n1 = slurp(fs::path(o1) / "noise_report.json");
    REQUIRE(run("noise-study " + c + " --out " + o1) == 0);
    CHECK(n1 == slurp(fs::path(o1) / "noise_report.json"));
    const auto noise = nlohmann::json::parse(n1);
    std::map<std::string, int> per_model;
    for (const auto& row : noise.at("rows")) {
        per_model[row.at("dataset").get<std::string>() + "/" + row.at("model").get<std::string>()]++;
        if (row.at("level").get<double>() != 0.0) continue;
        const auto& b = bench.at("datasets");
        for (const auto& ds : b) {
            if (ds.at("name") != row.at("dataset")) continue;
            const double acc = 100.0 * ds.at("models").at(row.at("model").get<std::string>()).at("accuracy").get<double>();
            CHECK(row.at("accuracy").get<double>() == doctest::Approx(acc).epsilon(1e-12));
        }
    }
    for (const auto& [key, count] : per_model) CHECK(count == 4);

    // a different seed draws a different flip set
    std::ostringstream other;
    other << R"({"datasets": ["a.csv"], "models": ["ifutsvm-id"], "grid": {"width": [1]}, "noise_levels": [0.2], "folds": 3})";
    write(t.path / "cfg2.json", other.str());
    const auto o3 = (t.path / "o3").string(), o4 = (t.path / "o4").string();
    REQUIRE(run("noise-study --config " + (t.path / "cfg2.json").string() + " --seed 1 --out " + o3) == 0);
    REQUIRE(run("noise-study --config " + (t.path / "cfg2.json").string() + " --seed 2 --out " + o4) == 0);
    CHECK(slurp(fs::path(o3) / "flips_a_0.2.csv") != slurp(fs::path(o4) / "flips_a_0.2.csv"));
}

TEST_CASE("single-model benchmark omits the statistics with a notice") {
    TempDir t;
    write_blobs(t.path / "a.csv", testing::blobs(10, 20, 2, 1.5, 103));
    std::ostringstream cfg;
    cfg << R"({"datasets": ["a.csv"], "models": ["ifutsvm-id"], )" << small_grid << R"(, "folds": 3, "seed": 2})";
    write(t.path / "cfg.json", cfg.str());
    REQUIRE(run("benchmark --config " + (t.path / "cfg.json").string() + " --out " + (t.path / "o").string()) == 0);
    const auto report = nlohmann::json::parse(slurp(t.path / "o" / "benchmark_report.json"));
    CHECK(report.at("aggregate").contains("notice"));
    CHECK_FALSE(report.at("aggregate").contains("statistics"));
}

TEST_CASE("benchmark falls back to partially trained grid points") {
    // On this split the narrowest width zeroes every majority score in all
    // folds and the widest zeroes every minority score in the first fold only.
    TempDir t;
    ExperimentConfig c;
    c.datasets = {TEST_DATA_DIR "/keel/ecoli-0-1_vs_5.dat"};
    c.models = {ModelKind::ifutsvm_id};
    c.grid = ParameterGrid{};
    c.grid.width = {0.03125, 32.0};
    c.seed = 1;
    c.out = t.path.string();
    const auto report = nlohmann::json::parse(slurp(cmd_benchmark(c)));
    const auto& ds = report.at("datasets").at(0);
    REQUIRE(ds.at("status") == "ok");
    const auto& m = ds.at("models").at("ifutsvm-id");
    CHECK(m.at("cv_failed_folds") == 1);
    CHECK(m.at("failed_points") == 2);
    CHECK(m.at("hyperparams").at("kernel_width") == 32.0);
}

TEST_CASE("aggregate bypass reproduces the published averages") {
    TempDir t;
    const auto out = (t.path / "o").string();
    REQUIRE(run("aggregate --input " TEST_DATA_DIR "/reference_accuracy.csv --out " + out) == 0);
    const auto report = nlohmann::json::parse(slurp(fs::path(out) / "aggregate_report.json"));
    const std::vector<double> expected{83.52, 81.15, 80.61, 79.44, 86.19, 87.70};
    const auto avg = report.at("aggregate").at("average_accuracy");
    REQUIRE(avg.size() == 6);
    for (std::size_t j = 0; j < 6; ++j) CHECK(std::abs(avg.at(j).get<double>() - expected[j]) <= 0.01);
    CHECK(std::abs(report.at("aggregate").at("statistics").at("cd").get<double>() - 1.11) <= 0.005);
    const std::string first = slurp(fs::path(out) / "aggregate_report.json");
    REQUIRE(run("aggregate --input " TEST_DATA_DIR "/reference_accuracy.csv --out " + out) == 0);
    CHECK(slurp(fs::path(out) / "aggregate_report.json") == first);
}

TEST_CASE("config parsing") {
    const auto c = parse_config(nlohmann::json::parse(
        R"({"models": ["utsvm"], "grid": {"c1": [1, 10], "width": "linear"}, "seed": 4, "threads": 2})"));
    CHECK(c.models.size() == 1);
    CHECK(c.grid.c1.size() == 2);
    CHECK(c.grid.width.empty());
    CHECK(*c.seed == 4);
    CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"colour": 1})")), ConfigError);
    CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"hyperparams": {"gamma": 1}})")), ConfigError);
    const auto full = parse_config(nlohmann::json::parse(R"({"grid": "full"})"));
    CHECK(full.grid.size() == full_grid().size());

    const auto acc = parse_accuracy_matrix("# comment\ndataset,a,b\nx,1,2\ny,3,4\n");
    CHECK(acc.values.rows() == 2);
    CHECK(acc.models == std::vector<std::string>{"a", "b"});
    CHECK_THROWS_AS(parse_accuracy_matrix("dataset,a,b\nx,1\n"), ParseError);
}
