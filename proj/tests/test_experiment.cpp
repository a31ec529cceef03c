#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "qcutlab/experiment.hpp"

using namespace qcutlab;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentConfig smoke_config(const std::string& outdir) {
    ExperimentConfig cfg;
    cfg.dataset = "SYNTH";
    cfg.synth_features = 4;
    cfg.synth_train = 48;
    cfg.synth_test = 24;
    cfg.layers = 2;
    cfg.train_schedule.optimizer = Optimizer::ADAM;
    cfg.train_schedule.stages = {{8, 0.05}};
    cfg.train_schedule.batch_size = 16;
    cfg.train_schedule.seed = 5;
    cfg.seed = 21;
    cfg.output_dir = outdir;

    AttackScenario sc;
    sc.name = "mid-block";
    sc.placements = {{1, 1}};
    sc.gamma = 0.0;
    sc.schedule.optimizer = Optimizer::SGD;
    sc.schedule.stages = {{4, 0.3}};
    sc.schedule.batch_size = 16;
    sc.schedule.seed = 9;
    cfg.scenarios.push_back(sc);

    AttackScenario local = sc;
    local.name = "local-block";
    local.target_qubits = {1, 2};
    cfg.scenarios.push_back(local);
    return cfg;
}

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() / ("qcutlab-exp-" + std::to_string(std::rand()));
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

} // namespace

TEST_CASE("config JSON round trip") {
    const ExperimentConfig cfg = smoke_config("somewhere");
    const ExperimentConfig back = config_from_json(config_to_json(cfg));
    CHECK(back == cfg);

    ExperimentConfig other = cfg;
    other.seed = 22;
    CHECK_FALSE(back == other);
}

TEST_CASE("attack_curve_csv rows carry the full schema") {
    std::vector<AttackEpochMetrics> curve = {{0, 0.0, 0.25, 1.0}, {1, 0.5, 0.5, 0.8}};
    const std::string csv = attack_curve_csv(curve, 3.0, "b1x2", 17);
    CHECK(csv.find("epoch,strength,misclassification_rate,loss,gamma,placement,seed") == 0);
    CHECK(csv.find("b1x2") != std::string::npos);
    CHECK(csv.find("\n1,0.5,0.5,0.8,3,b1x2,17\n") != std::string::npos);
}

TEST_CASE("run_experiment writes CSVs, plots and a manifest; reruns are byte-identical") {
    TempDir dir;
    ExperimentConfig cfg = smoke_config((dir.path / "run1").string());
    cfg.emit_plots = true;

    const ExperimentResult result = run_experiment(cfg);
    CHECK(result.clean_test_accuracy >= 0.9);
    REQUIRE(result.scenarios.size() == 2);

    for (const ScenarioResult& sr : result.scenarios) {
        const std::string csv = slurp(sr.csv_path);
        CHECK(csv.find("epoch,") == 0);
        // Each row keeps strength >= 0 and rate in [0, 1].
        std::istringstream lines(csv);
        std::string line;
        std::getline(lines, line); // header
        int rows = 0;
        while (std::getline(lines, line)) {
            std::istringstream cells(line);
            std::string epoch, strength, rate;
            std::getline(cells, epoch, ',');
            std::getline(cells, strength, ',');
            std::getline(cells, rate, ',');
            CHECK(std::stod(strength) >= 0.0);
            CHECK(std::stod(rate) >= 0.0);
            CHECK(std::stod(rate) <= 1.0);
            ++rows;
        }
        CHECK(rows == 4);
    }

    const std::string manifest = slurp(result.manifest_path);
    CHECK(manifest.find("config_hash") != std::string::npos);
    CHECK(manifest.find("dataset_checksum") != std::string::npos);
    CHECK(manifest.find("wall_seconds") != std::string::npos);

    const std::string svg = slurp((dir.path / "run1" / "mid-block.svg").string());
    CHECK(svg.find("<svg") == 0);
    CHECK(svg.find("polyline") != std::string::npos);

    // Byte-identical rerun with the same seeds.
    ExperimentConfig cfg2 = smoke_config((dir.path / "run2").string());
    cfg2.emit_plots = true;
    const ExperimentResult again = run_experiment(cfg2);
    for (std::size_t i = 0; i < result.scenarios.size(); ++i)
        CHECK(slurp(result.scenarios[i].csv_path) == slurp(again.scenarios[i].csv_path));
}

TEST_CASE("parallel scenarios produce the same CSVs as sequential runs") {
    TempDir dir;
    ExperimentConfig seq = smoke_config((dir.path / "seq").string());
    ExperimentConfig par = smoke_config((dir.path / "par").string());
    par.parallel_scenarios = true;
    const ExperimentResult a = run_experiment(seq);
    const ExperimentResult b = run_experiment(par);
    REQUIRE(a.scenarios.size() == b.scenarios.size());
    for (std::size_t i = 0; i < a.scenarios.size(); ++i)
        CHECK(slurp(a.scenarios[i].csv_path) == slurp(b.scenarios[i].csv_path));
}

TEST_CASE("run_experiment rejects unknown datasets and missing data dirs") {
    ExperimentConfig cfg = smoke_config("unused");
    cfg.dataset = "NOPE";
    CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
    cfg.dataset = "MNIST";
    cfg.data_dir = "";
    CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
}
