#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qcutlab/adversary.hpp"
#include "qcutlab/classifier.hpp"
#include "qcutlab/dataset.hpp"

namespace qcutlab {

struct AttackScenario {
    std::string name;
    std::vector<AttackConfig::Placement> placements;
    std::vector<int> target_qubits; // empty = all
    double gamma = 0.0;
    TrainSchedule schedule;
};

struct ExperimentConfig {
    std::string dataset = "SYNTH"; // SYNTH | MNIST | FMNIST
    std::string data_dir;          // directory with the IDX files
    std::vector<int> classes = {0, 1};
    int image_size = 16; // target side; native is 28 for MNIST/FMNIST
    int layers = 5;
    int synth_features = 64;
    int synth_train = 200;
    int synth_test = 100;
    TrainSchedule train_schedule;
    std::vector<AttackScenario> scenarios;
    std::uint64_t seed = 1;
    std::string output_dir = "out";
    bool emit_plots = false;
    bool parallel_scenarios = false;

    bool operator==(const ExperimentConfig& other) const;
};

std::string config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const std::string& text);

struct ScenarioResult {
    std::string name;
    std::string csv_path;
    std::vector<AttackEpochMetrics> curve;
};

struct ExperimentResult {
    std::string manifest_path;
    std::string checkpoint_path;
    double clean_test_accuracy = 0.0;
    std::vector<ScenarioResult> scenarios;
};

// Loads or generates the dataset, trains the clean classifier, then runs
// every attack scenario and writes one CSV per scenario plus a manifest
// (config hash, seeds, dataset checksum, wall time) in output_dir.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// CSV schema used for attack curves:
// epoch,strength,misclassification_rate,loss,gamma,placement,seed
std::string attack_curve_csv(const std::vector<AttackEpochMetrics>& curve, double gamma,
                             const std::string& placement_desc, std::uint64_t seed);

// Minimal static SVG line plot of misclassification rate vs strength.
std::string svg_line_plot(const std::vector<AttackEpochMetrics>& curve, const std::string& title);

} // namespace qcutlab
