// Command-line front end: dataset ingestion, classifier training, attack
// runs, cut verification and bound verification suites.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "qcutlab/adversary.hpp"
#include "qcutlab/bounds.hpp"
#include "qcutlab/classifier.hpp"
#include "qcutlab/dataset.hpp"
#include "qcutlab/experiment.hpp"
#include "qcutlab/rng.hpp"
#include "qcutlab/wirecut.hpp"

using namespace qcutlab;

namespace {

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << text;
}

std::string default_data_dir(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("QCUTLAB_DATA_DIR")) return env;
    return {};
}

void emit(const nlohmann::json& j, const std::string& out_path) {
    if (out_path.empty())
        std::cout << j.dump(2) << std::endl;
    else
        write_text_file(out_path, j.dump(2));
}

int cmd_ingest(const std::string& images, const std::string& labels, const std::string& classes_csv, int target,
               const std::string& out_path) {
    std::vector<Sample> samples = ingest_idx(images, labels);
    nlohmann::json j;
    j["count"] = samples.size();
    if (!samples.empty()) j["features"] = samples.front().features.size();
    if (!classes_csv.empty()) {
        std::vector<int> classes;
        std::stringstream ss(classes_csv);
        std::string tok;
        while (std::getline(ss, tok, ',')) classes.push_back(std::stoi(tok));
        samples = filter_classes(samples, classes);
        j["filtered_count"] = samples.size();
        j["classes"] = classes;
    }
    if (target > 0 && !samples.empty()) {
        const int native = static_cast<int>(std::lround(std::sqrt(double(samples.front().features.size()))));
        for (Sample& s : samples) s.features = downsample(s.features, native, target);
        j["downsampled_to"] = target;
    }
    LabeledDataset d;
    d.train = samples;
    j["checksum"] = dataset_checksum(d);
    emit(j, out_path);
    return 0;
}

int cmd_train(const std::string& config_path) {
    ExperimentConfig cfg = config_from_json(read_text_file(config_path));
    cfg.scenarios.clear(); // clean training only
    const ExperimentResult res = run_experiment(cfg);
    std::cout << "checkpoint: " << res.checkpoint_path << "\n"
              << "test accuracy: " << res.clean_test_accuracy << std::endl;
    return 0;
}

int cmd_run(const std::string& config_path, bool full, const std::string& data_dir) {
    ExperimentConfig cfg;
    if (full) {
        // Long-running mode: binary MNIST at depth 10 on 16x16 inputs.
        cfg.dataset = "MNIST";
        cfg.data_dir = default_data_dir(data_dir);
        if (cfg.data_dir.empty())
            throw std::runtime_error("--full needs --data-dir or QCUTLAB_DATA_DIR pointing at the MNIST IDX files");
        cfg.classes = {0, 1};
        cfg.image_size = 16;
        cfg.layers = 10;
        cfg.train_schedule.optimizer = Optimizer::ADAM;
        cfg.train_schedule.stages = {{5, 1e-3}, {5, 1e-4}};
        cfg.train_schedule.batch_size = 64;
        cfg.train_schedule.seed = 7;
        cfg.output_dir = "out-full";
        const ExperimentResult res = run_experiment(cfg);
        const double target = 0.9967;
        std::cout << "binary MNIST depth-10 test accuracy: " << res.clean_test_accuracy << " (target " << target
                  << " +- 0.01)" << std::endl;
        return std::abs(res.clean_test_accuracy - target) <= 0.01 ? 0 : 1;
    }
    cfg = config_from_json(read_text_file(config_path));
    const ExperimentResult res = run_experiment(cfg);
    std::cout << "manifest: " << res.manifest_path << "\n"
              << "test accuracy: " << res.clean_test_accuracy << std::endl;
    for (const ScenarioResult& sr : res.scenarios) std::cout << "scenario " << sr.name << ": " << sr.csv_path << "\n";
    return 0;
}

int cmd_attack(const std::string& config_path, const std::string& checkpoint_path) {
    ExperimentConfig cfg = config_from_json(read_text_file(config_path));
    int data_qubits = 0;
    // Rebuild the dataset exactly as run_experiment would.
    LabeledDataset data;
    if (cfg.dataset == "SYNTH") {
        data = synth_dataset(cfg.synth_features, cfg.synth_train, cfg.synth_test, cfg.seed);
        while ((1 << data_qubits) < cfg.synth_features) ++data_qubits;
    } else {
        throw std::runtime_error("attack: load IDX datasets through `run`; standalone attack supports SYNTH");
    }
    ClassifierModel model = model_from_json(read_text_file(checkpoint_path));
    std::filesystem::create_directories(cfg.output_dir);
    for (std::size_t i = 0; i < cfg.scenarios.size(); ++i) {
        const AttackScenario& sc = cfg.scenarios[i];
        AttackConfig acfg;
        acfg.placements = sc.placements;
        acfg.target_qubits = sc.target_qubits;
        acfg.gamma = sc.gamma;
        acfg.schedule = sc.schedule;
        acfg.schedule.seed = derive_seed(sc.schedule.seed, i); // same stream isolation as `run`
        AttackedModel am = insert_blocks(model, acfg);
        const auto curve = train_attack(am, data);
        std::string desc;
        for (const auto& p : sc.placements)
            desc += (desc.empty() ? "" : "+") + ("b" + std::to_string(p.boundary) + "x" + std::to_string(p.depth));
        const std::string path = cfg.output_dir + "/" + sc.name + ".csv";
        write_text_file(path, attack_curve_csv(curve, sc.gamma, desc, acfg.schedule.seed));
        std::cout << "scenario " << sc.name << ": " << path << std::endl;
    }
    return 0;
}

int cmd_cut_verify(const std::string& circuit_path, int boundary, const std::string& qubits_csv,
                   const std::string& scheme_str, const std::string& out_path) {
    const CircuitIR circuit = circuit_from_text(read_text_file(circuit_path));
    std::vector<CutLocation> cuts;
    std::vector<int> one_based;
    {
        std::stringstream ss(qubits_csv);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            const int q = std::stoi(tok); // CLI numbering: topmost wire is qubit 1
            if (q < 1) throw std::runtime_error("cut-verify: qubits are numbered from 1");
            one_based.push_back(q);
            cuts.push_back({static_cast<std::size_t>(boundary), q - 1});
        }
    }
    const CutScheme scheme = scheme_from_name(scheme_str);
    const CutPlan plan = cut_circuit(circuit, cuts, scheme);

    nlohmann::json report;
    report["cut_qubits"] = one_based;
    report["plan"] = nlohmann::json::parse(cut_plan_to_json(plan));

    // Identity reconstruction over all matrix units of the cut register.
    const Eigen::Index dim = Eigen::Index(1) << plan.m;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = 0; j < dim; ++j) {
            CMatrix unit = CMatrix::Zero(dim, dim);
            unit(i, j) = 1.0;
            CMatrix image = CMatrix::Zero(dim, dim);
            for (const DecompTerm& term : plan.terms)
                image += term.coefficient * term.measurement(j, i) * term.preparation.density();
            worst = std::max(worst, (image - unit).cwiseAbs().maxCoeff());
        }
    report["identity_reconstruction_error"] = worst;
    report["kappa"] = plan.kappa;

    // Exact recombination against the uncut circuit on Z x I... observables.
    const StateVector input = StateVector::zero_state(circuit.width);
    CMatrix obs = CMatrix::Zero(2, 2);
    obs << 1.0, 0.0, 0.0, -1.0;
    for (int q = 1; q < circuit.width; ++q) obs = tensor(obs, CMatrix::Identity(2, 2));
    const double uncut = expectation(circuit, input, obs);
    const double recombined = recombine_exact(plan, input, obs);
    report["uncut_expectation"] = uncut;
    report["recombined_expectation"] = recombined;
    report["recombination_error"] = std::abs(uncut - recombined);
    report["pass"] = worst < 1e-10 && std::abs(uncut - recombined) < 1e-10;
    emit(report, out_path);
    return report["pass"].get<bool>() ? 0 : 1;
}

int cmd_bounds_verify(const std::string& suite, int width, int instances, std::size_t samples, double delta,
                      std::uint64_t seed, const std::string& out_path) {
    nlohmann::json report;
    report["suite"] = suite;
    if (suite == "shift-bound") {
        int violations = 0;
        double worst_margin = 0.0;
        for (int i = 0; i < instances; ++i) {
            const CircuitIR clean = random_circuit(width, 3 * width, derive_seed(seed, 2 * i));
            auto engine = make_engine(seed, 2 * i + 1);
            std::uniform_real_distribution<double> eps(-0.6, 0.6);
            const Eigen::Index dim = Eigen::Index(1) << width;
            const UnitaryOp u =
                unitary_from_hermitian(random_hermitian(dim, derive_seed(seed, 1000000 + i)), eps(engine));
            std::vector<int> wires(width);
            std::iota(wires.begin(), wires.end(), 0);
            CircuitIR attacked;
            attacked.width = width;
            const std::size_t split = clean.gates.size() / 2;
            for (std::size_t g = 0; g < clean.gates.size(); ++g) {
                if (g == split) attacked.append(Gate::custom(wires, u.matrix));
                attacked.append(clean.gates[g]);
            }
            std::vector<StateVector> inputs = {StateVector::zero_state(width)};
            for (int s = 0; s < 3; ++s) {
                StateVector sv;
                sv.num_qubits = width;
                sv.amps = haar_unitary(dim, derive_seed(seed, 2000000 + 10 * i + s)).matrix.col(0);
                inputs.push_back(std::move(sv));
            }
            const BoundReport r = verify_confidence_shift(clean, attacked, {u}, {width - 1}, inputs);
            if (!r.pass) ++violations;
            worst_margin = std::max(worst_margin, r.observed_max_shift - r.opnorm_shift_bound);
        }
        report["instances"] = instances;
        report["violations"] = violations;
        report["worst_margin"] = worst_margin;
        report["pass"] = violations == 0;
    } else if (suite == "haar-shift") {
        const CircuitIR clean = random_circuit(width, 4 * width, derive_seed(seed, 0));
        const Eigen::Index dim = Eigen::Index(1) << width;
        auto engine = make_engine(seed, 1);
        std::uniform_real_distribution<double> eps(0.05, 0.3);
        const UnitaryOp u = unitary_from_hermitian(random_hermitian(dim, derive_seed(seed, 42)), eps(engine));
        std::vector<int> wires(width);
        std::iota(wires.begin(), wires.end(), 0);
        CircuitIR attacked;
        attacked.width = width;
        const std::size_t split = clean.gates.size() / 2;
        for (std::size_t g = 0; g < clean.gates.size(); ++g) {
            if (g == split) attacked.append(Gate::custom(wires, u.matrix));
            attacked.append(clean.gates[g]);
        }
        const CMatrix pi_k = povm_element(width, {width - 1}, 0);
        const HaarShiftStats stats =
            haar_shift_monte_carlo(clean, attacked, pi_k, {u}, delta, samples, derive_seed(seed, 3));
        report["n_samples"] = stats.n_samples;
        report["empirical_mean"] = stats.empirical_mean;
        report["empirical_variance"] = stats.empirical_variance;
        report["analytic_variance"] = stats.analytic_variance;
        report["empirical_tail"] = stats.empirical_tail;
        report["chebyshev_tail_bound"] = stats.chebyshev_tail_bound;
        report["delta"] = stats.delta;
        const double mean_stderr = std::sqrt(stats.empirical_variance / double(stats.n_samples));
        const double rel_err = stats.analytic_variance > 0
                                   ? std::abs(stats.empirical_variance - stats.analytic_variance) / stats.analytic_variance
                                   : 0.0;
        report["pass"] = std::abs(stats.empirical_mean) <= 4 * mean_stderr && rel_err < 0.05 &&
                         stats.empirical_tail <= stats.chebyshev_tail_bound + 3 * std::sqrt(stats.chebyshev_tail_bound /
                                                                                            double(stats.n_samples) +
                                                                                            1e-12);
    } else if (suite == "twirl") {
        const double dev = twirl_check(width, samples, seed);
        report["max_entry_deviation"] = dev;
        report["pass"] = dev < 0.01;
    } else {
        throw std::runtime_error("bounds-verify: unknown suite '" + suite + "'");
    }
    emit(report, out_path);
    return report["pass"].get<bool>() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"wire-cutting and adversarial robustness lab"};
    app.require_subcommand(1);

    auto* ingest = app.add_subcommand("ingest", "parse an IDX image/label pair and report a summary");
    std::string images, labels, classes_csv, out_path;
    int target = 0;
    ingest->add_option("--images", images)->required();
    ingest->add_option("--labels", labels)->required();
    ingest->add_option("--classes", classes_csv, "comma-separated class filter");
    ingest->add_option("--downsample", target, "target image side");
    ingest->add_option("--out", out_path, "write the JSON summary here");

    auto* train_cmd = app.add_subcommand("train", "train the clean classifier from a config");
    std::string train_config;
    train_cmd->add_option("--config", train_config)->required();

    auto* attack_cmd = app.add_subcommand("attack", "train attack scenarios against a checkpoint");
    std::string attack_config, checkpoint;
    attack_cmd->add_option("--config", attack_config)->required();
    attack_cmd->add_option("--checkpoint", checkpoint)->required();

    auto* cut = app.add_subcommand("cut-verify", "cut a circuit and verify exact recombination");
    std::string circuit_path, cut_qubits, scheme_str = "PENG_1", cut_out;
    int boundary = 0;
    cut->add_option("--circuit", circuit_path)->required();
    cut->add_option("--boundary", boundary)->required();
    cut->add_option("--qubits", cut_qubits, "comma-separated cut qubits, 1-based (topmost wire = 1)")->required();
    cut->add_option("--scheme", scheme_str, "PENG_1 | PAULI_M | HARADA_MUB");
    cut->add_option("--out", cut_out);

    auto* bounds_cmd = app.add_subcommand("bounds-verify", "run a bound verification suite");
    std::string suite = "shift-bound", bounds_out;
    int width = 3, instances = 100;
    std::size_t samples = 100000;
    double delta = 0.3;
    std::uint64_t seed = 1;
    bounds_cmd->add_option("--suite", suite, "shift-bound | haar-shift | twirl");
    bounds_cmd->add_option("--width", width);
    bounds_cmd->add_option("--instances", instances);
    bounds_cmd->add_option("--samples", samples);
    bounds_cmd->add_option("--delta", delta);
    bounds_cmd->add_option("--seed", seed);
    bounds_cmd->add_option("--out", bounds_out);

    auto* run_cmd = app.add_subcommand("run", "run a full experiment from a config");
    std::string run_config, data_dir;
    bool full = false;
    run_cmd->add_option("--config", run_config);
    run_cmd->add_flag("--full", full, "long-running binary-MNIST depth-10 mode");
    run_cmd->add_option("--data-dir", data_dir, "IDX dataset directory (or QCUTLAB_DATA_DIR)");

    auto* dump = app.add_subcommand("circuit-dump", "parse a circuit file and print its canonical form");
    std::string dump_path;
    dump->add_option("--circuit", dump_path)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (ingest->parsed()) return cmd_ingest(images, labels, classes_csv, target, out_path);
        if (train_cmd->parsed()) return cmd_train(train_config);
        if (attack_cmd->parsed()) return cmd_attack(attack_config, checkpoint);
        if (cut->parsed()) return cmd_cut_verify(circuit_path, boundary, cut_qubits, scheme_str, cut_out);
        if (bounds_cmd->parsed())
            return cmd_bounds_verify(suite, width, instances, samples, delta, seed, bounds_out);
        if (run_cmd->parsed()) {
            if (!full && run_config.empty()) throw std::runtime_error("run: --config required without --full");
            return cmd_run(run_config, full, data_dir);
        }
        if (dump->parsed()) {
            std::cout << circuit_to_text(circuit_from_text(read_text_file(dump_path)));
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 2;
    }
    return 0;
}
