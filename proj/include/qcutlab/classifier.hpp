#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qcutlab/circuit.hpp"

namespace qcutlab {

struct Sample {
    std::vector<double> features;
    int label = 0;
};

struct LabeledDataset {
    std::vector<Sample> train;
    std::vector<Sample> test;
};

// Layered variational classifier: per layer, a three-angle rotation on
// every qubit followed by a cyclic CNOT ring. The bottom ceil(log2 K)
// qubits are ancillas and carry the readout.
struct ClassifierModel {
    int data_qubits = 0;    // d
    int ancilla_qubits = 0; // d_a = ceil(log2 K)
    int layers = 0;
    int num_classes = 2;            // K, a power of two
    std::vector<double> theta;      // layers x width x 3, row-major

    static ClassifierModel create(int data_qubits, int num_classes, int layers);

    int width() const { return data_qubits + ancilla_qubits; }
    std::vector<int> readout_qubits() const;
    double& angle(int layer, int qubit, int k);
    double angle(int layer, int qubit, int k) const;
};

enum class Optimizer { ADAM, SGD };

struct LrStage {
    int epochs = 0;
    double learning_rate = 0.0;
};

struct TrainSchedule {
    Optimizer optimizer = Optimizer::ADAM;
    std::vector<LrStage> stages;
    int batch_size = 64;
    std::uint64_t seed = 0;

    int total_epochs() const;
    double lr_for_epoch(int epoch) const;
    std::string fingerprint() const;
};

struct EpochMetrics {
    int epoch = 0;
    double train_loss = 0.0;
    double train_accuracy = 0.0;
    double test_accuracy = 0.0;
};

// Pads with zeros to 2^d and L2-normalizes; input signs are kept.
StateVector amplitude_encode(const std::vector<double>& x, int data_qubits);

// The model's circuit, with layer boundaries recorded at the start of each
// layer plus the end of the gate list (layers + 1 positions).
CircuitIR build_ansatz(const ClassifierModel& model);

// Exact class probabilities: encode, pad ancillas with |0⟩, simulate,
// read the POVM on the ancilla qubits.
std::vector<double> predict_probs(const ClassifierModel& model, const std::vector<double>& x);

int predict_class(const ClassifierModel& model, const std::vector<double>& x);

// -ln p_label with the probability floored at 1e-12.
double cross_entropy(const std::vector<double>& probs, int label);

// Mean cross-entropy over the batch.
double batch_loss(const ClassifierModel& model, const std::vector<Sample>& batch);

// d(mean loss)/d(theta) via the parameter-shift rule (±π/2 on each
// rotation angle); per-sample terms are reduced in sample order.
std::vector<double> gradient(const ClassifierModel& model, const std::vector<Sample>& batch);

// Deterministic per seed: shuffles with a fixed stream, reduces batch
// gradients in order. Returns per-epoch metrics alongside the new model.
std::pair<ClassifierModel, std::vector<EpochMetrics>> train(const ClassifierModel& model,
                                                            const LabeledDataset& data,
                                                            const TrainSchedule& schedule);

double accuracy(const ClassifierModel& model, const std::vector<Sample>& samples);

// JSON checkpoint: dims, theta (row-major [layer][qubit][angle]), schedule
// fingerprint and RNG seed, plus the encoding conventions.
std::string model_to_json(const ClassifierModel& model, const TrainSchedule& schedule);
ClassifierModel model_from_json(const std::string& text);

} // namespace qcutlab
