#pragma once

#include <cstdint>
#include <vector>

#include "qcutlab/classifier.hpp"
#include "qcutlab/linalg.hpp"

namespace qcutlab {

enum class PenaltyKind { L2_THETA, HS_DISTANCE };

struct AttackConfig {
    struct Placement {
        int boundary = 0; // layer boundary index in [0, layers]
        int depth = 1;    // adversarial layers in the block
    };
    std::vector<Placement> placements;
    std::vector<int> target_qubits;        // empty = all qubits
    bool boundary0_includes_ancilla = true; // toggle for input-boundary blocks
    double gamma = 0.0;
    PenaltyKind penalty = PenaltyKind::L2_THETA;
    // The default objective is L - gamma * penalty (penalty limits the
    // attack strength); this flips it to L + gamma * penalty.
    bool additive_penalty_sign = false;
    TrainSchedule schedule;
};

// Same layer structure as the classifier but with the CNOT ring replaced
// by a CRZ ring, so zero parameters mean an identity block. For a single
// target qubit the ring is empty and the fourth parameter slot is unused.
struct AdversarialBlock {
    int boundary = 0;
    int depth = 0;
    std::vector<int> target_qubits;            // resolved global indices
    std::vector<double> theta_hat;             // depth x targets x 4, zero-initialized

    double& param(int layer, int t, int k);
    double param(int layer, int t, int k) const;
    std::vector<Gate> gates() const;           // on the full-register wires
};

struct AttackedModel {
    ClassifierModel clean; // frozen; attack training never touches theta
    AttackConfig cfg;
    std::vector<AdversarialBlock> blocks;
};

struct AttackEpochMetrics {
    int epoch = 0;
    double strength = 0.0;
    double misclassification_rate = 0.0;
    double loss = 0.0;
};

// Boundaries {ceil(l/4), ceil(l/2), ceil(3l/4)} used by the preset
// single-block and three-block scenarios; boundary 0 targets the input.
std::vector<int> preset_boundaries(int layers);

// Builds zero-initialized blocks at the requested boundaries. The clean
// model is copied and treated as frozen from here on.
AttackedModel insert_blocks(const ClassifierModel& model, const AttackConfig& cfg);

// Full circuit with the blocks spliced in at their boundaries.
CircuitIR attacked_circuit(const AttackedModel& am);

std::vector<double> predict_probs_attacked(const AttackedModel& am, const std::vector<double>& x);

// Dense unitary the block applies to its target qubits (dim 2^{d_adv}).
UnitaryOp block_unitary(const AdversarialBlock& block);

// Trainable parameter slots in the order the optimizer walks them. CRZ
// slots are skipped for single-qubit blocks (no ring partner).
struct AttackParamRef {
    std::size_t block;
    std::size_t index;
    bool is_crz;
};
std::vector<AttackParamRef> list_attack_params(const AttackedModel& am);

// d(mean cross-entropy)/d(theta_hat), one entry per listed parameter.
// Rotation angles use the two-term shift rule; CRZ angles the four-term one.
std::vector<double> attack_loss_gradient(const AttackedModel& am, const std::vector<Sample>& batch);

// (1/sqrt(2^{d_adv})) * sum_i ||U_i - I||_2 over the blocks.
double attack_strength(const std::vector<AdversarialBlock>& blocks);

double misclassification_rate(const ClassifierModel& model, const std::vector<Sample>& testset);
double misclassification_rate(const AttackedModel& am, const std::vector<Sample>& testset);

// Trains only theta_hat (gradient ascent on the attack objective) and
// records strength and full-test-set misclassification after every epoch.
std::vector<AttackEpochMetrics> train_attack(AttackedModel& am, const LabeledDataset& data);

} // namespace qcutlab
