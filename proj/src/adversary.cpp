#include "qcutlab/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

#include "qcutlab/parallel.hpp"
#include "qcutlab/rng.hpp"

namespace qcutlab {

namespace {

constexpr double kPi = std::numbers::pi;

StateVector encoded_input(const ClassifierModel& model, const std::vector<double>& x) {
    const StateVector data = amplitude_encode(x, model.data_qubits);
    StateVector full;
    full.num_qubits = model.width();
    full.amps = CVector::Zero(Eigen::Index(1) << full.num_qubits);
    const std::size_t shift = std::size_t(1) << model.ancilla_qubits;
    for (Eigen::Index i = 0; i < data.amps.size(); ++i) full.amps(i * shift) = data.amps(i);
    return full;
}

} // namespace

double& AdversarialBlock::param(int layer, int t, int k) {
    return theta_hat[(static_cast<std::size_t>(layer) * target_qubits.size() + t) * 4 + k];
}

double AdversarialBlock::param(int layer, int t, int k) const {
    return theta_hat[(static_cast<std::size_t>(layer) * target_qubits.size() + t) * 4 + k];
}

std::vector<Gate> AdversarialBlock::gates() const {
    std::vector<Gate> out;
    const int n = static_cast<int>(target_qubits.size());
    for (int l = 0; l < depth; ++l) {
        for (int t = 0; t < n; ++t)
            out.push_back(Gate::rot(target_qubits[t], param(l, t, 0), param(l, t, 1), param(l, t, 2)));
        if (n >= 2)
            for (int t = 0; t < n; ++t)
                out.push_back(Gate::crz(target_qubits[t], target_qubits[(t + 1) % n], param(l, t, 3)));
    }
    return out;
}

std::vector<int> preset_boundaries(int layers) {
    auto ceil_div = [](int a, int b) { return (a + b - 1) / b; };
    return {ceil_div(layers, 4), ceil_div(layers, 2), ceil_div(3 * layers, 4)};
}

AttackedModel insert_blocks(const ClassifierModel& model, const AttackConfig& cfg) {
    AttackedModel am;
    am.clean = model;
    am.cfg = cfg;
    for (const AttackConfig::Placement& p : cfg.placements) {
        if (p.boundary < 0 || p.boundary > model.layers)
            throw std::invalid_argument("insert_blocks: boundary outside [0, layers]");
        if (p.depth < 1) throw std::invalid_argument("insert_blocks: block depth must be >= 1");
        AdversarialBlock block;
        block.boundary = p.boundary;
        block.depth = p.depth;
        if (cfg.target_qubits.empty()) {
            const bool input_only = p.boundary == 0 && !cfg.boundary0_includes_ancilla;
            const int n = input_only ? model.data_qubits : model.width();
            for (int q = 0; q < n; ++q) block.target_qubits.push_back(q);
        } else {
            std::set<int> seen;
            for (int q : cfg.target_qubits) {
                if (q < 0 || q >= model.width()) throw std::invalid_argument("insert_blocks: target qubit out of range");
                if (!seen.insert(q).second) throw std::invalid_argument("insert_blocks: duplicate target qubit");
            }
            block.target_qubits = cfg.target_qubits;
        }
        block.theta_hat.assign(static_cast<std::size_t>(block.depth) * block.target_qubits.size() * 4, 0.0);
        am.blocks.push_back(std::move(block));
    }
    return am;
}

CircuitIR attacked_circuit(const AttackedModel& am) {
    const CircuitIR clean = build_ansatz(am.clean);
    CircuitIR out;
    out.width = clean.width;
    // clean.layer_boundaries has layers+1 entries; splice blocks in at
    // their boundary before the corresponding clean segment.
    for (int b = 0; b <= am.clean.layers; ++b) {
        for (const AdversarialBlock& block : am.blocks)
            if (block.boundary == b)
                for (Gate g : block.gates()) out.append(std::move(g));
        const std::size_t from = clean.layer_boundaries[b];
        const std::size_t to = b == am.clean.layers ? clean.gates.size() : clean.layer_boundaries[b + 1];
        for (std::size_t i = from; i < to; ++i) out.append(clean.gates[i]);
    }
    return out;
}

std::vector<double> predict_probs_attacked(const AttackedModel& am, const std::vector<double>& x) {
    const StateVector out = simulate(attacked_circuit(am), encoded_input(am.clean, x));
    std::vector<double> probs = povm_probabilities(out, am.clean.readout_qubits());
    probs.resize(am.clean.num_classes);
    return probs;
}

UnitaryOp block_unitary(const AdversarialBlock& block) {
    const int n = static_cast<int>(block.target_qubits.size());
    if (n > 10) throw std::invalid_argument("block_unitary: more than 10 target qubits");
    // Same gate sequence, remapped onto a local register 0..n-1.
    std::vector<int> sorted = block.target_qubits;
    std::vector<int> rank(sorted.size());
    std::vector<int> order(sorted.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return sorted[a] < sorted[b]; });
    for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = static_cast<int>(i);

    AdversarialBlock local = block;
    local.target_qubits.resize(block.target_qubits.size());
    for (std::size_t i = 0; i < rank.size(); ++i) local.target_qubits[i] = rank[i];
    CircuitIR c;
    c.width = n;
    for (Gate g : local.gates()) c.append(std::move(g));
    return UnitaryOp(circuit_unitary(c));
}

double attack_strength(const std::vector<AdversarialBlock>& blocks) {
    double total = 0.0;
    for (const AdversarialBlock& block : blocks) {
        const UnitaryOp u = block_unitary(block);
        const CMatrix diff = CMatrix::Identity(u.dim(), u.dim()) - u.matrix;
        total += diff.norm() / std::sqrt(double(u.dim()));
    }
    return total;
}

double misclassification_rate(const ClassifierModel& model, const std::vector<Sample>& testset) {
    if (testset.empty()) throw std::invalid_argument("misclassification_rate: empty test set");
    return 1.0 - accuracy(model, testset);
}

double misclassification_rate(const AttackedModel& am, const std::vector<Sample>& testset) {
    if (testset.empty()) throw std::invalid_argument("misclassification_rate: empty test set");
    const CircuitIR circuit = attacked_circuit(am);
    const double hits = ordered_map_reduce<double>(
        testset.size(), 0.0,
        [&](std::size_t i) {
            const StateVector out = simulate(circuit, encoded_input(am.clean, testset[i].features));
            std::vector<double> probs = povm_probabilities(out, am.clean.readout_qubits());
            probs.resize(am.clean.num_classes);
            const int choice = static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
            return choice == testset[i].label ? 1.0 : 0.0;
        },
        [](double a, double b) { return a + b; });
    return 1.0 - hits / double(testset.size());
}

std::vector<AttackParamRef> list_attack_params(const AttackedModel& am) {
    std::vector<AttackParamRef> refs;
    for (std::size_t b = 0; b < am.blocks.size(); ++b) {
        const AdversarialBlock& block = am.blocks[b];
        const std::size_t n = block.target_qubits.size();
        for (std::size_t i = 0; i < block.theta_hat.size(); ++i) {
            const bool crz = (i % 4) == 3;
            if (crz && n < 2) continue; // no ring partner, parameter unused
            refs.push_back({b, i, crz});
        }
    }
    return refs;
}

namespace {

using ParamRef = AttackParamRef;

double label_prob(const AttackedModel& am, const Sample& sample) {
    return predict_probs_attacked(am, sample.features)[sample.label];
}

// d p_label / d theta. Rotation angles use the two-term rule; CRZ angles
// carry frequencies {1/2, 1} and need the four-term rule.
double prob_shift_grad(AttackedModel& am, const Sample& sample, const ParamRef& ref) {
    double& slot = am.blocks[ref.block].theta_hat[ref.index];
    const double original = slot;
    auto eval = [&](double delta) {
        slot = original + delta;
        const double p = label_prob(am, sample);
        slot = original;
        return p;
    };
    if (!ref.is_crz) return (eval(kPi / 2) - eval(-kPi / 2)) / 2.0;
    const double c1 = (std::sqrt(2.0) + 1.0) / (4.0 * std::sqrt(2.0));
    const double c2 = (std::sqrt(2.0) - 1.0) / (4.0 * std::sqrt(2.0));
    return c1 * (eval(kPi / 2) - eval(-kPi / 2)) - c2 * (eval(3 * kPi / 2) - eval(-3 * kPi / 2));
}

// d Tr(U_block) / d theta via the ±π rule for linear functionals.
Complex trace_shift_grad(AttackedModel& am, const ParamRef& ref) {
    double& slot = am.blocks[ref.block].theta_hat[ref.index];
    const double original = slot;
    auto eval = [&](double delta) {
        slot = original + delta;
        const Complex t = block_unitary(am.blocks[ref.block]).matrix.trace();
        slot = original;
        return t;
    };
    return (eval(kPi) - eval(-kPi)) / 4.0;
}

// Gradient of the penalty with respect to every listed parameter.
std::vector<double> penalty_gradient(AttackedModel& am, const std::vector<ParamRef>& refs) {
    std::vector<double> grad(refs.size(), 0.0);
    if (am.cfg.penalty == PenaltyKind::L2_THETA) {
        double norm_sq = 0.0;
        for (const ParamRef& r : refs) {
            const double v = am.blocks[r.block].theta_hat[r.index];
            norm_sq += v * v;
        }
        const double norm = std::sqrt(norm_sq);
        if (norm < 1e-12) return grad; // subgradient 0 at the origin
        for (std::size_t k = 0; k < refs.size(); ++k)
            grad[k] = am.blocks[refs[k].block].theta_hat[refs[k].index] / norm;
        return grad;
    }
    // HS_DISTANCE: sum_i ||I - U_i||_2 with d||I-U||/dtheta = -Re dTr(U)/dtheta / ||I-U||.
    std::vector<double> dist(am.blocks.size(), 0.0);
    for (std::size_t b = 0; b < am.blocks.size(); ++b) {
        const UnitaryOp u = block_unitary(am.blocks[b]);
        dist[b] = (CMatrix::Identity(u.dim(), u.dim()) - u.matrix).norm();
    }
    for (std::size_t k = 0; k < refs.size(); ++k) {
        const std::size_t b = refs[k].block;
        if (dist[b] < 1e-9) continue; // not differentiable at the identity
        grad[k] = -trace_shift_grad(am, refs[k]).real() / dist[b];
    }
    return grad;
}

} // namespace

std::vector<double> attack_loss_gradient(const AttackedModel& am, const std::vector<Sample>& batch) {
    if (batch.empty()) throw std::invalid_argument("attack_loss_gradient: empty batch");
    const std::vector<ParamRef> refs = list_attack_params(am);
    std::vector<std::vector<double>> per_sample(batch.size());
    parallel_for(batch.size(), [&](std::size_t s) {
        AttackedModel scratch = am;
        std::vector<double> g(refs.size(), 0.0);
        const double p = std::max(label_prob(scratch, batch[s]), 1e-12);
        for (std::size_t k = 0; k < refs.size(); ++k)
            g[k] = -prob_shift_grad(scratch, batch[s], refs[k]) / p;
        per_sample[s] = std::move(g);
    });
    std::vector<double> grad(refs.size(), 0.0);
    for (const std::vector<double>& g : per_sample)
        for (std::size_t k = 0; k < refs.size(); ++k) grad[k] += g[k];
    for (double& v : grad) v /= double(batch.size());
    return grad;
}

std::vector<AttackEpochMetrics> train_attack(AttackedModel& am, const LabeledDataset& data) {
    if (data.train.empty()) throw std::invalid_argument("train_attack: empty training split");
    if (data.test.empty()) throw std::invalid_argument("train_attack: empty test split");
    const TrainSchedule& schedule = am.cfg.schedule;
    const std::vector<ParamRef> refs = list_attack_params(am);
    const int epochs = schedule.total_epochs();
    const double pen_sign = am.cfg.additive_penalty_sign ? 1.0 : -1.0;

    std::vector<double> adam_m(refs.size(), 0.0), adam_v(refs.size(), 0.0);
    long step = 0;

    std::vector<std::size_t> order(data.train.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<AttackEpochMetrics> curve;

    for (int epoch = 0; epoch < epochs; ++epoch) {
        auto engine = make_engine(schedule.seed, static_cast<std::uint64_t>(epoch));
        std::shuffle(order.begin(), order.end(), engine);
        const double lr = schedule.lr_for_epoch(epoch);

        for (std::size_t start = 0; start < order.size(); start += schedule.batch_size) {
            const std::size_t stop = std::min(order.size(), start + schedule.batch_size);
            std::vector<Sample> batch;
            batch.reserve(stop - start);
            for (std::size_t i = start; i < stop; ++i) batch.push_back(data.train[order[i]]);

            const std::vector<double> loss_grad = attack_loss_gradient(am, batch);
            const std::vector<double> pen_grad = penalty_gradient(am, refs);
            // Ascent on L + pen_sign * gamma * penalty.
            std::vector<double> ascent(refs.size());
            for (std::size_t k = 0; k < refs.size(); ++k)
                ascent[k] = loss_grad[k] + pen_sign * am.cfg.gamma * pen_grad[k];

            ++step;
            if (schedule.optimizer == Optimizer::SGD) {
                for (std::size_t k = 0; k < refs.size(); ++k)
                    am.blocks[refs[k].block].theta_hat[refs[k].index] += lr * ascent[k];
            } else {
                constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
                const double c1 = 1.0 - std::pow(b1, double(step));
                const double c2 = 1.0 - std::pow(b2, double(step));
                for (std::size_t k = 0; k < refs.size(); ++k) {
                    adam_m[k] = b1 * adam_m[k] + (1.0 - b1) * ascent[k];
                    adam_v[k] = b2 * adam_v[k] + (1.0 - b2) * ascent[k] * ascent[k];
                    am.blocks[refs[k].block].theta_hat[refs[k].index] +=
                        lr * (adam_m[k] / c1) / (std::sqrt(adam_v[k] / c2) + eps);
                }
            }
        }

        AttackEpochMetrics em;
        em.epoch = epoch;
        em.strength = attack_strength(am.blocks);
        em.misclassification_rate = misclassification_rate(am, data.test);
        const CircuitIR circuit = attacked_circuit(am);
        em.loss = ordered_map_reduce<double>(
                      data.train.size(), 0.0,
                      [&](std::size_t i) {
                          const Sample& s = data.train[i];
                          const StateVector out = simulate(circuit, encoded_input(am.clean, s.features));
                          std::vector<double> probs = povm_probabilities(out, am.clean.readout_qubits());
                          return -std::log(std::max(probs[static_cast<std::size_t>(s.label)], 1e-12));
                      },
                      [](double a, double b) { return a + b; }) /
                  double(data.train.size());
        curve.push_back(em);
    }
    return curve;
}

} // namespace qcutlab
