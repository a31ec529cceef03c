#include "qcutlab/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "qcutlab/parallel.hpp"
#include "qcutlab/rng.hpp"

namespace qcutlab {

namespace {

int ceil_log2(int n) {
    int bits = 0;
    while ((1 << bits) < n) ++bits;
    return bits;
}

} // namespace

ClassifierModel ClassifierModel::create(int data_qubits, int num_classes, int layers) {
    if (data_qubits < 1) throw std::invalid_argument("ClassifierModel: need at least one data qubit");
    if (layers < 1) throw std::invalid_argument("ClassifierModel: need at least one layer");
    if (num_classes < 2 || (num_classes & (num_classes - 1)) != 0)
        throw std::invalid_argument("ClassifierModel: class count must be a power of two >= 2");
    ClassifierModel m;
    m.data_qubits = data_qubits;
    m.num_classes = num_classes;
    m.ancilla_qubits = ceil_log2(num_classes);
    m.layers = layers;
    if (m.width() < 2) throw std::invalid_argument("ClassifierModel: total width must be >= 2");
    m.theta.assign(static_cast<std::size_t>(layers) * m.width() * 3, 0.0);
    return m;
}

std::vector<int> ClassifierModel::readout_qubits() const {
    std::vector<int> out;
    for (int q = width() - ancilla_qubits; q < width(); ++q) out.push_back(q);
    return out;
}

double& ClassifierModel::angle(int layer, int qubit, int k) {
    return theta[(static_cast<std::size_t>(layer) * width() + qubit) * 3 + k];
}

double ClassifierModel::angle(int layer, int qubit, int k) const {
    return theta[(static_cast<std::size_t>(layer) * width() + qubit) * 3 + k];
}

int TrainSchedule::total_epochs() const {
    int total = 0;
    for (const LrStage& s : stages) total += s.epochs;
    return total;
}

double TrainSchedule::lr_for_epoch(int epoch) const {
    int cursor = 0;
    for (const LrStage& s : stages) {
        cursor += s.epochs;
        if (epoch < cursor) return s.learning_rate;
    }
    return stages.empty() ? 0.0 : stages.back().learning_rate;
}

std::string TrainSchedule::fingerprint() const {
    std::string fp = optimizer == Optimizer::ADAM ? "adam" : "sgd";
    fp += ";b" + std::to_string(batch_size);
    for (const LrStage& s : stages) fp += ";" + std::to_string(s.epochs) + "x" + std::to_string(s.learning_rate);
    return fp;
}

StateVector amplitude_encode(const std::vector<double>& x, int data_qubits) {
    const std::size_t dim = std::size_t(1) << data_qubits;
    if (x.empty() || x.size() > dim)
        throw std::invalid_argument("amplitude_encode: feature length must be in [1, 2^d]");
    double norm_sq = 0.0;
    for (double v : x) {
        if (!std::isfinite(v)) throw std::invalid_argument("amplitude_encode: non-finite feature");
        norm_sq += v * v;
    }
    if (norm_sq <= 0.0) throw std::invalid_argument("amplitude_encode: zero vector cannot be encoded");
    const double inv = 1.0 / std::sqrt(norm_sq);
    CVector amps = CVector::Zero(static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < x.size(); ++i) amps(static_cast<Eigen::Index>(i)) = x[i] * inv;
    StateVector s;
    s.num_qubits = data_qubits;
    s.amps = std::move(amps);
    return s;
}

CircuitIR build_ansatz(const ClassifierModel& model) {
    const int w = model.width();
    if (w < 2) throw std::invalid_argument("build_ansatz: width must be >= 2");
    CircuitIR c;
    c.width = w;
    for (int l = 0; l < model.layers; ++l) {
        c.layer_boundaries.push_back(c.gates.size());
        for (int q = 0; q < w; ++q)
            c.append(Gate::rot(q, model.angle(l, q, 0), model.angle(l, q, 1), model.angle(l, q, 2)));
        // Cyclic entangler; for w = 2 the ring is the literal pair
        // CNOT(0,1), CNOT(1,0) even though the second is redundant.
        for (int q = 0; q < w; ++q) c.append(Gate::cnot(q, (q + 1) % w));
    }
    c.layer_boundaries.push_back(c.gates.size());
    return c;
}

namespace {

StateVector encoded_input(const ClassifierModel& model, const std::vector<double>& x) {
    const StateVector data = amplitude_encode(x, model.data_qubits);
    StateVector full;
    full.num_qubits = model.width();
    full.amps = CVector::Zero(Eigen::Index(1) << full.num_qubits);
    const std::size_t shift = std::size_t(1) << model.ancilla_qubits; // ancillas are the low bits, all |0>
    for (Eigen::Index i = 0; i < data.amps.size(); ++i) full.amps(i * shift) = data.amps(i);
    return full;
}

std::vector<double> probs_for_circuit(const ClassifierModel& model, const CircuitIR& circuit,
                                      const std::vector<double>& x) {
    const StateVector out = simulate(circuit, encoded_input(model, x));
    std::vector<double> probs = povm_probabilities(out, model.readout_qubits());
    probs.resize(model.num_classes); // K is a power of two, so this is exact
    return probs;
}

} // namespace

std::vector<double> predict_probs(const ClassifierModel& model, const std::vector<double>& x) {
    return probs_for_circuit(model, build_ansatz(model), x);
}

int predict_class(const ClassifierModel& model, const std::vector<double>& x) {
    const std::vector<double> probs = predict_probs(model, x);
    return static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

double cross_entropy(const std::vector<double>& probs, int label) {
    if (label < 0 || static_cast<std::size_t>(label) >= probs.size())
        throw std::invalid_argument("cross_entropy: label out of range");
    return -std::log(std::max(probs[static_cast<std::size_t>(label)], 1e-12));
}

double batch_loss(const ClassifierModel& model, const std::vector<Sample>& batch) {
    if (batch.empty()) throw std::invalid_argument("batch_loss: empty batch");
    const CircuitIR circuit = build_ansatz(model);
    return ordered_map_reduce<double>(
               batch.size(), 0.0,
               [&](std::size_t i) {
                   return cross_entropy(probs_for_circuit(model, circuit, batch[i].features), batch[i].label);
               },
               [](double a, double b) { return a + b; }) /
           double(batch.size());
}

std::vector<double> gradient(const ClassifierModel& model, const std::vector<Sample>& batch) {
    if (batch.empty()) throw std::invalid_argument("gradient: empty batch");
    const std::size_t n_params = model.theta.size();
    std::vector<double> grad(n_params, 0.0);

    // Per-sample gradients in parallel, reduced in sample order.
    std::vector<std::vector<double>> per_sample(batch.size());
    parallel_for(batch.size(), [&](std::size_t s) {
        const Sample& sample = batch[s];
        std::vector<double> g(n_params, 0.0);
        ClassifierModel shifted = model;
        const std::vector<double> probs = predict_probs(model, sample.features);
        const double p = std::max(probs[static_cast<std::size_t>(sample.label)], 1e-12);
        for (std::size_t k = 0; k < n_params; ++k) {
            const double original = shifted.theta[k];
            shifted.theta[k] = original + std::numbers::pi / 2;
            const double plus = predict_probs(shifted, sample.features)[sample.label];
            shifted.theta[k] = original - std::numbers::pi / 2;
            const double minus = predict_probs(shifted, sample.features)[sample.label];
            shifted.theta[k] = original;
            const double dp = (plus - minus) / 2.0;
            g[k] = -dp / p;
        }
        per_sample[s] = std::move(g);
    });
    for (const std::vector<double>& g : per_sample)
        for (std::size_t k = 0; k < n_params; ++k) grad[k] += g[k];
    for (double& v : grad) v /= double(batch.size());
    return grad;
}

double accuracy(const ClassifierModel& model, const std::vector<Sample>& samples) {
    if (samples.empty()) throw std::invalid_argument("accuracy: empty sample set");
    const CircuitIR circuit = build_ansatz(model);
    const double hits = ordered_map_reduce<double>(
        samples.size(), 0.0,
        [&](std::size_t i) {
            const std::vector<double> probs = probs_for_circuit(model, circuit, samples[i].features);
            const int choice = static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
            return choice == samples[i].label ? 1.0 : 0.0;
        },
        [](double a, double b) { return a + b; });
    return hits / double(samples.size());
}

std::pair<ClassifierModel, std::vector<EpochMetrics>> train(const ClassifierModel& model,
                                                            const LabeledDataset& data,
                                                            const TrainSchedule& schedule) {
    if (data.train.empty()) throw std::invalid_argument("train: empty training split");
    ClassifierModel current = model;
    std::vector<EpochMetrics> metrics;
    const int epochs = schedule.total_epochs();
    const std::size_t n_params = current.theta.size();

    std::vector<double> adam_m(n_params, 0.0), adam_v(n_params, 0.0);
    long step = 0;

    std::vector<std::size_t> order(data.train.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < epochs; ++epoch) {
        auto engine = make_engine(schedule.seed, static_cast<std::uint64_t>(epoch));
        std::shuffle(order.begin(), order.end(), engine);
        const double lr = schedule.lr_for_epoch(epoch);

        for (std::size_t start = 0; start < order.size(); start += schedule.batch_size) {
            const std::size_t stop = std::min(order.size(), start + schedule.batch_size);
            std::vector<Sample> batch;
            batch.reserve(stop - start);
            for (std::size_t i = start; i < stop; ++i) batch.push_back(data.train[order[i]]);
            const std::vector<double> g = gradient(current, batch);
            ++step;
            if (schedule.optimizer == Optimizer::SGD) {
                for (std::size_t k = 0; k < n_params; ++k) current.theta[k] -= lr * g[k];
            } else {
                constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
                const double c1 = 1.0 - std::pow(b1, double(step));
                const double c2 = 1.0 - std::pow(b2, double(step));
                for (std::size_t k = 0; k < n_params; ++k) {
                    adam_m[k] = b1 * adam_m[k] + (1.0 - b1) * g[k];
                    adam_v[k] = b2 * adam_v[k] + (1.0 - b2) * g[k] * g[k];
                    current.theta[k] -= lr * (adam_m[k] / c1) / (std::sqrt(adam_v[k] / c2) + eps);
                }
            }
        }

        EpochMetrics em;
        em.epoch = epoch;
        em.train_loss = batch_loss(current, data.train);
        em.train_accuracy = accuracy(current, data.train);
        em.test_accuracy = data.test.empty() ? 0.0 : accuracy(current, data.test);
        metrics.push_back(em);
    }
    return {std::move(current), std::move(metrics)};
}

std::string model_to_json(const ClassifierModel& model, const TrainSchedule& schedule) {
    nlohmann::json j;
    j["data_qubits"] = model.data_qubits;
    j["ancilla_qubits"] = model.ancilla_qubits;
    j["layers"] = model.layers;
    j["num_classes"] = model.num_classes;
    j["theta"] = model.theta; // row-major [layer][qubit][angle]
    j["theta_order"] = "layer-major, then qubit, then (w1,w2,w3)";
    j["schedule_fingerprint"] = schedule.fingerprint();
    j["seed"] = schedule.seed;
    j["encoding"] = {{"kind", "amplitude"}, {"pixel_order", "row-major"}, {"pixel_scale", "raw [0,1]"}};
    return j.dump(2);
}

ClassifierModel model_from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    ClassifierModel m = ClassifierModel::create(j.at("data_qubits").get<int>(), j.at("num_classes").get<int>(),
                                                j.at("layers").get<int>());
    if (j.at("ancilla_qubits").get<int>() != m.ancilla_qubits)
        throw std::invalid_argument("model_from_json: ancilla count inconsistent with class count");
    const auto theta = j.at("theta").get<std::vector<double>>();
    if (theta.size() != m.theta.size()) throw std::invalid_argument("model_from_json: theta size mismatch");
    m.theta = theta;
    return m;
}

} // namespace qcutlab
