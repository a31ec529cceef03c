#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "qcutlab/linalg.hpp"

namespace qcutlab {

// Qubit 0 is the topmost wire and the most significant bit of a basis
// index, so |q0 q1 ... q_{d-1}⟩ reads left to right off the index bits.

enum class GateKind { RZ, RY, ROT, CNOT, CRZ, H, S, X, Y, Z, CUSTOM };

struct Gate {
    GateKind kind;
    std::vector<int> wires;     // control first for two-qubit gates
    std::vector<double> params; // angles in radians
    CMatrix custom_matrix;      // only for CUSTOM

    static Gate rz(int q, double theta) { return {GateKind::RZ, {q}, {theta}, {}}; }
    static Gate ry(int q, double theta) { return {GateKind::RY, {q}, {theta}, {}}; }
    static Gate rot(int q, double w1, double w2, double w3) { return {GateKind::ROT, {q}, {w1, w2, w3}, {}}; }
    static Gate cnot(int control, int target) { return {GateKind::CNOT, {control, target}, {}, {}}; }
    static Gate crz(int control, int target, double phi) { return {GateKind::CRZ, {control, target}, {phi}, {}}; }
    static Gate h(int q) { return {GateKind::H, {q}, {}, {}}; }
    static Gate s(int q) { return {GateKind::S, {q}, {}, {}}; }
    static Gate x(int q) { return {GateKind::X, {q}, {}, {}}; }
    static Gate y(int q) { return {GateKind::Y, {q}, {}, {}}; }
    static Gate z(int q) { return {GateKind::Z, {q}, {}, {}}; }
    static Gate custom(std::vector<int> wires, CMatrix u);

    // Dense matrix of the gate on its own wires (dim 2^#wires).
    CMatrix matrix() const;
};

struct CircuitIR {
    int width = 0;
    std::vector<Gate> gates;
    // Gate indices where layers start, plus one final end marker. Used as
    // the legal insertion points for adversarial blocks.
    std::vector<std::size_t> layer_boundaries;

    void append(Gate g);
    void validate() const;
};

struct StateVector {
    int num_qubits = 0;
    CVector amps;

    static StateVector zero_state(int num_qubits);
    static StateVector from_amplitudes(CVector amps);

    double norm() const { return amps.norm(); }
};

// Runs the circuit on a copy of the input via in-place strided kernels.
StateVector simulate(const CircuitIR& c, const StateVector& input);

// ⟨ψ_out| obs |ψ_out⟩ for Hermitian obs on the full register.
double expectation(const CircuitIR& c, const StateVector& input, const CMatrix& obs);

// Heisenberg picture: obs ↦ U† obs U with U the circuit unitary. Dense;
// intended for small registers (Choi/adjoint checks).
CMatrix adjoint_apply(const CircuitIR& c, const CMatrix& obs);

// Probabilities of computational outcomes on the listed qubits, ordered so
// readout_qubits[0] is the most significant outcome bit.
std::vector<double> povm_probabilities(const StateVector& state, const std::vector<int>& readout_qubits);

// Dense circuit unitary (slow path; small registers only).
CMatrix circuit_unitary(const CircuitIR& c);

// Dense POVM element I ⊗ |k⟩⟨k| on the readout qubits, full-register dims.
CMatrix povm_element(int width, const std::vector<int>& readout_qubits, std::size_t outcome);

// Line-oriented text format: "qubits N" header then one "GATE wires params"
// per line; '#' starts a comment.
std::string circuit_to_text(const CircuitIR& c);
CircuitIR circuit_from_text(const std::string& text);

// Random circuit over {ROT, H, RZ, CNOT, CRZ}; deterministic per seed.
CircuitIR random_circuit(int width, int n_gates, std::uint64_t seed);

} // namespace qcutlab
