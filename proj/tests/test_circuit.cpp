#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qcutlab/circuit.hpp"
#include "qcutlab/rng.hpp"
#include "test_util.hpp"

using namespace qcutlab;

TEST_CASE("simulate: trivial cases") {
    CircuitIR empty;
    empty.width = 2;
    const StateVector in = StateVector::zero_state(2);
    const StateVector out = simulate(empty, in);
    CHECK((out.amps - in.amps).norm() == doctest::Approx(0.0));

    CircuitIR flip;
    flip.width = 1;
    flip.append(Gate::x(0));
    const StateVector flipped = simulate(flip, StateVector::zero_state(1));
    CHECK(std::abs(flipped.amps(1) - Complex(1.0, 0.0)) < 1e-15);

    StateVector narrow = StateVector::zero_state(1);
    CHECK_THROWS_AS(simulate(empty, narrow), std::invalid_argument);
}

TEST_CASE("simulate matches the dense brute-force oracle on random circuits") {
    for (std::uint64_t s = 0; s < 25; ++s) {
        const CircuitIR c = random_circuit(4, 20, derive_seed(101, s));
        const StateVector in = test::random_state(4, derive_seed(103, s));
        const StateVector out = simulate(c, in);
        const CVector expected = test::dense_circuit_oracle(c) * in.amps;
        CHECK((out.amps - expected).norm() < 1e-10);
        CHECK(out.norm() == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("simulate composition: c1 then c2 equals the concatenation") {
    for (std::uint64_t s = 0; s < 10; ++s) {
        const CircuitIR c1 = random_circuit(3, 8, derive_seed(107, s));
        const CircuitIR c2 = random_circuit(3, 8, derive_seed(109, s));
        CircuitIR both = c1;
        for (const Gate& g : c2.gates) both.append(g);
        const StateVector in = test::random_state(3, derive_seed(113, s));
        const StateVector stepwise = simulate(c2, simulate(c1, in));
        const StateVector joined = simulate(both, in);
        CHECK((stepwise.amps - joined.amps).norm() < 1e-10);
    }
}

TEST_CASE("expectation: trivial and oracle cases") {
    CMatrix z(2, 2);
    z << 1, 0, 0, -1;

    CircuitIR empty;
    empty.width = 1;
    CHECK(expectation(empty, StateVector::zero_state(1), z) == doctest::Approx(1.0));

    CircuitIR had;
    had.width = 1;
    had.append(Gate::h(0));
    CHECK(expectation(had, StateVector::zero_state(1), z) == doctest::Approx(0.0).epsilon(1e-12));

    for (std::uint64_t s = 0; s < 10; ++s) {
        const CircuitIR c = random_circuit(3, 12, derive_seed(127, s));
        CMatrix h = test::random_matrix(8, 8, derive_seed(131, s));
        h = CMatrix(0.5 * (h + h.adjoint()));
        const StateVector in = test::random_state(3, derive_seed(137, s));
        const CVector out = test::dense_circuit_oracle(c) * in.amps;
        const double oracle = (out.dot(h * out)).real();
        CHECK(expectation(c, in, h) == doctest::Approx(oracle).epsilon(1e-10));
    }

    CMatrix not_hermitian(2, 2);
    not_hermitian << 0, 1, 0, 0;
    CHECK_THROWS_AS(expectation(empty, StateVector::zero_state(1), not_hermitian), std::invalid_argument);
}

TEST_CASE("adjoint_apply: XZX = -Z and the duality identity") {
    CMatrix z(2, 2);
    z << 1, 0, 0, -1;

    CircuitIR empty;
    empty.width = 1;
    CHECK((adjoint_apply(empty, z) - z).norm() == doctest::Approx(0.0));

    CircuitIR flip;
    flip.width = 1;
    flip.append(Gate::x(0));
    CHECK((adjoint_apply(flip, z) + z).norm() == doctest::Approx(0.0).epsilon(1e-12));

    // Tr(U†ΠU σ) = Tr(Π U σ U†) on random instances.
    for (std::uint64_t s = 0; s < 10; ++s) {
        const CircuitIR c = random_circuit(3, 10, derive_seed(139, s));
        CMatrix pi = test::random_matrix(8, 8, derive_seed(149, s));
        pi = CMatrix(0.5 * (pi + pi.adjoint()));
        const StateVector in = test::random_state(3, derive_seed(151, s));
        const CMatrix sigma = in.amps * in.amps.adjoint();
        const CMatrix back = adjoint_apply(c, pi);
        const StateVector out = simulate(c, in);
        const double duality_lhs = (back * sigma).trace().real();
        const double duality_rhs = (pi * (out.amps * out.amps.adjoint())).trace().real();
        CHECK(duality_lhs == doctest::Approx(duality_rhs).epsilon(1e-10));
        // Hermiticity and trace are preserved.
        CHECK((back - back.adjoint()).norm() < 1e-10);
        CHECK(back.trace().real() == doctest::Approx(pi.trace().real()).epsilon(1e-9));
    }
}

TEST_CASE("povm_probabilities") {
    const StateVector zero3 = StateVector::zero_state(3);
    const std::vector<double> p = povm_probabilities(zero3, {0});
    CHECK(p.size() == 2);
    CHECK(p[0] == doctest::Approx(1.0));
    CHECK(p[1] == doctest::Approx(0.0));

    CircuitIR had;
    had.width = 1;
    had.append(Gate::h(0));
    const std::vector<double> ph = povm_probabilities(simulate(had, StateVector::zero_state(1)), {0});
    CHECK(ph[0] == doctest::Approx(0.5));
    CHECK(ph[1] == doctest::Approx(0.5));

    // Dense POVM oracle Pi_k = I (x) |k><k| on random states.
    for (std::uint64_t s = 0; s < 10; ++s) {
        const StateVector in = test::random_state(3, derive_seed(157, s));
        const std::vector<int> readout = {1, 2};
        const std::vector<double> probs = povm_probabilities(in, readout);
        double total = 0.0;
        for (std::size_t k = 0; k < probs.size(); ++k) {
            const CMatrix pi = povm_element(3, readout, k);
            CHECK(probs[k] == doctest::Approx((in.amps.dot(pi * in.amps)).real()).epsilon(1e-10));
            total += probs[k];
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
    }

    CHECK_THROWS_AS(povm_probabilities(zero3, {0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(povm_probabilities(zero3, {5}), std::invalid_argument);
}

TEST_CASE("CRZ(0) and ROT(0,0,0) insertions change nothing") {
    for (std::uint64_t s = 0; s < 5; ++s) {
        const CircuitIR c = random_circuit(3, 10, derive_seed(163, s));
        CircuitIR padded;
        padded.width = 3;
        for (std::size_t g = 0; g < c.gates.size(); ++g) {
            padded.append(Gate::rot(static_cast<int>(g % 3), 0.0, 0.0, 0.0));
            padded.append(Gate::crz(static_cast<int>(g % 3), static_cast<int>((g + 1) % 3), 0.0));
            padded.append(c.gates[g]);
        }
        const StateVector in = test::random_state(3, derive_seed(167, s));
        const StateVector a = simulate(c, in);
        const StateVector b = simulate(padded, in);
        CHECK((a.amps - b.amps).norm() < 1e-12);
    }
}

TEST_CASE("gate invariants: ROT(0,0,0) and CRZ(0) are identities") {
    CHECK((Gate::rot(0, 0, 0, 0).matrix() - CMatrix::Identity(2, 2)).norm() < 1e-12);
    CHECK((Gate::crz(0, 1, 0.0).matrix() - CMatrix::Identity(4, 4)).norm() < 1e-12);
    // ROT composes as RZ(w1) RY(w2) RZ(w3).
    const double w1 = 0.3, w2 = -1.1, w3 = 2.2;
    const CMatrix expected = Gate::rz(0, w1).matrix() * Gate::ry(0, w2).matrix() * Gate::rz(0, w3).matrix();
    CHECK((Gate::rot(0, w1, w2, w3).matrix() - expected).norm() < 1e-14);

    // Fixed-gate sign conventions.
    const Complex i{0.0, 1.0};
    CHECK(std::abs(Gate::s(0).matrix()(1, 1) - i) < 1e-15);
    CHECK(std::abs(Gate::y(0).matrix()(1, 0) - i) < 1e-15);
    CHECK(std::abs(Gate::z(0).matrix()(1, 1) - Complex(-1.0, 0.0)) < 1e-15);

    CircuitIR sy;
    sy.width = 1;
    sy.append(Gate::y(0));
    sy.append(Gate::s(0));
    // S Y |0> = S (i|1>) = i * i |1> = -|1>
    const StateVector out = simulate(sy, StateVector::zero_state(1));
    CHECK(std::abs(out.amps(1) - Complex(-1.0, 0.0)) < 1e-15);

    CHECK_THROWS_AS(StateVector::from_amplitudes(CVector::Zero(4)), std::invalid_argument);
}

TEST_CASE("circuit_unitary agrees with the oracle and with simulate") {
    for (std::uint64_t s = 0; s < 8; ++s) {
        const CircuitIR c = random_circuit(3, 12, derive_seed(173, s));
        const CMatrix u = circuit_unitary(c);
        CHECK((u - test::dense_circuit_oracle(c)).norm() < 1e-10);
        CHECK(is_unitary(u, 1e-10));
    }
}

TEST_CASE("custom gates on scrambled wire order match the embedding oracle") {
    for (std::uint64_t s = 0; s < 6; ++s) {
        const UnitaryOp u = haar_unitary(4, derive_seed(179, s));
        CircuitIR c;
        c.width = 3;
        c.append(Gate::custom({2, 0}, u.matrix)); // reversed, non-adjacent
        const StateVector in = test::random_state(3, derive_seed(181, s));
        const StateVector out = simulate(c, in);
        const CVector expected = test::embed_gate(3, {2, 0}, u.matrix) * in.amps;
        CHECK((out.amps - expected).norm() < 1e-12);
    }
    CHECK_THROWS_AS(Gate::custom({0, 1}, CMatrix::Identity(2, 2)), std::invalid_argument);
    CHECK_THROWS_AS(Gate::custom({0}, CMatrix(2.0 * CMatrix::Identity(2, 2))), std::invalid_argument);
}

TEST_CASE("circuit text round trip") {
    CircuitIR c = random_circuit(3, 15, 191);
    c.layer_boundaries = {0, 7, 15};
    c.append(Gate::custom({1, 2}, haar_unitary(4, 193).matrix));
    const std::string text = circuit_to_text(c);
    const CircuitIR back = circuit_from_text(text);
    REQUIRE(back.gates.size() == c.gates.size());
    CHECK(back.width == c.width);
    CHECK(back.layer_boundaries == c.layer_boundaries);
    const StateVector in = test::random_state(3, 197);
    CHECK((simulate(c, in).amps - simulate(back, in).amps).norm() < 1e-12);

    CHECK_THROWS_AS(circuit_from_text("RZ 0 1.0\n"), std::invalid_argument); // missing header
    CHECK_THROWS_AS(circuit_from_text("qubits 2\nFOO 0\n"), std::invalid_argument);
    CHECK_THROWS_AS(circuit_from_text("qubits 2\nRZ 5 1.0\n"), std::invalid_argument);
}

TEST_CASE("validate rejects bad wires and non-monotone boundaries") {
    CircuitIR c;
    c.width = 2;
    c.append(Gate::cnot(0, 0));
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c.gates.clear();
    c.append(Gate::h(0));
    c.layer_boundaries = {1, 0};
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}
