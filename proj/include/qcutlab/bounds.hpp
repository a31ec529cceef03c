#pragma once

#include <cstdint>
#include <vector>

#include "qcutlab/circuit.hpp"
#include "qcutlab/linalg.hpp"

namespace qcutlab {

struct BoundReport {
    std::vector<double> opnorm_terms; // min-phase operator-norm distance per perturbation
    std::vector<double> hs_terms;     // min-phase Hilbert-Schmidt distance per perturbation
    double opnorm_shift_bound = 0.0; // sum of opnorm_terms
    double hs_shift_bound = 0.0;     // sum of hs_terms
    double observed_max_shift = 0.0;  // max over inputs and k of |y_k - yhat_k|
    bool pass = true;
};

struct HaarShiftStats {
    std::size_t n_samples = 0;
    double empirical_mean = 0.0;
    double empirical_variance = 0.0;
    double analytic_variance = 0.0;
    double empirical_tail = 0.0; // Pr{|shift| >= delta}
    double delta = 0.0;
    double chebyshev_tail_bound = 0.0; // upper bound on the tail probability
    std::size_t dimension = 0;         // D = 2^d
};

// Sums of phase-minimized operator-norm and Hilbert-Schmidt distances to
// the identity, one term per perturbation.
BoundReport confidence_shift_bound(const std::vector<UnitaryOp>& perturbations);

// Evaluates both circuits on every input, takes the worst confidence shift
// over the POVM outcomes on the readout qubits, and compares it against the
// operator-norm bound with 1e-9 slack.
BoundReport verify_confidence_shift(const CircuitIR& clean, const CircuitIR& attacked,
                                    const std::vector<UnitaryOp>& perturbations,
                                    const std::vector<int>& readout_qubits,
                                    const std::vector<StateVector>& inputs);

// Interval [m, 2m] containing the diamond distance between the unitary
// channels of u and v, where m = min over phases of ||phi u - v||_op.
std::pair<double, double> diamond_interval_unitary(const UnitaryOp& u, const UnitaryOp& v);

// Probability lower bound 1 - 4 ||Pi_k||_2^2 (sum ||I - U_i||_2)^2 /
// (D (D+1) delta^2), clamped to [0, 1]. Distances are not phase-minimized.
double haar_shift_probability(const CMatrix& pi_k, const std::vector<UnitaryOp>& perturbations, double delta, int d);

// Exact value of Var(y_k - yhat_k) over Haar inputs:
// (1/(D(D+1))) * || E†(Pi_k) - Ẽ†(Pi_k) ||_2^2, computed densely.
double haar_shift_variance_analytic(const CircuitIR& clean, const CircuitIR& attacked, const CMatrix& pi_k);

// Samples sigma = W|0><0|W† with Haar W, accumulates y_k - yhat_k, and
// reports the moments, the tail frequency at delta, and the Chebyshev
// bound derived from the perturbation distances.
HaarShiftStats haar_shift_monte_carlo(const CircuitIR& clean, const CircuitIR& attacked, const CMatrix& pi_k,
                                      const std::vector<UnitaryOp>& perturbations, double delta,
                                      std::size_t n_samples, std::uint64_t seed);

// Monte Carlo check of E[sigma ⊗ sigma] = (I + S)/(D(D+1)); returns the
// max-abs entry deviation from the analytic matrix.
double twirl_check(int d, std::size_t n_samples, std::uint64_t seed);

// Analytic second moment (I + S)/(D(D+1)) for reference.
CMatrix twirl_analytic(int d);

} // namespace qcutlab
