#include "qcutlab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qcutlab/parallel.hpp"
#include "qcutlab/rng.hpp"

namespace qcutlab {

BoundReport confidence_shift_bound(const std::vector<UnitaryOp>& perturbations) {
    BoundReport report;
    for (const UnitaryOp& u : perturbations) {
        if (!is_unitary(u.matrix)) throw std::invalid_argument("confidence_shift_bound: perturbation not unitary");
        report.opnorm_terms.push_back(min_phase_opnorm_distance(u));
        report.hs_terms.push_back(min_phase_hs_distance(u));
        report.opnorm_shift_bound += report.opnorm_terms.back();
        report.hs_shift_bound += report.hs_terms.back();
    }
    return report;
}

BoundReport verify_confidence_shift(const CircuitIR& clean, const CircuitIR& attacked,
                            const std::vector<UnitaryOp>& perturbations,
                            const std::vector<int>& readout_qubits, const std::vector<StateVector>& inputs) {
    BoundReport report = confidence_shift_bound(perturbations);
    for (const StateVector& input : inputs) {
        const StateVector out_clean = simulate(clean, input);
        const StateVector out_attacked = simulate(attacked, input);
        const std::vector<double> y = povm_probabilities(out_clean, readout_qubits);
        const std::vector<double> yhat = povm_probabilities(out_attacked, readout_qubits);
        for (std::size_t k = 0; k < y.size(); ++k)
            report.observed_max_shift = std::max(report.observed_max_shift, std::abs(y[k] - yhat[k]));
    }
    report.pass = report.observed_max_shift <= report.opnorm_shift_bound + 1e-9;
    return report;
}

std::pair<double, double> diamond_interval_unitary(const UnitaryOp& u, const UnitaryOp& v) {
    if (u.dim() != v.dim()) throw std::invalid_argument("diamond_interval_unitary: dimension mismatch");
    // min_phi ||phi u - v||_op = min_phi ||I - phi v† u||_op by unitary invariance.
    const double m = min_phase_opnorm_distance(UnitaryOp(CMatrix(v.matrix.adjoint() * u.matrix)));
    return {m, 2.0 * m};
}

double haar_shift_probability(const CMatrix& pi_k, const std::vector<UnitaryOp>& perturbations, double delta, int d) {
    if (delta <= 0.0) throw std::invalid_argument("haar_shift_probability: delta must be positive");
    const double D = double(Eigen::Index(1) << d);
    double dist_sum = 0.0;
    for (const UnitaryOp& u : perturbations) {
        if (!is_unitary(u.matrix)) throw std::invalid_argument("haar_shift_probability: perturbation not unitary");
        dist_sum += (CMatrix::Identity(u.dim(), u.dim()) - u.matrix).norm();
    }
    const double pi_norm = pi_k.norm();
    const double bound = 1.0 - 4.0 * pi_norm * pi_norm * dist_sum * dist_sum / (D * (D + 1.0) * delta * delta);
    return std::clamp(bound, 0.0, 1.0);
}

double haar_shift_variance_analytic(const CircuitIR& clean, const CircuitIR& attacked, const CMatrix& pi_k) {
    if (clean.width != attacked.width)
        throw std::invalid_argument("haar_shift_variance_analytic: circuit widths differ");
    if (clean.width > 4) throw std::invalid_argument("haar_shift_variance_analytic: register too large (d <= 4)");
    const Eigen::Index dim = Eigen::Index(1) << clean.width;
    if (pi_k.rows() != dim)
        throw std::invalid_argument("haar_shift_variance_analytic: POVM dimension mismatch (ancilla present?)");
    const CMatrix back_clean = adjoint_apply(clean, pi_k);
    const CMatrix back_attacked = adjoint_apply(attacked, pi_k);
    const double d_hs = (back_clean - back_attacked).norm();
    const double D = double(dim);
    return d_hs * d_hs / (D * (D + 1.0));
}

HaarShiftStats haar_shift_monte_carlo(const CircuitIR& clean, const CircuitIR& attacked, const CMatrix& pi_k,
                                      const std::vector<UnitaryOp>& perturbations, double delta,
                                      std::size_t n_samples, std::uint64_t seed) {
    if (n_samples < 1) throw std::invalid_argument("haar_shift_monte_carlo: need at least one sample");
    if (clean.width > 4) throw std::invalid_argument("haar_shift_monte_carlo: register too large (d <= 4)");
    const Eigen::Index dim = Eigen::Index(1) << clean.width;
    if (pi_k.rows() != dim) throw std::invalid_argument("haar_shift_monte_carlo: POVM dimension mismatch");

    // shift = <0| W† Δ W |0> with Δ = E†(Pi) - Ẽ†(Pi); only the first
    // column of W matters.
    const CMatrix delta_op = adjoint_apply(clean, pi_k) - adjoint_apply(attacked, pi_k);

    struct Chunk {
        double sum = 0.0, sumsq = 0.0;
        std::size_t tail = 0;
    };
    const std::size_t chunk_size = 1024;
    const std::size_t n_chunks = (n_samples + chunk_size - 1) / chunk_size;
    std::vector<Chunk> chunks(n_chunks);
    parallel_for(n_chunks, [&](std::size_t c) {
        Chunk acc;
        const std::size_t begin = c * chunk_size;
        const std::size_t end = std::min(n_samples, begin + chunk_size);
        for (std::size_t i = begin; i < end; ++i) {
            const UnitaryOp w = haar_unitary(dim, derive_seed(seed, i));
            const CVector v = w.matrix.col(0);
            const double shift = (v.dot(delta_op * v)).real();
            acc.sum += shift;
            acc.sumsq += shift * shift;
            if (std::abs(shift) >= delta) ++acc.tail;
        }
        chunks[c] = acc;
    });

    double sum = 0.0, sumsq = 0.0;
    std::size_t tail = 0;
    for (const Chunk& c : chunks) {
        sum += c.sum;
        sumsq += c.sumsq;
        tail += c.tail;
    }

    HaarShiftStats stats;
    stats.n_samples = n_samples;
    stats.dimension = static_cast<std::size_t>(dim);
    stats.delta = delta;
    stats.empirical_mean = sum / double(n_samples);
    stats.empirical_variance = std::max(0.0, sumsq / double(n_samples) - stats.empirical_mean * stats.empirical_mean);
    stats.analytic_variance = haar_shift_variance_analytic(clean, attacked, pi_k);
    stats.empirical_tail = double(tail) / double(n_samples);
    stats.chebyshev_tail_bound = 1.0 - haar_shift_probability(pi_k, perturbations, delta, clean.width);
    return stats;
}

CMatrix twirl_analytic(int d) {
    const Eigen::Index dim = Eigen::Index(1) << d;
    const double D = double(dim);
    return (CMatrix::Identity(dim * dim, dim * dim) + swap_operator(d)) / (D * (D + 1.0));
}

double twirl_check(int d, std::size_t n_samples, std::uint64_t seed) {
    if (d > 3) throw std::invalid_argument("twirl_check: register too large (d <= 3)");
    if (n_samples < 1) throw std::invalid_argument("twirl_check: need at least one sample");
    const Eigen::Index dim = Eigen::Index(1) << d;

    const std::size_t chunk_size = 1024;
    const std::size_t n_chunks = (n_samples + chunk_size - 1) / chunk_size;
    std::vector<CMatrix> partials(n_chunks);
    parallel_for(n_chunks, [&](std::size_t c) {
        CMatrix acc = CMatrix::Zero(dim * dim, dim * dim);
        const std::size_t begin = c * chunk_size;
        const std::size_t end = std::min(n_samples, begin + chunk_size);
        for (std::size_t i = begin; i < end; ++i) {
            const UnitaryOp w = haar_unitary(dim, derive_seed(seed, i));
            const CVector v = w.matrix.col(0);
            const CMatrix sigma = v * v.adjoint();
            acc += tensor(sigma, sigma);
        }
        partials[c] = acc;
    });
    CMatrix mean = CMatrix::Zero(dim * dim, dim * dim);
    for (const CMatrix& p : partials) mean += p;
    mean /= double(n_samples);
    return (mean - twirl_analytic(d)).cwiseAbs().maxCoeff();
}

} // namespace qcutlab
