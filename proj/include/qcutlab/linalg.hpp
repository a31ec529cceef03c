#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>

namespace qcutlab {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

// Largest dimension any dense operator is allowed to reach (2^14).
inline constexpr Eigen::Index kMaxDim = 1 << 14;

// A unitary operator on a power-of-two dimensional space. Construction
// checks the dimension only; call is_unitary() to verify U†U = I.
struct UnitaryOp {
    CMatrix matrix;

    UnitaryOp() = default;
    explicit UnitaryOp(CMatrix m);

    Eigen::Index dim() const { return matrix.rows(); }
};

bool is_power_of_two(Eigen::Index n);
bool is_unitary(const CMatrix& m, double tol = 1e-10);
bool is_hermitian(const CMatrix& m, double tol = 1e-10);
bool all_finite(const CMatrix& m);

// Kronecker product a ⊗ b. Rejects results larger than kMaxDim per side.
CMatrix tensor(const CMatrix& a, const CMatrix& b);

// Schatten p-norm for p ∈ {1, 2}: trace norm via singular values, or the
// Hilbert-Schmidt norm. Throws on non-finite entries or other p.
double schatten_norm(const CMatrix& m, int p);

// Largest singular value.
double operator_norm(const CMatrix& m);

// min over global phases φ = e^{iα} of ‖I − φU‖_op. Since U is unitary the
// objective reduces to min_α max_j |1 − e^{iα} λ_j| over the eigenphases;
// solved by a 1024-point grid plus golden-section refinement to 1e-9.
double min_phase_opnorm_distance(const UnitaryOp& u);

// min over global phases of ‖I − φU‖₂. Closed form: √(2N − 2|Tr U|).
double min_phase_hs_distance(const UnitaryOp& u);

// Haar-distributed unitary via QR of a complex Gaussian matrix with the
// R diagonal phase-fixed. Deterministic per seed; use derive_seed() for
// per-task streams when sampling in parallel.
UnitaryOp haar_unitary(Eigen::Index dim, std::uint64_t seed);

// exp(i t H) for Hermitian H via its spectral decomposition. Small t gives
// unitaries close to the identity.
UnitaryOp unitary_from_hermitian(const CMatrix& h, double t);

// Haar-style random Hermitian (GUE-like, entries O(1)).
CMatrix random_hermitian(Eigen::Index dim, std::uint64_t seed);

// SWAP operator on the doubled system: S(|x⟩⊗|y⟩) = |y⟩⊗|x⟩ where each
// factor is a d_qubits register (matrix side D², D = 2^d_qubits).
CMatrix swap_operator(int d_qubits);

} // namespace qcutlab
