#include "qcutlab/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "qcutlab/rng.hpp"

namespace qcutlab {

UnitaryOp::UnitaryOp(CMatrix m) : matrix(std::move(m)) {
    if (matrix.rows() != matrix.cols() || !is_power_of_two(matrix.rows()))
        throw std::invalid_argument("UnitaryOp: matrix must be square with power-of-two dimension");
}

bool is_power_of_two(Eigen::Index n) {
    return n > 0 && (n & (n - 1)) == 0;
}

bool is_unitary(const CMatrix& m, double tol) {
    if (m.rows() != m.cols()) return false;
    CMatrix gram = m.adjoint() * m;
    gram -= CMatrix::Identity(m.rows(), m.cols());
    return gram.cwiseAbs().maxCoeff() <= tol;
}

bool is_hermitian(const CMatrix& m, double tol) {
    if (m.rows() != m.cols()) return false;
    return (m - m.adjoint()).norm() <= tol;
}

bool all_finite(const CMatrix& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) return false;
    return true;
}

CMatrix tensor(const CMatrix& a, const CMatrix& b) {
    if (a.rows() > kMaxDim / b.rows() || a.cols() > kMaxDim / b.cols())
        throw std::invalid_argument("tensor: product exceeds the dimension budget (2^14)");
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

double schatten_norm(const CMatrix& m, int p) {
    if (!all_finite(m)) throw std::invalid_argument("schatten_norm: non-finite entries");
    if (p == 2) return m.norm();
    if (p != 1) throw std::invalid_argument("schatten_norm: only p = 1 or 2 supported");
    Eigen::JacobiSVD<CMatrix> svd(m);
    return svd.singularValues().sum();
}

double operator_norm(const CMatrix& m) {
    if (!all_finite(m)) throw std::invalid_argument("operator_norm: non-finite entries");
    Eigen::JacobiSVD<CMatrix> svd(m);
    return svd.singularValues()(0);
}

namespace {

// max_j |1 − e^{iα} λ_j| for unit-circle eigenvalues λ.
double phase_objective(const Eigen::VectorXcd& eigs, double alpha) {
    const Complex phase = std::polar(1.0, alpha);
    double worst = 0.0;
    for (Eigen::Index j = 0; j < eigs.size(); ++j)
        worst = std::max(worst, std::abs(1.0 - phase * eigs(j)));
    return worst;
}

} // namespace

double min_phase_opnorm_distance(const UnitaryOp& u) {
    if (!is_unitary(u.matrix)) throw std::invalid_argument("min_phase_opnorm_distance: input not unitary");
    Eigen::ComplexEigenSolver<CMatrix> es(u.matrix, /*computeEigenvectors=*/false);
    const Eigen::VectorXcd eigs = es.eigenvalues();

    constexpr int grid = 1024;
    const double two_pi = 2.0 * std::numbers::pi;
    double best_alpha = 0.0;
    double best = phase_objective(eigs, 0.0);
    for (int k = 1; k < grid; ++k) {
        const double alpha = two_pi * k / grid;
        const double v = phase_objective(eigs, alpha);
        if (v < best) {
            best = v;
            best_alpha = alpha;
        }
    }

    // Golden-section refinement on the bracket around the best grid point.
    double lo = best_alpha - two_pi / grid;
    double hi = best_alpha + two_pi / grid;
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = hi - gr * (hi - lo);
    double d = lo + gr * (hi - lo);
    double fc = phase_objective(eigs, c);
    double fd = phase_objective(eigs, d);
    while (hi - lo > 1e-9) {
        if (fc < fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - gr * (hi - lo);
            fc = phase_objective(eigs, c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + gr * (hi - lo);
            fd = phase_objective(eigs, d);
        }
    }
    return std::min({best, fc, fd});
}

double min_phase_hs_distance(const UnitaryOp& u) {
    if (!is_unitary(u.matrix)) throw std::invalid_argument("min_phase_hs_distance: input not unitary");
    const double n = static_cast<double>(u.dim());
    const double t = std::abs(u.matrix.trace());
    return std::sqrt(std::max(0.0, 2.0 * n - 2.0 * t));
}

UnitaryOp haar_unitary(Eigen::Index dim, std::uint64_t seed) {
    if (dim < 2 || !is_power_of_two(dim))
        throw std::invalid_argument("haar_unitary: dim must be a power of two >= 2");
    auto engine = make_engine(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    CMatrix ginibre(dim, dim);
    for (Eigen::Index j = 0; j < dim; ++j)
        for (Eigen::Index i = 0; i < dim; ++i)
            ginibre(i, j) = Complex(gauss(engine), gauss(engine));
    Eigen::HouseholderQR<CMatrix> qr(ginibre);
    CMatrix q = qr.householderQ();
    const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    // Fix the phase ambiguity of QR so Q is Haar rather than QR-biased.
    for (Eigen::Index j = 0; j < dim; ++j) {
        const Complex rjj = r(j, j);
        const double mag = std::abs(rjj);
        q.col(j) *= (mag > 0.0) ? rjj / mag : Complex(1.0, 0.0);
    }
    return UnitaryOp(std::move(q));
}

UnitaryOp unitary_from_hermitian(const CMatrix& h, double t) {
    if (!is_hermitian(h, 1e-9)) throw std::invalid_argument("unitary_from_hermitian: input not Hermitian");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
    CMatrix u = CMatrix::Zero(h.rows(), h.cols());
    for (Eigen::Index k = 0; k < h.rows(); ++k)
        u += std::polar(1.0, t * es.eigenvalues()(k)) * es.eigenvectors().col(k) * es.eigenvectors().col(k).adjoint();
    return UnitaryOp(std::move(u));
}

CMatrix random_hermitian(Eigen::Index dim, std::uint64_t seed) {
    auto engine = make_engine(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    CMatrix a(dim, dim);
    for (Eigen::Index j = 0; j < dim; ++j)
        for (Eigen::Index i = 0; i < dim; ++i) a(i, j) = Complex(gauss(engine), gauss(engine));
    return CMatrix(0.5 * (a + a.adjoint()));
}

CMatrix swap_operator(int d_qubits) {
    if (d_qubits < 1) throw std::invalid_argument("swap_operator: d_qubits must be >= 1");
    const Eigen::Index d = Eigen::Index(1) << d_qubits;
    if (d > kMaxDim / d) throw std::invalid_argument("swap_operator: dimension budget exceeded");
    CMatrix s = CMatrix::Zero(d * d, d * d);
    for (Eigen::Index x = 0; x < d; ++x)
        for (Eigen::Index y = 0; y < d; ++y) s(y * d + x, x * d + y) = 1.0;
    return s;
}

} // namespace qcutlab
