#include "qcutlab/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "qcutlab/rng.hpp"

namespace qcutlab {

namespace {

constexpr Complex kI{0.0, 1.0};

CMatrix mat_rz(double theta) {
    CMatrix m(2, 2);
    m << std::polar(1.0, -theta / 2), 0.0, 0.0, std::polar(1.0, theta / 2);
    return m;
}

CMatrix mat_ry(double theta) {
    const double c = std::cos(theta / 2), s = std::sin(theta / 2);
    CMatrix m(2, 2);
    m << c, -s, s, c;
    return m;
}

CMatrix mat_h() {
    const double r = 1.0 / std::sqrt(2.0);
    CMatrix m(2, 2);
    m << r, r, r, -r;
    return m;
}

CMatrix mat_s() {
    CMatrix m(2, 2);
    m << 1.0, 0.0, 0.0, kI;
    return m;
}

CMatrix mat_pauli(char which) {
    CMatrix m(2, 2);
    switch (which) {
        case 'X': m << 0, 1, 1, 0; break;
        case 'Y': m << 0, -kI, kI, 0; break;
        default: m << 1, 0, 0, -1; break;
    }
    return m;
}

} // namespace

Gate Gate::custom(std::vector<int> wires, CMatrix u) {
    const Eigen::Index dim = Eigen::Index(1) << wires.size();
    if (u.rows() != dim || u.cols() != dim)
        throw std::invalid_argument("Gate::custom: matrix dimension does not match wire count");
    if (!is_unitary(u)) throw std::invalid_argument("Gate::custom: matrix is not unitary");
    return {GateKind::CUSTOM, std::move(wires), {}, std::move(u)};
}

CMatrix Gate::matrix() const {
    switch (kind) {
        case GateKind::RZ: return mat_rz(params[0]);
        case GateKind::RY: return mat_ry(params[0]);
        case GateKind::ROT: return mat_rz(params[0]) * mat_ry(params[1]) * mat_rz(params[2]);
        case GateKind::H: return mat_h();
        case GateKind::S: return mat_s();
        case GateKind::X: return mat_pauli('X');
        case GateKind::Y: return mat_pauli('Y');
        case GateKind::Z: return mat_pauli('Z');
        case GateKind::CNOT: {
            CMatrix m = CMatrix::Zero(4, 4);
            m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = 1.0;
            return m;
        }
        case GateKind::CRZ: {
            CMatrix m = CMatrix::Zero(4, 4);
            m(0, 0) = m(1, 1) = 1.0;
            m(2, 2) = std::polar(1.0, -params[0] / 2);
            m(3, 3) = std::polar(1.0, params[0] / 2);
            return m;
        }
        case GateKind::CUSTOM: return custom_matrix;
    }
    throw std::logic_error("Gate::matrix: unknown kind");
}

void CircuitIR::append(Gate g) {
    gates.push_back(std::move(g));
}

void CircuitIR::validate() const {
    for (const Gate& g : gates) {
        std::set<int> seen;
        for (int w : g.wires) {
            if (w < 0 || w >= width) throw std::invalid_argument("CircuitIR: gate wire out of range");
            if (!seen.insert(w).second) throw std::invalid_argument("CircuitIR: duplicate wire on gate");
        }
    }
    for (std::size_t i = 1; i < layer_boundaries.size(); ++i)
        if (layer_boundaries[i] < layer_boundaries[i - 1])
            throw std::invalid_argument("CircuitIR: layer boundaries must be monotone");
    if (!layer_boundaries.empty() && layer_boundaries.back() > gates.size())
        throw std::invalid_argument("CircuitIR: layer boundary past end of gate list");
}

StateVector StateVector::zero_state(int num_qubits) {
    StateVector s;
    s.num_qubits = num_qubits;
    s.amps = CVector::Zero(Eigen::Index(1) << num_qubits);
    s.amps(0) = 1.0;
    return s;
}

StateVector StateVector::from_amplitudes(CVector amps) {
    if (!is_power_of_two(amps.size()))
        throw std::invalid_argument("StateVector: amplitude count must be a power of two");
    if (std::abs(amps.norm() - 1.0) > 1e-10)
        throw std::invalid_argument("StateVector: amplitudes must be normalized");
    StateVector s;
    s.num_qubits = 0;
    while ((Eigen::Index(1) << s.num_qubits) < amps.size()) ++s.num_qubits;
    s.amps = std::move(amps);
    return s;
}

namespace {

void apply_single(CVector& amps, int width, int q, const CMatrix& u) {
    const std::size_t n = static_cast<std::size_t>(amps.size());
    const std::size_t bit = std::size_t(1) << (width - 1 - q);
    const Complex u00 = u(0, 0), u01 = u(0, 1), u10 = u(1, 0), u11 = u(1, 1);
    for (std::size_t i = 0; i < n; ++i) {
        if (i & bit) continue;
        const Complex a = amps(i), b = amps(i | bit);
        amps(i) = u00 * a + u01 * b;
        amps(i | bit) = u10 * a + u11 * b;
    }
}

void apply_cnot(CVector& amps, int width, int control, int target) {
    const std::size_t n = static_cast<std::size_t>(amps.size());
    const std::size_t cb = std::size_t(1) << (width - 1 - control);
    const std::size_t tb = std::size_t(1) << (width - 1 - target);
    for (std::size_t i = 0; i < n; ++i)
        if ((i & cb) && !(i & tb)) std::swap(amps(i), amps(i | tb));
}

void apply_crz(CVector& amps, int width, int control, int target, double phi) {
    const std::size_t n = static_cast<std::size_t>(amps.size());
    const std::size_t cb = std::size_t(1) << (width - 1 - control);
    const std::size_t tb = std::size_t(1) << (width - 1 - target);
    const Complex p0 = std::polar(1.0, -phi / 2), p1 = std::polar(1.0, phi / 2);
    for (std::size_t i = 0; i < n; ++i)
        if (i & cb) amps(i) *= (i & tb) ? p1 : p0;
}

void apply_dense(CVector& amps, int width, const std::vector<int>& wires, const CMatrix& u) {
    const std::size_t k = wires.size();
    const std::size_t sub = std::size_t(1) << k;
    std::vector<std::size_t> bits(k);
    for (std::size_t j = 0; j < k; ++j) bits[j] = std::size_t(1) << (width - 1 - wires[j]);
    std::size_t mask = 0;
    for (std::size_t b : bits) mask |= b;
    const std::size_t n = static_cast<std::size_t>(amps.size());
    std::vector<Complex> local(sub);
    for (std::size_t base = 0; base < n; ++base) {
        if (base & mask) continue;
        for (std::size_t l = 0; l < sub; ++l) {
            std::size_t idx = base;
            for (std::size_t j = 0; j < k; ++j)
                if (l & (sub >> 1 >> j)) idx |= bits[j];
            local[l] = amps(idx);
        }
        for (std::size_t l = 0; l < sub; ++l) {
            Complex acc = 0.0;
            for (std::size_t m = 0; m < sub; ++m) acc += u(l, m) * local[m];
            std::size_t idx = base;
            for (std::size_t j = 0; j < k; ++j)
                if (l & (sub >> 1 >> j)) idx |= bits[j];
            amps(idx) = acc;
        }
    }
}

void apply_gate(CVector& amps, int width, const Gate& g) {
    switch (g.kind) {
        case GateKind::RZ:
        case GateKind::RY:
        case GateKind::ROT:
        case GateKind::H:
        case GateKind::S:
        case GateKind::X:
        case GateKind::Y:
        case GateKind::Z:
            apply_single(amps, width, g.wires[0], g.matrix());
            return;
        case GateKind::CNOT:
            apply_cnot(amps, width, g.wires[0], g.wires[1]);
            return;
        case GateKind::CRZ:
            apply_crz(amps, width, g.wires[0], g.wires[1], g.params[0]);
            return;
        case GateKind::CUSTOM:
            apply_dense(amps, width, g.wires, g.custom_matrix);
            return;
    }
}

} // namespace

StateVector simulate(const CircuitIR& c, const StateVector& input) {
    if (input.num_qubits != c.width) throw std::invalid_argument("simulate: state width does not match circuit");
    c.validate();
    StateVector out = input;
    for (const Gate& g : c.gates) apply_gate(out.amps, c.width, g);
    return out;
}

double expectation(const CircuitIR& c, const StateVector& input, const CMatrix& obs) {
    if (obs.rows() != input.amps.size())
        throw std::invalid_argument("expectation: observable dimension mismatch");
    if (!is_hermitian(obs)) throw std::invalid_argument("expectation: observable not Hermitian");
    const StateVector out = simulate(c, input);
    const Complex v = out.amps.dot(obs * out.amps);
    return v.real();
}

CMatrix adjoint_apply(const CircuitIR& c, const CMatrix& obs) {
    const Eigen::Index dim = Eigen::Index(1) << c.width;
    if (obs.rows() != dim || obs.cols() != dim)
        throw std::invalid_argument("adjoint_apply: observable dimension mismatch");
    if (!is_hermitian(obs)) throw std::invalid_argument("adjoint_apply: observable not Hermitian");
    const CMatrix u = circuit_unitary(c);
    return u.adjoint() * obs * u;
}

std::vector<double> povm_probabilities(const StateVector& state, const std::vector<int>& readout_qubits) {
    const std::size_t r = readout_qubits.size();
    std::set<int> seen;
    for (int q : readout_qubits) {
        if (q < 0 || q >= state.num_qubits) throw std::invalid_argument("povm_probabilities: qubit out of range");
        if (!seen.insert(q).second) throw std::invalid_argument("povm_probabilities: duplicate readout qubit");
    }
    std::vector<double> probs(std::size_t(1) << r, 0.0);
    const std::size_t n = static_cast<std::size_t>(state.amps.size());
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t outcome = 0;
        for (std::size_t j = 0; j < r; ++j) {
            const std::size_t bit = std::size_t(1) << (state.num_qubits - 1 - readout_qubits[j]);
            outcome = (outcome << 1) | ((i & bit) ? 1 : 0);
        }
        probs[outcome] += std::norm(state.amps(i));
    }
    return probs;
}

CMatrix circuit_unitary(const CircuitIR& c) {
    c.validate();
    const Eigen::Index dim = Eigen::Index(1) << c.width;
    if (dim > kMaxDim) throw std::invalid_argument("circuit_unitary: register too large for dense form");
    CMatrix u = CMatrix::Identity(dim, dim);
    // Column k = circuit applied to basis state k, via the same kernels.
    for (const Gate& g : c.gates) {
        for (Eigen::Index k = 0; k < dim; ++k) {
            CVector col = u.col(k);
            apply_gate(col, c.width, g);
            u.col(k) = col;
        }
    }
    return u;
}

CMatrix povm_element(int width, const std::vector<int>& readout_qubits, std::size_t outcome) {
    const Eigen::Index dim = Eigen::Index(1) << width;
    CMatrix pi = CMatrix::Zero(dim, dim);
    const std::size_t r = readout_qubits.size();
    for (Eigen::Index i = 0; i < dim; ++i) {
        std::size_t bits = 0;
        for (std::size_t j = 0; j < r; ++j) {
            const std::size_t bit = std::size_t(1) << (width - 1 - readout_qubits[j]);
            bits = (bits << 1) | ((static_cast<std::size_t>(i) & bit) ? 1 : 0);
        }
        if (bits == outcome) pi(i, i) = 1.0;
    }
    return pi;
}

namespace {

const char* kind_name(GateKind k) {
    switch (k) {
        case GateKind::RZ: return "RZ";
        case GateKind::RY: return "RY";
        case GateKind::ROT: return "ROT";
        case GateKind::CNOT: return "CNOT";
        case GateKind::CRZ: return "CRZ";
        case GateKind::H: return "H";
        case GateKind::S: return "S";
        case GateKind::X: return "X";
        case GateKind::Y: return "Y";
        case GateKind::Z: return "Z";
        case GateKind::CUSTOM: return "CUSTOM";
    }
    return "?";
}

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

std::string circuit_to_text(const CircuitIR& c) {
    std::ostringstream out;
    out << "qubits " << c.width << "\n";
    if (!c.layer_boundaries.empty()) {
        out << "layers";
        for (std::size_t b : c.layer_boundaries) out << ' ' << b;
        out << "\n";
    }
    for (const Gate& g : c.gates) {
        out << kind_name(g.kind);
        if (g.kind == GateKind::CUSTOM) out << ' ' << g.wires.size();
        for (int w : g.wires) out << ' ' << w;
        for (double p : g.params) out << ' ' << fmt_double(p);
        if (g.kind == GateKind::CUSTOM)
            for (Eigen::Index i = 0; i < g.custom_matrix.rows(); ++i)
                for (Eigen::Index j = 0; j < g.custom_matrix.cols(); ++j)
                    out << ' ' << fmt_double(g.custom_matrix(i, j).real()) << ' ' << fmt_double(g.custom_matrix(i, j).imag());
        out << "\n";
    }
    return out.str();
}

CircuitIR circuit_from_text(const std::string& text) {
    std::istringstream in(text);
    CircuitIR c;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string tok;
        if (!(ls >> tok)) continue;
        if (tok == "qubits") {
            if (!(ls >> c.width) || c.width <= 0) throw std::invalid_argument("circuit text: bad qubit count");
            have_header = true;
            continue;
        }
        if (!have_header) throw std::invalid_argument("circuit text: missing 'qubits N' header");
        if (tok == "layers") {
            std::size_t b;
            while (ls >> b) c.layer_boundaries.push_back(b);
            continue;
        }
        Gate g;
        auto read_wires = [&](int n) {
            for (int i = 0; i < n; ++i) {
                int w;
                if (!(ls >> w)) throw std::invalid_argument("circuit text: missing wire for " + tok);
                g.wires.push_back(w);
            }
        };
        auto read_params = [&](int n) {
            for (int i = 0; i < n; ++i) {
                double p;
                if (!(ls >> p)) throw std::invalid_argument("circuit text: missing parameter for " + tok);
                g.params.push_back(p);
            }
        };
        if (tok == "RZ" || tok == "RY") {
            g.kind = tok == "RZ" ? GateKind::RZ : GateKind::RY;
            read_wires(1);
            read_params(1);
        } else if (tok == "ROT") {
            g.kind = GateKind::ROT;
            read_wires(1);
            read_params(3);
        } else if (tok == "CNOT") {
            g.kind = GateKind::CNOT;
            read_wires(2);
        } else if (tok == "CRZ") {
            g.kind = GateKind::CRZ;
            read_wires(2);
            read_params(1);
        } else if (tok == "H" || tok == "S" || tok == "X" || tok == "Y" || tok == "Z") {
            g.kind = tok == "H"   ? GateKind::H
                     : tok == "S" ? GateKind::S
                     : tok == "X" ? GateKind::X
                     : tok == "Y" ? GateKind::Y
                                  : GateKind::Z;
            read_wires(1);
        } else if (tok == "CUSTOM") {
            // CUSTOM k w1..wk then 2*4^k matrix entries (re im, row-major).
            int k;
            if (!(ls >> k) || k <= 0) throw std::invalid_argument("circuit text: bad CUSTOM arity");
            g.kind = GateKind::CUSTOM;
            read_wires(k);
            const Eigen::Index dim = Eigen::Index(1) << k;
            g.custom_matrix.resize(dim, dim);
            for (Eigen::Index i = 0; i < dim; ++i)
                for (Eigen::Index j = 0; j < dim; ++j) {
                    double re, im;
                    if (!(ls >> re >> im)) throw std::invalid_argument("circuit text: truncated CUSTOM matrix");
                    g.custom_matrix(i, j) = Complex(re, im);
                }
            if (!is_unitary(g.custom_matrix, 1e-8))
                throw std::invalid_argument("circuit text: CUSTOM matrix is not unitary");
        } else {
            throw std::invalid_argument("circuit text: unknown gate '" + tok + "'");
        }
        c.gates.push_back(std::move(g));
    }
    if (!have_header) throw std::invalid_argument("circuit text: empty input");
    c.validate();
    return c;
}

CircuitIR random_circuit(int width, int n_gates, std::uint64_t seed) {
    if (width < 1) throw std::invalid_argument("random_circuit: width must be >= 1");
    auto engine = make_engine(seed);
    std::uniform_int_distribution<int> pick_kind(0, width >= 2 ? 4 : 2);
    std::uniform_int_distribution<int> pick_wire(0, width - 1);
    std::uniform_real_distribution<double> angle(-3.0, 3.0);
    CircuitIR c;
    c.width = width;
    for (int i = 0; i < n_gates; ++i) {
        switch (pick_kind(engine)) {
            case 0: c.append(Gate::rot(pick_wire(engine), angle(engine), angle(engine), angle(engine))); break;
            case 1: c.append(Gate::h(pick_wire(engine))); break;
            case 2: c.append(Gate::rz(pick_wire(engine), angle(engine))); break;
            case 3: {
                int a = pick_wire(engine), b = pick_wire(engine);
                if (a == b) b = (b + 1) % width;
                c.append(Gate::cnot(a, b));
                break;
            }
            default: {
                int a = pick_wire(engine), b = pick_wire(engine);
                if (a == b) b = (b + 1) % width;
                c.append(Gate::crz(a, b, angle(engine)));
                break;
            }
        }
    }
    return c;
}

} // namespace qcutlab
