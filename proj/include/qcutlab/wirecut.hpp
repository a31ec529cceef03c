#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qcutlab/circuit.hpp"
#include "qcutlab/linalg.hpp"

namespace qcutlab {

enum class CutScheme { PENG_1, PAULI_M, HARADA_MUB };

// Convex mixture of pure states; weights are nonnegative and sum to one.
struct Mixture {
    struct Component {
        double weight;
        CVector state;
    };
    std::vector<Component> components;

    static Mixture pure(CVector state);
    CMatrix density() const;
};

// One measure-and-prepare pair of a quasiprobability decomposition: apply
// the coefficient times the preparation, weighted by Tr(measurement · ρ).
struct DecompTerm {
    double coefficient;
    CMatrix measurement; // Hermitian observable on the cut qubits
    Mixture preparation;

    // Eigen-expansion of the measurement into rank-one outcomes with their
    // eigenvalue weights; zero-eigenvalue outcomes are kept so that each
    // term still describes a complete projective measurement.
    struct Branch {
        double weight;
        CVector outcome_state;
    };
    std::vector<Branch> branches;
};

// Sampling unit for the quasiprobability estimator. For outcome-correlated
// groups (one channel measuring a full basis), the measured outcome selects
// the member term; otherwise the member term is drawn by |coefficient|.
struct TermGroup {
    // Nonnegative sampling mass: the shared |coefficient| for correlated
    // groups, the sum of member |coefficients| otherwise. Signs stay on
    // the terms. kappa is the sum of these masses.
    double coefficient;
    std::vector<std::size_t> terms;
    bool outcome_correlated = false;
};

struct CutLocation {
    std::size_t gate_boundary; // position in the gate list
    int qubit;
};

struct CutPlan {
    CircuitIR original;
    std::vector<CutLocation> cut_locations;
    int m = 0; // number of cut wires
    CutScheme scheme = CutScheme::PENG_1;
    std::vector<DecompTerm> terms;
    std::vector<TermGroup> groups;
    CircuitIR fragment_up;
    CircuitIR fragment_down;
    std::vector<int> up_qubits;   // original indices carried by fragment_up
    std::vector<int> down_qubits; // original indices carried by fragment_down
    double kappa = 1.0;           // sum of |group coefficients|
};

struct TamperSpec {
    enum class Mode { UNIFORM, PER_PREPARATION };
    Mode mode = Mode::UNIFORM;
    UnitaryOp uniform;                       // UNIFORM: applied to every preparation
    std::map<std::size_t, UnitaryOp> per_term; // PER_PREPARATION: term index -> unitary

    static TamperSpec uniform_spec(UnitaryOp u);
    static TamperSpec per_preparation(std::map<std::size_t, UnitaryOp> map);
};

struct SampledEstimate {
    double estimate = 0.0;
    double stderr_ = 0.0;
    std::size_t shots = 0;
};

struct CpTpReport {
    bool tp = false;
    bool cp = false;
    double min_eigenvalue = 0.0;
    double tp_deviation = 0.0;
};

// Terms of the m-qubit identity-channel decomposition for the scheme.
// PENG_1 requires m = 1; the other schemes support m in {1, 2}.
std::vector<DecompTerm> decomposition_terms(CutScheme scheme, int m);

// Same, plus the sampling groups the scheme's overhead is counted over.
void decomposition_terms_grouped(CutScheme scheme, int m, std::vector<DecompTerm>& terms,
                                 std::vector<TermGroup>& groups);

// Unitaries sending the computational basis to the other 2^m mutually
// unbiased bases (the computational basis itself is the (2^m + 1)-th).
std::vector<UnitaryOp> mub_unitaries(int m);

// Cuts the circuit at the given locations. All cuts must share one gate
// boundary (parallel wires), and no un-cut qubit may be acted on both
// before and after that boundary.
CutPlan cut_circuit(const CircuitIR& c, const std::vector<CutLocation>& cuts, CutScheme scheme);

// Full enumeration over terms, measurement outcomes and preparation
// components; equals the uncut expectation exactly (up to roundoff).
double recombine_exact(const CutPlan& plan, const StateVector& input, const CMatrix& obs);

// Unbiased estimator: draw a group with probability |c|/kappa, sample the
// measurement outcome and preparation, evaluate the signed contribution,
// scale by kappa. stderr is the sample standard deviation over sqrt(N).
SampledEstimate recombine_sampled(const CutPlan& plan, const StateVector& input, const CMatrix& obs,
                                  std::size_t shots, std::uint64_t seed);

// Conjugates targeted preparations by their perturbation unitaries.
// Coefficients and measurements are left untouched.
CutPlan tamper(const CutPlan& plan, const TamperSpec& spec);

// Applies the plan's boundary map to all matrix units and assembles the
// superoperator (column-stacking convention) and the Choi matrix
// C = sum_ij |i><j| (x) M(|i><j|).
struct EffectiveChannel {
    CMatrix superoperator;
    CMatrix choi;
};
EffectiveChannel effective_channel(const CutPlan& plan);

// TP iff the partial trace of the Choi matrix over the output factor is the
// identity (1e-8); CP iff its smallest eigenvalue is >= -1e-8.
CpTpReport cp_tp_check(const CMatrix& choi, int m);

std::string cut_plan_to_json(const CutPlan& plan);

const char* scheme_name(CutScheme scheme);
CutScheme scheme_from_name(const std::string& name);

} // namespace qcutlab
