#include "qcutlab/wirecut.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "qcutlab/parallel.hpp"
#include "qcutlab/rng.hpp"

namespace qcutlab {

namespace {

constexpr Complex kI{0.0, 1.0};

CVector ket(std::initializer_list<Complex> amps) {
    CVector v(static_cast<Eigen::Index>(amps.size()));
    Eigen::Index i = 0;
    for (Complex a : amps) v(i++) = a;
    return v;
}

CMatrix pauli1(char which) {
    CMatrix m(2, 2);
    switch (which) {
        case 'I': m << 1, 0, 0, 1; break;
        case 'X': m << 0, 1, 1, 0; break;
        case 'Y': m << 0, -kI, kI, 0; break;
        default: m << 1, 0, 0, -1; break;
    }
    return m;
}

void expand_branches(DecompTerm& term) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(term.measurement);
    term.branches.clear();
    for (Eigen::Index j = 0; j < es.eigenvalues().size(); ++j)
        term.branches.push_back({es.eigenvalues()(j), es.eigenvectors().col(j)});
}

DecompTerm make_term(double c, CMatrix meas, Mixture prep) {
    DecompTerm t;
    t.coefficient = c;
    t.measurement = std::move(meas);
    t.preparation = std::move(prep);
    expand_branches(t);
    return t;
}

// Rank-one terms of outcome-correlated groups keep the projector itself as
// the "measurement": the single unit-weight branch is the outcome.
DecompTerm make_projector_term(double c, const CVector& outcome, Mixture prep) {
    DecompTerm t;
    t.coefficient = c;
    t.measurement = outcome * outcome.adjoint();
    t.preparation = std::move(prep);
    t.branches.push_back({1.0, outcome});
    return t;
}

void peng_terms(std::vector<DecompTerm>& terms, std::vector<TermGroup>& groups) {
    const double r = 1.0 / std::sqrt(2.0);
    const CVector k0 = ket({1.0, 0.0});
    const CVector k1 = ket({0.0, 1.0});
    const CVector kp = ket({r, r});
    const CVector km = ket({r, -r});
    const CVector kpi = ket({r, r * kI});
    const CVector kmi = ket({r, -r * kI});

    const struct {
        double c;
        char obs;
        CVector prep;
    } rows[8] = {
        {0.5, 'I', k0}, {0.5, 'I', k1}, {0.5, 'X', kp},  {-0.5, 'X', km},
        {0.5, 'Y', kpi}, {-0.5, 'Y', kmi}, {0.5, 'Z', k0}, {-0.5, 'Z', k1},
    };
    for (const auto& row : rows) {
        terms.push_back(make_term(row.c, pauli1(row.obs), Mixture::pure(row.prep)));
        groups.push_back({std::abs(row.c), {terms.size() - 1}, false});
    }
}

std::vector<CMatrix> pauli_strings(int m) {
    const char axes[4] = {'I', 'X', 'Y', 'Z'};
    std::vector<CMatrix> out;
    if (m == 1) {
        for (char a : axes) out.push_back(pauli1(a));
    } else {
        for (char a : axes)
            for (char b : axes) out.push_back(tensor(pauli1(a), pauli1(b)));
    }
    return out;
}

void pauli_terms(int m, std::vector<DecompTerm>& terms, std::vector<TermGroup>& groups) {
    const double scale = 1.0 / double(Eigen::Index(1) << m);
    for (const CMatrix& p : pauli_strings(m)) {
        Eigen::SelfAdjointEigenSolver<CMatrix> es(p);
        TermGroup group;
        group.outcome_correlated = false;
        double mass = 0.0;
        for (Eigen::Index j = 0; j < es.eigenvalues().size(); ++j) {
            const double c = es.eigenvalues()(j) * scale;
            terms.push_back(make_term(c, p, Mixture::pure(es.eigenvectors().col(j))));
            group.terms.push_back(terms.size() - 1);
            mass += std::abs(c);
        }
        group.coefficient = mass;
        groups.push_back(std::move(group));
    }
}

void harada_terms(int m, std::vector<DecompTerm>& terms, std::vector<TermGroup>& groups) {
    const Eigen::Index dim = Eigen::Index(1) << m;
    const double neg = double(dim) - 1.0;

    for (const UnitaryOp& u : mub_unitaries(m)) {
        TermGroup group;
        group.outcome_correlated = true;
        group.coefficient = 1.0;
        for (Eigen::Index j = 0; j < dim; ++j) {
            const CVector basis_state = u.matrix.col(j);
            terms.push_back(make_projector_term(1.0, basis_state, Mixture::pure(basis_state)));
            group.terms.push_back(terms.size() - 1);
        }
        groups.push_back(std::move(group));
    }

    TermGroup group;
    group.outcome_correlated = true;
    group.coefficient = neg;
    for (Eigen::Index j = 0; j < dim; ++j) {
        CVector outcome = CVector::Zero(dim);
        outcome(j) = 1.0;
        Mixture prep; // uniform over the other computational states
        for (Eigen::Index k = 0; k < dim; ++k) {
            if (k == j) continue;
            CVector s = CVector::Zero(dim);
            s(k) = 1.0;
            prep.components.push_back({1.0 / neg, std::move(s)});
        }
        terms.push_back(make_projector_term(-neg, outcome, std::move(prep)));
        group.terms.push_back(terms.size() - 1);
    }
    groups.push_back(std::move(group));
}

} // namespace

Mixture Mixture::pure(CVector state) {
    Mixture m;
    m.components.push_back({1.0, std::move(state)});
    return m;
}

CMatrix Mixture::density() const {
    if (components.empty()) throw std::logic_error("Mixture: empty");
    const Eigen::Index dim = components.front().state.size();
    CMatrix rho = CMatrix::Zero(dim, dim);
    for (const Component& c : components) rho += c.weight * (c.state * c.state.adjoint());
    return rho;
}

TamperSpec TamperSpec::uniform_spec(UnitaryOp u) {
    TamperSpec s;
    s.mode = Mode::UNIFORM;
    s.uniform = std::move(u);
    return s;
}

TamperSpec TamperSpec::per_preparation(std::map<std::size_t, UnitaryOp> map) {
    TamperSpec s;
    s.mode = Mode::PER_PREPARATION;
    s.per_term = std::move(map);
    return s;
}

void decomposition_terms_grouped(CutScheme scheme, int m, std::vector<DecompTerm>& terms,
                                 std::vector<TermGroup>& groups) {
    terms.clear();
    groups.clear();
    switch (scheme) {
        case CutScheme::PENG_1:
            if (m != 1) throw std::invalid_argument("decomposition_terms: PENG_1 requires m = 1");
            peng_terms(terms, groups);
            return;
        case CutScheme::PAULI_M:
            if (m != 1 && m != 2) throw std::invalid_argument("decomposition_terms: PAULI_M supports m in {1,2}");
            pauli_terms(m, terms, groups);
            return;
        case CutScheme::HARADA_MUB:
            if (m != 1 && m != 2) throw std::invalid_argument("decomposition_terms: HARADA_MUB supports m in {1,2}");
            harada_terms(m, terms, groups);
            return;
    }
    throw std::invalid_argument("decomposition_terms: unknown scheme");
}

std::vector<DecompTerm> decomposition_terms(CutScheme scheme, int m) {
    std::vector<DecompTerm> terms;
    std::vector<TermGroup> groups;
    decomposition_terms_grouped(scheme, m, terms, groups);
    return terms;
}

std::vector<UnitaryOp> mub_unitaries(int m) {
    if (m == 1) {
        CMatrix h(2, 2);
        const double r = 1.0 / std::sqrt(2.0);
        h << r, r, r, -r;
        CMatrix s(2, 2);
        s << 1, 0, 0, kI;
        return {UnitaryOp(h), UnitaryOp(CMatrix(s * h))};
    }
    if (m != 2) throw std::invalid_argument("mub_unitaries: m must be 1 or 2");

    // Joint eigenbases of the four non-computational commuting Pauli pairs;
    // together with the computational basis these are the five MUBs.
    const struct {
        char a1, b1, a2, b2;
    } sets[4] = {{'X', 'I', 'I', 'X'}, {'Y', 'I', 'I', 'Y'}, {'X', 'Y', 'Y', 'Z'}, {'Y', 'X', 'Z', 'Y'}};
    std::vector<UnitaryOp> out;
    for (const auto& set : sets) {
        const CMatrix p1 = tensor(pauli1(set.a1), pauli1(set.b1));
        const CMatrix p2 = tensor(pauli1(set.a2), pauli1(set.b2));
        // Eigenvalues of p1 + 2 p2 are {±1 ± 2}, all distinct, so the
        // eigenvectors form the joint basis of the commuting pair.
        Eigen::SelfAdjointEigenSolver<CMatrix> es(p1 + 2.0 * p2);
        out.push_back(UnitaryOp(es.eigenvectors()));
    }
    return out;
}

namespace {

struct CutGeometry {
    std::size_t boundary = 0;
    std::vector<int> cut_qubits; // sorted ascending
};

CutGeometry geometry(const CutPlan& plan) {
    CutGeometry g;
    if (plan.cut_locations.empty()) return g;
    g.boundary = plan.cut_locations.front().gate_boundary;
    for (const CutLocation& loc : plan.cut_locations) g.cut_qubits.push_back(loc.qubit);
    std::sort(g.cut_qubits.begin(), g.cut_qubits.end());
    return g;
}

} // namespace

CutPlan cut_circuit(const CircuitIR& c, const std::vector<CutLocation>& cuts, CutScheme scheme) {
    c.validate();
    CutPlan plan;
    plan.original = c;
    plan.cut_locations = cuts;
    plan.scheme = scheme;
    plan.m = static_cast<int>(cuts.size());

    if (cuts.empty()) {
        plan.fragment_up = c;
        plan.up_qubits.resize(c.width);
        std::iota(plan.up_qubits.begin(), plan.up_qubits.end(), 0);
        plan.fragment_down.width = 0;
        plan.kappa = 1.0;
        return plan;
    }
    if (cuts.size() > 2) throw std::invalid_argument("cut_circuit: more than 2 simultaneous cuts unsupported");

    const std::size_t b = cuts.front().gate_boundary;
    std::set<int> cutset;
    for (const CutLocation& loc : cuts) {
        if (loc.gate_boundary != b)
            throw std::invalid_argument("cut_circuit: cuts must be parallel (one shared gate boundary)");
        if (loc.qubit < 0 || loc.qubit >= c.width) throw std::invalid_argument("cut_circuit: cut qubit out of range");
        if (!cutset.insert(loc.qubit).second) throw std::invalid_argument("cut_circuit: duplicate cut qubit");
    }
    if (b > c.gates.size()) throw std::invalid_argument("cut_circuit: gate boundary out of range");

    std::set<int> up_touched, down_touched;
    for (std::size_t i = 0; i < c.gates.size(); ++i)
        for (int w : c.gates[i].wires) (i < b ? up_touched : down_touched).insert(w);
    for (int q : up_touched)
        if (down_touched.count(q) && !cutset.count(q))
            throw std::invalid_argument("cut_circuit: cuts do not separate the circuit (qubit " +
                                        std::to_string(q) + " crosses the boundary)");

    std::set<int> up_set = up_touched;
    for (int q : cutset) up_set.insert(q);
    std::set<int> down_set;
    for (int q = 0; q < c.width; ++q)
        if (!up_set.count(q)) down_set.insert(q);
    for (int q : cutset) down_set.insert(q);

    plan.up_qubits.assign(up_set.begin(), up_set.end());
    plan.down_qubits.assign(down_set.begin(), down_set.end());

    auto remap = [](const std::vector<int>& order, const Gate& g) {
        Gate out = g;
        for (int& w : out.wires) {
            const auto it = std::lower_bound(order.begin(), order.end(), w);
            w = static_cast<int>(it - order.begin());
        }
        return out;
    };
    plan.fragment_up.width = static_cast<int>(plan.up_qubits.size());
    for (std::size_t i = 0; i < b; ++i) plan.fragment_up.append(remap(plan.up_qubits, c.gates[i]));
    plan.fragment_down.width = static_cast<int>(plan.down_qubits.size());
    for (std::size_t i = b; i < c.gates.size(); ++i) plan.fragment_down.append(remap(plan.down_qubits, c.gates[i]));

    decomposition_terms_grouped(scheme, plan.m, plan.terms, plan.groups);
    plan.kappa = 0.0;
    for (const TermGroup& g : plan.groups) plan.kappa += std::abs(g.coefficient);
    return plan;
}

namespace {

// (⟨outcome|_cut ⊗ I)|ψ⟩: collapses the cut qubits, keeping full indexing
// with the cut bits zeroed so stitching can reuse the same index space.
CVector project_cut(const CVector& psi, int width, const std::vector<int>& cut_qubits, const CVector& outcome) {
    const std::size_t n = static_cast<std::size_t>(psi.size());
    const std::size_t m = cut_qubits.size();
    std::vector<std::size_t> bits(m);
    for (std::size_t j = 0; j < m; ++j) bits[j] = std::size_t(1) << (width - 1 - cut_qubits[j]);
    std::size_t mask = 0;
    for (std::size_t bmask : bits) mask |= bmask;
    CVector v = CVector::Zero(psi.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (i & mask) continue;
        Complex acc = 0.0;
        for (std::size_t local = 0; local < (std::size_t(1) << m); ++local) {
            std::size_t idx = i;
            for (std::size_t j = 0; j < m; ++j)
                if (local & (std::size_t(1) << (m - 1 - j))) idx |= bits[j];
            acc += std::conj(outcome(static_cast<Eigen::Index>(local))) * psi(idx);
        }
        v(i) = acc;
    }
    return v;
}

// |prep⟩_cut ⊗ |v⟩_rest, with v indexed as produced by project_cut.
CVector stitch(const CVector& v, int width, const std::vector<int>& cut_qubits, const CVector& prep) {
    const std::size_t n = static_cast<std::size_t>(v.size());
    const std::size_t m = cut_qubits.size();
    std::vector<std::size_t> bits(m);
    for (std::size_t j = 0; j < m; ++j) bits[j] = std::size_t(1) << (width - 1 - cut_qubits[j]);
    std::size_t mask = 0;
    for (std::size_t bmask : bits) mask |= bmask;
    CVector out = CVector::Zero(v.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (i & mask) continue;
        if (v(i) == Complex(0.0, 0.0)) continue;
        for (std::size_t local = 0; local < (std::size_t(1) << m); ++local) {
            std::size_t idx = i;
            for (std::size_t j = 0; j < m; ++j)
                if (local & (std::size_t(1) << (m - 1 - j))) idx |= bits[j];
            out(idx) = prep(static_cast<Eigen::Index>(local)) * v(i);
        }
    }
    return out;
}

struct BoundaryState {
    CVector upstream;       // state right before the cut boundary
    CircuitIR downstream;   // remaining gates on the full register
};

BoundaryState run_upstream(const CutPlan& plan, const StateVector& input) {
    const CutGeometry geo = geometry(plan);
    CircuitIR up, down;
    up.width = down.width = plan.original.width;
    for (std::size_t i = 0; i < plan.original.gates.size(); ++i)
        (i < geo.boundary ? up : down).append(plan.original.gates[i]);
    BoundaryState bs;
    bs.upstream = simulate(up, input).amps;
    bs.downstream = std::move(down);
    return bs;
}

// The stitched vector is intentionally unnormalized; its norm carries the
// measurement outcome probability.
double downstream_expectation(const CircuitIR& down, const CVector& phi, const CMatrix& obs) {
    StateVector s;
    s.num_qubits = down.width;
    s.amps = phi;
    const StateVector out = simulate(down, s);
    return (out.amps.dot(obs * out.amps)).real();
}

} // namespace

double recombine_exact(const CutPlan& plan, const StateVector& input, const CMatrix& obs) {
    if (input.num_qubits != plan.original.width)
        throw std::invalid_argument("recombine_exact: input width mismatch");
    if (!is_hermitian(obs)) throw std::invalid_argument("recombine_exact: observable not Hermitian");
    if (plan.cut_locations.empty()) return expectation(plan.original, input, obs);

    const CutGeometry geo = geometry(plan);
    const BoundaryState bs = run_upstream(plan, input);

    return ordered_map_reduce<double>(
        plan.terms.size(), 0.0,
        [&](std::size_t t) {
            const DecompTerm& term = plan.terms[t];
            double acc = 0.0;
            for (const DecompTerm::Branch& branch : term.branches) {
                if (branch.weight == 0.0) continue;
                const CVector v = project_cut(bs.upstream, plan.original.width, geo.cut_qubits, branch.outcome_state);
                if (v.squaredNorm() < 1e-300) continue;
                for (const Mixture::Component& comp : term.preparation.components) {
                    const CVector phi = stitch(v, plan.original.width, geo.cut_qubits, comp.state);
                    acc += term.coefficient * branch.weight * comp.weight *
                           downstream_expectation(bs.downstream, phi, obs);
                }
            }
            return acc;
        },
        [](double a, double b) { return a + b; });
}

SampledEstimate recombine_sampled(const CutPlan& plan, const StateVector& input, const CMatrix& obs,
                                  std::size_t shots, std::uint64_t seed) {
    if (shots < 1) throw std::invalid_argument("recombine_sampled: need at least one shot");
    if (plan.cut_locations.empty()) {
        const double v = expectation(plan.original, input, obs);
        return {v, 0.0, shots};
    }
    const CutGeometry geo = geometry(plan);
    const BoundaryState bs = run_upstream(plan, input);

    // Precompute, per group: outcome Born weights and, per (outcome, term,
    // preparation component), the exact downstream expectation. Shots then
    // reduce to index sampling against these tables.
    struct OutcomeCell {
        double born = 0.0;
        double weight = 1.0;                  // eigenvalue factor
        std::vector<std::size_t> term_choice; // candidate terms
        std::vector<double> term_mass;        // |coefficient| per candidate
        std::vector<std::vector<double>> value; // [candidate][prep component]
    };
    struct GroupTable {
        double mass;
        std::vector<OutcomeCell> outcomes;
    };

    std::vector<GroupTable> tables;
    double kappa = 0.0;
    for (const TermGroup& group : plan.groups) {
        GroupTable gt;
        gt.mass = std::abs(group.coefficient);
        kappa += gt.mass;
        if (group.outcome_correlated) {
            for (std::size_t t : group.terms) {
                const DecompTerm& term = plan.terms[t];
                OutcomeCell cell;
                const CVector v =
                    project_cut(bs.upstream, plan.original.width, geo.cut_qubits, term.branches.front().outcome_state);
                cell.born = v.squaredNorm();
                cell.weight = term.branches.front().weight;
                cell.term_choice = {t};
                cell.term_mass = {std::abs(term.coefficient)};
                std::vector<double> vals;
                for (const Mixture::Component& comp : term.preparation.components) {
                    const CVector phi = stitch(v, plan.original.width, geo.cut_qubits, comp.state);
                    const double y = downstream_expectation(bs.downstream, phi, obs);
                    vals.push_back(cell.born > 0.0 ? y / cell.born : 0.0);
                }
                cell.value.push_back(std::move(vals));
                gt.outcomes.push_back(std::move(cell));
            }
        } else {
            // All terms in an uncorrelated group share the same measurement.
            const DecompTerm& first = plan.terms[group.terms.front()];
            for (std::size_t s = 0; s < first.branches.size(); ++s) {
                OutcomeCell cell;
                const CVector v =
                    project_cut(bs.upstream, plan.original.width, geo.cut_qubits, first.branches[s].outcome_state);
                cell.born = v.squaredNorm();
                cell.weight = first.branches[s].weight;
                for (std::size_t t : group.terms) {
                    const DecompTerm& term = plan.terms[t];
                    cell.term_choice.push_back(t);
                    cell.term_mass.push_back(std::abs(term.coefficient));
                    std::vector<double> vals;
                    for (const Mixture::Component& comp : term.preparation.components) {
                        const CVector phi = stitch(v, plan.original.width, geo.cut_qubits, comp.state);
                        const double y = downstream_expectation(bs.downstream, phi, obs);
                        vals.push_back(cell.born > 0.0 ? y / cell.born : 0.0);
                    }
                    cell.value.push_back(std::move(vals));
                }
                gt.outcomes.push_back(std::move(cell));
            }
        }
        tables.push_back(std::move(gt));
    }

    auto engine = make_engine(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto pick = [&](const std::vector<double>& w, double total) {
        double r = unit(engine) * total;
        for (std::size_t i = 0; i < w.size(); ++i) {
            r -= w[i];
            if (r <= 0.0) return i;
        }
        return w.size() - 1;
    };

    double sum = 0.0, sumsq = 0.0;
    for (std::size_t n = 0; n < shots; ++n) {
        // group ~ |c|/kappa
        double r = unit(engine) * kappa;
        std::size_t g = 0;
        for (; g + 1 < tables.size(); ++g) {
            r -= tables[g].mass;
            if (r <= 0.0) break;
        }
        const GroupTable& gt = tables[g];
        // outcome ~ Born
        std::vector<double> born;
        born.reserve(gt.outcomes.size());
        double total = 0.0;
        for (const OutcomeCell& cell : gt.outcomes) {
            born.push_back(cell.born);
            total += cell.born;
        }
        const std::size_t s = pick(born, total);
        const OutcomeCell& cell = gt.outcomes[s];
        // term within group ~ |c| / mass, then preparation component ~ weight
        double mass = std::accumulate(cell.term_mass.begin(), cell.term_mass.end(), 0.0);
        const std::size_t ti = pick(cell.term_mass, mass);
        const DecompTerm& term = plan.terms[cell.term_choice[ti]];
        std::vector<double> pw;
        for (const Mixture::Component& comp : term.preparation.components) pw.push_back(comp.weight);
        const std::size_t pi = pick(pw, std::accumulate(pw.begin(), pw.end(), 0.0));

        const double sign = term.coefficient < 0.0 ? -1.0 : 1.0;
        const double shot = kappa * sign * cell.weight * cell.value[ti][pi];
        sum += shot;
        sumsq += shot * shot;
    }
    SampledEstimate est;
    est.shots = shots;
    est.estimate = sum / double(shots);
    const double var = std::max(0.0, sumsq / double(shots) - est.estimate * est.estimate);
    est.stderr_ = std::sqrt(var / double(shots));
    return est;
}

CutPlan tamper(const CutPlan& plan, const TamperSpec& spec) {
    const Eigen::Index dim = Eigen::Index(1) << plan.m;
    auto check = [&](const UnitaryOp& u) {
        if (u.dim() != dim) throw std::invalid_argument("tamper: perturbation dimension must be 2^m");
        if (!is_unitary(u.matrix)) throw std::invalid_argument("tamper: perturbation is not unitary");
    };
    CutPlan out = plan;
    if (spec.mode == TamperSpec::Mode::UNIFORM) {
        check(spec.uniform);
        for (DecompTerm& term : out.terms)
            for (Mixture::Component& comp : term.preparation.components)
                comp.state = spec.uniform.matrix * comp.state;
    } else {
        for (const auto& [idx, u] : spec.per_term) {
            if (idx >= out.terms.size()) throw std::invalid_argument("tamper: term index out of range");
            check(u);
            for (Mixture::Component& comp : out.terms[idx].preparation.components)
                comp.state = u.matrix * comp.state;
        }
    }
    return out;
}

EffectiveChannel effective_channel(const CutPlan& plan) {
    if (plan.m < 1 || plan.m > 2) throw std::invalid_argument("effective_channel: m must be 1 or 2");
    const Eigen::Index dim = Eigen::Index(1) << plan.m;

    std::vector<CMatrix> densities;
    densities.reserve(plan.terms.size());
    for (const DecompTerm& term : plan.terms) densities.push_back(term.preparation.density());

    EffectiveChannel ch;
    ch.superoperator = CMatrix::Zero(dim * dim, dim * dim);
    ch.choi = CMatrix::Zero(dim * dim, dim * dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        for (Eigen::Index j = 0; j < dim; ++j) {
            CMatrix image = CMatrix::Zero(dim, dim);
            for (std::size_t t = 0; t < plan.terms.size(); ++t) {
                const Complex factor = plan.terms[t].measurement(j, i); // Tr(meas |i><j|)
                if (factor != Complex(0.0, 0.0)) image += plan.terms[t].coefficient * factor * densities[t];
            }
            // column-stacked vec: entry (r,c) of the image sits at r + c*dim
            for (Eigen::Index c = 0; c < dim; ++c)
                for (Eigen::Index r = 0; r < dim; ++r) ch.superoperator(r + c * dim, i + j * dim) = image(r, c);
            ch.choi.block(i * dim, j * dim, dim, dim) = image;
        }
    }
    return ch;
}

CpTpReport cp_tp_check(const CMatrix& choi, int m) {
    const Eigen::Index dim = Eigen::Index(1) << m;
    if (choi.rows() != dim * dim || choi.cols() != dim * dim)
        throw std::invalid_argument("cp_tp_check: Choi matrix must have dimension 4^m");
    CpTpReport report;
    CMatrix reduced = CMatrix::Zero(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = 0; j < dim; ++j) {
            Complex acc = 0.0;
            for (Eigen::Index k = 0; k < dim; ++k) acc += choi(i * dim + k, j * dim + k);
            reduced(i, j) = acc;
        }
    report.tp_deviation = (reduced - CMatrix::Identity(dim, dim)).cwiseAbs().maxCoeff();
    report.tp = report.tp_deviation <= 1e-8;

    const CMatrix herm = 0.5 * (choi + choi.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(herm, Eigen::EigenvaluesOnly);
    report.min_eigenvalue = es.eigenvalues().minCoeff();
    report.cp = report.min_eigenvalue >= -1e-8;
    return report;
}

const char* scheme_name(CutScheme scheme) {
    switch (scheme) {
        case CutScheme::PENG_1: return "PENG_1";
        case CutScheme::PAULI_M: return "PAULI_M";
        case CutScheme::HARADA_MUB: return "HARADA_MUB";
    }
    return "?";
}

CutScheme scheme_from_name(const std::string& name) {
    if (name == "PENG_1") return CutScheme::PENG_1;
    if (name == "PAULI_M") return CutScheme::PAULI_M;
    if (name == "HARADA_MUB") return CutScheme::HARADA_MUB;
    throw std::invalid_argument("unknown cut scheme '" + name + "'");
}

std::string cut_plan_to_json(const CutPlan& plan) {
    nlohmann::json j;
    j["scheme"] = scheme_name(plan.scheme);
    j["m"] = plan.m;
    j["kappa"] = plan.kappa;
    j["cut_locations"] = nlohmann::json::array();
    for (const CutLocation& loc : plan.cut_locations)
        j["cut_locations"].push_back({{"gate_boundary", loc.gate_boundary}, {"qubit", loc.qubit}});
    j["fragment_widths"] = {plan.fragment_up.width, plan.fragment_down.width};
    j["up_qubits"] = plan.up_qubits;
    j["down_qubits"] = plan.down_qubits;

    auto matrix_json = [](const CMatrix& m) {
        nlohmann::json rows = nlohmann::json::array();
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            nlohmann::json row = nlohmann::json::array();
            for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
            rows.push_back(std::move(row));
        }
        return rows;
    };

    j["terms"] = nlohmann::json::array();
    for (const DecompTerm& term : plan.terms) {
        nlohmann::json t;
        t["coefficient"] = term.coefficient;
        t["measurement"] = matrix_json(term.measurement);
        t["preparation"] = nlohmann::json::array();
        for (const Mixture::Component& comp : term.preparation.components) {
            nlohmann::json amps = nlohmann::json::array();
            for (Eigen::Index i = 0; i < comp.state.size(); ++i)
                amps.push_back({comp.state(i).real(), comp.state(i).imag()});
            t["preparation"].push_back({{"weight", comp.weight}, {"state", std::move(amps)}});
        }
        j["terms"].push_back(std::move(t));
    }
    j["groups"] = nlohmann::json::array();
    for (const TermGroup& g : plan.groups)
        j["groups"].push_back(
            {{"coefficient", g.coefficient}, {"terms", g.terms}, {"outcome_correlated", g.outcome_correlated}});
    return j.dump(2);
}

} // namespace qcutlab
