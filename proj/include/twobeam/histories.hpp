#ifndef TWOBEAM_HISTORIES_HPP
#define TWOBEAM_HISTORIES_HPP

// Projector-history calculus over a small discrete interferometer model:
// chain vectors, weights, the decoherence functional, family consistency,
// and conditional probabilities.  All functions are pure over immutable
// values.
//
// Model conventions.  Basis kets are
//   sCD  source beam, both detectors idle
//   cCD  upper beam (off mirror M1), detectors idle
//   dCD  lower beam (off mirror M2), detectors idle
//   C*D  detector C fired
//   CD*  detector D fired
// The beam splitter sends s -> (c+d)/sqrt(2); detection sends c -> C*D and
// d -> CD*.  Both maps fix the unitary only on a subspace; the remaining
// columns are filled by a deterministic completion (see complete_unitary).
// Every quantity asserted about the model must be invariant under the
// completion scheme, and the test suite checks this with two schemes.

#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "twobeam/errors.hpp"
#include "twobeam/hilbert.hpp"

namespace twobeam {

struct Model {
    std::vector<std::string> basis;
    StateVector initial;                  // normalized state at times[0]
    std::vector<std::string> times;       // strictly ordered time labels
    std::vector<Operator> step_unitaries; // step_unitaries[i]: times[i] -> times[i+1]

    std::size_t dim() const { return basis.size(); }

    std::size_t time_index(const std::string& label) const {
        for (std::size_t i = 0; i < times.size(); ++i)
            if (times[i] == label) return i;
        throw TimeLabelUnknown("time label '" + label + "' not in model");
    }

    std::size_t basis_index(const std::string& label) const {
        for (std::size_t i = 0; i < basis.size(); ++i)
            if (basis[i] == label) return i;
        throw DimensionMismatch("basis label '" + label + "' not in model");
    }

    StateVector ket(const std::string& label) const {
        StateVector s{basis, std::vector<Complex>(dim(), Complex{0.0, 0.0})};
        s.amps[basis_index(label)] = 1.0;
        return s;
    }

    // (sum_i kets[i]) / sqrt(n) -- equal-weight superposition of basis kets.
    StateVector superposition_ket(const std::vector<std::string>& labels) const {
        StateVector s{basis, std::vector<Complex>(dim(), Complex{0.0, 0.0})};
        const double a = 1.0 / std::sqrt(static_cast<double>(labels.size()));
        for (const auto& l : labels) s.amps[basis_index(l)] = a;
        return s;
    }

    Operator basis_projector(const std::string& label) const { return projector_from(ket(label)); }
};

// One history: the initial projector at times[0] plus one projector per
// selected later time.  Times must be a subsequence of the model times.
struct History {
    std::string name;
    std::vector<std::pair<std::string, Operator>> projectors; // ordered, starts at times[0]
};

struct Family {
    std::vector<History> histories; // all sharing identical time labels
};

struct ConsistencyReport {
    double offdiag_max_abs = 0.0;
    double offdiag_max_realpart = 0.0;
    bool consistent_medium = false; // max |D(h,h')| < tol, h != h'
    bool consistent_weak = false;   // max |Re D(h,h')| < tol
    std::vector<double> weights;    // diagonal of D, by history index
    std::vector<bool> dynamically_impossible; // weight < tol
    // Worst-case additivity defect when coarse-graining a pair of histories:
    // |Pr(h or h') - Pr(h) - Pr(h')| <= 2|D(h,h')|.  This is the operational
    // size of a consistency violation.
    double sum_rule_defect_max = 0.0;
    // Per time label: do the listed projectors sum to the identity?
    std::map<std::string, bool> complete_to_identity;
};

enum class ModelVariant { plain, with_t3, recombined };

inline const char* to_string(ModelVariant v) {
    switch (v) {
        case ModelVariant::plain: return "plain";
        case ModelVariant::with_t3: return "with_t3";
        case ModelVariant::recombined: return "recombined";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Model construction

namespace detail {

inline std::vector<Complex> ket_amps(std::size_t dim, std::size_t idx) {
    std::vector<Complex> v(dim, Complex{0.0, 0.0});
    v[idx] = 1.0;
    return v;
}

inline std::vector<Complex> pair_amps(std::size_t dim, std::size_t i, std::size_t j, double sj) {
    std::vector<Complex> v(dim, Complex{0.0, 0.0});
    v[i] = 1.0 / std::sqrt(2.0);
    v[j] = sj / std::sqrt(2.0);
    return v;
}

} // namespace detail

// plain:      t0 --split--> t1 --detect--> t2
// with_t3:    t0 --split--> t1 --identity--> t3 --detect--> t2
// recombined: t0 --split--> t1 --50/50 mix--> tr --detect--> t2
//             (models a detector sitting inside the overlap region: the beams
//             are mixed before they are read out)
inline Model build_standard_model(ModelVariant variant,
                                  CompletionScheme scheme = CompletionScheme::lexicographic) {
    Model m;
    m.basis = {"sCD", "cCD", "dCD", "C*D", "CD*"};
    const std::size_t n = 5;
    const std::size_t s = 0, c = 1, d = 2, Cs = 3, Ds = 4;

    m.initial = StateVector{m.basis, detail::ket_amps(n, s)};

    const Operator split =
        complete_unitary(n, {{s, detail::pair_amps(n, c, d, +1.0)}}, scheme);
    const Operator detect =
        complete_unitary(n, {{c, detail::ket_amps(n, Cs)}, {d, detail::ket_amps(n, Ds)}}, scheme);

    switch (variant) {
        case ModelVariant::plain:
            m.times = {"t0", "t1", "t2"};
            m.step_unitaries = {split, detect};
            break;
        case ModelVariant::with_t3:
            m.times = {"t0", "t1", "t3", "t2"};
            m.step_unitaries = {split, Operator::identity(n), detect};
            break;
        case ModelVariant::recombined: {
            const Operator mix =
                complete_unitary(n, {{c, detail::pair_amps(n, c, d, +1.0)}}, scheme);
            m.times = {"t0", "t1", "tr", "t2"};
            m.step_unitaries = {split, mix, detect};
            break;
        }
    }
    return m;
}

// ---------------------------------------------------------------------------
// Chain vectors and weights

// P_n U(t_n,t_{n-1}) ... P_1 U(t_1,t_0) P_psi0 |psi0>, not normalized.
// History times may skip model times; skipped steps contribute their
// unitaries but no projector.
inline StateVector chain_vector(const Model& m, const History& h) {
    if (h.projectors.empty() || h.projectors.front().first != m.times.front())
        throw TimeLabelUnknown("history must start with a projector at " + m.times.front());

    StateVector state = apply(h.projectors.front().second, m.initial);
    std::size_t next = 1; // next history projector to consume
    for (std::size_t step = 0; step + 1 < m.times.size(); ++step) {
        state = apply(m.step_unitaries[step], state);
        const std::string& now = m.times[step + 1];
        if (next < h.projectors.size() && h.projectors[next].first == now) {
            state = apply(h.projectors[next].second, state);
            ++next;
        }
    }
    if (next != h.projectors.size())
        throw TimeLabelUnknown("history time '" + h.projectors[next].first +
                               "' is not a model time (or out of order)");
    return state;
}

inline double weight(const Model& m, const History& h) { return chain_vector(m, h).norm2(); }

// D(h1,h2) = <chain(h2)|chain(h1)>; diagonal equals weight, Hermitian in
// (h1,h2).
inline Complex decoherence_functional(const Model& m, const History& h1, const History& h2) {
    return inner(chain_vector(m, h2), chain_vector(m, h1));
}

// ---------------------------------------------------------------------------
// Families

struct ProjectorSet {
    std::string time;
    std::vector<std::pair<std::string, Operator>> projectors; // (name, P)
};

inline void require_orthogonal_set(const ProjectorSet& set, double tol = 1e-12) {
    for (const auto& [name, p] : set.projectors)
        if (!check_projector(p, tol))
            throw NonOrthogonalSet("'" + name + "' at " + set.time + " is not a projector");
    for (std::size_t i = 0; i < set.projectors.size(); ++i)
        for (std::size_t j = i + 1; j < set.projectors.size(); ++j) {
            const Operator prod = multiply(set.projectors[i].second, set.projectors[j].second);
            double mx = 0.0;
            for (const Complex& e : prod.m) mx = std::max(mx, std::abs(e));
            if (mx > tol)
                throw NonOrthogonalSet("projectors '" + set.projectors[i].first + "' and '" +
                                       set.projectors[j].first + "' at " + set.time +
                                       " are not orthogonal");
        }
}

// Cartesian product of per-time projector choices.  An empty list of sets
// yields the single history consisting of the initial projector alone.
inline Family enumerate_family_histories(const Model& m, const std::vector<ProjectorSet>& sets) {
    for (const auto& set : sets) {
        m.time_index(set.time); // validates the label
        require_orthogonal_set(set);
    }
    const Operator p0 = projector_from(m.initial);

    Family fam;
    fam.histories.push_back(History{"psi0", {{m.times.front(), p0}}});
    for (const auto& set : sets) {
        std::vector<History> expanded;
        for (const History& h : fam.histories)
            for (const auto& [name, p] : set.projectors) {
                History nh = h;
                nh.name = h.name + "&" + name;
                nh.projectors.emplace_back(set.time, p);
                expanded.push_back(std::move(nh));
            }
        fam.histories = std::move(expanded);
    }
    return fam;
}

inline ConsistencyReport consistency_report(const Model& m, const Family& f, double tol = 1e-10) {
    ConsistencyReport rep;
    const std::size_t n = f.histories.size();
    std::vector<StateVector> chains;
    chains.reserve(n);
    for (const History& h : f.histories) chains.push_back(chain_vector(m, h));

    rep.weights.resize(n);
    rep.dynamically_impossible.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        rep.weights[i] = chains[i].norm2();
        rep.dynamically_impossible[i] = rep.weights[i] < tol;
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const Complex dij = inner(chains[j], chains[i]);
            rep.offdiag_max_abs = std::max(rep.offdiag_max_abs, std::abs(dij));
            rep.offdiag_max_realpart = std::max(rep.offdiag_max_realpart, std::abs(dij.real()));
        }
    rep.sum_rule_defect_max = 2.0 * rep.offdiag_max_abs;
    rep.consistent_medium = rep.offdiag_max_abs < tol;
    rep.consistent_weak = rep.offdiag_max_realpart < tol;

    // Completeness check per time: sum of the distinct projectors used at
    // that time, compared against the identity.  Reported, not required.
    if (n > 0) {
        const std::size_t nt = f.histories.front().projectors.size();
        for (std::size_t k = 1; k < nt; ++k) { // skip the shared initial projector
            const std::string& tl = f.histories.front().projectors[k].first;
            Operator sum = Operator::zero(m.dim());
            std::vector<const Operator*> seen;
            for (const History& h : f.histories) {
                const Operator& p = h.projectors[k].second;
                bool dup = false;
                for (const Operator* q : seen)
                    if (max_abs_diff(*q, p) < 1e-14) { dup = true; break; }
                if (dup) continue;
                seen.push_back(&p);
                for (std::size_t e = 0; e < sum.m.size(); ++e) sum.m[e] += p.m[e];
            }
            rep.complete_to_identity[tl] =
                max_abs_diff(sum, Operator::identity(m.dim())) < 1e-12;
        }
    }
    return rep;
}

// Events are unions of whole histories within one family, given as history
// indices.  This bakes in the one-framework rule: there is no way to form an
// event that mixes frameworks.
using EventSet = std::vector<std::size_t>;

inline double conditional_probability(const Model& m, const Family& f, const EventSet& given,
                                      const EventSet& condition, double tol = 1e-10) {
    const ConsistencyReport rep = consistency_report(m, f, tol);
    if (!rep.consistent_medium)
        throw InconsistentFamily(
            "family fails the consistency condition (max off-diagonal |D| = " +
            std::to_string(rep.offdiag_max_abs) + "); probabilities are undefined");

    std::vector<bool> in_given(f.histories.size(), false);
    for (std::size_t i : given) in_given.at(i) = true;

    double p_cond = 0.0, p_joint = 0.0;
    for (std::size_t i : condition) {
        p_cond += rep.weights.at(i);
        if (in_given[i]) p_joint += rep.weights[i];
    }
    if (p_cond < tol)
        throw ZeroProbabilityCondition("conditioning event has probability " +
                                       std::to_string(p_cond) + " < tol; undefined");
    return p_joint / p_cond;
}

// ---------------------------------------------------------------------------
// Ready-made projector sets for the standard model

// {c1, d1}: which-beam projectors at t1.
inline ProjectorSet which_path_set(const Model& m) {
    return ProjectorSet{"t1",
                        {{"c1", m.basis_projector("cCD")}, {"d1", m.basis_projector("dCD")}}};
}

// {C2*, D2*}: which-detector-fired projectors at t2.
inline ProjectorSet detector_set(const Model& m) {
    return ProjectorSet{"t2",
                        {{"C2*", m.basis_projector("C*D")}, {"D2*", m.basis_projector("CD*")}}};
}

// {C2*, C2}: detector C fired / did not fire.
inline ProjectorSet detector_fired_or_not_set(const Model& m) {
    const Operator pc = m.basis_projector("C*D");
    return ProjectorSet{"t2", {{"C2*", pc}, {"C2", complement_projector(pc)}}};
}

// {(c+d)3}: the superposition projector at the intermediate time t3.
inline ProjectorSet superposition_set(const Model& m) {
    return ProjectorSet{
        "t3", {{"(c+d)3", projector_from(m.superposition_ket({"cCD", "dCD"}))}}};
}

} // namespace twobeam

#endif
