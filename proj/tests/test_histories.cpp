#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "twobeam/histories.hpp"

using namespace twobeam;
using doctest::Approx;

namespace {

History make_history(const Model& m, std::vector<std::pair<std::string, Operator>> ps,
                     std::string name = "h") {
    History h;
    h.name = std::move(name);
    h.projectors.emplace_back("t0", projector_from(m.initial));
    for (auto& p : ps) h.projectors.push_back(std::move(p));
    return h;
}

} // namespace

TEST_CASE("standard model implements the defining beam maps") {
    for (auto scheme : {CompletionScheme::lexicographic, CompletionScheme::reversed_phased}) {
        const Model m = build_standard_model(ModelVariant::plain, scheme);
        REQUIRE(m.dim() == 5);
        for (const Operator& u : m.step_unitaries) CHECK(check_unitary(u, 1e-12));

        const StateVector split = apply(m.step_unitaries[0], m.ket("sCD"));
        CHECK(std::abs(split.amps[m.basis_index("cCD")] - 1.0 / M_SQRT2) < 1e-15);
        CHECK(std::abs(split.amps[m.basis_index("dCD")] - 1.0 / M_SQRT2) < 1e-15);
        CHECK(std::abs(split.amps[m.basis_index("sCD")]) < 1e-15);

        const StateVector det_c = apply(m.step_unitaries[1], m.ket("cCD"));
        CHECK(std::abs(det_c.amps[m.basis_index("C*D")] - 1.0) < 1e-15);
        const StateVector det_d = apply(m.step_unitaries[1], m.ket("dCD"));
        CHECK(std::abs(det_d.amps[m.basis_index("CD*")] - 1.0) < 1e-15);
    }
}

TEST_CASE("recombined variant mixes the beams 50/50 before detection") {
    const Model m = build_standard_model(ModelVariant::recombined);
    REQUIRE(m.times == std::vector<std::string>{"t0", "t1", "tr", "t2"});
    const Operator& mix = m.step_unitaries[1];
    CHECK(check_unitary(mix, 1e-12));
    const StateVector mixed = apply(mix, m.ket("cCD"));
    CHECK(std::abs(std::abs(mixed.amps[m.basis_index("cCD")]) - 1.0 / M_SQRT2) < 1e-12);
    CHECK(std::abs(std::abs(mixed.amps[m.basis_index("dCD")]) - 1.0 / M_SQRT2) < 1e-12);
}

TEST_CASE("chain vectors against hand-composed matrix oracle") {
    const Model m = build_standard_model(ModelVariant::plain);
    const Operator pc = m.basis_projector("cCD");
    const Operator pd = m.basis_projector("dCD");
    const Operator pC = m.basis_projector("C*D");

    // Oracle composition with independently written matrices.
    const auto psi0 = oracles::basis5(0);
    const auto o_cC = oracles::chain5(oracles::outer(psi0), oracles::splitter5(),
                                      oracles::outer(oracles::basis5(1)), oracles::detector5(),
                                      oracles::outer(oracles::basis5(3)), psi0);
    CHECK(std::abs(o_cC[3] - 1.0 / M_SQRT2) < 1e-15); // single component 1/sqrt2 on C*D

    const StateVector lib_cC = chain_vector(m, make_history(m, {{"t1", pc}, {"t2", pC}}));
    for (int i = 0; i < 5; ++i) CHECK(std::abs(lib_cC.amps[i] - o_cC[i]) < 1e-14);

    const StateVector lib_dC = chain_vector(m, make_history(m, {{"t1", pd}, {"t2", pC}}));
    CHECK(lib_dC.norm() < 1e-15); // zero vector: dynamically impossible branch
}

TEST_CASE("chain vector with the intermediate superposition projector") {
    const Model m = build_standard_model(ModelVariant::with_t3);
    const Operator pplus = projector_from(m.superposition_ket({"cCD", "dCD"}));
    const StateVector ch =
        chain_vector(m, make_history(m, {{"t3", pplus}, {"t2", m.basis_projector("C*D")}}));
    CHECK(std::abs(ch.amps[m.basis_index("C*D")] - 1.0 / M_SQRT2) < 1e-14);
    CHECK(std::abs(ch.norm2() - 0.5) < 1e-14);
}

TEST_CASE("weights of the four plain histories") {
    const Model m = build_standard_model(ModelVariant::plain);
    const Operator pc = m.basis_projector("cCD"), pd = m.basis_projector("dCD");
    const Operator pC = m.basis_projector("C*D"), pD = m.basis_projector("CD*");

    CHECK(weight(m, make_history(m, {{"t1", pc}, {"t2", pC}})) == Approx(0.5).epsilon(1e-12));
    CHECK(weight(m, make_history(m, {{"t1", pd}, {"t2", pD}})) == Approx(0.5).epsilon(1e-12));
    CHECK(weight(m, make_history(m, {{"t1", pd}, {"t2", pC}})) < 1e-12);
    CHECK(weight(m, make_history(m, {{"t1", pc}, {"t2", pD}})) < 1e-12);

    // Pr(psi0 and c1) = 0.5 with no detector projector at all.
    CHECK(weight(m, make_history(m, {{"t1", pc}})) == Approx(0.5).epsilon(1e-12));
}

TEST_CASE("decoherence functional: diagonal, orthogonal branches, Hermiticity") {
    const Model m = build_standard_model(ModelVariant::plain);
    const History h_cC = make_history(m, {{"t1", m.basis_projector("cCD")},
                                          {"t2", m.basis_projector("C*D")}});
    const History h_dD = make_history(m, {{"t1", m.basis_projector("dCD")},
                                          {"t2", m.basis_projector("CD*")}});
    CHECK(std::abs(decoherence_functional(m, h_cC, h_cC) - Complex{weight(m, h_cC), 0.0}) <
          1e-14);
    CHECK(std::abs(decoherence_functional(m, h_cC, h_dD)) < 1e-14);
    CHECK(std::abs(decoherence_functional(m, h_cC, h_dD) -
                   std::conj(decoherence_functional(m, h_dD, h_cC))) < 1e-15);
}

TEST_CASE("recombined which-path branches interfere: |D| = 1/4, sum-rule defect 1/2") {
    // Oracle first: compose P_C* U_det U_mix P_{c,d} U_split |s> with the
    // hand-written matrices.
    const auto psi0 = oracles::basis5(0);
    auto chain_branch = [&](int beam) {
        auto st = oracles::mul(oracles::outer(psi0), psi0);
        st = oracles::mul(oracles::splitter5(), st);
        st = oracles::mul(oracles::outer(oracles::basis5(beam)), st);
        st = oracles::mul(oracles::mixer5(), st);
        st = oracles::mul(oracles::detector5(), st);
        return oracles::mul(oracles::outer(oracles::basis5(3)), st);
    };
    const auto ocC = chain_branch(1);
    const auto odC = chain_branch(2);
    const double o_offdiag = std::abs(oracles::dot(odC, ocC));
    CHECK(o_offdiag == Approx(0.25).epsilon(1e-12));

    const Model m = build_standard_model(ModelVariant::recombined);
    const History h_c = make_history(m, {{"t1", m.basis_projector("cCD")},
                                         {"t2", m.basis_projector("C*D")}});
    const History h_d = make_history(m, {{"t1", m.basis_projector("dCD")},
                                         {"t2", m.basis_projector("C*D")}});
    const Complex d = decoherence_functional(m, h_c, h_d);
    CHECK(std::abs(d) == Approx(0.25).epsilon(1e-12));
    // Operational size of the violation: coarse-graining the two branches
    // breaks probability additivity by up to 2|D| = 0.5.
    CHECK(2.0 * std::abs(d) == Approx(0.5).epsilon(1e-12));
}

TEST_CASE("consistency_report on the three standard families") {
    SUBCASE("plain which-path plus detectors: consistent") {
        const Model m = build_standard_model(ModelVariant::plain);
        const Family f = enumerate_family_histories(m, {which_path_set(m), detector_set(m)});
        REQUIRE(f.histories.size() == 4);
        const ConsistencyReport rep = consistency_report(m, f);
        CHECK(rep.consistent_medium);
        CHECK(rep.consistent_weak);
        CHECK(rep.offdiag_max_abs < 1e-12);
        double wsum = 0.0;
        int zero_count = 0, half_count = 0;
        for (double w : rep.weights) {
            wsum += w;
            if (w < 1e-12) ++zero_count;
            if (std::abs(w - 0.5) < 1e-12) ++half_count;
        }
        CHECK(wsum == Approx(1.0).epsilon(1e-12));
        CHECK(zero_count == 2);
        CHECK(half_count == 2);
        int impossible = 0;
        for (bool b : rep.dynamically_impossible) impossible += b;
        CHECK(impossible == 2);
    }
    SUBCASE("superposition family at t3: consistent with weights 1/2, 1/2") {
        const Model m = build_standard_model(ModelVariant::with_t3);
        const Family f =
            enumerate_family_histories(m, {superposition_set(m), detector_set(m)});
        REQUIRE(f.histories.size() == 2);
        const ConsistencyReport rep = consistency_report(m, f);
        CHECK(rep.consistent_medium);
        CHECK(rep.weights[0] == Approx(0.5).epsilon(1e-12));
        CHECK(rep.weights[1] == Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("recombined which-path: inconsistent") {
        const Model m = build_standard_model(ModelVariant::recombined);
        const Family f = enumerate_family_histories(m, {which_path_set(m), detector_set(m)});
        const ConsistencyReport rep = consistency_report(m, f);
        CHECK_FALSE(rep.consistent_medium);
        CHECK(rep.offdiag_max_abs == Approx(0.25).epsilon(1e-12));
        CHECK(rep.sum_rule_defect_max == Approx(0.5).epsilon(1e-12));
    }
}

TEST_CASE("conditional probabilities of the plain framework") {
    const Model m = build_standard_model(ModelVariant::plain);
    const Family f = enumerate_family_histories(m, {which_path_set(m), detector_set(m)});
    // Enumeration order: (c1,C2*), (c1,D2*), (d1,C2*), (d1,D2*).
    const EventSet c1 = {0, 1}, d1 = {2, 3}, Cfired = {0, 2}, Dfired = {1, 3};

    CHECK(conditional_probability(m, f, c1, Cfired) == Approx(1.0).epsilon(1e-12));
    CHECK(conditional_probability(m, f, d1, Dfired) == Approx(1.0).epsilon(1e-12));

    // Converse with the C-did-not-fire projector.
    const Family f2 =
        enumerate_family_histories(m, {which_path_set(m), detector_fired_or_not_set(m)});
    // Order: (c1,C2*), (c1,C2), (d1,C2*), (d1,C2).
    const EventSet c1b = {0, 1}, Cbar = {1, 3};
    CHECK(conditional_probability(m, f2, c1b, Cbar) == Approx(0.0));

    // Conditioning on a zero-probability event must refuse.
    const EventSet dC = {2};
    CHECK_THROWS_AS(conditional_probability(m, f, c1, dC), ZeroProbabilityCondition);
}

TEST_CASE("one-framework rule: inconsistent families refuse probabilities") {
    const Model m = build_standard_model(ModelVariant::recombined);
    const Family f = enumerate_family_histories(m, {which_path_set(m), detector_set(m)});
    CHECK_THROWS_AS(conditional_probability(m, f, {0, 1}, {0, 2}), InconsistentFamily);
}

TEST_CASE("conditional probabilities form a probability measure") {
    const Model m = build_standard_model(ModelVariant::plain);
    const Family f = enumerate_family_histories(m, {which_path_set(m), detector_set(m)});
    const EventSet all = {0, 1, 2, 3};
    double total = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        const double p = conditional_probability(m, f, {i}, all);
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
        total += p;
    }
    CHECK(total == Approx(1.0).epsilon(1e-12));
    // Additive over disjoint events.
    CHECK(conditional_probability(m, f, {0, 3}, all) ==
          Approx(conditional_probability(m, f, {0}, all) +
                 conditional_probability(m, f, {3}, all)).epsilon(1e-12));
}

TEST_CASE("enumerate_family_histories counts and validation") {
    const Model m = build_standard_model(ModelVariant::plain);
    CHECK(enumerate_family_histories(m, {which_path_set(m), detector_set(m)}).histories.size() ==
          4);
    const Model m3 = build_standard_model(ModelVariant::with_t3);
    CHECK(enumerate_family_histories(m3, {superposition_set(m3), detector_set(m3)})
              .histories.size() == 2);
    CHECK(enumerate_family_histories(m, {}).histories.size() == 1);

    ProjectorSet bad{"t1",
                     {{"c1", m.basis_projector("cCD")},
                      {"cd", projector_from(m.superposition_ket({"cCD", "dCD"}))}}};
    CHECK_THROWS_AS(enumerate_family_histories(m, {bad}), NonOrthogonalSet);
}

TEST_CASE("unknown time labels are rejected") {
    const Model m = build_standard_model(ModelVariant::plain);
    CHECK_THROWS_AS(chain_vector(m, make_history(m, {{"t9", m.basis_projector("cCD")}})),
                    TimeLabelUnknown);
    ProjectorSet set{"t9", {{"c1", m.basis_projector("cCD")}}};
    CHECK_THROWS_AS(enumerate_family_histories(m, {set}), TimeLabelUnknown);
}

TEST_CASE("every asserted number is invariant under the unitary completion") {
    const auto run = [](CompletionScheme scheme) {
        const Model m = build_standard_model(ModelVariant::plain, scheme);
        const Family f = enumerate_family_histories(m, {which_path_set(m), detector_set(m)});
        const ConsistencyReport rep = consistency_report(m, f);
        const Model mr = build_standard_model(ModelVariant::recombined, scheme);
        const Family fr =
            enumerate_family_histories(mr, {which_path_set(mr), detector_set(mr)});
        const ConsistencyReport repr = consistency_report(mr, fr);
        return std::make_tuple(rep.weights, repr.offdiag_max_abs,
                               conditional_probability(m, f, {0, 1}, {0, 2}));
    };
    const auto a = run(CompletionScheme::lexicographic);
    const auto b = run(CompletionScheme::reversed_phased);
    for (std::size_t i = 0; i < std::get<0>(a).size(); ++i)
        CHECK(std::abs(std::get<0>(a)[i] - std::get<0>(b)[i]) < 1e-12);
    CHECK(std::abs(std::get<1>(a) - std::get<1>(b)) < 1e-12);
    CHECK(std::abs(std::get<2>(a) - std::get<2>(b)) < 1e-12);
}

TEST_CASE("exhaustive family completeness is reported per time") {
    const Model m = build_standard_model(ModelVariant::plain);
    const Family f = enumerate_family_histories(m, {which_path_set(m), detector_set(m)});
    const ConsistencyReport rep = consistency_report(m, f);
    // {c1, d1} spans only the beam subspace, not the whole 5-dim space.
    CHECK_FALSE(rep.complete_to_identity.at("t1"));
    CHECK_FALSE(rep.complete_to_identity.at("t2"));
    const Family f2 =
        enumerate_family_histories(m, {which_path_set(m), detector_fired_or_not_set(m)});
    CHECK(consistency_report(m, f2).complete_to_identity.at("t2"));
}
