// Copyright 2026 The glab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include "glab/memory.hpp"
#include "glab/stabilizer.hpp"

using namespace glab;

namespace {

PauliWord random_word(size_t n, Rng &rng) {
    std::uniform_int_distribution<int> c(0, 3);
    PauliWord w(n);
    for (size_t j = 0; j < n; ++j) {
        const int k = c(rng);
        w.x.set(j, k == 1 || k == 2);
        w.z.set(j, k == 2 || k == 3);
    }
    w.phase = c(rng);
    return w;
}

cplx dense_value(const Operator &rho, const PauliWord &w) {
    return (pauli_matrix(w) * rho.m).trace();
}

}  // namespace

TEST(stabilizer, products_and_commutation_match_dense) {
    Rng rng(3);
    for (int trial = 0; trial < 60; ++trial) {
        PauliWord a = random_word(4, rng), b = random_word(4, rng);
        const Mat ma = pauli_matrix(a), mb = pauli_matrix(b);
        EXPECT_LT((pauli_matrix(a * b) - ma * mb).norm(), 1e-12);
        const bool dense_commute = (ma * mb - mb * ma).norm() < 1e-12;
        EXPECT_EQ(commute(a, b), dense_commute);
    }
    EXPECT_EQ(pauli_string_of(pauli_word("-XYZI")), "-XYZI");
    EXPECT_LT((pauli_matrix(pauli_word("XYZ")) - pauli_string("XYZ")).norm(), 1e-14);
}

TEST(stabilizer, gf2_rank_and_decomposition) {
    std::vector<BitVec> rows(3, BitVec(70));
    rows[0].set(0);
    rows[0].set(65);
    rows[1].set(65);
    rows[2].set(0);
    EXPECT_EQ(gf2_rank(rows), 2u);
    Gf2Basis b(70, 3);
    for (size_t i = 0; i < rows.size(); ++i) {
        BitVec t(3);
        t.set(i);
        b.insert(rows[i], t);
    }
    BitVec target(70);
    target.set(0);
    auto d = b.decompose(target);
    ASSERT_TRUE(d.has_value());
    BitVec acc(70);
    for (size_t i = 0; i < 3; ++i) {
        if (d->get(i)) {
            acc ^= rows[i];
        }
    }
    EXPECT_TRUE(acc == target);
    BitVec other(70);
    other.set(3);
    EXPECT_FALSE(b.contains(other));
}

TEST(stabilizer, expectation_matches_dense_gibbs) {
    Rng rng(11);
    std::uniform_real_distribution<double> beta(0.2, 1.5);
    InteractionFamily toric = toric2d(2, 2, 1.0, 1.0, true);
    std::vector<double> b(toric.terms.size());
    for (double &x : b) {
        x = beta(rng);
    }
    toric = with_betas(toric, b);
    std::vector<InteractionFamily> models = {toric, ising_chain(6, 0.7, 0.0, false)};
    for (const auto &f : models) {
        StabilizerModel m = stabilizer_from_family(f);
        Operator rho = gibbs_state(f);
        std::uniform_int_distribution<int> coin(0, 1);
        for (int trial = 0; trial < 100; ++trial) {
            PauliWord w = random_word(m.n, rng);
            if (trial % 2 == 0) {
                // Group elements, with a random phase.
                w = PauliWord(m.n);
                w.phase = trial % 4;
                for (const auto &g : m.generators) {
                    if (coin(rng)) {
                        w = w * g;
                    }
                }
            }
            StabExpectation e = stab_expectation(m, w);
            EXPECT_LT(std::abs(e.value - dense_value(rho, w)), 1e-10) << pauli_string_of(w);
        }
    }
}

TEST(stabilizer, known_values) {
    InteractionFamily f = toric2d(2, 2, 1.0, 1.0, true);
    StabilizerModel m = stabilizer_from_family(f);
    EXPECT_NEAR(stab_expectation(m, m.generators[0]).value.real(), 0.761594155955765, 1e-12);
    PauliWord single(m.n);
    single.z.set(0);
    StabExpectation zero = stab_expectation(m, single);
    EXPECT_FALSE(zero.in_group);
    EXPECT_EQ(zero.value, cplx(0.0));
    EXPECT_EQ(stab_expectation(m, PauliWord(m.n)).value, cplx(1.0));
    PauliWord neg = m.generators[0];
    neg.phase = (neg.phase + 2) % 4;
    StabExpectation e = stab_expectation(m, neg);
    EXPECT_TRUE(e.phase_flag);
    EXPECT_NEAR(e.value.real(), -std::tanh(1.0), 1e-12);
    PauliWord minus_id(m.n);
    minus_id.phase = 2;
    EXPECT_TRUE(stab_expectation(m, minus_id).phase_flag);
}

TEST(stabilizer, disjoint_subsets_factorize) {
    InteractionFamily f = toric2d(2, 2, 0.8, 1.3, true);
    StabilizerModel m = stabilizer_from_family(f);
    PauliWord a = m.generators[0] * m.generators[3];
    PauliWord b = m.generators[1] * m.generators[4];
    const double ab = stab_expectation(m, a * b).value.real();
    const double pa = stab_expectation(m, a).value.real(), pb = stab_expectation(m, b).value.real();
    // Equal up to the rounding of the tanh products.
    EXPECT_NEAR(ab - pa * pb, 0.0, 1e-15);
}

TEST(stabilizer, rejects_invalid_models) {
    EXPECT_THROW(stabilizer_from_family(tfim_chain(3, 1.0, 1.0, false)), DomainError);
    EXPECT_THROW(stabilizer_from_family(heisenberg_chain(3, 1.0, false)), DomainError);
    EXPECT_THROW(stabilizer_from_family(toric2d(2, 2, 1.0, 1.0, false)), DomainError);
}

TEST(stabilizer, loop_correlator_matches_dense) {
    InteractionFamily f = toric2d(2, 2, 1.0, 1.0, true);
    std::vector<int> p = plaquette_terms(f);
    ASSERT_EQ(p.size(), 3u);
    LoopRegions reg{{p[0]}, {p[0], p[1]}};
    LoopCorrelatorReport r = toric_loop_correlator(f, reg, 1.0, 3.0);
    EXPECT_LT(r.dense_residual, 1e-10);
    EXPECT_NEAR(r.o1, std::tanh(1.0), 1e-12);
    EXPECT_NEAR(r.o12, std::tanh(3.0), 1e-12);
    EXPECT_GE(r.eps_ground, 0.0);
    EXPECT_GE(r.connected, r.lower_bound);

    LoopCorrelatorReport same = toric_loop_correlator(f, reg, 0.7, 0.7, false);
    const double t = std::tanh(0.7);
    EXPECT_NEAR(same.connected, t * (1.0 - t * t), 1e-12);
    EXPECT_GT(same.connected, 0.0);
    LoopCorrelatorReport cold = toric_loop_correlator(f, reg, 30.0, 30.0, false);
    EXPECT_LT(std::abs(cold.connected), 1e-12);
    EXPECT_THROW(toric_loop_correlator(f, LoopRegions{{p[0], p[2]}, {p[0], p[1]}}, 1.0, 1.0), GeometryError);
}

TEST(stabilizer, homological_checks_commute) {
    for (const auto &hc : {homological_code({3, 3}, true, 1), homological_code({3, 3, 3, 3}, true, 2),
                           homological_code({4, 4}, false, 1)}) {
        const auto &g = hc.model.generators;
        for (size_t i = 0; i < g.size(); ++i) {
            for (size_t j = i + 1; j < g.size(); ++j) {
                ASSERT_TRUE(commute(g[i], g[j])) << hc.model.names[i] << " " << hc.model.names[j];
            }
        }
    }
    HomologicalCode t4 = homological_code({3, 3, 3, 3}, true, 2);
    EXPECT_EQ(t4.model.n, 6u * 81u);
    EXPECT_EQ(t4.z_checks, 4u * 81u);
    EXPECT_EQ(t4.model.generators.size(), 8u * 81u);
    EXPECT_EQ(t4.model.generators[0].support().size(), 6u);
    EXPECT_EQ(t4.model.generators.back().support().size(), 6u);
}

TEST(stabilizer, four_dimensional_ball_complement_is_generated) {
    HomologicalCode hc = homological_code({3, 3, 3, 3}, true, 2);
    const int center = hc.complex.lattice().site({1, 1, 1, 1});
    std::vector<int> a = cell_ball(hc, center, 1);
    EXPECT_EQ(a.size(), 24u);
    AlgebraCheck c = homological_algebra_check(hc, a);
    EXPECT_TRUE(c.equal);
    EXPECT_EQ(c.dim_traced, c.dim_generated);
    EXPECT_FALSE(c.witness.has_value());
    EXPECT_TRUE(homological_algebra_check(hc, {}).equal);
}

TEST(stabilizer, planar_patch_has_loop_witness) {
    HomologicalCode hc = homological_code({5, 5}, false, 1);
    const int center = hc.complex.lattice().site({2, 2});
    std::vector<int> a = cell_ball(hc, center, 1);
    ASSERT_EQ(a.size(), 4u);
    AlgebraCheck c = homological_algebra_check(hc, a);
    EXPECT_FALSE(c.equal);
    ASSERT_TRUE(c.witness.has_value());
    const PauliWord &w = *c.witness;
    EXPECT_FALSE(w.x.any());
    EXPECT_EQ(w.z.count(), 8);
    for (int s : a) {
        EXPECT_FALSE(w.z.get(s));
    }
    for (const auto &g : hc.model.generators) {
        EXPECT_TRUE(commute(w, g));
    }
    // On the torus the same loop is a product of the remaining plaquettes.
    HomologicalCode torus = homological_code({5, 5}, true, 1);
    std::vector<int> ta = cell_ball(torus, torus.complex.lattice().site({2, 2}), 1);
    EXPECT_TRUE(homological_algebra_check(torus, ta).equal);
}

TEST(stabilizer, algebra_check_respects_cap) {
    HomologicalCode hc = homological_code({3, 3}, true, 1);
    EXPECT_THROW(complement_algebra_check(hc.model.generators, hc.model.n, {0}, 10), ResourceError);
}

TEST(stabilizer, classical_disorder_parameter_vanishes) {
    InteractionFamily f = ising_chain(6, 0.9, 0.0, true);
    for (Region x : {Region{0}, Region{0, 1}, Region{1, 2, 3}}) {
        EXPECT_EQ(ising_disorder_parameter(f, x), 0.0);
    }
    EXPECT_THROW(ising_disorder_parameter(ising_chain(4, 1.0, 0.5, true), {0}), DomainError);
}

TEST(stabilizer, disorder_matches_channel_gap) {
    InteractionFamily f = tfim_chain(6, 1.0, 0.6, true);
    Operator rho = gibbs_state(f);
    double prev = 3.0;
    for (Region x : {Region{0}, Region{0, 1}, Region{0, 1, 2}}) {
        DisorderIdentity d = disorder_identity(rho, x);
        EXPECT_NEAR(d.disorder, d.channel_gap, 1e-9);
        EXPECT_LT(d.disorder, prev);
        prev = d.disorder;
    }
    EXPECT_LT(ising_disorder_parameter(scaled(f, 0.0), {0, 1}), 1e-14);
    // Both channels are trace preserving and fix symmetric states.
    ChannelGate sym = symmetric_depolarizer({0, 1});
    EXPECT_TRUE(certify_superop(sym.super, 4, 4, 1e-10).ok());
}

TEST(memory, repetition_code_basis) {
    QuantumCode c = code_from_family(ising_chain(3, 1.0, 0.0, true));
    EXPECT_EQ(c.rank, 2);
    ASSERT_EQ(c.basis_names.size(), 2u);
    EXPECT_EQ(c.basis_names[0], "|000>");
    EXPECT_EQ(c.basis_names[1], "|111>");
    EXPECT_EQ(informationally_complete_codewords(c).size(), 4u);
    EXPECT_THROW(code_from_projector(Operator(Mat(0.5 * Mat::Identity(2, 2)), {0})), DomainError);
}

TEST(memory, certificates_agree_with_dense_check) {
    Lattice open = build_lattice(1, {3}, false);
    StabilizerModel m;
    m.n = 3;
    m.generators = {pauli_word("ZZI"), pauli_word("IZZ")};
    m.betas = {1.0, 1.0};
    QuantumCode code = code_from_stabilizers(m);
    Rng rng(5);
    for (int ell = 0; ell <= 2; ++ell) {
        CodeCertificate gf2 = certify_stabilizer_code(m, open, ell);
        CodeCertificate dense = certify_code(code, open, ell, 1 << 12, rng);
        EXPECT_EQ(gf2.certified, dense.certified) << ell;
        EXPECT_TRUE(dense.exhaustive);
    }
    // Z on one site is logical for the bit-flip code.
    CodeCertificate c0 = certify_stabilizer_code(m, open, 0);
    EXPECT_FALSE(c0.certified);
    EXPECT_EQ(c0.witness.find('X'), std::string::npos);

    // The full space certifies nothing.
    QuantumCode full = code_from_projector(Operator(Mat(Mat::Identity(4, 4)), {0, 1}));
    CodeCertificate none = certify_code(full, build_lattice(1, {2}, false), 0, 64, rng);
    EXPECT_FALSE(none.certified);
}

TEST(memory, toric_certificate_and_witness) {
    InteractionFamily f = toric2d(2, 2, 1.0, 1.0, false);
    StabilizerModel m;
    m.n = 8;
    for (const auto &t : f.terms) {
        std::string s(8, 'I');
        for (int q : t.support) {
            s[q] = t.name[0] == 'P' ? 'Z' : 'X';
        }
        m.generators.push_back(pauli_word(s));
        m.betas.push_back(1.0);
    }
    EXPECT_EQ(m.rank(), 6u);
    CodeCertificate c0 = certify_stabilizer_code(m, f.lattice, 0);
    EXPECT_TRUE(c0.certified);
    const int ell = certified_diameter(m, f.lattice, 3);
    CodeCertificate fail = certify_stabilizer_code(m, f.lattice, ell + 1);
    EXPECT_FALSE(fail.certified);
    EXPECT_GE(fail.witness_support.size(), 2u);
}

TEST(memory, small_run_satisfies_bounds) {
    InteractionFamily f = ising_chain(6, 1.0, 0.0, true);
    MemoryOptions opt;
    opt.times = {0.0, 0.5, 1.0};
    opt.circuit.delta = 0.5;
    MemoryRun run = memory_experiment(f, opt);
    ASSERT_EQ(run.codewords.size(), 4u);
    EXPECT_LE(run.steady_residual, 1e-8);
    for (const auto &w : run.codewords) {
        EXPECT_DOUBLE_EQ(w.eps[0], w.roundtrip);
        EXPECT_LE(w.eps[0], run.encoder.circuit.size() * w.eps_lr + 1e-8);
    }
    MemoryAudit a = memory_bound_audit(run);
    for (const auto &l : a.lines) {
        EXPECT_TRUE(l.pass) << l.name << " " << l.lhs << " > " << l.rhs;
    }
    EXPECT_EQ(memory_csv(run).substr(0, 22), "t,codeword,eps_t,bound");
}

TEST(memory, identity_generator_keeps_error_constant) {
    InteractionFamily f = ising_chain(6, 1.0, 0.0, true);
    MemoryOptions opt;
    opt.times = {0.0, 1.0, 4.0};
    opt.circuit.delta = 0.5;
    opt.generator = LocalLindbladian{};
    MemoryRun run = memory_experiment(f, opt);
    for (const auto &w : run.codewords) {
        EXPECT_EQ(w.eps[1], w.eps[0]);
        EXPECT_EQ(w.eps[2], w.eps[0]);
        EXPECT_EQ(w.generator_norm, 0.0);
    }
}

TEST(memory, infinite_temperature_target_loses_information) {
    InteractionFamily f = ising_chain(6, 1.0, 0.0, true);
    MemoryOptions cold;
    cold.times = {0.0, 1.0};
    cold.circuit.delta = 0.5;
    MemoryOptions hot = cold;
    hot.target = std::vector<double>(f.terms.size(), 0.0);
    MemoryRun a = memory_experiment(f, cold);
    MemoryRun b = memory_experiment(f, hot);
    // Basis codewords survive the cold encoder; superpositions lose their
    // coherence in the partial traces of any classical code.
    EXPECT_LT(a.codewords[0].eps[1], b.codewords[0].eps[1]);
    EXPECT_NEAR(a.codewords[2].eps[0], 1.0, 1e-4);
    EXPECT_TRUE(memory_bound_audit(b).pass());
}

TEST(memory, generator_must_fix_target) {
    InteractionFamily f = ising_chain(6, 1.0, 0.0, true);
    MemoryOptions opt;
    opt.times = {0.0};
    opt.circuit.delta = 0.5;
    opt.generator = heatbath_generator(scaled(f, 0.3), 1);
    EXPECT_THROW(memory_experiment(f, opt), ContractError);
}
