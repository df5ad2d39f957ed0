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

#include <sstream>

#include "glab/model.hpp"
#include "glab/qcore.hpp"

using namespace glab;

namespace {

Mat ket_proj(std::initializer_list<cplx> amps) {
    CVec v(static_cast<Eigen::Index>(amps.size()));
    Eigen::Index i = 0;
    for (cplx a : amps) {
        v(i++) = a;
    }
    return pure_state(v);
}

Operator ghz3() {
    CVec v = CVec::Zero(8);
    v(0) = v(7) = 1.0;
    return Operator(pure_state(v), {0, 1, 2});
}

Operator bell() {
    CVec v = CVec::Zero(4);
    v(0) = v(3) = 1.0;
    return Operator(pure_state(v), {0, 1});
}

}  // namespace

TEST(qcore, partial_trace_examples) {
    Operator b = bell();
    Operator r = partial_trace(b, {0});
    EXPECT_LT((r.m - Mat::Identity(2, 2) / 2.0).norm(), 1e-14);

    Rng rng(1);
    Operator ra(random_state(2, rng), {0});
    Operator rb(random_state(4, rng), {1, 2});
    Operator prod = tensor(ra, rb);
    EXPECT_LT((partial_trace(prod, {0}).m - ra.m).norm(), 1e-14);
    EXPECT_LT((partial_trace(prod, {1, 2}).m - rb.m).norm(), 1e-14);

    Operator g = partial_trace(ghz3(), {0, 1});
    Mat expect = Mat::Zero(4, 4);
    expect(0, 0) = expect(3, 3) = 0.5;
    EXPECT_LT((g.m - expect).norm(), 1e-14);

    EXPECT_THROW(partial_trace(b, {5}), LabelError);
}

TEST(qcore, partial_trace_respects_keep_order) {
    Rng rng(2);
    Operator a(random_state(2, rng), {0});
    Operator c(random_state(2, rng), {2});
    Operator b(random_state(2, rng), {1});
    Operator full = canonical(tensor(tensor(a, b), c));
    Operator ca = partial_trace(full, {2, 0});
    EXPECT_LT((ca.m - kron(c.m, a.m)).norm(), 1e-14);
}

TEST(qcore, embed_then_trace) {
    Rng rng(3);
    Operator x(random_hermitian(4, rng), {3, 1});
    Operator e = embed(x, {0, 1, 2, 3});
    Operator back = partial_trace(e, {3, 1});
    EXPECT_LT((back.m - 4.0 * x.m).norm(), 1e-12);
    Operator oracle = reorder(tensor(x, Operator(Mat::Identity(4, 4), {0, 2})), {0, 1, 2, 3});
    EXPECT_LT((e.m - oracle.m).norm(), 1e-14);
}

TEST(qcore, operator_validation) {
    EXPECT_THROW(Operator(Mat::Identity(4, 4), {0, 0}), LabelError);
    EXPECT_THROW(Operator(Mat::Identity(4, 4), {0}), LabelError);
}

TEST(qcore, matrix_function_examples) {
    Mat d = Mat::Zero(2, 2);
    d(1, 1) = std::log(2.0);
    Mat e = matrix_function(d, MatFn::exp());
    EXPECT_NEAR(e(0, 0).real(), 1.0, 1e-14);
    EXPECT_NEAR(e(1, 1).real(), 2.0, 1e-14);

    Mat p = Mat::Zero(2, 2);
    p(0, 0) = 4.0;
    Mat q = matrix_function(p, MatFn::power(-0.5));
    EXPECT_NEAR(q(0, 0).real(), 0.5, 1e-14);
    EXPECT_EQ(q(1, 1), cplx(0.0, 0.0));

    Rng rng(4);
    Mat rho = random_state(4, rng);
    Mat s = matrix_function(rho, MatFn::power(0.5));
    EXPECT_LT((s * s - rho).norm(), 1e-10);

    Mat lg = matrix_function(rho, MatFn::log());
    EXPECT_LT((matrix_function(lg, MatFn::exp()) - rho).norm(), 1e-10);

    Mat nh = Mat::Zero(2, 2);
    nh(0, 1) = 1.0;
    EXPECT_THROW(matrix_function(nh, MatFn::log()), DomainError);
    EXPECT_THROW(matrix_function(nh, MatFn::power(0.5)), DomainError);
}

TEST(qcore, trace_norm_examples) {
    Mat d = Mat::Zero(2, 2);
    d(0, 0) = 0.5;
    d(1, 1) = -0.5;
    EXPECT_NEAR(trace_norm(d), 1.0, 1e-15);
    Rng rng(5);
    Mat rho = random_state(4, rng);
    EXPECT_NEAR(trace_norm(Mat(rho - rho)), 0.0, 1e-15);
    const double s = 1.0 / std::sqrt(2.0);
    Mat diff = ket_proj({1.0, 0.0}) - ket_proj({s, s});
    EXPECT_NEAR(trace_norm(diff), std::sqrt(2.0), 1e-14);
}

TEST(qcore, trace_norm_dominates_variational_samples) {
    Rng rng(6);
    for (int trial = 0; trial < 20; ++trial) {
        Mat x = random_hermitian(8, rng);
        const double tn = trace_norm(x);
        for (int k = 0; k < 10; ++k) {
            Mat o = random_hermitian(8, rng);
            o /= operator_norm(o);
            EXPECT_LE(std::abs((x * o).trace().real()), tn + 1e-12);
        }
        // The sign operator attains the norm.
        Eigh e = eigh(x);
        Mat sgn = e.rebuild(e.w.unaryExpr([](double v) { return v >= 0 ? 1.0 : -1.0; }));
        EXPECT_NEAR((x * sgn).trace().real(), tn, 1e-10);
        Mat nh = ginibre(8, 8, rng);
        EXPECT_NEAR(trace_norm(nh), singular_values(nh).sum(), 1e-12);
    }
}

TEST(qcore, fidelity_examples) {
    Rng rng(7);
    Operator rho(random_state(4, rng), {0, 1});
    EXPECT_NEAR(fidelity(rho, rho), 1.0, 1e-10);
    Operator z0(ket_proj({1.0, 0.0}), {0});
    Operator z1(ket_proj({0.0, 1.0}), {0});
    EXPECT_NEAR(fidelity(z0, z1), 0.0, 1e-15);
    const double s = 1.0 / std::sqrt(2.0);
    Operator plus(ket_proj({s, s}), {0});
    EXPECT_NEAR(fidelity(z0, plus), s, 1e-7);
    EXPECT_THROW(fidelity(Operator(Mat::Identity(2, 2), {0}), z0), DomainError);
}

TEST(qcore, fuchs_van_de_graaf) {
    Rng rng(8);
    for (int k = 0; k < 50; ++k) {
        Operator a(random_state(4, rng, 1 + k % 4), {0, 1});
        Operator b(random_state(4, rng), {0, 1});
        const double f = fidelity(a, b);
        const double t = 0.5 * trace_distance(a, b);
        EXPECT_LE(1.0 - f, t + 1e-9);
        EXPECT_LE(t, std::sqrt(1.0 - f * f) + 1e-9);
    }
}

TEST(qcore, cmi_examples) {
    Rng rng(9);
    Operator prod = tensor(tensor(Operator(random_state(2, rng), {0}), Operator(random_state(2, rng), {1})),
                           Operator(random_state(2, rng), {2}));
    EXPECT_NEAR(cmi(prod, {0}, {1}, {2}), 0.0, 1e-12);
    EXPECT_NEAR(cmi(ghz3(), {0}, {1}, {2}), 1.0, 1e-12);
    EXPECT_THROW(cmi(ghz3(), {0}, {0, 1}, {2}), PartitionError);
    EXPECT_THROW(cmi(ghz3(), {0}, {1}, {}), PartitionError);
}

TEST(qcore, entropy_additive_and_cmi_nonnegative) {
    Rng rng(10);
    for (int k = 0; k < 20; ++k) {
        Operator a(random_state(2, rng), {0});
        Operator b(random_state(4, rng), {1, 2});
        EXPECT_NEAR(entropy(tensor(a, b)), entropy(a) + entropy(b), 1e-9);
        Operator r(random_state(16, rng, 1 + k % 5), {0, 1, 2, 3});
        EXPECT_GE(cmi(r, {0}, {1, 2}, {3}), -1e-9);
        EXPECT_GE(cmi(r, {3, 0}, {1}, {2}), -1e-9);
    }
}

TEST(qcore, apply_gate_examples) {
    Rng rng(11);
    Operator rho(random_state(8, rng), {0, 1, 2});
    Operator same = apply_gate(rho, identity_gate({1}));
    EXPECT_LT((same.m - rho.m).norm(), 1e-14);

    Operator dep = apply_gate(rho, depolarizer_gate({0, 1, 2}));
    EXPECT_LT((dep.m - Mat::Identity(8, 8) / 8.0).norm(), 1e-14);

    Operator reset = apply_gate(bell(), replacement_gate({0}, ket_proj({1.0, 0.0})));
    EXPECT_LT((reset.m - kron(ket_proj({1.0, 0.0}), Mat::Identity(2, 2) / 2.0)).norm(), 1e-14);
}

TEST(qcore, apply_map_matches_conjugation_oracle) {
    Rng rng(12);
    Operator rho(random_state(16, rng), {0, 1, 2, 3});
    Mat u = random_unitary(4, rng);
    ChannelGate g = unitary_gate({3, 1}, u);
    Operator out = apply_map(rho, g);
    Mat big = embed(Operator(u, {3, 1}), {0, 1, 2, 3}).m;
    EXPECT_LT((out.m - big * rho.m * big.adjoint()).norm(), 1e-12);
}

TEST(qcore, erase_and_fresh_output_labels) {
    Rng rng(13);
    Operator rho(random_state(8, rng), {0, 1, 2});
    Mat tau = random_state(4, rng);
    // Erase site 2, keep site 1 as input, emit sites {1, 2} with site 2 fresh.
    Mat s(16, 4);
    Mat id = Mat::Identity(2, 2);
    for (Eigen::Index j = 0; j < 2; ++j) {
        for (Eigen::Index i = 0; i < 2; ++i) {
            Mat e = Mat::Zero(2, 2);
            e(i, j) = 1.0;
            Mat img = Mat::Zero(4, 4);
            // X on site 1 -> Tr_2-prefactor-free replacement X (x) tr-normalized tau marginal.
            img = kron(e, partial_trace(Operator(tau, {1, 2}), {2}).m);
            s.col(i + 2 * j) = vec(img);
        }
    }
    ChannelGate g{{2}, {1}, {1, 2}, s, GateKind::Custom};
    g.validate();
    EXPECT_TRUE(certify_gate(g).ok());
    Operator out = apply_gate(rho, g);
    Operator oracle = canonical(tensor(partial_trace(rho, {0, 1}), partial_trace(Operator(tau, {1, 2}), {2})));
    EXPECT_LT((out.m - oracle.m).norm(), 1e-13);
    (void)id;
}

TEST(qcore, adjoint_map_is_adjoint) {
    Rng rng(14);
    Mat s = superop_from_kraus({random_unitary(4, rng) * 0.6, random_unitary(4, rng) * 0.8});
    ChannelGate g{{0}, {2, 1}, {1, 2}, s, GateKind::Custom};
    g.validate();
    Operator x(ginibre(8, 8, rng), {0, 1, 2});
    Operator y(ginibre(4, 4, rng), {1, 2});
    Operator mx = apply_map(x, g);
    Operator ay = apply_map_adjoint(y, g);
    cplx lhs = (reorder(y, mx.labels).m.adjoint() * mx.m).trace();
    cplx rhs = (ay.m.adjoint() * reorder(x, ay.labels).m).trace();
    EXPECT_LT(std::abs(lhs - rhs), 1e-11);
}

TEST(qcore, channel_certification) {
    Rng rng(15);
    EXPECT_TRUE(certify_gate(identity_gate({0, 1})).ok());
    EXPECT_TRUE(certify_gate(depolarizer_gate({0, 1})).ok());
    EXPECT_TRUE(certify_gate(unitary_gate({0}, random_unitary(2, rng))).ok());
    // Transpose is positive and trace preserving but not completely positive.
    Mat t = Mat::Zero(4, 4);
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            t(j + 2 * i, i + 2 * j) = 1.0;
        }
    }
    auto c = certify_superop(t, 2, 2);
    EXPECT_FALSE(c.cp);
    EXPECT_TRUE(c.tp);
    auto half = certify_superop(0.5 * Mat::Identity(4, 4), 2, 2);
    EXPECT_FALSE(half.tp);
}

TEST(qcore, trace_norm_monotone_under_channels) {
    Rng rng(16);
    for (int k = 0; k < 30; ++k) {
        std::vector<Mat> kraus;
        Mat stack = random_unitary(8, rng).leftCols(4);
        kraus.push_back(stack.topRows(4));
        kraus.push_back(stack.bottomRows(4));
        ChannelGate g = gate_from_superop({k % 3, (k + 1) % 3}, superop_from_kraus(kraus));
        ASSERT_TRUE(certify_gate(g).ok());
        Operator a(random_state(8, rng), {0, 1, 2});
        Operator b(random_state(8, rng, 2), {0, 1, 2});
        EXPECT_LE(trace_distance(apply_gate(a, g), apply_gate(b, g)), trace_distance(a, b) + 1e-9);
    }
}

TEST(qcore, induced_trace_norm_examples) {
    EXPECT_GE(induced_trace_norm(map_from_superop(Mat::Identity(4, 4), 2)), 1.0 - 1e-9);
    ChannelGate dep = depolarizer_gate({0});
    Mat diff = dep.super - Mat::Identity(4, 4);
    EXPECT_GE(induced_trace_norm(map_from_superop(diff, 2)), 1.0 - 1e-12);
    EXPECT_EQ(induced_trace_norm(map_from_superop(Mat::Zero(16, 16), 4)), 0.0);
    // Channels contract: the lower bound never exceeds 1.
    Rng rng(17);
    Mat s = superop_from_kraus({random_unitary(4, rng) * std::sqrt(0.3), random_unitary(4, rng) * std::sqrt(0.7)});
    const double n = induced_trace_norm(map_from_superop(s, 4));
    EXPECT_LE(n, 1.0 + 1e-10);
    EXPECT_GE(n, 1.0 - 1e-9);
    Mat big = Mat::Zero(dim_of(10) * dim_of(10), 1);
    LinearMap huge{static_cast<Eigen::Index>(dim_of(10)), nullptr, nullptr};
    EXPECT_THROW(induced_trace_norm(huge), ResourceError);
}

TEST(qcore, induced_norm_of_gate_map) {
    ChannelGate dep = depolarizer_gate({1});
    LinearMap m = map_from_gate(dep);
    EXPECT_GE(induced_trace_norm(m), 1.0 - 1e-12);
}

TEST(qcore, serialization_round_trip) {
    Rng rng(18);
    Operator x(ginibre(8, 8, rng), {4, 0, 9});
    std::stringstream ss;
    write_operator(ss, x);
    Operator y = read_operator(ss);
    EXPECT_EQ(y.labels, x.labels);
    EXPECT_EQ((y.m - x.m).cwiseAbs().maxCoeff(), 0.0);
    std::stringstream bad("NOPE 1");
    EXPECT_THROW(read_operator(bad), DomainError);
}

// ---------------------------------------------------------------------------
// model

TEST(model, lattice_distances) {
    Lattice ring = build_lattice(1, {8}, true);
    EXPECT_EQ(ring.distance(0, 4), 4);
    EXPECT_EQ(ring.distance(0, 7), 1);
    Lattice sq = build_lattice(2, {3, 3}, false);
    EXPECT_EQ(sq.size(), 9);
    EXPECT_EQ(sq.distance(sq.site({0, 0}), sq.site({2, 2})), 4);
    // 2x2 torus: wrap makes every axis step length 1.
    Lattice torus = build_lattice(2, {2, 2}, true);
    EXPECT_EQ(torus.distance(torus.site({0, 0}), torus.site({1, 1})), 2);
    EXPECT_EQ(torus.distance(torus.site({0, 0}), torus.site({0, 1})), 1);
    EXPECT_THROW(build_lattice(1, {0}, false), GeometryError);
}

TEST(model, lattice_metric_axioms) {
    Lattice lat = build_lattice(2, {4, 3}, true);
    for (int x = 0; x < lat.size(); ++x) {
        EXPECT_EQ(lat.distance(x, x), 0);
        for (int y = 0; y < lat.size(); ++y) {
            EXPECT_EQ(lat.distance(x, y), lat.distance(y, x));
            for (int z = 0; z < lat.size(); ++z) {
                EXPECT_LE(lat.distance(x, z), lat.distance(x, y) + lat.distance(y, z));
            }
        }
    }
}

TEST(model, dilation_invariants) {
    Lattice lat = build_lattice(2, {5, 5}, false);
    Region a = {lat.site({2, 2}), lat.site({2, 3})};
    Region d = dilate(lat, a, 2);
    EXPECT_TRUE(contains_all(d, a));
    for (int x : d) {
        EXPECT_LE(region_distance(lat, {x}, a), 2);
    }
    EXPECT_EQ(region_diameter(lat, a), 1);
}

TEST(model, annulus_examples) {
    Lattice chain = build_lattice(1, {12}, false);
    auto p = annulus_partition(chain, 6, 1, 2, 2);
    EXPECT_EQ(p.a.size(), 3u);
    EXPECT_EQ(region_distance(chain, p.a, p.c), 5);

    auto q = annulus_partition(chain, 6, 1, 0, 0);
    EXPECT_TRUE(q.b().empty());
    EXPECT_EQ(region_distance(chain, q.a, q.c), 1);

    Lattice sq = build_lattice(2, {3, 3}, false);
    auto r = annulus_partition(sq, sq.site({1, 1}), 0, 1, 0);
    EXPECT_EQ(r.a, Region({sq.site({1, 1})}));
    Region corners = make_region({sq.site({0, 0}), sq.site({0, 2}), sq.site({2, 0}), sq.site({2, 2})});
    EXPECT_EQ(r.c, corners);

    EXPECT_THROW(annulus_partition(chain, 6, 3, 3, 3), GeometryError);
}

TEST(model, annulus_separates) {
    Lattice lat = build_lattice(2, {6, 6}, true);
    auto p = annulus_partition(lat, lat.site({2, 3}), 1, 1, 0);
    // Every step between neighbours changes distance by one, so a path from A to
    // C must cross B when d(A, C) exceeds one.
    EXPECT_GE(region_distance(lat, p.a, p.c), 2);
    Region all = label_union(label_union(p.a, p.b()), p.c);
    EXPECT_EQ(all, lat.all_sites());
}

TEST(model, gibbs_examples) {
    InteractionFamily f;
    f.lattice = build_lattice(1, {1}, false);
    f.terms.push_back({{0}, pauli('Z'), 1.0, "Z"});
    f.validate();
    Operator rho = gibbs_state(f);
    EXPECT_NEAR(rho.m(1, 1).real(), std::exp(1.0) / (2 * std::cosh(1.0)), 1e-14);
    EXPECT_NEAR(rho.m(1, 1).real(), 0.8807970779778823, 1e-12);

    Operator inf = gibbs_state(scaled(tfim_chain(4, 1.0, 1.0, false), 0.0));
    EXPECT_LT((inf.m - Mat::Identity(16, 16) / 16.0).norm(), 1e-14);

    InteractionFamily two = ising_chain(2, 1.0, 0.0, false);
    Operator r2 = gibbs_state(two);
    const double w = std::exp(1.0) / (2 * std::exp(1.0) + 2 * std::exp(-1.0));
    EXPECT_NEAR(r2.m(0, 0).real(), w, 1e-14);
    EXPECT_NEAR(r2.m(3, 3).real(), w, 1e-14);

    EXPECT_THROW(gibbs_state(ising_chain(14, 1.0, 0.0, false)), ResourceError);
}

TEST(model, gibbs_is_state_and_symmetric) {
    InteractionFamily f = tfim_chain(6, 0.7, 0.4, true);
    Operator rho = gibbs_state(f);
    EXPECT_TRUE(check_state(rho.m).ok(1e-10));
    Mat g = pauli_string("XXXXXX");
    EXPECT_LT((g * rho.m - rho.m * g).norm(), 1e-10);
}

TEST(model, ground_state_limit) {
    InteractionFamily f = tfim_chain(4, 0.5, 1.0, false);
    Operator gs = ground_state(f);
    double prev = 1e9;
    for (double s : {2.0, 4.0, 8.0, 16.0, 32.0}) {
        double d = trace_distance(gibbs_state(scaled(f, s)), gs);
        EXPECT_LT(d, prev);
        prev = d;
    }
    EXPECT_LT(prev, 1e-6);
}

TEST(model, family_validation) {
    InteractionFamily f;
    f.lattice = build_lattice(1, {3}, false);
    f.terms.push_back({{0}, 2.0 * pauli('Z'), 1.0, "big"});
    EXPECT_THROW(f.validate(), DomainError);
    InteractionFamily g;
    g.lattice = build_lattice(1, {3}, false);
    g.terms.push_back({{0}, pauli('Z') + cplx(0, 1) * pauli('X'), 1.0, "nh"});
    EXPECT_THROW(g.validate(), DomainError);
    EXPECT_NEAR(tfim_chain(4, 0.3, -0.9, false).beta_sup(), 0.9, 0);
}

TEST(model, block_partition_examples) {
    InteractionFamily f;
    f.lattice = build_lattice(1, {12}, true);
    for (int i = 0; i < 12; ++i) {
        f.terms.push_back({make_region({i, (i + 2) % 12}), -pauli_string("ZZ"), 1.0, "J2"});
    }
    f.validate();
    EXPECT_EQ(f.range, 2);
    BlockPartition bp = block_partition(f.lattice, f, 2);
    EXPECT_EQ(bp.blocks.size(), 6u);
    for (const auto &b : bp.blocks) {
        EXPECT_EQ(region_diameter(f.lattice, b.sites), 4);
    }
    Region ov = label_intersection(bp.blocks[0].sites, bp.blocks[1].sites);
    EXPECT_EQ(region_diameter(f.lattice, make_region(ov)), 2);

    // Partition-of-terms identity.
    size_t assigned = 0;
    Mat h = Mat::Zero(1 << 12, 1 << 12);
    for (const auto &b : bp.blocks) {
        assigned += b.terms.size();
    }
    EXPECT_EQ(assigned, f.terms.size());

    InteractionFamily wide;
    wide.lattice = build_lattice(1, {8}, false);
    wide.terms.push_back({{0, 3}, -pauli_string("ZZ"), 1.0, "wide"});
    wide.validate();
    EXPECT_THROW(block_partition(wide.lattice, wide, 1), PartitionError);

    InteractionFamily small = tfim_chain(4, 1.0, 1.0, false);
    BlockPartition one = block_partition(small.lattice, small, 4);
    EXPECT_EQ(one.blocks.size(), 1u);
    EXPECT_EQ(one.blocks[0].terms.size(), small.terms.size());
}

TEST(model, block_partition_rebuilds_hamiltonian) {
    InteractionFamily f = tfim_chain(8, 0.4, 0.9, false);
    BlockPartition bp = block_partition(f.lattice, f, 1);
    InteractionFamily rebuilt;
    rebuilt.lattice = f.lattice;
    std::vector<int> seen(f.terms.size(), 0);
    for (const auto &b : bp.blocks) {
        for (int t : b.terms) {
            rebuilt.terms.push_back(f.terms[t]);
            ++seen[t];
            EXPECT_TRUE(contains_all(b.sites, f.terms[t].support));
        }
    }
    for (int s : seen) {
        EXPECT_EQ(s, 1);
    }
    EXPECT_LT((hamiltonian(rebuilt).m - hamiltonian(f).m).norm(), 1e-13);
}

TEST(model, local_algebra_examples) {
    InteractionFamily paulis;
    paulis.lattice = build_lattice(1, {3}, false);
    for (int i = 0; i < 3; ++i) {
        for (char c : {'X', 'Y', 'Z'}) {
            paulis.terms.push_back({{i}, pauli(c), 1.0, std::string(1, c)});
        }
    }
    paulis.validate();
    EXPECT_EQ(local_algebra(paulis, {0, 1}).size(), 16u);

    InteractionFamily ising = ising_chain(4, 1.0, 0.5, false);
    OperatorBasis alg = local_algebra(ising, {1, 2});
    EXPECT_EQ(alg.size(), 4u);
    for (const auto &e : alg.elements) {
        EXPECT_TRUE(is_diagonal(e.unaryExpr([](cplx z) { return std::abs(z) < 1e-14 ? cplx(0) : z; })));
    }
    EXPECT_EQ(local_algebra(ising, {}).size(), 1u);
    EXPECT_THROW(local_algebra(tfim_chain(8, 1, 1, false), {0, 1, 2, 3, 4, 5, 6}), ResourceError);
}

TEST(model, local_algebra_closed) {
    InteractionFamily f = tfim_chain(5, 1.0, 0.7, false);
    OperatorBasis alg = local_algebra(f, {1, 2});
    for (const auto &a : alg.elements) {
        EXPECT_LT(alg.residual(a.adjoint()), 1e-10);
        for (const auto &b : alg.elements) {
            EXPECT_LT(alg.residual(a * b), 1e-10);
        }
    }
}
