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

#include "glab/lindblad.hpp"

using namespace glab;

namespace {

LinearPath scale_path(const InteractionFamily &f, double from, double to) {
    LinearPath p;
    for (const auto &t : f.terms) {
        p.from.push_back(t.beta * from);
        p.to.push_back(t.beta * to);
    }
    return p;
}

// exp(tau L) is CPTP iff its Choi matrix is PSD and it preserves the trace.
void expect_valid_generator(const LindbladTerm &t) {
    Mat s = term_superop(t);
    const Eigen::Index d = static_cast<Eigen::Index>(dim_of(t.support().size()));
    for (double tau : {0.1, 1.0}) {
        Mat e = matrix_function(Mat(tau * s), MatFn::exp());
        ChannelCertificate c = certify_superop(e, d, d, 1e-8);
        EXPECT_TRUE(c.ok()) << t.name << " tau " << tau << " min eig " << c.min_choi_eigenvalue;
    }
}

}  // namespace

TEST(lindblad, constant_path_gives_zero_generator) {
    InteractionFamily f = ising_chain(6, 0.3, 0.2, true);
    LinearPath p{f.betas(), f.betas()};
    CommutingFlowGenerator g = commuting_flow_generator(f, p, 0.5, 1);
    EXPECT_TRUE(g.generator.empty());
    FlowResult fr = commuting_flow(f, p, 1, {4, 1, 1e-4, false}).flow;
    EXPECT_EQ(fr.error, 0.0);
}

TEST(lindblad, rejects_non_commuting_family) {
    InteractionFamily f = tfim_chain(4, 0.3, 0.3, false);
    EXPECT_GT(max_commutator(f), 1.0);
    EXPECT_THROW(commuting_flow_generator(f, scale_path(f, 1.0, 2.0), 0.5, 1), DomainError);
    EXPECT_THROW(heatbath_generator(f, 1), DomainError);
}

TEST(lindblad, derivative_matches_finite_difference) {
    InteractionFamily f = ising_chain(6, 1.0, 0.5, true);
    LinearPath p = scale_path(f, 0.2, 0.7);
    for (double s : {0.0, 0.4, 1.0}) {
        Operator d = gibbs_derivative(f, p, s);
        FiniteDifference fd = gibbs_derivative_fd(f, p, s);
        EXPECT_LT(trace_distance(d, fd.derivative), 1e-7) << s;
        EXPECT_LT(fd.richardson_gap, 1e-7);
        EXPECT_LT(std::abs(d.m.trace()), 1e-12);
    }
}

TEST(lindblad, pointwise_residual_below_covariance) {
    InteractionFamily f = ising_chain(6, 1.0, 0.5, true);
    LinearPath p = scale_path(f, 0.2, 0.5);
    for (int r : {0, 1}) {
        for (double s : {0.0, 0.5, 1.0}) {
            PointwiseCheck c = flow_pointwise_check(f, p, s, r);
            EXPECT_TRUE(c.holds) << "r " << r << " s " << s << ": " << c.residual << " > " << c.bound;
            EXPECT_LE(c.max_term_norm, 4.0 + 1e-6);
            EXPECT_GT(c.max_term_norm, 0.0);
            EXPECT_LT(c.fd_gap, 1e-7);
        }
    }
}

TEST(lindblad, exact_when_support_covers_system) {
    InteractionFamily f = ising_chain(5, 1.0, 0.5, true);
    LinearPath p = scale_path(f, 0.2, 0.5);
    PointwiseOptions opt;
    opt.term_norms = false;
    PointwiseCheck c = flow_pointwise_check(f, p, 0.3, 2, opt);
    EXPECT_EQ(c.bound, 0.0);
    EXPECT_LT(c.residual, 1e-9);
}

TEST(lindblad, sign_flip_and_degenerate_terms) {
    InteractionFamily f = ising_chain(4, 0.5, 0.5, true);
    f.terms.push_back({{0}, Mat::Zero(2, 2), 0.1, "null"});
    LinearPath p{f.betas(), f.betas()};
    for (size_t z = 0; z < f.terms.size(); ++z) {
        p.to[z] = p.from[z] + (z % 2 ? 0.3 : -0.3);
    }
    CommutingFlowGenerator g = commuting_flow_generator(f, p, 0.5, 2);
    int dropped = 0;
    for (const auto &t : g.terms) {
        dropped += t.dropped;
        if (!t.dropped) {
            EXPECT_GT(t.weight, 0.0);
        }
    }
    EXPECT_EQ(dropped, 1);
    EXPECT_EQ(g.generator.notes.size(), 1u);
    Operator d = gibbs_derivative(f, p, 0.5);
    Operator l = apply_lindbladian(g.generator, g.rho);
    // Sign-flipped terms reproduce the derivative once every enlarged support covers the ring.
    EXPECT_LT(trace_distance(d, l), 1e-9);
}

TEST(lindblad, generator_terms_are_lindbladians) {
    InteractionFamily f = ising_chain(6, 1.0, 0.5, true);
    CommutingFlowGenerator g = commuting_flow_generator(f, scale_path(f, 0.2, 0.5), 0.5, 0);
    ASSERT_FALSE(g.generator.empty());
    for (const auto &t : g.generator.terms) {
        expect_valid_generator(t);
    }
    LocalLindbladian hb = heatbath_generator(f, 1);
    for (const auto &t : hb.terms) {
        expect_valid_generator(t);
    }
}

TEST(lindblad, classical_transition_matches_dense_action) {
    InteractionFamily f = ising_chain(5, 0.7, 0.3, false);
    LocalLindbladian hb = heatbath_generator(f, 2);
    Operator rho = gibbs_state(f);
    Mat q = classical_generator(hb, rho.labels);
    Rng rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    CVec p(rho.dim());
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        p(i) = u(rng);
    }
    p /= p.sum();
    Operator x(Mat(p.asDiagonal()), rho.labels);
    Operator lx = apply_lindbladian(hb, x);
    EXPECT_LT((lx.m.diagonal() - q * p).norm(), 1e-12);
    EXPECT_LT((lx.m - Mat(lx.m.diagonal().asDiagonal())).norm(), 1e-12);
    // Columns of a generator sum to zero.
    EXPECT_LT((q.colwise().sum()).norm(), 1e-12);
}

TEST(lindblad, flow_error_decreases_with_radius) {
    InteractionFamily f = ising_chain(6, 1.0, 0.5, true);
    LinearPath p = scale_path(f, 0.2, 0.5);
    std::vector<double> errs;
    for (int r : {0, 1}) {
        CommutingFlow fl = commuting_flow(f, p, r);
        EXPECT_TRUE(fl.flow.converged);
        errs.push_back(fl.flow.error);
    }
    EXPECT_LT(errs[1], errs[0]);
}

TEST(lindblad, step_halving_converges) {
    InteractionFamily f = ising_chain(6, 1.0, 0.5, true);
    LinearPath p = scale_path(f, 0.2, 0.5);
    auto gen = [&](double s) { return commuting_flow_generator(f, p, s, 0).generator; };
    auto exact = [&](double s) { return gibbs_state(with_betas(f, p.at(s))); };
    FlowResult a = flow_once(gen, exact(0.0), exact, 64, true);
    FlowResult b = flow_once(gen, exact(0.0), exact, 128, true);
    EXPECT_LT(std::abs(a.error - b.error), 1e-5);
}

TEST(lindblad, taylor_and_classical_flows_agree) {
    InteractionFamily f = ising_chain(4, 1.0, 0.5, true);
    LinearPath p = scale_path(f, 0.2, 0.5);
    auto gen = [&](double s) { return commuting_flow_generator(f, p, s, 0).generator; };
    auto exact = [&](double s) { return gibbs_state(with_betas(f, p.at(s))); };
    FlowResult a = flow_once(gen, exact(0.0), exact, 8, true);
    FlowResult b = flow_once(gen, exact(0.0), exact, 8, false);
    EXPECT_LT(trace_distance(a.final_state, b.final_state), 1e-10);
}

TEST(lindblad, heatbath_is_frustration_free) {
    InteractionFamily f = ising_chain(6, 0.8, 0.3, true);
    Operator rho = gibbs_state(f);
    for (int block : {1, 2}) {
        LocalLindbladian hb = heatbath_generator(f, block, 1.0, &rho);
        EXPECT_EQ(hb.terms.size(), 6u);
        EXPECT_LT(steady_state_residual(hb, rho), 1e-9);
    }
}

TEST(lindblad, infinite_temperature_heatbath_depolarizes) {
    InteractionFamily f = ising_chain(4, 0.0, 0.0, true);
    LocalLindbladian hb = heatbath_generator(f, 1);
    for (const auto &t : hb.terms) {
        ASSERT_EQ(t.map.erase.size(), 1u);
        const int x = t.map.erase[0];
        Labels sup = t.support();
        Rng rng(9);
        Operator in(random_state(8, rng), sup);
        Operator expect = tensor(Operator(Mat::Identity(2, 2) / 2.0, {x}), partial_trace(in, label_minus(sup, {x})));
        EXPECT_LT(trace_distance(apply_map(in, t.map), expect), 1e-12);
    }
    Operator mixed(Mat::Identity(16, 16) / 16.0, {0, 1, 2, 3});
    EXPECT_LT(steady_state_residual(hb, mixed), 1e-14);
}

TEST(lindblad, heatbath_relaxes_to_gibbs) {
    InteractionFamily f = ising_chain(6, 0.6, 0.2, false);
    Operator rho = gibbs_state(f);
    LocalLindbladian hb = heatbath_generator(f, 1, 1.0, &rho);
    Mat q = classical_generator(hb, rho.labels);
    CVec p = CVec::Zero(rho.dim());
    p(rho.dim() - 1) = 1.0;  // all spins down
    p = matrix_function(Mat(60.0 * q), MatFn::exp()) * p;
    Mat zz = embed(Operator(pauli_string("ZZ"), {2, 3}), rho.labels).m;
    Mat z = embed(Operator(pauli('Z'), {0}), rho.labels).m;
    const cplx want_zz = (zz * rho.m).trace(), want_z = (z * rho.m).trace();
    const cplx got_zz = (zz.diagonal().transpose() * p)(0), got_z = (z.diagonal().transpose() * p)(0);
    EXPECT_LT(std::abs(got_zz - want_zz), 1e-4);
    EXPECT_LT(std::abs(got_z - want_z), 1e-4);
}

TEST(lindblad, linear_growth_trivial_cases) {
    Rng rng(1);
    Mat l = random_lindblad_superop(4, 2, rng);
    Mat rho = random_state(4, rng);
    LinearGrowthCheck c0 = linear_growth_check(l, rho, 0.0);
    EXPECT_LT(c0.lhs, 1e-14);
    EXPECT_EQ(c0.rhs, 0.0);
    EXPECT_THROW(linear_growth_check(l, rho, -1.0), DomainError);
    // Steady state: kernel vector of L.
    Eigen::ComplexEigenSolver<Mat> es(l);
    Eigen::Index k;
    es.eigenvalues().cwiseAbs().minCoeff(&k);
    Mat ss = unvec(es.eigenvectors().col(k), 4);
    ss /= ss.trace();
    ss = 0.5 * (ss + ss.adjoint());
    for (double t : {0.5, 3.0}) {
        LinearGrowthCheck c = linear_growth_check(l, ss, t);
        EXPECT_LT(c.lhs, 1e-9);
        EXPECT_LT(c.rhs, 1e-9 * t + 1e-12);
    }
}

TEST(lindblad, linear_growth_random_triples) {
    Rng rng(2024);
    for (int k = 0; k < 30; ++k) {
        Mat l = random_lindblad_superop(4, 1 + k % 3, rng);
        Mat rho = random_state(4, rng);
        for (double t : {0.5, 1.0, 2.0}) {
            EXPECT_TRUE(linear_growth_check(l, rho, t).holds);
        }
        // The generated semigroup is CPTP.
        ChannelCertificate cert = certify_superop(matrix_function(Mat(0.7 * l), MatFn::exp()), 4, 4, 1e-8);
        EXPECT_TRUE(cert.ok());
    }
}

TEST(lindblad, local_linear_growth) {
    InteractionFamily f = ising_chain(5, 0.8, 0.3, true);
    LocalLindbladian hb = heatbath_generator(f, 1);
    Rng rng(3);
    Operator x(random_state(32, rng), {0, 1, 2, 3, 4});
    for (double t : {0.0, 0.3, 1.0}) {
        EXPECT_TRUE(linear_growth_check(hb, x, t).holds);
    }
    EXPECT_LT(linear_growth_check(hb, gibbs_state(f), 2.0).lhs, 1e-9);
}

TEST(lindblad, flow_csv_header) {
    PointwiseCheck c;
    c.s = 0.5;
    c.residual = 1e-3;
    c.bound = 2e-3;
    std::string csv = flow_csv({c});
    EXPECT_EQ(csv.rfind("s,residual,bound\n0.5,", 0), 0u);
}
