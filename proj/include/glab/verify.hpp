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

// The twelve acceptance criteria. Each returns its audit lines; a criterion
// passes when every line passes. Quick mode shrinks sample counts and sizes
// for smoke runs and is never used by the acceptance binary.

#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "glab/audit.hpp"
#include "glab/circuits.hpp"
#include "glab/lindblad.hpp"
#include "glab/memory.hpp"
#include "glab/model.hpp"
#include "glab/qbp.hpp"
#include "glab/qcore.hpp"
#include "glab/recovery.hpp"
#include "glab/stabilizer.hpp"

namespace glab {

struct CriterionResult {
    int id = 0;
    std::string name;
    std::vector<AuditLine> lines;
    double seconds = 0.0;
    double budget_seconds = 0.0;
    std::string error;  // exception text, if the criterion threw

    bool pass() const {
        if (!error.empty() || lines.empty()) {
            return false;
        }
        for (const auto &l : lines) {
            if (!l.pass) {
                return false;
            }
        }
        return seconds <= budget_seconds;
    }
    // Worst line by lhs - rhs - slack.
    const AuditLine *worst() const {
        const AuditLine *w = nullptr;
        for (const auto &l : lines) {
            if (!w || l.lhs - l.rhs - l.slack > w->lhs - w->rhs - w->slack) {
                w = &l;
            }
        }
        return w;
    }
};

struct VerifyOptions {
    bool quick = false;
    uint64_t seed = 20260101;
};

namespace verify_detail {

inline AuditLine audit_eq(std::string name, double value, double expected, double tol, std::string anchor) {
    return audit_le(std::move(name), std::abs(value - expected), tol, 0.0, std::move(anchor));
}

inline AuditLine audit_true(std::string name, bool ok, std::string anchor) {
    return audit_le(std::move(name), ok ? 0.0 : 1.0, 0.0, 0.0, std::move(anchor));
}

inline std::vector<double> bump_block(const InteractionFamily &f, const Region &a, double amount) {
    std::vector<double> d(f.terms.size(), 0.0);
    for (size_t t = 0; t < f.terms.size(); ++t) {
        if (contains_all(a, f.terms[t].support)) {
            d[t] = amount;
        }
    }
    return d;
}

inline LinearPath scale_path(const InteractionFamily &f, double from, double to) {
    LinearPath p;
    for (const auto &t : f.terms) {
        p.from.push_back(t.beta * from);
        p.to.push_back(t.beta * to);
    }
    return p;
}

}  // namespace verify_detail

// 1. Commuting chain: zero CMI across the annulus and exact Petz recovery.
inline std::vector<AuditLine> criterion_markov_exactness(const VerifyOptions &) {
    using namespace verify_detail;
    InteractionFamily f = ising_chain(8, 0.8, 0.4, false);
    Operator rho = gibbs_state(f);
    AnnulusPartition p = annulus_partition(f.lattice, 3, 1, 1, 0);
    std::vector<AuditLine> out;
    out.push_back(audit_true("annulus_separation", region_distance(f.lattice, p.a, p.c) > f.range, "markov_exactness"));
    out.push_back(audit_le("cmi", std::abs(cmi(rho, p.a, p.b(), p.c)), 1e-9, 0.0, "markov_exactness"));
    const Region ab = label_union(p.a, p.b());
    const Region bc = label_union(p.b(), p.c);
    RecoveryMap rm = petz_map(partial_trace(rho, ab), p.a);
    Operator out_state = apply_gate(partial_trace(rho, bc), rm.gate);
    out.push_back(audit_le("petz_recovery", trace_distance(out_state, rho), 1e-8, 0.0, "markov_exactness"));
    return out;
}

// 2. Random tripartite states: recovery error and fidelity against CMI.
inline std::vector<AuditLine> criterion_recoverability(const VerifyOptions &opt) {
    Rng rng(opt.seed + 2);
    const int n = opt.quick ? 20 : 200;
    double worst_gap = -1e300, worst_fgap = -1e300;
    AuditLine worst_l, worst_f;
    for (int k = 0; k < n; ++k) {
        Operator rho(random_state(8, rng), {0, 1, 2});
        RecoveryMap rm = twirled_petz(partial_trace(rho, {1, 2}), {2});
        Operator rec = apply_gate(partial_trace(rho, {0, 1}), rm.gate);
        const double i = cmi(rho, {0}, {1}, {2});
        AuditLine l = audit_le("recovery_error", trace_distance(rho, rec), recoverability_bound(i), 1e-8,
                               "recoverability_inequality");
        AuditLine fl = audit_le("fidelity_bound", -2.0 * std::log2(fidelity(rho, rec)), i, 1e-6, "fidelity_chain");
        if (l.lhs - l.rhs > worst_gap || k == 0) {
            worst_gap = l.lhs - l.rhs;
            worst_l = l;
        }
        if (fl.lhs - fl.rhs > worst_fgap || k == 0) {
            worst_fgap = fl.lhs - fl.rhs;
            worst_f = fl;
        }
    }
    worst_l.name += "[worst of " + std::to_string(n) + "]";
    worst_f.name += "[worst of " + std::to_string(n) + "]";
    return {worst_l, worst_f};
}

// 3. Local variation on a TFIM chain with growing annulus radii.
inline std::vector<AuditLine> criterion_local_variation(const VerifyOptions &opt) {
    using namespace verify_detail;
    const int n = opt.quick ? 6 : 8;
    InteractionFamily f = tfim_chain(n, 0.5, 0.5, false);
    const Region a = n == 8 ? Region{3, 4} : Region{2, 3};
    std::vector<double> d = bump_block(f, a, 0.1);
    std::vector<AuditLine> out;
    double prev = 0.0;
    for (int r = 1; r <= 3; ++r) {
        LocalVariation lv = local_variation_gate(f, d, a, r, r);
        const std::string tag = "[r=" + std::to_string(r) + "]";
        if (r > 1) {
            out.push_back(audit_le("monotone_error" + tag, lv.error, prev, 0.0, "local_variation_error"));
        }
        prev = lv.error;
        out.push_back(audit_le("reversal" + tag, lv.roundtrip, 2.0 * std::max(lv.error, lv.reverse_error), 1e-9,
                               "local_reversal"));
    }
    return out;
}

// 4. Global circuit along a uniform path with telescoping, LR, and reversal audits.
inline std::vector<AuditLine> criterion_global_circuit(const VerifyOptions &opt) {
    const int n = opt.quick ? 6 : 8;
    InteractionFamily f = tfim_chain(n, 0.2, 0.2, false);
    std::vector<double> target(f.terms.size(), 0.6);
    CircuitOptions co;
    co.delta = 0.1;
    GlobalCircuit g = global_circuit(f, target, co);
    std::vector<AuditLine> out;
    out.push_back(audit_le("path_steps", std::abs(static_cast<double>(g.circuit.path.size()) - 5.0), 0.0, 0.0,
                           "path_discretization"));
    out.push_back(audit_le("telescoping", g.global_error, g.sum_local, 1e-8, "telescoping_error"));
    LrAudit lr = lr_audit(g.circuit, g.initial);
    out.push_back(audit_le("local_reversibility", lr.eps_lr, 2.0 * g.eps_c, 1e-8, "circuit_local_reversibility"));
    out.push_back(audit_le("reversal", reversal_error(g.circuit, g.initial),
                           static_cast<double>(g.circuit.size()) * lr.eps_lr, 1e-8, "reversal_circuit_error"));
    return out;
}

// 5. Commuting-family Lindbladian flow.
inline std::vector<AuditLine> criterion_commuting_flow(const VerifyOptions &opt) {
    using namespace verify_detail;
    const int n = opt.quick ? 6 : 8;
    InteractionFamily f = ising_chain(n, 1.0, 0.5, true);
    LinearPath p = scale_path(f, 0.2, 0.5);
    std::vector<AuditLine> out;
    const int points = opt.quick ? 5 : 20;
    double worst_gap = -1e300, worst_norm = 0.0;
    AuditLine worst;
    for (int r : {0, 1, 2}) {
        for (int k = 0; k < points; ++k) {
            const double s = static_cast<double>(k) / (points - 1);
            PointwiseOptions po;
            PointwiseCheck c = flow_pointwise_check(f, p, s, r, po);
            AuditLine l = audit_le("pointwise", c.residual, c.bound, 1e-7, "flow_pointwise");
            if (l.lhs - l.rhs > worst_gap) {
                worst_gap = l.lhs - l.rhs;
                worst = l;
                std::ostringstream os;
                os << "pointwise[worst r=" << r << " s=" << s << "]";
                worst.name = os.str();
            }
            worst_norm = std::max(worst_norm, c.max_term_norm);
        }
    }
    out.push_back(worst);
    out.push_back(audit_le("term_induced_norm", worst_norm, 4.0, 1e-6, "flow_term_norm"));
    double prev = 0.0;
    for (int r = 0; r <= 2; ++r) {
        CommutingFlow fl = commuting_flow(f, p, r);
        const std::string tag = "[r=" + std::to_string(r) + "]";
        out.push_back(audit_true("integration_converged" + tag, fl.flow.converged, "flow_integration"));
        if (r > 0) {
            AuditLine l = audit_le("end_to_end_decreasing" + tag, fl.flow.error, prev, 0.0, "flow_end_to_end");
            l.pass = fl.flow.error < prev;
            out.push_back(l);
        }
        prev = fl.flow.error;
    }
    return out;
}

// 6. Loop correlators on the 2x2 toric code.
inline std::vector<AuditLine> criterion_toric_loops(const VerifyOptions &) {
    using namespace verify_detail;
    InteractionFamily f = toric2d(2, 2, 1.0, 1.0, true);
    std::vector<int> pl = plaquette_terms(f);
    LoopCorrelatorReport r = toric_loop_correlator(f, LoopRegions{{pl[0]}, {pl[0], pl[1]}}, 1.0, 3.0);
    std::vector<AuditLine> out;
    out.push_back(audit_le("dense_match", r.dense_residual, 1e-10, 0.0, "toric_loop_formulas"));
    out.push_back(audit_eq("inner_loop", r.o1, r.formula_o1, 1e-10, "toric_loop_formulas"));
    out.push_back(audit_eq("loop_product", r.o12, r.formula_o12, 1e-10, "toric_loop_formulas"));
    out.push_back(audit_le("connected_lower_bound", r.lower_bound, r.connected, 0.0, "toric_connected_bound"));
    return out;
}

// 7. Complement algebra: 4D torus equality, planar 2D inequality with witness.
inline std::vector<AuditLine> criterion_algebra_equality(const VerifyOptions &) {
    using namespace verify_detail;
    std::vector<AuditLine> out;
    HomologicalCode four = homological_code({3, 3, 3, 3}, true, 2);
    std::vector<int> a4 = cell_ball(four, four.complex.lattice().site({1, 1, 1, 1}), 1);
    AlgebraCheck c4 = homological_algebra_check(four, a4);
    AuditLine l4 = audit_le("4d_rank_gap", static_cast<double>(c4.dim_traced) - static_cast<double>(c4.dim_generated),
                            0.0, 0.0, "complement_algebra");
    l4.pass = c4.equal;
    out.push_back(l4);

    HomologicalCode two = homological_code({5, 5}, false, 1);
    std::vector<int> a2 = cell_ball(two, two.complex.lattice().site({2, 2}), 1);
    AlgebraCheck c2 = homological_algebra_check(two, a2);
    bool witness_ok = false;
    if (c2.witness) {
        const PauliWord &w = *c2.witness;
        witness_ok = !c2.equal && !w.x.any() && w.z.count() == 8;
        for (int s : a2) {
            witness_ok = witness_ok && !w.z.get(s);
        }
    }
    out.push_back(audit_true("2d_loop_witness", witness_ok, "complement_algebra"));
    return out;
}

// 8. Ising disorder parameter.
inline std::vector<AuditLine> criterion_disorder(const VerifyOptions &) {
    using namespace verify_detail;
    std::vector<AuditLine> out;
    InteractionFamily classical = ising_chain(6, 0.9, 0.0, true);
    Operator rc = gibbs_state(classical);
    double worst = 0.0;
    for (Region x : {Region{0}, Region{0, 1}, Region{0, 1, 2}}) {
        worst = std::max(worst, disorder_parameter(rc, x));
    }
    out.push_back(audit_le("classical_zero", worst, 0.0, 0.0, "disorder_parameter"));
    Operator rq = gibbs_state(tfim_chain(6, 1.0, 0.6, true));
    double gap = 0.0;
    for (Region x : {Region{0}, Region{0, 1}, Region{0, 1, 2}}) {
        DisorderIdentity d = disorder_identity(rq, x);
        gap = std::max(gap, std::abs(d.disorder - d.channel_gap));
    }
    out.push_back(audit_le("channel_identity", gap, 1e-9, 0.0, "disorder_parameter"));
    return out;
}

// 9. Linear growth bound on random dense generators.
inline std::vector<AuditLine> criterion_linear_growth(const VerifyOptions &opt) {
    Rng rng(opt.seed + 9);
    const int n = opt.quick ? 10 : 100;
    std::uniform_int_distribution<int> dim(2, 4);
    std::uniform_real_distribution<double> time(0.0, 3.0);
    double worst_gap = -1e300;
    AuditLine worst;
    for (int k = 0; k < n; ++k) {
        const Eigen::Index d = dim(rng);
        Mat s = random_lindblad_superop(d, 2, rng);
        Mat rho = random_state(d, rng);
        LinearGrowthCheck c = linear_growth_check(s, rho, time(rng));
        AuditLine l = audit_le("linear_growth", c.lhs, c.rhs, 1e-8, "linear_growth");
        if (l.lhs - l.rhs > worst_gap) {
            worst_gap = l.lhs - l.rhs;
            worst = l;
        }
    }
    worst.name += "[worst of " + std::to_string(n) + "]";
    return {worst};
}

// 10. Belief propagation: LPPL identity, contraction, defining ODE.
inline std::vector<AuditLine> criterion_qbp(const VerifyOptions &opt) {
    std::vector<AuditLine> out;
    InteractionFamily f = tfim_chain(4, 0.8, 0.6, false);
    Operator h = hamiltonian(f);
    LpplIdentity id = lppl_identity_check(h, Operator(0.3 * pauli('Z'), {0}), Operator(pauli('Z'), {3}));
    out.push_back(audit_le("lppl_identity", id.residual, 1e-5, 0.0, "lppl_identity"));
    Rng rng(opt.seed + 10);
    double worst = -1e300;
    for (int k = 0; k < 50; ++k) {
        Mat hh = random_hermitian(8, rng);
        Mat v = ginibre(8, 8, rng);
        worst = std::max(worst, operator_norm(qbp_operator(hh, v)) - operator_norm(v));
    }
    out.push_back(audit_le("contraction", worst, 0.0, 1e-10, "qbp_contraction"));
    Mat h0 = random_hermitian(8, rng), v = random_hermitian(8, rng);
    double ode = 0.0;
    for (double s : {0.0, 0.5, 1.0}) {
        ode = std::max(ode, qbp_ode_residual(h0, v, s));
    }
    out.push_back(audit_le("defining_ode", ode, 1e-6, 0.0, "qbp_ode"));
    return out;
}

// 11. Memory run on the 6-site repetition code.
inline std::vector<AuditLine> criterion_memory(const VerifyOptions &opt) {
    InteractionFamily f = ising_chain(opt.quick ? 4 : 6, 1.0, 0.0, true);
    MemoryOptions mo;
    if (opt.quick) {
        mo.times = {0.0, 1.0};
        mo.circuit.delta = 0.5;
    }
    MemoryRun run = memory_experiment(f, mo);
    std::vector<AuditLine> out;
    double gap = -1e300, gap0 = -1e300;
    AuditLine w, w0;
    for (const auto &c : run.codewords) {
        for (size_t k = 0; k < run.times.size(); ++k) {
            AuditLine l = audit_le("logical_error", c.eps[k], c.roundtrip + run.times[k] * c.generator_norm, 1e-7,
                                   "memory_bound");
            if (l.lhs - l.rhs > gap) {
                gap = l.lhs - l.rhs;
                w = l;
                std::ostringstream os;
                os << "logical_error[worst " << c.name << " t=" << run.times[k] << "]";
                w.name = os.str();
            }
        }
        AuditLine l0 = audit_le("initial_error", c.eps.front(),
                                static_cast<double>(run.encoder.circuit.size()) * c.eps_lr, 1e-8,
                                "reversal_circuit_error");
        if (l0.lhs - l0.rhs > gap0) {
            gap0 = l0.lhs - l0.rhs;
            w0 = l0;
            w0.name = "initial_error[worst " + c.name + "]";
        }
    }
    out.push_back(w);
    out.push_back(w0);
    return out;
}

// 12. Known values.
inline std::vector<AuditLine> criterion_known_values(const VerifyOptions &) {
    using namespace verify_detail;
    std::vector<AuditLine> out;
    CVec g = CVec::Zero(8);
    g(0) = g(7) = 1.0 / std::sqrt(2.0);
    Operator ghz(pure_state(g), {0, 1, 2});
    out.push_back(audit_eq("ghz_cmi", cmi(ghz, {0}, {1}, {2}), 1.0, 1e-9, "known_values"));
    const int nodes = 401;
    const double w = 12.0, h = 2 * w / (nodes - 1);
    double s = 0.0;
    for (int k = 0; k < nodes; ++k) {
        s += (k == 0 || k == nodes - 1 ? 0.5 : 1.0) * h * beta0(-w + k * h);
    }
    out.push_back(audit_eq("beta0_normalization", s, 1.0, 1e-8, "known_values"));
    InteractionFamily toric = toric2d(2, 2, 1.0, 1.0, true);
    StabilizerModel m = stabilizer_from_family(toric);
    out.push_back(audit_eq("plaquette_parity", stab_expectation(m, m.generators[0]).value.real(), 0.761594, 1e-6,
                           "known_values"));
    return out;
}

struct CriterionSpec {
    int id;
    std::string name;
    double budget_seconds;
    std::function<std::vector<AuditLine>(const VerifyOptions &)> run;
};

inline std::vector<CriterionSpec> criteria() {
    return {
        {1, "markov_exactness", 10, criterion_markov_exactness},
        {2, "recoverability_inequality", 60, criterion_recoverability},
        {3, "local_variation", 300, criterion_local_variation},
        {4, "global_circuit", 600, criterion_global_circuit},
        {5, "commuting_flow", 300, criterion_commuting_flow},
        {6, "toric_loop_correlators", 60, criterion_toric_loops},
        {7, "complement_algebra", 300, criterion_algebra_equality},
        {8, "disorder_parameter", 60, criterion_disorder},
        {9, "linear_growth", 60, criterion_linear_growth},
        {10, "belief_propagation", 120, criterion_qbp},
        {11, "memory_bound", 600, criterion_memory},
        {12, "known_values", 60, criterion_known_values},
    };
}

inline CriterionResult run_criterion(const CriterionSpec &c, const VerifyOptions &opt) {
    CriterionResult r;
    r.id = c.id;
    r.name = c.name;
    r.budget_seconds = c.budget_seconds;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        r.lines = c.run(opt);
    } catch (const std::exception &e) {
        r.error = e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

inline std::string describe(const CriterionResult &r) {
    std::ostringstream os;
    os.precision(2);
    os << "C" << r.id << ' ' << r.name << ' ' << (r.pass() ? "PASS" : "FAIL") << " (" << std::fixed << r.seconds
       << " s / ";
    os.unsetf(std::ios::fixed);
    os.precision(4);
    os << r.budget_seconds << " s)";
    if (!r.error.empty()) {
        os << " error: " << r.error;
    } else if (const AuditLine *w = r.worst()) {
        os << " worst " << w->name << ": " << w->lhs << " <= " << w->rhs << " + " << w->slack;
    }
    return os.str();
}

}  // namespace glab
