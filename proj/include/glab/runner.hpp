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

// Task runners behind the command-line tool. A run returns CSV bodies, a JSON
// summary, and an exit status; writing files and hashing stay with the caller.
// CSV bodies depend only on the config, never on timing.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "glab/audit.hpp"
#include "glab/circuits.hpp"
#include "glab/config.hpp"
#include "glab/correlations.hpp"
#include "glab/lindblad.hpp"
#include "glab/memory.hpp"
#include "glab/model.hpp"
#include "glab/qcore.hpp"
#include "glab/recovery.hpp"
#include "glab/stabilizer.hpp"
#include "glab/verify.hpp"

namespace glab {

inline constexpr int kExitOk = 0;
inline constexpr int kExitAudit = 1;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitError = 3;

struct RunOutput {
    std::map<std::string, std::string> files;  // file name -> CSV body
    std::map<std::string, double> metrics;
    std::vector<AuditLine> audits;
    std::string error;
    int exit_code = kExitOk;

    bool audits_pass() const {
        return std::all_of(audits.begin(), audits.end(), [](const AuditLine &a) { return a.pass; });
    }
    // First failing anchor, empty when every audit passes.
    std::string failed_anchor() const {
        for (const auto &a : audits) {
            if (!a.pass) {
                return a.anchor;
            }
        }
        return {};
    }
};

inline Json audit_json(const AuditLine &a) {
    return Json{{"name", a.name}, {"lhs", a.lhs}, {"rhs", a.rhs}, {"slack", a.slack}, {"pass", a.pass},
                {"anchor", a.anchor}};
}

inline Json summary_json(const ExperimentConfig &c, const RunOutput &r) {
    Json j;
    j["task"] = c.task;
    j["config"] = to_json(c);
    j["exit_code"] = r.exit_code;
    j["status"] = r.exit_code == kExitOk      ? "pass"
                  : r.exit_code == kExitAudit ? "audit_failed"
                  : r.exit_code == kExitInvalid ? "invalid"
                                                : "error";
    if (!r.error.empty()) {
        j["error"] = r.error;
    }
    Json m = Json::object();
    for (const auto &kv : r.metrics) {
        m[kv.first] = std::isfinite(kv.second) ? Json(kv.second) : Json(nullptr);
    }
    j["metrics"] = m;
    Json a = Json::array();
    for (const auto &l : r.audits) {
        a.push_back(audit_json(l));
    }
    j["audits"] = a;
    std::vector<std::string> files;
    for (const auto &kv : r.files) {
        files.push_back(kv.first);
    }
    j["files"] = files;
    return j;
}

namespace runner_detail {

inline std::ostringstream csv_stream() {
    std::ostringstream os;
    os.precision(12);
    return os;
}

inline int default_center(const InteractionFamily &f) {
    std::vector<int> mid;
    for (int e : f.lattice.extents()) {
        mid.push_back(e / 2);
    }
    return f.lattice.site(mid);
}

inline CircuitOptions circuit_options(const ExperimentConfig &c, CircuitOptions co) {
    co.r_a = c.param("r_a", co.r_a);
    co.r_1 = c.param("r_1", co.r_1);
    co.r_2 = c.param("r_2", co.r_2);
    if (c.params.contains("radius")) {
        co.r_1 = co.r_2 = c.params.at("radius").get<int>();
    }
    co.delta = c.param("delta", co.delta);
    if (c.param<std::string>("quadrature", "trapezoid") == "single") {
        co.quad = single_node_quadrature();
    } else {
        co.quad = trapezoid_quadrature(c.param("quad_window", 12.0), c.param("quad_nodes", 241));
    }
    return co;
}

inline RunOutput run_gibbs(const ExperimentConfig &c, const InteractionFamily &base) {
    RunOutput r;
    InteractionFamily f = scaled(base, c.param("beta", 1.0));
    Operator rho = gibbs_state(f);
    auto os = csv_stream();
    os << "site,x,y,z\n";
    for (int s = 0; s < f.nsites(); ++s) {
        Operator one = partial_trace(rho, {s});
        os << s;
        for (char p : {'X', 'Y', 'Z'}) {
            os << ',' << (pauli(p) * one.m).trace().real();
        }
        os << '\n';
    }
    r.files["gibbs.csv"] = os.str();
    StateCheck sc = check_state(rho.m);
    r.metrics["energy"] = (hamiltonian(f).m * rho.m).trace().real();
    r.metrics["entropy_bits"] = entropy(rho);
    r.audits.push_back(audit_le("trace_error", sc.trace_error, 1e-10, 0.0, "gibbs_state"));
    r.audits.push_back(audit_le("negativity", -sc.min_eigenvalue, 1e-12, 0.0, "gibbs_state"));
    return r;
}

inline RunOutput run_cmi(const ExperimentConfig &c, const InteractionFamily &base) {
    RunOutput r;
    InteractionFamily f = scaled(base, c.param("beta", 1.0));
    const int center = c.param("center", default_center(f));
    AnnulusPartition p =
        annulus_partition(f.lattice, center, c.param("r_a", 0), c.param("r_1", 1), c.param("r_2", 1));
    Operator rho = gibbs_state(f);
    const Region b = p.b();
    const double i = std::max(0.0, cmi(rho, p.a, b, p.c));
    const Region ab = label_union(p.a, b), bc = label_union(b, p.c);
    Operator rho_bc = partial_trace(rho, bc);
    const double petz = trace_distance(apply_gate(rho_bc, petz_map(partial_trace(rho, ab), p.a).gate), rho);
    const double twirled = trace_distance(apply_gate(rho_bc, twirled_petz(partial_trace(rho, ab), p.a).gate), rho);
    const int dist = region_distance(f.lattice, p.a, p.c);
    auto os = csv_stream();
    os << "r_a,r_1,r_2,distance,cmi_bits,petz_error,twirled_error,bound\n";
    os << p.r_a << ',' << p.r_1 << ',' << p.r_2 << ',' << dist << ',' << i << ',' << petz << ',' << twirled << ','
       << recoverability_bound(i) << '\n';
    r.files["cmi.csv"] = os.str();
    r.metrics["cmi_bits"] = i;
    r.metrics["petz_error"] = petz;
    r.metrics["twirled_error"] = twirled;
    r.metrics["distance"] = dist;
    r.audits.push_back(audit_le("twirled_recovery", twirled, recoverability_bound(i), 1e-8,
                                "recoverability_inequality"));
    return r;
}

inline RunOutput run_cluster(const ExperimentConfig &c, const InteractionFamily &base) {
    RunOutput r;
    InteractionFamily f = scaled(base, c.param("beta", 1.0));
    const int center = c.param("center", default_center(f));
    const int r_a = c.param("r_a", 0);
    const int max_shell = c.param("max_shell", 1 << 20);
    std::vector<AnnulusPartition> parts;
    for (int r1 = 0; r1 <= max_shell; ++r1) {
        try {
            parts.push_back(annulus_partition(f.lattice, center, r_a, r1, 0));
        } catch (const GeometryError &) {
            break;
        }
    }
    const AlgebraChoice alg = c.param("algebra", false) ? AlgebraChoice::Local : AlgebraChoice::Full;
    CovarianceOptions co;
    co.seed = c.seed;
    ClusteringFit fit = clustering_scan(f, parts, alg, co);
    auto os = csv_stream();
    os << "separation,lower,upper\n";
    for (const auto &s : fit.samples) {
        os << s.separation << ',' << s.lower << ',' << s.upper << '\n';
    }
    r.files["cluster.csv"] = os.str();
    r.metrics["xi"] = fit.fitted ? fit.xi : 0.0;
    r.metrics["r2"] = fit.r2;
    r.metrics["log_prefactor"] = fit.log_prefactor;
    AuditLine decay = audit_le("covariance_decays", fit.violated ? 1.0 : 0.0, 0.0, 0.0, "correlation_decay");
    r.audits.push_back(decay);
    for (const auto &s : fit.samples) {
        r.audits.push_back(audit_le("lower_le_upper[d=" + std::to_string(s.separation) + "]", s.lower, s.upper,
                                    1e-9, "covariance_bracket"));
    }
    return r;
}

inline RunOutput run_connect(const ExperimentConfig &c, const InteractionFamily &base) {
    RunOutput r;
    const double from = c.param("beta_from", 0.0), to = c.param("beta_to", 1.0);
    CircuitOptions co = circuit_options(c, CircuitOptions{});
    InteractionFamily f0 = scaled(base, from);
    const std::vector<double> target = scaled(base, to).betas();
    GlobalCircuit g = global_circuit_along(f0, uniform_path(f0.betas(), target, path_steps(f0.betas(), target, co.delta)),
                                           co);
    r.files["ledger.csv"] = ledger_csv(g);
    LrAudit lr = lr_audit(g.circuit, g.initial);
    const double rev = reversal_error(g.circuit, g.initial);
    r.metrics["eps_c"] = g.eps_c;
    r.metrics["global_error"] = g.global_error;
    r.metrics["sum_local"] = g.sum_local;
    r.metrics["eps_lr"] = lr.eps_lr;
    r.metrics["reversal_error"] = rev;
    r.metrics["gates"] = static_cast<double>(g.circuit.size());
    r.metrics["path_points"] = static_cast<double>(g.circuit.path.size());
    r.audits.push_back(audit_le("telescoping", g.global_error, g.sum_local, 1e-8, "telescoping_error"));
    r.audits.push_back(audit_le("local_reversibility", lr.eps_lr, 2.0 * g.eps_c, 1e-8, "circuit_local_reversibility"));
    r.audits.push_back(audit_le("reversal", rev, static_cast<double>(g.circuit.size()) * lr.eps_lr, 1e-8,
                                "reversal_circuit_error"));
    return r;
}

inline RunOutput run_flow(const ExperimentConfig &c, const InteractionFamily &base) {
    RunOutput r;
    LinearPath p{scaled(base, c.param("beta_from", 0.0)).betas(), scaled(base, c.param("beta_to", 1.0)).betas()};
    const int radius = c.param("r", 1);
    const int points = c.param("points", 5);
    std::vector<PointwiseCheck> checks;
    PointwiseOptions po;
    po.term_norms = false;
    po.cov.seed = c.seed;
    AuditLine worst;
    double gap = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < points; ++k) {
        const double s = points == 1 ? 0.0 : static_cast<double>(k) / (points - 1);
        checks.push_back(flow_pointwise_check(base, p, s, radius, po));
        AuditLine l = audit_le("pointwise", checks.back().residual, checks.back().bound, po.slack, "flow_pointwise");
        if (l.lhs - l.rhs > gap) {
            gap = l.lhs - l.rhs;
            worst = l;
            std::ostringstream os;
            os << "pointwise[worst s=" << s << "]";
            worst.name = os.str();
        }
    }
    r.files["pointwise.csv"] = flow_csv(checks);
    FlowOptions fo;
    fo.steps = c.param("steps", fo.steps);
    fo.tolerance = c.param("tolerance", fo.tolerance);
    CommutingFlow fl = commuting_flow(base, p, radius, fo);
    auto os = csv_stream();
    os << "s,trajectory_error\n";
    for (size_t k = 0; k < fl.flow.s_grid.size(); ++k) {
        os << fl.flow.s_grid[k] << ',' << fl.flow.trajectory_error[k] << '\n';
    }
    r.files["trajectory.csv"] = os.str();
    r.metrics["end_to_end_error"] = fl.flow.error;
    r.metrics["steps"] = fl.flow.steps;
    r.metrics["halving_change"] = fl.flow.halving_change;
    r.audits.push_back(worst);
    r.audits.push_back(verify_detail::audit_true("integration_converged", fl.flow.converged, "flow_integration"));
    return r;
}

inline RunOutput run_toric(const ExperimentConfig &c, const InteractionFamily &base) {
    RunOutput r;
    std::vector<int> pl = plaquette_terms(base);
    if (pl.size() < 2) {
        throw ValidationError("toric task needs a toric2d model");
    }
    LoopRegions reg{c.params.contains("loop_a") ? config_detail::int_list(c.params.at("loop_a")) : std::vector<int>{pl[0]},
                    c.params.contains("loop_b") ? config_detail::int_list(c.params.at("loop_b"))
                                                : std::vector<int>{pl[0], pl[1]}};
    for (const auto *v : {&reg.a, &reg.b}) {
        for (int t : *v) {
            if (std::find(pl.begin(), pl.end(), t) == pl.end()) {
                throw ValidationError("loop index " + std::to_string(t) + " is not a plaquette term");
            }
        }
    }
    LoopCorrelatorReport rep = toric_loop_correlator(base, reg, c.param("beta", 1.0), c.param("beta0", 3.0));
    auto os = csv_stream();
    os << "quantity,value,formula\n";
    os << "o1," << rep.o1 << ',' << rep.formula_o1 << '\n';
    os << "o2," << rep.o2 << ',' << rep.formula_o2 << '\n';
    os << "o12," << rep.o12 << ',' << rep.formula_o12 << '\n';
    os << "connected," << rep.connected << ',' << rep.lower_bound << '\n';
    r.files["toric.csv"] = os.str();
    r.metrics["connected"] = rep.connected;
    r.metrics["lower_bound"] = rep.lower_bound;
    r.metrics["eps_ground"] = rep.eps_ground;
    if (rep.dense_residual >= 0) {
        r.audits.push_back(audit_le("dense_match", rep.dense_residual, 1e-10, 0.0, "toric_loop_formulas"));
    }
    r.audits.push_back(audit_le("inner_loop", std::abs(rep.o1 - rep.formula_o1), 1e-10, 0.0, "toric_loop_formulas"));
    r.audits.push_back(audit_le("loop_product", std::abs(rep.o12 - rep.formula_o12), 1e-10, 0.0, "toric_loop_formulas"));
    if (rep.eps_ground >= 0) {
        r.audits.push_back(audit_le("connected_lower_bound", rep.lower_bound, rep.connected, 0.0,
                                    "toric_connected_bound"));
    }
    return r;
}

inline RunOutput run_memory(const ExperimentConfig &c, const InteractionFamily &base) {
    RunOutput r;
    MemoryOptions mo;
    if (c.params.contains("target_scale")) {
        mo.target = scaled(base, c.params.at("target_scale").get<double>()).betas();
    }
    mo.ground_eps = c.param("ground_eps", mo.ground_eps);
    mo.circuit = circuit_options(c, mo.circuit);
    mo.heatbath_block = c.param("block", mo.heatbath_block);
    mo.rate = c.param("rate", mo.rate);
    if (c.params.contains("times")) {
        mo.times = c.params.at("times").get<std::vector<double>>();
        std::sort(mo.times.begin(), mo.times.end());
    }
    MemoryRun run = memory_experiment(base, mo);
    MemoryAudit a = memory_bound_audit(run);
    r.files["memory.csv"] = memory_csv(run);
    r.metrics["eps_c"] = a.eps_c;
    r.metrics["prefactor"] = a.prefactor;
    r.metrics["max_logical_error_final"] = max_logical_error(run, run.times.size() - 1);
    r.metrics["code_rank"] = static_cast<double>(run.code.rank);
    r.metrics["steady_residual"] = run.steady_residual;
    r.audits = a.lines;
    return r;
}

}  // namespace runner_detail

// Runs the twelve criteria and reports them in the same shape as a task run.
inline RunOutput run_verify_all(bool quick, uint64_t seed, std::vector<CriterionResult> *results = nullptr) {
    RunOutput r;
    VerifyOptions vo;
    vo.quick = quick;
    if (seed != 0) {
        vo.seed = seed;
    }
    auto os = runner_detail::csv_stream();
    os << "criterion,name,lines,failed_lines,error\n";
    bool all = true;
    for (const auto &spec : criteria()) {
        CriterionResult cr = run_criterion(spec, vo);
        int failed = 0;
        for (auto l : cr.lines) {
            failed += l.pass ? 0 : 1;
            l.name = "C" + std::to_string(cr.id) + "." + l.name;
            r.audits.push_back(l);
        }
        if (!cr.error.empty()) {
            r.audits.push_back(audit_le("C" + std::to_string(cr.id) + ".error", 1.0, 0.0, 0.0, spec.name));
        }
        r.audits.push_back(audit_le("C" + std::to_string(cr.id) + ".runtime_seconds", cr.seconds, cr.budget_seconds,
                                    0.0, spec.name));
        os << cr.id << ',' << cr.name << ',' << cr.lines.size() << ',' << failed << ','
           << (cr.error.empty() ? "" : "error") << '\n';
        r.metrics["C" + std::to_string(cr.id) + "_pass"] = cr.pass() ? 1.0 : 0.0;
        all = all && cr.pass();
        if (results) {
            results->push_back(cr);
        }
    }
    r.files["verify.csv"] = os.str();
    r.exit_code = all ? kExitOk : kExitAudit;
    return r;
}

// Runs a validated config. Exceptions are mapped to exit codes, never thrown.
inline RunOutput run_task(const ExperimentConfig &c) {
    RunOutput r;
    try {
        if (c.task == "verify-all") {
            return run_verify_all(c.param("quick", false), c.seed);
        }
        InteractionFamily f = build_model(c.model);
        if (c.task == "gibbs") {
            r = runner_detail::run_gibbs(c, f);
        } else if (c.task == "cmi") {
            r = runner_detail::run_cmi(c, f);
        } else if (c.task == "cluster") {
            r = runner_detail::run_cluster(c, f);
        } else if (c.task == "connect") {
            r = runner_detail::run_connect(c, f);
        } else if (c.task == "lindblad-flow") {
            r = runner_detail::run_flow(c, f);
        } else if (c.task == "toric") {
            r = runner_detail::run_toric(c, f);
        } else if (c.task == "memory") {
            r = runner_detail::run_memory(c, f);
        } else {
            throw ValidationError("unknown task '" + c.task + "'");
        }
        r.exit_code = r.audits_pass() ? kExitOk : kExitAudit;
    } catch (const ValidationError &e) {
        r = RunOutput{};
        r.error = e.what();
        r.exit_code = kExitInvalid;
    } catch (const std::exception &e) {
        r = RunOutput{};
        r.error = e.what();
        r.exit_code = kExitError;
    }
    return r;
}

struct Trend {
    std::string metric;
    double slope = 0.0;
    double intercept = 0.0;
    int points = 0;
};

// Least-squares fit of log(metric) against the swept value over positive finite samples.
inline std::vector<Trend> fit_trends(const std::vector<double> &values, const std::vector<RunOutput> &runs) {
    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> data;
    for (size_t k = 0; k < runs.size(); ++k) {
        for (const auto &kv : runs[k].metrics) {
            if (std::isfinite(kv.second) && kv.second > 0) {
                data[kv.first].first.push_back(values[k]);
                data[kv.first].second.push_back(std::log(kv.second));
            }
        }
    }
    std::vector<Trend> out;
    for (const auto &kv : data) {
        const auto &xs = kv.second.first;
        const auto &ys = kv.second.second;
        if (xs.size() < 2) {
            continue;
        }
        const double n = static_cast<double>(xs.size());
        double mx = 0, my = 0;
        for (size_t i = 0; i < xs.size(); ++i) {
            mx += xs[i] / n;
            my += ys[i] / n;
        }
        double sxx = 0, sxy = 0;
        for (size_t i = 0; i < xs.size(); ++i) {
            sxx += (xs[i] - mx) * (xs[i] - mx);
            sxy += (xs[i] - mx) * (ys[i] - my);
        }
        if (sxx == 0) {
            continue;
        }
        Trend t{kv.first, sxy / sxx, 0.0, static_cast<int>(xs.size())};
        t.intercept = my - t.slope * mx;
        out.push_back(t);
    }
    return out;
}

}  // namespace glab
