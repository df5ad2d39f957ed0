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

// Channel circuits that move a Gibbs state along a path of couplings by
// resampling one block at a time, plus audits of their reversibility.
//
// A local variation on block A with annuli B1 = A_{+r1} \ A and
// B2 = A_{+(r1+r2)} \ A_{+r1} is M = R^{rho~}_{B2 -> AB} o Tr_{AB1}. Its
// reversal uses rho as the reference instead of rho~.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "glab/errors.hpp"
#include "glab/model.hpp"
#include "glab/qcore.hpp"
#include "glab/recovery.hpp"

namespace glab {

struct VariationGeometry {
    Region a;
    Region b1;
    Region b2;

    Region ab1() const {
        return label_union(a, b1);
    }
    Region support() const {
        return label_union(ab1(), b2);
    }
};

inline VariationGeometry variation_geometry(const Lattice &lat, const Region &a, int r1, int r2) {
    if (r1 < 0 || r2 < 0) {
        throw GeometryError("annulus radii must be non-negative");
    }
    if (a.empty()) {
        throw GeometryError("variation block is empty");
    }
    VariationGeometry g;
    g.a = make_region(a);
    Region in1 = dilate(lat, g.a, r1);
    Region in2 = dilate(lat, g.a, r1 + r2);
    g.b1 = label_minus(in1, g.a);
    g.b2 = label_minus(in2, in1);
    return g;
}

struct GateRecord {
    ChannelGate gate;
    ChannelGate reversal;
    VariationGeometry geometry;
    int step = 0;   // path step m, 1-based
    int block = 0;  // index into the block partition
    std::string reference_hash;
    std::string reversal_hash;
    bool conditioning_warning = false;
};

// Channels applied as M[rho] = gate, reversal indexed identically.
struct ChannelCircuit {
    std::vector<GateRecord> gates;
    std::vector<std::vector<int>> layers;  // gate indices
    std::vector<std::vector<double>> path;
    int r_a = 0;
    int r_1 = 0;
    int r_2 = 0;
    int max_diameter = 0;

    int depth() const {
        return static_cast<int>(layers.size());
    }
    size_t size() const {
        return gates.size();
    }
    int range() const {
        return depth() * max_diameter;
    }

    void check_layers() const {
        std::vector<int> seen(gates.size(), 0);
        for (const auto &layer : layers) {
            for (size_t i = 0; i < layer.size(); ++i) {
                ++seen.at(layer[i]);
                for (size_t j = i + 1; j < layer.size(); ++j) {
                    if (!label_intersection(gates[layer[i]].gate.support(), gates[layer[j]].gate.support()).empty()) {
                        throw ContractError("gates " + std::to_string(layer[i]) + " and " + std::to_string(layer[j]) +
                                            " overlap within a layer");
                    }
                }
            }
        }
        for (size_t k = 0; k < seen.size(); ++k) {
            if (seen[k] != 1) {
                throw ContractError("gate " + std::to_string(k) + " scheduled " + std::to_string(seen[k]) + " times");
            }
        }
    }
};

inline Operator apply_circuit(const ChannelCircuit &c, Operator rho, ApplyOptions opt = {}) {
    for (const auto &layer : c.layers) {
        for (int k : layer) {
            rho = apply_gate(rho, c.gates[k].gate, opt);
        }
    }
    return rho;
}

// C~ = C~_1 o ... o C~_T: reversal layers in reverse order.
inline Operator apply_reversal(const ChannelCircuit &c, Operator rho, ApplyOptions opt = {}) {
    for (auto it = c.layers.rbegin(); it != c.layers.rend(); ++it) {
        for (int k : *it) {
            rho = apply_gate(rho, c.gates[k].reversal, opt);
        }
    }
    return rho;
}

// Greedy coloring in the given order; supports that share a site conflict.
inline std::vector<int> color_supports(const std::vector<Region> &supports) {
    std::vector<int> color(supports.size(), -1);
    for (size_t i = 0; i < supports.size(); ++i) {
        std::vector<bool> used(supports.size(), false);
        for (size_t j = 0; j < i; ++j) {
            if (!label_intersection(supports[i], supports[j]).empty()) {
                used[color[j]] = true;
            }
        }
        int c = 0;
        while (used[c]) {
            ++c;
        }
        color[i] = c;
    }
    return color;
}

// ---------------------------------------------------------------------------
// Local variation.

struct LocalVariation {
    GateRecord record;
    double error = 0.0;            // ||M[rho] - rho~||_1
    double reverse_error = 0.0;    // ||M~[rho~] - rho||_1
    double roundtrip = 0.0;        // ||M~ M[rho] - rho||_1
    double markov_residual = 0.0;  // ||rho~ - R[rho~_{B2 C}]||_1
    double marginal_shift = 0.0;   // ||rho~_{B2 C} - rho_{B2 C}||_1
};

// Both states live on the same sorted label set.
inline LocalVariation local_variation_gate(const Lattice &lat, const Operator &rho, const Operator &rho_tilde,
                                           const Region &a, int r1, int r2,
                                           const Quadrature &quad = trapezoid_quadrature()) {
    LocalVariation lv;
    VariationGeometry geo = variation_geometry(lat, a, r1, r2);
    const Region ab = geo.support();
    const Region ab1 = geo.ab1();
    RecoveryMap fwd = twirled_petz(partial_trace(rho_tilde, ab), ab1, quad);
    RecoveryMap bwd = twirled_petz(partial_trace(rho, ab), ab1, quad);
    lv.record.gate = erase_then(std::move(fwd), ab1);
    lv.record.reversal = erase_then(std::move(bwd), ab1);
    lv.record.geometry = geo;
    lv.record.reference_hash = fwd.reference_hash;
    lv.record.reversal_hash = bwd.reference_hash;
    lv.record.conditioning_warning = fwd.conditioning_warning || bwd.conditioning_warning;

    Operator m_rho = apply_gate(rho, lv.record.gate);
    lv.error = trace_distance(m_rho, rho_tilde);
    lv.reverse_error = trace_distance(apply_gate(rho_tilde, lv.record.reversal), rho);
    lv.roundtrip = trace_distance(apply_gate(m_rho, lv.record.reversal), rho);
    lv.markov_residual = trace_distance(apply_gate(rho_tilde, lv.record.gate), rho_tilde);
    const Region rest = label_minus(rho.labels, ab1);
    lv.marginal_shift = trace_distance(partial_trace(rho_tilde, rest), partial_trace(rho, rest));
    return lv;
}

// Checks that every term with a nonzero change lies strictly inside A.
inline void require_variation_inside(const InteractionFamily &f, const std::vector<double> &delta, const Region &a) {
    if (delta.size() != f.terms.size()) {
        throw DomainError("coupling change has wrong length");
    }
    for (size_t t = 0; t < delta.size(); ++t) {
        if (delta[t] != 0.0 && !contains_all(a, f.terms[t].support)) {
            throw DomainError("term " + f.terms[t].name + " varies outside the block");
        }
    }
}

inline LocalVariation local_variation_gate(const InteractionFamily &f, const std::vector<double> &delta,
                                           const Region &a, int r1, int r2,
                                           const Quadrature &quad = trapezoid_quadrature()) {
    require_variation_inside(f, delta, a);
    std::vector<double> b = f.betas();
    for (size_t t = 0; t < b.size(); ++t) {
        b[t] += delta[t];
    }
    Operator rho = gibbs_state(f);
    Operator rho_tilde = gibbs_state(with_betas(f, b));
    return local_variation_gate(f.lattice, rho, rho_tilde, a, r1, r2, quad);
}

// ---------------------------------------------------------------------------
// Global variation.

struct CircuitOptions {
    int r_a = 1;
    int r_1 = 1;
    int r_2 = 1;
    double delta = 0.1;
    Quadrature quad = trapezoid_quadrature();
};

struct VariationStep {
    int step = 0;
    int block = 0;
    Region a;
    double delta_inf = 0.0;
    std::string state_hash;
    std::string next_hash;
    double local_error = 0.0;
    double reverse_error = 0.0;
    double cumulative_bound = 0.0;  // sum of local errors so far
    double global_error = 0.0;      // ||C_{<=i}[rho_0] - rho^{(i+1)}||_1
};

struct GlobalCircuit {
    ChannelCircuit circuit;
    std::vector<VariationStep> ledger;
    Operator initial;
    Operator target;
    Operator output;
    double global_error = 0.0;
    double sum_local = 0.0;
    double eps_c = 0.0;  // sum_i max(forward_i, reverse_i)
    bool telescoping_ok = true;
};

inline double beta_distance(const std::vector<double> &a, const std::vector<double> &b) {
    double d = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        d = std::max(d, std::abs(a[i] - b[i]));
    }
    return d;
}

inline int path_steps(const std::vector<double> &from, const std::vector<double> &to, double delta) {
    if (!(delta > 0.0)) {
        throw DomainError("path step bound must be positive");
    }
    const double d = beta_distance(from, to);
    return static_cast<int>(std::ceil(d / delta - 1e-12));
}

inline std::vector<std::vector<double>> uniform_path(const std::vector<double> &from, const std::vector<double> &to,
                                                     int n) {
    std::vector<std::vector<double>> path{from};
    for (int m = 1; m <= n; ++m) {
        std::vector<double> b(from.size());
        for (size_t i = 0; i < b.size(); ++i) {
            b[i] = m == n ? to[i] : from[i] + (to[i] - from[i]) * m / n;
        }
        path.push_back(std::move(b));
    }
    return path;
}

inline void check_path(const std::vector<std::vector<double>> &path, double delta) {
    for (size_t m = 1; m < path.size(); ++m) {
        const double d = beta_distance(path[m - 1], path[m]);
        if (d > delta * (1.0 + 1e-12)) {
            std::ostringstream os;
            os << "path step " << m << " changes couplings by " << d << " > " << delta << "; use n >= "
               << path_steps(path.front(), path.back(), delta);
            throw PathDiscretizationError(os.str());
        }
    }
}

// Replays the path block by block. Intermediate references are exact Gibbs
// states; the propagated state only feeds the error ledger.
inline GlobalCircuit global_circuit_along(const InteractionFamily &f, const std::vector<std::vector<double>> &path,
                                          const CircuitOptions &opt = {}) {
    if (path.empty()) {
        throw DomainError("empty coupling path");
    }
    for (const auto &b : path) {
        if (b.size() != f.terms.size()) {
            throw DomainError("path point has wrong length");
        }
    }
    check_path(path, opt.delta);
    if (opt.r_1 < 0 || opt.r_2 < 0) {
        throw GeometryError("annulus radii must be non-negative");
    }
    const Lattice &lat = f.lattice;
    BlockPartition bp = block_partition(lat, f, opt.r_a);

    GlobalCircuit out;
    out.circuit.path = path;
    out.circuit.r_a = opt.r_a;
    out.circuit.r_1 = opt.r_1;
    out.circuit.r_2 = opt.r_2;

    std::vector<Region> supports;
    std::vector<int> active;
    for (size_t k = 0; k < bp.blocks.size(); ++k) {
        if (bp.blocks[k].terms.empty()) {
            continue;
        }
        active.push_back(static_cast<int>(k));
        supports.push_back(variation_geometry(lat, bp.blocks[k].sites, opt.r_1, opt.r_2).support());
    }
    std::vector<int> color = color_supports(supports);
    std::vector<size_t> order(active.size());
    for (size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::stable_sort(order.begin(), order.end(), [&](size_t x, size_t y) { return color[x] < color[y]; });

    std::vector<double> current = path.front();
    Operator exact = gibbs_state(with_betas(f, current));
    out.initial = exact;
    Operator state = exact;
    for (size_t m = 1; m < path.size(); ++m) {
        int last_color = -1;
        for (size_t oi : order) {
            const Block &blk = bp.blocks[active[oi]];
            std::vector<double> next = current;
            double dinf = 0.0;
            for (int t : blk.terms) {
                next[t] = path[m][t];
                dinf = std::max(dinf, std::abs(next[t] - current[t]));
            }
            if (dinf == 0.0) {
                continue;
            }
            Operator next_exact = gibbs_state(with_betas(f, next));
            LocalVariation lv =
                local_variation_gate(lat, exact, next_exact, blk.sites, opt.r_1, opt.r_2, opt.quad);
            lv.record.step = static_cast<int>(m);
            lv.record.block = active[oi];

            const int gi = static_cast<int>(out.circuit.gates.size());
            if (color[oi] != last_color) {
                out.circuit.layers.emplace_back();
                last_color = color[oi];
            }
            out.circuit.layers.back().push_back(gi);
            out.circuit.max_diameter =
                std::max(out.circuit.max_diameter, region_diameter(lat, lv.record.geometry.support()));

            state = apply_gate(state, lv.record.gate);
            VariationStep vs;
            vs.step = static_cast<int>(m);
            vs.block = active[oi];
            vs.a = blk.sites;
            vs.delta_inf = dinf;
            vs.state_hash = fingerprint(exact);
            vs.next_hash = fingerprint(next_exact);
            vs.local_error = lv.error;
            vs.reverse_error = lv.reverse_error;
            out.sum_local += lv.error;
            out.eps_c += std::max(lv.error, lv.reverse_error);
            vs.cumulative_bound = out.sum_local;
            vs.global_error = trace_distance(state, next_exact);
            const double slack = 1e-9 * static_cast<double>(out.ledger.size() + 1);
            if (vs.global_error > vs.cumulative_bound + slack) {
                out.telescoping_ok = false;
            }
            out.ledger.push_back(std::move(vs));
            out.circuit.gates.push_back(std::move(lv.record));

            current = std::move(next);
            exact = std::move(next_exact);
        }
    }
    out.circuit.check_layers();
    out.target = exact;
    out.output = state;
    out.global_error = trace_distance(state, exact);
    return out;
}

inline GlobalCircuit global_circuit(const InteractionFamily &f, const std::vector<double> &target,
                                    const CircuitOptions &opt = {}) {
    const std::vector<double> from = f.betas();
    if (target.size() != from.size()) {
        throw DomainError("target couplings have wrong length");
    }
    return global_circuit_along(f, uniform_path(from, target, path_steps(from, target, opt.delta)), opt);
}

inline std::string ledger_csv(const GlobalCircuit &g) {
    std::ostringstream os;
    os.precision(17);
    os << "step,block,local_error,cumulative_bound,measured_global_error\n";
    for (const auto &s : g.ledger) {
        os << s.step << ',' << s.block << ',' << s.local_error << ',' << s.cumulative_bound << ',' << s.global_error
           << '\n';
    }
    return os.str();
}

inline std::string describe_circuit(const ChannelCircuit &c) {
    std::ostringstream os;
    os << "depth " << c.depth() << " gates " << c.size() << " range " << c.range() << '\n';
    for (size_t t = 0; t < c.layers.size(); ++t) {
        for (int k : c.layers[t]) {
            const GateRecord &g = c.gates[k];
            os << "layer " << t << " gate " << k << " kind " << gate_kind_name(g.gate.kind) << " support";
            for (int s : g.gate.support()) {
                os << ' ' << s;
            }
            os << " ref " << g.reference_hash << " rev " << g.reversal_hash << '\n';
        }
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Reversibility audits.

struct LrAudit {
    double eps_lr = 0.0;
    std::vector<double> residuals;  // per gate
    int worst_gate = -1;
};

// Max over gates E in layer t of ||E~ E C'[rho] - C'[rho]||_1, C' = layers before t.
inline LrAudit lr_audit(const ChannelCircuit &c, const Operator &rho) {
    LrAudit out;
    out.residuals.assign(c.size(), 0.0);
    Operator x = rho;
    for (const auto &layer : c.layers) {
        for (int k : layer) {
            Operator y = apply_gate(apply_gate(x, c.gates[k].gate), c.gates[k].reversal);
            const double r = trace_distance(y, x);
            out.residuals[k] = r;
            if (r > out.eps_lr || out.worst_gate < 0) {
                out.eps_lr = std::max(out.eps_lr, r);
                out.worst_gate = k;
            }
        }
        for (int k : layer) {
            x = apply_gate(x, c.gates[k].gate);
        }
    }
    return out;
}

inline double reversal_error(const ChannelCircuit &c, const Operator &rho) {
    return trace_distance(apply_reversal(c, apply_circuit(c, rho)), rho);
}

// A candidate pair of channels for local indistinguishability; both must act
// only on `support`.
struct LiCandidate {
    std::string name;
    Labels support;
    std::function<Operator(const Operator &)> forward;   // applied to rho, should give sigma
    std::function<Operator(const Operator &)> backward;  // applied to sigma, should give rho
};

inline LiCandidate gate_candidate(const std::string &name, const ChannelGate &d, const ChannelGate &d_back) {
    LiCandidate c;
    c.name = name;
    c.support = label_union(d.support(), d_back.support());
    c.forward = [d](const Operator &x) { return apply_gate(x, d); };
    c.backward = [d_back](const Operator &x) { return apply_gate(x, d_back); };
    return c;
}

// Conjugates a candidate through the gates of c in its causal cone:
// D^G = G_cone o D o G~_cone.
inline LiCandidate conjugate_candidate(const ChannelCircuit &c, const LiCandidate &base) {
    Labels cone = base.support;
    std::vector<int> used;
    for (auto it = c.layers.rbegin(); it != c.layers.rend(); ++it) {
        std::vector<int> hit;
        for (int k : *it) {
            if (!label_intersection(c.gates[k].gate.support(), cone).empty()) {
                hit.push_back(k);
            }
        }
        for (int k : hit) {
            cone = label_union(cone, c.gates[k].gate.support());
            used.push_back(k);
        }
    }
    // `used` runs from the last layer back to the first.
    auto wrap = [&c, used](std::function<Operator(const Operator &)> d) {
        return [&c, used, d](const Operator &x) {
            Operator y = x;
            for (int k : used) {
                y = apply_gate(y, c.gates[k].reversal);
            }
            y = d(y);
            for (auto it = used.rbegin(); it != used.rend(); ++it) {
                y = apply_gate(y, c.gates[*it].gate);
            }
            return y;
        };
    };
    LiCandidate out;
    out.name = base.name + "^C";
    out.support = cone;
    out.forward = wrap(base.forward);
    out.backward = wrap(base.backward);
    return out;
}

struct LiRegionResult {
    Region a;
    double value = std::numeric_limits<double>::infinity();
    std::string candidate;
    bool conclusive = false;
};

struct LiReport {
    double eps_li = 0.0;
    std::vector<LiRegionResult> regions;
    bool conclusive = true;  // false when some region had no admissible candidate
};

// Upper bound on the LI error: for each region, the best admissible candidate.
// A missing candidate leaves the region inconclusive, which is not a refutation.
inline LiReport li_audit(const Operator &rho, const Operator &sigma, const std::vector<Region> &regions,
                         const std::vector<LiCandidate> &candidates) {
    LiReport rep;
    for (const Region &a : regions) {
        LiRegionResult rr;
        rr.a = a;
        for (const auto &cand : candidates) {
            if (!label_intersection(cand.support, a).empty()) {
                continue;
            }
            const double v = std::max(trace_distance(cand.forward(rho), sigma),
                                      trace_distance(cand.backward(sigma), rho));
            if (!rr.conclusive || v < rr.value) {
                rr.value = v;
                rr.candidate = cand.name;
                rr.conclusive = true;
            }
        }
        if (rr.conclusive) {
            rep.eps_li = std::max(rep.eps_li, rr.value);
        } else {
            rep.conclusive = false;
        }
        rep.regions.push_back(std::move(rr));
    }
    return rep;
}

// Regions of diameter <= r that contain every other such region: intervals in
// one dimension, balls of radius floor(r/2) otherwise.
inline std::vector<Region> maximal_regions(const Lattice &lat, int r) {
    std::vector<Region> out;
    if (r < 0) {
        return out;
    }
    for (int s = 0; s < lat.size(); ++s) {
        Region a;
        if (lat.dimension() == 1) {
            if (!lat.periodic()[0] && s > 0 && s + r >= lat.size()) {
                break;  // contained in the previous interval
            }
            for (int k = 0; k <= r && (lat.periodic()[0] || s + k < lat.size()); ++k) {
                a.push_back((s + k) % lat.size());
            }
            a = make_region(a);
            if (region_diameter(lat, a) > r) {
                continue;
            }
        } else {
            a = ball(lat, s, r / 2);
        }
        if (std::find(out.begin(), out.end(), a) == out.end()) {
            out.push_back(a);
        }
    }
    return out;
}

inline double li_transfer_factor(size_t gates) {
    const double n = static_cast<double>(gates);
    return 2.0 * n * n + n;
}

// ---------------------------------------------------------------------------
// Zero-temperature endpoint.

struct GroundSubstitution {
    double s = 1.0;
    double distance = 0.0;  // ||rho_{s beta} - rho_gs||_1
    Operator rho_s;
    Operator ground;
    bool reached = false;
};

// Doubles s until the scaled Gibbs state is within eps of the ground-space state.
inline GroundSubstitution ground_substitution(const InteractionFamily &f, double eps, double s0 = 1.0,
                                              int max_doublings = 12) {
    GroundSubstitution g;
    g.ground = ground_state(f);
    g.s = s0;
    for (int k = 0; k <= max_doublings; ++k) {
        g.rho_s = gibbs_state(scaled(f, g.s));
        g.distance = trace_distance(g.rho_s, g.ground);
        if (g.distance <= eps) {
            g.reached = true;
            return g;
        }
        if (k < max_doublings) {
            g.s *= 2.0;
        }
    }
    return g;
}

struct EndpointCheck {
    double lhs = 0.0;  // ||C[rho_gs] - rho_target||_1
    double rhs = 0.0;  // circuit error + ||rho_s - rho_gs||_1
    bool holds = false;
};

inline EndpointCheck zero_temperature_endpoint(const GlobalCircuit &g, const GroundSubstitution &gs) {
    EndpointCheck e;
    e.lhs = trace_distance(apply_circuit(g.circuit, gs.ground), g.target);
    e.rhs = g.global_error + gs.distance;
    e.holds = e.lhs <= e.rhs + 1e-9;
    return e;
}

}  // namespace glab
