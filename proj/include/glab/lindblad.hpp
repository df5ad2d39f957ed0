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

// Local Lindbladians built from recovery maps, their time-ordered flows and a
// few generic checks on dense generators.

#pragma once

#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "glab/correlations.hpp"
#include "glab/errors.hpp"
#include "glab/model.hpp"
#include "glab/qcore.hpp"
#include "glab/recovery.hpp"

namespace glab {

// L_X[rho] = rate * (map[rho] - rho) when subtract_identity, else rate * map[rho].
struct LindbladTerm {
    std::string name;
    ChannelGate map;
    double rate = 1.0;
    bool subtract_identity = true;

    Labels support() const {
        return map.support();
    }
};

struct LocalLindbladian {
    std::vector<LindbladTerm> terms;
    std::string profile = "strict";  // locality tag
    double alpha = std::numeric_limits<double>::infinity();
    std::vector<std::string> notes;

    bool empty() const {
        return terms.empty();
    }
};

inline Operator apply_term(const LindbladTerm &t, const Operator &rho) {
    Operator y = apply_map(rho, t.map);
    if (t.subtract_identity) {
        y.m -= reorder(rho, y.labels).m;
    }
    y.m *= t.rate;
    return y;
}

inline Operator apply_lindbladian(const LocalLindbladian &l, const Operator &rho) {
    Operator out(Mat::Zero(rho.dim(), rho.dim()), sorted_labels(rho.labels));
    Operator r = reorder(rho, out.labels);
    for (const auto &t : l.terms) {
        out.m += reorder(apply_term(t, r), out.labels).m;
    }
    return out;
}

// The term as a map on its sorted support, for induced-norm estimates.
inline LinearMap term_map(const LindbladTerm &t) {
    Labels sup = t.support();
    const Eigen::Index d = static_cast<Eigen::Index>(dim_of(sup.size()));
    return {d,
            [t, sup](const Mat &x) { return reorder(apply_term(t, Operator(x, sup)), sup).m; },
            [t, sup](const Mat &y) {
                Operator out = reorder(apply_map_adjoint(Operator(y, sup), t.map), sup);
                if (t.subtract_identity) {
                    out.m -= y;
                }
                return Mat(t.rate * out.m);
            }};
}

// Dense superoperator of a term on its sorted support (column stacking).
inline Mat term_superop(const LindbladTerm &t, size_t max_qubits = 6) {
    Labels sup = t.support();
    if (sup.size() > max_qubits) {
        throw ResourceError("term_superop: support of " + std::to_string(sup.size()) + " sites above cap");
    }
    const Eigen::Index d = static_cast<Eigen::Index>(dim_of(sup.size()));
    Mat s(d * d, d * d);
    for (Eigen::Index j = 0; j < d; ++j) {
        for (Eigen::Index i = 0; i < d; ++i) {
            Mat e = Mat::Zero(d, d);
            e(i, j) = 1.0;
            s.col(i + d * j) = vec(reorder(apply_term(t, Operator(e, sup)), sup).m);
        }
    }
    return s;
}

// Pairwise commutators of the embedded terms.
inline double max_commutator(const InteractionFamily &f) {
    double worst = 0.0;
    for (size_t i = 0; i < f.terms.size(); ++i) {
        for (size_t j = i + 1; j < f.terms.size(); ++j) {
            Labels u = label_union(f.terms[i].support, f.terms[j].support);
            if (u.size() == f.terms[i].support.size() + f.terms[j].support.size()) {
                continue;
            }
            Mat a = embed(Operator(f.terms[i].h, f.terms[i].support), u).m;
            Mat b = embed(Operator(f.terms[j].h, f.terms[j].support), u).m;
            worst = std::max(worst, operator_norm(Mat(a * b - b * a)));
        }
    }
    return worst;
}

inline void require_commuting(const InteractionFamily &f) {
    const double c = max_commutator(f);
    if (c >= 1e-10) {
        std::ostringstream os;
        os << "family terms do not commute (commutator norm " << c << ")";
        throw DomainError(os.str());
    }
}

// ---------------------------------------------------------------------------
// Coupling paths and Gibbs derivatives.

// beta(s) = from + s (to - from).
struct LinearPath {
    std::vector<double> from;
    std::vector<double> to;

    std::vector<double> at(double s) const {
        std::vector<double> b(from.size());
        for (size_t i = 0; i < b.size(); ++i) {
            b[i] = from[i] + s * (to[i] - from[i]);
        }
        return b;
    }
    double derivative(size_t i) const {
        return to[i] - from[i];
    }
};

// d rho_s / ds = sum_Z (d beta_Z / ds) rho_s (<h_Z> - h_Z) for commuting terms.
inline Operator gibbs_derivative(const InteractionFamily &f, const LinearPath &p, double s) {
    Operator rho = gibbs_state(with_betas(f, p.at(s)));
    Mat out = Mat::Zero(rho.dim(), rho.dim());
    for (size_t z = 0; z < f.terms.size(); ++z) {
        const double db = p.derivative(z);
        if (db == 0.0) {
            continue;
        }
        Mat h = embed(Operator(f.terms[z].h, f.terms[z].support), rho.labels).m;
        const cplx mean = (h * rho.m).trace();
        out += db * rho.m * (mean * Mat::Identity(rho.dim(), rho.dim()) - h);
    }
    return Operator(out, rho.labels);
}

struct FiniteDifference {
    Operator derivative;
    double richardson_gap = 0.0;  // ||D(h) - D(h/2)||_1
};

inline FiniteDifference gibbs_derivative_fd(const InteractionFamily &f, const LinearPath &p, double s,
                                            double step = 1e-4) {
    auto central = [&](double h) {
        Operator a = gibbs_state(with_betas(f, p.at(s + h)));
        Operator b = gibbs_state(with_betas(f, p.at(s - h)));
        return Operator(Mat((a.m - b.m) / (2.0 * h)), a.labels);
    };
    FiniteDifference fd;
    fd.derivative = central(step);
    fd.richardson_gap = trace_distance(fd.derivative, central(step / 2.0));
    return fd;
}

// ---------------------------------------------------------------------------
// Continuous-time construction for commuting families.

struct FlowTerm {
    int term = 0;
    double weight = 0.0;  // |d beta| (lambda - <h'>)
    double sign = 1.0;
    Region support;
    bool dropped = false;
};

struct CommutingFlowGenerator {
    LocalLindbladian generator;
    std::vector<FlowTerm> terms;
    Operator rho;
    double s = 0.0;
    int r = 0;
};

// L_{s,Z} = |d beta_Z| (lambda'_Z - <h'_Z>) (M_{s,Z} - I) with h' = sign(d beta_Z) h_Z,
// M_{s,Z} the plain Petz map B2 -> Z B1 B2 of rho~ = (lambda' - h') rho / (lambda' - <h'>)
// after erasing Z B1, B1 = Z_{+r} \ Z and B2 = Z_{+(r+R)} \ Z_{+r}.
inline CommutingFlowGenerator commuting_flow_generator(const InteractionFamily &f, const LinearPath &p, double s, int r,
                                            const Operator *rho_s = nullptr) {
    if (r < 0) {
        throw GeometryError("radius must be non-negative");
    }
    if (p.from.size() != f.terms.size() || p.to.size() != f.terms.size()) {
        throw DomainError("path has wrong length");
    }
    require_commuting(f);
    CommutingFlowGenerator g;
    g.s = s;
    g.r = r;
    g.rho = rho_s ? *rho_s : gibbs_state(with_betas(f, p.at(s)));
    const Lattice &lat = f.lattice;
    const int big_r = std::max(f.range, 1);
    for (size_t z = 0; z < f.terms.size(); ++z) {
        const double db = p.derivative(z);
        if (std::abs(db) > 1.0 + 1e-12) {
            throw DomainError("path derivative exceeds 1 on term " + f.terms[z].name);
        }
        if (db == 0.0) {
            continue;
        }
        FlowTerm tt;
        tt.term = static_cast<int>(z);
        tt.sign = db > 0 ? 1.0 : -1.0;
        const Region &zs = f.terms[z].support;
        Region in1 = dilate(lat, zs, r);
        Region in2 = dilate(lat, zs, r + big_r);
        tt.support = in2;

        Mat h = tt.sign * embed(Operator(f.terms[z].h, zs), g.rho.labels).m;
        const double lambda = eigvalsh(Mat(tt.sign * f.terms[z].h)).maxCoeff();
        Mat h_rho = mul(h, g.rho.m);
        const double mean = h_rho.trace().real();
        const double gap = lambda - mean;
        tt.weight = std::abs(db) * gap;
        if (gap < 1e-12) {
            tt.dropped = true;
            g.generator.notes.push_back("dropped " + f.terms[z].name + ": degenerate weight");
            g.terms.push_back(tt);
            continue;
        }
        Mat tilde = (lambda * g.rho.m - h_rho) / gap;
        tilde = 0.5 * (tilde + tilde.adjoint());
        Operator ref = partial_trace(Operator(tilde, g.rho.labels), in2);
        RecoveryMap rm = petz_map(ref, in1);
        LindbladTerm lt;
        lt.name = f.terms[z].name;
        lt.map = erase_then(std::move(rm), in1);
        lt.rate = tt.weight;
        g.generator.terms.push_back(std::move(lt));
        g.terms.push_back(tt);
    }
    return g;
}

struct PointwiseCheck {
    double s = 0.0;
    double residual = 0.0;  // ||d rho/ds - L_s[rho_s]||_1
    double bound = 0.0;     // sum_Z Cov(Z, complement of Z_{+r})
    double fd_gap = 0.0;    // analytic vs finite-difference derivative
    double richardson_gap = 0.0;
    double max_term_norm = 0.0;  // induced 1->1 lower bound
    bool holds = false;
};

struct PointwiseOptions {
    bool term_norms = true;
    NormOptions norm{1, 1, 12, 7, 1e-10, 8};
    CovarianceOptions cov{0, 40, 11, 1e-12, std::nullopt, false};
    double slack = 1e-7;
};

inline PointwiseCheck flow_pointwise_check(const InteractionFamily &f, const LinearPath &p, double s, int r,
                                         const PointwiseOptions &opt = {}) {
    PointwiseCheck pc;
    pc.s = s;
    CommutingFlowGenerator g = commuting_flow_generator(f, p, s, r);
    Operator d = gibbs_derivative(f, p, s);
    FiniteDifference fd = gibbs_derivative_fd(f, p, s);
    pc.fd_gap = trace_distance(d, fd.derivative);
    pc.richardson_gap = fd.richardson_gap;
    pc.residual = trace_distance(d, apply_lindbladian(g.generator, g.rho));
    const Lattice &lat = f.lattice;
    for (const auto &tt : g.terms) {
        const Region &zs = f.terms[tt.term].support;
        Region far = complement(lat, dilate(lat, zs, r));
        if (far.empty()) {
            continue;
        }
        CovarianceOptions co = opt.cov;
        const double hn = operator_norm(f.terms[tt.term].h);
        co.seed_o1 = f.terms[tt.term].h / (hn > 0 ? hn : 1.0);
        const AlgebraProjector pz = f.all_diagonal() ? AlgebraProjector::diagonal() : AlgebraProjector::full();
        CovarianceEstimate c = covariance(g.rho, zs, far, pz, pz, co);
        pc.bound += std::abs(p.derivative(tt.term)) * c.lower;
    }
    if (opt.term_norms) {
        for (const auto &t : g.generator.terms) {
            pc.max_term_norm = std::max(pc.max_term_norm, induced_trace_norm(term_map(t), opt.norm));
        }
    }
    pc.holds = pc.residual <= pc.bound + opt.slack;
    return pc;
}

// ---------------------------------------------------------------------------
// Classical (diagonal) restriction.

// Transition matrix of a gate on diagonal states over `labels`:
// T(y, x) = <y| map[|x><x|] |y>. Throws when the gate creates coherences.
inline Mat classical_transition(const ChannelGate &g, const Labels &labels, double eps = 1e-12) {
    const int n = static_cast<int>(labels.size());
    const Eigen::Index d = static_cast<Eigen::Index>(dim_of(labels.size()));
    const Eigen::Index din = g.d_in(), dout = g.d_out();
    for (Eigen::Index i = 0; i < din; ++i) {
        for (Eigen::Index o2 = 0; o2 < dout; ++o2) {
            for (Eigen::Index o1 = 0; o1 < dout; ++o1) {
                if (o1 != o2 && std::abs(g.super(o1 + dout * o2, i + din * i)) > eps) {
                    throw DomainError("gate does not preserve diagonal states");
                }
            }
        }
    }
    Labels rest = label_minus(label_minus(labels, g.erase), g.in);
    if (!same_label_set(label_union(rest, g.out), labels) || !label_intersection(rest, g.out).empty()) {
        throw LabelError("gate output does not tile the label set");
    }
    auto bit = [&](Eigen::Index x, int l) { return (x >> (n - 1 - label_position(labels, l))) & 1; };
    std::vector<Eigen::Index> out_mask(dout, 0);
    for (Eigen::Index o = 0; o < dout; ++o) {
        const int k = static_cast<int>(g.out.size());
        for (int q = 0; q < k; ++q) {
            if ((o >> (k - 1 - q)) & 1) {
                out_mask[o] |= Eigen::Index(1) << (n - 1 - label_position(labels, g.out[q]));
            }
        }
    }
    Eigen::Index rest_mask = 0;
    for (int l : rest) {
        rest_mask |= Eigen::Index(1) << (n - 1 - label_position(labels, l));
    }
    Mat t = Mat::Zero(d, d);
    for (Eigen::Index x = 0; x < d; ++x) {
        Eigen::Index i = 0;
        for (int l : g.in) {
            i = (i << 1) | bit(x, l);
        }
        for (Eigen::Index o = 0; o < dout; ++o) {
            const cplx v = g.super(o + dout * o, i + din * i);
            if (v != 0.0) {
                t((x & rest_mask) | out_mask[o], x) += v;
            }
        }
    }
    return t;
}

// Generator on probability vectors over `labels`.
inline Mat classical_generator(const LocalLindbladian &l, const Labels &labels) {
    const Eigen::Index d = static_cast<Eigen::Index>(dim_of(labels.size()));
    Mat q = Mat::Zero(d, d);
    for (const auto &t : l.terms) {
        Mat tr = classical_transition(t.map, labels);
        if (t.subtract_identity) {
            tr -= Mat::Identity(d, d);
        }
        q += t.rate * tr;
    }
    return q;
}

// ---------------------------------------------------------------------------
// Time-ordered flows.

// exp(tau L)[rho] by a truncated Taylor series, split so each piece has small norm.
inline Operator evolve_taylor(const LocalLindbladian &l, const Operator &rho, double tau) {
    double norm_est = 0.0;
    for (const auto &t : l.terms) {
        norm_est += std::abs(t.rate) * (t.subtract_identity ? 2.0 : 1.0);
    }
    const int pieces = std::max(1, static_cast<int>(std::ceil(std::abs(tau) * norm_est / 0.5)));
    const double h = tau / pieces;
    Operator y = canonical(rho);
    for (int p = 0; p < pieces; ++p) {
        Operator term = y;
        Operator acc = y;
        for (int k = 1; k < 60; ++k) {
            term = apply_lindbladian(l, term);
            term.m *= h / k;
            acc.m += term.m;
            if (term.m.norm() <= 1e-16 * std::max(1.0, acc.m.norm())) {
                break;
            }
        }
        y = acc;
    }
    return y;
}

struct FlowResult {
    Operator final_state;
    double error = 0.0;  // ||final - rho_1||_1
    int steps = 0;
    double halving_change = 0.0;
    bool converged = true;
    std::vector<double> s_grid;
    std::vector<double> trajectory_error;  // ||rho_k - rho_{s_k}||_1
};

struct FlowOptions {
    int steps = 64;
    int max_doublings = 2;
    double tolerance = 1e-4;
    bool classical = false;  // integrate on the diagonal
};

using GeneratorFn = std::function<LocalLindbladian(double)>;

// Midpoint rule: rho_{k+1} = exp(ds L_{s_k + ds/2}) rho_k.
inline FlowResult flow_once(const GeneratorFn &gen, const Operator &rho0, const std::function<Operator(double)> &exact,
                            int steps, bool classical) {
    if (steps < 1) {
        throw DomainError("flow needs at least one step");
    }
    FlowResult fr;
    fr.steps = steps;
    const double ds = 1.0 / steps;
    Operator rho = canonical(rho0);
    CVec prob = rho.m.diagonal();
    for (int k = 0; k < steps; ++k) {
        LocalLindbladian l = gen((k + 0.5) * ds);
        if (classical) {
            if (!l.empty()) {
                Mat q = classical_generator(l, rho.labels);
                prob = matrix_function(Mat(ds * q), MatFn::exp()) * prob;
            }
        } else if (!l.empty()) {
            rho = evolve_taylor(l, rho, ds);
        }
        const double s = (k + 1) * ds;
        Operator now = classical ? Operator(Mat(prob.asDiagonal()), rho.labels) : rho;
        fr.s_grid.push_back(s);
        fr.trajectory_error.push_back(trace_distance(now, exact(s)));
    }
    fr.final_state = classical ? Operator(Mat(prob.asDiagonal()), rho.labels) : rho;
    fr.error = fr.trajectory_error.empty() ? trace_distance(fr.final_state, exact(1.0)) : fr.trajectory_error.back();
    return fr;
}

// Doubles the step count until the end-to-end error moves by less than the tolerance.
inline FlowResult flow_integrate(const GeneratorFn &gen, const Operator &rho0,
                                 const std::function<Operator(double)> &exact, const FlowOptions &opt = {}) {
    FlowResult prev = flow_once(gen, rho0, exact, opt.steps, opt.classical);
    for (int k = 0; k < std::max(1, opt.max_doublings); ++k) {
        FlowResult next = flow_once(gen, rho0, exact, prev.steps * 2, opt.classical);
        next.halving_change = std::abs(next.error - prev.error);
        next.converged = next.halving_change <= opt.tolerance;
        if (next.converged) {
            // Report the coarser run with the observed change.
            prev.halving_change = next.halving_change;
            prev.converged = true;
            return prev;
        }
        prev = std::move(next);
    }
    prev.converged = false;
    return prev;
}

struct CommutingFlow {
    FlowResult flow;
    int r = 0;
};

inline CommutingFlow commuting_flow(const InteractionFamily &f, const LinearPath &p, int r, FlowOptions opt = {}) {
    opt.classical = opt.classical || f.all_diagonal();
    auto gen = [&](double s) { return commuting_flow_generator(f, p, s, r).generator; };
    auto exact = [&](double s) { return gibbs_state(with_betas(f, p.at(s))); };
    CommutingFlow out;
    out.r = r;
    out.flow = flow_integrate(gen, exact(0.0), exact, opt);
    return out;
}

inline std::string flow_csv(const std::vector<PointwiseCheck> &checks) {
    std::ostringstream os;
    os.precision(17);
    os << "s,residual,bound\n";
    for (const auto &c : checks) {
        os << c.s << ',' << c.residual << ',' << c.bound << '\n';
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Heat-bath generators.

// Blocks of `block` consecutive sites in one dimension, balls of radius
// block - 1 otherwise.
inline std::vector<Region> heatbath_blocks(const Lattice &lat, int block) {
    if (block < 1) {
        throw GeometryError("block size must be positive");
    }
    std::vector<Region> out;
    for (int s = 0; s < lat.size(); ++s) {
        Region a;
        if (lat.dimension() == 1) {
            if (!lat.periodic()[0] && s + block > lat.size()) {
                break;
            }
            for (int k = 0; k < block; ++k) {
                a.push_back((s + k) % lat.size());
            }
            a = make_region(a);
        } else {
            a = ball(lat, s, block - 1);
        }
        if (std::find(out.begin(), out.end(), a) == out.end()) {
            out.push_back(a);
        }
    }
    return out;
}

// L_X = M_X - I where M_X resamples X from rho_beta given its radius-R
// boundary: M_X = R^{rho}_{dX -> X dX} o Tr_X.
inline LocalLindbladian heatbath_generator(const InteractionFamily &f, int block, double rate = 1.0,
                                           const Operator *rho_beta = nullptr) {
    require_commuting(f);
    Operator rho = rho_beta ? *rho_beta : gibbs_state(f);
    LocalLindbladian l;
    const int big_r = std::max(f.range, 1);
    for (const Region &x : heatbath_blocks(f.lattice, block)) {
        Region sup = dilate(f.lattice, x, big_r);
        RecoveryMap rm = petz_map(partial_trace(rho, sup), x);
        LindbladTerm t;
        std::ostringstream name;
        name << "X";
        for (int s : x) {
            name << '_' << s;
        }
        t.name = name.str();
        t.map = erase_then(std::move(rm), x);
        t.map.kind = GateKind::Resample;
        t.rate = rate;
        l.terms.push_back(std::move(t));
    }
    return l;
}

// Max over terms of ||L_X[rho]||_1.
inline double steady_state_residual(const LocalLindbladian &l, const Operator &rho, std::string *worst = nullptr) {
    double best = 0.0;
    for (const auto &t : l.terms) {
        const double v = trace_norm(apply_term(t, canonical(rho)));
        if (v > best) {
            best = v;
            if (worst) {
                *worst = t.name;
            }
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Dense generators.

// Column-stacking superoperator of -i[H, .] + sum_k (K . K^dag - {K^dag K, .}/2).
inline Mat lindblad_superop(const Mat &h, const std::vector<Mat> &jumps) {
    const Eigen::Index d = h.rows();
    const Mat id = Mat::Identity(d, d);
    const cplx i(0.0, 1.0);
    Mat l = -i * (kron(id, h) - kron(h.transpose(), id));
    for (const Mat &k : jumps) {
        const Mat kk = k.adjoint() * k;
        l += kron(k.conjugate(), k) - 0.5 * kron(id, kk) - 0.5 * kron(kk.transpose(), id);
    }
    return l;
}

inline Mat random_lindblad_superop(Eigen::Index d, int jumps, Rng &rng) {
    Mat h = random_hermitian(d, rng);
    std::vector<Mat> ks;
    for (int k = 0; k < jumps; ++k) {
        ks.push_back(ginibre(d, d, rng) / std::sqrt(static_cast<double>(d)));
    }
    return lindblad_superop(h, ks);
}

inline Mat evolve_dense(const Mat &superop, const Mat &rho, double t) {
    return unvec(matrix_function(Mat(t * superop), MatFn::exp()) * vec(rho), rho.rows());
}

struct LinearGrowthCheck {
    double lhs = 0.0;  // ||e^{tL}[rho] - rho||_1
    double rhs = 0.0;  // t ||L[rho]||_1
    bool holds = false;
};

inline LinearGrowthCheck linear_growth_check(const Mat &superop, const Mat &rho, double t, double slack = 1e-8) {
    if (t < 0) {
        throw DomainError("evolution time must be non-negative");
    }
    LinearGrowthCheck c;
    c.lhs = trace_norm(Mat(evolve_dense(superop, rho, t) - rho));
    c.rhs = t * trace_norm(unvec(superop * vec(rho), rho.rows()));
    c.holds = c.lhs <= c.rhs + slack;
    return c;
}

// Same check for a local Lindbladian acting on a global state.
inline LinearGrowthCheck linear_growth_check(const LocalLindbladian &l, const Operator &rho, double t,
                                       double slack = 1e-8) {
    if (t < 0) {
        throw DomainError("evolution time must be non-negative");
    }
    LinearGrowthCheck c;
    c.lhs = trace_distance(evolve_taylor(l, rho, t), rho);
    c.rhs = t * trace_norm(apply_lindbladian(l, rho));
    c.holds = c.lhs <= c.rhs + slack;
    return c;
}

}  // namespace glab
