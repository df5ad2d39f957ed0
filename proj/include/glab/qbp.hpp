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

// Quantum belief propagation and the local-perturbation identity and bound.

#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "glab/correlations.hpp"
#include "glab/model.hpp"
#include "glab/qcore.hpp"

namespace glab {

// Spectral filter f(w) = tanh(w/2) / (w/2), f(0) = 1. With it
//   d/ds e^{-H(s)} = -1/2 { Phi^s(dH/ds), e^{-H(s)} }.
inline double qbp_filter(double w) {
    const double x = 0.5 * w;
    if (std::abs(x) < 1e-6) {
        return 1.0 - x * x / 3.0;
    }
    return std::tanh(x) / x;
}

// Phi(V)_{jk} = V_{jk} f(E_j - E_k) in the eigenbasis of H.
inline Mat qbp_operator(const Mat &h, const Mat &v) {
    Eigh e = eigh(h);
    const Eigen::Index d = h.rows();
    Mat vt = e.diagonal ? v : Mat(e.u.adjoint() * v * e.u);
    for (Eigen::Index k = 0; k < d; ++k) {
        for (Eigen::Index j = 0; j < d; ++j) {
            vt(j, k) *= qbp_filter(e.w(j) - e.w(k));
        }
    }
    return e.diagonal ? vt : Mat(e.u * vt * e.u.adjoint());
}

inline Operator qbp_operator(const Operator &h, const Operator &v) {
    Operator vv = embed(v, h.labels);
    return Operator(qbp_operator(h.m, vv.m), h.labels);
}

// Relative trace-norm residual of the defining identity at s, with dH/ds = V
// and a central difference of step `step`.
inline double qbp_ode_residual(const Mat &h0, const Mat &v, double s, double step = 1e-4) {
    auto expm = [](const Mat &h) { return matrix_function(Mat(-h), MatFn::exp()); };
    Mat hs = h0 + s * v;
    Mat ehs = expm(hs);
    Mat fd = (expm(Mat(hs + step * v)) - expm(Mat(hs - step * v))) / (2.0 * step);
    Mat phi = qbp_operator(hs, v);
    Mat rhs = -0.5 * (phi * ehs + ehs * phi);
    return trace_norm(Mat(fd - rhs)) / trace_norm(ehs);
}

// Gauss-Legendre nodes and weights on [0, 1].
struct GaussLegendre {
    std::vector<double> x, w;
};

inline GaussLegendre gauss_legendre(int n) {
    if (n < 1) {
        throw DomainError("Gauss-Legendre needs at least one node");
    }
    GaussLegendre g;
    g.x.resize(n);
    g.w.resize(n);
    for (int i = 0; i < n; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int k = 1; k <= n; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) {
                break;
            }
        }
        double p0 = 1.0, p1 = 0.0;
        for (int k = 1; k <= n; ++k) {
            const double p2 = p1;
            p1 = p0;
            p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
        }
        dp = n * (z * p0 - p1) / (z * z - 1.0);
        g.x[i] = 0.5 * (1.0 - z);
        g.w[i] = 1.0 / ((1.0 - z * z) * dp * dp);
    }
    return g;
}

struct LpplIdentity {
    double lhs = 0.0;  // Tr[(rho(1) - rho(0)) O]
    double rhs = 0.0;  // -1/2 int_0^1 ds [Cov(Phi, O) + Cov(O, Phi)]
    double residual = 0.0;
    double doubling_change = 0.0;
    bool converged = true;
};

namespace detail {
inline double lppl_integral(const Mat &h0, const Mat &v, const Mat &o, int nodes) {
    GaussLegendre gl = gauss_legendre(nodes);
    double acc = 0.0;
    for (int i = 0; i < nodes; ++i) {
        Mat hs = h0 + gl.x[i] * v;
        Eigh e = eigh(hs);
        const double wmin = e.w.minCoeff();
        RVec p = (-(e.w.array() - wmin)).exp().matrix();
        p /= p.sum();
        Mat rho = e.rebuild(p);
        Mat phi = qbp_operator(hs, v);
        const cplx ephi = (rho * phi).trace();
        const cplx eo = (rho * o).trace();
        const cplx c1 = (rho * phi * o).trace() - ephi * eo;
        const cplx c2 = (rho * o * phi).trace() - eo * ephi;
        acc += gl.w[i] * (-0.5) * (c1 + c2).real();
    }
    return acc;
}
}  // namespace detail

// H(s) = H0 + s V. Sign convention: the left side is rho(1) - rho(0).
inline LpplIdentity lppl_identity_check(const Operator &h0, const Operator &v, const Operator &o, int nodes = 64) {
    Mat vm = embed(v, h0.labels).m;
    Mat om = embed(o, h0.labels).m;
    LpplIdentity r;
    Operator rho0 = gibbs_from_hamiltonian(h0);
    Operator rho1 = gibbs_from_hamiltonian(Operator(h0.m + vm, h0.labels));
    r.lhs = ((rho1.m - rho0.m) * om).trace().real();
    r.rhs = detail::lppl_integral(h0.m, vm, om, nodes);
    const double doubled = detail::lppl_integral(h0.m, vm, om, 2 * nodes);
    r.doubling_change = std::abs(doubled - r.rhs);
    r.converged = r.doubling_change <= 1e-4;
    r.residual = std::abs(r.lhs - r.rhs);
    return r;
}

// (Tr_out O / d_out) (x) I_out.
inline Mat localize(const Operator &op, const Region &region) {
    Labels keep = label_intersection(op.labels, region);
    Operator r = partial_trace(op, keep);
    const double dout = static_cast<double>(dim_of(op.labels.size() - keep.size()));
    r.m /= dout;
    return embed(r, op.labels).m;
}

// ||Phi(V) - localize(Phi(V), A_{+l})|| for each l.
inline std::vector<double> qbp_truncation_profile(const InteractionFamily &f, const Operator &v,
                                                  const std::vector<int> &ls) {
    Operator h = hamiltonian(f);
    Operator phi = qbp_operator(h, v);
    std::vector<double> out;
    for (int l : ls) {
        Region al = dilate(f.lattice, make_region(v.labels), l);
        out.push_back(operator_norm(Mat(phi.m - localize(phi, al))));
    }
    return out;
}

// Default Lieb-Robinson velocity 2 * (max degree) * R * max |beta_Z| ||h_Z||.
inline double default_lr_velocity(const InteractionFamily &f) {
    std::vector<int> deg(f.nsites(), 0);
    double hmax = 0.0;
    for (const auto &t : f.terms) {
        for (int x : t.support) {
            ++deg[x];
        }
        hmax = std::max(hmax, std::abs(t.beta) * operator_norm(t.h));
    }
    const int dmax = deg.empty() ? 0 : *std::max_element(deg.begin(), deg.end());
    return 2.0 * dmax * std::max(1, f.range) * hmax;
}

struct LpplBound {
    double lhs = 0.0;
    double cov_lower = 0.0;  // sup over sampled s
    double cov_upper = 0.0;
    double tail = 0.0;  // 6|A| exp(-l / (1 + v/pi))
    double norm_v = 0.0;
    double rhs_lower = 0.0;
    double rhs_upper = 0.0;
    double velocity = 0.0;

    bool holds_upper(double slack = 1e-9) const {
        return lhs <= rhs_upper + slack;
    }
};

// Perturbation `v` (coefficient already included) on region A; C disjoint.
inline LpplBound lppl_bound_check(const InteractionFamily &f, const Operator &v, const Region &a, const Region &c,
                                  int l, double velocity = -1.0, int s_samples = 5,
                                  const CovarianceOptions &copt = {}) {
    if (l >= region_distance(f.lattice, a, c)) {
        throw GeometryError("lppl_bound_check requires l < d(A, C)");
    }
    LpplBound b;
    b.velocity = velocity < 0 ? default_lr_velocity(f) : velocity;
    Operator h0 = hamiltonian(f);
    Mat vm = embed(v, h0.labels).m;
    b.norm_v = operator_norm(v.m);
    Operator rho0 = gibbs_from_hamiltonian(h0);
    Operator rho1 = gibbs_from_hamiltonian(Operator(h0.m + vm, h0.labels));
    b.lhs = trace_distance(partial_trace(rho0, c), partial_trace(rho1, c));
    Region al = dilate(f.lattice, a, l);
    AlgebraProjector pa = algebra_for(f, al);
    AlgebraProjector pc = algebra_for(f, c);
    for (int k = 0; k < s_samples; ++k) {
        const double s = s_samples == 1 ? 0.0 : static_cast<double>(k) / (s_samples - 1);
        Operator rs = gibbs_from_hamiltonian(Operator(h0.m + s * vm, h0.labels));
        CovarianceEstimate ce = covariance(rs, al, c, pa, pc, copt);
        b.cov_lower = std::max(b.cov_lower, ce.lower);
        b.cov_upper = std::max(b.cov_upper, ce.upper);
    }
    b.tail = 6.0 * a.size() * std::exp(-l / (1.0 + b.velocity / std::numbers::pi));
    b.rhs_lower = b.norm_v * (b.cov_lower + b.tail);
    b.rhs_upper = b.norm_v * (b.cov_upper + b.tail);
    return b;
}

}  // namespace glab
