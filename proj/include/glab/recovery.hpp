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

// Petz, rotated Petz and twirled Petz recovery maps.
//
// For a reference state sigma on (erase, kept) the rotated map is
//   R^t(X) = sigma^{1/2-it} [ (I_erase (x) sigma_k^{-1/2+it} X sigma_k^{-1/2-it}) ] sigma^{1/2+it},
// with sigma_k = Tr_erase sigma. The twirled map averages R^t against
// beta0(t) dt. In the eigenbases sigma = sum_j D_j |u_j><u_j| and
// sigma_k = sum_a E_a |v_a><v_a| every rotation only contributes the phase
// exp(i t w) with w = ln E_a - ln E_b - ln D_j + ln D_l, so the average is a
// pointwise multiplication by g(w) = sum_k w_k exp(i t_k w).

#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "glab/qcore.hpp"

namespace glab {

inline double beta0(double t) {
    return std::numbers::pi / 2.0 / (std::cosh(std::numbers::pi * t) + 1.0);
}

// Integral of beta0 over [-w, w].
inline double beta0_mass(double w) {
    return std::tanh(std::numbers::pi * w / 2.0);
}

struct Quadrature {
    std::vector<double> t;
    std::vector<double> w;  // sums to 1
    double window = 0.0;
    double truncation = 0.0;  // beta0 mass outside the window
    bool uniform = false;

    std::string describe() const {
        if (t.size() == 1) {
            return "single node t=" + std::to_string(t[0]);
        }
        return "trapezoid window " + std::to_string(window) + " nodes " + std::to_string(t.size());
    }

    cplx kernel(double omega) const {
        if (uniform && t.size() > 1) {
            const double h = t[1] - t[0];
            const cplx z = std::polar(1.0, h * omega);
            cplx acc = 0.0;
            for (size_t k = t.size(); k-- > 0;) {
                acc = acc * z + w[k];
            }
            return acc * std::polar(1.0, t[0] * omega);
        }
        cplx acc = 0.0;
        for (size_t k = 0; k < t.size(); ++k) {
            acc += w[k] * std::polar(1.0, t[k] * omega);
        }
        return acc;
    }
};

// Trapezoid rule on [-window, window]; weights renormalized to total 1.
inline Quadrature trapezoid_quadrature(double window = 12.0, int nodes = 241) {
    if (nodes < 2 || window <= 0) {
        throw DomainError("quadrature needs at least two nodes and a positive window");
    }
    Quadrature q;
    q.window = window;
    q.uniform = true;
    const double h = 2.0 * window / (nodes - 1);
    double total = 0.0;
    for (int k = 0; k < nodes; ++k) {
        const double t = -window + k * h;
        double w = h * beta0(t);
        if (k == 0 || k == nodes - 1) {
            w *= 0.5;
        }
        q.t.push_back(t);
        q.w.push_back(w);
        total += w;
    }
    for (auto &w : q.w) {
        w /= total;
    }
    q.truncation = 1.0 - beta0_mass(window);
    return q;
}

inline Quadrature single_node_quadrature(double t = 0.0) {
    Quadrature q;
    q.t = {t};
    q.w = {1.0};
    return q;
}

struct RecoveryMap {
    ChannelGate gate;  // in = kept, out = erase ++ kept
    Labels erase;
    Labels kept;
    Quadrature quad;
    std::string reference_hash;
    double min_kept_eigenvalue = 0.0;
    bool conditioning_warning = false;
};

struct RecoveryOptions {
    double pinv_threshold = tol::kPinv;
    double warn_threshold = 1e-10;
};

inline RecoveryMap recovery_map(const Operator &sigma, const Labels &erase, const Quadrature &quad,
                                RecoveryOptions opt = {}) {
    if (!labels_unique(erase)) {
        throw LabelError("duplicate erase label");
    }
    for (int l : erase) {
        label_position(sigma.labels, l);
    }
    Labels kept = label_minus(sigma.labels, erase);
    Labels order = erase;
    order.insert(order.end(), kept.begin(), kept.end());
    Operator s = reorder(sigma, order);
    Operator sk = partial_trace(s, kept);

    RecoveryMap rm;
    rm.erase = erase;
    rm.kept = kept;
    rm.quad = quad;
    rm.reference_hash = fingerprint(canonical(sigma));

    const Eigen::Index d = s.dim();
    const Eigen::Index dk = sk.dim();
    const Eigen::Index de = d / dk;

    Eigh es = eigh(s.m);
    Eigh ek = eigh(sk.m);
    const double emax = ek.w.size() ? ek.w.maxCoeff() : 0.0;
    const double ecut = opt.pinv_threshold * emax;
    double emin_pos = emax;
    for (Eigen::Index a = 0; a < dk; ++a) {
        if (ek.w(a) > ecut) {
            emin_pos = std::min(emin_pos, ek.w(a));
        }
    }
    rm.min_kept_eigenvalue = ek.w.minCoeff();
    rm.conditioning_warning = emin_pos < opt.warn_threshold * emax || rm.min_kept_eigenvalue < ecut;

    RVec sqd = es.w.cwiseMax(0.0).cwiseSqrt();
    RVec lnd(d), lne(dk), inve(dk);
    for (Eigen::Index j = 0; j < d; ++j) {
        lnd(j) = es.w(j) > 0 ? std::log(es.w(j)) : 0.0;
    }
    for (Eigen::Index a = 0; a < dk; ++a) {
        const bool live = ek.w(a) > ecut;
        lne(a) = live ? std::log(ek.w(a)) : 0.0;
        inve(a) = live ? 1.0 / std::sqrt(ek.w(a)) : 0.0;
    }
    const bool trivial_kernel = quad.t.size() == 1 && quad.t[0] == 0.0;

    // Superoperator in the kept eigenbasis: column a + dk*b is the image of |v_a><v_b|.
    Mat sv = Mat::Zero(d * d, dk * dk);
    if (es.diagonal && ek.diagonal) {
        for (Eigen::Index b = 0; b < dk; ++b) {
            for (Eigen::Index a = 0; a < dk; ++a) {
                const double pre = inve(a) * inve(b);
                if (pre == 0.0) {
                    continue;
                }
                for (Eigen::Index e = 0; e < de; ++e) {
                    const Eigen::Index j = e * dk + a, l = e * dk + b;
                    const double amp = pre * sqd(j) * sqd(l);
                    if (amp == 0.0) {
                        continue;
                    }
                    const cplx g = trivial_kernel ? cplx(1.0) : quad.kernel(lne(a) - lne(b) - lnd(j) + lnd(l));
                    sv(j + d * l, a + dk * b) = amp * g;
                }
            }
        }
    } else {
        Mat u = es.diagonal ? Mat(Mat::Identity(d, d)) : es.u;
        Mat v = ek.diagonal ? Mat(Mat::Identity(dk, dk)) : ek.u;
        // ya[a] = U^dag (I_erase (x) v_a), d x de.
        std::vector<Mat> ya(dk);
        for (Eigen::Index a = 0; a < dk; ++a) {
            Mat emb = Mat::Zero(d, de);
            for (Eigen::Index e = 0; e < de; ++e) {
                emb.block(e * dk, e, dk, 1) = v.col(a);
            }
            ya[a] = u.adjoint() * emb;
        }
        Mat w(d, d), out(d, d);
        for (Eigen::Index b = 0; b < dk; ++b) {
            for (Eigen::Index a = 0; a < dk; ++a) {
                const double pre = inve(a) * inve(b);
                if (pre == 0.0) {
                    continue;
                }
                w.noalias() = ya[a] * ya[b].adjoint();
                for (Eigen::Index l = 0; l < d; ++l) {
                    for (Eigen::Index j = 0; j < d; ++j) {
                        const double amp = pre * sqd(j) * sqd(l);
                        if (amp == 0.0) {
                            w(j, l) = 0.0;
                            continue;
                        }
                        const cplx g =
                            trivial_kernel ? cplx(1.0) : quad.kernel(lne(a) - lne(b) - lnd(j) + lnd(l));
                        w(j, l) *= amp * g;
                    }
                }
                out.noalias() = u * w * u.adjoint();
                sv.col(a + dk * b) = vec(out);
            }
        }
    }
    Mat superop;
    if (ek.diagonal) {
        superop = std::move(sv);
    } else {
        superop = sv * kron(ek.u.transpose(), ek.u.adjoint());
    }
    rm.gate = ChannelGate{{}, kept, order, std::move(superop), GateKind::Recovery};
    rm.gate.validate();
    return rm;
}

// Rotated Petz map R^t; t = 0 is the plain Petz map.
inline RecoveryMap petz_map(const Operator &sigma, const Labels &erase, double t = 0.0, RecoveryOptions opt = {}) {
    return recovery_map(sigma, erase, single_node_quadrature(t), opt);
}

inline RecoveryMap twirled_petz(const Operator &sigma, const Labels &erase,
                                const Quadrature &quad = trapezoid_quadrature(), RecoveryOptions opt = {}) {
    return recovery_map(sigma, erase, quad, opt);
}

// R o Tr_{extra}: erase `extra` from the input before recovering.
inline ChannelGate erase_then(const RecoveryMap &rm, const Labels &extra) {
    ChannelGate g = rm.gate;
    g.erase = extra;
    g.validate();
    return g;
}

inline ChannelGate erase_then(RecoveryMap &&rm, const Labels &extra) {
    ChannelGate g = std::move(rm.gate);
    g.erase = extra;
    g.validate();
    return g;
}

// Bound sqrt(4 ln2 * I) on ||rho - R[rho]||_1 for I in bits.
inline double recoverability_bound(double cmi_bits) {
    return std::sqrt(4.0 * std::log(2.0) * std::max(0.0, cmi_bits));
}

}  // namespace glab
