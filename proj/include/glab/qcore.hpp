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

// Dense kernel: operators with site labels, partial traces, matrix functions,
// norms, entropies and channel gates.
//
// Conventions used throughout the library:
//   * The first label of an Operator is the most significant qubit.
//   * Superoperators act on column-stacked vectors: vec(X)[i + d*j] = X(i, j).
//   * Global states keep their labels sorted ascending.

#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <functional>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "glab/errors.hpp"

namespace glab {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using Labels = std::vector<int>;
using Rng = std::mt19937_64;

namespace tol {
inline constexpr double kState = 1e-10;
inline constexpr double kLongChain = 1e-7;
inline constexpr double kChannel = 1e-8;
inline constexpr double kPinv = 1e-12;
}  // namespace tol

// ---------------------------------------------------------------------------
// Label bookkeeping.

inline bool has_label(const Labels &labels, int l) {
    return std::find(labels.begin(), labels.end(), l) != labels.end();
}

inline int label_position(const Labels &labels, int l) {
    auto it = std::find(labels.begin(), labels.end(), l);
    if (it == labels.end()) {
        throw LabelError("unknown label " + std::to_string(l));
    }
    return static_cast<int>(it - labels.begin());
}

inline Labels sorted_labels(Labels l) {
    std::sort(l.begin(), l.end());
    return l;
}

// Elements of a not in b, order of a preserved.
inline Labels label_minus(const Labels &a, const Labels &b) {
    Labels out;
    for (int x : a) {
        if (!has_label(b, x)) {
            out.push_back(x);
        }
    }
    return out;
}

inline Labels label_union(const Labels &a, const Labels &b) {
    Labels out = a;
    for (int x : b) {
        if (!has_label(out, x)) {
            out.push_back(x);
        }
    }
    return sorted_labels(out);
}

inline Labels label_intersection(const Labels &a, const Labels &b) {
    Labels out;
    for (int x : a) {
        if (has_label(b, x)) {
            out.push_back(x);
        }
    }
    return out;
}

inline bool labels_unique(const Labels &l) {
    Labels s = sorted_labels(l);
    return std::adjacent_find(s.begin(), s.end()) == s.end();
}

inline bool same_label_set(const Labels &a, const Labels &b) {
    return sorted_labels(a) == sorted_labels(b);
}

inline size_t dim_of(size_t nqubits) {
    return size_t{1} << nqubits;
}

// idx[i] is the full-register index whose bits on `sub` spell i (first entry of
// `sub` most significant) and whose other bits are zero.
inline std::vector<size_t> index_map(const Labels &full, const Labels &sub) {
    const size_t n = full.size();
    const size_t k = sub.size();
    std::vector<size_t> shift(k);
    for (size_t b = 0; b < k; ++b) {
        shift[b] = n - 1 - static_cast<size_t>(label_position(full, sub[b]));
    }
    std::vector<size_t> idx(dim_of(k), 0);
    for (size_t i = 0; i < idx.size(); ++i) {
        size_t v = 0;
        for (size_t b = 0; b < k; ++b) {
            if ((i >> (k - 1 - b)) & 1) {
                v |= size_t{1} << shift[b];
            }
        }
        idx[i] = v;
    }
    return idx;
}

// ---------------------------------------------------------------------------
// Operators.

struct Operator {
    Mat m;
    Labels labels;

    Operator() = default;
    Operator(Mat mat, Labels labs) : m(std::move(mat)), labels(std::move(labs)) {
        validate();
    }

    size_t nqubits() const {
        return labels.size();
    }
    Eigen::Index dim() const {
        return m.rows();
    }

    void validate() const {
        if (m.rows() != m.cols()) {
            throw DomainError("operator matrix is not square");
        }
        if (labels.size() > 30 || static_cast<size_t>(m.rows()) != dim_of(labels.size())) {
            throw LabelError("operator dimension does not match 2^(number of labels)");
        }
        if (!labels_unique(labels)) {
            throw LabelError("duplicate site label");
        }
    }
};

inline Mat pauli(char c) {
    Mat p(2, 2);
    switch (c) {
        case 'I':
            p << 1, 0, 0, 1;
            break;
        case 'X':
            p << 0, 1, 1, 0;
            break;
        case 'Y':
            p << 0, cplx(0, -1), cplx(0, 1), 0;
            break;
        case 'Z':
            p << 1, 0, 0, -1;
            break;
        default:
            throw DomainError(std::string("unknown Pauli letter ") + c);
    }
    return p;
}

inline Mat kron(const Mat &a, const Mat &b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

// "XZI" -> X (x) Z (x) I.
inline Mat pauli_string(const std::string &s) {
    Mat out = Mat::Identity(1, 1);
    for (char c : s) {
        out = kron(out, pauli(c));
    }
    return out;
}

inline Operator tensor(const Operator &a, const Operator &b) {
    if (!label_intersection(a.labels, b.labels).empty()) {
        throw LabelError("tensor product of overlapping label sets");
    }
    Labels l = a.labels;
    l.insert(l.end(), b.labels.begin(), b.labels.end());
    return Operator(kron(a.m, b.m), l);
}

inline Operator reorder(const Operator &op, const Labels &new_labels) {
    if (new_labels == op.labels) {
        return op;
    }
    if (!same_label_set(new_labels, op.labels)) {
        throw LabelError("reorder requires a permutation of the labels");
    }
    auto idx = index_map(op.labels, new_labels);
    const Eigen::Index d = op.dim();
    Mat out(d, d);
    for (Eigen::Index j = 0; j < d; ++j) {
        for (Eigen::Index i = 0; i < d; ++i) {
            out(i, j) = op.m(idx[i], idx[j]);
        }
    }
    return Operator(std::move(out), new_labels);
}

inline Operator canonical(const Operator &op) {
    return reorder(op, sorted_labels(op.labels));
}

// Marginal on `keep`, returned with labels in the order given.
inline Operator partial_trace(const Operator &op, const Labels &keep) {
    if (!labels_unique(keep)) {
        throw LabelError("duplicate label in partial trace");
    }
    for (int l : keep) {
        label_position(op.labels, l);
    }
    Labels traced = label_minus(op.labels, keep);
    if (traced.empty()) {
        return reorder(op, keep);
    }
    auto ki = index_map(op.labels, keep);
    auto ti = index_map(op.labels, traced);
    const size_t dk = ki.size();
    Mat out = Mat::Zero(dk, dk);
    for (size_t j = 0; j < dk; ++j) {
        for (size_t t : ti) {
            const size_t col = ki[j] | t;
            for (size_t i = 0; i < dk; ++i) {
                out(i, j) += op.m(ki[i] | t, col);
            }
        }
    }
    return Operator(std::move(out), keep);
}

// op (x) I on `target`, with target's ordering.
inline Operator embed(const Operator &op, const Labels &target) {
    for (int l : op.labels) {
        label_position(target, l);
    }
    if (!labels_unique(target)) {
        throw LabelError("duplicate label in embed target");
    }
    Labels rest = label_minus(target, op.labels);
    auto si = index_map(target, op.labels);
    auto ri = index_map(target, rest);
    const size_t d = dim_of(target.size());
    Mat out = Mat::Zero(d, d);
    const size_t ds = si.size();
    for (size_t r : ri) {
        for (size_t b = 0; b < ds; ++b) {
            for (size_t a = 0; a < ds; ++a) {
                out(si[a] | r, si[b] | r) = op.m(a, b);
            }
        }
    }
    return Operator(std::move(out), target);
}

// ---------------------------------------------------------------------------
// Spectral helpers. Diagonal inputs skip the dense eigensolver; classical
// models rely on this path for speed.

inline bool is_diagonal(const Mat &m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            if (i != j && m(i, j) != cplx(0.0, 0.0)) {
                return false;
            }
        }
    }
    return true;
}

inline double hermiticity_residual(const Mat &m) {
    return (m - m.adjoint()).norm();
}

inline bool is_hermitian(const Mat &m, double eps = 1e-10) {
    return hermiticity_residual(m) <= eps * std::max(1.0, m.norm());
}

struct Eigh {
    RVec w;
    Mat u;  // empty when diagonal
    bool diagonal = false;

    Mat rebuild(const RVec &fw) const {
        if (diagonal) {
            return fw.cast<cplx>().asDiagonal();
        }
        return u * fw.cast<cplx>().asDiagonal() * u.adjoint();
    }
    CVec vector(Eigen::Index k) const {
        if (diagonal) {
            CVec e = CVec::Zero(w.size());
            e(k) = 1.0;
            return e;
        }
        return u.col(k);
    }
};

inline Eigh eigh(const Mat &m, bool vectors = true) {
    Eigh e;
    if (is_diagonal(m)) {
        e.w = m.diagonal().real();
        e.diagonal = true;
        return e;
    }
    Mat h = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Mat> es(h, vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
        throw NumericalIntegrityError("Hermitian eigensolver failed");
    }
    e.w = es.eigenvalues();
    if (vectors) {
        e.u = es.eigenvectors();
    }
    return e;
}

inline RVec eigvalsh(const Mat &m) {
    return eigh(m, false).w;
}

struct MatFn {
    enum class Kind { Exp, Log, Power };
    Kind kind = Kind::Exp;
    double p = 1.0;

    static MatFn exp() {
        return {Kind::Exp, 1.0};
    }
    static MatFn log() {
        return {Kind::Log, 1.0};
    }
    static MatFn power(double p) {
        return {Kind::Power, p};
    }
};

// Eigenvalues below threshold * lambda_max are treated as zero for log/power
// (pseudo-inverse convention for negative powers).
inline Mat matrix_function(const Mat &m, MatFn fn, double threshold = tol::kPinv) {
    const bool herm = is_hermitian(m);
    if (fn.kind == MatFn::Kind::Exp && !herm) {
        return m.exp();
    }
    if (!herm) {
        throw DomainError("log/power require a Hermitian operator");
    }
    Eigh e = eigh(m);
    const double lmax = e.w.size() ? e.w.cwiseAbs().maxCoeff() : 0.0;
    const double cut = threshold * lmax;
    RVec f(e.w.size());
    for (Eigen::Index k = 0; k < e.w.size(); ++k) {
        const double x = e.w(k);
        switch (fn.kind) {
            case MatFn::Kind::Exp:
                f(k) = std::exp(x);
                break;
            case MatFn::Kind::Log:
                if (x <= cut) {
                    throw DomainError("log of a non-positive eigenvalue");
                }
                f(k) = std::log(x);
                break;
            case MatFn::Kind::Power:
                if (std::abs(x) <= cut) {
                    f(k) = 0.0;
                } else if (x < 0 && fn.p != std::round(fn.p)) {
                    throw DomainError("fractional power of a negative eigenvalue");
                } else {
                    f(k) = std::pow(x, fn.p);
                }
                break;
        }
    }
    return e.rebuild(f);
}

inline Operator matrix_function(const Operator &op, MatFn fn, double threshold = tol::kPinv) {
    return Operator(matrix_function(op.m, fn, threshold), op.labels);
}

// Product with a diagonal shortcut on either side.
inline Mat mul(const Mat &a, const Mat &b) {
    if (is_diagonal(a)) {
        return a.diagonal().asDiagonal() * b;
    }
    if (is_diagonal(b)) {
        return a * b.diagonal().asDiagonal();
    }
    return a * b;
}

// ---------------------------------------------------------------------------
// Norms, fidelity, entropy.

inline RVec singular_values(const Mat &m) {
    Eigen::BDCSVD<Mat> svd(m);
    return svd.singularValues();
}

inline double trace_norm(const Mat &m) {
    if (is_hermitian(m, 1e-13)) {
        return eigvalsh(m).cwiseAbs().sum();
    }
    return singular_values(m).sum();
}

inline double trace_norm(const Operator &op) {
    return trace_norm(op.m);
}

inline double operator_norm(const Mat &m) {
    if (m.size() == 0) {
        return 0.0;
    }
    if (is_hermitian(m, 1e-13)) {
        return eigvalsh(m).cwiseAbs().maxCoeff();
    }
    return singular_values(m).maxCoeff();
}

// Trace distance in the unnormalized convention ||a - b||_1.
inline double trace_distance(const Operator &a, const Operator &b) {
    Operator bb = reorder(b, a.labels);
    return trace_norm(Mat(a.m - bb.m));
}

struct StateCheck {
    double hermiticity = 0.0;
    double min_eigenvalue = 0.0;
    double trace_error = 0.0;

    bool ok(double eps) const {
        return hermiticity <= eps && min_eigenvalue >= -eps && trace_error <= eps;
    }
};

inline StateCheck check_state(const Mat &m) {
    StateCheck c;
    c.hermiticity = hermiticity_residual(m);
    c.trace_error = std::abs(m.trace() - cplx(1.0, 0.0));
    c.min_eigenvalue = m.rows() ? eigvalsh(m).minCoeff() : 0.0;
    return c;
}

inline void require_state(const Mat &m, double eps, const char *what) {
    StateCheck c = check_state(m);
    if (!c.ok(eps)) {
        throw DomainError(std::string(what) + " is not a density matrix (hermiticity " +
                          std::to_string(c.hermiticity) + ", min eigenvalue " +
                          std::to_string(c.min_eigenvalue) + ", trace error " +
                          std::to_string(c.trace_error) + ")");
    }
}

inline Mat sqrt_psd(const Mat &m) {
    Eigh e = eigh(m);
    RVec f = e.w.cwiseMax(0.0).cwiseSqrt();
    return e.rebuild(f);
}

// F = || sqrt(rho) sqrt(sigma) ||_1.
inline double fidelity(const Operator &rho, const Operator &sigma) {
    require_state(rho.m, tol::kLongChain, "fidelity argument");
    Operator s = reorder(sigma, rho.labels);
    require_state(s.m, tol::kLongChain, "fidelity argument");
    if (is_diagonal(rho.m) && is_diagonal(s.m)) {
        RVec a = rho.m.diagonal().real().cwiseMax(0.0);
        RVec b = s.m.diagonal().real().cwiseMax(0.0);
        return std::min(1.0, a.cwiseProduct(b).cwiseSqrt().sum());
    }
    Mat p = sqrt_psd(rho.m) * sqrt_psd(s.m);
    return std::min(1.0, singular_values(p).sum());
}

// von Neumann entropy in bits.
inline double entropy(const Mat &rho) {
    RVec w = eigvalsh(rho);
    double s = 0.0;
    for (Eigen::Index k = 0; k < w.size(); ++k) {
        if (w(k) > 0) {
            s -= w(k) * std::log2(w(k));
        }
    }
    return s;
}

inline double entropy(const Operator &rho) {
    return entropy(rho.m);
}

inline double marginal_entropy(const Operator &rho, const Labels &keep) {
    if (keep.empty()) {
        return 0.0;
    }
    return entropy(partial_trace(rho, keep));
}

// I(A:C|B) = S(AB) + S(BC) - S(B) - S(ABC); values in [-1e-9, 0) clip to 0.
inline double cmi(const Operator &rho, const Labels &a, const Labels &b, const Labels &c) {
    Labels all = a;
    all.insert(all.end(), b.begin(), b.end());
    all.insert(all.end(), c.begin(), c.end());
    if (!labels_unique(all)) {
        throw PartitionError("cmi regions overlap");
    }
    if (!same_label_set(all, rho.labels)) {
        throw PartitionError("cmi regions must partition the state's labels");
    }
    Labels ab = a, bc = b;
    ab.insert(ab.end(), b.begin(), b.end());
    bc.insert(bc.end(), c.begin(), c.end());
    double v = marginal_entropy(rho, ab) + marginal_entropy(rho, bc) - marginal_entropy(rho, b) -
               entropy(rho);
    if (v < 0 && v >= -1e-9) {
        v = 0.0;
    }
    return v;
}

// ---------------------------------------------------------------------------
// Vectorization.

inline CVec vec(const Mat &x) {
    return Eigen::Map<const CVec>(x.data(), x.size());
}

inline Mat unvec(const CVec &v, Eigen::Index d) {
    return Eigen::Map<const Mat>(v.data(), d, d);
}

// ---------------------------------------------------------------------------
// Channel gates.
//
// A gate first traces out `erase`, then maps operators on `in` to operators on
// `out` through `super` (d_out^2 x d_in^2). Labels of `out` not in `in` are
// created fresh. Ordinary gates have erase empty and in == out.

enum class GateKind { Recovery, Depolarize, Resample, Custom };

inline const char *gate_kind_name(GateKind k) {
    switch (k) {
        case GateKind::Recovery:
            return "recovery";
        case GateKind::Depolarize:
            return "depolarize";
        case GateKind::Resample:
            return "resample";
        case GateKind::Custom:
            return "custom";
    }
    return "custom";
}

struct ChannelGate {
    Labels erase;
    Labels in;
    Labels out;
    Mat super;
    GateKind kind = GateKind::Custom;

    Labels support() const {
        return label_union(label_union(erase, in), out);
    }
    Eigen::Index d_in() const {
        return static_cast<Eigen::Index>(dim_of(in.size()));
    }
    Eigen::Index d_out() const {
        return static_cast<Eigen::Index>(dim_of(out.size()));
    }

    void validate() const {
        if (!labels_unique(erase) || !labels_unique(in) || !labels_unique(out)) {
            throw LabelError("gate label lists must not repeat");
        }
        if (!label_intersection(erase, in).empty()) {
            throw LabelError("gate erases part of its own input");
        }
        if (super.rows() != d_out() * d_out() || super.cols() != d_in() * d_in()) {
            throw DomainError("superoperator shape does not match gate labels");
        }
    }
};

inline ChannelGate gate_from_superop(const Labels &labels, Mat s, GateKind kind = GateKind::Custom) {
    ChannelGate g{{}, labels, labels, std::move(s), kind};
    g.validate();
    return g;
}

inline ChannelGate identity_gate(const Labels &labels) {
    const Eigen::Index d = static_cast<Eigen::Index>(dim_of(labels.size()));
    return gate_from_superop(labels, Mat::Identity(d * d, d * d));
}

inline ChannelGate depolarizer_gate(const Labels &labels) {
    const Eigen::Index d = static_cast<Eigen::Index>(dim_of(labels.size()));
    CVec id = vec(Mat::Identity(d, d));
    return gate_from_superop(labels, (id / static_cast<double>(d)) * id.adjoint(), GateKind::Depolarize);
}

// X -> Tr(X) tau.
inline ChannelGate replacement_gate(const Labels &labels, const Mat &tau) {
    const Eigen::Index d = static_cast<Eigen::Index>(dim_of(labels.size()));
    CVec id = vec(Mat::Identity(d, d));
    return gate_from_superop(labels, vec(tau) * id.adjoint(), GateKind::Resample);
}

inline Mat superop_from_kraus(const std::vector<Mat> &kraus) {
    const Eigen::Index dout = kraus.at(0).rows();
    const Eigen::Index din = kraus.at(0).cols();
    Mat s = Mat::Zero(dout * dout, din * din);
    for (const Mat &k : kraus) {
        s += kron(k.conjugate(), k);
    }
    return s;
}

inline ChannelGate unitary_gate(const Labels &labels, const Mat &u) {
    return gate_from_superop(labels, superop_from_kraus({u}));
}

// Q(i + d_in*j, r + d_r*s) = rho((r, i), (s, j)) with `in` least significant.
inline Mat gather_blocks(const Operator &rho_rest_in, Eigen::Index d_in) {
    const Eigen::Index d = rho_rest_in.dim();
    const Eigen::Index dr = d / d_in;
    Mat q(d_in * d_in, dr * dr);
    for (Eigen::Index s = 0; s < dr; ++s) {
        for (Eigen::Index r = 0; r < dr; ++r) {
            for (Eigen::Index j = 0; j < d_in; ++j) {
                for (Eigen::Index i = 0; i < d_in; ++i) {
                    q(i + d_in * j, r + dr * s) = rho_rest_in.m(r * d_in + i, s * d_in + j);
                }
            }
        }
    }
    return q;
}

inline Mat scatter_blocks(const Mat &p, Eigen::Index d_out, Eigen::Index dr) {
    Mat y(dr * d_out, dr * d_out);
    for (Eigen::Index s = 0; s < dr; ++s) {
        for (Eigen::Index r = 0; r < dr; ++r) {
            for (Eigen::Index b = 0; b < d_out; ++b) {
                for (Eigen::Index a = 0; a < d_out; ++a) {
                    y(r * d_out + a, s * d_out + b) = p(a + d_out * b, r + dr * s);
                }
            }
        }
    }
    return y;
}

// Applies a gate to any operator; no certification. Output labels are sorted.
inline Operator apply_map(const Operator &op, const ChannelGate &g) {
    for (int l : g.erase) {
        label_position(op.labels, l);
    }
    for (int l : g.in) {
        label_position(op.labels, l);
    }
    Labels rest = label_minus(label_minus(op.labels, g.erase), g.in);
    if (!label_intersection(rest, g.out).empty()) {
        throw LabelError("gate output collides with untouched labels");
    }
    Labels keep = rest;
    keep.insert(keep.end(), g.in.begin(), g.in.end());
    Operator reduced = partial_trace(op, keep);
    const Eigen::Index dr = static_cast<Eigen::Index>(dim_of(rest.size()));
    Mat q = gather_blocks(reduced, g.d_in());
    Mat p = g.super * q;
    Labels out_labels = rest;
    out_labels.insert(out_labels.end(), g.out.begin(), g.out.end());
    return canonical(Operator(scatter_blocks(p, g.d_out(), dr), out_labels));
}

// Adjoint (Heisenberg picture): Y on rest+out -> (I_erase) (x) S^dag[Y] on rest+in.
inline Operator apply_map_adjoint(const Operator &op, const ChannelGate &g) {
    for (int l : g.out) {
        label_position(op.labels, l);
    }
    Labels rest = label_minus(op.labels, g.out);
    Labels keep = rest;
    keep.insert(keep.end(), g.out.begin(), g.out.end());
    Operator y = reorder(op, keep);
    const Eigen::Index dr = static_cast<Eigen::Index>(dim_of(rest.size()));
    Mat q = gather_blocks(y, g.d_out());
    Mat p = g.super.adjoint() * q;
    Labels in_labels = rest;
    in_labels.insert(in_labels.end(), g.in.begin(), g.in.end());
    Operator x(scatter_blocks(p, g.d_in(), dr), in_labels);
    Labels missing = label_minus(g.erase, in_labels);
    if (!missing.empty()) {
        Labels target = in_labels;
        target.insert(target.end(), missing.begin(), missing.end());
        x = embed(x, target);
    }
    return canonical(x);
}

struct ApplyOptions {
    bool check_positivity = true;
    double eps = tol::kLongChain;
};

// Applies a gate to a state and re-certifies the output.
inline Operator apply_gate(const Operator &state, const ChannelGate &g, ApplyOptions opt = {}) {
    Operator out = apply_map(state, g);
    const double herm = hermiticity_residual(out.m);
    const double dtr = std::abs(out.m.trace() - state.m.trace());
    if (herm > opt.eps || dtr > opt.eps) {
        throw NumericalIntegrityError("gate output failed certification (hermiticity " +
                                      std::to_string(herm) + ", trace change " + std::to_string(dtr) + ")");
    }
    if (opt.check_positivity) {
        const double mn = eigvalsh(out.m).minCoeff();
        if (mn < -opt.eps) {
            throw NumericalIntegrityError("gate output has negative eigenvalue " + std::to_string(mn));
        }
    }
    return out;
}

// Choi matrix J = sum_ij |i><j| (x) E(|i><j|) of the in -> out part.
inline Mat choi_matrix(const Mat &super, Eigen::Index d_in, Eigen::Index d_out) {
    Mat j(d_in * d_out, d_in * d_out);
    for (Eigen::Index jj = 0; jj < d_in; ++jj) {
        for (Eigen::Index ii = 0; ii < d_in; ++ii) {
            for (Eigen::Index b = 0; b < d_out; ++b) {
                for (Eigen::Index a = 0; a < d_out; ++a) {
                    j(ii * d_out + a, jj * d_out + b) = super(a + d_out * b, ii + d_in * jj);
                }
            }
        }
    }
    return j;
}

struct ChannelCertificate {
    double min_choi_eigenvalue = 0.0;
    double tp_residual = 0.0;
    bool cp = false;
    bool tp = false;

    bool ok() const {
        return cp && tp;
    }
};

inline ChannelCertificate certify_superop(const Mat &super, Eigen::Index d_in, Eigen::Index d_out,
                                          double eps = tol::kChannel) {
    ChannelCertificate c;
    c.min_choi_eigenvalue = eigvalsh(choi_matrix(super, d_in, d_out)).minCoeff();
    CVec dual = super.adjoint() * vec(Mat::Identity(d_out, d_out));
    c.tp_residual = (dual - vec(Mat::Identity(d_in, d_in))).cwiseAbs().maxCoeff();
    c.cp = c.min_choi_eigenvalue >= -eps;
    c.tp = c.tp_residual <= eps;
    return c;
}

inline ChannelCertificate certify_gate(const ChannelGate &g, double eps = tol::kChannel) {
    g.validate();
    return certify_superop(g.super, g.d_in(), g.d_out(), eps);
}

// ---------------------------------------------------------------------------
// Induced 1->1 norm lower bound.

struct LinearMap {
    Eigen::Index dim = 0;  // input and output dimension (same label set)
    std::function<Mat(const Mat &)> apply;
    std::function<Mat(const Mat &)> adjoint;
};

inline LinearMap map_from_superop(const Mat &s, Eigen::Index d) {
    return {d, [s, d](const Mat &x) { return unvec(s * vec(x), d); },
            [s, d](const Mat &y) { return unvec(s.adjoint() * vec(y), d); }};
}

// Gate viewed as a map on its sorted support.
inline LinearMap map_from_gate(const ChannelGate &g) {
    Labels sup = g.support();
    const Eigen::Index d = static_cast<Eigen::Index>(dim_of(sup.size()));
    return {d, [g, sup](const Mat &x) { return reorder(apply_map(Operator(x, sup), g), sup).m; },
            [g, sup](const Mat &y) { return reorder(apply_map_adjoint(Operator(y, sup), g), sup).m; }};
}

struct NormOptions {
    int basis_starts = 2;
    int random_restarts = 4;
    int iterations = 30;
    uint64_t seed = 7;
    double rel_tol = 1e-12;
    size_t max_qubits = 8;
};

inline CVec random_unit_vector(Eigen::Index d, Rng &rng) {
    std::normal_distribution<double> nd;
    CVec v(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        v(i) = cplx(nd(rng), nd(rng));
    }
    return v / v.norm();
}

// Ritz vector for the largest eigenvalue of Hermitian h from a Krylov space of
// at most `krylov` vectors started at `start`; dense eigh for small h.
// Falls back to dense eigh when the Krylov space closes early.
inline CVec top_eigenvector(const Mat &h, const CVec &start, Eigen::Index krylov = 48) {
    const Eigen::Index d = h.rows();
    auto dense = [&]() {
        Eigh e = eigh(h);
        Eigen::Index k;
        e.w.maxCoeff(&k);
        return e.vector(k);
    };
    if (d <= 2 * krylov) {
        return dense();
    }
    Mat v(d, krylov);
    RVec alpha(krylov), beta(krylov);
    CVec q = start / start.norm();
    Eigen::Index m = 0;
    for (; m < krylov; ++m) {
        v.col(m) = q;
        CVec w = h * q;
        alpha(m) = q.dot(w).real();
        // Full reorthogonalization, twice for stability.
        for (int pass = 0; pass < 2; ++pass) {
            w -= v.leftCols(m + 1) * (v.leftCols(m + 1).adjoint() * w);
        }
        beta(m) = w.norm();
        if (beta(m) <= 1e-12 * std::max(1.0, std::abs(alpha(m)))) {
            return dense();
        }
        q = w / beta(m);
    }
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index k = 0; k < m; ++k) {
        t(k, k) = alpha(k);
        if (k + 1 < m) {
            t(k, k + 1) = t(k + 1, k) = beta(k);
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    CVec out = v.leftCols(m) * es.eigenvectors().col(m - 1).cast<cplx>();
    return out / out.norm();
}

// Ascent over pure-state inputs; extreme points of the Hermitian trace-norm
// ball are +-|psi><psi|, so this is a certified lower bound.
inline double induced_trace_norm(const LinearMap &map, NormOptions opt = {}) {
    if (static_cast<size_t>(map.dim) > dim_of(opt.max_qubits)) {
        throw ResourceError("induced_trace_norm: map dimension " + std::to_string(map.dim) + " above cap");
    }
    Rng rng(opt.seed);
    double best = 0.0;
    const int starts = opt.basis_starts + opt.random_restarts;
    for (int st = 0; st < starts; ++st) {
        CVec psi;
        if (st < opt.basis_starts) {
            psi = CVec::Zero(map.dim);
            psi((st * (map.dim / std::max(1, opt.basis_starts))) % map.dim) = 1.0;
        } else {
            psi = random_unit_vector(map.dim, rng);
        }
        double prev = -1.0;
        for (int it = 0; it < opt.iterations; ++it) {
            Mat y = map.apply(psi * psi.adjoint());
            Mat w;
            double val;
            if (is_hermitian(y, 1e-12)) {
                Eigh e = eigh(y);
                val = e.w.cwiseAbs().sum();
                RVec sgn = e.w.unaryExpr([](double x) { return x >= 0 ? 1.0 : -1.0; });
                w = e.rebuild(sgn);
            } else {
                Eigen::BDCSVD<Mat> svd(y, Eigen::ComputeFullU | Eigen::ComputeFullV);
                val = svd.singularValues().sum();
                w = svd.matrixV() * svd.matrixU().adjoint();
            }
            best = std::max(best, val);
            if (val <= prev * (1 + opt.rel_tol) + 1e-300) {
                break;
            }
            prev = val;
            Mat gop = map.adjoint(w);
            Mat h = 0.5 * (gop + gop.adjoint());
            psi = top_eigenvector(h, psi);
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Random objects (deterministic given the generator).

inline Mat ginibre(Eigen::Index rows, Eigen::Index cols, Rng &rng) {
    std::normal_distribution<double> nd;
    Mat g(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) {
            g(i, j) = cplx(nd(rng), nd(rng));
        }
    }
    return g;
}

inline Mat random_state(Eigen::Index d, Rng &rng, Eigen::Index rank = -1) {
    Mat g = ginibre(d, rank < 0 ? d : rank, rng);
    Mat r = g * g.adjoint();
    return r / r.trace().real();
}

inline Mat random_hermitian(Eigen::Index d, Rng &rng) {
    Mat g = ginibre(d, d, rng);
    return 0.5 * (g + g.adjoint());
}

inline Mat random_unitary(Eigen::Index d, Rng &rng) {
    Eigen::HouseholderQR<Mat> qr(ginibre(d, d, rng));
    Mat q = qr.householderQ();
    Mat r = qr.matrixQR();
    for (Eigen::Index k = 0; k < d; ++k) {
        cplx ph = r(k, k) / std::abs(r(k, k));
        q.col(k) *= ph;
    }
    return q;
}

inline Mat pure_state(const CVec &psi) {
    CVec v = psi / psi.norm();
    return v * v.adjoint();
}

// ---------------------------------------------------------------------------
// Serialization: text header then row-major little-endian float64 (re, im).
//
//   GLABOP 1
//   labels <n> l_0 ... l_{n-1}
//   dim <d>
//   <binary payload of 16*d*d bytes>

namespace detail {
inline void put_le(std::ostream &os, double x) {
    uint64_t u;
    std::memcpy(&u, &x, 8);
    if constexpr (std::endian::native == std::endian::big) {
        u = __builtin_bswap64(u);
    }
    os.write(reinterpret_cast<const char *>(&u), 8);
}
inline double get_le(std::istream &is) {
    uint64_t u;
    is.read(reinterpret_cast<char *>(&u), 8);
    if (!is) {
        throw DomainError("truncated operator payload");
    }
    if constexpr (std::endian::native == std::endian::big) {
        u = __builtin_bswap64(u);
    }
    double x;
    std::memcpy(&x, &u, 8);
    return x;
}
}  // namespace detail

inline void write_operator(std::ostream &os, const Operator &op) {
    os << "GLABOP 1\nlabels " << op.labels.size();
    for (int l : op.labels) {
        os << ' ' << l;
    }
    os << "\ndim " << op.dim() << "\n";
    for (Eigen::Index i = 0; i < op.dim(); ++i) {
        for (Eigen::Index j = 0; j < op.dim(); ++j) {
            detail::put_le(os, op.m(i, j).real());
            detail::put_le(os, op.m(i, j).imag());
        }
    }
}

inline Operator read_operator(std::istream &is) {
    std::string magic, key;
    int version = 0;
    is >> magic >> version;
    if (magic != "GLABOP" || version != 1) {
        throw DomainError("not a GLABOP v1 stream");
    }
    size_t n = 0;
    is >> key >> n;
    if (key != "labels" || n > 30) {
        throw DomainError("bad operator header");
    }
    Labels labels(n);
    for (auto &l : labels) {
        is >> l;
    }
    Eigen::Index d = 0;
    is >> key >> d;
    if (key != "dim" || static_cast<size_t>(d) != dim_of(n)) {
        throw DomainError("bad operator dimension");
    }
    is.get();
    Mat m(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            double re = detail::get_le(is);
            double im = detail::get_le(is);
            m(i, j) = cplx(re, im);
        }
    }
    return Operator(std::move(m), std::move(labels));
}

// FNV-1a over the header and payload of write_operator's format; identifies
// reference states in reports. Not a cryptographic hash.
inline std::string fingerprint(const Operator &op) {
    uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](const void *p, size_t n) {
        const unsigned char *c = static_cast<const unsigned char *>(p);
        for (size_t i = 0; i < n; ++i) {
            h ^= c[i];
            h *= 1099511628211ULL;
        }
    };
    for (int l : op.labels) {
        mix(&l, sizeof l);
    }
    for (Eigen::Index j = 0; j < op.dim(); ++j) {
        for (Eigen::Index i = 0; i < op.dim(); ++i) {
            double re = op.m(i, j).real(), im = op.m(i, j).imag();
            mix(&re, 8);
            mix(&im, 8);
        }
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace glab
