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

// Pauli words in the GF(2) symplectic representation, Gibbs expectations of
// commuting stabilizer Hamiltonians, homological codes on hypercubic cell
// complexes, and the Ising disorder parameter.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "glab/errors.hpp"
#include "glab/model.hpp"
#include "glab/qcore.hpp"

namespace glab {

// ---------------------------------------------------------------------------
// GF(2) vectors.

class BitVec {
   public:
    BitVec() = default;
    explicit BitVec(size_t n) : n_(n), w_((n + 63) / 64, 0) {}

    size_t size() const {
        return n_;
    }
    bool get(size_t i) const {
        return (w_[i >> 6] >> (i & 63)) & 1;
    }
    void set(size_t i, bool v = true) {
        if (v) {
            w_[i >> 6] |= uint64_t(1) << (i & 63);
        } else {
            w_[i >> 6] &= ~(uint64_t(1) << (i & 63));
        }
    }
    void flip(size_t i) {
        w_[i >> 6] ^= uint64_t(1) << (i & 63);
    }
    BitVec &operator^=(const BitVec &o) {
        for (size_t k = 0; k < w_.size(); ++k) {
            w_[k] ^= o.w_[k];
        }
        return *this;
    }
    bool any() const {
        for (uint64_t x : w_) {
            if (x) {
                return true;
            }
        }
        return false;
    }
    int count() const {
        int c = 0;
        for (uint64_t x : w_) {
            c += __builtin_popcountll(x);
        }
        return c;
    }
    // Parity of the overlap with o.
    bool dot(const BitVec &o) const {
        uint64_t acc = 0;
        for (size_t k = 0; k < w_.size(); ++k) {
            acc ^= w_[k] & o.w_[k];
        }
        return __builtin_popcountll(acc) & 1;
    }
    bool operator==(const BitVec &o) const {
        return n_ == o.n_ && w_ == o.w_;
    }

   private:
    size_t n_ = 0;
    std::vector<uint64_t> w_;
};

// Row echelon basis with pivot columns; supports membership and decomposition.
class Gf2Basis {
   public:
    explicit Gf2Basis(size_t ncols, size_t ntags = 0) : ncols_(ncols), ntags_(ntags) {}

    // Reduces v (and its tag) against the basis; returns true when v was independent.
    bool insert(BitVec v, BitVec tag = {}) {
        if (tag.size() == 0) {
            tag = BitVec(ntags_);
        }
        reduce(v, tag);
        if (!v.any()) {
            return false;
        }
        size_t p = 0;
        while (!v.get(p)) {
            ++p;
        }
        // Keep the basis fully reduced on pivot columns.
        for (size_t k = 0; k < rows_.size(); ++k) {
            if (rows_[k].get(p)) {
                rows_[k] ^= v;
                tags_[k] ^= tag;
            }
        }
        rows_.push_back(std::move(v));
        tags_.push_back(std::move(tag));
        pivots_.push_back(p);
        return true;
    }

    void reduce(BitVec &v, BitVec &tag) const {
        for (size_t k = 0; k < rows_.size(); ++k) {
            if (v.get(pivots_[k])) {
                v ^= rows_[k];
                if (tag.size() == tags_[k].size() && tag.size() > 0) {
                    tag ^= tags_[k];
                }
            }
        }
    }

    bool contains(const BitVec &v) const {
        BitVec x = v, t(ntags_);
        reduce(x, t);
        return !x.any();
    }

    // Tag combination spanning v, if v is in the span.
    std::optional<BitVec> decompose(const BitVec &v) const {
        BitVec x = v, t(ntags_);
        reduce(x, t);
        if (x.any()) {
            return std::nullopt;
        }
        return t;
    }

    size_t rank() const {
        return rows_.size();
    }
    size_t columns() const {
        return ncols_;
    }

   private:
    size_t ncols_;
    size_t ntags_;
    std::vector<BitVec> rows_;
    std::vector<BitVec> tags_;
    std::vector<size_t> pivots_;
};

inline size_t gf2_rank(const std::vector<BitVec> &rows) {
    if (rows.empty()) {
        return 0;
    }
    Gf2Basis b(rows[0].size());
    for (const auto &r : rows) {
        b.insert(r);
    }
    return b.rank();
}

// ---------------------------------------------------------------------------
// Pauli words: i^phase * prod_j X_j^{x_j} Z_j^{z_j}.

struct PauliWord {
    BitVec x;
    BitVec z;
    int phase = 0;  // power of i

    PauliWord() = default;
    explicit PauliWord(size_t n) : x(n), z(n) {}

    size_t size() const {
        return x.size();
    }
    bool is_identity_up_to_phase() const {
        return !x.any() && !z.any();
    }
    // Symplectic vector (x | z).
    BitVec symplectic() const {
        const size_t n = size();
        BitVec v(2 * n);
        for (size_t j = 0; j < n; ++j) {
            v.set(j, x.get(j));
            v.set(n + j, z.get(j));
        }
        return v;
    }
    std::vector<int> support() const {
        std::vector<int> s;
        for (size_t j = 0; j < size(); ++j) {
            if (x.get(j) || z.get(j)) {
                s.push_back(static_cast<int>(j));
            }
        }
        return s;
    }
    cplx phase_value() const {
        static const cplx ph[4] = {1.0, cplx(0, 1), -1.0, cplx(0, -1)};
        return ph[((phase % 4) + 4) % 4];
    }
};

// "+XZIY"-style strings; Y carries its own factor of i.
inline PauliWord pauli_word(const std::string &s) {
    size_t start = 0;
    int phase = 0;
    if (!s.empty() && (s[0] == '+' || s[0] == '-')) {
        phase = s[0] == '-' ? 2 : 0;
        start = 1;
    }
    PauliWord p(s.size() - start);
    p.phase = phase;
    for (size_t j = start; j < s.size(); ++j) {
        const size_t q = j - start;
        switch (s[j]) {
            case 'I':
                break;
            case 'X':
                p.x.set(q);
                break;
            case 'Z':
                p.z.set(q);
                break;
            case 'Y':
                p.x.set(q);
                p.z.set(q);
                p.phase += 1;
                break;
            default:
                throw DomainError(std::string("unknown Pauli letter ") + s[j]);
        }
    }
    p.phase %= 4;
    return p;
}

inline PauliWord pauli_on(size_t n, const std::vector<int> &sites, char c) {
    PauliWord p(n);
    for (int s : sites) {
        if (c == 'X' || c == 'Y') {
            p.x.set(s);
        }
        if (c == 'Z' || c == 'Y') {
            p.z.set(s);
        }
        if (c == 'Y') {
            p.phase += 1;
        }
    }
    p.phase %= 4;
    return p;
}

inline PauliWord operator*(const PauliWord &a, const PauliWord &b) {
    PauliWord c = a;
    c.x ^= b.x;
    c.z ^= b.z;
    // Z^{z_a} X^{x_b} = (-1)^{z_a x_b} X^{x_b} Z^{z_a}.
    c.phase = (a.phase + b.phase + (a.z.dot(b.x) ? 2 : 0)) % 4;
    return c;
}

inline bool commute(const PauliWord &a, const PauliWord &b) {
    return a.x.dot(b.z) == a.z.dot(b.x);
}

// Dense matrix, first qubit most significant.
inline Mat pauli_matrix(const PauliWord &p) {
    Mat m(1, 1);
    m(0, 0) = p.phase_value();
    const Mat x = pauli('X'), z = pauli('Z'), id = Mat::Identity(2, 2);
    for (size_t j = 0; j < p.size(); ++j) {
        Mat f = (p.x.get(j) ? x : id) * (p.z.get(j) ? z : id);
        m = kron(m, f);
    }
    return m;
}

inline std::string pauli_string_of(const PauliWord &p) {
    // Undo the i carried by each Y.
    int ph = p.phase;
    std::string s;
    for (size_t j = 0; j < p.size(); ++j) {
        const bool x = p.x.get(j), z = p.z.get(j);
        s += x && z ? 'Y' : x ? 'X' : z ? 'Z' : 'I';
        if (x && z) {
            ph -= 1;
        }
    }
    ph = ((ph % 4) + 4) % 4;
    static const char *pre[4] = {"+", "+i", "-", "-i"};
    return pre[ph] + s;
}

// ---------------------------------------------------------------------------
// Stabilizer Hamiltonians H = -sum_i beta_i S_i.

struct StabilizerModel {
    size_t n = 0;
    std::vector<PauliWord> generators;
    std::vector<double> betas;
    std::vector<std::string> names;

    size_t rank() const {
        std::vector<BitVec> rows;
        for (const auto &g : generators) {
            rows.push_back(g.symplectic());
        }
        return gf2_rank(rows);
    }
    bool independent() const {
        return rank() == generators.size();
    }
    void validate() const {
        if (betas.size() != generators.size()) {
            throw DomainError("one inverse temperature per generator required");
        }
        for (size_t i = 0; i < generators.size(); ++i) {
            if (generators[i].size() != n) {
                throw DomainError("generator length does not match qubit count");
            }
            if ((generators[i].phase + (generators[i].x.dot(generators[i].z) ? 1 : 0)) % 2 != 0) {
                throw DomainError("generator is not Hermitian");
            }
            for (size_t j = i + 1; j < generators.size(); ++j) {
                if (!commute(generators[i], generators[j])) {
                    throw DomainError("generators do not commute");
                }
            }
        }
        if (!independent()) {
            throw DomainError("generators are not independent");
        }
    }
};

// Expresses each term as beta * h with h = -(+-P) for a Pauli string P.
inline StabilizerModel stabilizer_from_family(const InteractionFamily &f) {
    StabilizerModel m;
    m.n = static_cast<size_t>(f.nsites());
    for (const auto &t : f.terms) {
        const size_t k = t.support.size();
        const size_t dk = dim_of(k);
        std::optional<PauliWord> found;
        cplx coeff = 0.0;
        for (size_t code = 0; code < dk * dk; ++code) {
            PauliWord local(k);
            for (size_t q = 0; q < k; ++q) {
                const size_t c = (code >> (2 * (k - 1 - q))) & 3;
                if (c == 1 || c == 3) {
                    local.x.set(q);
                }
                if (c == 2 || c == 3) {
                    local.z.set(q);
                }
            }
            const cplx a = (pauli_matrix(local).adjoint() * t.h).trace() / static_cast<double>(dk);
            if (std::abs(a) < 1e-12) {
                continue;
            }
            if (found) {
                throw DomainError("term " + t.name + " is not a single Pauli string");
            }
            found = local;
            coeff = a;
        }
        if (!found || std::abs(std::abs(coeff) - 1.0) > 1e-12) {
            throw DomainError("term " + t.name + " is not a unit Pauli string");
        }
        // -S = coeff * local, so S = -coeff * local.
        const cplx s = -coeff;
        int extra = 0;
        if (std::abs(s - cplx(1, 0)) < 1e-9) {
            extra = 0;
        } else if (std::abs(s - cplx(0, 1)) < 1e-9) {
            extra = 1;
        } else if (std::abs(s + cplx(1, 0)) < 1e-9) {
            extra = 2;
        } else {
            extra = 3;
        }
        PauliWord g(m.n);
        for (size_t q = 0; q < k; ++q) {
            g.x.set(t.support[q], found->x.get(q));
            g.z.set(t.support[q], found->z.get(q));
        }
        g.phase = extra;
        m.generators.push_back(g);
        m.betas.push_back(t.beta);
        m.names.push_back(t.name);
    }
    m.validate();
    return m;
}

struct StabExpectation {
    cplx value = 0.0;
    std::vector<int> subset;   // generators whose product matches, if any
    bool in_group = false;
    bool phase_flag = false;  // the word is -1 (or +-i) times the product
};

// <P> in rho ~ exp(sum_i beta_i S_i) = prod_i cosh(beta_i) (I + tanh(beta_i) S_i).
inline StabExpectation stab_expectation(const StabilizerModel &m, const PauliWord &p) {
    if (p.size() != m.n) {
        throw DomainError("Pauli word has wrong length");
    }
    StabExpectation e;
    if (p.is_identity_up_to_phase()) {
        e.value = p.phase_value();
        e.in_group = true;
        e.phase_flag = p.phase != 0;
        return e;
    }
    Gf2Basis basis(2 * m.n, m.generators.size());
    for (size_t i = 0; i < m.generators.size(); ++i) {
        BitVec tag(m.generators.size());
        tag.set(i);
        basis.insert(m.generators[i].symplectic(), tag);
    }
    auto combo = basis.decompose(p.symplectic());
    if (!combo) {
        return e;
    }
    PauliWord prod(m.n);
    double t = 1.0;
    for (size_t i = 0; i < m.generators.size(); ++i) {
        if (combo->get(i)) {
            prod = prod * m.generators[i];
            t *= std::tanh(m.betas[i]);
            e.subset.push_back(static_cast<int>(i));
        }
    }
    // p = i^{p.phase - prod.phase} prod.
    PauliWord ratio(m.n);
    ratio.phase = ((p.phase - prod.phase) % 4 + 4) % 4;
    e.in_group = true;
    e.phase_flag = ratio.phase != 0;
    e.value = ratio.phase_value() * t;
    return e;
}

inline Operator stabilizer_gibbs_dense(const StabilizerModel &m, size_t max_qubits = 12) {
    if (m.n > max_qubits) {
        throw ResourceError("dense stabilizer Gibbs state above qubit cap");
    }
    const Eigen::Index d = static_cast<Eigen::Index>(dim_of(m.n));
    Mat h = Mat::Zero(d, d);
    for (size_t i = 0; i < m.generators.size(); ++i) {
        h -= m.betas[i] * pauli_matrix(m.generators[i]);
    }
    Labels l;
    for (size_t j = 0; j < m.n; ++j) {
        l.push_back(static_cast<int>(j));
    }
    return gibbs_from_hamiltonian(Operator(h, l));
}

// ---------------------------------------------------------------------------
// Loop correlators of the planar code on a torus.

struct LoopCorrelatorReport {
    int n_a = 0;
    int n_b = 0;
    double o1 = 0.0;  // <O_1>
    double o2 = 0.0;  // <O_2>
    double o12 = 0.0;  // <O_1 O_2>
    double connected = 0.0;
    double formula_o1 = 0.0;
    double formula_o2 = 0.0;
    double formula_o12 = 0.0;
    double dense_residual = -1.0;  // max deviation from dense evaluation; -1 when skipped
    double eps_ground = -1.0;      // ||rho_{beta0} - rho_gs||_1 when dense
    double lower_bound = 0.0;      // (1 - eps)(1 - tanh(beta)^{2 N_A})
};

struct LoopRegions {
    std::vector<int> a;  // plaquette indices inside the inner loop
    std::vector<int> b;  // plaquette indices inside the outer loop, b contains a
};

// Plaquette-term indices of a toric2d family whose names start with "P".
inline std::vector<int> plaquette_terms(const InteractionFamily &f) {
    std::vector<int> out;
    for (size_t t = 0; t < f.terms.size(); ++t) {
        if (!f.terms[t].name.empty() && f.terms[t].name[0] == 'P') {
            out.push_back(static_cast<int>(t));
        }
    }
    return out;
}

// Inner plaquettes at beta, everything else at beta0; loops are products of
// the enclosed plaquettes.
inline LoopCorrelatorReport toric_loop_correlator(const InteractionFamily &toric, const LoopRegions &reg, double beta,
                                                  double beta0, bool dense = true) {
    for (int p : reg.a) {
        if (std::find(reg.b.begin(), reg.b.end(), p) == reg.b.end()) {
            throw GeometryError("inner loop region is not contained in the outer one");
        }
    }
    std::vector<double> betas(toric.terms.size(), beta0);
    for (int p : reg.a) {
        betas.at(p) = beta;
    }
    InteractionFamily f = with_betas(toric, betas);
    StabilizerModel m = stabilizer_from_family(f);
    auto product = [&](const std::vector<int> &ps) {
        PauliWord w(m.n);
        for (int p : ps) {
            w = w * m.generators.at(p);
        }
        return w;
    };
    PauliWord o1 = product(reg.a), o2 = product(reg.b);
    PauliWord o12 = o1 * o2;
    LoopCorrelatorReport r;
    r.n_a = static_cast<int>(reg.a.size());
    r.n_b = static_cast<int>(reg.b.size());
    r.o1 = stab_expectation(m, o1).value.real();
    r.o2 = stab_expectation(m, o2).value.real();
    r.o12 = stab_expectation(m, o12).value.real();
    r.connected = r.o12 - r.o1 * r.o2;
    const double tb = std::tanh(beta), t0 = std::tanh(beta0);
    r.formula_o1 = std::pow(tb, r.n_a);
    r.formula_o2 = std::pow(tb, r.n_a) * std::pow(t0, r.n_b - r.n_a);
    r.formula_o12 = std::pow(t0, r.n_b - r.n_a);
    double eps = 0.0;
    if (dense && m.n <= 12) {
        Operator rho = gibbs_state(f, {12});
        auto ev = [&](const PauliWord &w) { return (pauli_matrix(w) * rho.m).trace().real(); };
        r.dense_residual = std::max({std::abs(ev(o1) - r.formula_o1), std::abs(ev(o2) - r.formula_o2),
                                     std::abs(ev(o12) - r.formula_o12)});
        InteractionFamily uniform = with_betas(toric, std::vector<double>(toric.terms.size(), beta0));
        r.eps_ground = trace_distance(gibbs_state(uniform, {12}), ground_state(uniform));
        eps = r.eps_ground;
    }
    r.lower_bound = (1.0 - eps) * (1.0 - std::pow(tb, 2 * r.n_a));
    return r;
}

// ---------------------------------------------------------------------------
// Homological codes: qubits on q-cells of a hypercubic complex, Z checks on
// (q+1)-cells and X checks on (q-1)-cells.

struct Cell {
    std::vector<int> origin;  // lattice coordinates
    std::vector<int> dirs;    // sorted axes spanned
};

class CellComplex {
   public:
    CellComplex(std::vector<int> extents, bool periodic) : lat_(extents, std::vector<bool>(extents.size(), periodic)) {}

    const Lattice &lattice() const {
        return lat_;
    }
    int dimension() const {
        return lat_.dimension();
    }

    // All k-cells that fit in the lattice.
    std::vector<Cell> cells(int k) const {
        std::vector<Cell> out;
        const int d = dimension();
        for (uint32_t mask = 0; mask < (1u << d); ++mask) {
            if (__builtin_popcount(mask) != k) {
                continue;
            }
            std::vector<int> dirs;
            for (int a = 0; a < d; ++a) {
                if (mask & (1u << a)) {
                    dirs.push_back(a);
                }
            }
            for (int s = 0; s < lat_.size(); ++s) {
                std::vector<int> o = lat_.coords(s);
                if (fits(o, dirs)) {
                    out.push_back({o, dirs});
                }
            }
        }
        return out;
    }

    bool fits(const std::vector<int> &o, const std::vector<int> &dirs) const {
        for (int a : dirs) {
            if (!lat_.periodic()[a] && o[a] + 1 >= lat_.extents()[a]) {
                return false;
            }
        }
        return true;
    }

    std::vector<int> shifted(std::vector<int> o, int axis, int by) const {
        o[axis] += by;
        const int e = lat_.extents()[axis];
        if (lat_.periodic()[axis]) {
            o[axis] = ((o[axis] % e) + e) % e;
        }
        return o;
    }
    bool inside(const std::vector<int> &o) const {
        for (int a = 0; a < dimension(); ++a) {
            if (o[a] < 0 || o[a] >= lat_.extents()[a]) {
                return false;
            }
        }
        return true;
    }

    std::string key(const Cell &c) const {
        std::ostringstream os;
        for (int x : c.origin) {
            os << x << ',';
        }
        os << '|';
        for (int a : c.dirs) {
            os << a << ',';
        }
        return os.str();
    }

    // Faces of c (the (k-1)-cells of its boundary).
    std::vector<Cell> faces(const Cell &c) const {
        std::vector<Cell> out;
        for (size_t i = 0; i < c.dirs.size(); ++i) {
            std::vector<int> rest = c.dirs;
            rest.erase(rest.begin() + static_cast<long>(i));
            out.push_back({c.origin, rest});
            out.push_back({shifted(c.origin, c.dirs[i], 1), rest});
        }
        return out;
    }

    // (k+1)-cells having c as a face.
    std::vector<Cell> cofaces(const Cell &c) const {
        std::vector<Cell> out;
        for (int a = 0; a < dimension(); ++a) {
            if (std::find(c.dirs.begin(), c.dirs.end(), a) != c.dirs.end()) {
                continue;
            }
            std::vector<int> dirs = c.dirs;
            dirs.insert(std::upper_bound(dirs.begin(), dirs.end(), a), a);
            for (int by : {0, -1}) {
                std::vector<int> o = shifted(c.origin, a, by);
                if (inside(o) && fits(o, dirs)) {
                    out.push_back({o, dirs});
                }
            }
        }
        return out;
    }

    // Vertices of the closed cell.
    std::vector<int> vertices(const Cell &c) const {
        std::vector<int> out;
        const size_t k = c.dirs.size();
        for (uint32_t m = 0; m < (1u << k); ++m) {
            std::vector<int> o = c.origin;
            for (size_t i = 0; i < k; ++i) {
                if (m & (1u << i)) {
                    o = shifted(o, c.dirs[i], 1);
                }
            }
            out.push_back(lat_.site(o));
        }
        return out;
    }

   private:
    Lattice lat_;
};

struct HomologicalCode {
    CellComplex complex;
    int q = 1;
    std::vector<Cell> qubits;
    StabilizerModel model;  // Z checks first, then X checks
    size_t z_checks = 0;
};

inline HomologicalCode homological_code(const std::vector<int> &extents, bool periodic, int q, double beta = 1.0) {
    HomologicalCode hc{CellComplex(extents, periodic), q, {}, {}, 0};
    hc.qubits = hc.complex.cells(q);
    std::map<std::string, int> index;
    for (size_t i = 0; i < hc.qubits.size(); ++i) {
        index[hc.complex.key(hc.qubits[i])] = static_cast<int>(i);
    }
    const size_t n = hc.qubits.size();
    hc.model.n = n;
    auto add = [&](const std::vector<Cell> &support, char c, const std::string &name) {
        std::vector<int> sites;
        for (const auto &cell : support) {
            auto it = index.find(hc.complex.key(cell));
            if (it != index.end()) {
                sites.push_back(it->second);
            }
        }
        if (sites.empty()) {
            return;
        }
        hc.model.generators.push_back(pauli_on(n, sites, c));
        hc.model.betas.push_back(beta);
        hc.model.names.push_back(name);
    };
    if (q + 1 <= hc.complex.dimension()) {
        for (const auto &c : hc.complex.cells(q + 1)) {
            add(hc.complex.faces(c), 'Z', "Z" + hc.complex.key(c));
        }
    }
    hc.z_checks = hc.model.generators.size();
    if (q >= 1) {
        for (const auto &c : hc.complex.cells(q - 1)) {
            add(hc.complex.cofaces(c), 'X', "X" + hc.complex.key(c));
        }
    }
    return hc;
}

// Qubits whose closed cell has a vertex within Chebyshev distance radius - 1
// of the center vertex; radius 1 gives the open star of the vertex.
inline std::vector<int> cell_ball(const HomologicalCode &hc, int center, int radius) {
    std::vector<int> out;
    if (radius <= 0) {
        return out;
    }
    const Lattice &lat = hc.complex.lattice();
    for (size_t i = 0; i < hc.qubits.size(); ++i) {
        for (int v : hc.complex.vertices(hc.qubits[i])) {
            if (lat.chebyshev(v, center) <= radius - 1) {
                out.push_back(static_cast<int>(i));
                break;
            }
        }
    }
    return out;
}

struct AlgebraCheck {
    bool equal = true;
    size_t dim_traced = 0;     // rank of group elements acting trivially on A
    size_t dim_generated = 0;  // rank generated by checks supported outside A
    size_t rows = 0;
    size_t cols = 0;
    std::optional<PauliWord> witness;
};

// Compares the group elements that act trivially on `a` with the group
// generated by checks avoiding `a`. Works with dependent check sets.
inline AlgebraCheck complement_algebra_check(const std::vector<PauliWord> &checks, size_t n, const std::vector<int> &a,
                                             size_t max_bits = size_t(1) << 28) {
    AlgebraCheck out;
    const size_t m = checks.size();
    out.rows = m;
    out.cols = 2 * a.size();
    if (m * (2 * n + m) > max_bits) {
        std::ostringstream os;
        os << "algebra check needs " << m << " x " << (2 * n + m) << " bits";
        throw ResourceError(os.str());
    }
    std::vector<bool> in_a(n, false);
    for (int s : a) {
        in_a.at(s) = true;
    }
    // Left kernel of the A-columns: combinations of checks trivial on A.
    Gf2Basis restricted(2 * a.size(), m);
    std::vector<BitVec> kernel;
    for (size_t i = 0; i < m; ++i) {
        BitVec r(2 * a.size());
        for (size_t k = 0; k < a.size(); ++k) {
            r.set(k, checks[i].x.get(a[k]));
            r.set(a.size() + k, checks[i].z.get(a[k]));
        }
        BitVec tag(m);
        tag.set(i);
        BitVec rr = r, tt = tag;
        restricted.reduce(rr, tt);
        if (!rr.any()) {
            kernel.push_back(tt);
        } else {
            restricted.insert(r, tag);
        }
    }
    Gf2Basis generated(2 * n);
    for (const auto &c : checks) {
        bool avoids = true;
        for (int s : a) {
            if (c.x.get(s) || c.z.get(s)) {
                avoids = false;
                break;
            }
        }
        if (avoids) {
            generated.insert(c.symplectic());
        }
    }
    out.dim_generated = generated.rank();
    Gf2Basis traced(2 * n);
    for (const auto &k : kernel) {
        PauliWord w(n);
        for (size_t i = 0; i < m; ++i) {
            if (k.get(i)) {
                w = w * checks[i];
            }
        }
        const BitVec v = w.symplectic();
        traced.insert(v);
        if (!out.witness && !generated.contains(v)) {
            out.witness = w;
        }
    }
    out.dim_traced = traced.rank();
    out.equal = out.dim_traced == out.dim_generated && !out.witness;
    return out;
}

inline AlgebraCheck homological_algebra_check(const HomologicalCode &hc, const std::vector<int> &a) {
    return complement_algebra_check(hc.model.generators, hc.model.n, a);
}

// ---------------------------------------------------------------------------
// Ising symmetry g = prod_i X_i.

inline void require_ising_symmetric(const InteractionFamily &f) {
    for (const auto &t : f.terms) {
        Mat g = Mat::Identity(1, 1);
        for (size_t k = 0; k < t.support.size(); ++k) {
            g = kron(g, pauli('X'));
        }
        if ((g * t.h - t.h * g).norm() > 1e-12) {
            throw DomainError("term " + t.name + " breaks the Ising symmetry");
        }
    }
}

inline Mat x_string(size_t k) {
    Mat g = Mat::Identity(1, 1);
    for (size_t i = 0; i < k; ++i) {
        g = kron(g, pauli('X'));
    }
    return g;
}

// ||Tr_X(g_X rho)||_1.
inline double disorder_parameter(const Operator &rho, const Region &x) {
    Operator g = embed(Operator(x_string(x.size()), x), rho.labels);
    Operator gr(g.m * rho.m, rho.labels);
    return trace_norm(partial_trace(gr, label_minus(rho.labels, x)));
}

inline double ising_disorder_parameter(const InteractionFamily &f, const Region &x) {
    require_ising_symmetric(f);
    return disorder_parameter(gibbs_state(f), x);
}

// Depolarization within each eigenspace of g_X, and full depolarization.
inline ChannelGate symmetric_depolarizer(const Region &x) {
    const Eigen::Index d = static_cast<Eigen::Index>(dim_of(x.size()));
    const Mat g = x_string(x.size());
    const Mat id = Mat::Identity(d, d);
    Mat s = Mat::Zero(d * d, d * d);
    for (double sign : {1.0, -1.0}) {
        const Mat p = 0.5 * (id + sign * g);
        const CVec v = vec(p);
        s += v * v.adjoint() / (0.5 * static_cast<double>(d));
    }
    return gate_from_superop(x, s, GateKind::Depolarize);
}

struct DisorderIdentity {
    double disorder = 0.0;  // ||Tr_X(g_X rho)||_1
    double channel_gap = 0.0;  // ||D^sym_X[rho] - D_X[rho]||_1
};

inline DisorderIdentity disorder_identity(const Operator &rho, const Region &x) {
    DisorderIdentity d;
    d.disorder = disorder_parameter(rho, x);
    d.channel_gap = trace_distance(apply_gate(rho, symmetric_depolarizer(x)), apply_gate(rho, depolarizer_gate(x)));
    return d;
}

}  // namespace glab
