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

// Lattices, regions, partitions, interaction families and Gibbs states.

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "glab/errors.hpp"
#include "glab/qcore.hpp"

namespace glab {

using Region = Labels;  // sorted site indices

// Site index = sum_k coord[k] * stride[k], last axis fastest.
class Lattice {
   public:
    Lattice() = default;
    Lattice(std::vector<int> extents, std::vector<bool> periodic)
        : extents_(std::move(extents)), periodic_(std::move(periodic)) {
        if (extents_.empty()) {
            throw GeometryError("lattice dimension must be at least 1");
        }
        if (periodic_.size() == 1 && extents_.size() > 1) {
            periodic_.assign(extents_.size(), periodic_[0]);
        }
        if (periodic_.size() != extents_.size()) {
            throw GeometryError("periodicity flags do not match dimension");
        }
        size_ = 1;
        for (int e : extents_) {
            if (e < 1) {
                throw GeometryError("lattice extent must be positive");
            }
            size_ *= e;
        }
        if (size_ > 4096 * 4096) {
            throw ResourceError("lattice too large");
        }
    }

    int dimension() const {
        return static_cast<int>(extents_.size());
    }
    int size() const {
        return size_;
    }
    const std::vector<int> &extents() const {
        return extents_;
    }
    const std::vector<bool> &periodic() const {
        return periodic_;
    }

    std::vector<int> coords(int site) const {
        check(site);
        std::vector<int> c(extents_.size());
        for (int k = dimension() - 1; k >= 0; --k) {
            c[k] = site % extents_[k];
            site /= extents_[k];
        }
        return c;
    }

    int site(const std::vector<int> &c) const {
        if (c.size() != extents_.size()) {
            throw GeometryError("coordinate rank mismatch");
        }
        int s = 0;
        for (int k = 0; k < dimension(); ++k) {
            int x = c[k];
            if (periodic_[k]) {
                x = ((x % extents_[k]) + extents_[k]) % extents_[k];
            } else if (x < 0 || x >= extents_[k]) {
                throw GeometryError("coordinate outside open lattice");
            }
            s = s * extents_[k] + x;
        }
        return s;
    }

    int axis_distance(int k, int a, int b) const {
        int d = std::abs(a - b);
        if (periodic_[k]) {
            d = std::min(d, extents_[k] - d);
        }
        return d;
    }

    // Graph (Manhattan) distance with periodic wrap.
    int distance(int x, int y) const {
        auto a = coords(x), b = coords(y);
        int d = 0;
        for (int k = 0; k < dimension(); ++k) {
            d += axis_distance(k, a[k], b[k]);
        }
        return d;
    }

    // Largest per-axis distance; used for hypercubic blocks.
    int chebyshev(int x, int y) const {
        auto a = coords(x), b = coords(y);
        int d = 0;
        for (int k = 0; k < dimension(); ++k) {
            d = std::max(d, axis_distance(k, a[k], b[k]));
        }
        return d;
    }

    Region all_sites() const {
        Region r(size_);
        std::iota(r.begin(), r.end(), 0);
        return r;
    }

    void check(int site) const {
        if (site < 0 || site >= size_) {
            throw LabelError("site " + std::to_string(site) + " outside lattice");
        }
    }

   private:
    std::vector<int> extents_;
    std::vector<bool> periodic_;
    int size_ = 0;
};

inline Lattice build_lattice(int dimension, std::vector<int> extents, bool periodic) {
    if (dimension < 1 || static_cast<int>(extents.size()) != dimension) {
        throw GeometryError("extents must list one size per dimension");
    }
    return Lattice(std::move(extents), std::vector<bool>(dimension, periodic));
}

inline Region make_region(Labels sites) {
    std::sort(sites.begin(), sites.end());
    sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
    return sites;
}

inline int region_diameter(const Lattice &lat, const Region &r) {
    int d = 0;
    for (size_t i = 0; i < r.size(); ++i) {
        for (size_t j = i + 1; j < r.size(); ++j) {
            d = std::max(d, lat.distance(r[i], r[j]));
        }
    }
    return d;
}

inline int region_distance(const Lattice &lat, const Region &a, const Region &b) {
    if (a.empty() || b.empty()) {
        return std::numeric_limits<int>::max();
    }
    int d = std::numeric_limits<int>::max();
    for (int x : a) {
        for (int y : b) {
            d = std::min(d, lat.distance(x, y));
        }
    }
    return d;
}

inline Region ball(const Lattice &lat, int center, int r) {
    Region out;
    for (int s = 0; s < lat.size(); ++s) {
        if (lat.distance(center, s) <= r) {
            out.push_back(s);
        }
    }
    return out;
}

// A_{+l}.
inline Region dilate(const Lattice &lat, const Region &a, int l) {
    if (a.empty()) {
        return {};
    }
    Region out;
    for (int s = 0; s < lat.size(); ++s) {
        if (region_distance(lat, {s}, a) <= l) {
            out.push_back(s);
        }
    }
    return out;
}

inline Region complement(const Lattice &lat, const Region &a) {
    return label_minus(lat.all_sites(), a);
}

inline bool contains_all(const Region &outer, const Region &inner) {
    return std::all_of(inner.begin(), inner.end(), [&](int x) { return has_label(outer, x); });
}

// ---------------------------------------------------------------------------
// Interaction families.

struct Term {
    Region support;  // sorted
    Mat h;           // ordered as `support`
    double beta = 1.0;
    std::string name;
};

struct InteractionFamily {
    Lattice lattice;
    std::vector<Term> terms;
    int range = 0;

    int nsites() const {
        return lattice.size();
    }

    double beta_sup() const {
        double m = 0.0;
        for (const auto &t : terms) {
            m = std::max(m, std::abs(t.beta));
        }
        return m;
    }

    std::vector<double> betas() const {
        std::vector<double> b;
        for (const auto &t : terms) {
            b.push_back(t.beta);
        }
        return b;
    }

    bool all_diagonal() const {
        return std::all_of(terms.begin(), terms.end(), [](const Term &t) { return is_diagonal(t.h); });
    }

    // Checks ||h_Z|| <= 1, Hermiticity, and diam(Z) <= R; sets R to the
    // maximum support diameter when it is zero.
    void validate() {
        int maxd = 0;
        for (auto &t : terms) {
            Region s = make_region(t.support);
            if (s.size() != t.support.size()) {
                throw LabelError("term support repeats a site");
            }
            if (s != t.support) {
                // Keep supports sorted so embeddings agree with global ordering.
                Operator o = reorder(Operator(t.h, t.support), s);
                t.h = o.m;
                t.support = s;
            }
            for (int x : t.support) {
                lattice.check(x);
            }
            if (static_cast<size_t>(t.h.rows()) != dim_of(t.support.size())) {
                throw DomainError("term matrix size does not match support");
            }
            if (!is_hermitian(t.h, 1e-12)) {
                throw DomainError("term " + t.name + " is not Hermitian");
            }
            if (operator_norm(t.h) > 1.0 + 1e-12) {
                throw DomainError("term " + t.name + " has operator norm above 1");
            }
            maxd = std::max(maxd, region_diameter(lattice, t.support));
        }
        if (range == 0) {
            range = maxd;
        } else if (maxd > range) {
            throw GeometryError("term diameter exceeds declared range");
        }
    }
};

inline InteractionFamily with_betas(InteractionFamily f, const std::vector<double> &betas) {
    if (betas.size() != f.terms.size()) {
        throw DomainError("coefficient vector length mismatch");
    }
    for (size_t i = 0; i < betas.size(); ++i) {
        f.terms[i].beta = betas[i];
    }
    return f;
}

inline InteractionFamily scaled(InteractionFamily f, double s) {
    for (auto &t : f.terms) {
        t.beta *= s;
    }
    return f;
}

// Adds coeff * h (on sub) into the dense matrix over `all`.
inline void add_embedded(Mat &acc, const Labels &all, const Labels &sub, const Mat &h, cplx coeff) {
    auto si = index_map(all, sub);
    auto ri = index_map(all, label_minus(all, sub));
    const size_t ds = si.size();
    if (is_diagonal(h)) {
        for (size_t r : ri) {
            for (size_t a = 0; a < ds; ++a) {
                acc(si[a] | r, si[a] | r) += coeff * h(a, a);
            }
        }
        return;
    }
    for (size_t r : ri) {
        for (size_t b = 0; b < ds; ++b) {
            for (size_t a = 0; a < ds; ++a) {
                if (h(a, b) != cplx(0.0, 0.0)) {
                    acc(si[a] | r, si[b] | r) += coeff * h(a, b);
                }
            }
        }
    }
}

struct GibbsOptions {
    size_t max_qubits = 13;
};

// H_beta = sum_Z beta_Z h_Z on the given sites (default: all sites), using
// only terms whose support lies inside `sites`.
inline Operator hamiltonian(const InteractionFamily &f, const Region &sites) {
    const size_t d = dim_of(sites.size());
    Mat h = Mat::Zero(d, d);
    for (const auto &t : f.terms) {
        if (t.beta != 0.0 && contains_all(sites, t.support)) {
            add_embedded(h, sites, t.support, t.h, t.beta);
        }
    }
    return Operator(std::move(h), sites);
}

inline Operator hamiltonian(const InteractionFamily &f) {
    return hamiltonian(f, f.lattice.all_sites());
}

inline Operator gibbs_from_hamiltonian(const Operator &h) {
    // Diagonal Hamiltonians stay exactly diagonal.
    if (h.m.rows() > 0 && (h.m - Mat(h.m.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0) {
        RVec w = h.m.diagonal().real();
        RVec p = (-(w.array() - w.minCoeff())).exp().matrix();
        p /= p.sum();
        return Operator(Mat(p.cast<cplx>().asDiagonal()), h.labels);
    }
    Eigh e = eigh(h.m);
    const double wmin = e.w.size() ? e.w.minCoeff() : 0.0;
    RVec p = (-(e.w.array() - wmin)).exp().matrix();
    p /= p.sum();
    return Operator(e.rebuild(p), h.labels);
}

// rho_beta = e^{-H_beta} / Tr e^{-H_beta}.
inline Operator gibbs_state(const InteractionFamily &f, GibbsOptions opt = {}) {
    if (static_cast<size_t>(f.nsites()) > opt.max_qubits) {
        throw ResourceError("gibbs_state: " + std::to_string(f.nsites()) + " qubits above cap of " +
                            std::to_string(opt.max_qubits));
    }
    return gibbs_from_hamiltonian(hamiltonian(f));
}

// Ground-space projector normalized to unit trace (degeneracy window 1e-9).
inline Operator ground_state(const InteractionFamily &f, double window = 1e-9) {
    Operator h = hamiltonian(f);
    Eigh e = eigh(h.m);
    const double wmin = e.w.minCoeff();
    RVec p = (e.w.array() <= wmin + window).cast<double>().matrix();
    p /= p.sum();
    return Operator(e.rebuild(p), h.labels);
}

// ---------------------------------------------------------------------------
// Builtin families. Couplings enter through beta; every h has norm 1.

inline InteractionFamily ising_chain(int n, double beta_j, double beta_h, bool periodic) {
    InteractionFamily f;
    f.lattice = build_lattice(1, {n}, periodic);
    Mat zz = -pauli_string("ZZ");
    Mat z = -pauli('Z');
    const int bonds = periodic ? n : n - 1;
    for (int i = 0; i < bonds && n > 1; ++i) {
        if (periodic && n == 2 && i == 1) {
            break;
        }
        f.terms.push_back({make_region({i, (i + 1) % n}), zz, beta_j, "ZZ" + std::to_string(i)});
    }
    if (beta_h != 0.0) {
        for (int i = 0; i < n; ++i) {
            f.terms.push_back({{i}, z, beta_h, "Z" + std::to_string(i)});
        }
    }
    f.validate();
    return f;
}

// Transverse-field Ising chain: -beta_j Z_i Z_{i+1} - beta_g X_i.
inline InteractionFamily tfim_chain(int n, double beta_j, double beta_g, bool periodic) {
    InteractionFamily f;
    f.lattice = build_lattice(1, {n}, periodic);
    Mat zz = -pauli_string("ZZ");
    Mat x = -pauli('X');
    const int bonds = periodic ? n : n - 1;
    for (int i = 0; i < bonds && n > 1; ++i) {
        if (periodic && n == 2 && i == 1) {
            break;
        }
        f.terms.push_back({make_region({i, (i + 1) % n}), zz, beta_j, "ZZ" + std::to_string(i)});
    }
    for (int i = 0; i < n; ++i) {
        f.terms.push_back({{i}, x, beta_g, "X" + std::to_string(i)});
    }
    f.validate();
    return f;
}

inline InteractionFamily heisenberg_chain(int n, double beta_j, bool periodic) {
    InteractionFamily f;
    f.lattice = build_lattice(1, {n}, periodic);
    Mat h = (pauli_string("XX") + pauli_string("YY") + pauli_string("ZZ")) / 3.0;
    const int bonds = periodic ? n : n - 1;
    for (int i = 0; i < bonds && n > 1; ++i) {
        if (periodic && n == 2 && i == 1) {
            break;
        }
        f.terms.push_back({make_region({i, (i + 1) % n}), h, beta_j, "XXZ" + std::to_string(i)});
    }
    f.validate();
    return f;
}

// Toric code on an lx x ly torus. Qubit (x, y, dir) sits on the edge leaving
// vertex (x, y) along +x (dir 0) or +y (dir 1); the lattice has extents
// {lx, ly, 2}, periodic in the first two axes.
struct ToricLayout {
    int lx = 0, ly = 0;
    Lattice lattice;

    int edge(int x, int y, int dir) const {
        return lattice.site({x, y, dir});
    }
    // Plaquette with lower-left vertex (x, y): Z on its four edges.
    Region plaquette(int x, int y) const {
        return make_region({edge(x, y, 0), edge(x, y, 1), edge(x + 1, y, 1), edge(x, y + 1, 0)});
    }
    // Star at vertex (x, y): X on its four incident edges.
    Region star(int x, int y) const {
        return make_region({edge(x, y, 0), edge(x, y, 1), edge(x - 1, y, 0), edge(x, y - 1, 1)});
    }
};

inline ToricLayout toric_layout(int lx, int ly) {
    if (lx < 2 || ly < 2) {
        throw GeometryError("toric code needs extents of at least 2");
    }
    return {lx, ly, Lattice({lx, ly, 2}, {true, true, false})};
}

// -B_p (Z plaquettes) and -A_v (X stars). With `independent` the last
// plaquette and last star are dropped, leaving an independent generator set.
inline InteractionFamily toric2d(int lx, int ly, double beta_plaquette, double beta_star, bool independent) {
    ToricLayout lay = toric_layout(lx, ly);
    InteractionFamily f;
    f.lattice = lay.lattice;
    const int np = lx * ly;
    for (int k = 0; k < np; ++k) {
        if (independent && k == np - 1) {
            break;
        }
        int x = k / ly, y = k % ly;
        Region s = lay.plaquette(x, y);
        f.terms.push_back({s, -pauli_string(std::string(s.size(), 'Z')), beta_plaquette,
                           "P" + std::to_string(k)});
    }
    for (int k = 0; k < np; ++k) {
        if (independent && k == np - 1) {
            break;
        }
        int x = k / ly, y = k % ly;
        Region s = lay.star(x, y);
        f.terms.push_back({s, -pauli_string(std::string(s.size(), 'X')), beta_star, "S" + std::to_string(k)});
    }
    f.validate();
    return f;
}

// ---------------------------------------------------------------------------
// Partitions.

struct AnnulusPartition {
    Region a, b1, b2, c;
    int r_a = 0, r_1 = 0, r_2 = 0;

    Region b() const {
        return label_union(b1, b2);
    }
};

inline AnnulusPartition annulus_partition(const Lattice &lat, int center, int r_a, int r_1, int r_2) {
    lat.check(center);
    if (r_a < 0 || r_1 < 0 || r_2 < 0) {
        throw GeometryError("radii must be nonnegative");
    }
    for (int k = 0; k < lat.dimension(); ++k) {
        if (lat.periodic()[k] && 2 * (r_a + r_1 + r_2) > lat.extents()[k]) {
            throw GeometryError("annulus wraps around a periodic axis");
        }
    }
    AnnulusPartition p;
    p.r_a = r_a;
    p.r_1 = r_1;
    p.r_2 = r_2;
    Region inner = ball(lat, center, r_a);
    Region mid = ball(lat, center, r_a + r_1);
    Region outer = ball(lat, center, r_a + r_1 + r_2);
    p.a = inner;
    p.b1 = label_minus(mid, inner);
    p.b2 = label_minus(outer, mid);
    p.c = complement(lat, outer);
    if (p.c.empty()) {
        throw GeometryError("annulus shells exhaust the lattice");
    }
    return p;
}

struct Block {
    std::vector<int> center;
    int center_site = 0;
    Region sites;
    std::vector<int> terms;  // indices into the family
};

struct BlockPartition {
    std::vector<Block> blocks;
    int r_a = 0;
    int overlap = 0;
};

// Hypercubic blocks of half-width r_a on a grid of spacing 2 r_a - R; each term
// goes to the lexicographically smallest containing center.
inline BlockPartition block_partition(const Lattice &lat, const InteractionFamily &f, int r_a) {
    const int big_r = f.range;
    if (2 * r_a <= big_r) {
        throw PartitionError("block half-width " + std::to_string(r_a) + " too small for range " +
                             std::to_string(big_r));
    }
    const int step = 2 * r_a - big_r;
    std::vector<std::vector<int>> axis_centers(lat.dimension());
    for (int k = 0; k < lat.dimension(); ++k) {
        const int ext = lat.extents()[k];
        auto &cs = axis_centers[k];
        if (lat.periodic()[k]) {
            for (int c = 0; c < ext; c += step) {
                cs.push_back(c);
            }
        } else {
            for (int c = std::min(r_a, ext - 1);; c += step) {
                cs.push_back(std::min(c, ext - 1));
                if (c + r_a >= ext - 1) {
                    break;
                }
            }
            cs.erase(std::unique(cs.begin(), cs.end()), cs.end());
        }
    }
    BlockPartition bp;
    bp.r_a = r_a;
    bp.overlap = big_r;
    std::vector<int> idx(lat.dimension(), 0);
    while (true) {
        Block blk;
        for (int k = 0; k < lat.dimension(); ++k) {
            blk.center.push_back(axis_centers[k][idx[k]]);
        }
        blk.center_site = lat.site(blk.center);
        for (int s = 0; s < lat.size(); ++s) {
            if (lat.chebyshev(s, blk.center_site) <= r_a) {
                blk.sites.push_back(s);
            }
        }
        bp.blocks.push_back(std::move(blk));
        int k = lat.dimension() - 1;
        while (k >= 0 && ++idx[k] == static_cast<int>(axis_centers[k].size())) {
            idx[k] = 0;
            --k;
        }
        if (k < 0) {
            break;
        }
    }
    // Blocks are generated in lexicographic center order.
    for (size_t t = 0; t < f.terms.size(); ++t) {
        bool placed = false;
        for (auto &blk : bp.blocks) {
            if (contains_all(blk.sites, f.terms[t].support)) {
                blk.terms.push_back(static_cast<int>(t));
                placed = true;
                break;
            }
        }
        if (!placed) {
            throw PartitionError("term " + f.terms[t].name + " fits in no block");
        }
    }
    return bp;
}

// ---------------------------------------------------------------------------
// Local algebras.

struct OperatorBasis {
    Labels labels;
    std::vector<Mat> elements;  // Hilbert-Schmidt orthonormal

    Mat project(const Mat &m) const {
        Mat out = Mat::Zero(m.rows(), m.cols());
        for (const auto &e : elements) {
            out += (e.adjoint() * m).trace() * e;
        }
        return out;
    }
    double residual(const Mat &m) const {
        return (m - project(m)).norm();
    }
    size_t size() const {
        return elements.size();
    }
};

namespace detail {
// Gram-Schmidt insert; returns true if the basis grew.
inline bool basis_insert(std::vector<Mat> &basis, Mat m, double eps = 1e-10) {
    for (int pass = 0; pass < 2; ++pass) {
        for (const auto &e : basis) {
            m -= (e.adjoint() * m).trace() * e;
        }
    }
    const double n = m.norm();
    if (n <= eps) {
        return false;
    }
    basis.push_back(m / n);
    return true;
}
}  // namespace detail

inline OperatorBasis local_algebra(const InteractionFamily &f, const Region &x, size_t max_sites = 6) {
    if (x.size() > max_sites) {
        throw ResourceError("local_algebra: region of " + std::to_string(x.size()) + " sites above cap");
    }
    OperatorBasis out;
    out.labels = x;
    const Eigen::Index d = static_cast<Eigen::Index>(dim_of(x.size()));
    std::vector<Mat> basis;
    detail::basis_insert(basis, Mat::Identity(d, d));
    if (x.empty()) {
        out.elements = basis;
        return out;
    }
    std::vector<const Term *> touching;
    for (const auto &t : f.terms) {
        if (!label_intersection(t.support, x).empty()) {
            touching.push_back(&t);
        }
    }
    auto reduce = [&](const Mat &m, const Labels &sup) {
        Labels keep = label_intersection(sup, x);
        Operator r = partial_trace(Operator(m, sup), keep);
        return embed(r, x).m;
    };
    std::vector<Mat> gens;
    for (const Term *t : touching) {
        gens.push_back(reduce(t->h, t->support));
    }
    for (size_t i = 0; i < touching.size(); ++i) {
        for (size_t j = i; j < touching.size(); ++j) {
            Labels u = label_union(touching[i]->support, touching[j]->support);
            Mat a = embed(Operator(touching[i]->h, touching[i]->support), u).m;
            Mat b = embed(Operator(touching[j]->h, touching[j]->support), u).m;
            gens.push_back(reduce(Mat(a * b), u));
        }
    }
    if (std::all_of(gens.begin(), gens.end(), [](const Mat &g) { return is_diagonal(g); })) {
        // Commutative case: close the diagonals under pointwise products.
        std::vector<Mat> vb, vg;
        detail::basis_insert(vb, Mat(CVec::Ones(d)));
        for (auto &g : gens) {
            Mat v = g.diagonal();
            detail::basis_insert(vg, v);
            detail::basis_insert(vg, Mat(v.conjugate()));
        }
        size_t done = 0;
        while (done < vb.size()) {
            const size_t end = vb.size();
            for (size_t i = done; i < end; ++i) {
                for (const auto &g : vg) {
                    detail::basis_insert(vb, Mat(g.cwiseProduct(vb[i])));
                }
            }
            done = end;
        }
        for (const auto &v : vb) {
            out.elements.push_back(Mat(v.col(0).asDiagonal()));
        }
        return out;
    }
    std::vector<Mat> gbasis;
    for (auto &g : gens) {
        detail::basis_insert(basis, g);
        detail::basis_insert(basis, g.adjoint());
        detail::basis_insert(gbasis, g);
        detail::basis_insert(gbasis, g.adjoint());
    }
    // Close under left multiplication by the generators.
    size_t done = 0;
    while (done < basis.size()) {
        const size_t end = basis.size();
        for (size_t i = done; i < end; ++i) {
            for (const auto &g : gbasis) {
                detail::basis_insert(basis, g * basis[i]);
            }
        }
        done = end;
        if (basis.size() > static_cast<size_t>(d * d)) {
            throw NumericalIntegrityError("local_algebra closure exceeded full dimension");
        }
    }
    out.elements = std::move(basis);
    return out;
}

inline OperatorBasis full_algebra(const Labels &x) {
    OperatorBasis out;
    out.labels = x;
    const Eigen::Index d = static_cast<Eigen::Index>(dim_of(x.size()));
    for (Eigen::Index j = 0; j < d; ++j) {
        for (Eigen::Index i = 0; i < d; ++i) {
            Mat e = Mat::Zero(d, d);
            e(i, j) = 1.0;
            out.elements.push_back(e);
        }
    }
    return out;
}

}  // namespace glab
