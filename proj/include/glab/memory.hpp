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

// Codes given by ground spaces, diameter certificates, and the
// encode / evolve / decode memory experiment with its bound audits.

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "glab/audit.hpp"
#include "glab/circuits.hpp"
#include "glab/errors.hpp"
#include "glab/lindblad.hpp"
#include "glab/model.hpp"
#include "glab/qcore.hpp"
#include "glab/stabilizer.hpp"

namespace glab {

struct QuantumCode {
    Operator projector;
    int rank = 0;
    int diameter = -1;  // certified diameter, -1 before certification
    std::vector<CVec> basis;
    std::vector<std::string> basis_names;

    Operator maximally_mixed() const {
        return Operator(Mat(projector.m / static_cast<double>(rank)), projector.labels);
    }
};

inline void require_projector(const Operator &p, double tol = 1e-10) {
    if ((p.m * p.m - p.m).norm() > tol || (p.m - p.m.adjoint()).norm() > tol) {
        throw DomainError("code projector is not an orthogonal projector");
    }
}

// Logical basis obtained by projecting computational basis states in order
// and orthonormalizing; deterministic for degenerate ground spaces.
inline QuantumCode code_from_projector(const Operator &projector) {
    require_projector(projector);
    QuantumCode c;
    c.projector = projector;
    c.rank = static_cast<int>(std::lround(projector.m.trace().real()));
    if (c.rank < 1) {
        throw DomainError("code projector has rank zero");
    }
    const Eigen::Index d = projector.dim();
    const int nq = static_cast<int>(projector.labels.size());
    for (Eigen::Index k = 0; k < d && static_cast<int>(c.basis.size()) < c.rank; ++k) {
        CVec v = projector.m.col(k);
        for (const auto &b : c.basis) {
            v -= b * b.dot(v);
        }
        if (v.norm() < 1e-8) {
            continue;
        }
        c.basis.push_back(v / v.norm());
        std::string name = "|";
        for (int q = nq - 1; q >= 0; --q) {
            name += ((k >> q) & 1) ? '1' : '0';
        }
        c.basis_names.push_back(name + ">");
    }
    return c;
}

inline QuantumCode code_from_family(const InteractionFamily &f) {
    Operator g = ground_state(f);
    const double top = eigvalsh(g.m).maxCoeff();
    return code_from_projector(Operator(Mat(g.m / top), g.labels));
}

inline QuantumCode code_from_stabilizers(const StabilizerModel &m) {
    m.validate();
    const Eigen::Index d = static_cast<Eigen::Index>(dim_of(m.n));
    Mat p = Mat::Identity(d, d);
    for (const auto &g : m.generators) {
        p = p * (0.5 * (Mat::Identity(d, d) + pauli_matrix(g)));
    }
    Labels l;
    for (size_t j = 0; j < m.n; ++j) {
        l.push_back(static_cast<int>(j));
    }
    return code_from_projector(Operator(p, l));
}

struct Codeword {
    std::string name;
    Operator state;
};

// For K = 2: |0>, |1>, |+>, |-> in the logical basis. Larger K uses the basis
// states and the pairwise |i> + |j>, |i> + i|j> superpositions.
inline std::vector<Codeword> informationally_complete_codewords(const QuantumCode &c) {
    std::vector<Codeword> out;
    auto pure = [&](const CVec &v) { return Operator(Mat(v * v.adjoint()), c.projector.labels); };
    for (int i = 0; i < c.rank; ++i) {
        out.push_back({"basis" + std::to_string(i), pure(c.basis[i])});
    }
    if (c.rank == 2) {
        out.push_back({"plus", pure((c.basis[0] + c.basis[1]) / std::sqrt(2.0))});
        out.push_back({"minus", pure((c.basis[0] - c.basis[1]) / std::sqrt(2.0))});
        return out;
    }
    for (int i = 0; i < c.rank; ++i) {
        for (int j = i + 1; j < c.rank; ++j) {
            out.push_back({"re" + std::to_string(i) + std::to_string(j),
                           pure((c.basis[i] + c.basis[j]) / std::sqrt(2.0))});
            out.push_back({"im" + std::to_string(i) + std::to_string(j),
                           pure((c.basis[i] + cplx(0, 1) * c.basis[j]) / std::sqrt(2.0))});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Diameter certificates.

// Inclusion-maximal site sets of diameter <= ell.
inline std::vector<Region> diameter_regions(const Lattice &lat, int ell, int max_sites = 16) {
    const int n = lat.size();
    if (n > max_sites) {
        throw ResourceError("diameter region enumeration above site cap");
    }
    std::vector<uint32_t> ok;
    for (uint32_t m = 1; m < (1u << n); ++m) {
        Region r;
        for (int s = 0; s < n; ++s) {
            if (m & (1u << s)) {
                r.push_back(s);
            }
        }
        if (region_diameter(lat, r) <= ell) {
            ok.push_back(m);
        }
    }
    std::vector<Region> out;
    for (uint32_t m : ok) {
        bool maximal = true;
        for (uint32_t o : ok) {
            if (o != m && (o & m) == m) {
                maximal = false;
                break;
            }
        }
        if (!maximal) {
            continue;
        }
        Region r;
        for (int s = 0; s < n; ++s) {
            if (m & (1u << s)) {
                r.push_back(s);
            }
        }
        out.push_back(r);
    }
    return out;
}

struct CodeCertificate {
    bool certified = true;
    int ell = 0;
    double worst_residual = 0.0;
    size_t checked = 0;
    bool exhaustive = true;
    std::string witness;  // Pauli string on the full system
    Region witness_support;
};

inline std::string pauli_label(size_t n, const Region &r, size_t code) {
    std::string s(n, 'I');
    static const char letters[4] = {'I', 'X', 'Y', 'Z'};
    for (size_t k = 0; k < r.size(); ++k) {
        s[r[k]] = letters[(code >> (2 * (r.size() - 1 - k))) & 3];
    }
    return s;
}

// Checks ||P O P - (Tr P O / Tr P) P|| < tol over the Pauli basis of every
// maximal region of diameter <= ell; sampling when a region exceeds the budget.
inline CodeCertificate certify_code(const QuantumCode &c, const Lattice &lat, int ell, size_t budget, Rng &rng,
                                    double tol = 1e-8) {
    CodeCertificate cert;
    cert.ell = ell;
    const size_t n = c.projector.labels.size();
    if (static_cast<int>(n) != lat.size()) {
        throw DomainError("code and lattice sizes differ");
    }
    const Mat &p = c.projector.m;
    for (const Region &r : diameter_regions(lat, ell)) {
        const size_t total = size_t(1) << (2 * r.size());
        std::vector<size_t> codes;
        if (total <= budget) {
            for (size_t k = 1; k < total; ++k) {
                codes.push_back(k);
            }
        } else {
            cert.exhaustive = false;
            std::uniform_int_distribution<size_t> pick(1, total - 1);
            for (size_t k = 0; k < budget; ++k) {
                codes.push_back(pick(rng));
            }
        }
        for (size_t code : codes) {
            const std::string label = pauli_label(n, r, code);
            const Mat o = pauli_string(label);
            const Mat po = p * o * p;
            const cplx ratio = (p * o).trace() / static_cast<double>(c.rank);
            const double res = (po - ratio * p).norm();
            ++cert.checked;
            if (res > cert.worst_residual) {
                cert.worst_residual = res;
            }
            if (res > tol && cert.certified) {
                cert.certified = false;
                cert.witness = label;
                cert.witness_support = r;
            }
        }
    }
    return cert;
}

// Exact GF(2) variant: a Pauli fails the condition iff it commutes with every
// stabilizer and is not in the stabilizer group.
inline CodeCertificate certify_stabilizer_code(const StabilizerModel &m, const Lattice &lat, int ell,
                                               size_t max_paulis = size_t(1) << 24) {
    CodeCertificate cert;
    cert.ell = ell;
    if (static_cast<int>(m.n) != lat.size()) {
        throw DomainError("code and lattice sizes differ");
    }
    Gf2Basis group(2 * m.n);
    for (const auto &g : m.generators) {
        group.insert(g.symplectic());
    }
    for (const Region &r : diameter_regions(lat, ell)) {
        const size_t total = size_t(1) << (2 * r.size());
        if (cert.checked + total > max_paulis) {
            throw ResourceError("stabilizer certificate above Pauli budget");
        }
        for (size_t code = 1; code < total; ++code) {
            ++cert.checked;
            PauliWord w(m.n);
            for (size_t k = 0; k < r.size(); ++k) {
                const size_t c = (code >> (2 * (r.size() - 1 - k))) & 3;
                w.x.set(r[k], c == 1 || c == 2);
                w.z.set(r[k], c == 2 || c == 3);
            }
            bool logical = true;
            for (const auto &g : m.generators) {
                if (!commute(w, g)) {
                    logical = false;
                    break;
                }
            }
            if (logical && !group.contains(w.symplectic())) {
                cert.certified = false;
                cert.worst_residual = 1.0;
                cert.witness = pauli_label(m.n, r, code);
                cert.witness_support = r;
                return cert;
            }
        }
    }
    return cert;
}

// Largest ell in [0, max_ell] that certifies; -1 if none.
inline int certified_diameter(const StabilizerModel &m, const Lattice &lat, int max_ell) {
    int best = -1;
    for (int ell = 0; ell <= max_ell; ++ell) {
        if (!certify_stabilizer_code(m, lat, ell).certified) {
            break;
        }
        best = ell;
    }
    return best;
}

// ---------------------------------------------------------------------------
// Memory experiment.

struct MemoryOptions {
    std::vector<double> target;  // target couplings; empty keeps the family's
    double ground_eps = 1e-4;    // ||rho_{s beta} - rho_gs||_1 for the start of the encoder path
    CircuitOptions circuit{1, 1, 1, 0.25, trapezoid_quadrature()};
    int heatbath_block = 1;
    double rate = 1.0;
    std::optional<LocalLindbladian> generator;  // defaults to the heat-bath generator at the target
    std::vector<double> times{0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0};
    double steady_tol = 1e-8;
};

struct CodewordTrace {
    std::string name;
    Operator input;
    Operator encoded;
    double eps_lr = 0.0;          // max per-gate reversal residual along C on this input
    double roundtrip = 0.0;       // ||C~ C[w] - w||_1
    double generator_norm = 0.0;  // ||L C[w]||_1
    double term_sum = 0.0;        // sum_X ||L_X C[w]||_1
    std::vector<double> term_norms;
    std::vector<double> gate_residuals;
    std::vector<double> eps;    // per time
    std::vector<double> drift;  // ||e^{tL} C[w] - C[w]||_1 per time
    std::vector<double> bound;  // roundtrip + t ||L C[w]||_1 per time
};

struct MemoryRun {
    QuantumCode code;
    GroundSubstitution ground;
    GlobalCircuit encoder;
    LocalLindbladian generator;
    std::vector<double> times;
    std::vector<CodewordTrace> codewords;
    double steady_residual = 0.0;
    std::string steady_worst;
    double eps_lr_code = 0.0;  // per-gate residual on the maximally mixed codeword
};

inline Operator evolve_for(const LocalLindbladian &l, const Operator &rho, double tau) {
    if (l.empty() || tau == 0.0) {
        return rho;
    }
    return evolve_taylor(l, rho, tau);
}

// Encoder C: global circuit from s * beta (near the ground space) to the
// target; decoder: its reversal.
inline MemoryRun memory_experiment(const InteractionFamily &f, const MemoryOptions &opt = {}) {
    for (size_t k = 1; k < opt.times.size(); ++k) {
        if (opt.times[k] < opt.times[k - 1] || opt.times[0] < 0.0) {
            throw DomainError("time grid must be non-negative and sorted");
        }
    }
    require_commuting(f);
    MemoryRun run;
    run.times = opt.times;
    run.code = code_from_family(f);
    run.ground = ground_substitution(f, opt.ground_eps);
    if (!run.ground.reached) {
        throw NumericalIntegrityError("ground space not reached by scaling the couplings");
    }
    std::vector<double> from = scaled(f, run.ground.s).betas();
    std::vector<double> to = opt.target.empty() ? f.betas() : opt.target;
    if (to.size() != from.size()) {
        throw DomainError("target couplings have wrong length");
    }
    run.encoder = global_circuit_along(f, uniform_path(from, to, path_steps(from, to, opt.circuit.delta)), opt.circuit);
    const ChannelCircuit &c = run.encoder.circuit;
    const Operator &rho_target = run.encoder.target;

    if (opt.generator) {
        run.generator = *opt.generator;
    } else {
        run.generator = heatbath_generator(with_betas(f, to), opt.heatbath_block, opt.rate, &rho_target);
    }
    run.steady_residual = steady_state_residual(run.generator, rho_target, &run.steady_worst);
    if (run.steady_residual > opt.steady_tol) {
        throw ContractError("generator term " + run.steady_worst + " does not fix the target Gibbs state");
    }
    run.eps_lr_code = lr_audit(c, run.code.maximally_mixed()).eps_lr;

    for (const auto &w : informationally_complete_codewords(run.code)) {
        CodewordTrace tr;
        tr.name = w.name;
        tr.input = w.state;
        tr.encoded = apply_circuit(c, w.state);
        LrAudit lr = lr_audit(c, w.state);
        tr.eps_lr = lr.eps_lr;
        tr.gate_residuals = lr.residuals;
        tr.roundtrip = trace_distance(apply_reversal(c, tr.encoded), w.state);
        tr.generator_norm = trace_norm(apply_lindbladian(run.generator, tr.encoded));
        for (const auto &t : run.generator.terms) {
            tr.term_norms.push_back(trace_norm(apply_term(t, tr.encoded)));
            tr.term_sum += tr.term_norms.back();
        }
        Operator state = tr.encoded;
        double now = 0.0;
        for (double t : opt.times) {
            state = evolve_for(run.generator, state, t - now);
            now = t;
            tr.eps.push_back(trace_distance(apply_reversal(c, state), w.state));
            tr.drift.push_back(trace_distance(state, tr.encoded));
            tr.bound.push_back(tr.roundtrip + t * tr.generator_norm);
        }
        run.codewords.push_back(std::move(tr));
    }
    return run;
}

inline double max_logical_error(const MemoryRun &run, size_t time_index) {
    double e = 0.0;
    for (const auto &w : run.codewords) {
        e = std::max(e, w.eps.at(time_index));
    }
    return e;
}

inline std::string memory_csv(const MemoryRun &run) {
    std::ostringstream os;
    os.precision(12);
    os << "t,codeword,eps_t,bound\n";
    for (size_t k = 0; k < run.times.size(); ++k) {
        for (const auto &w : run.codewords) {
            os << run.times[k] << ',' << w.name << ',' << w.eps[k] << ',' << w.bound[k] << '\n';
        }
    }
    return os.str();
}

struct MemoryAudit {
    std::vector<AuditLine> lines;
    double eps_c = 0.0;
    double prefactor = 0.0;  // smallest P with eps_t <= P (eps_lr + eps_c)(t + 1) on the grid
    bool pass() const {
        return std::all_of(lines.begin(), lines.end(), [](const AuditLine &a) { return a.pass; });
    }
};

// Measurable inequalities along the memory bound chain. The codeword transfer
// line is informational: it needs local indistinguishability of the codewords,
// which classical codes lack.
inline MemoryAudit memory_bound_audit(const MemoryRun &run, bool include_transfer = false) {
    MemoryAudit a;
    a.eps_c = run.encoder.eps_c;
    const double gates = static_cast<double>(run.encoder.circuit.size());
    const double endpoint = run.encoder.global_error + run.ground.distance;
    for (const auto &w : run.codewords) {
        for (size_t k = 0; k < run.times.size(); ++k) {
            std::ostringstream name;
            name << "logical_error[" << w.name << ",t=" << run.times[k] << "]";
            a.lines.push_back(audit_le(name.str(), w.eps[k], w.bound[k], 1e-7, "memory_bound"));
            std::ostringstream dname;
            dname << "drift[" << w.name << ",t=" << run.times[k] << "]";
            a.lines.push_back(
                audit_le(dname.str(), w.drift[k], run.times[k] * w.generator_norm, 1e-8, "linear_growth"));
        }
        a.lines.push_back(audit_le("roundtrip[" + w.name + "]", w.roundtrip, gates * w.eps_lr, 1e-8,
                                   "reversal_circuit_error"));
        a.lines.push_back(audit_le("generator_triangle[" + w.name + "]", w.generator_norm, w.term_sum, 1e-10,
                                   "generator_triangle"));
        if (include_transfer) {
            const double rhs = (2.0 * gates + 1.0) * run.eps_lr_code;
            a.lines.push_back(audit_le("codeword_transfer[" + w.name + "]", w.eps_lr, rhs, 1e-8, "li_transfer"));
        }
    }
    // Maximally mixed codeword: C[P/K] is within the encoder error of the target.
    Operator mixed = apply_circuit(run.encoder.circuit, run.code.maximally_mixed());
    for (const auto &t : run.generator.terms) {
        const double lhs = trace_norm(apply_term(t, mixed));
        const double rhs = std::abs(t.rate) * 2.0 * endpoint + trace_norm(apply_term(t, run.encoder.target));
        a.lines.push_back(audit_le("steady_term[" + t.name + "]", lhs, rhs, 1e-8, "steady_term"));
    }
    double pref = 0.0;
    for (const auto &w : run.codewords) {
        for (size_t k = 0; k < run.times.size(); ++k) {
            const double scale = (w.eps_lr + a.eps_c) * (run.times[k] + 1.0);
            if (scale > 0.0) {
                pref = std::max(pref, w.eps[k] / scale);
            }
        }
    }
    a.prefactor = pref;
    return a;
}

}  // namespace glab
