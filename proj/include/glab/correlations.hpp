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

// Covariance bounds, clustering fits and stable-clustering probes.

#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "glab/model.hpp"
#include "glab/qcore.hpp"

namespace glab {

// Orthogonal (Hilbert-Schmidt) projection onto a *-subalgebra of operators on
// a fixed label list. Full and diagonal algebras avoid an explicit basis.
struct AlgebraProjector {
    enum class Kind { Full, Diagonal, Basis };
    Kind kind = Kind::Full;
    OperatorBasis basis;

    static AlgebraProjector full() {
        return {};
    }
    static AlgebraProjector diagonal() {
        return {Kind::Diagonal, {}};
    }
    static AlgebraProjector from_basis(OperatorBasis b) {
        return {Kind::Basis, std::move(b)};
    }

    bool restricted() const {
        return kind != Kind::Full;
    }

    Mat project(const Mat &m) const {
        switch (kind) {
            case Kind::Full:
                return m;
            case Kind::Diagonal:
                return Mat(m.diagonal().asDiagonal());
            case Kind::Basis:
                return basis.project(m);
        }
        return m;
    }
};

// Local algebra of `region`, with the diagonal shortcut when the family is
// classical and the closure is the full diagonal algebra.
inline AlgebraProjector algebra_for(const InteractionFamily &f, const Region &region) {
    OperatorBasis b = local_algebra(f, region);
    if (f.all_diagonal() && b.size() == dim_of(region.size())) {
        return AlgebraProjector::diagonal();
    }
    if (b.size() == dim_of(region.size()) * dim_of(region.size())) {
        return AlgebraProjector::full();
    }
    return AlgebraProjector::from_basis(std::move(b));
}

struct CovarianceEstimate {
    double lower = 0.0;
    double upper = 0.0;
    Mat o1, o2;  // witnesses on X and Y (label order as given)
    bool restricted = false;
    std::vector<double> trajectory;  // best objective per ascent step
};

struct CovarianceOptions {
    int restarts = 8;
    int iterations = 60;
    uint64_t seed = 11;
    double rel_tol = 1e-12;
    std::optional<Mat> seed_o1;  // extra start with this witness on X
    bool compute_upper = true;
};

namespace detail {

// K1 = Tr_Y[Delta (I (x) O2)] on X.
inline Mat contract_y(const Mat &delta, const Mat &o2, Eigen::Index dx, Eigen::Index dy) {
    Mat k = Mat::Zero(dx, dx);
    for (Eigen::Index y = 0; y < dy; ++y) {
        for (Eigen::Index yp = 0; yp < dy; ++yp) {
            const cplx w = o2(yp, y);
            if (w == cplx(0.0, 0.0)) {
                continue;
            }
            for (Eigen::Index xp = 0; xp < dx; ++xp) {
                for (Eigen::Index x = 0; x < dx; ++x) {
                    k(x, xp) += w * delta(x * dy + y, xp * dy + yp);
                }
            }
        }
    }
    return k;
}

// K2 = Tr_X[Delta (O1 (x) I)] on Y.
inline Mat contract_x(const Mat &delta, const Mat &o1, Eigen::Index dx, Eigen::Index dy) {
    Mat k = Mat::Zero(dy, dy);
    for (Eigen::Index x = 0; x < dx; ++x) {
        for (Eigen::Index xp = 0; xp < dx; ++xp) {
            const cplx w = o1(xp, x);
            if (w == cplx(0.0, 0.0)) {
                continue;
            }
            k += w * delta.block(x * dy, xp * dy, dy, dy);
        }
    }
    return k;
}

// O maximizing Re Tr(O K) over contractions: the adjoint of the partial
// isometry in K's polar decomposition. Returns (O, ||K||_1).
inline std::pair<Mat, double> polar_witness(const Mat &k) {
    if (is_diagonal(k)) {
        Mat o = Mat::Zero(k.rows(), k.cols());
        double s = 0.0;
        for (Eigen::Index i = 0; i < k.rows(); ++i) {
            const double a = std::abs(k(i, i));
            s += a;
            if (a > 0) {
                o(i, i) = std::conj(k(i, i)) / a;
            }
        }
        return {o, s};
    }
    Eigen::BDCSVD<Mat> svd(k, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const RVec &sv = svd.singularValues();
    const double cut = sv.size() ? 1e-12 * sv(0) : 0.0;
    Mat o = Mat::Zero(k.cols(), k.rows());
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > cut) {
            o += svd.matrixV().col(i) * svd.matrixU().col(i).adjoint();
        }
    }
    return {o, sv.sum()};
}

inline Mat clip_to_contraction(Mat o) {
    const double n = operator_norm(o);
    if (n > 1.0) {
        o /= n;
    }
    return o;
}

// Projection of an operator on X (x) Y onto alg_x (x) alg_y.
inline Mat project_tensor(const Mat &m, const AlgebraProjector &ax, const AlgebraProjector &ay, Eigen::Index dx,
                          Eigen::Index dy) {
    // Project Y-blocks first, then X on the reshuffled blocks.
    Mat tmp = m;
    if (ay.restricted()) {
        for (Eigen::Index x = 0; x < dx; ++x) {
            for (Eigen::Index xp = 0; xp < dx; ++xp) {
                tmp.block(x * dy, xp * dy, dy, dy) = ay.project(m.block(x * dy, xp * dy, dy, dy));
            }
        }
    }
    if (!ax.restricted()) {
        return tmp;
    }
    Mat out(dx * dy, dx * dy);
    Mat sub(dx, dx);
    for (Eigen::Index y = 0; y < dy; ++y) {
        for (Eigen::Index yp = 0; yp < dy; ++yp) {
            for (Eigen::Index x = 0; x < dx; ++x) {
                for (Eigen::Index xp = 0; xp < dx; ++xp) {
                    sub(x, xp) = tmp(x * dy + y, xp * dy + yp);
                }
            }
            Mat p = ax.project(sub);
            for (Eigen::Index x = 0; x < dx; ++x) {
                for (Eigen::Index xp = 0; xp < dx; ++xp) {
                    out(x * dy + y, xp * dy + yp) = p(x, xp);
                }
            }
        }
    }
    return out;
}

}  // namespace detail

// Delta = rho_XY - rho_X (x) rho_Y with labels X ++ Y.
inline Mat correlation_operator(const Operator &state, const Region &x, const Region &y) {
    if (!label_intersection(x, y).empty()) {
        throw PartitionError("covariance regions overlap");
    }
    Labels xy = x;
    xy.insert(xy.end(), y.begin(), y.end());
    Operator rxy = partial_trace(state, xy);
    Operator rx = partial_trace(rxy, x);
    Operator ry = partial_trace(rxy, y);
    return rxy.m - kron(rx.m, ry.m);
}

// Lower bound by alternating polar maximization, upper bound by ||Delta||_1
// (after projection onto alg_x (x) alg_y when restricted).
inline CovarianceEstimate covariance(const Operator &state, const Region &x, const Region &y,
                                     const AlgebraProjector &ax = AlgebraProjector::full(),
                                     const AlgebraProjector &ay = AlgebraProjector::full(),
                                     const CovarianceOptions &opt = {}) {
    CovarianceEstimate est;
    est.restricted = ax.restricted() || ay.restricted();
    const Eigen::Index dx = static_cast<Eigen::Index>(dim_of(x.size()));
    const Eigen::Index dy = static_cast<Eigen::Index>(dim_of(y.size()));
    est.o1 = Mat::Identity(dx, dx);
    est.o2 = Mat::Identity(dy, dy);
    if (x.empty() || y.empty()) {
        return est;
    }
    Mat delta = correlation_operator(state, x, y);
    if (opt.compute_upper) {
        Mat pd = est.restricted ? detail::project_tensor(delta, ax, ay, dx, dy) : delta;
        est.upper = trace_norm(pd);
    }
    Rng rng(opt.seed);
    auto ascend = [&](Mat o1, bool from_o1) {
        Mat o2;
        double best = 0.0;
        std::vector<double> traj;
        if (!from_o1) {
            o2 = o1;
        }
        for (int it = 0; it < opt.iterations; ++it) {
            if (from_o1 || it > 0) {
                auto [w2, v2] = detail::polar_witness(ay.project(detail::contract_x(delta, o1, dx, dy)));
                o2 = detail::clip_to_contraction(ay.project(w2));
                (void)v2;
            }
            auto [w1, v1] = detail::polar_witness(ax.project(detail::contract_y(delta, o2, dx, dy)));
            o1 = detail::clip_to_contraction(ax.project(w1));
            const double val = std::abs((delta * kron(o1, o2)).trace());
            traj.push_back(val);
            if (val <= best * (1 + opt.rel_tol) + 1e-300 && it > 0) {
                best = std::max(best, val);
                break;
            }
            best = std::max(best, val);
        }
        if (best > est.lower) {
            est.lower = best;
            est.o1 = o1;
            est.o2 = o2;
            est.trajectory = traj;
        }
    };
    if (opt.seed_o1) {
        ascend(detail::clip_to_contraction(ax.project(*opt.seed_o1)), true);
    }
    for (int r = 0; r < opt.restarts; ++r) {
        Mat start = ay.project(random_hermitian(dy, rng));
        if (start.norm() == 0.0) {
            start = Mat::Identity(dy, dy);
        }
        ascend(detail::clip_to_contraction(start), false);
    }
    if (opt.compute_upper && est.lower > est.upper) {
        // Both come from the same Delta; any excess is rounding.
        est.upper = std::max(est.upper, est.lower);
    }
    return est;
}

// ---------------------------------------------------------------------------
// Clustering fits.

struct ClusteringSample {
    int separation = 0;
    double lower = 0.0;
    double upper = 0.0;
    bool restricted = false;
    int perturbation_id = -1;
};

struct ClusteringFit {
    std::vector<ClusteringSample> samples;
    double xi = 0.0;
    double log_prefactor = 0.0;
    double r2 = 0.0;
    bool fitted = false;
    bool below_floor = false;
    bool violated = false;  // non-decaying fit
    std::string bound_used = "lower";
};

enum class AlgebraChoice { Full, Local };

inline ClusteringFit fit_clustering(std::vector<ClusteringSample> samples, double floor = 1e-12) {
    ClusteringFit fit;
    fit.samples = std::move(samples);
    std::vector<double> xs, ys;
    for (const auto &s : fit.samples) {
        if (s.lower > floor) {
            xs.push_back(s.separation);
            ys.push_back(std::log(s.lower));
        }
    }
    if (xs.empty()) {
        fit.below_floor = true;
        return fit;
    }
    const double n = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (xs.size() < 2 || sxx == 0.0) {
        fit.below_floor = xs.size() < 2;
        return fit;
    }
    const double slope = sxy / sxx;
    fit.log_prefactor = my - slope * mx;
    fit.r2 = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    fit.fitted = true;
    if (slope < 0) {
        fit.xi = -1.0 / slope;
    } else {
        fit.xi = std::numeric_limits<double>::infinity();
        fit.violated = true;
    }
    return fit;
}

using ProjectorPairs = std::vector<std::pair<AlgebraProjector, AlgebraProjector>>;

// Algebras depend on the supports of the terms only, so perturbations of the
// coefficients reuse them.
inline ProjectorPairs partition_projectors(const InteractionFamily &f, const std::vector<AnnulusPartition> &parts,
                                           AlgebraChoice alg) {
    ProjectorPairs out;
    for (const auto &p : parts) {
        if (alg == AlgebraChoice::Local) {
            out.emplace_back(algebra_for(f, p.a), algebra_for(f, p.c));
        } else {
            out.emplace_back(AlgebraProjector::full(), AlgebraProjector::full());
        }
    }
    return out;
}

inline std::vector<ClusteringSample> clustering_samples(const InteractionFamily &f, const Operator &rho,
                                                        const std::vector<AnnulusPartition> &parts,
                                                        const ProjectorPairs &proj, const CovarianceOptions &opt,
                                                        int perturbation_id = -1) {
    std::vector<ClusteringSample> out;
    for (size_t k = 0; k < parts.size(); ++k) {
        const auto &p = parts[k];
        CovarianceEstimate c = covariance(rho, p.a, p.c, proj[k].first, proj[k].second, opt);
        out.push_back({region_distance(f.lattice, p.a, p.c), c.lower, c.upper, c.restricted, perturbation_id});
    }
    return out;
}

inline ClusteringFit clustering_scan(const InteractionFamily &f, const std::vector<AnnulusPartition> &parts,
                                     AlgebraChoice alg = AlgebraChoice::Local, const CovarianceOptions &opt = {}) {
    std::vector<int> seps;
    for (const auto &p : parts) {
        int d = region_distance(f.lattice, p.a, p.c);
        if (std::find(seps.begin(), seps.end(), d) == seps.end()) {
            seps.push_back(d);
        }
    }
    if (seps.size() < 3) {
        throw DomainError("clustering_scan needs at least three distinct separations");
    }
    Operator rho = gibbs_state(f);
    return fit_clustering(clustering_samples(f, rho, parts, partition_projectors(f, parts, alg), opt));
}

struct StableClusteringReport {
    ClusteringFit worst;
    std::vector<double> worst_delta;
    int evaluated = 0;
    std::vector<ClusteringFit> fits;
};

// Worst fit is the violated one if any, otherwise the largest xi.
inline StableClusteringReport stable_clustering_probe(const InteractionFamily &f, double delta, int samples,
                                                      const std::vector<AnnulusPartition> &parts,
                                                      AlgebraChoice alg = AlgebraChoice::Local,
                                                      uint64_t seed = 5, bool corners = true,
                                                      const CovarianceOptions &opt = {}) {
    if (samples < 1) {
        throw DomainError("stable_clustering_probe needs at least one sample");
    }
    std::vector<std::vector<double>> deltas;
    const size_t m = f.terms.size();
    if (delta == 0.0) {
        deltas.push_back(std::vector<double>(m, 0.0));
    } else {
        Rng rng(seed);
        std::uniform_real_distribution<double> u(-delta, delta);
        for (int s = 0; s < samples; ++s) {
            std::vector<double> d(m);
            for (auto &v : d) {
                v = u(rng);
            }
            deltas.push_back(d);
        }
        if (corners && m <= 12) {
            for (size_t mask = 0; mask < (size_t{1} << m); ++mask) {
                std::vector<double> d(m);
                for (size_t i = 0; i < m; ++i) {
                    d[i] = (mask >> i) & 1 ? delta : -delta;
                }
                deltas.push_back(d);
            }
        }
    }
    StableClusteringReport rep;
    const ProjectorPairs proj = partition_projectors(f, parts, alg);
    bool have = false;
    for (size_t k = 0; k < deltas.size(); ++k) {
        std::vector<double> b = f.betas();
        for (size_t i = 0; i < m; ++i) {
            b[i] += deltas[k][i];
        }
        InteractionFamily g = with_betas(f, b);
        Operator rho = gibbs_state(g);
        ClusteringFit fit = fit_clustering(clustering_samples(g, rho, parts, proj, opt, static_cast<int>(k)));
        ++rep.evaluated;
        auto worse = [](const ClusteringFit &a, const ClusteringFit &b) {
            if (a.violated != b.violated) {
                return a.violated;
            }
            if (a.fitted != b.fitted) {
                return a.fitted;
            }
            return a.xi > b.xi;
        };
        if (!have || worse(fit, rep.worst)) {
            rep.worst = fit;
            rep.worst_delta = deltas[k];
            have = true;
        }
        rep.fits.push_back(std::move(fit));
    }
    return rep;
}

}  // namespace glab
