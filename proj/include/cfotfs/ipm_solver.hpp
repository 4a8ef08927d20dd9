// SPDX-License-Identifier: Apache-2.0
//
// cfotfs -- link-level simulation and max-min resource allocation for the
// downlink of cell-free massive MIMO with OTFS modulation
// Copyright (C) 2026 the cfotfs authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "cfotfs/cone_program.hpp"

namespace cfotfs {

namespace ipm_detail {

// Per-block layout of G, split into sparse orthant rows and dense sub-blocks
// for each second-order cone (restricted to the columns the cone touches).
// The normal matrix G' W^-2 G is assembled block by block each iteration.
struct Structure {
    int n = 0;  // variables
    int l = 0;  // orthant rows
    int m = 0;  // total rows

    // orthant rows, each a short list of (col, val)
    std::vector<std::vector<std::pair<int, double>>> orth_rows;

    struct SocBlock {
        int offset = 0;  // first row in the stacked cone vector
        int dim = 0;
        std::vector<int> cols;  // touched columns, ascending
        Eigen::MatrixXd mat;    // dim x cols.size()
    };
    std::vector<SocBlock> socs;

    static Structure build(const ConeProgram& p) {
        Structure st;
        st.n = p.num_vars;
        st.l = p.nonneg_dim;
        st.m = p.rows();
        st.orth_rows.resize(static_cast<std::size_t>(st.l));

        st.socs.resize(p.soc_dims.size());
        std::vector<int> block_of_row(static_cast<std::size_t>(st.m), -1);
        int off = st.l;
        for (std::size_t k = 0; k < p.soc_dims.size(); ++k) {
            st.socs[k].offset = off;
            st.socs[k].dim = p.soc_dims[k];
            for (int r = off; r < off + p.soc_dims[k]; ++r)
                block_of_row[static_cast<std::size_t>(r)] = static_cast<int>(k);
            off += p.soc_dims[k];
        }

        // column sets per cone
        std::vector<std::vector<int>> cone_cols(p.soc_dims.size());
        for (const auto& e : p.entries) {
            if (e.row < st.l) continue;
            cone_cols[static_cast<std::size_t>(block_of_row[static_cast<std::size_t>(e.row)])]
                .push_back(e.col);
        }
        for (std::size_t k = 0; k < st.socs.size(); ++k) {
            auto& cols = cone_cols[k];
            std::sort(cols.begin(), cols.end());
            cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
            st.socs[k].cols = cols;
            st.socs[k].mat =
                Eigen::MatrixXd::Zero(st.socs[k].dim, static_cast<Eigen::Index>(cols.size()));
        }
        for (const auto& e : p.entries) {
            if (e.row < st.l) {
                st.orth_rows[static_cast<std::size_t>(e.row)].emplace_back(e.col, e.value);
            } else {
                auto& blk = st.socs[static_cast<std::size_t>(
                    block_of_row[static_cast<std::size_t>(e.row)])];
                const auto it = std::lower_bound(blk.cols.begin(), blk.cols.end(), e.col);
                const auto j = static_cast<Eigen::Index>(it - blk.cols.begin());
                blk.mat(e.row - blk.offset, j) += e.value;
            }
        }
        // merge duplicate orthant entries
        for (auto& row : st.orth_rows) {
            std::sort(row.begin(), row.end());
            std::vector<std::pair<int, double>> merged;
            for (const auto& [c, v] : row) {
                if (!merged.empty() && merged.back().first == c)
                    merged.back().second += v;
                else
                    merged.emplace_back(c, v);
            }
            row = std::move(merged);
        }
        return st;
    }

    Eigen::VectorXd mat_vec(const Eigen::VectorXd& x) const {  // G x
        Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
        for (int r = 0; r < l; ++r) {
            double acc = 0.0;
            for (const auto& [c, v] : orth_rows[static_cast<std::size_t>(r)])
                acc += v * x(c);
            y(r) = acc;
        }
        for (const auto& blk : socs) {
            Eigen::VectorXd xs(static_cast<Eigen::Index>(blk.cols.size()));
            for (std::size_t j = 0; j < blk.cols.size(); ++j)
                xs(static_cast<Eigen::Index>(j)) = x(blk.cols[j]);
            y.segment(blk.offset, blk.dim) = blk.mat * xs;
        }
        return y;
    }

    Eigen::VectorXd matT_vec(const Eigen::VectorXd& y) const {  // G' y
        Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
        for (int r = 0; r < l; ++r)
            for (const auto& [c, v] : orth_rows[static_cast<std::size_t>(r)])
                x(c) += v * y(r);
        for (const auto& blk : socs) {
            const Eigen::VectorXd xs =
                blk.mat.transpose() * y.segment(blk.offset, blk.dim);
            for (std::size_t j = 0; j < blk.cols.size(); ++j)
                x(blk.cols[j]) += xs(static_cast<Eigen::Index>(j));
        }
        return x;
    }
};

// Nesterov-Todd scaling state. W is block diagonal: diag(sqrt(s/z)) on the
// orthant and beta*(2*w*w' - J) on each second-order cone, with w the NT
// point of unit hyperbolic norm. lambda = W z = W^-1 s is the scaled iterate.
struct Scaling {
    Eigen::VectorXd orth_w2;  // s_i / z_i
    struct Soc {
        Eigen::VectorXd wbar;
        double beta = 1.0;
    };
    std::vector<Soc> socs;
    Eigen::VectorXd lambda;

    bool compute(const Structure& st, const Eigen::VectorXd& s, const Eigen::VectorXd& z) {
        orth_w2.resize(st.l);
        lambda.resize(st.m);
        for (int i = 0; i < st.l; ++i) {
            if (s(i) <= 0 || z(i) <= 0) return false;
            orth_w2(i) = s(i) / z(i);
            lambda(i) = std::sqrt(s(i) * z(i));
        }
        socs.resize(st.socs.size());
        for (std::size_t k = 0; k < st.socs.size(); ++k) {
            const auto& blk = st.socs[k];
            const auto sk = s.segment(blk.offset, blk.dim);
            const auto zk = z.segment(blk.offset, blk.dim);
            const double sres = sk(0) * sk(0) - sk.tail(blk.dim - 1).squaredNorm();
            const double zres = zk(0) * zk(0) - zk.tail(blk.dim - 1).squaredNorm();
            if (sres <= 0 || zres <= 0 || sk(0) <= 0 || zk(0) <= 0) return false;
            const double a = std::sqrt(sres);
            const double b = std::sqrt(zres);
            const Eigen::VectorXd sb = sk / a;
            const Eigen::VectorXd zb = zk / b;
            const double gamma = std::sqrt((1.0 + sb.dot(zb)) / 2.0);
            Eigen::VectorXd jz = zb;  // J zbar
            jz.tail(blk.dim - 1) *= -1.0;
            const Eigen::VectorXd w = (sb + jz) / (2.0 * gamma);
            socs[k].wbar = w;
            socs[k].beta = std::sqrt(a / b);

            // lambda_k = W z = beta * (2 w (w'z) - J z)
            Eigen::VectorXd jzk = zk;
            jzk.tail(blk.dim - 1) *= -1.0;
            lambda.segment(blk.offset, blk.dim) =
                socs[k].beta * (2.0 * w * w.dot(zk) - jzk);
        }
        return true;
    }

    // y = W v or y = W^-1 v, blockwise
    Eigen::VectorXd apply(const Structure& st, const Eigen::VectorXd& v, bool inverse) const {
        Eigen::VectorXd y(st.m);
        for (int i = 0; i < st.l; ++i) {
            const double w = std::sqrt(orth_w2(i));
            y(i) = inverse ? v(i) / w : v(i) * w;
        }
        for (std::size_t k = 0; k < st.socs.size(); ++k) {
            const auto& blk = st.socs[k];
            const auto vk = v.segment(blk.offset, blk.dim);
            const auto& w = socs[k].wbar;
            Eigen::VectorXd jv = vk;
            jv.tail(blk.dim - 1) *= -1.0;
            if (inverse) {
                // W^-1 = (1/beta) (2 (Jw)(Jw)' - J)
                Eigen::VectorXd jw = w;
                jw.tail(blk.dim - 1) *= -1.0;
                y.segment(blk.offset, blk.dim) =
                    (2.0 * jw * jw.dot(vk) - jv) / socs[k].beta;
            } else {
                y.segment(blk.offset, blk.dim) = socs[k].beta * (2.0 * w * w.dot(vk) - jv);
            }
        }
        return y;
    }
};

// Jordan-algebra helpers on the stacked cone vector.
inline Eigen::VectorXd cone_identity(const Structure& st) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(st.m);
    e.head(st.l).setOnes();
    for (const auto& blk : st.socs) e(blk.offset) = 1.0;
    return e;
}

inline double cone_degree(const Structure& st) {
    return static_cast<double>(st.l) + static_cast<double>(st.socs.size());
}

inline Eigen::VectorXd jordan_mul(const Structure& st, const Eigen::VectorXd& u,
                                  const Eigen::VectorXd& v) {
    Eigen::VectorXd y(st.m);
    y.head(st.l) = u.head(st.l).cwiseProduct(v.head(st.l));
    for (const auto& blk : st.socs) {
        const auto uk = u.segment(blk.offset, blk.dim);
        const auto vk = v.segment(blk.offset, blk.dim);
        y(blk.offset) = uk.dot(vk);
        y.segment(blk.offset + 1, blk.dim - 1) =
            uk(0) * vk.tail(blk.dim - 1) + vk(0) * uk.tail(blk.dim - 1);
    }
    return y;
}

// solve lambda o u = d for u (arrow-matrix inverse per block)
inline bool jordan_div(const Structure& st, const Eigen::VectorXd& lambda,
                       const Eigen::VectorXd& d, Eigen::VectorXd& u) {
    u.resize(st.m);
    for (int i = 0; i < st.l; ++i) {
        if (lambda(i) == 0.0) return false;
        u(i) = d(i) / lambda(i);
    }
    for (const auto& blk : st.socs) {
        const auto lk = lambda.segment(blk.offset, blk.dim);
        const auto dk = d.segment(blk.offset, blk.dim);
        const double det = lk(0) * lk(0) - lk.tail(blk.dim - 1).squaredNorm();
        if (det <= 0 || lk(0) <= 0) return false;
        const double u0 = (lk(0) * dk(0) - lk.tail(blk.dim - 1).dot(dk.tail(blk.dim - 1))) / det;
        u(blk.offset) = u0;
        u.segment(blk.offset + 1, blk.dim - 1) =
            (dk.tail(blk.dim - 1) - u0 * lk.tail(blk.dim - 1)) / lk(0);
    }
    return true;
}

// largest step alpha with u + alpha du staying in the cone (capped)
inline double max_step(const Structure& st, const Eigen::VectorXd& u,
                       const Eigen::VectorXd& du, double cap) {
    double alpha = cap;
    for (int i = 0; i < st.l; ++i)
        if (du(i) < 0.0) alpha = std::min(alpha, -u(i) / du(i));
    for (const auto& blk : st.socs) {
        const auto uk = u.segment(blk.offset, blk.dim);
        const auto dk = du.segment(blk.offset, blk.dim);
        const double a = dk(0) * dk(0) - dk.tail(blk.dim - 1).squaredNorm();
        const double b = 2.0 * (uk(0) * dk(0) - uk.tail(blk.dim - 1).dot(dk.tail(blk.dim - 1)));
        const double c = uk(0) * uk(0) - uk.tail(blk.dim - 1).squaredNorm();
        if (dk(0) < 0.0) alpha = std::min(alpha, -uk(0) / dk(0));
        // smallest positive root of a t^2 + b t + c = 0, if any
        double root = std::numeric_limits<double>::infinity();
        if (std::abs(a) < 1e-300) {
            if (b < 0.0) root = -c / b;
        } else {
            const double disc = b * b - 4.0 * a * c;
            if (disc >= 0.0) {
                const double sq = std::sqrt(disc);
                const double qq = -0.5 * (b + (b >= 0 ? sq : -sq));
                const double r1 = qq / a;
                const double r2 = (qq != 0.0) ? c / qq : std::numeric_limits<double>::infinity();
                for (double r : {r1, r2})
                    if (r > 0.0) root = std::min(root, r);
            }
        }
        alpha = std::min(alpha, root);
    }
    return alpha;
}

}  // namespace ipm_detail

/// Primal-dual interior-point solver for linear + second-order cone programs
/// (Mehrotra predictor-corrector with Nesterov-Todd scaling; dense normal
/// equations). Self-contained; safe for concurrent independent instances.
class InteriorPointSolver final : public ConicBackend {
  public:
    struct Options {
        double feastol = 1e-9;
        double abstol = 1e-12;
        double reltol = 1e-10;
        int max_iterations = 100;
        double step_fraction = 0.99;
        double static_reg = 1e-11;
    };

    InteriorPointSolver() = default;
    explicit InteriorPointSolver(const Options& opt) : opt_(opt) {}

    ConeSolution solve(const ConeProgram& prog) const override;

  private:
    Options opt_{};
};

inline ConeSolution InteriorPointSolver::solve(const ConeProgram& prog) const {
    using namespace ipm_detail;
    prog.check();

    const Structure st = Structure::build(prog);
    const Eigen::VectorXd& c = prog.cost;
    const Eigen::VectorXd& h = prog.rhs;
    const Eigen::VectorXd e = cone_identity(st);
    const double nu = cone_degree(st);
    const double hnorm = std::max(1.0, h.norm());
    const double cnorm = std::max(1.0, c.norm());

    ConeSolution best;
    best.status = ConeStatus::NumericalFailure;
    double best_score = std::numeric_limits<double>::infinity();

    // ----- KKT machinery ----------------------------------------------------
    Scaling W;
    Eigen::MatrixXd kkt(st.n, st.n);
    Eigen::LLT<Eigen::MatrixXd> llt;
    double reg_used = 0.0;

    auto build_normal_matrix = [&](bool identity_scaling) -> bool {
        kkt.setZero();
        for (int r = 0; r < st.l; ++r) {
            const double wi = identity_scaling ? 1.0 : 1.0 / W.orth_w2(r);
            const auto& row = st.orth_rows[static_cast<std::size_t>(r)];
            for (const auto& [c1, v1] : row)
                for (const auto& [c2, v2] : row) kkt(c1, c2) += wi * v1 * v2;
        }
        for (std::size_t k = 0; k < st.socs.size(); ++k) {
            const auto& blk = st.socs[k];
            Eigen::MatrixXd cb;
            if (identity_scaling) {
                cb = blk.mat;
            } else {
                // W^-1 B = (1/beta)(2 (Jw)(Jw)'B - J B)
                const auto& w = W.socs[k].wbar;
                Eigen::VectorXd jw = w;
                jw.tail(blk.dim - 1) *= -1.0;
                Eigen::MatrixXd jb = blk.mat;
                jb.bottomRows(blk.dim - 1) *= -1.0;
                cb = (2.0 * jw * (jw.transpose() * blk.mat) - jb) / W.socs[k].beta;
            }
            const Eigen::MatrixXd gram = cb.transpose() * cb;
            for (std::size_t j1 = 0; j1 < blk.cols.size(); ++j1)
                for (std::size_t j2 = 0; j2 < blk.cols.size(); ++j2)
                    kkt(blk.cols[j1], blk.cols[j2]) +=
                        gram(static_cast<Eigen::Index>(j1), static_cast<Eigen::Index>(j2));
        }
        double reg = opt_.static_reg * (1.0 + kkt.trace() / st.n);
        for (int attempt = 0; attempt < 3; ++attempt) {
            Eigen::MatrixXd reg_kkt = kkt;
            reg_kkt.diagonal().array() += reg;
            llt.compute(reg_kkt);
            if (llt.info() == Eigen::Success) {
                reg_used = reg;
                return true;
            }
            reg *= 100.0;
        }
        return false;
    };

    auto winv2 = [&](const Eigen::VectorXd& v) {
        return W.apply(st, W.apply(st, v, true), true);
    };

    // Solves  [0 G'; G -W^2] [dx; dz] = [bx; bz]  via the normal equations,
    // with one step of iterative refinement on dx.
    auto solve_kkt = [&](const Eigen::VectorXd& bx, const Eigen::VectorXd& bz,
                         Eigen::VectorXd& dx, Eigen::VectorXd& dz) {
        const Eigen::VectorXd rhs = bx + st.matT_vec(winv2(bz));
        dx = llt.solve(rhs);
        dx += llt.solve(rhs - kkt * dx - reg_used * dx);
        dz = winv2(st.mat_vec(dx) - bz);
    };

    // ----- initial point -----------------------------------------------------
    if (!build_normal_matrix(true)) return best;

    Eigen::VectorXd x, s, z;
    {
        // primal: minimize ||Gx - h||, s = h - Gx
        Eigen::VectorXd xr = llt.solve(st.matT_vec(h));
        Eigen::VectorXd s_ls = h - st.mat_vec(xr);
        // dual: min-norm solution of G'z = -c
        Eigen::VectorXd xc = llt.solve(-c);
        Eigen::VectorXd z_ls = st.mat_vec(xc);

        auto cone_shift = [&](Eigen::VectorXd& v) {
            double worst = -std::numeric_limits<double>::infinity();
            for (int i = 0; i < st.l; ++i) worst = std::max(worst, -v(i));
            for (const auto& blk : st.socs) {
                const auto vk = v.segment(blk.offset, blk.dim);
                worst = std::max(worst, vk.tail(blk.dim - 1).norm() - vk(0));
            }
            if (worst >= 0.0) v += (1.0 + worst) * e;
        };
        cone_shift(s_ls);
        cone_shift(z_ls);
        x = xr;
        s = s_ls;
        z = z_ls;
    }

    // ----- main loop ----------------------------------------------------------
    int iter = 0;
    int tiny_steps = 0;
    for (; iter < opt_.max_iterations; ++iter) {
        const Eigen::VectorXd rx = c + st.matT_vec(z);       // dual residual
        const Eigen::VectorXd rz = st.mat_vec(x) + s - h;    // primal residual
        const double gap = s.dot(z);
        const double pcost = c.dot(x);
        const double pres = rz.norm() / hnorm;
        const double dres = rx.norm() / cnorm;
        const double relgap = gap / std::max(1.0, std::abs(pcost));

        const double score = std::max({pres, dres, relgap});
        if (score < best_score) {
            best_score = score;
            best.x = x;
            best.s = s;
            best.z = z;
            best.objective = pcost;
            best.primal_residual = pres;
            best.dual_residual = dres;
            best.duality_gap = gap;
            best.iterations = iter;
        }
        if (pres <= opt_.feastol && dres <= opt_.feastol &&
            (gap <= opt_.abstol || relgap <= opt_.reltol)) {
            best.status = ConeStatus::Optimal;
            return best;
        }

        if (!W.compute(st, s, z)) break;
        if (!build_normal_matrix(false)) break;
        const double mu = gap / nu;

        // predictor
        Eigen::VectorXd dc = -jordan_mul(st, W.lambda, W.lambda);
        Eigen::VectorXd tmp;
        if (!jordan_div(st, W.lambda, dc, tmp)) break;
        Eigen::VectorXd dx_a, dz_a;
        solve_kkt(-rx, -rz - W.apply(st, tmp, false), dx_a, dz_a);
        Eigen::VectorXd ds_a = -rz - st.mat_vec(dx_a);

        double alpha_aff = std::min(max_step(st, s, ds_a, 1.0), max_step(st, z, dz_a, 1.0));
        const double mu_aff = (s + alpha_aff * ds_a).dot(z + alpha_aff * dz_a) / nu;
        double sigma = std::pow(std::max(0.0, mu_aff / mu), 3.0);
        sigma = std::min(1.0, std::max(1e-8, sigma));

        // corrector (Mehrotra second-order term in the scaled space)
        const Eigen::VectorXd corr = jordan_mul(st, W.apply(st, ds_a, true),
                                                W.apply(st, dz_a, false));
        dc = sigma * mu * e - jordan_mul(st, W.lambda, W.lambda) - corr;
        if (!jordan_div(st, W.lambda, dc, tmp)) break;
        Eigen::VectorXd dx, dz;
        const double res_scale = 1.0 - sigma;
        solve_kkt(-res_scale * rx, -res_scale * rz - W.apply(st, tmp, false), dx, dz);
        Eigen::VectorXd ds = -res_scale * rz - st.mat_vec(dx);

        double alpha = std::min(max_step(st, s, ds, 1.0 / opt_.step_fraction),
                                max_step(st, z, dz, 1.0 / opt_.step_fraction));
        alpha = std::min(1.0, opt_.step_fraction * alpha);
        if (alpha < 1e-8) {
            if (++tiny_steps >= 2) break;
        } else {
            tiny_steps = 0;
        }

        x += alpha * dx;
        s += alpha * ds;
        z += alpha * dz;
    }

    best.iterations = iter;
    best.status = (best.primal_residual <= 1e-8 && best.dual_residual <= 1e-8 &&
                   best_score <= 1e-6)
                      ? ConeStatus::IterationLimit
                      : ConeStatus::NumericalFailure;
    return best;
}

}  // namespace cfotfs
