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

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cfotfs/large_scale.hpp"
#include "cfotfs/system_config.hpp"

namespace cfotfs {

struct EstimationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class CheScheme { EP, SP };

/// Per-path MMSE channel-estimation variances gamma_{pq,i} for one scheme,
/// with the per-link aggregates the power-control stage consumes:
/// varrho_pq = sum_i gamma_{pq,i} and beta_pq = sum_i beta_{pq,i}.
struct EstimationStats {
    CheScheme scheme = CheScheme::SP;
    int num_aps = 0, num_users = 0, num_paths = 0;
    std::vector<double> gamma;  // [p][q][i], same layout as LargeScaleState
    Eigen::MatrixXd varrho;     // M_a x K_u
    Eigen::MatrixXd beta_sum;   // M_a x K_u

    std::size_t idx(int p, int q, int i) const {
        return (static_cast<std::size_t>(p) * num_users + q) * num_paths + i;
    }
    double gamma_at(int p, int q, int i) const { return gamma[idx(p, q, i)]; }
};

namespace detail {

inline EstimationStats make_stats(const LargeScaleState& ls, CheScheme scheme) {
    EstimationStats st;
    st.scheme = scheme;
    st.num_aps = ls.num_aps;
    st.num_users = ls.num_users;
    st.num_paths = ls.num_paths;
    st.gamma.assign(ls.beta.size(), 0.0);
    st.varrho = Eigen::MatrixXd::Zero(ls.num_aps, ls.num_users);
    st.beta_sum = ls.beta_sum();
    return st;
}

}  // namespace detail

/// Estimation variance of the embedded-pilot scheme:
///
///   gamma^ep_{pq,i} = rhoPil_q eta_q beta_{pq,i}^2 /
///     [ rhoPil_q eta_q beta_{pq,i}
///       + (eta_q/N) * ( sum_q' rhoDt_q' (eta_q'/eta_q) beta_pq'
///                       - rhoDt_q ((4 k_max + 4 k_hat + 1)/N) beta_pq )
///       + 1 ]
///
/// SNRs are per-symbol powers normalized by the noise power. A non-positive
/// denominator flags mis-scaled inputs and raises EstimationError.
inline EstimationStats gamma_ep(const LargeScaleState& ls, const SystemConfig& cfg,
                                const Eigen::VectorXd& rho_pil,
                                const Eigen::VectorXd& rho_dt,
                                const Eigen::VectorXd& eta_ul, int k_hat) {
    if (rho_pil.size() != ls.num_users || rho_dt.size() != ls.num_users ||
        eta_ul.size() != ls.num_users)
        throw EstimationError("per-user SNR/coefficient vectors have wrong length");
    if (rho_pil.minCoeff() < 0 || rho_dt.minCoeff() < 0)
        throw EstimationError("SNRs must be nonnegative");
    if (k_hat < 0 || k_hat > cfg.k_hat_limit())
        throw EstimationError("k_hat outside its admissible set");

    const double n = static_cast<double>(cfg.num_doppler_bins);
    const double spread = (4.0 * cfg.max_doppler_idx + 4.0 * k_hat + 1.0) / n;

    EstimationStats st = detail::make_stats(ls, CheScheme::EP);
    for (int p = 0; p < ls.num_aps; ++p) {
        for (int q = 0; q < ls.num_users; ++q) {
            double cross = 0.0;
            for (int qp = 0; qp < ls.num_users; ++qp)
                cross += rho_dt(qp) * (eta_ul(qp) / eta_ul(q)) * st.beta_sum(p, qp);
            const double bracket = cross - rho_dt(q) * spread * st.beta_sum(p, q);
            double acc = 0.0;
            for (int i = 0; i < ls.num_paths; ++i) {
                const double b = ls.beta_at(p, q, i);
                const double den =
                    rho_pil(q) * eta_ul(q) * b + (eta_ul(q) / n) * bracket + 1.0;
                if (den <= 0.0)
                    throw EstimationError(
                        "EP-CHE denominator <= 0 at link (" + std::to_string(p) + "," +
                        std::to_string(q) + ") path " + std::to_string(i) +
                        "; inputs are mis-scaled");
                const double g = rho_pil(q) * eta_ul(q) * b * b / den;
                st.gamma[st.idx(p, q, i)] = g;
                acc += g;
            }
            st.varrho(p, q) = acc;
        }
    }
    return st;
}

/// Estimation variance of the superimposed-pilot scheme:
///
///   gamma^sp_{pq,i} = rhoPil_q eta_q beta_{pq,i}^2 /
///     [ rhoPil_q eta_q beta_{pq,i} + sum_{q'!=q} rhoPil_q' eta_q' beta_pq'
///       + sum_q' rhoDt_q' eta_q' beta_pq' + 1 ]
inline EstimationStats gamma_sp(const LargeScaleState& ls, const SystemConfig& cfg,
                                const Eigen::VectorXd& rho_pil,
                                const Eigen::VectorXd& rho_dt,
                                const Eigen::VectorXd& eta_ul) {
    (void)cfg;
    if (rho_pil.size() != ls.num_users || rho_dt.size() != ls.num_users ||
        eta_ul.size() != ls.num_users)
        throw EstimationError("per-user SNR/coefficient vectors have wrong length");
    if (rho_pil.minCoeff() < 0 || rho_dt.minCoeff() < 0)
        throw EstimationError("SNRs must be nonnegative");

    EstimationStats st = detail::make_stats(ls, CheScheme::SP);
    for (int p = 0; p < ls.num_aps; ++p) {
        for (int q = 0; q < ls.num_users; ++q) {
            double pil_cross = 0.0, data_all = 0.0;
            for (int qp = 0; qp < ls.num_users; ++qp) {
                if (qp != q) pil_cross += rho_pil(qp) * eta_ul(qp) * st.beta_sum(p, qp);
                data_all += rho_dt(qp) * eta_ul(qp) * st.beta_sum(p, qp);
            }
            double acc = 0.0;
            for (int i = 0; i < ls.num_paths; ++i) {
                const double b = ls.beta_at(p, q, i);
                const double den =
                    rho_pil(q) * eta_ul(q) * b + pil_cross + data_all + 1.0;
                if (den <= 0.0)
                    throw EstimationError("SP-CHE denominator <= 0; inputs mis-scaled");
                const double g = rho_pil(q) * eta_ul(q) * b * b / den;
                st.gamma[st.idx(p, q, i)] = g;
                acc += g;
            }
            st.varrho(p, q) = acc;
        }
    }
    return st;
}

/// Coefficients of the rational-in-mu form of the SP-CHE variance,
/// gamma^sp_{pq,i}(mu_q) = mu_q a_{pq,i} / (mu_q b_{pq,i} + c_p), obtained by
/// splitting the user budget as P_pil = mu*P_max and P_dt = (1-mu)*P_max. The
/// cross-user pilot/data split cancels, which is what makes varrho_pq a
/// function of mu_q alone.
struct SpCoefficients {
    int num_aps = 0, num_users = 0, num_paths = 0;
    std::vector<double> a;        // P_max eta_q beta^2, [p][q][i]
    std::vector<double> b;        // P_max eta_q (beta_i - beta_pq) <= 0
    Eigen::VectorXd c;            // per AP: P_max sum_q' eta_q' beta_pq' + sigma_n^2
    Eigen::MatrixXd varrho_max;   // varrho_pq at mu_q = 1
    Eigen::MatrixXd beta_sum;

    std::size_t idx(int p, int q, int i) const {
        return (static_cast<std::size_t>(p) * num_users + q) * num_paths + i;
    }
};

inline SpCoefficients sp_coefficients(const LargeScaleState& ls, const SystemConfig& cfg) {
    SpCoefficients co;
    co.num_aps = ls.num_aps;
    co.num_users = ls.num_users;
    co.num_paths = ls.num_paths;
    co.a.resize(ls.beta.size());
    co.b.resize(ls.beta.size());
    co.c.resize(ls.num_aps);
    co.varrho_max = Eigen::MatrixXd::Zero(ls.num_aps, ls.num_users);
    co.beta_sum = ls.beta_sum();

    const double pm = cfg.p_max_w;
    for (int p = 0; p < ls.num_aps; ++p) {
        double cp = cfg.noise_power_w;
        for (int qp = 0; qp < ls.num_users; ++qp)
            cp += pm * cfg.eta_ul_of(qp) * co.beta_sum(p, qp);
        co.c(p) = cp;
        for (int q = 0; q < ls.num_users; ++q) {
            const double eta = cfg.eta_ul_of(q);
            double vmax = 0.0;
            for (int i = 0; i < ls.num_paths; ++i) {
                const double beta = ls.beta_at(p, q, i);
                const std::size_t n = co.idx(p, q, i);
                co.a[n] = pm * eta * beta * beta;
                co.b[n] = pm * eta * (beta - co.beta_sum(p, q));
                vmax += co.a[n] / (co.b[n] + cp);
            }
            co.varrho_max(p, q) = vmax;
        }
    }
    return co;
}

/// varrho_pq(mu_q) = sum_i mu_q a_i / (mu_q b_i + c_p); strictly increasing
/// in mu_q. mu entries must lie strictly inside (0, 1).
inline Eigen::MatrixXd varrho_of_mu(const SpCoefficients& co, const Eigen::VectorXd& mu) {
    if (mu.size() != co.num_users)
        throw std::invalid_argument("mu must have one entry per user");
    for (int q = 0; q < co.num_users; ++q)
        if (!(mu(q) > 0.0 && mu(q) < 1.0))
            throw std::domain_error("mu_" + std::to_string(q) + " outside (0, 1)");

    Eigen::MatrixXd v(co.num_aps, co.num_users);
    for (int p = 0; p < co.num_aps; ++p)
        for (int q = 0; q < co.num_users; ++q) {
            double acc = 0.0;
            for (int i = 0; i < co.num_paths; ++i) {
                const std::size_t n = co.idx(p, q, i);
                acc += mu(q) * co.a[n] / (mu(q) * co.b[n] + co.c(p));
            }
            v(p, q) = acc;
        }
    return v;
}

struct MuFit {
    double mu = 0.5;
    double residual = 0.0;  // sum_p (varrho_pq(mu) - target_p)^2 at the fit
};

/// Recovers a physical per-user pilot fraction from a relaxed per-(p,q)
/// varrho column: the mu_q in [1e-4, 1-1e-4] minimizing the squared mismatch
/// sum_p (varrho_pq(mu) - target_p)^2, found via a coarse scan plus
/// golden-section refinement.
inline MuFit mu_of_varrho(const SpCoefficients& co, int q, const Eigen::VectorXd& target) {
    if (target.size() != co.num_aps || co.num_aps == 0)
        throw std::invalid_argument("target must have one entry per AP");

    auto objective = [&](double mu) {
        double obj = 0.0;
        for (int p = 0; p < co.num_aps; ++p) {
            double v = 0.0;
            for (int i = 0; i < co.num_paths; ++i) {
                const std::size_t n = co.idx(p, q, i);
                v += mu * co.a[n] / (mu * co.b[n] + co.c(p));
            }
            const double r = v - target(p);
            obj += r * r;
        }
        return obj;
    };

    constexpr double kLo = 1e-4, kHi = 1.0 - 1e-4;
    constexpr int kScan = 128;

    // bracket the minimum on a coarse grid first; the objective is unimodal
    // for exact-fit targets but the scan keeps the search honest otherwise
    int best = 0;
    double best_val = objective(kLo);
    for (int s = 1; s <= kScan; ++s) {
        const double mu = kLo + (kHi - kLo) * s / kScan;
        const double val = objective(mu);
        if (val < best_val) {
            best_val = val;
            best = s;
        }
    }
    double lo = kLo + (kHi - kLo) * std::max(0, best - 1) / kScan;
    double hi = kLo + (kHi - kLo) * std::min(kScan, best + 1) / kScan;

    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - gr * (hi - lo);
    double x2 = lo + gr * (hi - lo);
    double f1 = objective(x1);
    double f2 = objective(x2);
    while (hi - lo > 1e-10) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = objective(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = objective(x2);
        }
    }
    MuFit fit;
    fit.mu = 0.5 * (lo + hi);
    fit.residual = objective(fit.mu);
    return fit;
}

/// Guard overhead of the EP-CHE scheme and the user count it can support:
/// N_guard = (2 l_max + 1)(4 k_max + 4 k_hat + 1), K_u^max = floor(MN/N_guard).
struct GuardBudget {
    long n_guard = 0;
    long ku_max = 0;  // zero when N_guard exceeds the whole grid
};

inline GuardBudget guard_budget(int ell_max, int k_max, int k_hat, int m, int n) {
    if (ell_max < 0 || k_max < 0 || k_hat < 0 || m < 1 || n < 1)
        throw std::invalid_argument("guard_budget: invalid indices");
    GuardBudget g;
    g.n_guard = static_cast<long>(2 * ell_max + 1) * (4 * k_max + 4 * k_hat + 1);
    g.ku_max = static_cast<long>(m) * n / g.n_guard;
    return g;
}

inline GuardBudget guard_budget(const SystemConfig& cfg) {
    return guard_budget(cfg.ell_max(), cfg.max_doppler_idx, cfg.guard_doppler_extra,
                        cfg.num_subcarriers, cfg.num_doppler_bins);
}

/// SP-CHE stats at a given pilot fraction vector, via the uplink powers
/// P_pil = mu P_max and P_dt = (1-mu) P_max.
inline EstimationStats sp_stats_at_mu(const LargeScaleState& ls, const SystemConfig& cfg,
                                      const Eigen::VectorXd& mu) {
    Eigen::VectorXd rho_pil(ls.num_users), rho_dt(ls.num_users), eta(ls.num_users);
    for (int q = 0; q < ls.num_users; ++q) {
        rho_pil(q) = mu(q) * cfg.p_max_w / cfg.noise_power_w;
        rho_dt(q) = (1.0 - mu(q)) * cfg.p_max_w / cfg.noise_power_w;
        eta(q) = cfg.eta_ul_of(q);
    }
    return gamma_sp(ls, cfg, rho_pil, rho_dt, eta);
}

/// EP-CHE stats with the configured per-symbol pilot/data powers.
inline EstimationStats ep_stats(const LargeScaleState& ls, const SystemConfig& cfg) {
    Eigen::VectorXd rho_pil(ls.num_users), rho_dt(ls.num_users), eta(ls.num_users);
    for (int q = 0; q < ls.num_users; ++q) {
        rho_pil(q) = cfg.ep_pilot_power_w / cfg.noise_power_w;
        rho_dt(q) = cfg.ep_data_power_w / cfg.noise_power_w;
        eta(q) = cfg.eta_ul_of(q);
    }
    return gamma_ep(ls, cfg, rho_pil, rho_dt, eta, cfg.guard_doppler_extra);
}

}  // namespace cfotfs
