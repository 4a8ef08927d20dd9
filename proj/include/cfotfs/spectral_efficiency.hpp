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

#include <Eigen/Dense>

#include "cfotfs/channel_estimation.hpp"

namespace cfotfs {

/// Inputs of the closed-form downlink SINR/SE: the AP power-control matrix,
/// the per-link aggregates of the active estimation scheme, the normalized
/// downlink SNR and the duplexing pre-log factor.
struct SinrInputs {
    Eigen::MatrixXd eta;       // M_a x K_u, eta_pq >= 0
    Eigen::MatrixXd varrho;    // sum_i gamma_{pq,i}
    Eigen::MatrixXd beta_sum;  // sum_i beta_{pq,i}
    double rho_d = 1.0;
    double omega_dl = 0.5;

    static SinrInputs from_stats(Eigen::MatrixXd eta_in, const EstimationStats& st,
                                 double rho_d, double omega_dl) {
        SinrInputs in;
        in.eta = std::move(eta_in);
        in.varrho = st.varrho;
        in.beta_sum = st.beta_sum;
        in.rho_d = rho_d;
        in.omega_dl = omega_dl;
        return in;
    }

    /// Per-AP power constraint sum_q eta_pq varrho_pq <= 1, with a 1e-9 slack.
    void check_power_constraint() const {
        for (Eigen::Index p = 0; p < eta.rows(); ++p) {
            const double used = (eta.row(p).array() * varrho.row(p).array()).sum();
            if (used > 1.0 + 1e-9)
                throw std::invalid_argument(
                    "per-AP power constraint violated at AP " + std::to_string(p) +
                    " (usage " + std::to_string(used) + "); optimizer bug guard");
        }
        if ((eta.array() < 0.0).any())
            throw std::invalid_argument("eta must be elementwise nonnegative");
    }
};

/// Closed-form downlink SINR of user q:
///
///   rho_d (sum_p sqrt(eta_pq) varrho_pq)^2
///   --------------------------------------------------
///   rho_d sum_p beta_pq sum_q' eta_pq' varrho_pq' + 1
inline double sinr_dl(const SinrInputs& in, int q) {
    in.check_power_constraint();
    const auto ma = in.eta.rows();
    double num = 0.0;
    double interf = 0.0;
    for (Eigen::Index p = 0; p < ma; ++p) {
        num += std::sqrt(in.eta(p, q)) * in.varrho(p, q);
        const double load = (in.eta.row(p).array() * in.varrho.row(p).array()).sum();
        interf += in.beta_sum(p, q) * load;
    }
    return in.rho_d * num * num / (in.rho_d * interf + 1.0);
}

/// SE_q = omega_dl * log2(1 + SINR_q), bits/s/Hz.
inline double se_dl(const SinrInputs& in, int q) {
    return in.omega_dl * std::log2(1.0 + sinr_dl(in, q));
}

inline Eigen::VectorXd all_sinr_dl(const SinrInputs& in) {
    Eigen::VectorXd s(in.eta.cols());
    for (Eigen::Index q = 0; q < in.eta.cols(); ++q) s(q) = sinr_dl(in, static_cast<int>(q));
    return s;
}

inline Eigen::VectorXd all_se_dl(const SinrInputs& in) {
    Eigen::VectorXd s = all_sinr_dl(in);
    for (Eigen::Index q = 0; q < s.size(); ++q)
        s(q) = in.omega_dl * std::log2(1.0 + s(q));
    return s;
}

inline double min_sinr_dl(const SinrInputs& in) { return all_sinr_dl(in).minCoeff(); }

}  // namespace cfotfs
