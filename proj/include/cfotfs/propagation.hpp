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
#include <cstdint>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "cfotfs/rng.hpp"
#include "cfotfs/system_config.hpp"
#include "cfotfs/topology.hpp"

namespace cfotfs {

struct ShadowingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// COST231-Hata fixed part of the three-slope path loss, in dB, for
/// distances expressed in km.
inline double hata_cost231_reference_db(double f_hz, double h_ap_m, double h_user_m) {
    const double lf = std::log10(f_hz / 1e6);  // frequency in MHz
    return 46.3 + 33.9 * lf - 13.82 * std::log10(h_ap_m) -
           (1.1 * lf - 0.7) * h_user_m + (1.56 * lf - 0.8);
}

/// Three-slope path loss: flat below d0, -20 dB/decade between d0 and d1 and
/// -35 dB/decade beyond d1, continuous at both breakpoints. Returns the gain
/// in dB (a negative number); distance in km.
inline double path_loss_db(double d_km, const SystemConfig& cfg) {
    const double L =
        hata_cost231_reference_db(cfg.carrier_freq_hz, cfg.ap_height_m, cfg.user_height_m);
    const double d0 = cfg.pl_d0_km;
    const double d1 = cfg.pl_d1_km;
    if (d_km > d1) return -L - 35.0 * std::log10(d_km);
    if (d_km > d0) return -L - 15.0 * std::log10(d1) - 20.0 * std::log10(d_km);
    return -L - 15.0 * std::log10(d1) - 20.0 * std::log10(d0);
}

namespace detail {

// Exponential spatial correlation, E{a_i a_j} = 2^(-d_ij / d_decorr), with a
// tiny diagonal jitter so the Cholesky factorization does not fall over on
// coincident positions.
inline Eigen::MatrixXd shadow_cholesky(const std::vector<Vec2>& pos, double side,
                                       bool wrap, double decorr_km) {
    const auto n = static_cast<Eigen::Index>(pos.size());
    Eigen::MatrixXd corr(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double d = torus_distance(pos[static_cast<std::size_t>(i)],
                                            pos[static_cast<std::size_t>(j)], side, wrap);
            const double c = std::exp2(-d / decorr_km);
            corr(i, j) = c;
            corr(j, i) = c;
        }
        corr(i, i) += 1e-12;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(corr);
    if (llt.info() != Eigen::Success)
        throw ShadowingError(
            "shadowing correlation matrix is not positive definite even after "
            "1e-12 diagonal jitter; check for duplicated positions or a "
            "degenerate decorrelation distance");
    return llt.matrixL();
}

}  // namespace detail

/// Unit-variance shadowing field z_pq per AP-user link.
///
/// Links farther than the path-loss breakpoint d1 see the two-component
/// correlated model z = sqrt(delta)*a_p + sqrt(1-delta)*b_q, where a and b
/// are Gaussian fields with exponential spatial correlation over the AP and
/// user positions. Closer links, and every link when
/// `uncorrelated_shadowing` is set, get i.i.d. standard normals.
///
/// Multiply by sigma_sh_db to obtain the shadowing term in dB.
inline Eigen::MatrixXd correlated_shadowing(const Topology& topo,
                                            const SystemConfig& cfg,
                                            std::uint64_t seed) {
    Rng rng(seed);
    const int ma = static_cast<int>(topo.ap_pos.size());
    const int ku = static_cast<int>(topo.user_pos.size());
    Eigen::MatrixXd z(ma, ku);

    if (cfg.uncorrelated_shadowing) {
        for (int p = 0; p < ma; ++p)
            for (int q = 0; q < ku; ++q) z(p, q) = rng.normal();
        return z;
    }

    const Eigen::MatrixXd la = detail::shadow_cholesky(topo.ap_pos, topo.area_side_km,
                                                       topo.wrap, cfg.decorr_km);
    const Eigen::MatrixXd lb = detail::shadow_cholesky(topo.user_pos, topo.area_side_km,
                                                       topo.wrap, cfg.decorr_km);
    Eigen::VectorXd ga(ma), gb(ku);
    for (int p = 0; p < ma; ++p) ga(p) = rng.normal();
    for (int q = 0; q < ku; ++q) gb(q) = rng.normal();
    const Eigen::VectorXd a = la * ga;
    const Eigen::VectorXd b = lb * gb;

    const double wa = std::sqrt(cfg.shadow_split);
    const double wb = std::sqrt(1.0 - cfg.shadow_split);
    for (int p = 0; p < ma; ++p) {
        for (int q = 0; q < ku; ++q) {
            if (ap_user_distance(topo, p, q) > cfg.pl_d1_km)
                z(p, q) = wa * a(p) + wb * b(q);
            else
                z(p, q) = rng.normal();
        }
    }
    return z;
}

}  // namespace cfotfs
