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
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "cfotfs/propagation.hpp"
#include "cfotfs/rng.hpp"
#include "cfotfs/system_config.hpp"
#include "cfotfs/topology.hpp"

namespace cfotfs {

/// Large-scale fading and delay-Doppler tap structure of every AP-user link.
///
/// Per (AP p, user q, path i): linear power gain beta, integer delay bin,
/// integer Doppler bin in [-k_max, k_max] and the fractional Doppler residue.
struct LargeScaleState {
    int num_aps = 0;
    int num_users = 0;
    int num_paths = 0;
    int ell_max = 0;
    int k_max = 0;

    std::vector<double> beta;        // [p][q][i], row-major
    std::vector<int> delay_idx;      // ell_{pq,i}
    std::vector<int> doppler_idx;    // k_{pq,i}
    std::vector<double> doppler_frac;  // kappa_{pq,i}

    std::size_t idx(int p, int q, int i) const {
        return (static_cast<std::size_t>(p) * num_users + q) * num_paths + i;
    }
    double beta_at(int p, int q, int i) const { return beta[idx(p, q, i)]; }
    int delay_at(int p, int q, int i) const { return delay_idx[idx(p, q, i)]; }
    int doppler_at(int p, int q, int i) const { return doppler_idx[idx(p, q, i)]; }
    double frac_at(int p, int q, int i) const { return doppler_frac[idx(p, q, i)]; }

    /// beta_pq = sum_i beta_{pq,i}
    Eigen::MatrixXd beta_sum() const {
        Eigen::MatrixXd s(num_aps, num_users);
        for (int p = 0; p < num_aps; ++p)
            for (int q = 0; q < num_users; ++q) {
                double acc = 0.0;
                for (int i = 0; i < num_paths; ++i) acc += beta_at(p, q, i);
                s(p, q) = acc;
            }
        return s;
    }
};

/// beta_{pq,i} = PL(d_pq) * 10^(sigma_sh*z_pq/10) * rho_i with rho the
/// unit-sum power-delay profile. Delay bins come from the profile delays
/// mapped onto the grid; Doppler is Jakes-style, k + kappa = k_max*cos(theta)
/// with theta uniform on [0, 2*pi).
inline LargeScaleState generate_large_scale(const Topology& topo,
                                            const Eigen::MatrixXd& shadow_z,
                                            const SystemConfig& cfg,
                                            std::uint64_t seed) {
    const int ma = cfg.num_aps;
    const int ku = cfg.num_users;
    const int lp = cfg.paths_per_link;
    if (static_cast<int>(cfg.pdp_delays_ns.size()) != lp)
        throw ConfigError("paths_per_link does not match the power-delay profile");
    if (shadow_z.rows() != ma || shadow_z.cols() != ku)
        throw ConfigError("shadowing matrix does not match the topology");

    // Normalized per-path weights and grid delay bins (shared by all links).
    std::vector<double> rho(static_cast<std::size_t>(lp));
    double rho_sum = 0.0;
    for (int i = 0; i < lp; ++i) {
        rho[static_cast<std::size_t>(i)] =
            std::pow(10.0, cfg.pdp_powers_db[static_cast<std::size_t>(i)] / 10.0);
        rho_sum += rho[static_cast<std::size_t>(i)];
    }
    for (double& r : rho) r /= rho_sum;

    std::vector<int> bins(static_cast<std::size_t>(lp));
    for (int i = 0; i < lp; ++i) {
        const double tau = cfg.pdp_delays_ns[static_cast<std::size_t>(i)] * 1e-9;
        long bin = std::lround(tau * cfg.num_subcarriers * cfg.subcarrier_spacing_hz);
        bin = std::min<long>(std::max<long>(bin, 0), cfg.num_subcarriers - 1);
        bins[static_cast<std::size_t>(i)] = static_cast<int>(bin);
    }

    Rng rng(seed);
    LargeScaleState ls;
    ls.num_aps = ma;
    ls.num_users = ku;
    ls.num_paths = lp;
    ls.ell_max = cfg.ell_max();
    ls.k_max = cfg.max_doppler_idx;
    const std::size_t total = static_cast<std::size_t>(ma) * ku * lp;
    ls.beta.resize(total);
    ls.delay_idx.resize(total);
    ls.doppler_idx.resize(total);
    ls.doppler_frac.resize(total);

    for (int p = 0; p < ma; ++p) {
        for (int q = 0; q < ku; ++q) {
            const double d = ap_user_distance(topo, p, q);
            const double gain_db = path_loss_db(d, cfg) + cfg.sigma_sh_db * shadow_z(p, q);
            const double gain = std::pow(10.0, gain_db / 10.0);
            for (int i = 0; i < lp; ++i) {
                const std::size_t n = ls.idx(p, q, i);
                ls.beta[n] = gain * rho[static_cast<std::size_t>(i)];
                ls.delay_idx[n] = bins[static_cast<std::size_t>(i)];
                const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
                const double nu = cfg.max_doppler_idx * std::cos(theta);
                // integer part with the fraction confined to (-0.5, 0.5]
                const int k = static_cast<int>(std::ceil(nu - 0.5));
                ls.doppler_idx[n] = k;
                ls.doppler_frac[n] = nu - k;
            }
        }
    }
    return ls;
}

/// One fully generated drop: topology, shadowing field and large-scale state,
/// each on its own sub-stream of `seed`.
struct Drop {
    Topology topology;
    Eigen::MatrixXd shadow_z;
    LargeScaleState large_scale;
};

inline Drop make_drop(const SystemConfig& cfg, std::uint64_t seed) {
    Drop drop;
    drop.topology = generate_topology(cfg, derive_seed(seed, 1));
    drop.shadow_z = correlated_shadowing(drop.topology, cfg, derive_seed(seed, 2));
    drop.large_scale =
        generate_large_scale(drop.topology, drop.shadow_z, cfg, derive_seed(seed, 3));
    return drop;
}

}  // namespace cfotfs
