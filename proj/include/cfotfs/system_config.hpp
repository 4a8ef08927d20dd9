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
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace cfotfs {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// All frame, network, channel, power and solver parameters of one scenario.
///
/// Defaults describe a desk-scale drop: a 1 km^2 wrapped-around service area,
/// 4 GHz carrier, 15 kHz subcarrier spacing, EVA multipath with 300 km/h
/// worth of Doppler (k_max = 9), -108 dBm noise and 1 W power budgets at both
/// the APs and the users.
struct SystemConfig {
    // ----- OTFS frame ------------------------------------------------------
    int num_subcarriers = 32;         // M
    int num_doppler_bins = 64;        // N, per uplink/downlink half-frame
    double subcarrier_spacing_hz = 15e3;
    double carrier_freq_hz = 4e9;

    // ----- network geometry ------------------------------------------------
    int num_aps = 30;                 // M_a
    int num_users = 8;                // K_u
    double area_side_km = 1.0;
    bool wrap_around = true;

    // ----- delay-Doppler channel -------------------------------------------
    int paths_per_link = 9;           // L
    int max_doppler_idx = 9;          // k_max
    double max_delay_s = 2.5e-6;      // tau_max
    // 3GPP extended vehicular A power-delay profile.
    std::vector<double> pdp_delays_ns = {0.0,   30.0,   150.0, 310.0, 370.0,
                                         710.0, 1090.0, 1730.0, 2510.0};
    std::vector<double> pdp_powers_db = {0.0,  -1.5, -1.4,  -3.6, -0.6,
                                         -9.1, -7.0, -12.0, -16.9};

    // ----- shadowing --------------------------------------------------------
    double sigma_sh_db = 8.0;
    double shadow_split = 0.5;        // delta in z = sqrt(d)*a_p + sqrt(1-d)*b_q
    double decorr_km = 0.1;
    bool uncorrelated_shadowing = false;

    // ----- three-slope path loss -------------------------------------------
    double pl_d0_km = 0.01;
    double pl_d1_km = 0.05;
    double ap_height_m = 15.0;
    double user_height_m = 1.65;

    // ----- powers -----------------------------------------------------------
    double noise_power_w = 1.58489319246111e-14;  // sigma_n^2, -108 dBm
    double p_ap_w = 1.0;              // per-AP downlink budget
    double p_max_w = 1.0;             // per-user uplink budget
    std::vector<double> eta_ul;       // per-user uplink coefficients, empty = all 1
    double ep_pilot_power_w = 1.0;    // per pilot symbol under EP-CHE
    double ep_data_power_w = 1.0;     // per data symbol under EP-CHE
    int guard_doppler_extra = 0;      // k_hat

    // ----- solvers -----------------------------------------------------------
    double eps_bisection = 1e-3;      // on the SINR bracket width
    double eps_sca = 1e-4;
    double eps_alternation = 1e-3;
    int max_solver_iterations = 30;   // N_I
    int oracle_cap = 256;             // largest MN the dense oracle will build

    std::optional<double> rho_d_override;

    // ----- derived -----------------------------------------------------------
    int total_symbols() const { return 2 * num_doppler_bins; }  // N_T
    double omega_dl() const {
        return 1.0 - static_cast<double>(num_doppler_bins) / total_symbols();
    }
    double rho_d() const {
        return rho_d_override ? *rho_d_override : p_ap_w / noise_power_w;
    }
    int ell_max() const {
        return static_cast<int>(std::lround(max_delay_s * num_subcarriers *
                                            subcarrier_spacing_hz));
    }
    int k_hat_limit() const {
        const int num = num_doppler_bins - 4 * max_doppler_idx - 1;
        return num < 0 ? -1 : num / 4;
    }
    double eta_ul_of(int q) const {
        return eta_ul.empty() ? 1.0 : eta_ul.at(static_cast<std::size_t>(q));
    }

    void validate() const;

    static SystemConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

inline void SystemConfig::validate() const {
    auto fail = [](const std::string& msg) { throw ConfigError("config: " + msg); };

    if (num_subcarriers < 1) fail("num_subcarriers must be >= 1");
    if (num_doppler_bins < 1) fail("num_doppler_bins must be >= 1");
    if (subcarrier_spacing_hz <= 0) fail("subcarrier_spacing_hz must be > 0");
    if (carrier_freq_hz <= 0) fail("carrier_freq_hz must be > 0");
    if (num_aps < 1 || num_users < 1) fail("need at least one AP and one user");
    if (area_side_km <= 0) fail("area_side_km must be > 0");
    if (paths_per_link < 1) fail("paths_per_link must be >= 1");
    if (pdp_delays_ns.size() != pdp_powers_db.size())
        fail("pdp_delays_ns and pdp_powers_db must have equal length");
    if (static_cast<int>(pdp_delays_ns.size()) != paths_per_link)
        fail("paths_per_link does not match the power-delay profile length");
    for (double d : pdp_delays_ns)
        if (d < 0 || d * 1e-9 > max_delay_s)
            fail("power-delay profile exceeds max_delay_s");
    if (max_delay_s < 0) fail("max_delay_s must be >= 0");
    if (max_doppler_idx < 0) fail("max_doppler_idx must be >= 0");
    if (max_doppler_idx > num_doppler_bins - 1)
        fail("max_doppler_idx must be <= num_doppler_bins - 1");
    if (ell_max() < 0 || ell_max() > num_subcarriers - 1)
        fail("round(max_delay_s * M * delta_f) must land in [0, M-1]");
    if (guard_doppler_extra < 0) fail("guard_doppler_extra must be >= 0");
    if (guard_doppler_extra > k_hat_limit())
        fail("guard_doppler_extra exceeds floor((N - 4*k_max - 1)/4)");
    if (sigma_sh_db < 0) fail("sigma_sh_db must be >= 0");
    if (shadow_split < 0 || shadow_split > 1) fail("shadow_split must be in [0,1]");
    if (decorr_km <= 0) fail("decorr_km must be > 0");
    if (pl_d0_km <= 0 || pl_d1_km <= pl_d0_km)
        fail("path-loss breakpoints need 0 < d0 < d1");
    if (noise_power_w <= 0 || p_ap_w <= 0 || p_max_w <= 0)
        fail("powers must be > 0");
    if (ep_pilot_power_w <= 0 || ep_data_power_w < 0)
        fail("EP-CHE symbol powers must be positive");
    if (!eta_ul.empty()) {
        if (static_cast<int>(eta_ul.size()) != num_users)
            fail("eta_ul must have one entry per user");
        for (double e : eta_ul)
            if (e <= 0 || e > 1) fail("eta_ul entries must lie in (0, 1]");
    }
    if (eps_bisection <= 0 || eps_sca <= 0 || eps_alternation <= 0)
        fail("solver tolerances must be > 0");
    if (max_solver_iterations < 1) fail("max_solver_iterations must be >= 1");
    if (oracle_cap < 1) fail("oracle_cap must be >= 1");
    if (rho_d_override && *rho_d_override <= 0) fail("rho_d must be > 0");
}

namespace detail {

template <typename T>
void get_to_if(const nlohmann::json& j, const char* key, T& out) {
    if (auto it = j.find(key); it != j.end()) it->get_to(out);
}

inline void reject_unknown_keys(const nlohmann::json& j,
                                const std::vector<std::string>& allowed,
                                const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const auto& k : allowed)
            if (it.key() == k) { known = true; break; }
        if (!known)
            throw ConfigError("unknown key \"" + it.key() + "\" in " + where);
    }
}

}  // namespace detail

inline SystemConfig SystemConfig::from_json(const nlohmann::json& j) {
    static const std::vector<std::string> allowed = {
        "num_subcarriers", "num_doppler_bins", "subcarrier_spacing_hz",
        "carrier_freq_hz", "num_aps", "num_users", "area_side_km",
        "wrap_around", "paths_per_link", "max_doppler_idx", "max_delay_s",
        "pdp_delays_ns", "pdp_powers_db", "sigma_sh_db", "shadow_split",
        "decorr_km", "uncorrelated_shadowing", "pl_d0_km", "pl_d1_km",
        "ap_height_m", "user_height_m", "noise_power_w", "p_ap_w", "p_max_w",
        "eta_ul", "ep_pilot_power_w", "ep_data_power_w", "guard_doppler_extra",
        "eps_bisection", "eps_sca", "eps_alternation", "max_solver_iterations",
        "oracle_cap", "rho_d"};
    if (!j.is_object()) throw ConfigError("system config must be a JSON object");
    detail::reject_unknown_keys(j, allowed, "system config");

    SystemConfig cfg;
    try {
        detail::get_to_if(j, "num_subcarriers", cfg.num_subcarriers);
        detail::get_to_if(j, "num_doppler_bins", cfg.num_doppler_bins);
        detail::get_to_if(j, "subcarrier_spacing_hz", cfg.subcarrier_spacing_hz);
        detail::get_to_if(j, "carrier_freq_hz", cfg.carrier_freq_hz);
        detail::get_to_if(j, "num_aps", cfg.num_aps);
        detail::get_to_if(j, "num_users", cfg.num_users);
        detail::get_to_if(j, "area_side_km", cfg.area_side_km);
        detail::get_to_if(j, "wrap_around", cfg.wrap_around);
        detail::get_to_if(j, "paths_per_link", cfg.paths_per_link);
        detail::get_to_if(j, "max_doppler_idx", cfg.max_doppler_idx);
        detail::get_to_if(j, "max_delay_s", cfg.max_delay_s);
        detail::get_to_if(j, "pdp_delays_ns", cfg.pdp_delays_ns);
        detail::get_to_if(j, "pdp_powers_db", cfg.pdp_powers_db);
        detail::get_to_if(j, "sigma_sh_db", cfg.sigma_sh_db);
        detail::get_to_if(j, "shadow_split", cfg.shadow_split);
        detail::get_to_if(j, "decorr_km", cfg.decorr_km);
        detail::get_to_if(j, "uncorrelated_shadowing", cfg.uncorrelated_shadowing);
        detail::get_to_if(j, "pl_d0_km", cfg.pl_d0_km);
        detail::get_to_if(j, "pl_d1_km", cfg.pl_d1_km);
        detail::get_to_if(j, "ap_height_m", cfg.ap_height_m);
        detail::get_to_if(j, "user_height_m", cfg.user_height_m);
        detail::get_to_if(j, "noise_power_w", cfg.noise_power_w);
        detail::get_to_if(j, "p_ap_w", cfg.p_ap_w);
        detail::get_to_if(j, "p_max_w", cfg.p_max_w);
        detail::get_to_if(j, "eta_ul", cfg.eta_ul);
        detail::get_to_if(j, "ep_pilot_power_w", cfg.ep_pilot_power_w);
        detail::get_to_if(j, "ep_data_power_w", cfg.ep_data_power_w);
        detail::get_to_if(j, "guard_doppler_extra", cfg.guard_doppler_extra);
        detail::get_to_if(j, "eps_bisection", cfg.eps_bisection);
        detail::get_to_if(j, "eps_sca", cfg.eps_sca);
        detail::get_to_if(j, "eps_alternation", cfg.eps_alternation);
        detail::get_to_if(j, "max_solver_iterations", cfg.max_solver_iterations);
        detail::get_to_if(j, "oracle_cap", cfg.oracle_cap);
        if (j.contains("rho_d")) cfg.rho_d_override = j.at("rho_d").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed system config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

inline nlohmann::json SystemConfig::to_json() const {
    nlohmann::json j{
        {"num_subcarriers", num_subcarriers},
        {"num_doppler_bins", num_doppler_bins},
        {"subcarrier_spacing_hz", subcarrier_spacing_hz},
        {"carrier_freq_hz", carrier_freq_hz},
        {"num_aps", num_aps},
        {"num_users", num_users},
        {"area_side_km", area_side_km},
        {"wrap_around", wrap_around},
        {"paths_per_link", paths_per_link},
        {"max_doppler_idx", max_doppler_idx},
        {"max_delay_s", max_delay_s},
        {"pdp_delays_ns", pdp_delays_ns},
        {"pdp_powers_db", pdp_powers_db},
        {"sigma_sh_db", sigma_sh_db},
        {"shadow_split", shadow_split},
        {"decorr_km", decorr_km},
        {"uncorrelated_shadowing", uncorrelated_shadowing},
        {"pl_d0_km", pl_d0_km},
        {"pl_d1_km", pl_d1_km},
        {"ap_height_m", ap_height_m},
        {"user_height_m", user_height_m},
        {"noise_power_w", noise_power_w},
        {"p_ap_w", p_ap_w},
        {"p_max_w", p_max_w},
        {"eta_ul", eta_ul},
        {"ep_pilot_power_w", ep_pilot_power_w},
        {"ep_data_power_w", ep_data_power_w},
        {"guard_doppler_extra", guard_doppler_extra},
        {"eps_bisection", eps_bisection},
        {"eps_sca", eps_sca},
        {"eps_alternation", eps_alternation},
        {"max_solver_iterations", max_solver_iterations},
        {"oracle_cap", oracle_cap}};
    if (rho_d_override) j["rho_d"] = *rho_d_override;
    return j;
}

}  // namespace cfotfs
