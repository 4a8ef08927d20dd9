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
#include <vector>

#include "cfotfs/rng.hpp"
#include "cfotfs/system_config.hpp"

namespace cfotfs {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

/// AP and user drop positions, in km, inside [0, area_side]^2.
struct Topology {
    double area_side_km = 1.0;
    bool wrap = true;
    std::vector<Vec2> ap_pos;
    std::vector<Vec2> user_pos;
};

/// Distance with wrap-around: the square is treated as a torus, so the
/// reported distance is the minimum over the nine periodic images.
inline double torus_distance(const Vec2& a, const Vec2& b, double side, bool wrap) {
    double dx = std::abs(a.x - b.x);
    double dy = std::abs(a.y - b.y);
    if (wrap) {
        dx = std::min(dx, side - dx);
        dy = std::min(dy, side - dy);
    }
    return std::hypot(dx, dy);
}

inline double ap_user_distance(const Topology& topo, int p, int q) {
    return torus_distance(topo.ap_pos[static_cast<std::size_t>(p)],
                          topo.user_pos[static_cast<std::size_t>(q)],
                          topo.area_side_km, topo.wrap);
}

/// Uniform i.i.d. drop of all APs, then all users. Deterministic per seed.
inline Topology generate_topology(const SystemConfig& cfg, std::uint64_t seed) {
    Rng rng(seed);
    Topology topo;
    topo.area_side_km = cfg.area_side_km;
    topo.wrap = cfg.wrap_around;
    topo.ap_pos.resize(static_cast<std::size_t>(cfg.num_aps));
    topo.user_pos.resize(static_cast<std::size_t>(cfg.num_users));
    for (auto& p : topo.ap_pos)
        p = {rng.uniform(0.0, cfg.area_side_km), rng.uniform(0.0, cfg.area_side_km)};
    for (auto& u : topo.user_pos)
        u = {rng.uniform(0.0, cfg.area_side_km), rng.uniform(0.0, cfg.area_side_km)};
    return topo;
}

}  // namespace cfotfs
