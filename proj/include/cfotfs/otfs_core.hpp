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
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "cfotfs/large_scale.hpp"
#include "cfotfs/rng.hpp"

namespace cfotfs {

using cxd = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

struct OracleCapError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Delay-Doppler grid: element (l, k) is the symbol at delay bin l and
/// Doppler bin k. Vectorization is fixed to r = k*M + l, i.e. column-major
/// flattening of `data`.
struct DDGrid {
    int delay_bins = 0;    // M
    int doppler_bins = 0;  // N
    CMatrix data;          // M x N

    DDGrid() = default;
    DDGrid(int m, int n) : delay_bins(m), doppler_bins(n), data(CMatrix::Zero(m, n)) {}

    CVector vectorized() const {
        return Eigen::Map<const CVector>(data.data(), data.size());
    }
    static DDGrid from_vector(const CVector& v, int m, int n) {
        DDGrid g(m, n);
        g.data = Eigen::Map<const CMatrix>(v.data(), m, n);
        return g;
    }
};

namespace detail {

// Unnormalized DFT-style matrix W(a,b) = exp(sign * j*2*pi*a*b / n).
inline CMatrix twiddle_matrix(int n, double sign) {
    CMatrix w(n, n);
    const double base = sign * 2.0 * std::numbers::pi / n;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) w(a, b) = std::polar(1.0, base * a * b);
    return w;
}

}  // namespace detail

/// ISFFT: X[n,m] = (1/sqrt(MN)) sum_{k,l} x[k,l] exp(j2pi(nk/N - ml/M)).
/// Input is the M x N delay-Doppler grid, output the N x M time-frequency grid.
inline CMatrix isfft(const DDGrid& x) {
    const int m = x.delay_bins;
    const int n = x.doppler_bins;
    const CMatrix wn = detail::twiddle_matrix(n, +1.0);  // over Doppler
    const CMatrix wm = detail::twiddle_matrix(m, -1.0);  // over delay
    return (wn * x.data.transpose() * wm) / std::sqrt(static_cast<double>(m) * n);
}

/// SFFT, the inverse map: x[k,l] = (1/sqrt(MN)) sum_{n,m} Y[n,m]
/// exp(-j2pi(nk/N - ml/M)). Input N x M time-frequency grid.
inline DDGrid sfft(const CMatrix& y) {
    const int n = static_cast<int>(y.rows());
    const int m = static_cast<int>(y.cols());
    const CMatrix wn = detail::twiddle_matrix(n, -1.0);
    const CMatrix wm = detail::twiddle_matrix(m, +1.0);
    DDGrid g(m, n);
    g.data = (wn * y * wm).transpose() / std::sqrt(static_cast<double>(m) * n);
    return g;
}

namespace detail {

// F_N (x) I_M with F_N the unitary DFT matrix.
inline CMatrix kron_dft_identity(int n, int m, bool adjoint) {
    const double sign = adjoint ? +1.0 : -1.0;
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    const int mn = m * n;
    CMatrix k = CMatrix::Zero(mn, mn);
    for (int a = 0; a < n; ++a)
        for (int c = 0; c < n; ++c) {
            const cxd f = scale * std::polar(1.0, sign * 2.0 * std::numbers::pi * a * c / n);
            for (int b = 0; b < m; ++b) k(a * m + b, c * m + b) = f;
        }
    return k;
}

}  // namespace detail

/// One path's factor T = (F_N (x) I_M) * Pi^l * Delta^(k+kappa) * (F_N^H (x) I_M),
/// an MN x MN unitary matrix. Pi is the cyclic shift, Delta^(k+kappa) the
/// unit-modulus diagonal diag(exp(j2pi(k+kappa)j/MN)).
inline CMatrix effective_path_matrix(int delay, double doppler, int m, int n,
                                     int oracle_cap = 256) {
    const int mn = m * n;
    if (mn > oracle_cap)
        throw OracleCapError("dense effective-channel matrices are capped at MN <= " +
                             std::to_string(oracle_cap));
    if (delay < 0 || delay >= mn)
        throw std::invalid_argument("delay index out of range");

    CMatrix a = CMatrix::Zero(mn, mn);
    for (int j = 0; j < mn; ++j) {
        const int i = (j + delay) % mn;
        a(i, j) = std::polar(1.0, 2.0 * std::numbers::pi * doppler * j / mn);
    }
    const CMatrix k1 = detail::kron_dft_identity(n, m, false);
    const CMatrix k2 = detail::kron_dft_identity(n, m, true);
    return k1 * a * k2;
}

/// Effective DD channel H_pq = sum_i h_i * T_i for one AP-user link.
inline CMatrix build_effective_channel(const std::vector<int>& delays,
                                       const std::vector<int>& dopplers,
                                       const std::vector<double>& fracs,
                                       const std::vector<cxd>& gains, int m, int n,
                                       int oracle_cap = 256) {
    if (delays.size() != gains.size() || dopplers.size() != gains.size() ||
        fracs.size() != gains.size())
        throw std::invalid_argument("per-path arrays must have equal length");
    CMatrix h = CMatrix::Zero(m * n, m * n);
    for (std::size_t i = 0; i < gains.size(); ++i) {
        h += gains[i] * effective_path_matrix(delays[i], dopplers[i] + fracs[i], m, n,
                                              oracle_cap);
    }
    return h;
}

/// Uplink input-output map: y_p = sum_q sqrt(rho_q^dt * eta_q) H_pq x_q + w_p.
inline CVector uplink_io(const std::vector<CVector>& tx,
                         const std::vector<CMatrix>& channels,
                         const std::vector<double>& rho_dt,
                         const std::vector<double>& eta_ul, const CVector& noise) {
    if (tx.size() != channels.size() || tx.size() != rho_dt.size() ||
        tx.size() != eta_ul.size())
        throw std::invalid_argument("per-user arrays must have equal length");
    CVector y = noise;
    for (std::size_t q = 0; q < tx.size(); ++q)
        y += std::sqrt(rho_dt[q] * eta_ul[q]) * (channels[q] * tx[q]);
    return y;
}

/// Complex path gains h_{pq,i} ~ CN(0, beta_{pq,i}), independent across
/// (p, q, i). Flat layout matches LargeScaleState::idx.
inline std::vector<cxd> draw_channel_gains(const LargeScaleState& ls, Rng& rng) {
    std::vector<cxd> h(ls.beta.size());
    for (std::size_t i = 0; i < h.size(); ++i) h[i] = rng.cgauss(ls.beta[i]);
    return h;
}

}  // namespace cfotfs
