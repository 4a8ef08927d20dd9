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

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cfotfs {

/// Cone program in standard primal form,
///
///   minimize    c'x
///   subject to  G x + s = h,   s in K,
///
/// where K = R+^nonneg_dim  x  Q_{d1} x ... x Q_{dk} is a product of the
/// nonnegative orthant (leading rows) and second-order cones
/// Q_d = { (s0, s1) in R x R^{d-1} : ||s1|| <= s0 } in the order listed in
/// `soc_dims`. G is supplied as sparse triplets; duplicate entries add up.
struct ConeProgram {
    int num_vars = 0;
    int nonneg_dim = 0;
    std::vector<int> soc_dims;
    Eigen::VectorXd cost;  // c, length num_vars
    Eigen::VectorXd rhs;   // h, length rows()

    struct Entry {
        int row;
        int col;
        double value;
    };
    std::vector<Entry> entries;

    int rows() const {
        int r = nonneg_dim;
        for (int d : soc_dims) r += d;
        return r;
    }

    void add_entry(int row, int col, double value) {
        entries.push_back({row, col, value});
    }

    void check() const {
        if (num_vars < 1) throw std::invalid_argument("cone program has no variables");
        if (cost.size() != num_vars) throw std::invalid_argument("cost length mismatch");
        if (rhs.size() != rows()) throw std::invalid_argument("rhs length mismatch");
        if (nonneg_dim < 0) throw std::invalid_argument("negative orthant dimension");
        for (int d : soc_dims)
            if (d < 2) throw std::invalid_argument("second-order cones need dim >= 2");
        for (const auto& e : entries)
            if (e.row < 0 || e.row >= rows() || e.col < 0 || e.col >= num_vars)
                throw std::invalid_argument("matrix entry out of range");
    }
};

enum class ConeStatus {
    Optimal,           // converged to the requested tolerances
    IterationLimit,    // best iterate returned, tolerances not met
    NumericalFailure,  // scaling or factorization broke down
};

inline const char* to_string(ConeStatus s) {
    switch (s) {
        case ConeStatus::Optimal: return "optimal";
        case ConeStatus::IterationLimit: return "iteration_limit";
        default: return "numerical_failure";
    }
}

struct ConeSolution {
    ConeStatus status = ConeStatus::NumericalFailure;
    Eigen::VectorXd x;  // primal point
    Eigen::VectorXd s;  // primal slack, in K
    Eigen::VectorXd z;  // dual point, in K
    double objective = 0.0;
    double primal_residual = 0.0;  // ||Gx + s - h|| / max(1, ||h||)
    double dual_residual = 0.0;    // ||c + G'z|| / max(1, ||c||)
    double duality_gap = 0.0;      // s'z
    int iterations = 0;
};

/// Feasibility-reporting conic solver interface. Any backend that accepts
/// linear plus second-order cone constraints in the standard form above and
/// reports primal residuals qualifies; the in-tree default is the
/// Nesterov-Todd primal-dual interior-point method in ipm_solver.hpp.
class ConicBackend {
  public:
    virtual ~ConicBackend() = default;
    virtual ConeSolution solve(const ConeProgram& prog) const = 0;
};

}  // namespace cfotfs
