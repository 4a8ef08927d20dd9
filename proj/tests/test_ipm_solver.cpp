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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "cfotfs/ipm_solver.hpp"
#include "cfotfs/rng.hpp"

using namespace cfotfs;

namespace {

// feasibility + complementarity certificate at the returned point
void check_kkt(const ConeProgram& p, const ConeSolution& sol, double tol = 1e-7) {
    REQUIRE(sol.status == ConeStatus::Optimal);
    CHECK(sol.primal_residual < tol);
    CHECK(sol.dual_residual < tol);
    // slack and dual inside their cones
    for (int i = 0; i < p.nonneg_dim; ++i) {
        CHECK(sol.s(i) >= -1e-9);
        CHECK(sol.z(i) >= -1e-9);
    }
    int off = p.nonneg_dim;
    for (int d : p.soc_dims) {
        CHECK(sol.s.segment(off + 1, d - 1).norm() <= sol.s(off) + 1e-8);
        CHECK(sol.z.segment(off + 1, d - 1).norm() <= sol.z(off) + 1e-8);
        off += d;
    }
}

}  // namespace

TEST_CASE("bounded LP reaches its vertex") {
    // min -x0 - 2 x1  s.t.  x0 <= 3, x1 <= 2, x0 + x1 <= 4, x >= 0
    ConeProgram p;
    p.num_vars = 2;
    p.nonneg_dim = 5;
    p.cost = Eigen::Vector2d(-1.0, -2.0);
    p.rhs = Eigen::VectorXd(5);
    p.rhs << 3.0, 2.0, 4.0, 0.0, 0.0;
    p.add_entry(0, 0, 1.0);
    p.add_entry(1, 1, 1.0);
    p.add_entry(2, 0, 1.0);
    p.add_entry(2, 1, 1.0);
    p.add_entry(3, 0, -1.0);
    p.add_entry(4, 1, -1.0);

    const InteriorPointSolver solver;
    const auto sol = solver.solve(p);
    check_kkt(p, sol);
    CHECK(sol.x(0) == Catch::Approx(2.0).margin(1e-7));
    CHECK(sol.x(1) == Catch::Approx(2.0).margin(1e-7));
    CHECK(sol.objective == Catch::Approx(-6.0).margin(1e-7));
}

TEST_CASE("distance-to-box SOCP") {
    // min t  s.t.  ||x - a|| <= t, -1 <= x_i <= 1, a = (2, 0.5)
    // optimum: x = (1, 0.5), t = 1
    ConeProgram p;
    p.num_vars = 3;  // x0 x1 t
    p.nonneg_dim = 4;
    p.soc_dims = {3};
    p.cost = Eigen::Vector3d(0.0, 0.0, 1.0);
    p.rhs = Eigen::VectorXd(7);
    p.rhs << 1.0, 1.0, 1.0, 1.0, 0.0, -2.0, -0.5;
    p.add_entry(0, 0, 1.0);
    p.add_entry(1, 1, 1.0);
    p.add_entry(2, 0, -1.0);
    p.add_entry(3, 1, -1.0);
    // SOC rows: s = (t, x0 - 2, x1 - 0.5)
    p.add_entry(4, 2, -1.0);
    p.add_entry(5, 0, -1.0);
    p.add_entry(6, 1, -1.0);

    const InteriorPointSolver solver;
    const auto sol = solver.solve(p);
    check_kkt(p, sol);
    CHECK(sol.x(2) == Catch::Approx(1.0).epsilon(1e-6));
    CHECK(sol.x(0) == Catch::Approx(1.0).epsilon(1e-5));
    CHECK(sol.x(1) == Catch::Approx(0.5).margin(1e-5));
}

TEST_CASE("hyperbolic constraint via rotated cone rows") {
    // min u + r  s.t.  u r >= 1, u, r >= 0  ->  u = r = 1.
    // encoded as || (2, u - r) || <= u + r
    ConeProgram p;
    p.num_vars = 2;
    p.nonneg_dim = 2;
    p.soc_dims = {3};
    p.cost = Eigen::Vector2d(1.0, 1.0);
    p.rhs = Eigen::VectorXd(5);
    p.rhs << 0.0, 0.0, 0.0, 2.0, 0.0;
    p.add_entry(0, 0, -1.0);
    p.add_entry(1, 1, -1.0);
    p.add_entry(2, 0, -1.0);
    p.add_entry(2, 1, -1.0);
    p.add_entry(4, 0, -1.0);
    p.add_entry(4, 1, 1.0);

    const InteriorPointSolver solver;
    const auto sol = solver.solve(p);
    check_kkt(p, sol);
    CHECK(sol.x(0) == Catch::Approx(1.0).epsilon(1e-6));
    CHECK(sol.x(1) == Catch::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("random feasible SOCPs return consistent certificates") {
    Rng rng(1234);
    for (int rep = 0; rep < 20; ++rep) {
        // min c'x over a random box plus a random ball constraint that is
        // feasible by construction (contains the box center)
        const int n = 2 + static_cast<int>(rng.raw() % 5);
        ConeProgram p;
        p.num_vars = n;
        p.nonneg_dim = 2 * n;
        p.soc_dims = {n + 1};
        p.cost = Eigen::VectorXd(n);
        for (int i = 0; i < n; ++i) p.cost(i) = rng.uniform(-1.0, 1.0);
        p.rhs = Eigen::VectorXd(2 * n + n + 1);
        for (int i = 0; i < n; ++i) {
            p.rhs(2 * i) = 1.0;        // x_i <= 1
            p.rhs(2 * i + 1) = 1.0;    // -x_i <= 1
            p.add_entry(2 * i, i, 1.0);
            p.add_entry(2 * i + 1, i, -1.0);
        }
        const double radius = rng.uniform(0.5, 3.0);
        p.rhs(2 * n) = radius;  // ||x - center|| <= radius, radius row constant
        for (int i = 0; i < n; ++i) {
            p.rhs(2 * n + 1 + i) = -rng.uniform(-0.2, 0.2);  // -center_i
            p.add_entry(2 * n + 1 + i, i, -1.0);
        }

        const InteriorPointSolver solver;
        const auto sol = solver.solve(p);
        check_kkt(p, sol);
        CHECK(sol.duality_gap < 1e-6);
    }
}

TEST_CASE("solver is deterministic") {
    ConeProgram p;
    p.num_vars = 2;
    p.nonneg_dim = 2;
    p.soc_dims = {3};
    p.cost = Eigen::Vector2d(1.0, 1.0);
    p.rhs = Eigen::VectorXd(5);
    p.rhs << 0.0, 0.0, 0.0, 2.0, 0.0;
    p.add_entry(0, 0, -1.0);
    p.add_entry(1, 1, -1.0);
    p.add_entry(2, 0, -1.0);
    p.add_entry(2, 1, -1.0);
    p.add_entry(4, 0, -1.0);
    p.add_entry(4, 1, 1.0);

    const InteriorPointSolver solver;
    const auto a = solver.solve(p);
    const auto b = solver.solve(p);
    REQUIRE(a.x.size() == b.x.size());
    CHECK((a.x - b.x).norm() == 0.0);
    CHECK(a.iterations == b.iterations);
}
