// Copyright 2026 The elicit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include "elicit/lp.hpp"
#include "oracles.hpp"

namespace {

using namespace elicit;

TEST(Lp, SmallMaximization) {
  // max 3x + 2y s.t. x + y <= 4, x + 3y <= 6, x <= 3.
  LpProblem lp(2);
  lp.set_objective(0, 3);
  lp.set_objective(1, 2);
  lp.add_row({{0, 1}, {1, 1}}, RowType::LessEqual, 4);
  lp.add_row({{0, 1}, {1, 3}}, RowType::LessEqual, 6);
  lp.set_bounds(0, 0, 3);
  const LpResult r = solve_lp(lp);
  ASSERT_EQ(r.status, LpStatus::Optimal);
  EXPECT_NEAR(r.objective, 11.0, 1e-9);
  EXPECT_NEAR(r.x[0], 3.0, 1e-9);
  EXPECT_NEAR(r.x[1], 1.0, 1e-9);
}

TEST(Lp, EqualityAndFreeVariables) {
  // max -|x - 2| style: x free, x - y = 2, maximize -y with y >= -1.
  LpProblem lp(2);
  lp.set_bounds(0, -kInf, kInf);
  lp.set_bounds(1, -1, kInf);
  lp.set_objective(1, -1);
  lp.add_row({{0, 1}, {1, -1}}, RowType::Equal, 2);
  const LpResult r = solve_lp(lp);
  ASSERT_EQ(r.status, LpStatus::Optimal);
  EXPECT_NEAR(r.x[1], -1.0, 1e-9);
  EXPECT_NEAR(r.x[0], 1.0, 1e-9);
}

TEST(Lp, DetectsInfeasible) {
  LpProblem lp(1);
  lp.add_row({{0, 1}}, RowType::GreaterEqual, 2);
  lp.add_row({{0, 1}}, RowType::LessEqual, 1);
  EXPECT_EQ(solve_lp(lp).status, LpStatus::Infeasible);
}

TEST(Lp, DetectsUnbounded) {
  LpProblem lp(2);
  lp.set_objective(0, 1);
  lp.add_row({{0, 1}, {1, -1}}, RowType::LessEqual, 1);
  EXPECT_EQ(solve_lp(lp).status, LpStatus::Unbounded);
}

TEST(Lp, RedundantEqualities) {
  LpProblem lp(3);
  lp.set_objective(2, 1);
  lp.add_row({{0, 1}, {1, 1}, {2, 1}}, RowType::Equal, 1);
  lp.add_row({{0, 2}, {1, 2}, {2, 2}}, RowType::Equal, 2);
  lp.add_row({{0, 1}}, RowType::GreaterEqual, 0.25);
  const LpResult r = solve_lp(lp);
  ASSERT_EQ(r.status, LpStatus::Optimal);
  EXPECT_NEAR(r.objective, 0.75, 1e-9);
  EXPECT_LE(max_violation(lp, r.x), 1e-9);
}

// Random feasible box-constrained LPs: the reported optimum is feasible and
// no random feasible point beats it.
TEST(LpProperty, OptimumDominatesSampledFeasiblePoints) {
  prop::for_all(17, 60, [](std::mt19937_64& rng, int) {
    const std::size_t n = prop::pick(rng, 2, 6), m = prop::pick(rng, 1, 8);
    LpProblem lp(n);
    Eigen::VectorXd anchor(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) {
      lp.set_bounds(j, -1, 1);
      lp.set_objective(j, prop::uniform(rng, -1, 1));
      anchor[static_cast<Eigen::Index>(j)] = prop::uniform(rng, -0.5, 0.5);
    }
    std::vector<Eigen::VectorXd> rows;
    std::vector<double> rhs;
    for (std::size_t i = 0; i < m; ++i) {
      Eigen::VectorXd a(static_cast<Eigen::Index>(n));
      std::vector<std::pair<std::size_t, double>> terms;
      for (std::size_t j = 0; j < n; ++j) {
        a[static_cast<Eigen::Index>(j)] = prop::uniform(rng, -1, 1);
        terms.emplace_back(j, a[static_cast<Eigen::Index>(j)]);
      }
      const double b = a.dot(anchor) + prop::uniform(rng, 0, 0.3);
      lp.add_row(terms, RowType::LessEqual, b);
      rows.push_back(a);
      rhs.push_back(b);
    }
    const LpResult r = solve_lp(lp);
    ASSERT_EQ(r.status, LpStatus::Optimal);
    EXPECT_LE(max_violation(lp, r.x), 1e-9);
    for (int k = 0; k < 300; ++k) {
      Eigen::VectorXd x(static_cast<Eigen::Index>(n));
      for (auto& v : x) v = prop::uniform(rng, -1, 1);
      bool ok = true;
      for (std::size_t i = 0; i < m; ++i) ok = ok && rows[i].dot(x) <= rhs[i];
      if (!ok) continue;
      double obj = 0;
      for (std::size_t j = 0; j < n; ++j) obj += lp.objective()[j] * x[static_cast<Eigen::Index>(j)];
      EXPECT_LE(obj, r.objective + 1e-9);
    }
  });
}

}  // namespace
