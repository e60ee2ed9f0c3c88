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

#pragma once

// Small dense linear programs. Two-phase primal simplex on a full tableau,
// adequate for the few-hundred-row problems that synthesis and fitting build.

#include <cstddef>
#include <limits>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace elicit {

enum class RowType { LessEqual, GreaterEqual, Equal };
enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

std::string_view to_string(LpStatus status);

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct LpRow {
  std::vector<std::pair<std::size_t, double>> terms;  // (variable, coefficient)
  RowType type = RowType::LessEqual;
  double rhs = 0.0;
};

/// maximize c^T x subject to rows and lower <= x <= upper.
class LpProblem {
 public:
  explicit LpProblem(std::size_t num_vars);

  std::size_t num_vars() const { return objective_.size(); }
  std::size_t num_rows() const { return rows_.size(); }

  void set_objective(std::size_t var, double coefficient) { objective_.at(var) = coefficient; }
  void set_bounds(std::size_t var, double lower, double upper);
  void add_row(std::vector<std::pair<std::size_t, double>> terms, RowType type, double rhs);

  const std::vector<double>& objective() const { return objective_; }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }
  const std::vector<LpRow>& rows() const { return rows_; }

 private:
  std::vector<double> objective_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<LpRow> rows_;
};

struct LpOptions {
  std::size_t max_iterations = 200000;
  double pivot_tolerance = 1e-11;
  double cost_tolerance = 1e-10;
  double feasibility_tolerance = 1e-9;
  std::size_t stall_limit = 50;  // degenerate pivots before switching to Bland's rule
};

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  double objective = 0.0;
  Eigen::VectorXd x;
  std::size_t iterations = 0;
};

LpResult solve_lp(const LpProblem& problem, const LpOptions& options = {});

/// Largest violation of any row or bound at x.
double max_violation(const LpProblem& problem, const Eigen::VectorXd& x);

}  // namespace elicit
