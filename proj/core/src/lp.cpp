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

#include "elicit/lp.hpp"

#include <algorithm>
#include <cmath>

#include "elicit/error.hpp"

namespace elicit {

std::string_view to_string(LpStatus status) {
  switch (status) {
    case LpStatus::Optimal:
      return "optimal";
    case LpStatus::Infeasible:
      return "infeasible";
    case LpStatus::Unbounded:
      return "unbounded";
    case LpStatus::IterationLimit:
      return "iteration-limit";
  }
  return "unknown";
}

LpProblem::LpProblem(std::size_t num_vars)
    : objective_(num_vars, 0.0), lower_(num_vars, 0.0), upper_(num_vars, kInf) {}

void LpProblem::set_bounds(std::size_t var, double lower, double upper) {
  require(var < num_vars(), ErrorCode::Index, "LP variable out of range");
  require(lower <= upper, ErrorCode::Validation, "LP bounds are inverted");
  lower_[var] = lower;
  upper_[var] = upper;
}

void LpProblem::add_row(std::vector<std::pair<std::size_t, double>> terms, RowType type, double rhs) {
  for (const auto& [var, coef] : terms) {
    require(var < num_vars(), ErrorCode::Index, "LP row references unknown variable");
    require(std::isfinite(coef), ErrorCode::Validation, "LP coefficient is not finite");
  }
  rows_.push_back({std::move(terms), type, rhs});
}

double max_violation(const LpProblem& problem, const Eigen::VectorXd& x) {
  double worst = 0.0;
  for (std::size_t j = 0; j < problem.num_vars(); ++j) {
    worst = std::max(worst, problem.lower()[j] - x[static_cast<Eigen::Index>(j)]);
    worst = std::max(worst, x[static_cast<Eigen::Index>(j)] - problem.upper()[j]);
  }
  for (const auto& row : problem.rows()) {
    double lhs = 0.0;
    for (const auto& [var, coef] : row.terms) lhs += coef * x[static_cast<Eigen::Index>(var)];
    switch (row.type) {
      case RowType::LessEqual:
        worst = std::max(worst, lhs - row.rhs);
        break;
      case RowType::GreaterEqual:
        worst = std::max(worst, row.rhs - lhs);
        break;
      case RowType::Equal:
        worst = std::max(worst, std::abs(lhs - row.rhs));
        break;
    }
  }
  return worst;
}

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Original variable j is x_j = offset_j + sign_j * y_a (- y_b when split).
struct VarMap {
  double offset = 0.0;
  double sign = 1.0;
  std::size_t pos = 0;
  std::size_t neg = static_cast<std::size_t>(-1);
};

class Tableau {
 public:
  Tableau(RowMajor a, Eigen::VectorXd b, std::vector<int> kinds, const LpOptions& options)
      : options_(options), kinds_(std::move(kinds)) {
    const Eigen::Index m = a.rows();
    const Eigen::Index n = a.cols();
    structural_ = n;
    // Column layout: structural | slack/surplus per inequality row | artificial per >=/= row.
    Eigen::Index slack_count = 0, art_count = 0;
    for (int k : kinds_) {
      if (k != 2) ++slack_count;
      if (k != 0) ++art_count;
    }
    cols_ = n + slack_count + art_count;
    first_artificial_ = n + slack_count;
    t_ = RowMajor::Zero(m, cols_ + 1);
    t_.leftCols(n) = a;
    t_.col(cols_) = b;
    basis_.resize(static_cast<std::size_t>(m));
    Eigen::Index slack = n, art = first_artificial_;
    for (Eigen::Index i = 0; i < m; ++i) {
      const int k = kinds_[static_cast<std::size_t>(i)];
      if (k == 0) {
        t_(i, slack) = 1.0;
        basis_[static_cast<std::size_t>(i)] = slack++;
      } else {
        if (k == 1) t_(i, slack++) = -1.0;
        t_(i, art) = 1.0;
        basis_[static_cast<std::size_t>(i)] = art++;
      }
    }
    original_ = t_;
    allowed_.assign(static_cast<std::size_t>(cols_), true);
    for (Eigen::Index i = 0; i < m; ++i) rows_kept_.push_back(i);
  }

  // Sets feasible to false when the artificial optimum is positive.
  LpStatus phase_one(bool& feasible) {
    Eigen::VectorXd cost = Eigen::VectorXd::Zero(cols_);
    for (Eigen::Index j = first_artificial_; j < cols_; ++j) cost[j] = -1.0;
    const LpStatus status = optimize(cost);
    if (status != LpStatus::Optimal) return status;
    double infeasibility = 0.0;
    for (std::size_t i = 0; i < basis_.size(); ++i)
      if (basis_[i] >= first_artificial_) infeasibility += t_(static_cast<Eigen::Index>(i), cols_);
    const double scale = 1.0 + original_.col(cols_).cwiseAbs().maxCoeff();
    feasible = infeasibility <= options_.feasibility_tolerance * scale;
    if (!feasible) return LpStatus::Optimal;
    drive_out_artificials();
    for (Eigen::Index j = first_artificial_; j < cols_; ++j) allowed_[static_cast<std::size_t>(j)] = false;
    return LpStatus::Optimal;
  }

  LpStatus phase_two(const Eigen::VectorXd& structural_cost) {
    Eigen::VectorXd cost = Eigen::VectorXd::Zero(cols_);
    cost.head(structural_) = structural_cost;
    return optimize(cost);
  }

  // Basic solution recomputed from the original columns for accuracy.
  Eigen::VectorXd solution() const {
    const Eigen::Index m = static_cast<Eigen::Index>(basis_.size());
    Eigen::VectorXd full = Eigen::VectorXd::Zero(cols_);
    if (m == 0) return full.head(structural_);
    Eigen::MatrixXd basis_matrix(m, m);
    Eigen::VectorXd rhs(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const Eigen::Index row = rows_kept_[static_cast<std::size_t>(i)];
      rhs[i] = original_(row, cols_);
      for (Eigen::Index k = 0; k < m; ++k) basis_matrix(i, k) = original_(row, basis_[static_cast<std::size_t>(k)]);
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis_matrix);
    Eigen::VectorXd xb = lu.solve(rhs);
    Eigen::VectorXd tableau_xb = t_.col(cols_);
    // Keep the refined values only when they actually reduce the residual.
    const double refined = (basis_matrix * xb - rhs).cwiseAbs().maxCoeff();
    const double plain = (basis_matrix * tableau_xb - rhs).cwiseAbs().maxCoeff();
    if (!xb.allFinite() || refined > plain) xb = tableau_xb;
    for (Eigen::Index i = 0; i < m; ++i) full[basis_[static_cast<std::size_t>(i)]] = std::max(0.0, xb[i]);
    return full.head(structural_);
  }

  std::size_t iterations() const { return iterations_; }

 private:
  Eigen::VectorXd reduced_costs(const Eigen::VectorXd& cost) const {
    Eigen::VectorXd d = cost;
    for (Eigen::Index i = 0; i < t_.rows(); ++i) {
      const double cb = cost[basis_[static_cast<std::size_t>(i)]];
      if (cb != 0.0) d -= cb * t_.row(i).head(cols_).transpose();
    }
    for (auto j : basis_) d[j] = 0.0;
    return d;
  }

  // Rebuilds the tableau as B^-1 [A | b] from the original rows to shed drift.
  void reinvert() {
    const auto m = static_cast<Eigen::Index>(basis_.size());
    if (m == 0) return;
    Eigen::MatrixXd basis_matrix(m, m);
    RowMajor source(m, cols_ + 1);
    for (Eigen::Index i = 0; i < m; ++i) {
      source.row(i) = original_.row(rows_kept_[static_cast<std::size_t>(i)]);
      for (Eigen::Index k = 0; k < m; ++k) basis_matrix(i, k) = source(i, basis_[static_cast<std::size_t>(k)]);
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis_matrix);
    RowMajor fresh = lu.solve(Eigen::MatrixXd(source));
    if (!fresh.allFinite()) return;
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index k = 0; k < m; ++k) fresh(i, basis_[static_cast<std::size_t>(k)]) = i == k ? 1.0 : 0.0;
      if (fresh(i, cols_) < 0.0 && fresh(i, cols_) > -options_.feasibility_tolerance) fresh(i, cols_) = 0.0;
    }
    t_ = std::move(fresh);
  }

  LpStatus optimize(const Eigen::VectorXd& cost) {
    constexpr std::size_t kReinvertEvery = 64;
    const Eigen::Index m = t_.rows();
    // Reduced costs d_j = c_j - c_B^T B^-1 A_j (maximization: enter when d_j > 0).
    Eigen::VectorXd d = reduced_costs(cost);
    auto objective_value = [&] {
      double v = 0.0;
      for (Eigen::Index i = 0; i < m; ++i) v += cost[basis_[static_cast<std::size_t>(i)]] * t_(i, cols_);
      return v;
    };
    double objective = objective_value();
    std::size_t stalled = 0, since_reinvert = 0;
    bool bland = false;
    while (true) {
      if (iterations_ >= options_.max_iterations) return LpStatus::IterationLimit;
      if (since_reinvert >= kReinvertEvery) {
        reinvert();
        d = reduced_costs(cost);
        since_reinvert = 0;
      }
      Eigen::Index enter = -1;
      double best = options_.cost_tolerance;
      for (Eigen::Index j = 0; j < cols_; ++j) {
        if (!allowed_[static_cast<std::size_t>(j)] || d[j] <= options_.cost_tolerance) continue;
        if (bland) {
          enter = j;
          break;
        }
        if (d[j] > best) {
          best = d[j];
          enter = j;
        }
      }
      if (enter < 0) {
        if (since_reinvert == 0) return LpStatus::Optimal;
        // Confirm optimality on a freshly inverted tableau.
        since_reinvert = kReinvertEvery;
        continue;
      }
      // Two-pass ratio test: the smallest ratio with slack, then the largest pivot within it.
      Eigen::Index leave = -1;
      double col_max = 0.0;
      for (Eigen::Index i = 0; i < m; ++i) col_max = std::max(col_max, std::abs(t_(i, enter)));
      const double pivot_floor = std::max(options_.pivot_tolerance, 1e-9 * col_max);
      double ratio = kInf;
      for (Eigen::Index i = 0; i < m; ++i) {
        const double a = t_(i, enter);
        if (a <= pivot_floor) continue;
        ratio = std::min(ratio, (std::max(t_(i, cols_), 0.0) + options_.feasibility_tolerance) / a);
      }
      if (!std::isfinite(ratio)) return LpStatus::Unbounded;
      double pivot_size = 0.0;
      for (Eigen::Index i = 0; i < m; ++i) {
        const double a = t_(i, enter);
        if (a <= pivot_floor || std::max(t_(i, cols_), 0.0) / a > ratio) continue;
        const bool better = bland ? (leave < 0 || basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)])
                                  : a > pivot_size;
        if (better) {
          pivot_size = a;
          leave = i;
        }
      }
      if (leave < 0) return LpStatus::Unbounded;
      pivot(leave, enter, d);
      ++iterations_;
      ++since_reinvert;
      const double next = objective_value();
      if (next <= objective + 1e-14) {
        if (++stalled >= options_.stall_limit) bland = true;
      } else {
        stalled = 0;
        bland = false;
      }
      objective = next;
    }
  }

  void pivot(Eigen::Index r, Eigen::Index c, Eigen::VectorXd& d) {
    t_.row(r) /= t_(r, c);
    t_(r, c) = 1.0;
    const Eigen::RowVectorXd pivot_row = t_.row(r);
    for (Eigen::Index i = 0; i < t_.rows(); ++i) {
      if (i == r) continue;
      const double f = t_(i, c);
      if (f == 0.0) continue;
      t_.row(i) -= f * pivot_row;
      t_(i, c) = 0.0;
      if (t_(i, cols_) < 0.0 && t_(i, cols_) > -options_.feasibility_tolerance) t_(i, cols_) = 0.0;
    }
    const double dc = d[c];
    if (dc != 0.0) d -= dc * pivot_row.head(cols_).transpose();
    d[c] = 0.0;
    basis_[static_cast<std::size_t>(r)] = c;
  }

  void drive_out_artificials() {
    Eigen::VectorXd dummy = Eigen::VectorXd::Zero(cols_);
    std::vector<Eigen::Index> drop;
    for (std::size_t i = 0; i < basis_.size(); ++i) {
      if (basis_[i] < first_artificial_) continue;
      const Eigen::Index row = static_cast<Eigen::Index>(i);
      Eigen::Index best = -1;
      double mag = options_.pivot_tolerance * 1e3;
      for (Eigen::Index j = 0; j < first_artificial_; ++j)
        if (std::abs(t_(row, j)) > mag) {
          mag = std::abs(t_(row, j));
          best = j;
        }
      if (best >= 0)
        pivot(row, best, dummy);
      else
        drop.push_back(row);  // redundant constraint
    }
    rows_kept_.clear();
    std::vector<bool> dropped(basis_.size(), false);
    for (auto r : drop) dropped[static_cast<std::size_t>(r)] = true;
    RowMajor kept(static_cast<Eigen::Index>(basis_.size() - drop.size()), t_.cols());
    std::vector<Eigen::Index> basis;
    Eigen::Index k = 0;
    for (std::size_t i = 0; i < basis_.size(); ++i) {
      if (dropped[i]) continue;
      kept.row(k++) = t_.row(static_cast<Eigen::Index>(i));
      basis.push_back(basis_[i]);
      rows_kept_.push_back(static_cast<Eigen::Index>(i));
    }
    t_ = std::move(kept);
    basis_ = std::move(basis);
  }

 private:
  LpOptions options_;
  std::vector<int> kinds_;  // 0: <=, 1: >=, 2: =
  Eigen::Index structural_ = 0;
  Eigen::Index cols_ = 0;
  Eigen::Index first_artificial_ = 0;
  RowMajor t_;
  RowMajor original_;
  std::vector<Eigen::Index> basis_;
  std::vector<Eigen::Index> rows_kept_;
  std::vector<bool> allowed_;
  std::size_t iterations_ = 0;
};

}  // namespace

LpResult solve_lp(const LpProblem& problem, const LpOptions& options) {
  const std::size_t n = problem.num_vars();
  std::vector<VarMap> maps(n);
  std::size_t y_count = 0;
  struct Bound {
    std::size_t y;
    double value;
  };
  std::vector<Bound> extra_upper;
  for (std::size_t j = 0; j < n; ++j) {
    const double lo = problem.lower()[j];
    const double hi = problem.upper()[j];
    VarMap& map = maps[j];
    if (std::isfinite(lo)) {
      map.offset = lo;
      map.pos = y_count++;
      if (std::isfinite(hi)) extra_upper.push_back({map.pos, hi - lo});
    } else if (std::isfinite(hi)) {
      map.offset = hi;
      map.sign = -1.0;
      map.pos = y_count++;
    } else {
      map.pos = y_count++;
      map.neg = y_count++;
    }
  }

  const std::size_t m = problem.num_rows() + extra_upper.size();
  RowMajor a = RowMajor::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(y_count));
  Eigen::VectorXd b(static_cast<Eigen::Index>(m));
  std::vector<int> kinds(m);
  std::size_t r = 0;
  for (const auto& row : problem.rows()) {
    double rhs = row.rhs;
    const Eigen::Index ri = static_cast<Eigen::Index>(r);
    for (const auto& [var, coef] : row.terms) {
      const VarMap& map = maps[var];
      rhs -= coef * map.offset;
      a(ri, static_cast<Eigen::Index>(map.pos)) += coef * map.sign;
      if (map.neg != static_cast<std::size_t>(-1)) a(ri, static_cast<Eigen::Index>(map.neg)) -= coef;
    }
    int kind = row.type == RowType::LessEqual ? 0 : (row.type == RowType::GreaterEqual ? 1 : 2);
    if (rhs < 0.0) {
      a.row(ri) *= -1.0;
      rhs = -rhs;
      if (kind != 2) kind = 1 - kind;
    }
    b[ri] = rhs;
    kinds[r] = kind;
    ++r;
  }
  for (const auto& bound : extra_upper) {
    const Eigen::Index ri = static_cast<Eigen::Index>(r);
    a(ri, static_cast<Eigen::Index>(bound.y)) = 1.0;
    b[ri] = bound.value;
    kinds[r] = 0;
    ++r;
  }

  Eigen::VectorXd cost = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(y_count));
  for (std::size_t j = 0; j < n; ++j) {
    const double c = problem.objective()[j];
    const VarMap& map = maps[j];
    cost[static_cast<Eigen::Index>(map.pos)] += c * map.sign;
    if (map.neg != static_cast<std::size_t>(-1)) cost[static_cast<Eigen::Index>(map.neg)] -= c;
  }

  Tableau tableau(std::move(a), std::move(b), std::move(kinds), options);
  LpResult result;
  bool feasible = false;
  LpStatus status = tableau.phase_one(feasible);
  if (status == LpStatus::Optimal && !feasible) status = LpStatus::Infeasible;
  if (status == LpStatus::Optimal) status = tableau.phase_two(cost);
  result.status = status;
  result.iterations = tableau.iterations();
  if (status != LpStatus::Optimal) return result;

  const Eigen::VectorXd y = tableau.solution();
  result.x.resize(static_cast<Eigen::Index>(n));
  result.objective = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const VarMap& map = maps[j];
    double v = map.offset + map.sign * y[static_cast<Eigen::Index>(map.pos)];
    if (map.neg != static_cast<std::size_t>(-1)) v -= y[static_cast<Eigen::Index>(map.neg)];
    result.x[static_cast<Eigen::Index>(j)] = v;
    result.objective += problem.objective()[j] * v;
  }
  return result;
}

}  // namespace elicit
