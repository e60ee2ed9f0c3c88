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

// Scoring mechanisms: per-task payment tables p(y, a, b) where y is the
// agent's own report on the task, a the peers' report tuple on the same task
// and b the peers' report tuples on the other T-1 tasks (increasing task
// order, lexicographic). Totals sum over tasks.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "elicit/geometry.hpp"
#include "elicit/model.hpp"

namespace elicit {

class PaymentTable {
 public:
  PaymentTable() = default;
  PaymentTable(std::size_t own, std::size_t peer, std::size_t task_count, double fill = 0.0);

  std::size_t own() const { return own_; }
  std::size_t peer() const { return peer_; }
  std::size_t task_count() const { return tasks_; }
  /// |R_-i|^(T-1).
  std::size_t history() const { return history_; }
  std::size_t size() const { return values_.size(); }

  double& at(std::size_t y, std::size_t a, std::size_t b) { return values_[index(y, a, b)]; }
  double at(std::size_t y, std::size_t a, std::size_t b) const { return values_[index(y, a, b)]; }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  bool operator==(const PaymentTable& other) const = default;

 private:
  std::size_t index(std::size_t y, std::size_t a, std::size_t b) const { return (y * peer_ + a) * history_ + b; }

  std::size_t own_ = 0;
  std::size_t peer_ = 0;
  std::size_t tasks_ = 1;
  std::size_t history_ = 1;
  std::vector<double> values_;
};

class ScoringMechanism {
 public:
  ScoringMechanism() = default;

  /// tables[agent][task]; every task of an agent shares one shape.
  ScoringMechanism(std::vector<std::vector<PaymentTable>> tables, std::string name = "scoring");

  /// One table per agent reused on every task.
  static ScoringMechanism uniform(std::vector<PaymentTable> per_agent, std::size_t task_count,
                                  std::string name = "scoring");

  std::size_t num_agents() const { return tables_.size(); }
  std::size_t task_count() const { return tables_.empty() ? 0 : tables_.front().size(); }
  const PaymentTable& table(std::size_t agent, std::size_t task) const { return tables_.at(agent).at(task); }
  PaymentTable& table(std::size_t agent, std::size_t task) { return tables_.at(agent).at(task); }
  bool task_uniform() const;
  const std::string& name() const { return name_; }
  void set_name(std::string name) { name_ = std::move(name); }

  /// Sum over tasks of p^(t)(own[t], peers[t], peers[-t]).
  double total_payment(std::size_t agent, std::span<const std::size_t> own,
                       std::span<const std::size_t> peers) const;

  /// Throws Shape unless table shapes match the instance's report sets and T.
  void check_compatible(const ProblemInstance& instance) const;

  bool operator==(const ScoringMechanism& other) const { return tables_ == other.tables_; }

 private:
  std::vector<std::vector<PaymentTable>> tables_;
  std::string name_;
};

/// Index of the other-task tuple for task t given the per-task peer reports.
std::size_t history_index(std::span<const std::size_t> peers, std::size_t task, std::size_t radix);

/// Per agent and own report: D (|R_-i| x |R_-i|^(T-1)), e (|R_-i|), h (|R_-i|^(T-1)).
struct FactoredBlock {
  Matrix d;
  Vector e;
  Vector h;
};
struct FactoredParams {
  std::size_t task_count = 1;
  std::vector<std::vector<FactoredBlock>> blocks;  // [agent][report]
};

/// p(y, a, b) = -D_y[a, b] - e_y[a] + h_y[b] on every task.
ScoringMechanism scoring_from_deh(const FactoredParams& params);

// Correlated agreement.

struct Applicability {
  bool ok = true;
  std::string reason;
};

/// Rows pairwise distinct, columns pairwise distinct, no zero entries.
Applicability ca_applicable(const SignMatrix& signs);

/// Sign[my, same] - mean_k Sign[my, other_k].
double ca_payment(const SignMatrix& signs, std::size_t my_report, std::size_t peer_same,
                  std::span<const std::size_t> peer_other);

/// Two-agent CA over identity reports; agent 1 scores with the transpose.
/// Needs T >= 2 and a sign matrix without zeros.
ScoringMechanism ca_mechanism(const SignMatrix& signs, std::size_t task_count);

/// The sign pattern shared by every distribution of a two-agent instance.
SignMatrix shared_sign_pattern(const ProblemInstance& instance);

// Kong prediction payment: log sum_w r_i(w) g(w) / prior(w), where g is the
// state posterior implied by the other reports, prod_j r_j(w) / prior(w)^(n-2)
// normalized to sum to one.

double kong_payment(const Vector& prior, const Vector& my_report, const std::vector<Vector>& others);

/// Kong payments tabulated over an instance with posterior reports. The
/// state prior must be common to every distribution.
ScoringMechanism kong_mechanism(const ProblemInstance& instance);

/// Common state marginal of all distributions; throws Validation otherwise.
Vector shared_prior(const ProblemInstance& instance);

/// p(y, a, b) = -v^y[a] + w^y per agent; diagram sites are indexed by peer
/// report tuple and cells follow report order.
ScoringMechanism scoring_from_diagrams(const std::vector<PowerDiagram>& diagrams, std::size_t task_count);

inline constexpr std::size_t kSymmetrizeTaskCap = 5;

/// p^(t)(y, a, b) averaged over all source tasks and all orderings of b.
ScoringMechanism symmetrize(const ScoringMechanism& mech, std::size_t task_cap = kSymmetrizeTaskCap);

}  // namespace elicit
