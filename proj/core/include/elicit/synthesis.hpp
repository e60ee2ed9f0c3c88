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

// LP synthesis of strictly truthful scoring mechanisms for a finite M and the
// factored (D, e, h) view of a payment table.

#include <cstddef>
#include <string>
#include <vector>

#include "elicit/geometry.hpp"
#include "elicit/lp.hpp"
#include "elicit/mechanisms.hpp"
#include "elicit/model.hpp"

namespace elicit {

/// Upper bound on LP tableau entries (rows x columns) per agent.
inline constexpr std::size_t kSynthesisCellBudget = 50000000;

struct LpStats {
  std::size_t variables = 0;
  std::size_t constraints = 0;
  std::size_t iterations = 0;
};

struct SynthesisResult {
  bool feasible = false;
  ScoringMechanism mechanism;  // zero tables when infeasible
  double margin = 0.0;         // smallest optimal epsilon over agents
  LpStatus status = LpStatus::Optimal;
  std::vector<LpStats> lp_stats;  // per agent
};

/// Collapses the other-task history b (a (T-1)-tuple of peer reports) to a
/// value in a finite range.
struct Statistic {
  enum class Kind { Identity, Constant, Histogram, Table };

  std::string name;
  Kind kind = Kind::Identity;
  std::vector<std::size_t> table;  // history index -> value, for Kind::Table

  static Statistic identity() { return {"identity", Kind::Identity, {}}; }
  static Statistic constant() { return {"constant", Kind::Constant, {}}; }
  /// Unordered multiset of the peer reports.
  static Statistic histogram() { return {"histogram", Kind::Histogram, {}}; }
  static Statistic from_table(std::string name, std::vector<std::size_t> table);

  /// Value per history index, relabeled densely from 0 in first-seen order.
  std::vector<std::size_t> evaluate(std::size_t peer_count, std::size_t task_count) const;
};

/// Maximizes the smallest truthful advantage over every (mu, i, s_i, y) with
/// payments boxed to [-1, 1]; feasible when it exceeds kStrictMargin.
SynthesisResult synthesize_scoring(const ProblemInstance& instance);

/// The same LP with payments p(y, a, Y(b)).
SynthesisResult synthesize_with_statistic(const ProblemInstance& instance, const Statistic& stat);

/// D_y[a, b] = -p(y, a, b), e = 0, h = 0. Needs task-uniform tables.
FactoredParams extract_deh(const ScoringMechanism& mech);

/// v^y = D_y u^(T-1) + e_y and w^y = h_y^T u^(T-1) for one agent.
PowerDiagram extract_power_diagram(const FactoredParams& params, const Vector& marginal, std::size_t agent);

}  // namespace elicit
