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

// Exact expected payments, strict truthfulness verification and Monte Carlo
// simulation of scoring mechanisms on problem instances.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "elicit/mechanisms.hpp"
#include "elicit/model.hpp"

namespace elicit {

inline constexpr double kStrictGap = 1e-9;
inline constexpr double kRefuteGain = -1e-12;
inline constexpr std::size_t kDefaultBudget = 100000000;

/// sigma_i^(t): |S_i| x |R_i| row-stochastic matrices, one per task, or a
/// single matrix shared by all tasks (consistent).
struct Strategy {
  std::size_t agent = 0;
  std::vector<Matrix> per_task;

  bool consistent() const { return per_task.size() == 1; }
  const Matrix& task(std::size_t t) const { return per_task.size() == 1 ? per_task.front() : per_task.at(t); }

  /// Reports f_{i,mu}(s); zero-marginal signals go to report 0.
  static Strategy truthful(const ProblemInstance& instance, std::size_t m, std::size_t agent);

  /// Throws Shape or Validation when dimensions or rows are off.
  void validate(const ProblemInstance& instance) const;
};

/// Truthful strategies for every agent.
std::vector<Strategy> truthful_profile(const ProblemInstance& instance, std::size_t m);

enum class VerifyMode { ScoringExact, ConsistentGeneral };
enum class VerdictStatus { CertifiedStrict, Refuted, PassedChecks };

std::string_view to_string(VerifyMode mode);
std::string_view to_string(VerdictStatus status);

struct Witness {
  Strategy strategy;
  double gain = 0.0;
};

struct Verdict {
  VerdictStatus status = VerdictStatus::Refuted;
  std::size_t distribution = 0;
  std::size_t agent = 0;
  double margin = 0.0;  // smallest truthful advantage over checked deviations
  std::optional<Witness> witness;
  std::size_t deviations_checked = 0;
};

struct VerifyOptions {
  std::size_t random_deviations = 200;
  std::uint64_t seed = 0x5eed;
  std::size_t budget = kDefaultBudget;
};

/// E[p_i] under the profile by enumerating every T-task report tuple.
double expected_payment(const ProblemInstance& instance, std::size_t m, const ScoringMechanism& mech,
                        std::size_t agent, const std::vector<Strategy>& profile, std::size_t budget = kDefaultBudget);

/// E[p_i^(t)(y, A, B) | s_i = s] with truthful peers: one |S_i| x |R_i| matrix
/// per task. Rows of zero-marginal signals are NaN.
std::vector<Matrix> conditional_payments(const ProblemInstance& instance, std::size_t m, const ScoringMechanism& mech,
                                         std::size_t agent);

Verdict verify_one(const ProblemInstance& instance, std::size_t m, const ScoringMechanism& mech, std::size_t agent,
                   VerifyMode mode, const VerifyOptions& options = {});

/// One verdict per (distribution, agent), distribution-major.
std::vector<Verdict> verify_strict(const ProblemInstance& instance, const ScoringMechanism& mech, VerifyMode mode,
                                   const VerifyOptions& options = {});

bool all_certified(const std::vector<Verdict>& verdicts);
bool any_refuted(const std::vector<Verdict>& verdicts);

/// Best enumerated deviation and its payoff gain over truth-telling.
Witness best_deviation(const ProblemInstance& instance, std::size_t m, const ScoringMechanism& mech, std::size_t agent,
                       VerifyMode mode, const VerifyOptions& options = {});

struct SimulationResult {
  std::vector<double> mean;
  std::vector<double> std_error;
  std::size_t trials = 0;
};

/// Uniform double in [0, 1) from 53 random bits.
inline double uniform01(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1p-53; }

SimulationResult simulate(const ProblemInstance& instance, std::size_t m, const ScoringMechanism& mech,
                          const std::vector<Strategy>& profile, std::size_t trials, std::uint64_t seed);

}  // namespace elicit
