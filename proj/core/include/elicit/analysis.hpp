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

// Necessary conditions for elicitability, the robustness ball around a
// stochastically relevant distribution, and counterexample constructions for
// linear properties and rank-deficient peer likelihoods.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "elicit/geometry.hpp"
#include "elicit/mechanisms.hpp"
#include "elicit/model.hpp"

namespace elicit {

inline constexpr double kRankTolerance = 1e-9;
inline constexpr std::size_t kPermutationCap = 8;

/// Number of singular values above relative_tolerance * largest.
std::size_t numerical_rank(const Matrix& m, double relative_tolerance = kRankTolerance);

struct CollisionWitness {
  std::size_t agent = 0;
  std::size_t report_a = 0;
  std::size_t report_b = 0;
  std::string marginal_key;
  PosteriorMember first;
  PosteriorMember second;
  double distance = 0.0;
};

struct ConvexWitness {
  std::size_t agent = 0;
  std::size_t report_a = 0;
  std::size_t report_b = 0;
  std::string marginal_key;
  std::vector<PosteriorMember> members_a;
  std::vector<PosteriorMember> members_b;
  Vector beta;
  Vector beta_prime;
  Vector point;
};

struct PermutationWitness {
  std::size_t distribution = 0;
  std::size_t partner = 0;
  std::size_t agent = 0;
  std::vector<std::size_t> permutation;  // row r of P A_mu is row permutation[r] of A_mu
  double residual = 0.0;
};

struct RankWitness {
  std::size_t distribution = 0;
  std::size_t agent = 0;
  std::size_t rank = 0;
  std::size_t required = 0;
  Vector singular_values;
  Vector null_vector;
};

using CheckWitness = std::variant<std::monostate, CollisionWitness, ConvexWitness, PermutationWitness, RankWitness>;

enum class CheckOutcome { Pass, Violated, Skipped };
std::string_view to_string(CheckOutcome outcome);

struct CheckReport {
  std::string name;
  CheckOutcome outcome = CheckOutcome::Pass;
  std::string detail;
  CheckWitness witness;

  bool violated() const { return outcome == CheckOutcome::Violated; }
};

/// Posteriors over peer reports colliding across different truthful reports,
/// over all of M.
CheckReport check_stochastic_relevance(const ProblemInstance& instance);

/// The same collision test within marginal buckets.
CheckReport check_marginal_relevance(const ProblemInstance& instance);

/// Intersecting convex hulls of Q_i(r, m) and Q_i(r', m) within a bucket.
CheckReport check_convex_separation(const ProblemInstance& instance);

/// A non-trivial row permutation of A_mu equal to some A_mu~ in M. Permutations
/// that only shuffle reports never made under mu are not deviations and are
/// ignored.
CheckReport check_permutation(const ProblemInstance& instance, std::size_t cap = kPermutationCap);

/// rank(P^mu_i) = |Omega| for every factored distribution and agent.
CheckReport check_rank_posterior(const ProblemInstance& instance);

/// rank([G; 1^T]) = |Omega|.
CheckReport check_linear_property_rank(const Matrix& g, std::size_t omega_count);

/// Every applicable check; inapplicable ones are reported as skipped.
std::vector<CheckReport> run_all_checks(const ProblemInstance& instance);

struct BallResult {
  double epsilon = 0.0;
  std::vector<double> epsilon0;          // per agent
  std::vector<PowerDiagram> diagrams;    // per agent, cells in report order
  ScoringMechanism mechanism;            // T = 1, p(y, a) = -v^y[a] + w^y
  ProblemInstance instance;              // {lambda} with identity reports
};

/// Radius of an L1 ball around lambda on which the fitted diagram mechanism
/// stays strictly truthful. Throws NotApplicable without full support or
/// stochastic relevance.
BallResult ball_epsilon(const JointDistribution& lambda);

/// Seeded distributions with ||mu - lambda||_1 <= radius.
std::vector<JointDistribution> sample_ball(const JointDistribution& lambda, double radius, std::size_t count,
                                          std::uint64_t seed);

inline constexpr double kDeltaStart = 0.1;
inline constexpr double kDeltaFloor = 1e-9;

struct LinearCounterexample {
  ConditionalModel star;
  ConditionalModel prime;
  JointDistribution mu_star;
  JointDistribution mu_prime;
  std::size_t signal = 0;       // s_1*
  double delta = 0.0;
  Vector alpha;
  Vector beta;
  double marginal_gap = 0.0;    // (a) max |mu'(r_2) - mu*(r_2)|
  double report_shift = 0.0;    // (b) max |G mu'(w|s*) - G mu*(w|s*)|
  double posterior_gap = 0.0;   // (c) max |mu'(r_2|s*) - mu*(r_2|s*)|
};

/// Two-agent pair (mu*, mu') with equal peer-report marginals and equal
/// posteriors over the peer's report at s_1*, but different reports there.
LinearCounterexample gen_linear_counterexample(const Vector& prior, const std::vector<Matrix>& likelihoods,
                                               const Matrix& g, double delta = kDeltaStart);

struct RankCounterexample {
  ConditionalModel base;
  ConditionalModel shifted;
  JointDistribution mu;
  JointDistribution mu_tilde;
  std::size_t agent = 0;
  std::size_t signal = 0;
  double delta = 0.0;
  Vector null_vector;
  double state_posterior_gap = 0.0;  // max |mu~(w|s) - mu(w|s)|
  double peer_signal_gap = 0.0;      // max |mu~(s_-i|s) - mu(s_-i|s)|
  double peer_report_gap = 0.0;      // same over posterior reports
};

/// Shifts agent i's state posterior along a null vector of P^mu_i.
RankCounterexample gen_rank_counterexample(const ConditionalModel& model, std::size_t agent,
                                           double delta = kDeltaStart);

}  // namespace elicit
