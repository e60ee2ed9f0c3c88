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

// Problem instances <f, M>: joint distributions over states and signals,
// report functions, and the posterior objects derived from them.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace elicit {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SignMatrix = Eigen::MatrixXi;

inline constexpr double kMassTolerance = 1e-12;
inline constexpr double kDedupTolerance = 1e-9;
inline constexpr double kSignTolerance = 1e-12;
inline constexpr std::size_t kNoReport = static_cast<std::size_t>(-1);

// Mixed-radix tuple indexing; the first digit is the most significant.
std::size_t tuple_count(std::span<const std::size_t> radices);
std::vector<std::size_t> tuple_digits(std::size_t index, std::span<const std::size_t> radices);
std::size_t tuple_index(std::span<const std::size_t> digits, std::span<const std::size_t> radices);

/// Probability tensor over Omega x S_1 x ... x S_n, stored row-major with the
/// state as the slowest axis.
class JointDistribution {
 public:
  JointDistribution(std::size_t state_count, std::vector<std::size_t> signal_counts,
                    std::vector<double> mass);

  /// Normalizes nonnegative weights; throws Validation when they sum to zero.
  static JointDistribution from_weights(std::size_t state_count, std::vector<std::size_t> signal_counts,
                                        std::vector<double> weights);

  /// Two-agent distribution with a single state from a |S_1| x |S_2| table.
  static JointDistribution from_signal_table(const Matrix& table);

  std::size_t num_agents() const { return signal_counts_.size(); }
  std::size_t num_states() const { return state_count_; }
  std::size_t num_signals(std::size_t agent) const { return signal_counts_.at(agent); }
  std::span<const std::size_t> signal_counts() const { return signal_counts_; }
  const std::vector<double>& mass() const { return mass_; }

  std::size_t flat_index(std::size_t state, std::span<const std::size_t> signals) const;
  double at(std::size_t state, std::span<const std::size_t> signals) const;

  Vector state_marginal() const;
  Vector signal_marginal(std::size_t agent) const;

  /// mu(s_i, s_-i) summed over states: rows s_i, columns s_-i (other agents in
  /// increasing order, lexicographic).
  Matrix signal_joint(std::size_t agent) const;

  /// mu(omega | s_i). Throws ZeroMarginal when mu(s_i) = 0.
  Vector state_posterior(std::size_t agent, std::size_t signal) const;

  /// mu(s_-i | s_i). Throws ZeroMarginal when mu(s_i) = 0.
  Vector peer_signal_posterior(std::size_t agent, std::size_t signal) const;

  const std::vector<std::string>& state_labels() const { return state_labels_; }
  const std::vector<std::string>& signal_labels(std::size_t agent) const { return signal_labels_.at(agent); }
  void set_labels(std::vector<std::string> states, std::vector<std::vector<std::string>> signals);

  bool same_spaces(const JointDistribution& other) const;

 private:
  std::size_t state_count_;
  std::vector<std::size_t> signal_counts_;
  std::vector<double> mass_;
  std::vector<std::string> state_labels_;
  std::vector<std::vector<std::string>> signal_labels_;
};

/// Prior plus per-agent likelihoods mu(s_i | omega) (|S_i| x |Omega|, columns sum to one).
struct ConditionalModel {
  Vector prior;
  std::vector<Matrix> likelihoods;

  JointDistribution joint() const;

  /// P^mu_i: |S_-i| x |Omega| with entries mu(s_-i | omega), the Kronecker
  /// product of the other agents' likelihood rows.
  Matrix peer_likelihood(std::size_t agent) const;

  /// Throws Validation / Shape on malformed input.
  void validate() const;
};

JointDistribution conditional_independent_product(const Vector& prior, const std::vector<Matrix>& likelihoods);

struct DeltaMatrix {
  Matrix values;
  SignMatrix signs;
};

SignMatrix sign_pattern(const Matrix& values, double tolerance = kSignTolerance);

/// Delta[s1, s2] = mu(s1, s2) - mu(s1) mu(s2). Two agents only.
DeltaMatrix delta_matrix(const JointDistribution& mu);

/// Entry at tuple (a_1..a_k), lexicographic, equals prod u[a_j]; k = 0 gives [1].
Vector tensor_power(const Vector& u, std::size_t k);

/// Rounds each coordinate to 9 decimals.
std::string rounded_key(std::span<const double> values);

struct ReportValue {
  std::vector<double> payload;  // empty for symbolic reports
  std::string label;

  bool symbolic() const { return payload.empty(); }
  static ReportValue symbol(std::string label);
  static ReportValue vector(std::vector<double> payload);
};

/// The distinct report values R_i of one agent. Vector payloads within
/// kDedupTolerance of an existing member share its canonical key.
class ReportSet {
 public:
  /// Index of an equivalent member, inserting when absent.
  std::size_t intern(const ReportValue& value);
  std::optional<std::size_t> find(const ReportValue& value) const;

  std::size_t size() const { return values_.size(); }
  const ReportValue& value(std::size_t index) const { return values_.at(index); }
  const std::string& key(std::size_t index) const { return keys_.at(index); }
  const std::vector<std::string>& keys() const { return keys_; }

 private:
  std::vector<ReportValue> values_;
  std::vector<std::string> keys_;
};

enum class ReportKind { Identity, Posterior, Linear, Explicit };

struct ReportSpec {
  ReportKind kind = ReportKind::Identity;
  Matrix linear;                                    // L x |Omega| for Linear
  std::vector<std::vector<ReportValue>> explicit_;  // [distribution][signal]

  static ReportSpec identity() { return {}; }
  static ReportSpec posterior();
  static ReportSpec linear_property(Matrix g);
  static ReportSpec explicit_table(std::vector<std::vector<ReportValue>> table);
};

/// <f, M> with T tasks. Immutable after construction.
class ProblemInstance {
 public:
  ProblemInstance(std::vector<JointDistribution> distributions, std::vector<ReportSpec> reports,
                  std::size_t task_count, std::vector<std::optional<ConditionalModel>> factorizations = {});

  /// Same report spec for every agent.
  static ProblemInstance uniform(std::vector<JointDistribution> distributions, ReportSpec spec,
                                 std::size_t task_count);

  std::size_t num_agents() const { return num_agents_; }
  std::size_t num_distributions() const { return distributions_.size(); }
  std::size_t task_count() const { return task_count_; }
  const JointDistribution& distribution(std::size_t m) const { return distributions_.at(m); }
  const std::vector<JointDistribution>& distributions() const { return distributions_; }
  const ReportSpec& report_spec(std::size_t agent) const { return specs_.at(agent); }
  const std::optional<ConditionalModel>& factorization(std::size_t m) const { return factors_.at(m); }
  bool fully_factored() const;

  const ReportSet& reports(std::size_t agent) const { return report_sets_.at(agent); }
  std::size_t report_count(std::size_t agent) const { return report_sets_.at(agent).size(); }

  /// f_{i,mu}(s) as an index into R_i, or kNoReport for zero-marginal signals.
  std::size_t report_index(std::size_t agent, std::size_t m, std::size_t signal) const;

  /// |R_j| for j != i, in increasing agent order.
  std::vector<std::size_t> peer_radices(std::size_t agent) const;
  std::size_t peer_report_count(std::size_t agent) const;

  /// mu(r_-i | s_i) over R_-i. Throws ZeroMarginal.
  Vector report_posterior(std::size_t m, std::size_t agent, std::size_t signal) const;

  /// mu(r_-i) over R_-i.
  Vector peer_report_marginal(std::size_t m, std::size_t agent) const;

  /// A_mu: |R_i| x |R_-i| joint of truthful reports.
  Matrix report_joint(std::size_t m, std::size_t agent) const;

 private:
  std::size_t peer_tuple(std::size_t m, std::size_t agent, std::span<const std::size_t> signals) const;

  std::vector<JointDistribution> distributions_;
  std::vector<ReportSpec> specs_;
  std::size_t task_count_;
  std::vector<std::optional<ConditionalModel>> factors_;
  std::size_t num_agents_;
  std::vector<ReportSet> report_sets_;
  // [agent][distribution][signal] -> report index
  std::vector<std::vector<std::vector<std::size_t>>> report_map_;
};

struct PosteriorMember {
  Vector posterior;
  std::size_t distribution;
  std::size_t signal;
};

struct PosteriorSet {
  std::size_t agent;
  std::size_t report;
  std::string report_key;
  std::string marginal_key;  // "unconstrained" when not grouped
  Vector marginal;           // empty when not grouped
  std::vector<PosteriorMember> members;
};

enum class Grouping { None, ByMarginal };

/// Q_i(r_i) (Grouping::None) or Q_i(r_i, mu(r_-i)) (Grouping::ByMarginal).
/// Buckets appear in order of first distribution; within a bucket, sets follow
/// report index order and only non-empty sets are listed.
std::vector<PosteriorSet> posterior_sets(const ProblemInstance& instance, std::size_t agent, Grouping grouping);

double max_abs_diff(const Vector& a, const Vector& b);

}  // namespace elicit
