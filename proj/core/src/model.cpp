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

#include "elicit/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "elicit/error.hpp"

namespace elicit {

namespace {

std::vector<std::string> default_labels(std::size_t count) {
  std::vector<std::string> labels(count);
  for (std::size_t k = 0; k < count; ++k) labels[k] = std::to_string(k);
  return labels;
}

// Calls fn(flat, state, signals) for every cell of the tensor, in storage order.
template <typename Fn>
void for_each_cell(std::size_t state_count, std::span<const std::size_t> signal_counts, Fn&& fn) {
  const std::size_t n = signal_counts.size();
  const std::size_t per_state = tuple_count(signal_counts);
  std::vector<std::size_t> signals(n, 0);
  std::size_t flat = 0;
  for (std::size_t state = 0; state < state_count; ++state) {
    std::fill(signals.begin(), signals.end(), 0);
    for (std::size_t cell = 0; cell < per_state; ++cell, ++flat) {
      fn(flat, state, std::span<const std::size_t>(signals));
      for (std::size_t k = n; k > 0; --k) {
        if (++signals[k - 1] < signal_counts[k - 1]) break;
        signals[k - 1] = 0;
      }
    }
  }
}

std::size_t peer_signal_index(std::span<const std::size_t> signals, std::span<const std::size_t> counts,
                              std::size_t agent) {
  std::size_t index = 0;
  for (std::size_t j = 0; j < signals.size(); ++j) {
    if (j == agent) continue;
    index = index * counts[j] + signals[j];
  }
  return index;
}

}  // namespace

std::size_t tuple_count(std::span<const std::size_t> radices) {
  std::size_t count = 1;
  for (auto r : radices) count *= r;
  return count;
}

std::vector<std::size_t> tuple_digits(std::size_t index, std::span<const std::size_t> radices) {
  std::vector<std::size_t> digits(radices.size());
  for (std::size_t k = radices.size(); k > 0; --k) {
    digits[k - 1] = index % radices[k - 1];
    index /= radices[k - 1];
  }
  return digits;
}

std::size_t tuple_index(std::span<const std::size_t> digits, std::span<const std::size_t> radices) {
  std::size_t index = 0;
  for (std::size_t k = 0; k < radices.size(); ++k) index = index * radices[k] + digits[k];
  return index;
}

JointDistribution::JointDistribution(std::size_t state_count, std::vector<std::size_t> signal_counts,
                                     std::vector<double> mass)
    : state_count_(state_count), signal_counts_(std::move(signal_counts)), mass_(std::move(mass)) {
  require(state_count_ >= 1, ErrorCode::Shape, "distribution needs at least one state");
  require(!signal_counts_.empty(), ErrorCode::Shape, "distribution needs at least one agent");
  for (auto c : signal_counts_) require(c >= 1, ErrorCode::Shape, "every agent needs at least one signal");
  const std::size_t expected = state_count_ * tuple_count(signal_counts_);
  require(mass_.size() == expected, ErrorCode::Shape,
          "mass tensor has " + std::to_string(mass_.size()) + " entries, expected " + std::to_string(expected));
  double total = 0.0;
  for (double v : mass_) {
    require(std::isfinite(v) && v >= 0.0, ErrorCode::Validation, "probability mass must be finite and nonnegative");
    total += v;
  }
  require(std::abs(total - 1.0) <= kMassTolerance, ErrorCode::Validation,
          "probability mass sums to " + std::to_string(total));
  state_labels_ = default_labels(state_count_);
  for (auto c : signal_counts_) signal_labels_.push_back(default_labels(c));
}

JointDistribution JointDistribution::from_weights(std::size_t state_count, std::vector<std::size_t> signal_counts,
                                                  std::vector<double> weights) {
  double total = 0.0;
  for (double w : weights) {
    require(std::isfinite(w) && w >= 0.0, ErrorCode::Validation, "weights must be finite and nonnegative");
    total += w;
  }
  require(total > 0.0, ErrorCode::Validation, "weights sum to zero");
  for (double& w : weights) w /= total;
  return JointDistribution(state_count, std::move(signal_counts), std::move(weights));
}

JointDistribution JointDistribution::from_signal_table(const Matrix& table) {
  std::vector<double> mass;
  mass.reserve(static_cast<std::size_t>(table.size()));
  for (Eigen::Index r = 0; r < table.rows(); ++r)
    for (Eigen::Index c = 0; c < table.cols(); ++c) mass.push_back(table(r, c));
  return JointDistribution(1, {static_cast<std::size_t>(table.rows()), static_cast<std::size_t>(table.cols())},
                           std::move(mass));
}

std::size_t JointDistribution::flat_index(std::size_t state, std::span<const std::size_t> signals) const {
  if (state >= state_count_ || signals.size() != signal_counts_.size()) fail(ErrorCode::Index, "cell out of range");
  std::size_t index = state;
  for (std::size_t k = 0; k < signals.size(); ++k) {
    if (signals[k] >= signal_counts_[k]) fail(ErrorCode::Index, "signal out of range");
    index = index * signal_counts_[k] + signals[k];
  }
  return index;
}

double JointDistribution::at(std::size_t state, std::span<const std::size_t> signals) const {
  return mass_[flat_index(state, signals)];
}

Vector JointDistribution::state_marginal() const {
  Vector out = Vector::Zero(static_cast<Eigen::Index>(state_count_));
  for_each_cell(state_count_, signal_counts_, [&](std::size_t flat, std::size_t state, auto) {
    out[static_cast<Eigen::Index>(state)] += mass_[flat];
  });
  return out;
}

Vector JointDistribution::signal_marginal(std::size_t agent) const {
  require(agent < num_agents(), ErrorCode::Index, "agent out of range");
  Vector out = Vector::Zero(static_cast<Eigen::Index>(signal_counts_[agent]));
  for_each_cell(state_count_, signal_counts_, [&](std::size_t flat, std::size_t, std::span<const std::size_t> s) {
    out[static_cast<Eigen::Index>(s[agent])] += mass_[flat];
  });
  return out;
}

Matrix JointDistribution::signal_joint(std::size_t agent) const {
  require(agent < num_agents(), ErrorCode::Index, "agent out of range");
  std::size_t peers = 1;
  for (std::size_t j = 0; j < num_agents(); ++j)
    if (j != agent) peers *= signal_counts_[j];
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(signal_counts_[agent]), static_cast<Eigen::Index>(peers));
  for_each_cell(state_count_, signal_counts_, [&](std::size_t flat, std::size_t, std::span<const std::size_t> s) {
    out(static_cast<Eigen::Index>(s[agent]),
        static_cast<Eigen::Index>(peer_signal_index(s, signal_counts_, agent))) += mass_[flat];
  });
  return out;
}

Vector JointDistribution::state_posterior(std::size_t agent, std::size_t signal) const {
  require(agent < num_agents() && signal < signal_counts_.at(agent), ErrorCode::Index, "signal out of range");
  Vector out = Vector::Zero(static_cast<Eigen::Index>(state_count_));
  for_each_cell(state_count_, signal_counts_, [&](std::size_t flat, std::size_t state, std::span<const std::size_t> s) {
    if (s[agent] == signal) out[static_cast<Eigen::Index>(state)] += mass_[flat];
  });
  const double total = out.sum();
  require(total > 0.0, ErrorCode::ZeroMarginal,
          "agent " + std::to_string(agent) + " signal " + std::to_string(signal) + " has zero marginal");
  return out / total;
}

Vector JointDistribution::peer_signal_posterior(std::size_t agent, std::size_t signal) const {
  require(agent < num_agents() && signal < signal_counts_.at(agent), ErrorCode::Index, "signal out of range");
  const Matrix joint = signal_joint(agent);
  Vector row = joint.row(static_cast<Eigen::Index>(signal)).transpose();
  const double total = row.sum();
  require(total > 0.0, ErrorCode::ZeroMarginal,
          "agent " + std::to_string(agent) + " signal " + std::to_string(signal) + " has zero marginal");
  return row / total;
}

void JointDistribution::set_labels(std::vector<std::string> states, std::vector<std::vector<std::string>> signals) {
  require(states.size() == state_count_, ErrorCode::Shape, "state label count mismatch");
  require(signals.size() == signal_counts_.size(), ErrorCode::Shape, "signal label agent count mismatch");
  for (std::size_t i = 0; i < signals.size(); ++i)
    require(signals[i].size() == signal_counts_[i], ErrorCode::Shape, "signal label count mismatch");
  state_labels_ = std::move(states);
  signal_labels_ = std::move(signals);
}

bool JointDistribution::same_spaces(const JointDistribution& other) const {
  return state_count_ == other.state_count_ && signal_counts_ == other.signal_counts_;
}

void ConditionalModel::validate() const {
  require(prior.size() >= 1, ErrorCode::Shape, "prior must be non-empty");
  require(!likelihoods.empty(), ErrorCode::Shape, "need at least one likelihood matrix");
  for (Eigen::Index w = 0; w < prior.size(); ++w)
    require(std::isfinite(prior[w]) && prior[w] >= 0.0, ErrorCode::Validation, "prior entries must be nonnegative");
  require(std::abs(prior.sum() - 1.0) <= kMassTolerance, ErrorCode::Validation, "prior must sum to one");
  for (std::size_t i = 0; i < likelihoods.size(); ++i) {
    const Matrix& l = likelihoods[i];
    require(l.cols() == prior.size(), ErrorCode::Shape,
            "likelihood " + std::to_string(i) + " has " + std::to_string(l.cols()) + " state columns, prior has " +
                std::to_string(prior.size()));
    require(l.rows() >= 1, ErrorCode::Shape, "likelihood needs at least one signal row");
    for (Eigen::Index c = 0; c < l.cols(); ++c) {
      for (Eigen::Index r = 0; r < l.rows(); ++r)
        require(std::isfinite(l(r, c)) && l(r, c) >= 0.0, ErrorCode::Validation,
                "likelihood entries must be nonnegative");
      require(std::abs(l.col(c).sum() - 1.0) <= kMassTolerance, ErrorCode::Validation,
              "likelihood " + std::to_string(i) + " column " + std::to_string(c) + " does not sum to one");
    }
  }
}

JointDistribution ConditionalModel::joint() const {
  validate();
  std::vector<std::size_t> counts;
  for (const auto& l : likelihoods) counts.push_back(static_cast<std::size_t>(l.rows()));
  const std::size_t states = static_cast<std::size_t>(prior.size());
  std::vector<double> mass(states * tuple_count(counts));
  for_each_cell(states, counts, [&](std::size_t flat, std::size_t state, std::span<const std::size_t> s) {
    double v = prior[static_cast<Eigen::Index>(state)];
    for (std::size_t i = 0; i < s.size(); ++i)
      v *= likelihoods[i](static_cast<Eigen::Index>(s[i]), static_cast<Eigen::Index>(state));
    mass[flat] = v;
  });
  // Renormalize away rounding drift in the product.
  const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
  for (double& v : mass) v /= total;
  return JointDistribution(states, std::move(counts), std::move(mass));
}

Matrix ConditionalModel::peer_likelihood(std::size_t agent) const {
  require(agent < likelihoods.size(), ErrorCode::Index, "agent out of range");
  Matrix out = Matrix::Ones(1, prior.size());
  for (std::size_t j = 0; j < likelihoods.size(); ++j) {
    if (j == agent) continue;
    const Matrix& l = likelihoods[j];
    Matrix next(out.rows() * l.rows(), prior.size());
    for (Eigen::Index a = 0; a < out.rows(); ++a)
      for (Eigen::Index b = 0; b < l.rows(); ++b)
        next.row(a * l.rows() + b) = out.row(a).cwiseProduct(l.row(b));
    out = std::move(next);
  }
  return out;
}

JointDistribution conditional_independent_product(const Vector& prior, const std::vector<Matrix>& likelihoods) {
  return ConditionalModel{prior, likelihoods}.joint();
}

SignMatrix sign_pattern(const Matrix& values, double tolerance) {
  SignMatrix signs(values.rows(), values.cols());
  for (Eigen::Index r = 0; r < values.rows(); ++r)
    for (Eigen::Index c = 0; c < values.cols(); ++c)
      signs(r, c) = values(r, c) > tolerance ? 1 : (values(r, c) < -tolerance ? -1 : 0);
  return signs;
}

DeltaMatrix delta_matrix(const JointDistribution& mu) {
  require(mu.num_agents() == 2, ErrorCode::Arity,
          "Delta matrix needs exactly two agents, got " + std::to_string(mu.num_agents()));
  const Matrix joint = mu.signal_joint(0);
  const Vector rows = joint.rowwise().sum();
  const Vector cols = joint.colwise().sum().transpose();
  DeltaMatrix out;
  out.values = joint - rows * cols.transpose();
  out.signs = sign_pattern(out.values);
  return out;
}

Vector tensor_power(const Vector& u, std::size_t k) {
  Vector out = Vector::Ones(1);
  for (std::size_t step = 0; step < k; ++step) {
    Vector next(out.size() * u.size());
    for (Eigen::Index a = 0; a < out.size(); ++a) next.segment(a * u.size(), u.size()) = out[a] * u;
    out = std::move(next);
  }
  return out;
}

std::string rounded_key(std::span<const double> values) {
  std::string key = "(";
  char buf[64];
  for (std::size_t k = 0; k < values.size(); ++k) {
    std::snprintf(buf, sizeof(buf), "%.9f", values[k]);
    std::string part(buf);
    if (part == "-0.000000000") part = "0.000000000";
    if (k > 0) key += ",";
    key += part;
  }
  return key + ")";
}

ReportValue ReportValue::symbol(std::string label) { return ReportValue{{}, std::move(label)}; }

ReportValue ReportValue::vector(std::vector<double> payload) {
  std::string label = rounded_key(payload);
  return ReportValue{std::move(payload), std::move(label)};
}

std::optional<std::size_t> ReportSet::find(const ReportValue& value) const {
  for (std::size_t k = 0; k < values_.size(); ++k) {
    const ReportValue& member = values_[k];
    if (member.symbolic() != value.symbolic()) continue;
    if (value.symbolic()) {
      if (member.label == value.label) return k;
      continue;
    }
    if (member.payload.size() != value.payload.size()) continue;
    bool close = true;
    for (std::size_t c = 0; c < value.payload.size() && close; ++c)
      close = std::abs(member.payload[c] - value.payload[c]) < kDedupTolerance;
    if (close) return k;
  }
  return std::nullopt;
}

std::size_t ReportSet::intern(const ReportValue& value) {
  if (auto found = find(value)) return *found;
  std::string key = value.symbolic() ? value.label : rounded_key(value.payload);
  if (std::find(keys_.begin(), keys_.end(), key) != keys_.end()) key += "#" + std::to_string(values_.size());
  values_.push_back(value);
  keys_.push_back(std::move(key));
  return values_.size() - 1;
}

ReportSpec ReportSpec::posterior() {
  ReportSpec spec;
  spec.kind = ReportKind::Posterior;
  return spec;
}

ReportSpec ReportSpec::linear_property(Matrix g) {
  ReportSpec spec;
  spec.kind = ReportKind::Linear;
  spec.linear = std::move(g);
  return spec;
}

ReportSpec ReportSpec::explicit_table(std::vector<std::vector<ReportValue>> table) {
  ReportSpec spec;
  spec.kind = ReportKind::Explicit;
  spec.explicit_ = std::move(table);
  return spec;
}

ProblemInstance::ProblemInstance(std::vector<JointDistribution> distributions, std::vector<ReportSpec> reports,
                                 std::size_t task_count, std::vector<std::optional<ConditionalModel>> factorizations)
    : distributions_(std::move(distributions)),
      specs_(std::move(reports)),
      task_count_(task_count),
      factors_(std::move(factorizations)) {
  require(!distributions_.empty(), ErrorCode::Validation, "instance needs at least one distribution");
  require(task_count_ >= 1, ErrorCode::Validation, "task count must be positive");
  const JointDistribution& first = distributions_.front();
  for (std::size_t m = 1; m < distributions_.size(); ++m)
    require(first.same_spaces(distributions_[m]), ErrorCode::Validation,
            "distribution " + std::to_string(m) + " has different state/signal spaces");
  num_agents_ = first.num_agents();
  require(specs_.size() == num_agents_, ErrorCode::Shape,
          "need one report spec per agent (" + std::to_string(num_agents_) + ")");
  if (factors_.empty()) factors_.resize(distributions_.size());
  require(factors_.size() == distributions_.size(), ErrorCode::Shape, "factorization count mismatch");
  for (const auto& f : factors_)
    if (f) f->validate();

  report_sets_.resize(num_agents_);
  report_map_.assign(num_agents_, {});
  for (std::size_t i = 0; i < num_agents_; ++i) {
    const ReportSpec& spec = specs_[i];
    ReportSet& set = report_sets_[i];
    const std::size_t signals = first.num_signals(i);
    if (spec.kind == ReportKind::Identity)
      for (std::size_t s = 0; s < signals; ++s) set.intern(ReportValue::symbol(first.signal_labels(i)[s]));
    if (spec.kind == ReportKind::Linear)
      require(spec.linear.cols() == static_cast<Eigen::Index>(first.num_states()) && spec.linear.rows() >= 1,
              ErrorCode::Shape, "linear property matrix must be L x |Omega|");
    if (spec.kind == ReportKind::Explicit)
      require(spec.explicit_.size() == distributions_.size(), ErrorCode::Shape,
              "explicit report table needs one row per distribution");

    report_map_[i].resize(distributions_.size());
    for (std::size_t m = 0; m < distributions_.size(); ++m) {
      const JointDistribution& mu = distributions_[m];
      const Vector marginal = mu.signal_marginal(i);
      auto& row = report_map_[i][m];
      row.assign(signals, kNoReport);
      for (std::size_t s = 0; s < signals; ++s) {
        if (spec.kind == ReportKind::Identity) {
          row[s] = s;
          continue;
        }
        if (marginal[static_cast<Eigen::Index>(s)] <= 0.0) continue;
        ReportValue value;
        switch (spec.kind) {
          case ReportKind::Posterior: {
            const Vector post = mu.state_posterior(i, s);
            value = ReportValue::vector(std::vector<double>(post.data(), post.data() + post.size()));
            break;
          }
          case ReportKind::Linear: {
            const Vector r = spec.linear * mu.state_posterior(i, s);
            value = ReportValue::vector(std::vector<double>(r.data(), r.data() + r.size()));
            break;
          }
          case ReportKind::Explicit: {
            require(spec.explicit_[m].size() == signals, ErrorCode::Shape,
                    "explicit report table row " + std::to_string(m) + " needs one value per signal");
            value = spec.explicit_[m][s];
            break;
          }
          case ReportKind::Identity:
            break;
        }
        row[s] = set.intern(value);
      }
    }
  }
}

ProblemInstance ProblemInstance::uniform(std::vector<JointDistribution> distributions, ReportSpec spec,
                                         std::size_t task_count) {
  const std::size_t n = distributions.empty() ? 0 : distributions.front().num_agents();
  return ProblemInstance(std::move(distributions), std::vector<ReportSpec>(n, spec), task_count);
}

bool ProblemInstance::fully_factored() const {
  return std::all_of(factors_.begin(), factors_.end(), [](const auto& f) { return f.has_value(); });
}

std::size_t ProblemInstance::report_index(std::size_t agent, std::size_t m, std::size_t signal) const {
  return report_map_.at(agent).at(m).at(signal);
}

std::vector<std::size_t> ProblemInstance::peer_radices(std::size_t agent) const {
  std::vector<std::size_t> radices;
  for (std::size_t j = 0; j < num_agents_; ++j)
    if (j != agent) radices.push_back(report_sets_[j].size());
  return radices;
}

std::size_t ProblemInstance::peer_report_count(std::size_t agent) const { return tuple_count(peer_radices(agent)); }

std::size_t ProblemInstance::peer_tuple(std::size_t m, std::size_t agent, std::span<const std::size_t> signals) const {
  std::size_t index = 0;
  for (std::size_t j = 0; j < num_agents_; ++j) {
    if (j == agent) continue;
    const std::size_t r = report_map_[j][m][signals[j]];
    if (r == kNoReport) fail(ErrorCode::Validation, "positive-mass cell maps to an undefined report");
    index = index * report_sets_[j].size() + r;
  }
  return index;
}

Vector ProblemInstance::report_posterior(std::size_t m, std::size_t agent, std::size_t signal) const {
  const JointDistribution& mu = distributions_.at(m);
  require(agent < num_agents_ && signal < mu.num_signals(agent), ErrorCode::Index, "signal out of range");
  Vector out = Vector::Zero(static_cast<Eigen::Index>(peer_report_count(agent)));
  for_each_cell(mu.num_states(), mu.signal_counts(), [&](std::size_t flat, std::size_t, std::span<const std::size_t> s) {
    const double p = mu.mass()[flat];
    if (s[agent] != signal || p <= 0.0) return;
    out[static_cast<Eigen::Index>(peer_tuple(m, agent, s))] += p;
  });
  const double total = out.sum();
  require(total > 0.0, ErrorCode::ZeroMarginal,
          "agent " + std::to_string(agent) + " signal " + std::to_string(signal) + " has zero marginal");
  return out / total;
}

Vector ProblemInstance::peer_report_marginal(std::size_t m, std::size_t agent) const {
  const JointDistribution& mu = distributions_.at(m);
  Vector out = Vector::Zero(static_cast<Eigen::Index>(peer_report_count(agent)));
  for_each_cell(mu.num_states(), mu.signal_counts(), [&](std::size_t flat, std::size_t, std::span<const std::size_t> s) {
    const double p = mu.mass()[flat];
    if (p > 0.0) out[static_cast<Eigen::Index>(peer_tuple(m, agent, s))] += p;
  });
  return out;
}

Matrix ProblemInstance::report_joint(std::size_t m, std::size_t agent) const {
  const JointDistribution& mu = distributions_.at(m);
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(report_count(agent)),
                            static_cast<Eigen::Index>(peer_report_count(agent)));
  for_each_cell(mu.num_states(), mu.signal_counts(), [&](std::size_t flat, std::size_t, std::span<const std::size_t> s) {
    const double p = mu.mass()[flat];
    if (p <= 0.0) return;
    const std::size_t own = report_map_[agent][m][s[agent]];
    out(static_cast<Eigen::Index>(own), static_cast<Eigen::Index>(peer_tuple(m, agent, s))) += p;
  });
  return out;
}

double max_abs_diff(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  if (a.size() == 0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff();
}

std::vector<PosteriorSet> posterior_sets(const ProblemInstance& instance, std::size_t agent, Grouping grouping) {
  require(agent < instance.num_agents(), ErrorCode::Index, "agent out of range");
  struct Bucket {
    Vector marginal;
    std::string key;
    std::vector<std::vector<PosteriorMember>> by_report;
  };
  std::vector<Bucket> buckets;
  const std::size_t reports = instance.report_count(agent);
  if (grouping == Grouping::None) buckets.push_back({Vector(), "unconstrained", std::vector<std::vector<PosteriorMember>>(reports)});

  for (std::size_t m = 0; m < instance.num_distributions(); ++m) {
    Bucket* bucket = &buckets.front();
    if (grouping == Grouping::ByMarginal) {
      const Vector marginal = instance.peer_report_marginal(m, agent);
      bucket = nullptr;
      for (auto& b : buckets)
        if (max_abs_diff(b.marginal, marginal) < kDedupTolerance) {
          bucket = &b;
          break;
        }
      if (!bucket) {
        std::string key = rounded_key(std::span<const double>(marginal.data(), static_cast<std::size_t>(marginal.size())));
        for (const auto& b : buckets)
          if (b.key == key) key += "#" + std::to_string(buckets.size());
        buckets.push_back({marginal, key, std::vector<std::vector<PosteriorMember>>(reports)});
        bucket = &buckets.back();
      }
    }
    const JointDistribution& mu = instance.distribution(m);
    const Vector signal_marginal = mu.signal_marginal(agent);
    for (std::size_t s = 0; s < mu.num_signals(agent); ++s) {
      if (signal_marginal[static_cast<Eigen::Index>(s)] <= 0.0) continue;
      const std::size_t r = instance.report_index(agent, m, s);
      bucket->by_report[r].push_back({instance.report_posterior(m, agent, s), m, s});
    }
  }

  std::vector<PosteriorSet> out;
  for (auto& b : buckets)
    for (std::size_t r = 0; r < reports; ++r) {
      if (b.by_report[r].empty()) continue;
      out.push_back({agent, r, instance.reports(agent).key(r), b.key, b.marginal, std::move(b.by_report[r])});
    }
  return out;
}

}  // namespace elicit
