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

#include "elicit/generators.hpp"

#include <algorithm>
#include <cmath>

#include "elicit/error.hpp"

namespace elicit {

Vector dirichlet(std::mt19937_64& rng, std::size_t length, double alpha) {
  std::gamma_distribution<double> gamma(alpha, 1.0);
  Vector v(static_cast<Eigen::Index>(length));
  do {
    for (auto& x : v) x = gamma(rng);
  } while (!(v.sum() > 0.0));
  return v / v.sum();
}

namespace {

bool matches(const Matrix& delta, const SignMatrix& signs) {
  for (Eigen::Index r = 0; r < delta.rows(); ++r)
    for (Eigen::Index c = 0; c < delta.cols(); ++c) {
      const double d = delta(r, c);
      if (std::abs(d) < kMinDeltaMagnitude) return false;
      if ((d > 0.0 ? 1 : -1) != signs(r, c)) return false;
    }
  return true;
}

Matrix outer_delta(const Matrix& table) {
  const Vector p = table.rowwise().sum();
  const Vector q = table.colwise().sum().transpose();
  return table - p * q.transpose();
}

}  // namespace

std::vector<JointDistribution> sample_sign_pattern(const SignMatrix& signs, std::size_t count, std::uint64_t seed,
                                                   const std::optional<FixedMarginals>& marginals) {
  require(signs.rows() >= 2 && signs.cols() >= 2, ErrorCode::Shape, "sign pattern needs at least 2 x 2 entries");
  for (Eigen::Index r = 0; r < signs.rows(); ++r)
    for (Eigen::Index c = 0; c < signs.cols(); ++c)
      require(signs(r, c) == 1 || signs(r, c) == -1, ErrorCode::Validation, "sign pattern entries must be +1 or -1");
  if (marginals) {
    require(marginals->row.size() == signs.rows() && marginals->column.size() == signs.cols(), ErrorCode::Shape,
            "fixed marginals do not match the sign pattern");
    require(marginals->row.minCoeff() > 0.0 && marginals->column.minCoeff() > 0.0, ErrorCode::Validation,
            "fixed marginals must be strictly positive");
  }
  const auto rows = static_cast<std::size_t>(signs.rows());
  const auto cols = static_cast<std::size_t>(signs.cols());
  std::mt19937_64 rng(seed);
  std::vector<JointDistribution> out;
  std::size_t misses = 0;
  while (out.size() < count) {
    if (misses > kRejectionLimit) fail(ErrorCode::ResourceLimit, "sign pattern sampler rejected too many draws");
    Matrix table(signs.rows(), signs.cols());
    std::gamma_distribution<double> pos(2.5, 1.0), neg(0.5, 1.0);
    for (Eigen::Index r = 0; r < table.rows(); ++r)
      for (Eigen::Index c = 0; c < table.cols(); ++c) table(r, c) = signs(r, c) > 0 ? pos(rng) : neg(rng);
    if (!(table.sum() > 0.0)) {
      ++misses;
      continue;
    }
    table /= table.sum();
    Matrix delta = outer_delta(table);
    if (marginals) {
      // Reuse the draw's correlation shape on the requested marginals.
      const Matrix base = marginals->row * marginals->column.transpose();
      double t_max = std::numeric_limits<double>::infinity();
      for (Eigen::Index r = 0; r < delta.rows(); ++r)
        for (Eigen::Index c = 0; c < delta.cols(); ++c)
          if (delta(r, c) < 0.0) t_max = std::min(t_max, base(r, c) / -delta(r, c));
      const double t = t_max * (0.2 + 0.8 * uniform01(rng()));
      delta *= t;
      table = base + delta;
    }
    if (!matches(delta, signs) || table.minCoeff() < 0.0) {
      ++misses;
      continue;
    }
    misses = 0;
    std::vector<double> mass(rows * cols);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) mass[r * cols + c] = table(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    out.push_back(JointDistribution::from_weights(1, {rows, cols}, std::move(mass)));
  }
  return out;
}

std::vector<ConditionalModel> sample_conditional_independent(std::size_t state_count,
                                                             const std::vector<std::size_t>& signal_counts,
                                                             std::size_t count, std::uint64_t seed,
                                                             const std::optional<Vector>& prior) {
  require(state_count >= 1 && !signal_counts.empty(), ErrorCode::Shape, "need states and agents");
  if (prior) require(static_cast<std::size_t>(prior->size()) == state_count, ErrorCode::Shape, "prior length mismatch");
  std::mt19937_64 rng(seed);
  std::vector<ConditionalModel> out;
  for (std::size_t k = 0; k < count; ++k) {
    ConditionalModel model;
    model.prior = prior ? *prior : dirichlet(rng, state_count);
    for (std::size_t n : signal_counts) {
      Matrix q(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(state_count));
      for (Eigen::Index w = 0; w < q.cols(); ++w) q.col(w) = dirichlet(rng, n);
      model.likelihoods.push_back(std::move(q));
    }
    model.validate();
    out.push_back(std::move(model));
  }
  return out;
}

std::vector<JointDistribution> sample_dirichlet(std::size_t state_count, const std::vector<std::size_t>& signal_counts,
                                                std::size_t count, std::uint64_t seed, double alpha) {
  require(state_count >= 1 && !signal_counts.empty(), ErrorCode::Shape, "need states and agents");
  require(alpha > 0.0, ErrorCode::Validation, "Dirichlet concentration must be positive");
  std::size_t cells = state_count;
  for (std::size_t n : signal_counts) cells *= n;
  std::mt19937_64 rng(seed);
  std::vector<JointDistribution> out;
  for (std::size_t k = 0; k < count; ++k) {
    const Vector v = dirichlet(rng, cells, alpha);
    out.push_back(JointDistribution::from_weights(state_count, signal_counts, std::vector<double>(v.begin(), v.end())));
  }
  return out;
}

ScoringMechanism random_mechanism(const ProblemInstance& instance, std::uint64_t seed, bool task_uniform) {
  std::mt19937_64 rng(seed);
  const std::size_t tasks = instance.task_count();
  std::vector<std::vector<PaymentTable>> tables;
  for (std::size_t i = 0; i < instance.num_agents(); ++i) {
    std::vector<PaymentTable> per_task;
    for (std::size_t t = 0; t < tasks; ++t) {
      if (task_uniform && t > 0) {
        per_task.push_back(per_task.front());
        continue;
      }
      PaymentTable table(instance.report_count(i), instance.peer_report_count(i), tasks);
      for (auto& v : table.values()) v = 2.0 * uniform01(rng()) - 1.0;
      per_task.push_back(std::move(table));
    }
    tables.push_back(std::move(per_task));
  }
  return ScoringMechanism(std::move(tables), "random");
}

Strategy random_strategy(const ProblemInstance& instance, std::size_t agent, std::uint64_t seed, bool consistent) {
  std::mt19937_64 rng(seed);
  const auto signals = static_cast<Eigen::Index>(instance.distribution(0).num_signals(agent));
  const std::size_t reports = instance.report_count(agent);
  Strategy strategy{agent, {}};
  const std::size_t copies = consistent ? 1 : instance.task_count();
  for (std::size_t t = 0; t < copies; ++t) {
    Matrix sigma(signals, static_cast<Eigen::Index>(reports));
    for (Eigen::Index s = 0; s < signals; ++s) sigma.row(s) = dirichlet(rng, reports).transpose();
    strategy.per_task.push_back(std::move(sigma));
  }
  return strategy;
}

}  // namespace elicit
