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

#include "elicit/mechanisms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "elicit/error.hpp"

namespace elicit {

namespace {

std::size_t int_pow(std::size_t base, std::size_t exp) {
  std::size_t out = 1;
  for (std::size_t k = 0; k < exp; ++k) out *= base;
  return out;
}

}  // namespace

PaymentTable::PaymentTable(std::size_t own, std::size_t peer, std::size_t task_count, double fill)
    : own_(own), peer_(peer), tasks_(task_count) {
  require(task_count >= 1, ErrorCode::Validation, "task count must be positive");
  history_ = int_pow(peer, task_count - 1);
  values_.assign(own_ * peer_ * history_, fill);
}

ScoringMechanism::ScoringMechanism(std::vector<std::vector<PaymentTable>> tables, std::string name)
    : tables_(std::move(tables)), name_(std::move(name)) {
  require(!tables_.empty(), ErrorCode::Shape, "mechanism needs at least one agent");
  const std::size_t t_count = tables_.front().size();
  require(t_count >= 1, ErrorCode::Shape, "mechanism needs at least one task");
  for (const auto& per_task : tables_) {
    require(per_task.size() == t_count, ErrorCode::Shape, "agents disagree on the task count");
    for (const auto& table : per_task) {
      require(table.task_count() == t_count, ErrorCode::Shape, "payment table built for a different task count");
      require(table.own() == per_task.front().own() && table.peer() == per_task.front().peer(), ErrorCode::Shape,
              "payment tables of one agent differ in shape");
      for (double v : table.values())
        require(std::isfinite(v), ErrorCode::Validation, "payment table entries must be finite");
    }
  }
}

ScoringMechanism ScoringMechanism::uniform(std::vector<PaymentTable> per_agent, std::size_t task_count,
                                           std::string name) {
  std::vector<std::vector<PaymentTable>> tables;
  for (auto& table : per_agent) tables.emplace_back(task_count, table);
  return ScoringMechanism(std::move(tables), std::move(name));
}

bool ScoringMechanism::task_uniform() const {
  for (const auto& per_task : tables_)
    for (const auto& table : per_task)
      if (!(table == per_task.front())) return false;
  return true;
}

std::size_t history_index(std::span<const std::size_t> peers, std::size_t task, std::size_t radix) {
  std::size_t index = 0;
  for (std::size_t k = 0; k < peers.size(); ++k)
    if (k != task) index = index * radix + peers[k];
  return index;
}

double ScoringMechanism::total_payment(std::size_t agent, std::span<const std::size_t> own,
                                       std::span<const std::size_t> peers) const {
  const std::size_t t_count = task_count();
  require(own.size() == t_count && peers.size() == t_count, ErrorCode::Shape, "need one report per task");
  double total = 0.0;
  for (std::size_t t = 0; t < t_count; ++t) {
    const PaymentTable& table = tables_.at(agent)[t];
    require(own[t] < table.own() && peers[t] < table.peer(), ErrorCode::Index, "report index out of range");
    total += table.at(own[t], peers[t], history_index(peers, t, table.peer()));
  }
  return total;
}

void ScoringMechanism::check_compatible(const ProblemInstance& instance) const {
  require(num_agents() == instance.num_agents(), ErrorCode::Shape,
          "mechanism has " + std::to_string(num_agents()) + " agents, instance has " +
              std::to_string(instance.num_agents()));
  require(task_count() == instance.task_count(), ErrorCode::Shape,
          "mechanism is built for T = " + std::to_string(task_count()) + ", instance has T = " +
              std::to_string(instance.task_count()));
  for (std::size_t i = 0; i < num_agents(); ++i) {
    const PaymentTable& t = table(i, 0);
    require(t.own() == instance.report_count(i) && t.peer() == instance.peer_report_count(i), ErrorCode::Shape,
            "payment table of agent " + std::to_string(i) + " does not match the instance's report sets");
  }
}

ScoringMechanism scoring_from_deh(const FactoredParams& params) {
  require(params.task_count >= 1, ErrorCode::Validation, "task count must be positive");
  require(!params.blocks.empty(), ErrorCode::Shape, "factored parameters need at least one agent");
  std::vector<PaymentTable> tables;
  for (std::size_t i = 0; i < params.blocks.size(); ++i) {
    const auto& blocks = params.blocks[i];
    require(!blocks.empty(), ErrorCode::Shape, "agent " + std::to_string(i) + " has no report blocks");
    const std::size_t peer = static_cast<std::size_t>(blocks.front().e.size());
    PaymentTable table(blocks.size(), peer, params.task_count);
    const std::size_t hist = table.history();
    for (std::size_t y = 0; y < blocks.size(); ++y) {
      const FactoredBlock& b = blocks[y];
      require(static_cast<std::size_t>(b.e.size()) == peer && static_cast<std::size_t>(b.d.rows()) == peer &&
                  static_cast<std::size_t>(b.d.cols()) == hist && static_cast<std::size_t>(b.h.size()) == hist,
              ErrorCode::Shape, "factored block shapes disagree for agent " + std::to_string(i));
      for (std::size_t a = 0; a < peer; ++a)
        for (std::size_t h = 0; h < hist; ++h)
          table.at(y, a, h) = -b.d(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(h)) -
                              b.e[static_cast<Eigen::Index>(a)] + b.h[static_cast<Eigen::Index>(h)];
    }
    tables.push_back(std::move(table));
  }
  return ScoringMechanism::uniform(std::move(tables), params.task_count, "deh");
}

Applicability ca_applicable(const SignMatrix& signs) {
  for (Eigen::Index r = 0; r < signs.rows(); ++r)
    for (Eigen::Index c = 0; c < signs.cols(); ++c)
      if (signs(r, c) == 0)
        return {false, "zero sign at (" + std::to_string(r) + ", " + std::to_string(c) + ")"};
  for (Eigen::Index r = 0; r < signs.rows(); ++r)
    for (Eigen::Index q = r + 1; q < signs.rows(); ++q)
      if (signs.row(r) == signs.row(q))
        return {false, "duplicate rows " + std::to_string(r) + " and " + std::to_string(q)};
  for (Eigen::Index c = 0; c < signs.cols(); ++c)
    for (Eigen::Index q = c + 1; q < signs.cols(); ++q)
      if (signs.col(c) == signs.col(q))
        return {false, "duplicate columns " + std::to_string(c) + " and " + std::to_string(q)};
  return {};
}

double ca_payment(const SignMatrix& signs, std::size_t my_report, std::size_t peer_same,
                  std::span<const std::size_t> peer_other) {
  const auto rows = static_cast<std::size_t>(signs.rows());
  const auto cols = static_cast<std::size_t>(signs.cols());
  require(my_report < rows && peer_same < cols, ErrorCode::Index, "CA report index out of range");
  require(!peer_other.empty(), ErrorCode::Validation, "CA needs at least one other task");
  const auto y = static_cast<Eigen::Index>(my_report);
  double other = 0.0;
  for (auto b : peer_other) {
    require(b < cols, ErrorCode::Index, "CA report index out of range");
    other += signs(y, static_cast<Eigen::Index>(b));
  }
  return signs(y, static_cast<Eigen::Index>(peer_same)) - other / static_cast<double>(peer_other.size());
}

ScoringMechanism ca_mechanism(const SignMatrix& signs, std::size_t task_count) {
  require(task_count >= 2, ErrorCode::Validation, "CA needs at least two tasks");
  for (Eigen::Index r = 0; r < signs.rows(); ++r)
    for (Eigen::Index c = 0; c < signs.cols(); ++c)
      require(signs(r, c) != 0, ErrorCode::Validation,
              "CA is undefined for a zero sign at (" + std::to_string(r) + ", " + std::to_string(c) + ")");
  std::vector<PaymentTable> tables;
  for (int agent = 0; agent < 2; ++agent) {
    const SignMatrix s = agent == 0 ? signs : SignMatrix(signs.transpose());
    const auto own = static_cast<std::size_t>(s.rows());
    const auto peer = static_cast<std::size_t>(s.cols());
    PaymentTable table(own, peer, task_count);
    const std::vector<std::size_t> radices(task_count - 1, peer);
    for (std::size_t b = 0; b < table.history(); ++b) {
      const auto digits = tuple_digits(b, radices);
      for (std::size_t y = 0; y < own; ++y)
        for (std::size_t a = 0; a < peer; ++a) table.at(y, a, b) = ca_payment(s, y, a, digits);
    }
    tables.push_back(std::move(table));
  }
  return ScoringMechanism::uniform(std::move(tables), task_count, "ca");
}

SignMatrix shared_sign_pattern(const ProblemInstance& instance) {
  require(instance.num_agents() == 2, ErrorCode::Arity, "CA needs exactly two agents");
  for (std::size_t i = 0; i < 2; ++i)
    require(instance.report_spec(i).kind == ReportKind::Identity, ErrorCode::Validation,
            "CA scores identity reports only");
  const SignMatrix signs = delta_matrix(instance.distribution(0)).signs;
  for (std::size_t m = 1; m < instance.num_distributions(); ++m)
    require(delta_matrix(instance.distribution(m)).signs == signs, ErrorCode::Validation,
            "distribution " + std::to_string(m) + " has a different Delta sign pattern");
  return signs;
}

double kong_payment(const Vector& prior, const Vector& my_report, const std::vector<Vector>& others) {
  require(my_report.size() == prior.size(), ErrorCode::Shape, "report length differs from the prior");
  for (const auto& r : others) require(r.size() == prior.size(), ErrorCode::Shape, "report length differs from the prior");
  require(prior.minCoeff() > 0.0, ErrorCode::Validation, "Kong payment needs a strictly positive prior");
  const double exponent = static_cast<double>(others.size()) - 1.0;  // n - 2
  Vector g(prior.size());
  for (Eigen::Index w = 0; w < prior.size(); ++w) {
    double v = 1.0;
    for (const auto& r : others) v *= r[w];
    g[w] = v / std::pow(prior[w], exponent);
  }
  const double a = g.sum();
  if (!(a > 0.0)) fail(ErrorCode::DegenerateBelief, "peer reports give zero mass to every state");
  g /= a;
  const double arg = (my_report.array() * g.array() / prior.array()).sum();
  if (!(arg > 0.0)) fail(ErrorCode::DegenerateBelief, "report is orthogonal to the peers' implied posterior");
  return std::log(arg);
}

Vector shared_prior(const ProblemInstance& instance) {
  const Vector prior = instance.distribution(0).state_marginal();
  for (std::size_t m = 1; m < instance.num_distributions(); ++m)
    require(max_abs_diff(prior, instance.distribution(m).state_marginal()) <= kDedupTolerance, ErrorCode::Validation,
            "distribution " + std::to_string(m) + " has a different state prior");
  return prior;
}

ScoringMechanism kong_mechanism(const ProblemInstance& instance) {
  for (std::size_t i = 0; i < instance.num_agents(); ++i)
    require(instance.report_spec(i).kind == ReportKind::Posterior, ErrorCode::Validation,
            "Kong payments score posterior reports only");
  require(instance.num_agents() >= 2, ErrorCode::Arity, "Kong payments need at least two agents");
  const Vector prior = shared_prior(instance);
  auto as_vector = [](const ReportValue& v) {
    return Vector(Eigen::Map<const Vector>(v.payload.data(), static_cast<Eigen::Index>(v.payload.size())));
  };
  std::vector<PaymentTable> tables;
  const std::size_t t_count = instance.task_count();
  for (std::size_t i = 0; i < instance.num_agents(); ++i) {
    const auto radices = instance.peer_radices(i);
    std::vector<std::size_t> peers_of;
    for (std::size_t j = 0; j < instance.num_agents(); ++j)
      if (j != i) peers_of.push_back(j);
    PaymentTable table(instance.report_count(i), instance.peer_report_count(i), t_count);
    for (std::size_t a = 0; a < table.peer(); ++a) {
      const auto digits = tuple_digits(a, radices);
      std::vector<Vector> others;
      for (std::size_t k = 0; k < digits.size(); ++k) others.push_back(as_vector(instance.reports(peers_of[k]).value(digits[k])));
      for (std::size_t y = 0; y < table.own(); ++y) {
        const double p = kong_payment(prior, as_vector(instance.reports(i).value(y)), others);
        for (std::size_t b = 0; b < table.history(); ++b) table.at(y, a, b) = p;
      }
    }
    tables.push_back(std::move(table));
  }
  return ScoringMechanism::uniform(std::move(tables), t_count, "kong");
}

ScoringMechanism scoring_from_diagrams(const std::vector<PowerDiagram>& diagrams, std::size_t task_count) {
  std::vector<PaymentTable> tables;
  for (const auto& diagram : diagrams) {
    diagram.validate();
    PaymentTable table(diagram.size(), diagram.dimension(), task_count);
    for (std::size_t y = 0; y < table.own(); ++y)
      for (std::size_t a = 0; a < table.peer(); ++a)
        for (std::size_t b = 0; b < table.history(); ++b)
          table.at(y, a, b) = -diagram.sites[y][static_cast<Eigen::Index>(a)] + diagram.weights[y];
    tables.push_back(std::move(table));
  }
  return ScoringMechanism::uniform(std::move(tables), task_count, "power-diagram");
}

ScoringMechanism symmetrize(const ScoringMechanism& mech, std::size_t task_cap) {
  const std::size_t t_count = mech.task_count();
  require(t_count >= 1, ErrorCode::Validation, "task count must be positive");
  if (t_count > task_cap)
    fail(ErrorCode::ResourceLimit,
         "symmetrization over T = " + std::to_string(t_count) + " tasks exceeds the cap of " + std::to_string(task_cap));
  std::vector<PaymentTable> out;
  for (std::size_t i = 0; i < mech.num_agents(); ++i) {
    const PaymentTable& shape = mech.table(i, 0);
    PaymentTable table(shape.own(), shape.peer(), t_count);
    const std::vector<std::size_t> radices(t_count - 1, shape.peer());
    std::vector<std::size_t> order(t_count - 1);
    for (std::size_t b = 0; b < table.history(); ++b) {
      const auto digits = tuple_digits(b, radices);
      // Collect the history indices of every reordering of b.
      std::vector<std::size_t> images;
      std::iota(order.begin(), order.end(), 0);
      std::vector<std::size_t> permuted(t_count - 1);
      do {
        for (std::size_t k = 0; k < order.size(); ++k) permuted[k] = digits[order[k]];
        images.push_back(tuple_index(permuted, radices));
      } while (std::next_permutation(order.begin(), order.end()));
      const double scale = 1.0 / static_cast<double>(t_count * images.size());
      for (std::size_t y = 0; y < table.own(); ++y)
        for (std::size_t a = 0; a < table.peer(); ++a) {
          double sum = 0.0;
          for (std::size_t tau = 0; tau < t_count; ++tau)
            for (auto img : images) sum += mech.table(i, tau).at(y, a, img);
          table.at(y, a, b) = sum * scale;
        }
    }
    out.push_back(std::move(table));
  }
  return ScoringMechanism::uniform(std::move(out), t_count, mech.name() + "-symmetrized");
}

}  // namespace elicit
