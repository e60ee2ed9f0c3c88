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

#include "elicit/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <tuple>

#include "elicit/error.hpp"
#include "elicit/verifier.hpp"

namespace elicit {

Statistic Statistic::from_table(std::string name, std::vector<std::size_t> table) {
  return {std::move(name), Kind::Table, std::move(table)};
}

std::vector<std::size_t> Statistic::evaluate(std::size_t peer_count, std::size_t task_count) const {
  require(task_count >= 1, ErrorCode::Validation, "task count must be positive");
  const std::vector<std::size_t> radices(task_count - 1, peer_count);
  const std::size_t history = tuple_count(radices);
  std::vector<std::size_t> raw(history);
  switch (kind) {
    case Kind::Identity:
      for (std::size_t b = 0; b < history; ++b) raw[b] = b;
      break;
    case Kind::Constant:
      break;
    case Kind::Histogram: {
      std::map<std::vector<std::size_t>, std::size_t> ids;
      for (std::size_t b = 0; b < history; ++b) {
        auto digits = tuple_digits(b, radices);
        std::sort(digits.begin(), digits.end());
        raw[b] = ids.emplace(std::move(digits), ids.size()).first->second;
      }
      break;
    }
    case Kind::Table:
      require(table.size() == history, ErrorCode::Shape,
              "statistic '" + name + "' covers " + std::to_string(table.size()) + " histories, expected " +
                  std::to_string(history));
      raw = table;
      break;
  }
  std::map<std::size_t, std::size_t> dense;
  for (auto& v : raw) v = dense.emplace(v, dense.size()).first->second;
  return raw;
}

namespace {

struct AgentSolution {
  PaymentTable table;
  double epsilon = std::numeric_limits<double>::infinity();
  LpStatus status = LpStatus::Optimal;
  LpStats stats;
};

AgentSolution solve_agent(const ProblemInstance& instance, std::size_t agent, const Statistic& stat) {
  const std::size_t own = instance.report_count(agent);
  const std::size_t peer = instance.peer_report_count(agent);
  const std::size_t tasks = instance.task_count();
  const std::vector<std::size_t> zmap = stat.evaluate(peer, tasks);
  const std::size_t range = zmap.empty() ? 0 : *std::max_element(zmap.begin(), zmap.end()) + 1;
  const std::size_t payments = own * peer * range;
  const std::size_t eps_var = payments;
  auto var = [&](std::size_t y, std::size_t a, std::size_t z) { return (y * peer + a) * range + z; };

  // Collect distinct constraint rows first so the budget check sees the real size.
  using Key = std::tuple<std::size_t, std::size_t, std::string, std::string>;
  std::set<Key> seen;
  std::vector<std::vector<std::pair<std::size_t, double>>> rows;
  for (std::size_t m = 0; m < instance.num_distributions(); ++m) {
    const Vector marginal = instance.distribution(m).signal_marginal(agent);
    const Vector hist = tensor_power(instance.peer_report_marginal(m, agent), tasks - 1);
    Vector wz = Vector::Zero(static_cast<Eigen::Index>(range));
    for (std::size_t b = 0; b < zmap.size(); ++b) wz[static_cast<Eigen::Index>(zmap[b])] += hist[static_cast<Eigen::Index>(b)];
    const std::string wz_key = rounded_key(std::span<const double>(wz.data(), static_cast<std::size_t>(wz.size())));
    for (std::size_t s = 0; s < static_cast<std::size_t>(marginal.size()); ++s) {
      if (!(marginal[static_cast<Eigen::Index>(s)] > 0.0)) continue;
      const std::size_t truth = instance.report_index(agent, m, s);
      const Vector q = instance.report_posterior(m, agent, s);
      const std::string q_key = rounded_key(std::span<const double>(q.data(), static_cast<std::size_t>(q.size())));
      for (std::size_t y = 0; y < own; ++y) {
        if (y == truth || !seen.emplace(truth, y, q_key, wz_key).second) continue;
        std::vector<std::pair<std::size_t, double>> terms;
        for (std::size_t a = 0; a < peer; ++a)
          for (std::size_t z = 0; z < range; ++z) {
            const double w = q[static_cast<Eigen::Index>(a)] * wz[static_cast<Eigen::Index>(z)];
            if (w == 0.0) continue;
            terms.emplace_back(var(truth, a, z), w);
            terms.emplace_back(var(y, a, z), -w);
          }
        terms.emplace_back(eps_var, -1.0);
        rows.push_back(std::move(terms));
      }
    }
  }

  AgentSolution out{PaymentTable(own, peer, tasks), std::numeric_limits<double>::infinity(), LpStatus::Optimal,
                    {payments + 1, rows.size(), 0}};
  if (rows.empty()) return out;
  if ((rows.size() + 1) * (payments + 1 + rows.size()) > kSynthesisCellBudget)
    fail(ErrorCode::ResourceLimit, "synthesis LP for agent " + std::to_string(agent) + " has " +
                                       std::to_string(payments + 1) + " variables and " + std::to_string(rows.size()) +
                                       " constraints");

  LpProblem lp(payments + 1);
  for (std::size_t v = 0; v < payments; ++v) lp.set_bounds(v, -1.0, 1.0);
  lp.set_bounds(eps_var, -10.0, 10.0);
  lp.set_objective(eps_var, 1.0);
  for (auto& terms : rows) lp.add_row(std::move(terms), RowType::GreaterEqual, 0.0);
  const LpResult solved = solve_lp(lp);
  out.status = solved.status;
  out.stats.iterations = solved.iterations;
  if (solved.status != LpStatus::Optimal) {
    out.epsilon = -std::numeric_limits<double>::infinity();
    return out;
  }
  out.epsilon = solved.x[static_cast<Eigen::Index>(eps_var)];
  for (std::size_t y = 0; y < own; ++y)
    for (std::size_t a = 0; a < peer; ++a)
      for (std::size_t b = 0; b < zmap.size(); ++b)
        out.table.at(y, a, b) = solved.x[static_cast<Eigen::Index>(var(y, a, zmap[b]))];
  return out;
}

}  // namespace

SynthesisResult synthesize_with_statistic(const ProblemInstance& instance, const Statistic& stat) {
  SynthesisResult result;
  result.margin = std::numeric_limits<double>::infinity();
  result.feasible = true;
  std::vector<PaymentTable> tables;
  std::vector<PaymentTable> zeros;
  for (std::size_t i = 0; i < instance.num_agents(); ++i) {
    AgentSolution agent = solve_agent(instance, i, stat);
    result.lp_stats.push_back(agent.stats);
    result.margin = std::min(result.margin, agent.epsilon);
    if (agent.status != LpStatus::Optimal) result.status = agent.status;
    if (!(agent.epsilon > kStrictMargin)) result.feasible = false;
    zeros.emplace_back(agent.table.own(), agent.table.peer(), instance.task_count());
    tables.push_back(std::move(agent.table));
  }
  const std::string name = "synthesized-" + stat.name;
  result.mechanism = ScoringMechanism::uniform(result.feasible ? std::move(tables) : std::move(zeros),
                                               instance.task_count(), name);
  if (result.feasible && !all_certified(verify_strict(instance, result.mechanism, VerifyMode::ScoringExact)))
    throw std::logic_error("synthesized mechanism failed exact certification");
  return result;
}

SynthesisResult synthesize_scoring(const ProblemInstance& instance) {
  return synthesize_with_statistic(instance, Statistic::identity());
}

FactoredParams extract_deh(const ScoringMechanism& mech) {
  require(mech.task_uniform(), ErrorCode::Validation, "(D, e, h) extraction needs the same table on every task");
  FactoredParams params;
  params.task_count = mech.task_count();
  for (std::size_t i = 0; i < mech.num_agents(); ++i) {
    const PaymentTable& table = mech.table(i, 0);
    const auto peer = static_cast<Eigen::Index>(table.peer());
    const auto hist = static_cast<Eigen::Index>(table.history());
    std::vector<FactoredBlock> blocks;
    for (std::size_t y = 0; y < table.own(); ++y) {
      FactoredBlock block{Matrix(peer, hist), Vector::Zero(peer), Vector::Zero(hist)};
      for (Eigen::Index a = 0; a < peer; ++a)
        for (Eigen::Index b = 0; b < hist; ++b)
          block.d(a, b) = -table.at(y, static_cast<std::size_t>(a), static_cast<std::size_t>(b));
      blocks.push_back(std::move(block));
    }
    params.blocks.push_back(std::move(blocks));
  }
  return params;
}

PowerDiagram extract_power_diagram(const FactoredParams& params, const Vector& marginal, std::size_t agent) {
  require(agent < params.blocks.size(), ErrorCode::Index, "agent out of range");
  const auto& blocks = params.blocks[agent];
  require(!blocks.empty(), ErrorCode::Shape, "agent has no report blocks");
  require(marginal.size() == blocks.front().e.size(), ErrorCode::Shape, "marginal length must equal |R_-i|");
  require(marginal.minCoeff() >= 0.0 && std::abs(marginal.sum() - 1.0) <= kMassTolerance * 1e3, ErrorCode::Validation,
          "marginal must lie on the simplex");
  const Vector hist = tensor_power(marginal, params.task_count - 1);
  PowerDiagram diagram;
  for (std::size_t y = 0; y < blocks.size(); ++y) {
    const FactoredBlock& b = blocks[y];
    require(b.d.rows() == marginal.size() && b.d.cols() == hist.size() && b.h.size() == hist.size(), ErrorCode::Shape,
            "block " + std::to_string(y) + " does not match the marginal");
    diagram.sites.push_back(b.d * hist + b.e);
    diagram.weights.push_back(b.h.dot(hist));
    diagram.labels.push_back(std::to_string(y));
  }
  return diagram;
}

}  // namespace elicit
