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

#include "elicit/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "elicit/error.hpp"

namespace elicit {

namespace {

std::vector<std::size_t> full_radices(const JointDistribution& mu) {
  std::vector<std::size_t> radices{mu.num_states()};
  for (auto c : mu.signal_counts()) radices.push_back(c);
  return radices;
}

// rho^(t)(y, a): joint of agent i's report and the peers' report tuple on one task.
Matrix report_joint_under(const ProblemInstance& instance, std::size_t m, std::size_t agent,
                          const std::vector<Strategy>& profile, std::size_t task) {
  const JointDistribution& mu = instance.distribution(m);
  const auto radices = full_radices(mu);
  Matrix rho = Matrix::Zero(static_cast<Eigen::Index>(instance.report_count(agent)),
                            static_cast<Eigen::Index>(instance.peer_report_count(agent)));
  const auto& mass = mu.mass();
  for (std::size_t flat = 0; flat < mass.size(); ++flat) {
    if (mass[flat] <= 0.0) continue;
    const auto digits = tuple_digits(flat, radices);
    Vector peer = Vector::Ones(1);
    for (std::size_t j = 0; j < instance.num_agents(); ++j) {
      if (j == agent) continue;
      const Vector row = profile[j].task(task).row(static_cast<Eigen::Index>(digits[j + 1])).transpose();
      Vector next(peer.size() * row.size());
      for (Eigen::Index a = 0; a < peer.size(); ++a) next.segment(a * row.size(), row.size()) = peer[a] * row;
      peer = std::move(next);
    }
    const Vector own = profile[agent].task(task).row(static_cast<Eigen::Index>(digits[agent + 1])).transpose();
    rho.noalias() += mass[flat] * own * peer.transpose();
  }
  return rho;
}

void check_profile(const ProblemInstance& instance, const std::vector<Strategy>& profile) {
  require(profile.size() == instance.num_agents(), ErrorCode::Shape, "profile needs one strategy per agent");
  for (std::size_t j = 0; j < profile.size(); ++j) {
    require(profile[j].agent == j, ErrorCode::Shape, "profile strategies must be ordered by agent");
    profile[j].validate(instance);
  }
}

Strategy truthful_with_override(const Strategy& truth, std::size_t tasks) {
  Strategy s = truth;
  s.per_task.assign(tasks, truth.per_task.front());
  return s;
}

Witness scoring_exact_witness(const ProblemInstance& instance, std::size_t m, std::size_t agent,
                              const std::vector<Matrix>& expectations, double& margin, std::size_t& checked) {
  const Vector marginal = instance.distribution(m).signal_marginal(agent);
  const std::size_t reports = instance.report_count(agent);
  const std::size_t tasks = expectations.size();
  const Strategy truth = Strategy::truthful(instance, m, agent);
  Witness witness{truthful_with_override(truth, tasks), 0.0};
  margin = std::numeric_limits<double>::infinity();
  checked = 0;
  double best_single = -std::numeric_limits<double>::infinity();
  std::size_t best_t = 0, best_s = 0, best_y = 0;
  bool any_positive = false;
  for (std::size_t t = 0; t < tasks; ++t) {
    for (std::size_t s = 0; s < static_cast<std::size_t>(marginal.size()); ++s) {
      const double w = marginal[static_cast<Eigen::Index>(s)];
      if (w <= 0.0) continue;
      const std::size_t r = instance.report_index(agent, m, s);
      const auto row = expectations[t].row(static_cast<Eigen::Index>(s));
      double best_gain = -std::numeric_limits<double>::infinity();
      std::size_t best_here = r;
      for (std::size_t y = 0; y < reports; ++y) {
        if (y == r) continue;
        ++checked;
        const double gap = row[static_cast<Eigen::Index>(r)] - row[static_cast<Eigen::Index>(y)];
        margin = std::min(margin, gap);
        const double gain = -gap * w;
        if (gain > best_gain) {
          best_gain = gain;
          best_here = y;
        }
      }
      if (best_here == r) continue;
      if (best_gain > best_single) {
        best_single = best_gain;
        best_t = t;
        best_s = s;
        best_y = best_here;
      }
      if (best_gain > 0.0) {
        any_positive = true;
        Matrix& sigma = witness.strategy.per_task[t];
        sigma.row(static_cast<Eigen::Index>(s)).setZero();
        sigma(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(best_here)) = 1.0;
        witness.gain += best_gain;
      }
    }
  }
  if (!any_positive) {
    if (!std::isfinite(best_single)) {
      witness.gain = -std::numeric_limits<double>::infinity();
      return witness;
    }
    Matrix& sigma = witness.strategy.per_task[best_t];
    sigma.row(static_cast<Eigen::Index>(best_s)).setZero();
    sigma(static_cast<Eigen::Index>(best_s), static_cast<Eigen::Index>(best_y)) = 1.0;
    witness.gain = best_single;
  }
  return witness;
}

struct ConsistentSearch {
  Witness best;
  std::size_t checked = 0;
};

ConsistentSearch consistent_search(const ProblemInstance& instance, std::size_t m, const ScoringMechanism& mech,
                                   std::size_t agent, const VerifyOptions& options) {
  std::vector<Strategy> profile = truthful_profile(instance, m);
  const double truth_value = expected_payment(instance, m, mech, agent, profile, options.budget);
  const Strategy truth = profile[agent];
  const Vector marginal = instance.distribution(m).signal_marginal(agent);
  const std::size_t signals = static_cast<std::size_t>(marginal.size());
  const std::size_t reports = instance.report_count(agent);

  ConsistentSearch out;
  out.best = {truth, -std::numeric_limits<double>::infinity()};
  auto consider = [&](const Matrix& sigma) {
    profile[agent].per_task = {sigma};
    const double gain = expected_payment(instance, m, mech, agent, profile, options.budget) - truth_value;
    ++out.checked;
    if (gain > out.best.gain) out.best = {profile[agent], gain};
  };

  std::vector<std::size_t> live;
  for (std::size_t s = 0; s < signals; ++s)
    if (marginal[static_cast<Eigen::Index>(s)] > 0.0) live.push_back(s);
  const double count = std::pow(static_cast<double>(reports), static_cast<double>(live.size()));
  if (count > static_cast<double>(options.budget))
    fail(ErrorCode::ResourceLimit, "too many deterministic deviations to enumerate");

  std::vector<std::size_t> choice(live.size(), 0);
  while (true) {
    Matrix sigma = truth.per_task.front();
    bool differs = false;
    for (std::size_t k = 0; k < live.size(); ++k) {
      const auto s = static_cast<Eigen::Index>(live[k]);
      if (choice[k] != instance.report_index(agent, m, live[k])) differs = true;
      sigma.row(s).setZero();
      sigma(s, static_cast<Eigen::Index>(choice[k])) = 1.0;
    }
    if (differs) consider(sigma);
    std::size_t k = live.size();
    while (k > 0 && ++choice[k - 1] == reports) choice[--k] = 0;
    if (k == 0) break;
  }

  if (reports > 1) {
    std::mt19937_64 rng(options.seed ^ (0x9e3779b97f4a7c15ULL * (m + 1)) ^ (0xbf58476d1ce4e5b9ULL * (agent + 1)));
    for (std::size_t n = 0; n < options.random_deviations; ++n) {
      Matrix sigma = truth.per_task.front();
      for (auto s : live) {
        double total = 0.0;
        for (std::size_t y = 0; y < reports; ++y) {
          const double e = -std::log(1.0 - uniform01(rng()));
          sigma(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(y)) = e;
          total += e;
        }
        sigma.row(static_cast<Eigen::Index>(s)) /= total;
      }
      consider(sigma);
    }
  }
  return out;
}

}  // namespace

Strategy Strategy::truthful(const ProblemInstance& instance, std::size_t m, std::size_t agent) {
  const std::size_t signals = instance.distribution(m).num_signals(agent);
  Matrix sigma = Matrix::Zero(static_cast<Eigen::Index>(signals), static_cast<Eigen::Index>(instance.report_count(agent)));
  for (std::size_t s = 0; s < signals; ++s) {
    const std::size_t r = instance.report_index(agent, m, s);
    sigma(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(r == kNoReport ? 0 : r)) = 1.0;
  }
  return Strategy{agent, {sigma}};
}

void Strategy::validate(const ProblemInstance& instance) const {
  require(agent < instance.num_agents(), ErrorCode::Index, "strategy agent out of range");
  require(per_task.size() == 1 || per_task.size() == instance.task_count(), ErrorCode::Shape,
          "strategy needs one matrix or one per task");
  const auto signals = static_cast<Eigen::Index>(instance.distribution(0).num_signals(agent));
  const auto reports = static_cast<Eigen::Index>(instance.report_count(agent));
  for (const auto& sigma : per_task) {
    require(sigma.rows() == signals && sigma.cols() == reports, ErrorCode::Shape,
            "strategy matrix must be |S_i| x |R_i|");
    for (Eigen::Index s = 0; s < signals; ++s) {
      require(sigma.row(s).minCoeff() >= 0.0, ErrorCode::Validation, "strategy probabilities must be nonnegative");
      require(std::abs(sigma.row(s).sum() - 1.0) <= kMassTolerance, ErrorCode::Validation,
              "strategy row does not sum to one");
    }
  }
}

std::vector<Strategy> truthful_profile(const ProblemInstance& instance, std::size_t m) {
  std::vector<Strategy> profile;
  for (std::size_t j = 0; j < instance.num_agents(); ++j) profile.push_back(Strategy::truthful(instance, m, j));
  return profile;
}

std::string_view to_string(VerifyMode mode) {
  return mode == VerifyMode::ScoringExact ? "scoring-exact" : "consistent-general";
}

std::string_view to_string(VerdictStatus status) {
  switch (status) {
    case VerdictStatus::CertifiedStrict:
      return "CertifiedStrict";
    case VerdictStatus::Refuted:
      return "Refuted";
    case VerdictStatus::PassedChecks:
      return "PassedChecks";
  }
  return "unknown";
}

double expected_payment(const ProblemInstance& instance, std::size_t m, const ScoringMechanism& mech,
                        std::size_t agent, const std::vector<Strategy>& profile, std::size_t budget) {
  mech.check_compatible(instance);
  check_profile(instance, profile);
  const std::size_t tasks = instance.task_count();
  struct Entry {
    std::size_t y, a;
    double p;
  };
  std::vector<std::vector<Entry>> support(tasks);
  double terms = 1.0;
  for (std::size_t t = 0; t < tasks; ++t) {
    const Matrix rho = report_joint_under(instance, m, agent, profile, t);
    for (Eigen::Index y = 0; y < rho.rows(); ++y)
      for (Eigen::Index a = 0; a < rho.cols(); ++a)
        if (rho(y, a) > 0.0) support[t].push_back({static_cast<std::size_t>(y), static_cast<std::size_t>(a), rho(y, a)});
    terms *= static_cast<double>(support[t].size());
  }
  if (terms > static_cast<double>(budget))
    fail(ErrorCode::ResourceLimit, "expected payment needs " + std::to_string(static_cast<long long>(terms)) +
                                       " terms, budget is " + std::to_string(budget));
  std::vector<std::size_t> pick(tasks, 0), own(tasks), peers(tasks);
  double total = 0.0;
  while (true) {
    double p = 1.0;
    for (std::size_t t = 0; t < tasks; ++t) {
      const Entry& e = support[t][pick[t]];
      p *= e.p;
      own[t] = e.y;
      peers[t] = e.a;
    }
    total += p * mech.total_payment(agent, own, peers);
    std::size_t t = tasks;
    while (t > 0 && ++pick[t - 1] == support[t - 1].size()) pick[--t] = 0;
    if (t == 0) break;
  }
  return total;
}

std::vector<Matrix> conditional_payments(const ProblemInstance& instance, std::size_t m, const ScoringMechanism& mech,
                                         std::size_t agent) {
  mech.check_compatible(instance);
  const Vector u = instance.peer_report_marginal(m, agent);
  const std::size_t tasks = instance.task_count();
  const Vector hist = tensor_power(u, tasks - 1);
  const JointDistribution& mu = instance.distribution(m);
  const Vector marginal = mu.signal_marginal(agent);
  std::vector<Vector> posteriors(static_cast<std::size_t>(marginal.size()));
  for (Eigen::Index s = 0; s < marginal.size(); ++s)
    if (marginal[s] > 0.0) posteriors[static_cast<std::size_t>(s)] = instance.report_posterior(m, agent, static_cast<std::size_t>(s));

  std::vector<Matrix> out;
  for (std::size_t t = 0; t < tasks; ++t) {
    const PaymentTable& table = mech.table(agent, t);
    Matrix reduced(static_cast<Eigen::Index>(table.own()), static_cast<Eigen::Index>(table.peer()));
    for (std::size_t y = 0; y < table.own(); ++y)
      for (std::size_t a = 0; a < table.peer(); ++a) {
        double v = 0.0;
        for (std::size_t b = 0; b < table.history(); ++b) v += hist[static_cast<Eigen::Index>(b)] * table.at(y, a, b);
        reduced(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(a)) = v;
      }
    Matrix e(marginal.size(), reduced.rows());
    for (Eigen::Index s = 0; s < marginal.size(); ++s) {
      if (marginal[s] > 0.0)
        e.row(s) = (reduced * posteriors[static_cast<std::size_t>(s)]).transpose();
      else
        e.row(s).setConstant(std::numeric_limits<double>::quiet_NaN());
    }
    out.push_back(std::move(e));
  }
  return out;
}

Verdict verify_one(const ProblemInstance& instance, std::size_t m, const ScoringMechanism& mech, std::size_t agent,
                   VerifyMode mode, const VerifyOptions& options) {
  Verdict verdict;
  verdict.distribution = m;
  verdict.agent = agent;
  if (mode == VerifyMode::ScoringExact) {
    const auto expectations = conditional_payments(instance, m, mech, agent);
    Witness witness = scoring_exact_witness(instance, m, agent, expectations, verdict.margin, verdict.deviations_checked);
    if (verdict.margin > kStrictGap) {
      verdict.status = VerdictStatus::CertifiedStrict;
    } else {
      verdict.status = VerdictStatus::Refuted;
      verdict.witness = std::move(witness);
    }
    return verdict;
  }
  mech.check_compatible(instance);
  ConsistentSearch search = consistent_search(instance, m, mech, agent, options);
  verdict.deviations_checked = search.checked;
  verdict.margin = -search.best.gain;
  if (search.best.gain >= kRefuteGain) {
    verdict.status = VerdictStatus::Refuted;
    verdict.witness = std::move(search.best);
  } else {
    verdict.status = VerdictStatus::PassedChecks;
  }
  return verdict;
}

std::vector<Verdict> verify_strict(const ProblemInstance& instance, const ScoringMechanism& mech, VerifyMode mode,
                                   const VerifyOptions& options) {
  mech.check_compatible(instance);
  std::vector<Verdict> out;
  for (std::size_t m = 0; m < instance.num_distributions(); ++m)
    for (std::size_t i = 0; i < instance.num_agents(); ++i) out.push_back(verify_one(instance, m, mech, i, mode, options));
  return out;
}

bool all_certified(const std::vector<Verdict>& verdicts) {
  return std::all_of(verdicts.begin(), verdicts.end(),
                     [](const Verdict& v) { return v.status == VerdictStatus::CertifiedStrict; });
}

bool any_refuted(const std::vector<Verdict>& verdicts) {
  return std::any_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.status == VerdictStatus::Refuted; });
}

Witness best_deviation(const ProblemInstance& instance, std::size_t m, const ScoringMechanism& mech, std::size_t agent,
                       VerifyMode mode, const VerifyOptions& options) {
  if (mode == VerifyMode::ScoringExact) {
    const auto expectations = conditional_payments(instance, m, mech, agent);
    double margin = 0.0;
    std::size_t checked = 0;
    return scoring_exact_witness(instance, m, agent, expectations, margin, checked);
  }
  mech.check_compatible(instance);
  return consistent_search(instance, m, mech, agent, options).best;
}

SimulationResult simulate(const ProblemInstance& instance, std::size_t m, const ScoringMechanism& mech,
                          const std::vector<Strategy>& profile, std::size_t trials, std::uint64_t seed) {
  require(trials >= 1, ErrorCode::Validation, "need at least one trial");
  mech.check_compatible(instance);
  check_profile(instance, profile);
  const JointDistribution& mu = instance.distribution(m);
  const auto radices = full_radices(mu);
  std::vector<double> cdf(mu.mass().size());
  double running = 0.0;
  for (std::size_t k = 0; k < cdf.size(); ++k) cdf[k] = running += mu.mass()[k];
  const std::size_t n = instance.num_agents();
  const std::size_t tasks = instance.task_count();

  auto draw_index = [](double u, const double* cum, std::size_t count) {
    const double* it = std::upper_bound(cum, cum + count, u * cum[count - 1]);
    std::size_t k = static_cast<std::size_t>(it - cum);
    return std::min(k, count - 1);
  };

  std::mt19937_64 rng(seed);
  std::vector<std::vector<std::size_t>> reports(n, std::vector<std::size_t>(tasks));
  std::vector<double> mean(n, 0.0), m2(n, 0.0);
  std::vector<std::size_t> own(tasks), peers(tasks);
  std::vector<double> row_cdf;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    for (std::size_t t = 0; t < tasks; ++t) {
      const std::size_t cell = draw_index(uniform01(rng()), cdf.data(), cdf.size());
      const auto digits = tuple_digits(cell, radices);
      for (std::size_t j = 0; j < n; ++j) {
        const Matrix& sigma = profile[j].task(t);
        const auto row = sigma.row(static_cast<Eigen::Index>(digits[j + 1]));
        row_cdf.resize(static_cast<std::size_t>(row.size()));
        double acc = 0.0;
        for (Eigen::Index y = 0; y < row.size(); ++y) row_cdf[static_cast<std::size_t>(y)] = acc += row[y];
        reports[j][t] = draw_index(uniform01(rng()), row_cdf.data(), row_cdf.size());
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      const auto peer_radix = instance.peer_radices(i);
      std::vector<std::size_t> tuple;
      for (std::size_t t = 0; t < tasks; ++t) {
        own[t] = reports[i][t];
        tuple.clear();
        for (std::size_t j = 0; j < n; ++j)
          if (j != i) tuple.push_back(reports[j][t]);
        peers[t] = tuple_index(tuple, peer_radix);
      }
      const double x = mech.total_payment(i, own, peers);
      const double delta = x - mean[i];
      mean[i] += delta / static_cast<double>(trial + 1);
      m2[i] += delta * (x - mean[i]);
    }
  }
  SimulationResult result;
  result.trials = trials;
  result.mean = mean;
  for (std::size_t i = 0; i < n; ++i) {
    const double var = trials > 1 ? m2[i] / static_cast<double>(trials - 1) : 0.0;
    result.std_error.push_back(std::sqrt(var / static_cast<double>(trials)));
  }
  return result;
}

}  // namespace elicit
