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

#include "elicit/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>

#include "elicit/error.hpp"
#include "elicit/lp.hpp"
#include "elicit/verifier.hpp"

namespace elicit {

std::size_t numerical_rank(const Matrix& m, double relative_tolerance) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector s = svd.singularValues();
  if (s.size() == 0 || s[0] <= 0.0) return 0;
  std::size_t rank = 0;
  for (Eigen::Index k = 0; k < s.size(); ++k)
    if (s[k] > relative_tolerance * s[0]) ++rank;
  return rank;
}

std::string_view to_string(CheckOutcome outcome) {
  switch (outcome) {
    case CheckOutcome::Pass:
      return "pass";
    case CheckOutcome::Violated:
      return "violated";
    case CheckOutcome::Skipped:
      return "skipped";
  }
  return "unknown";
}

namespace {

std::optional<CollisionWitness> find_collision(const ProblemInstance& instance, Grouping grouping) {
  for (std::size_t i = 0; i < instance.num_agents(); ++i) {
    const auto sets = posterior_sets(instance, i, grouping);
    for (std::size_t x = 0; x < sets.size(); ++x)
      for (std::size_t y = x + 1; y < sets.size(); ++y) {
        if (sets[x].marginal_key != sets[y].marginal_key || sets[x].report == sets[y].report) continue;
        for (const auto& a : sets[x].members)
          for (const auto& b : sets[y].members) {
            const double d = max_abs_diff(a.posterior, b.posterior);
            if (d <= kDedupTolerance)
              return CollisionWitness{i, sets[x].report, sets[y].report, sets[x].marginal_key, a, b, d};
          }
      }
  }
  return std::nullopt;
}

std::string describe(const CollisionWitness& w) {
  return "agent " + std::to_string(w.agent) + ": reports " + std::to_string(w.report_a) + " and " +
         std::to_string(w.report_b) + " share a posterior (distributions " + std::to_string(w.first.distribution) +
         "/" + std::to_string(w.second.distribution) + ", signals " + std::to_string(w.first.signal) + "/" +
         std::to_string(w.second.signal) + ")";
}

CheckReport collision_report(std::string name, const std::optional<CollisionWitness>& hit) {
  CheckReport report{std::move(name), CheckOutcome::Pass, "no colliding posteriors", {}};
  if (hit) {
    report.outcome = CheckOutcome::Violated;
    report.detail = describe(*hit);
    report.witness = *hit;
  }
  return report;
}

// Point in conv(a) and conv(b), as mixture weights, when one exists.
std::optional<std::pair<Vector, Vector>> hull_intersection(const std::vector<PosteriorMember>& a,
                                                           const std::vector<PosteriorMember>& b) {
  const std::size_t na = a.size(), nb = b.size();
  const auto dim = a.front().posterior.size();
  LpProblem lp(na + nb);
  std::vector<std::pair<std::size_t, double>> sum_a, sum_b;
  for (std::size_t k = 0; k < na; ++k) sum_a.emplace_back(k, 1.0);
  for (std::size_t k = 0; k < nb; ++k) sum_b.emplace_back(na + k, 1.0);
  lp.add_row(sum_a, RowType::Equal, 1.0);
  lp.add_row(sum_b, RowType::Equal, 1.0);
  for (Eigen::Index c = 0; c < dim; ++c) {
    std::vector<std::pair<std::size_t, double>> terms;
    for (std::size_t k = 0; k < na; ++k) terms.emplace_back(k, a[k].posterior[c]);
    for (std::size_t k = 0; k < nb; ++k) terms.emplace_back(na + k, -b[k].posterior[c]);
    lp.add_row(std::move(terms), RowType::Equal, 0.0);
  }
  const LpResult solved = solve_lp(lp);
  if (solved.status != LpStatus::Optimal) return std::nullopt;
  return std::make_pair(Vector(solved.x.head(static_cast<Eigen::Index>(na))),
                        Vector(solved.x.tail(static_cast<Eigen::Index>(nb))));
}

// Backtracking search for pi with row r of A_target equal to row pi[r] of A_source.
bool find_matching(const Matrix& source, const Matrix& target, std::vector<std::size_t>& pi,
                   std::vector<bool>& used, std::size_t r, const std::vector<bool>& live_source) {
  const auto n = static_cast<std::size_t>(source.rows());
  if (r == n) {
    for (std::size_t k = 0; k < n; ++k)
      if (pi[k] != k && live_source[pi[k]]) return true;
    return false;
  }
  for (std::size_t c = 0; c < n; ++c) {
    if (used[c]) continue;
    const double d = (target.row(static_cast<Eigen::Index>(r)) - source.row(static_cast<Eigen::Index>(c))).cwiseAbs().maxCoeff();
    if (d > kDedupTolerance) continue;
    used[c] = true;
    pi[r] = c;
    if (find_matching(source, target, pi, used, r + 1, live_source)) return true;
    used[c] = false;
  }
  return false;
}

Vector null_vector(const Matrix& m, std::size_t rank) {
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  Vector v = svd.matrixV().col(static_cast<Eigen::Index>(rank));
  return v / v.cwiseAbs().maxCoeff();
}

// Moves agent row s of the likelihood so that the posterior at s shifts by
// delta * direction (direction sums to zero), compensating the other rows of
// each column proportionally. Returns nothing when the result is invalid.
std::optional<Matrix> shift_posterior(const Vector& prior, const Matrix& q, std::size_t s, const Vector& direction,
                                      double delta) {
  const auto row = static_cast<Eigen::Index>(s);
  const double c = prior.dot(q.row(row).transpose());
  Matrix out = q;
  for (Eigen::Index w = 0; w < q.cols(); ++w) {
    const double add = delta * c * direction[w] / prior[w];
    const double rest = 1.0 - q(row, w);
    if (rest <= 1e-15) {
      if (std::abs(add) > 0.0) return std::nullopt;
      continue;
    }
    out(row, w) = q(row, w) + add;
    for (Eigen::Index r = 0; r < q.rows(); ++r)
      if (r != row) out(r, w) = q(r, w) * (1.0 - add / rest);
  }
  if (out.minCoeff() < 0.0 || out.maxCoeff() > 1.0) return std::nullopt;
  return out;
}

Vector posterior_from(const Vector& prior, const Matrix& q, std::size_t s) {
  Vector p = prior.cwiseProduct(q.row(static_cast<Eigen::Index>(s)).transpose());
  return p / p.sum();
}

}  // namespace

CheckReport check_stochastic_relevance(const ProblemInstance& instance) {
  return collision_report("check_stochastic_relevance", find_collision(instance, Grouping::None));
}

CheckReport check_marginal_relevance(const ProblemInstance& instance) {
  const auto within = find_collision(instance, Grouping::ByMarginal);
  if (within && !find_collision(instance, Grouping::None))
    throw std::logic_error("bucketed collision without a global collision");
  return collision_report("check_marginal_relevance", within);
}

CheckReport check_convex_separation(const ProblemInstance& instance) {
  CheckReport report{"check_convex_separation", CheckOutcome::Pass, "all hull pairs are disjoint", {}};
  for (std::size_t i = 0; i < instance.num_agents(); ++i) {
    const auto sets = posterior_sets(instance, i, Grouping::ByMarginal);
    for (std::size_t x = 0; x < sets.size(); ++x)
      for (std::size_t y = x + 1; y < sets.size(); ++y) {
        if (sets[x].marginal_key != sets[y].marginal_key || sets[x].report == sets[y].report) continue;
        const auto hit = hull_intersection(sets[x].members, sets[y].members);
        if (!hit) continue;
        ConvexWitness w{i, sets[x].report, sets[y].report, sets[x].marginal_key, sets[x].members, sets[y].members,
                        hit->first, hit->second, Vector::Zero(sets[x].members.front().posterior.size())};
        for (std::size_t k = 0; k < w.members_a.size(); ++k)
          w.point += w.beta[static_cast<Eigen::Index>(k)] * w.members_a[k].posterior;
        report.outcome = CheckOutcome::Violated;
        report.detail = "agent " + std::to_string(i) + ": hulls of reports " + std::to_string(w.report_a) + " and " +
                        std::to_string(w.report_b) + " intersect in bucket " + w.marginal_key;
        report.witness = std::move(w);
        return report;
      }
  }
  return report;
}

CheckReport check_permutation(const ProblemInstance& instance, std::size_t cap) {
  CheckReport report{"check_permutation", CheckOutcome::Pass, "no report permutation maps M into itself", {}};
  for (std::size_t i = 0; i < instance.num_agents(); ++i)
    if (instance.report_count(i) > cap)
      fail(ErrorCode::ResourceLimit, "agent " + std::to_string(i) + " has " + std::to_string(instance.report_count(i)) +
                                         " reports; permutation check is capped at " + std::to_string(cap));
  for (std::size_t i = 0; i < instance.num_agents(); ++i) {
    std::vector<Matrix> joints;
    for (std::size_t m = 0; m < instance.num_distributions(); ++m) joints.push_back(instance.report_joint(m, i));
    const std::size_t n = instance.report_count(i);
    for (std::size_t m = 0; m < joints.size(); ++m) {
      std::vector<bool> live(n);
      for (std::size_t r = 0; r < n; ++r) live[r] = joints[m].row(static_cast<Eigen::Index>(r)).sum() > 0.0;
      for (std::size_t partner = 0; partner < joints.size(); ++partner) {
        std::vector<std::size_t> pi(n);
        std::vector<bool> used(n, false);
        if (!find_matching(joints[m], joints[partner], pi, used, 0, live)) continue;
        Matrix permuted(joints[m].rows(), joints[m].cols());
        for (std::size_t r = 0; r < n; ++r) permuted.row(static_cast<Eigen::Index>(r)) = joints[m].row(static_cast<Eigen::Index>(pi[r]));
        const double residual = (permuted - joints[partner]).cwiseAbs().maxCoeff();
        report.outcome = CheckOutcome::Violated;
        report.detail = "agent " + std::to_string(i) + ": permuting reports of distribution " + std::to_string(m) +
                        " reproduces distribution " + std::to_string(partner);
        report.witness = PermutationWitness{m, partner, i, pi, residual};
        return report;
      }
    }
  }
  return report;
}

CheckReport check_rank_posterior(const ProblemInstance& instance) {
  CheckReport report{"check_rank_posterior", CheckOutcome::Pass, "every peer likelihood has full column rank", {}};
  for (std::size_t m = 0; m < instance.num_distributions(); ++m) {
    const auto& model = instance.factorization(m);
    if (!model)
      fail(ErrorCode::MissingFactorization, "distribution " + std::to_string(m) + " has no likelihood factorization");
    for (std::size_t i = 0; i < instance.num_agents(); ++i) {
      const Matrix p = model->peer_likelihood(i);
      const std::size_t rank = numerical_rank(p);
      const auto omega = static_cast<std::size_t>(p.cols());
      if (rank >= omega) continue;
      Eigen::JacobiSVD<Matrix> svd(p);
      report.outcome = CheckOutcome::Violated;
      report.detail = "distribution " + std::to_string(m) + ", agent " + std::to_string(i) + ": rank " +
                      std::to_string(rank) + " < " + std::to_string(omega);
      report.witness = RankWitness{m, i, rank, omega, svd.singularValues(), null_vector(p, rank)};
      return report;
    }
  }
  return report;
}

CheckReport check_linear_property_rank(const Matrix& g, std::size_t omega_count) {
  require(static_cast<std::size_t>(g.cols()) == omega_count && g.rows() >= 1, ErrorCode::Shape,
          "G must be L x |Omega|");
  Matrix stacked(g.rows() + 1, g.cols());
  stacked << g, Matrix::Ones(1, g.cols());
  const std::size_t rank = numerical_rank(stacked);
  CheckReport report{"check_linear_property_rank", CheckOutcome::Pass,
                     "[G; 1] has rank " + std::to_string(rank) + " = |Omega|", {}};
  if (rank < omega_count) {
    Eigen::JacobiSVD<Matrix> svd(stacked);
    report.outcome = CheckOutcome::Violated;
    report.detail = "[G; 1] has rank " + std::to_string(rank) + " < " + std::to_string(omega_count);
    report.witness = RankWitness{0, 0, rank, omega_count, svd.singularValues(), null_vector(stacked, rank)};
  }
  return report;
}

std::vector<CheckReport> run_all_checks(const ProblemInstance& instance) {
  std::vector<CheckReport> out;
  out.push_back(check_stochastic_relevance(instance));
  out.push_back(check_marginal_relevance(instance));
  out.push_back(check_convex_separation(instance));
  try {
    out.push_back(check_permutation(instance));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ResourceLimit) throw;
    out.push_back({"check_permutation", CheckOutcome::Skipped, e.what(), {}});
  }
  if (instance.fully_factored())
    out.push_back(check_rank_posterior(instance));
  else
    out.push_back({"check_rank_posterior", CheckOutcome::Skipped, "no likelihood factorization", {}});
  bool any_linear = false;
  for (std::size_t i = 0; i < instance.num_agents(); ++i) {
    const ReportSpec& spec = instance.report_spec(i);
    if (spec.kind != ReportKind::Linear) continue;
    any_linear = true;
    CheckReport r = check_linear_property_rank(spec.linear, instance.distribution(0).num_states());
    r.detail = "agent " + std::to_string(i) + ": " + r.detail;
    out.push_back(std::move(r));
  }
  if (!any_linear) out.push_back({"check_linear_property_rank", CheckOutcome::Skipped, "no linear reports", {}});
  return out;
}

BallResult ball_epsilon(const JointDistribution& lambda) {
  for (double v : lambda.mass())
    if (!(v > 0.0)) fail(ErrorCode::NotApplicable, "lambda lacks full support");
  ProblemInstance instance = ProblemInstance::uniform({lambda}, ReportSpec::identity(), 1);
  if (check_stochastic_relevance(instance).violated())
    fail(ErrorCode::NotApplicable, "lambda is not stochastically relevant");

  std::vector<PowerDiagram> diagrams;
  std::vector<double> eps0;
  double epsilon = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < instance.num_agents(); ++i) {
    const std::size_t reports = instance.report_count(i);
    const Vector marginal = lambda.signal_marginal(i);
    std::vector<Vector> posteriors(reports);
    std::map<std::string, std::vector<Vector>> labeled;
    for (std::size_t s = 0; s < reports; ++s) {
      posteriors[s] = instance.report_posterior(0, i, s);
      labeled[instance.reports(i).key(s)].push_back(posteriors[s]);
    }
    const FitResult fit = fit_power_diagram(labeled);
    if (!fit.feasible) fail(ErrorCode::NotApplicable, "no strictly separating diagram for agent " + std::to_string(i));
    PowerDiagram ordered;
    for (std::size_t s = 0; s < reports; ++s) {
      const auto& key = instance.reports(i).key(s);
      const auto pos = static_cast<std::size_t>(
          std::find(fit.diagram.labels.begin(), fit.diagram.labels.end(), key) - fit.diagram.labels.begin());
      ordered.sites.push_back(fit.diagram.sites[pos]);
      ordered.weights.push_back(fit.diagram.weights[pos]);
      ordered.labels.push_back(key);
    }
    // Smallest gap between the truthful cell and any other at lambda's posteriors.
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < reports; ++r) {
      const double own = power_distance(posteriors[r], ordered.sites[r], ordered.weights[r]);
      for (std::size_t q = 0; q < reports; ++q)
        if (q != r) gap = std::min(gap, power_distance(posteriors[r], ordered.sites[q], ordered.weights[q]) - own);
    }
    const double e0 = reports > 1 ? gap / 3.0 : std::numeric_limits<double>::infinity();
    eps0.push_back(e0);
    for (std::size_t r = 0; r < reports; ++r) {
      const double weight = marginal[static_cast<Eigen::Index>(r)];
      double denom = ordered.sites[r].cwiseAbs().maxCoeff();
      for (std::size_t q = 0; q < reports; ++q)
        denom = std::max(denom, (ordered.sites[q] - ordered.sites[r]).cwiseAbs().maxCoeff());
      epsilon = std::min(epsilon, weight / 2.0);
      if (denom > 0.0 && std::isfinite(e0)) epsilon = std::min(epsilon, weight * weight * e0 / denom);
    }
    diagrams.push_back(std::move(ordered));
  }
  ScoringMechanism mech = scoring_from_diagrams(diagrams, 1);
  return BallResult{epsilon, std::move(eps0), std::move(diagrams), std::move(mech), std::move(instance)};
}

std::vector<JointDistribution> sample_ball(const JointDistribution& lambda, double radius, std::size_t count,
                                          std::uint64_t seed) {
  require(radius >= 0.0, ErrorCode::Validation, "ball radius must be nonnegative");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const auto& base = lambda.mass();
  std::vector<JointDistribution> out;
  std::vector<double> dir(base.size());
  std::size_t attempts = 0;
  while (out.size() < count) {
    if (++attempts > 1000 * (count + 1)) fail(ErrorCode::DegenerateConstruction, "ball sampling keeps leaving the simplex");
    double mean = 0.0;
    for (auto& d : dir) mean += d = normal(rng);
    mean /= static_cast<double>(dir.size());
    double l1 = 0.0;
    for (auto& d : dir) l1 += std::abs(d -= mean);
    if (l1 <= 0.0) continue;
    const double scale = uniform01(rng()) * radius / l1;
    std::vector<double> mass(base.size());
    bool ok = true;
    for (std::size_t k = 0; k < base.size(); ++k) {
      mass[k] = base[k] + scale * dir[k];
      if (mass[k] < 0.0) ok = false;
    }
    if (!ok) continue;
    std::vector<std::size_t> counts(lambda.signal_counts().begin(), lambda.signal_counts().end());
    out.push_back(JointDistribution::from_weights(lambda.num_states(), counts, mass));
  }
  return out;
}

LinearCounterexample gen_linear_counterexample(const Vector& prior, const std::vector<Matrix>& likelihoods,
                                               const Matrix& g, double delta) {
  require(likelihoods.size() == 2, ErrorCode::Arity, "the linear-property construction needs two agents");
  ConditionalModel star{prior, likelihoods};
  star.validate();
  require(prior.minCoeff() > 0.0, ErrorCode::Validation, "prior must be strictly positive");
  const auto omega = static_cast<std::size_t>(prior.size());
  if (!check_linear_property_rank(g, omega).violated())
    fail(ErrorCode::NotApplicable, "[G; 1] has full rank; the property is equivalent to the posterior");

  // beta: a centered row of G, so 1^T beta = 0 and G beta != 0.
  Vector beta;
  double best_norm = 0.0;
  for (Eigen::Index l = 0; l < g.rows(); ++l) {
    Vector row = g.row(l).transpose();
    row.array() -= row.mean();
    if (row.cwiseAbs().maxCoeff() > best_norm) {
      best_norm = row.cwiseAbs().maxCoeff();
      beta = row;
    }
  }
  if (best_norm <= 1e-12) fail(ErrorCode::NotApplicable, "the property is constant");
  beta /= best_norm;

  Matrix stacked(g.rows() + 1, g.cols());
  stacked << g, Matrix::Ones(1, g.cols());
  const Matrix weighted = stacked * prior.asDiagonal();
  const Vector alpha = null_vector(weighted, numerical_rank(weighted));

  // Pick s_1* with the largest |alpha^T mu*(w|s_1)|; nudge Q_1 when all vanish.
  std::size_t s_star = 0;
  double best = 0.0;
  for (int attempt = 0; attempt < 5 && best <= 1e-9; ++attempt) {
    if (attempt > 0) {
      Matrix mix(star.likelihoods[0].rows(), star.likelihoods[0].cols());
      for (Eigen::Index s = 0; s < mix.rows(); ++s)
        for (Eigen::Index w = 0; w < mix.cols(); ++w) mix(s, w) = 1.0 + static_cast<double>((s + 1) * (w + 2) % 5);
      for (Eigen::Index w = 0; w < mix.cols(); ++w) mix.col(w) /= mix.col(w).sum();
      star.likelihoods[0] = 0.9 * star.likelihoods[0] + 0.1 * mix;
    }
    for (Eigen::Index s = 0; s < star.likelihoods[0].rows(); ++s) {
      if (prior.dot(star.likelihoods[0].row(s).transpose()) <= 0.0) continue;
      const double v = std::abs(alpha.dot(posterior_from(prior, star.likelihoods[0], static_cast<std::size_t>(s))));
      if (v > best) {
        best = v;
        s_star = static_cast<std::size_t>(s);
      }
    }
  }
  if (best <= 1e-9) fail(ErrorCode::DegenerateConstruction, "alpha is orthogonal to every posterior of agent 1");

  const Vector post_star = posterior_from(prior, star.likelihoods[0], s_star);
  for (double d = delta; d >= kDeltaFloor; d /= 2.0) {
    const auto q1 = shift_posterior(prior, star.likelihoods[0], s_star, beta, d);
    if (!q1) continue;
    const Vector post_prime = post_star + d * beta;
    const double denom = alpha.dot(post_prime);
    if (std::abs(denom) <= 1e-12) continue;
    const Vector k = -d * (star.likelihoods[1] * beta) / denom;
    const Matrix q2 = star.likelihoods[1] + k * alpha.transpose();
    if (q2.minCoeff() < 0.0 || q2.maxCoeff() > 1.0) continue;
    ConditionalModel prime{prior, {*q1, q2}};
    // Column sums drift by rounding only; renormalize so validation is exact.
    for (auto& l : prime.likelihoods)
      for (Eigen::Index w = 0; w < l.cols(); ++w) l.col(w) /= l.col(w).sum();
    JointDistribution mu_star = star.joint();
    JointDistribution mu_prime = prime.joint();
    const ProblemInstance pair(std::vector<JointDistribution>{mu_star, mu_prime},
                               {ReportSpec::linear_property(g), ReportSpec::linear_property(g)}, 1);
    const double marginal_gap = max_abs_diff(pair.peer_report_marginal(0, 0), pair.peer_report_marginal(1, 0));
    const double posterior_gap = max_abs_diff(pair.report_posterior(0, 0, s_star), pair.report_posterior(1, 0, s_star));
    const double shift = (g * (mu_prime.state_posterior(0, s_star) - mu_star.state_posterior(0, s_star))).cwiseAbs().maxCoeff();
    return LinearCounterexample{std::move(star), std::move(prime), std::move(mu_star), std::move(mu_prime), s_star, d,
                                alpha, beta, marginal_gap, shift, posterior_gap};
  }
  fail(ErrorCode::DegenerateConstruction, "no valid delta down to 1e-9");
}

RankCounterexample gen_rank_counterexample(const ConditionalModel& model, std::size_t agent, double delta) {
  model.validate();
  require(agent < model.likelihoods.size(), ErrorCode::Index, "agent out of range");
  require(model.prior.minCoeff() > 0.0, ErrorCode::Validation, "prior must be strictly positive");
  const Matrix p = model.peer_likelihood(agent);
  const std::size_t rank = numerical_rank(p);
  const auto omega = static_cast<std::size_t>(p.cols());
  if (rank >= omega) fail(ErrorCode::NotApplicable, "peer likelihood has full column rank");
  // Columns of P sum to one, so 1^T a = 1^T P a = 0.
  const Vector a = null_vector(p, rank);

  const Matrix& q = model.likelihoods[agent];
  // Most interior posterior among signals with positive marginal.
  std::size_t s_star = 0;
  double interior = -1.0;
  for (Eigen::Index s = 0; s < q.rows(); ++s) {
    if (model.prior.dot(q.row(s).transpose()) <= 0.0) continue;
    const double v = posterior_from(model.prior, q, static_cast<std::size_t>(s)).minCoeff();
    if (v > interior) {
      interior = v;
      s_star = static_cast<std::size_t>(s);
    }
  }
  for (double d = delta; d >= kDeltaFloor; d /= 2.0) {
    auto shifted_q = shift_posterior(model.prior, q, s_star, a, d);
    if (!shifted_q) continue;
    for (Eigen::Index w = 0; w < shifted_q->cols(); ++w) shifted_q->col(w) /= shifted_q->col(w).sum();
    ConditionalModel shifted = model;
    shifted.likelihoods[agent] = *shifted_q;
    JointDistribution mu = model.joint();
    JointDistribution mu_tilde = shifted.joint();
    const double state_gap =
        max_abs_diff(mu.state_posterior(agent, s_star), mu_tilde.state_posterior(agent, s_star));
    if (state_gap < 1e-6) break;
    const double signal_gap =
        max_abs_diff(mu.peer_signal_posterior(agent, s_star), mu_tilde.peer_signal_posterior(agent, s_star));
    const ProblemInstance pair = ProblemInstance::uniform({mu, mu_tilde}, ReportSpec::posterior(), 1);
    const double report_gap =
        max_abs_diff(pair.report_posterior(0, agent, s_star), pair.report_posterior(1, agent, s_star));
    return RankCounterexample{model, std::move(shifted), std::move(mu), std::move(mu_tilde), agent, s_star, d, a,
                              state_gap, signal_gap, report_gap};
  }
  fail(ErrorCode::DegenerateConstruction, "no valid delta leaves a visible posterior shift");
}

}  // namespace elicit
