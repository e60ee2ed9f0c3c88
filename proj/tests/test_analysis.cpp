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

#include <gtest/gtest.h>

#include "elicit/analysis.hpp"
#include "elicit/error.hpp"
#include "elicit/generators.hpp"
#include "elicit/verifier.hpp"
#include "oracles.hpp"

namespace {

using namespace elicit;

Matrix rows_of(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix t(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    Eigen::Index c = 0;
    for (double v : row) t(r, c++) = v;
    ++r;
  }
  return t;
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double x : v) out[k++] = x;
  return out;
}

JointDistribution joint(const Matrix& t) { return JointDistribution::from_signal_table(t); }

ProblemInstance identity_instance(std::vector<JointDistribution> mus) {
  return ProblemInstance::uniform(std::move(mus), ReportSpec::identity(), 1);
}

template <typename F>
void expect_error(F&& f, ErrorCode code) {
  try {
    f();
    ADD_FAILURE() << "expected " << to_string(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

ReportSpec symbols(std::initializer_list<std::initializer_list<const char*>> per_distribution) {
  std::vector<std::vector<ReportValue>> table;
  for (const auto& row : per_distribution) {
    table.emplace_back();
    for (const char* s : row) table.back().push_back(ReportValue::symbol(s));
  }
  return ReportSpec::explicit_table(std::move(table));
}

Matrix bsc(double flip) { return rows_of({{1 - flip, flip}, {flip, 1 - flip}}); }

// Re-derives a collision witness from raw posteriors.
void expect_collision_recheckable(const ProblemInstance& inst, const CheckReport& r) {
  const auto* w = std::get_if<CollisionWitness>(&r.witness);
  ASSERT_NE(w, nullptr);
  EXPECT_NE(w->report_a, w->report_b);
  const Vector a = inst.report_posterior(w->first.distribution, w->agent, w->first.signal);
  const Vector b = inst.report_posterior(w->second.distribution, w->agent, w->second.signal);
  EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_EQ(inst.report_index(w->agent, w->first.distribution, w->first.signal), w->report_a);
  EXPECT_EQ(inst.report_index(w->agent, w->second.distribution, w->second.signal), w->report_b);
}

const Matrix kBase = rows_of({{0.4, 0.1}, {0.1, 0.4}});

TEST(StochasticRelevance, DistinctPosteriorsPass) {
  EXPECT_EQ(check_stochastic_relevance(identity_instance({joint(kBase)})).outcome, CheckOutcome::Pass);
}

TEST(StochasticRelevance, CrossDistributionCollision) {
  // Signal 1 under the second table has the posterior of signal 0 under the first.
  const auto inst = identity_instance({joint(kBase), joint(rows_of({{0.02, 0.48}, {0.4, 0.1}}))});
  const auto r = check_stochastic_relevance(inst);
  ASSERT_TRUE(r.violated());
  expect_collision_recheckable(inst, r);
}

TEST(StochasticRelevance, SameReportCollisionIsFine) {
  const Matrix t = rows_of({{0.1, 0.2}, {0.15, 0.3}, {0.2, 0.05}});
  EXPECT_TRUE(check_stochastic_relevance(identity_instance({joint(t)})).violated());
  const ProblemInstance pooled({joint(t)}, {symbols({{"a", "a", "b"}}), ReportSpec::identity()}, 1);
  EXPECT_EQ(check_stochastic_relevance(pooled).outcome, CheckOutcome::Pass);
}

TEST(MarginalRelevance, CollisionAcrossBucketsPasses) {
  const auto inst = identity_instance({joint(kBase), joint(rows_of({{0.02, 0.48}, {0.4, 0.1}}))});
  EXPECT_EQ(check_marginal_relevance(inst).outcome, CheckOutcome::Pass);
}

TEST(MarginalRelevance, CollisionWithinBucket) {
  // Same peer marginal (0.5, 0.5); signal 1 of the second copies signal 0 of the first.
  const auto inst = identity_instance({joint(kBase), joint(rows_of({{0.1, 0.4}, {0.4, 0.1}}))});
  const auto r = check_marginal_relevance(inst);
  ASSERT_TRUE(r.violated());
  expect_collision_recheckable(inst, r);
}

TEST(MarginalRelevance, SingletonPasses) {
  EXPECT_EQ(check_marginal_relevance(identity_instance({joint(kBase)})).outcome, CheckOutcome::Pass);
}

// Agent 0's signals carry the given posteriors over agent 1's identity reports.
ProblemInstance hull_instance(const std::vector<Vector>& points, const std::vector<int>& report) {
  const auto k = static_cast<Eigen::Index>(points.size());
  Matrix t(k, points.front().size());
  for (Eigen::Index s = 0; s < k; ++s) t.row(s) = points[static_cast<std::size_t>(s)].transpose() / static_cast<double>(k);
  std::vector<ReportValue> own;
  for (int r : report) own.push_back(ReportValue::symbol(r ? "q" : "r"));
  return ProblemInstance({joint(t)}, {ReportSpec::explicit_table({own}), ReportSpec::identity()}, 1);
}

// Agents are checked in order, so an agent-1 witness means agent 0 passed.
bool agent0_overlaps(const ProblemInstance& inst) {
  const auto r = check_convex_separation(inst);
  return r.violated() && std::get<ConvexWitness>(r.witness).agent == 0;
}

TEST(ConvexSeparation, DistinctSingletonsPass) {
  EXPECT_FALSE(agent0_overlaps(hull_instance({vec({0.8, 0.2}), vec({0.3, 0.7})}, {0, 1})));
}

TEST(ConvexSeparation, MidpointInsideHull) {
  const auto inst = hull_instance({vec({0.8, 0.2}), vec({0.4, 0.6}), vec({0.6, 0.4})}, {0, 0, 1});
  const auto r = check_convex_separation(inst);
  ASSERT_TRUE(r.violated());
  const auto& w = std::get<ConvexWitness>(r.witness);
  EXPECT_NEAR(w.beta.sum(), 1.0, 1e-9);
  EXPECT_NEAR(w.beta_prime.sum(), 1.0, 1e-9);
  Vector pa = Vector::Zero(2), pb = Vector::Zero(2);
  for (Eigen::Index k = 0; k < w.beta.size(); ++k) pa += w.beta[k] * w.members_a[static_cast<std::size_t>(k)].posterior;
  for (Eigen::Index k = 0; k < w.beta_prime.size(); ++k)
    pb += w.beta_prime[k] * w.members_b[static_cast<std::size_t>(k)].posterior;
  EXPECT_LE((pa - pb).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_NEAR(pa[0], 0.6, 1e-9);
  EXPECT_NEAR(w.beta[0], 0.5, 1e-9);
}

TEST(ConvexSeparation, DisjointWithMarginPasses) {
  const std::vector<Vector> a{vec({0.9, 0.1}), vec({0.8, 0.2})}, b{vec({0.7, 0.3})};
  EXPECT_FALSE(agent0_overlaps(hull_instance({a[0], a[1], b[0]}, {0, 0, 1})));
  EXPECT_NEAR(oracle::grid_hull_distance(a, b, 0.01), 0.1, 1e-9);
}

TEST(ConvexSeparationProperty, AgreesWithMixtureGrid) {
  int decided = 0;
  prop::for_all(404, 150, [&](std::mt19937_64& rng, int) {
    const std::size_t na = prop::pick(rng, 1, 3), nb = prop::pick(rng, 1, 3);
    std::vector<Vector> a, b, all;
    std::vector<int> report;
    for (std::size_t k = 0; k < na + nb; ++k) {
      Vector p = prop::simplex_point(rng, 3);
      p = (p.array() + 0.05).matrix() / 1.15;
      (k < na ? a : b).push_back(p);
      all.push_back(p);
      report.push_back(k < na ? 0 : 1);
    }
    const bool violated = agent0_overlaps(hull_instance(all, report));
    const double grid = oracle::grid_hull_distance(a, b, 0.01);
    // Grid distance is an upper bound on the true distance, within a step of it.
    if (violated) {
      EXPECT_LE(grid, 0.02);
    }
    if (grid > 0.02) {
      EXPECT_FALSE(violated);
      ++decided;
    }
  });
  EXPECT_GT(decided, 20);
}

TEST(Permutation, UniformJointIsSymmetric) {
  const auto inst = identity_instance({joint(Matrix::Constant(2, 2, 0.25))});
  const auto r = check_permutation(inst);
  ASSERT_TRUE(r.violated());
  const auto& w = std::get<PermutationWitness>(r.witness);
  EXPECT_EQ(w.partner, w.distribution);
  EXPECT_EQ(w.permutation, (std::vector<std::size_t>{1, 0}));
}

TEST(Permutation, RowSwappedPartner) {
  const Matrix a = rows_of({{0.5, 0.1}, {0.1, 0.3}});
  Matrix swapped = a;
  swapped.row(0).swap(swapped.row(1));
  const auto inst = identity_instance({joint(a), joint(swapped)});
  const auto r = check_permutation(inst);
  ASSERT_TRUE(r.violated());
  const auto& w = std::get<PermutationWitness>(r.witness);
  EXPECT_NE(w.partner, w.distribution);
  const Matrix src = inst.report_joint(w.distribution, w.agent), dst = inst.report_joint(w.partner, w.agent);
  for (std::size_t row = 0; row < w.permutation.size(); ++row)
    EXPECT_LE((src.row(static_cast<Eigen::Index>(w.permutation[row])) - dst.row(static_cast<Eigen::Index>(row)))
                  .cwiseAbs()
                  .maxCoeff(),
              1e-9);
}

TEST(Permutation, AsymmetricSingletonPasses) {
  EXPECT_EQ(check_permutation(identity_instance({joint(rows_of({{0.5, 0.1}, {0.1, 0.3}}))})).outcome,
            CheckOutcome::Pass);
}

TEST(Permutation, ReportCapEnforced) {
  const auto inst = identity_instance({joint(Matrix::Constant(9, 2, 1.0 / 18))});
  expect_error([&] { check_permutation(inst); }, ErrorCode::ResourceLimit);
}

ProblemInstance factored(const ConditionalModel& m) {
  return ProblemInstance({m.joint()}, {ReportSpec::identity(), ReportSpec::identity()}, 1, {m});
}

TEST(RankPosterior, InformativeChannelPasses) {
  EXPECT_EQ(check_rank_posterior(factored({vec({0.5, 0.5}), {bsc(0.2), bsc(0.2)}})).outcome, CheckOutcome::Pass);
}

TEST(RankPosterior, UninformativeChannelViolates) {
  const auto r = check_rank_posterior(factored({vec({0.5, 0.5}), {bsc(0.2), bsc(0.5)}}));
  ASSERT_TRUE(r.violated());
  const auto& w = std::get<RankWitness>(r.witness);
  EXPECT_EQ(w.rank, 1u);
  EXPECT_EQ(w.required, 2u);
  EXPECT_EQ(w.agent, 0u);
  EXPECT_EQ(oracle::gram_schmidt_rank(bsc(0.5)), 1u);
}

TEST(RankPosterior, TooFewPeerSignals) {
  const Matrix peer = rows_of({{0.7, 0.2, 0.5}, {0.3, 0.8, 0.5}});
  const auto r = check_rank_posterior(factored({vec({0.3, 0.3, 0.4}), {Matrix::Identity(3, 3), peer}}));
  ASSERT_TRUE(r.violated());
  EXPECT_LE(std::get<RankWitness>(r.witness).rank, 2u);
}

TEST(RankPosterior, NeedsFactorization) {
  expect_error([] { check_rank_posterior(identity_instance({joint(kBase)})); }, ErrorCode::MissingFactorization);
}

TEST(LinearPropertyRank, Cases) {
  EXPECT_EQ(check_linear_property_rank(Matrix::Identity(3, 3), 3).outcome, CheckOutcome::Pass);
  EXPECT_TRUE(check_linear_property_rank(Matrix::Ones(1, 3), 3).violated());
  const auto r = check_linear_property_rank(rows_of({{1, 2, 3}}), 3);
  ASSERT_TRUE(r.violated());
  EXPECT_EQ(std::get<RankWitness>(r.witness).rank, 2u);
}

TEST(RunAllChecks, NamesAndSkips) {
  const auto reports = run_all_checks(identity_instance({joint(kBase)}));
  std::vector<std::string> names;
  for (const auto& r : reports) names.push_back(r.name);
  EXPECT_EQ(names, (std::vector<std::string>{"check_stochastic_relevance", "check_marginal_relevance",
                                             "check_convex_separation", "check_permutation", "check_rank_posterior",
                                             "check_linear_property_rank"}));
  EXPECT_EQ(reports[4].outcome, CheckOutcome::Skipped);
  EXPECT_EQ(reports[5].outcome, CheckOutcome::Skipped);
}

TEST(BallEpsilon, NeedsFullSupport) {
  expect_error([] { ball_epsilon(joint(rows_of({{0.5, 0.0}, {0.1, 0.4}}))); }, ErrorCode::NotApplicable);
}

TEST(BallEpsilon, NeedsDistinctPosteriors) {
  expect_error([] { ball_epsilon(joint(rows_of({{0.1, 0.2}, {0.15, 0.3}, {0.2, 0.05}}))); }, ErrorCode::NotApplicable);
}

TEST(BallEpsilon, SampledBallIsCertified) {
  const JointDistribution lambda = joint(kBase);
  const BallResult ball = ball_epsilon(lambda);
  ASSERT_GT(ball.epsilon, 0.0);
  const auto mus = sample_ball(lambda, ball.epsilon, 1000, 99);
  ASSERT_EQ(mus.size(), 1000u);
  for (const auto& mu : mus) {
    Eigen::Map<const Vector> a(mu.mass().data(), 4), b(lambda.mass().data(), 4);
    EXPECT_LE((a - b).cwiseAbs().sum(), ball.epsilon + 1e-12);
  }
  const auto inst = identity_instance(mus);
  EXPECT_TRUE(all_certified(verify_strict(inst, ball.mechanism, VerifyMode::ScoringExact)));
}

// Conditional rows move by at most 3 ||mu - lambda||_1 / lambda(r)^2.
TEST(BallEpsilonProperty, ConditionalShiftBound) {
  const Matrix lam = rows_of({{0.3, 0.05, 0.05}, {0.05, 0.2, 0.05}, {0.1, 0.05, 0.15}});
  const JointDistribution lambda = joint(lam);
  const BallResult ball = ball_epsilon(lambda);
  ASSERT_GT(ball.epsilon, 0.0);
  for (const auto& mu : sample_ball(lambda, ball.epsilon, 1000, 5)) {
    const Matrix t = oracle::table_of(mu);
    const double dist = (t - lam).cwiseAbs().sum();
    for (std::size_t agent = 0; agent < 2; ++agent)
      for (std::size_t s = 0; s < 3; ++s) {
        const double weight = agent == 0 ? lam.row(static_cast<Eigen::Index>(s)).sum() : lam.col(static_cast<Eigen::Index>(s)).sum();
        const double shift =
            (oracle::peer_posterior(t, agent, s) - oracle::peer_posterior(lam, agent, s)).cwiseAbs().sum();
        EXPECT_LE(shift, 3 * dist / (weight * weight) + 1e-12);
      }
  }
}

TEST(LinearCounterexample, FullRankPropertyNotApplicable) {
  const Matrix lik = rows_of({{0.6, 0.2, 0.1}, {0.3, 0.5, 0.2}, {0.1, 0.3, 0.7}});
  expect_error([&] { gen_linear_counterexample(Vector::Constant(3, 1.0 / 3), {lik, lik}, Matrix::Identity(3, 3)); },
               ErrorCode::NotApplicable);
  expect_error([&] { gen_linear_counterexample(Vector::Constant(3, 1.0 / 3), {lik, lik}, Matrix::Ones(1, 3)); },
               ErrorCode::NotApplicable);
}

TEST(LinearCounterexample, MeanPropertyWitness) {
  const Matrix lik = rows_of({{0.6, 0.2, 0.1}, {0.3, 0.5, 0.2}, {0.1, 0.3, 0.7}});
  const Matrix g = rows_of({{0, 1, 2}});
  const auto cx = gen_linear_counterexample(Vector::Constant(3, 1.0 / 3), {lik, lik}, g);
  EXPECT_LE(cx.marginal_gap, 1e-9);
  EXPECT_LE(cx.posterior_gap, 1e-9);
  EXPECT_GT(cx.report_shift, 0.0);
  // Independent recheck of the report shift at s1*.
  const double a = (g * oracle::state_posterior(cx.mu_star, 0, cx.signal))(0);
  const double b = (g * oracle::state_posterior(cx.mu_prime, 0, cx.signal))(0);
  EXPECT_NEAR(std::abs(a - b), cx.report_shift, 1e-9);
  const auto inst = ProblemInstance::uniform({cx.mu_star, cx.mu_prime}, ReportSpec::linear_property(g), 1);
  EXPECT_TRUE(check_marginal_relevance(inst).violated());
}

TEST(RankCounterexample, UninformativePeer) {
  const ConditionalModel m{vec({0.4, 0.6}), {bsc(0.2), bsc(0.5)}};
  const auto cx = gen_rank_counterexample(m, 0);
  const Matrix a = oracle::table_of(cx.mu), b = oracle::table_of(cx.mu_tilde);
  EXPECT_LE((oracle::peer_posterior(a, 0, cx.signal) - oracle::peer_posterior(b, 0, cx.signal)).cwiseAbs().maxCoeff(),
            1e-9);
  EXPECT_GE((oracle::state_posterior(cx.mu, 0, cx.signal) - oracle::state_posterior(cx.mu_tilde, 0, cx.signal))
                .cwiseAbs()
                .maxCoeff(),
            1e-6);
  EXPECT_EQ(cx.shifted.prior, m.prior);
  EXPECT_EQ(cx.shifted.likelihoods[1], m.likelihoods[1]);
}

TEST(RankCounterexample, FullRankNotApplicable) {
  expect_error([] { gen_rank_counterexample({vec({0.5, 0.5}), {bsc(0.2), bsc(0.2)}}, 0); }, ErrorCode::NotApplicable);
}

TEST(RankCounterexample, SinglePeerSignal) {
  const ConditionalModel m{vec({0.2, 0.3, 0.5}),
                           {rows_of({{0.6, 0.2, 0.1}, {0.3, 0.5, 0.2}, {0.1, 0.3, 0.7}}), Matrix::Ones(1, 3)}};
  const auto cx = gen_rank_counterexample(m, 0);
  EXPECT_GE(cx.state_posterior_gap, 1e-6);
  EXPECT_LE(cx.peer_signal_gap, 1e-9);
}

}  // namespace
