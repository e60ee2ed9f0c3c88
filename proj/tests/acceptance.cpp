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

// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "elicit/analysis.hpp"
#include "elicit/error.hpp"
#include "elicit/generators.hpp"
#include "elicit/geometry.hpp"
#include "elicit/io.hpp"
#include "elicit/mechanisms.hpp"
#include "elicit/svg.hpp"
#include "elicit/synthesis.hpp"
#include "elicit/verifier.hpp"
#include "oracle_math.hpp"

namespace {

using namespace elicit;
namespace fs = std::filesystem;

struct Result {
  bool pass = true;
  std::string detail;
};

// Records the first failure; later ones only bump the count.
class Tally {
 public:
  void require(bool ok, const std::string& what) {
    if (ok) return;
    if (failures_++ == 0) first_ = what;
  }
  Result result(const std::string& summary) const {
    if (failures_ == 0) return {true, summary};
    return {false, std::to_string(failures_) + " failure(s); first: " + first_};
  }

 private:
  int failures_ = 0;
  std::string first_;
};

SignMatrix identity_signs(std::size_t n) {
  SignMatrix s = -SignMatrix::Ones(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  s.diagonal().setOnes();
  return s;
}

SignMatrix example_signs() {
  SignMatrix s(3, 3);
  s << 1, -1, -1, -1, 1, -1, -1, -1, 1;
  return s;
}

Vector simplex_point(std::mt19937_64& rng, std::size_t dim) {
  std::exponential_distribution<double> e(1.0);
  Vector v(static_cast<Eigen::Index>(dim));
  for (auto& x : v) x = e(rng);
  return v / v.sum();
}

double uniform(std::mt19937_64& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

std::size_t pick(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / ("elicit_acceptance_" + std::to_string(std::random_device{}()));
  fs::create_directories(dir);
  return dir;
}

Result ac1_ca_sufficiency() {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path dir = scratch_dir();
  const fs::path inst_path = dir / "instance.json", report = dir / "verdicts.json";
  std::ofstream(inst_path) << R"({"schema_version": 1, "task_count": 2, "reports": "identity",
    "generator": {"kind": "sign-pattern", "params": {"signs": [[1,-1,-1],[-1,1,-1],[-1,-1,1]]},
                  "seed": 2024, "count": 100}})";
  std::ostringstream out, err;
  const int code = cli::run_command({"verify", inst_path.string(), "--mechanism", "ca", "--report", report.string()}, out, err);
  Tally t;
  t.require(code == 0, "verify exited " + std::to_string(code) + ": " + err.str());
  std::size_t certified = 0, seen = 0;
  double worst = INFINITY;
  if (code == 0) {
    std::ifstream in(report);
    const Json doc = Json::parse(in);
    for (const auto& v : doc["verdicts"]) {
      ++seen;
      const double margin = v["margin"].get<double>();
      worst = std::min(worst, margin);
      if (v["status"] == "CertifiedStrict" && margin > 0) ++certified;
    }
  }
  fs::remove_all(dir);
  t.require(seen == 200, "expected 200 verdicts, got " + std::to_string(seen));
  t.require(certified == seen, std::to_string(seen - certified) + " verdicts not certified");
  const double secs = seconds_since(t0);
  t.require(secs < 60, "took " + std::to_string(secs) + " s");
  char buf[128];
  std::snprintf(buf, sizeof buf, "100 distributions, %zu/%zu certified, min margin %.3g", certified, seen, worst);
  return t.result(buf);
}

Result ac2_ca_contrapositive() {
  SignMatrix s(3, 3);
  s << 1, -1, -1, 1, -1, -1, -1, 1, 1;  // rows 0 and 1 coincide
  const auto mus = sample_sign_pattern(s, 20, 99);
  const auto inst = ProblemInstance::uniform(mus, ReportSpec::identity(), 2);
  const auto mech = ca_mechanism(s, 2);
  Tally t;
  std::size_t refuted = 0;
  for (std::size_t m = 0; m < mus.size(); ++m) {
    t.require(shared_sign_pattern(ProblemInstance::uniform({mus[m]}, ReportSpec::identity(), 2)) == s,
              "distribution " + std::to_string(m) + " has the wrong signs");
    const Verdict v = verify_one(inst, m, mech, 0, VerifyMode::ScoringExact);
    if (v.status != VerdictStatus::Refuted || !v.witness) {
      t.require(false, "distribution " + std::to_string(m) + " not refuted");
      continue;
    }
    // The witness must send one duplicated signal to the other's report.
    const Strategy& w = v.witness->strategy;
    bool merges = false;
    for (std::size_t task = 0; task < 2; ++task) {
      const Matrix& sig = w.task(task);
      merges = merges || sig(0, 1) == 1.0 || sig(1, 0) == 1.0;
      t.require(sig(2, 2) == 1.0, "witness moves the distinct signal");
    }
    t.require(merges, "witness does not merge signals 0 and 1");
    auto profile = truthful_profile(inst, m);
    const double truthful = expected_payment(inst, m, mech, 0, profile);
    profile[0] = w;
    const double gain = expected_payment(inst, m, mech, 0, profile) - truthful;
    t.require(gain >= -1e-12, "recomputed gain " + std::to_string(gain));
    ++refuted;
  }
  return t.result("20/20 refuted by a merge of the duplicated signals, gain >= 0");
}

Matrix random_likelihood(std::mt19937_64& rng, std::size_t signals, std::size_t states) {
  Matrix l(static_cast<Eigen::Index>(signals), static_cast<Eigen::Index>(states));
  for (Eigen::Index c = 0; c < l.cols(); ++c) l.col(c) = simplex_point(rng, signals);
  return l;
}

Result ac3_kong() {
  Tally t;
  const auto models = sample_conditional_independent(2, {2, 2}, 50, 31);
  double worst = INFINITY;
  std::size_t full_rank = 0;
  for (std::size_t k = 0; k < models.size(); ++k) {
    const auto& m = models[k];
    const ProblemInstance inst({m.joint()}, {ReportSpec::posterior(), ReportSpec::posterior()}, 1, {m});
    if (check_rank_posterior(inst).violated() || check_stochastic_relevance(inst).violated()) continue;
    ++full_rank;
    for (const auto& v : verify_strict(inst, kong_mechanism(inst), VerifyMode::ScoringExact)) {
      worst = std::min(worst, v.margin);
      t.require(v.status == VerdictStatus::CertifiedStrict && v.margin > 1e-9,
                "instance " + std::to_string(k) + " agent " + std::to_string(v.agent) + " margin " + std::to_string(v.margin));
    }
  }
  t.require(full_rank >= 45, "only " + std::to_string(full_rank) + " full-rank instances");

  std::mt19937_64 rng(32);
  std::size_t witnesses = 0;
  for (int k = 0; k < 20; ++k) {
    const Vector prior = simplex_point(rng, 2);
    Matrix peer(2, 2);
    peer.col(0) = simplex_point(rng, 2);
    peer.col(1) = peer.col(0);  // rank one
    const ConditionalModel m{prior, {random_likelihood(rng, 2, 2), peer}};
    try {
      const auto cx = gen_rank_counterexample(m, 0);
      const Matrix a = oracle::table_of(cx.mu), b = oracle::table_of(cx.mu_tilde);
      const double peer_gap =
          (oracle::peer_posterior(a, 0, cx.signal) - oracle::peer_posterior(b, 0, cx.signal)).cwiseAbs().maxCoeff();
      const double state_gap = (oracle::state_posterior(cx.mu, 0, cx.signal) - oracle::state_posterior(cx.mu_tilde, 0, cx.signal))
                                   .cwiseAbs()
                                   .maxCoeff();
      t.require(peer_gap <= 1e-9 && cx.peer_report_gap <= 1e-9, "peer posteriors differ by " + std::to_string(peer_gap));
      t.require(state_gap >= 1e-6, "state posteriors differ by only " + std::to_string(state_gap));
      ++witnesses;
    } catch (const Error& e) {
      t.require(false, std::string("rank construction failed: ") + e.what());
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu full-rank instances certified (min margin %.3g); %zu/20 rank-deficient witnesses",
                full_rank, worst, witnesses);
  return t.result(buf);
}

// Every in-bucket posterior sits in its truthful cell of the extracted diagram.
bool diagrams_place_posteriors(const ProblemInstance& inst, const SynthesisResult& r, std::string& why) {
  const auto params = extract_deh(r.mechanism);
  for (std::size_t m = 0; m < inst.num_distributions(); ++m)
    for (std::size_t i = 0; i < inst.num_agents(); ++i) {
      const auto d = extract_power_diagram(params, inst.peer_report_marginal(m, i), i);
      const Vector marg = inst.distribution(m).signal_marginal(i);
      for (std::size_t s = 0; s < static_cast<std::size_t>(marg.size()); ++s) {
        if (marg[static_cast<Eigen::Index>(s)] <= 0) continue;
        const auto cell = cell_assign(d, inst.report_posterior(m, i, s));
        const auto* w = std::get_if<CellWinner>(&cell);
        if (!w || w->index != inst.report_index(i, m, s)) {
          why = "distribution " + std::to_string(m) + " agent " + std::to_string(i) + " signal " + std::to_string(s);
          return false;
        }
      }
    }
  return true;
}

Result ac4_round_trip() {
  Tally t;
  std::mt19937_64 rng(44);
  std::size_t feasible = 0, placed = 0, attempts = 0;
  while (feasible < 50 && attempts < 200) {
    ++attempts;
    const std::size_t n = pick(rng, 2, 3);
    const auto inst = ProblemInstance::uniform(sample_sign_pattern(identity_signs(n), pick(rng, 2, 8), rng()),
                                               ReportSpec::identity(), pick(rng, 2, 3));
    const auto r = synthesize_scoring(inst);
    if (!r.feasible) continue;
    ++feasible;
    t.require(all_certified(verify_strict(inst, r.mechanism, VerifyMode::ScoringExact)),
              "synthesized mechanism not certified");
    std::string why;
    if (diagrams_place_posteriors(inst, r, why)) ++placed;
    else t.require(false, "posterior outside truthful cell at " + why);
  }
  t.require(feasible >= 50, "only " + std::to_string(feasible) + " feasible instances");

  std::size_t mixed = 0, infeasible = 0, contradictions = 0;
  SignMatrix other(3, 3);
  other << 1, -1, -1, -1, -1, 1, -1, 1, -1;
  const FixedMarginals fixed{Vector::Constant(3, 1.0 / 3), Vector::Constant(3, 1.0 / 3)};
  for (int k = 0; k < 60; ++k) {
    std::vector<JointDistribution> mus;
    if (k % 3 == 0) {
      mus = sample_dirichlet(1, {2, 3}, pick(rng, 1, 4), rng());
    } else {
      mus = sample_sign_pattern(example_signs(), pick(rng, 1, 3), rng(), fixed);
      for (const auto& mu : sample_sign_pattern(other, pick(rng, 0, 2), rng(), fixed)) mus.push_back(mu);
    }
    const auto inst = ProblemInstance::uniform(mus, ReportSpec::identity(), 2);
    const auto r = synthesize_scoring(inst);
    const bool necessary_fails = check_marginal_relevance(inst).violated() || check_convex_separation(inst).violated();
    if (r.feasible && necessary_fails) ++contradictions;
    if (r.feasible) t.require(all_certified(verify_strict(inst, r.mechanism, VerifyMode::ScoringExact)), "uncertified");
    if (!r.feasible) ++infeasible;
    ++mixed;
  }
  t.require(contradictions == 0, std::to_string(contradictions) + " contradictions with the necessary checks");
  t.require(infeasible > 0 && infeasible < mixed, "mixed suite is one-sided");
  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu feasible, %zu/%zu fully placed; %zu mixed (%zu infeasible), 0 contradictions", feasible,
                placed, feasible, mixed, infeasible);
  return t.result(buf);
}

Result ac5_consistency() {
  Tally t;
  double worst = 0.0;
  for (std::uint64_t k = 0; k < 100; ++k) {
    const std::size_t n = 2 + k % 2, tasks = 2 + k % 2;
    const auto inst = ProblemInstance::uniform(sample_sign_pattern(identity_signs(n), 1, k), ReportSpec::identity(), tasks);
    const auto mech = random_mechanism(inst, 1000 + k);
    const auto sym = symmetrize(mech);
    const std::vector<Strategy> profile{random_strategy(inst, 0, 2000 + k, true), random_strategy(inst, 1, 3000 + k, true)};
    for (std::size_t i = 0; i < 2; ++i) {
      const double diff = std::abs(expected_payment(inst, 0, sym, i, profile) - expected_payment(inst, 0, mech, i, profile));
      worst = std::max(worst, diff);
      t.require(diff <= 1e-12, "symmetrization changed E[p] by " + std::to_string(diff));
    }
  }
  std::size_t certified = 0;
  for (std::uint64_t k = 0; k < 20; ++k) {
    const auto inst = ProblemInstance::uniform(sample_sign_pattern(example_signs(), 4, 500 + k), ReportSpec::identity(), 2);
    for (const auto& mech : {ca_mechanism(example_signs(), 2), synthesize_scoring(inst).mechanism}) {
      if (!all_certified(verify_strict(inst, mech, VerifyMode::ScoringExact))) continue;
      ++certified;
      t.require(!any_refuted(verify_strict(inst, mech, VerifyMode::ConsistentGeneral)),
                "certified mechanism refuted under consistent deviations");
    }
  }
  t.require(certified >= 30, "only " + std::to_string(certified) + " certified mechanisms");
  char buf[160];
  std::snprintf(buf, sizeof buf, "max |E[p_hat] - E[p]| = %.2g over 100 mechanisms; %zu certified mechanisms unrefuted", worst,
                certified);
  return t.result(buf);
}

Result ac6_convexity() {
  Matrix table(3, 2);
  table << 0.8, 0.2, 0.4, 0.6, 0.6, 0.4;
  table /= 3.0;
  const std::vector<ReportValue> own{ReportValue::symbol("r"), ReportValue::symbol("r"), ReportValue::symbol("q")};
  const ProblemInstance inst({JointDistribution::from_signal_table(table)}, {ReportSpec::explicit_table({own}), ReportSpec::identity()},
                             1);
  const auto r = check_convex_separation(inst);
  Tally t;
  const auto* w = std::get_if<ConvexWitness>(&r.witness);
  t.require(r.violated() && w != nullptr, "LP found no common point");
  if (w) {
    const Vector& big = w->members_a.size() == 2 ? w->beta : w->beta_prime;
    t.require(big.size() == 2 && std::abs(big[0] - 0.5) <= 1e-9 && std::abs(big[1] - 0.5) <= 1e-9, "coefficients not (0.5, 0.5)");
    t.require((w->point - (Vector(2) << 0.6, 0.4).finished()).cwiseAbs().maxCoeff() <= 1e-9, "meeting point not (0.6, 0.4)");
  }
  return t.result("0.5*(0.8,0.2) + 0.5*(0.4,0.6) = (0.6,0.4) found");
}

Result ac7_ball() {
  const auto t0 = std::chrono::steady_clock::now();
  Matrix lam(2, 2);
  lam << 0.4, 0.1, 0.1, 0.4;
  const auto lambda = JointDistribution::from_signal_table(lam);
  Tally t;
  const BallResult ball = ball_epsilon(lambda);
  t.require(ball.epsilon > 0, "epsilon not positive");
  const auto mus = sample_ball(lambda, ball.epsilon, 1000, 7);
  t.require(mus.size() == 1000, "sampler returned too few distributions");
  for (const auto& mu : mus) {
    double dist = 0;
    for (std::size_t k = 0; k < mu.mass().size(); ++k) dist += std::abs(mu.mass()[k] - lambda.mass()[k]);
    t.require(dist <= ball.epsilon + 1e-12, "sample outside the ball");
  }
  const auto verdicts = verify_strict(ProblemInstance::uniform(mus, ReportSpec::identity(), 1), ball.mechanism, VerifyMode::ScoringExact);
  t.require(all_certified(verdicts), "some sampled distribution not certified");
  const double secs = seconds_since(t0);
  t.require(secs < 120, "took " + std::to_string(secs) + " s");
  char buf[128];
  std::snprintf(buf, sizeof buf, "epsilon %.4g; 1000 sampled distributions certified (%zu verdicts)", ball.epsilon, verdicts.size());
  return t.result(buf);
}

// Line endpoints in drawing order from the SVG boundaries group.
std::vector<std::array<double, 4>> svg_lines(const std::string& svg) {
  std::vector<std::array<double, 4>> out;
  for (auto p = svg.find("<line "); p != std::string::npos; p = svg.find("<line ", p + 1)) {
    std::array<double, 4> v{};
    const char* keys[] = {"x1=\"", "y1=\"", "x2=\"", "y2=\""};
    for (int k = 0; k < 4; ++k) v[static_cast<std::size_t>(k)] = std::stod(svg.substr(svg.find(keys[k], p) + 4));
    out.push_back(v);
  }
  return out;
}

Result ac8_figure() {
  const auto inst = ProblemInstance::uniform(sample_sign_pattern(example_signs(), 50, 7), ReportSpec::identity(), 2);
  Tally t;
  for (const Vector& u : {Vector(Vector::Constant(3, 1.0 / 3)), Vector((Vector(3) << 0.2, 0.3, 0.5).finished())}) {
    const auto segs = cell_boundaries_2simplex(ca_diagram(inst, 0, u));
    t.require(segs.size() == 3, "expected three boundaries");
    for (const auto& s : segs)
      t.require(std::min((s.a - u).cwiseAbs().maxCoeff(), (s.b - u).cwiseAbs().maxCoeff()) <= 1e-6,
                "boundary does not end at the marginal");
    // The drawn lines must share an endpoint (the marginal) in pixel space.
    const auto lines = svg_lines(render_simplex_svg(inst, 0, u));
    t.require(lines.size() == 3, "svg has " + std::to_string(lines.size()) + " dashed lines");
    if (lines.size() == 3) {
      const auto& l0 = lines[0];
      for (const auto& end : {std::array<double, 2>{l0[0], l0[1]}, std::array<double, 2>{l0[2], l0[3]}}) {
        bool all = true;
        for (const auto& l : lines)
          all = all && (std::hypot(l[0] - end[0], l[1] - end[1]) <= 1e-3 || std::hypot(l[2] - end[0], l[3] - end[1]) <= 1e-3);
        if (all) goto concurrent;
      }
      t.require(false, "svg lines are not concurrent");
    concurrent:;
    }
  }
  return t.result("three boundaries concurrent at (1/3,1/3,1/3) and (0.2,0.3,0.5)");
}

Result ac9_linear_property() {
  Tally t;
  const Matrix g = (Matrix(1, 3) << 0, 1, 2).finished();
  t.require(check_linear_property_rank(g, 3).violated(), "rank check passed");
  Matrix lik(3, 3);
  lik << 0.6, 0.2, 0.1, 0.3, 0.5, 0.2, 0.1, 0.3, 0.7;
  const auto cx = gen_linear_counterexample(Vector::Constant(3, 1.0 / 3), {lik, lik}, g);
  t.require(cx.marginal_gap <= 1e-9, "peer report marginals differ");
  t.require(cx.posterior_gap <= 1e-9, "peer report posteriors differ at s1*");
  const double a = (g * oracle::state_posterior(cx.mu_star, 0, cx.signal))(0);
  const double b = (g * oracle::state_posterior(cx.mu_prime, 0, cx.signal))(0);
  t.require(std::abs(a - b) > 0 && std::abs(std::abs(a - b) - cx.report_shift) <= 1e-9, "property values do not differ");
  const auto inst = ProblemInstance::uniform({cx.mu_star, cx.mu_prime}, ReportSpec::linear_property(g), 1);
  t.require(check_marginal_relevance(inst).violated(), "marginal relevance not violated");
  char buf[160];
  std::snprintf(buf, sizeof buf, "delta %.3g, report shift %.3g, marginal gap %.1g, posterior gap %.1g", cx.delta,
                cx.report_shift, cx.marginal_gap, cx.posterior_gap);
  return t.result(buf);
}

Result ac10_properties() {
  const auto t0 = std::chrono::steady_clock::now();
  Tally t;
  std::mt19937_64 rng(1010);
  for (int k = 0; k < 300; ++k) {
    const auto mu = sample_dirichlet(pick(rng, 1, 3), {pick(rng, 1, 5), pick(rng, 1, 5)}, 1, rng()).front();
    const Matrix d = delta_matrix(mu).values;
    t.require(d.rowwise().sum().cwiseAbs().maxCoeff() <= 1e-12 && d.colwise().sum().cwiseAbs().maxCoeff() <= 1e-12,
              "Delta sums nonzero");
    for (std::size_t s = 0; s < mu.num_signals(0); ++s) {
      if (mu.signal_marginal(0)[static_cast<Eigen::Index>(s)] <= 0) continue;
      t.require(std::abs(mu.state_posterior(0, s).sum() - 1) <= 1e-12, "state posterior not normalized");
      t.require(std::abs(mu.peer_signal_posterior(0, s).sum() - 1) <= 1e-12, "peer posterior not normalized");
    }
  }
  for (int k = 0; k < 200; ++k) {
    const auto m = sample_conditional_independent(pick(rng, 1, 4), {pick(rng, 1, 4), pick(rng, 1, 4)}, 1, rng()).front();
    const auto mu = m.joint();
    const Matrix table = oracle::table_of(mu);
    for (std::size_t s = 0; s < mu.num_signals(0); ++s) {
      if (table.row(static_cast<Eigen::Index>(s)).sum() <= 0) continue;
      const Vector via = m.likelihoods[1] * oracle::state_posterior(mu, 0, s);
      t.require((oracle::peer_posterior(table, 0, s) - via).cwiseAbs().maxCoeff() <= 1e-12, "conditional independence identity");
    }
  }
  // Argmax invariances: positive scaling, common translation, common weight shift.
  for (int k = 0; k < 500; ++k) {
    const std::size_t dim = pick(rng, 2, 4), cells = pick(rng, 2, 5);
    PowerDiagram d, scaled, moved;
    const double a = uniform(rng, 0.1, 10), c = uniform(rng, -3, 3);
    Vector shift(static_cast<Eigen::Index>(dim));
    for (auto& x : shift) x = uniform(rng, -2, 2);
    for (std::size_t j = 0; j < cells; ++j) {
      Vector v(static_cast<Eigen::Index>(dim));
      for (auto& x : v) x = uniform(rng, -1, 1);
      const double w = uniform(rng, -1, 1);
      const std::string label = std::to_string(j);
      d.sites.push_back(v), d.weights.push_back(w), d.labels.push_back(label);
      scaled.sites.push_back(a * v), scaled.weights.push_back(a * w), scaled.labels.push_back(label);
      moved.sites.push_back(v + shift), moved.weights.push_back(w + c), moved.labels.push_back(label);
    }
    const Vector u = simplex_point(rng, dim);
    std::vector<double> pd;
    for (std::size_t j = 0; j < cells; ++j) pd.push_back(power_distance(u, d.sites[j], d.weights[j]));
    std::vector<double> sorted = pd;
    std::sort(sorted.begin(), sorted.end());
    if (sorted[1] - sorted[0] < 1e-6) continue;
    const auto win = [&](const PowerDiagram& x) {
      const auto c = cell_assign(x, u);
      return std::holds_alternative<CellWinner>(c) ? std::get<CellWinner>(c).index : kNoReport;
    };
    t.require(win(d) == win(scaled) && win(d) == win(moved), "argmax changed under an invariance");
  }
  int squared_checked = 0;
  for (int k = 0; k < 1000; ++k) {
    const std::size_t dim = pick(rng, 2, 4), cells = pick(rng, 1, 5);
    std::vector<Vector> sites;
    std::vector<double> weights;
    for (std::size_t j = 0; j < cells; ++j) {
      Vector v(static_cast<Eigen::Index>(dim));
      for (auto& x : v) x = uniform(rng, -0.5, 1.5);
      sites.push_back(v);
      weights.push_back(uniform(rng, -0.3, 0.3));
    }
    const Vector u = simplex_point(rng, dim);
    std::vector<double> sq;
    for (std::size_t j = 0; j < cells; ++j) sq.push_back((u - sites[j]).squaredNorm() - weights[j]);
    const std::size_t best = static_cast<std::size_t>(std::min_element(sq.begin(), sq.end()) - sq.begin());
    bool clear = true;
    for (std::size_t j = 0; j < cells; ++j) clear = clear && (j == best || sq[j] - sq[best] > 1e-7);
    if (!clear) continue;
    ++squared_checked;
    const auto c = cell_assign(from_squared_form(sites, weights), u);
    t.require(std::holds_alternative<CellWinner>(c) && std::get<CellWinner>(c).index == best, "squared form disagrees");
  }
  t.require(squared_checked >= 950, "too many near-ties in the squared-form sample");
  // Convex separation LP vs a 0.01 mixture grid.
  int decided = 0;
  for (int k = 0; k < 80; ++k) {
    const std::size_t na = pick(rng, 1, 3), nb = pick(rng, 1, 3);
    std::vector<Vector> a, b;
    Matrix table(static_cast<Eigen::Index>(na + nb), 3);
    std::vector<ReportValue> own;
    for (std::size_t j = 0; j < na + nb; ++j) {
      const Vector p = (simplex_point(rng, 3).array() + 0.05).matrix() / 1.15;
      (j < na ? a : b).push_back(p);
      table.row(static_cast<Eigen::Index>(j)) = p.transpose() / static_cast<double>(na + nb);
      own.push_back(ReportValue::symbol(j < na ? "r" : "q"));
    }
    const ProblemInstance inst({JointDistribution::from_signal_table(table)},
                               {ReportSpec::explicit_table({own}), ReportSpec::identity()}, 1);
    // Agents are checked in order, so an agent-1 witness means agent 0 passed.
    const auto report = check_convex_separation(inst);
    const bool violated = report.violated() && std::get<ConvexWitness>(report.witness).agent == 0;
    const double grid = oracle::grid_hull_distance(a, b, 0.01);
    if (violated) t.require(grid <= 0.02, "LP overlap not seen on the grid");
    if (grid > 0.02) {
      t.require(!violated, "LP overlap where the grid separates");
      ++decided;
    }
  }
  t.require(decided >= 10, "grid comparison mostly undecided");
  const double secs = seconds_since(t0);
  t.require(secs < 60, "took " + std::to_string(secs) + " s");
  char buf[128];
  std::snprintf(buf, sizeof buf, "all invariants hold (%d squared-form cases, %.1f s)", squared_checked, secs);
  return t.result(buf);
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Result()>>> criteria{
      {"AC1  CA sufficiency", ac1_ca_sufficiency},     {"AC2  CA duplicate rows", ac2_ca_contrapositive},
      {"AC3  Kong and rank", ac3_kong},                {"AC4  synthesis round trip", ac4_round_trip},
      {"AC5  consistency", ac5_consistency},           {"AC6  convexity example", ac6_convexity},
      {"AC7  robustness ball", ac7_ball},              {"AC8  simplex figure", ac8_figure},
      {"AC9  linear property", ac9_linear_property},   {"AC10 property suite", ac10_properties},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Result r;
    try {
      r = run();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%-28s %s  %s (%.2f s)\n", name, r.pass ? "PASS" : "FAIL", r.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
    if (!r.pass) ++failed;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
