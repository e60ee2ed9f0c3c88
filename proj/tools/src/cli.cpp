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

#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "elicit/analysis.hpp"
#include "elicit/error.hpp"
#include "elicit/io.hpp"
#include "elicit/mechanisms.hpp"
#include "elicit/svg.hpp"
#include "elicit/synthesis.hpp"
#include "elicit/verifier.hpp"

namespace elicit::cli {

namespace {

struct Options {
  std::string instance;
  std::string mechanism = "ca";
  std::string mechanism_file;
  std::string mode = "scoring-exact";
  std::string out;
  std::string report;
  std::string certificate;
  std::string statistic = "identity";
  std::string marginal;
  std::string kind;
  std::size_t agent = 0;
  std::size_t trials = 10000;
  std::size_t samples = 1000;
  std::uint64_t seed = 1;
  double delta = kDeltaStart;
  long distribution = -1;
};

std::string num(double v) {
  std::ostringstream s;
  s << std::setprecision(10) << v;
  return s.str();
}

std::size_t budget_from_env() {
  if (const char* env = std::getenv("ELICIT_BUDGET")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0' || v == 0) fail(ErrorCode::Validation, "ELICIT_BUDGET must be a positive integer");
    return static_cast<std::size_t>(v);
  }
  return kDefaultBudget;
}

VerifyMode parse_mode(const std::string& mode) {
  if (mode == "scoring-exact") return VerifyMode::ScoringExact;
  if (mode == "consistent-general") return VerifyMode::ConsistentGeneral;
  fail(ErrorCode::Validation, "unknown mode '" + mode + "'");
}

ScoringMechanism load_mechanism(const Options& o, const ProblemInstance& instance) {
  if (o.mechanism == "ca") return ca_mechanism(shared_sign_pattern(instance), instance.task_count());
  if (o.mechanism == "kong") return kong_mechanism(instance);
  if (o.mechanism == "file") {
    if (o.mechanism_file.empty()) fail(ErrorCode::Validation, "--mechanism file needs --file PATH");
    return parse_mechanism(o.mechanism_file);
  }
  fail(ErrorCode::Validation, "unknown mechanism '" + o.mechanism + "'");
}

Vector parse_marginal(const std::string& text) {
  std::vector<double> values;
  std::stringstream in(text);
  std::string piece;
  while (std::getline(in, piece, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(piece, &used));
      if (used != piece.size()) throw std::invalid_argument(piece);
    } catch (const std::exception&) {
      fail(ErrorCode::Parse, "bad marginal component '" + piece + "'");
    }
  }
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

int cmd_check(const Options& o, std::ostream& out) {
  const ProblemInstance instance = parse_instance(o.instance);
  const auto reports = run_all_checks(instance);
  Json doc = Json::array();
  bool violated = false;
  for (const auto& r : reports) {
    out << std::left << std::setw(28) << r.name << std::setw(10) << to_string(r.outcome) << r.detail << "\n";
    violated = violated || r.violated();
    doc.push_back(to_json(r));
  }
  if (!o.report.empty()) write_text(o.report, dump(Json{{"checks", std::move(doc)}, {"violated", violated}}));
  return violated ? kExitViolated : kExitPass;
}

Statistic parse_statistic(const std::string& name) {
  if (name == "identity") return Statistic::identity();
  if (name == "constant") return Statistic::constant();
  if (name == "histogram") return Statistic::histogram();
  fail(ErrorCode::Validation, "unknown statistic '" + name + "'");
}

int cmd_synthesize(const Options& o, std::ostream& out) {
  const ProblemInstance instance = parse_instance(o.instance);
  const SynthesisResult result = synthesize_with_statistic(instance, parse_statistic(o.statistic));
  out << (result.feasible ? "feasible" : "infeasible") << " margin " << num(result.margin) << " (lp "
      << to_string(result.status) << ")\n";
  for (std::size_t i = 0; i < result.lp_stats.size(); ++i)
    out << "  agent " << i << ": " << result.lp_stats[i].variables << " variables, " << result.lp_stats[i].constraints
        << " constraints, " << result.lp_stats[i].iterations << " iterations\n";
  if (result.feasible && !o.out.empty()) save_mechanism(result.mechanism, o.out);
  if (!o.certificate.empty()) {
    Json cert = to_json(result);
    if (result.feasible) {
      Json verdicts = Json::array();
      for (const auto& v : verify_strict(instance, result.mechanism, VerifyMode::ScoringExact)) verdicts.push_back(to_json(v));
      cert["verdicts"] = std::move(verdicts);
    }
    write_text(o.certificate, dump(cert));
  }
  return result.feasible ? kExitPass : kExitViolated;
}

int cmd_verify(const Options& o, std::ostream& out) {
  const ProblemInstance instance = parse_instance(o.instance);
  const ScoringMechanism mech = load_mechanism(o, instance);
  VerifyOptions options;
  options.seed = o.seed;
  options.budget = budget_from_env();
  const VerifyMode mode = parse_mode(o.mode);
  const auto verdicts = verify_strict(instance, mech, mode, options);
  out << "mechanism " << mech.name() << ", mode " << to_string(mode) << "\n";
  out << std::left << std::setw(6) << "dist" << std::setw(7) << "agent" << std::setw(18) << "status" << std::setw(18)
      << "margin" << "witness gain\n";
  Json doc = Json::array();
  for (const auto& v : verdicts) {
    out << std::left << std::setw(6) << v.distribution << std::setw(7) << v.agent << std::setw(18) << to_string(v.status)
        << std::setw(18) << num(v.margin) << (v.witness ? num(v.witness->gain) : "-") << "\n";
    doc.push_back(to_json(v));
  }
  const bool refuted = any_refuted(verdicts);
  out << (refuted ? "refuted" : "not refuted") << "\n";
  if (!o.report.empty())
    write_text(o.report, dump(Json{{"mechanism", mech.name()},
                                   {"mode", std::string(to_string(mode))},
                                   {"verdicts", std::move(doc)},
                                   {"refuted", refuted}}));
  return refuted ? kExitViolated : kExitPass;
}

int cmd_simulate(const Options& o, std::ostream& out) {
  const ProblemInstance instance = parse_instance(o.instance);
  const ScoringMechanism mech = load_mechanism(o, instance);
  const std::size_t budget = budget_from_env();
  std::size_t first = 0, last = instance.num_distributions();
  if (o.distribution >= 0) {
    first = static_cast<std::size_t>(o.distribution);
    require(first < last, ErrorCode::Index, "distribution out of range");
    last = first + 1;
  }
  out << std::left << std::setw(6) << "dist" << std::setw(7) << "agent" << std::setw(18) << "mean" << std::setw(18)
      << "std_error" << "exact\n";
  for (std::size_t m = first; m < last; ++m) {
    const auto profile = truthful_profile(instance, m);
    const SimulationResult sim = simulate(instance, m, mech, profile, o.trials, o.seed + m);
    for (std::size_t i = 0; i < instance.num_agents(); ++i) {
      std::string exact = "n/a";
      try {
        exact = num(expected_payment(instance, m, mech, i, profile, budget));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::ResourceLimit) throw;
      }
      out << std::left << std::setw(6) << m << std::setw(7) << i << std::setw(18) << num(sim.mean[i]) << std::setw(18)
          << num(sim.std_error[i]) << exact << "\n";
    }
  }
  return kExitPass;
}

int cmd_plot(const Options& o, std::ostream& out) {
  const ProblemInstance instance = parse_instance(o.instance);
  const Vector marginal = parse_marginal(o.marginal);
  std::optional<PowerDiagram> diagram;
  if (o.mechanism == "file") {
    const ScoringMechanism mech = load_mechanism(o, instance);
    diagram = extract_power_diagram(extract_deh(mech), marginal, o.agent);
  } else if (o.mechanism != "ca") {
    fail(ErrorCode::Validation, "plot supports --mechanism ca or file");
  }
  render_simplex_svg(instance, o.agent, marginal, o.out, diagram);
  out << "wrote " << o.out << "\n";
  return kExitPass;
}

int cmd_ball(const Options& o, std::ostream& out) {
  const ProblemInstance instance = parse_instance(o.instance);
  const JointDistribution& lambda = instance.distribution(0);
  const BallResult ball = ball_epsilon(lambda);
  out << "epsilon " << num(ball.epsilon) << "\n";
  const auto samples = sample_ball(lambda, ball.epsilon, o.samples, o.seed);
  const ProblemInstance sampled = ProblemInstance::uniform(samples, ReportSpec::identity(), 1);
  const auto verdicts = verify_strict(sampled, ball.mechanism, VerifyMode::ScoringExact);
  const auto certified = static_cast<std::size_t>(std::count_if(
      verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.status == VerdictStatus::CertifiedStrict; }));
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& v : verdicts) worst = std::min(worst, v.margin);
  out << "sampled " << samples.size() << " distributions: " << certified << "/" << verdicts.size()
      << " verdicts certified strict, smallest margin " << num(worst) << "\n";
  if (!o.out.empty()) save_mechanism(ball.mechanism, o.out);
  return certified == verdicts.size() ? kExitPass : kExitViolated;
}

int cmd_counterexample(const Options& o, std::ostream& out) {
  const ProblemInstance instance = parse_instance(o.instance);
  const auto& model = instance.factorization(0);
  if (!model) fail(ErrorCode::MissingFactorization, "counterexamples need a likelihood factorization ('models')");
  std::vector<JointDistribution> pair;
  std::vector<std::optional<ConditionalModel>> models;
  std::vector<ReportSpec> specs;
  try {
    if (o.kind == "linear") {
      const ReportSpec& spec = instance.report_spec(0);
      if (spec.kind != ReportKind::Linear) fail(ErrorCode::Validation, "agent 0 must report a linear property");
      const auto cx = gen_linear_counterexample(model->prior, model->likelihoods, spec.linear, o.delta);
      out << "signal " << cx.signal << ", delta " << num(cx.delta) << "\n"
          << "peer report marginal gap " << num(cx.marginal_gap) << "\n"
          << "property shift at signal " << num(cx.report_shift) << "\n"
          << "peer report posterior gap " << num(cx.posterior_gap) << "\n";
      pair = {cx.mu_star, cx.mu_prime};
      models = {cx.star, cx.prime};
      specs.assign(instance.num_agents(), spec);
    } else {
      const auto cx = gen_rank_counterexample(*model, o.agent, o.delta);
      out << "agent " << cx.agent << ", signal " << cx.signal << ", delta " << num(cx.delta) << "\n"
          << "state posterior gap " << num(cx.state_posterior_gap) << "\n"
          << "peer signal posterior gap " << num(cx.peer_signal_gap) << "\n"
          << "peer report posterior gap " << num(cx.peer_report_gap) << "\n";
      pair = {cx.mu, cx.mu_tilde};
      models = {cx.base, cx.shifted};
      specs.assign(instance.num_agents(), ReportSpec::posterior());
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NotApplicable) throw;
    out << "not applicable: " << e.what() << "\n";
    return kExitPass;
  }
  const ProblemInstance witness(std::move(pair), std::move(specs), 1, std::move(models));
  if (!o.out.empty()) {
    save_instance(witness, o.out);
    out << "wrote " << o.out << "\n";
  }
  return kExitViolated;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Decide, certify and synthesize strictly truthful peer prediction mechanisms", "elicit"};
  app.require_subcommand(1);
  Options o;

  auto* check = app.add_subcommand("check", "Run every necessary-condition check");
  check->add_option("instance", o.instance, "Instance JSON")->required();
  check->add_option("--report", o.report, "Write the JSON report here");

  auto* synth = app.add_subcommand("synthesize", "Solve for a strictly truthful scoring mechanism");
  synth->add_option("instance", o.instance, "Instance JSON")->required();
  synth->add_option("--out", o.out, "Mechanism JSON output");
  synth->add_option("--certificate", o.certificate, "Certificate JSON output");
  synth->add_option("--statistic", o.statistic, "identity, constant or histogram")
      ->check(CLI::IsMember({"identity", "constant", "histogram"}));

  auto add_mechanism = [&](CLI::App* sub) {
    sub->add_option("--mechanism", o.mechanism, "ca, kong or file")->check(CLI::IsMember({"ca", "kong", "file"}));
    sub->add_option("--file", o.mechanism_file, "Mechanism JSON for --mechanism file");
  };
  auto* verify = app.add_subcommand("verify", "Verify strict truthfulness");
  verify->add_option("instance", o.instance, "Instance JSON")->required();
  add_mechanism(verify);
  verify->add_option("--mode", o.mode, "scoring-exact or consistent-general")
      ->check(CLI::IsMember({"scoring-exact", "consistent-general"}));
  verify->add_option("--seed", o.seed, "Seed for random deviations");
  verify->add_option("--report", o.report, "Write the JSON verdicts here");

  auto* sim = app.add_subcommand("simulate", "Monte Carlo payments under truthful play");
  sim->add_option("instance", o.instance, "Instance JSON")->required();
  add_mechanism(sim);
  sim->add_option("--trials", o.trials, "Trials per distribution")->check(CLI::PositiveNumber);
  sim->add_option("--seed", o.seed, "Random seed");
  sim->add_option("--distribution", o.distribution, "Only this distribution index");

  auto* plot = app.add_subcommand("plot", "Ternary SVG of posteriors and cells");
  plot->add_option("instance", o.instance, "Instance JSON")->required();
  plot->add_option("--agent", o.agent, "Agent index");
  plot->add_option("--marginal", o.marginal, "Peer marginal, comma separated")->required();
  plot->add_option("--out", o.out, "SVG output")->required();
  add_mechanism(plot);

  auto* ball = app.add_subcommand("ball", "Robustness radius around the first distribution");
  ball->add_option("instance", o.instance, "Instance JSON")->required();
  ball->add_option("--samples", o.samples, "Distributions to sample in the ball");
  ball->add_option("--seed", o.seed, "Random seed");
  ball->add_option("--out", o.out, "Write the fitted mechanism here");

  auto* cx = app.add_subcommand("counterexample", "Construct a non-elicitability witness pair");
  cx->add_option("kind", o.kind, "linear or rank")->required()->check(CLI::IsMember({"linear", "rank"}));
  cx->add_option("instance", o.instance, "Instance JSON with models")->required();
  cx->add_option("--agent", o.agent, "Agent for the rank construction");
  cx->add_option("--delta", o.delta, "Initial step")->check(CLI::PositiveNumber);
  cx->add_option("--out", o.out, "Witness instance output");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }

  try {
    if (check->parsed()) return cmd_check(o, out);
    if (synth->parsed()) return cmd_synthesize(o, out);
    if (verify->parsed()) return cmd_verify(o, out);
    if (sim->parsed()) return cmd_simulate(o, out);
    if (plot->parsed()) return cmd_plot(o, out);
    if (ball->parsed()) return cmd_ball(o, out);
    return cmd_counterexample(o, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
}

}  // namespace elicit::cli
