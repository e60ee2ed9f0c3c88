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

#include "elicit/io.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <variant>

#include "elicit/error.hpp"
#include "elicit/generators.hpp"

namespace elicit {

namespace {

[[noreturn]] void parse_fail(const std::string& where, const std::string& what) {
  fail(ErrorCode::Parse, where + ": " + what);
}

void allow_keys(const Json& obj, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!obj.is_object()) parse_fail(where, "expected an object");
  for (const auto& item : obj.items()) {
    bool known = false;
    for (auto k : allowed) known = known || item.key() == k;
    if (!known) parse_fail(where, "unknown field '" + item.key() + "'");
  }
}

const Json& field(const Json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) parse_fail(where, std::string("missing field '") + key + "'");
  return *it;
}

double number(const Json& j, const std::string& where) {
  if (!j.is_number()) parse_fail(where, "expected a number");
  return j.get<double>();
}

std::size_t count(const Json& j, const std::string& where) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
    parse_fail(where, "expected a nonnegative integer");
  return j.get<std::size_t>();
}

std::string text(const Json& j, const std::string& where) {
  if (!j.is_string()) parse_fail(where, "expected a string");
  return j.get<std::string>();
}

std::vector<std::string> strings(const Json& j, const std::string& where) {
  if (!j.is_array()) parse_fail(where, "expected an array of strings");
  std::vector<std::string> out;
  for (std::size_t k = 0; k < j.size(); ++k) out.push_back(text(j[k], where + "[" + std::to_string(k) + "]"));
  return out;
}

std::vector<double> numbers(const Json& j, const std::string& where) {
  if (!j.is_array()) parse_fail(where, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t k = 0; k < j.size(); ++k) out.push_back(number(j[k], where + "[" + std::to_string(k) + "]"));
  return out;
}

Vector vector_of(const Json& j, const std::string& where) {
  const auto v = numbers(j, where);
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Matrix matrix_of(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) parse_fail(where, "expected a non-empty array of rows");
  Matrix m;
  for (std::size_t r = 0; r < j.size(); ++r) {
    const auto row = numbers(j[r], where + "[" + std::to_string(r) + "]");
    if (r == 0) m.resize(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(row.size()));
    if (row.size() != static_cast<std::size_t>(m.cols())) parse_fail(where, "ragged matrix");
    for (std::size_t c = 0; c < row.size(); ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
  }
  return m;
}

// Flattens a rectangular nested array, recording its shape.
void flatten(const Json& node, std::size_t depth, std::vector<std::size_t>& shape, std::vector<double>& out,
             const std::string& where) {
  if (!node.is_array()) {
    if (depth < shape.size() || !node.is_number()) parse_fail(where, "ragged or non-numeric probability array");
    out.push_back(node.get<double>());
    return;
  }
  if (node.empty()) parse_fail(where, "empty probability array");
  if (depth == shape.size()) shape.push_back(node.size());
  if (shape[depth] != node.size()) parse_fail(where, "ragged probability array");
  for (const auto& child : node) flatten(child, depth + 1, shape, out, where);
}

Json nest(const std::vector<double>& flat, const std::vector<std::size_t>& shape, std::size_t depth, std::size_t& pos) {
  Json arr = Json::array();
  for (std::size_t k = 0; k < shape[depth]; ++k) {
    if (depth + 1 == shape.size())
      arr.push_back(flat[pos++]);
    else
      arr.push_back(nest(flat, shape, depth + 1, pos));
  }
  return arr;
}

// Prefixes Validation messages with the distribution that raised them.
template <typename Fn>
auto for_distribution(std::size_t m, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Validation) throw;
    fail(e.code(), "distribution " + std::to_string(m) + ": " + e.message());
  }
}

ReportValue report_value(const Json& j, const std::string& where) {
  if (j.is_string()) return ReportValue::symbol(j.get<std::string>());
  return ReportValue::vector(numbers(j, where));
}

ReportSpec report_spec(const Json& j, const std::string& where) {
  if (j.is_string()) {
    const std::string kind = j.get<std::string>();
    if (kind == "identity") return ReportSpec::identity();
    if (kind == "posterior") return ReportSpec::posterior();
    parse_fail(where, "unknown report kind '" + kind + "'");
  }
  if (!j.is_object() || j.size() != 1) parse_fail(where, "expected \"identity\", \"posterior\", {\"linear\"} or {\"explicit\"}");
  if (j.contains("linear")) return ReportSpec::linear_property(matrix_of(j["linear"], where + ".linear"));
  if (j.contains("explicit")) {
    const Json& table = j["explicit"];
    if (!table.is_array()) parse_fail(where + ".explicit", "expected one row per distribution");
    std::vector<std::vector<ReportValue>> rows;
    for (std::size_t m = 0; m < table.size(); ++m) {
      const std::string w = where + ".explicit[" + std::to_string(m) + "]";
      if (!table[m].is_array()) parse_fail(w, "expected one report per signal");
      std::vector<ReportValue> row;
      for (std::size_t s = 0; s < table[m].size(); ++s)
        row.push_back(report_value(table[m][s], w + "[" + std::to_string(s) + "]"));
      rows.push_back(std::move(row));
    }
    return ReportSpec::explicit_table(std::move(rows));
  }
  parse_fail(where, "unknown report kind '" + j.begin().key() + "'");
}

Json report_value_json(const ReportValue& v) {
  if (v.symbolic()) return v.label;
  return v.payload;
}

Json report_spec_json(const ReportSpec& spec) {
  switch (spec.kind) {
    case ReportKind::Identity:
      return "identity";
    case ReportKind::Posterior:
      return "posterior";
    case ReportKind::Linear:
      return Json{{"linear", to_json(spec.linear)}};
    case ReportKind::Explicit: {
      Json rows = Json::array();
      for (const auto& row : spec.explicit_) {
        Json r = Json::array();
        for (const auto& v : row) r.push_back(report_value_json(v));
        rows.push_back(std::move(r));
      }
      return Json{{"explicit", std::move(rows)}};
    }
  }
  return nullptr;
}

ConditionalModel model_from_json(const Json& j, const std::string& where) {
  allow_keys(j, {"prior", "likelihoods"}, where);
  ConditionalModel model;
  model.prior = vector_of(field(j, "prior", where), where + ".prior");
  const Json& ls = field(j, "likelihoods", where);
  if (!ls.is_array() || ls.empty()) parse_fail(where + ".likelihoods", "expected one matrix per agent");
  for (std::size_t i = 0; i < ls.size(); ++i)
    model.likelihoods.push_back(matrix_of(ls[i], where + ".likelihoods[" + std::to_string(i) + "]"));
  return model;
}

Json model_json(const ConditionalModel& model) {
  Json ls = Json::array();
  for (const auto& l : model.likelihoods) ls.push_back(to_json(l));
  return Json{{"prior", to_json(model.prior)}, {"likelihoods", std::move(ls)}};
}

struct Expanded {
  std::vector<JointDistribution> distributions;
  std::vector<std::optional<ConditionalModel>> models;
};

Expanded expand_generator(const Json& g) {
  const std::string where = "generator";
  allow_keys(g, {"kind", "params", "seed", "count"}, where);
  const std::string kind = text(field(g, "kind", where), where + ".kind");
  const std::uint64_t seed = g.contains("seed") ? count(g["seed"], where + ".seed") : 0;
  const std::size_t n = count(field(g, "count", where), where + ".count");
  if (n == 0) fail(ErrorCode::Validation, "generator count must be positive");
  const Json params = g.contains("params") ? g["params"] : Json::object();
  const std::string pw = where + ".params";
  Expanded out;
  if (kind == "sign-pattern") {
    allow_keys(params, {"signs", "marginals"}, pw);
    const Matrix s = matrix_of(field(params, "signs", pw), pw + ".signs");
    SignMatrix signs = s.cast<int>();
    if (!s.isApprox(signs.cast<double>())) parse_fail(pw + ".signs", "signs must be integers");
    std::optional<FixedMarginals> fixed;
    if (params.contains("marginals")) {
      const Json& mj = params["marginals"];
      allow_keys(mj, {"row", "column"}, pw + ".marginals");
      fixed = FixedMarginals{vector_of(field(mj, "row", pw), pw + ".marginals.row"),
                             vector_of(field(mj, "column", pw), pw + ".marginals.column")};
    }
    out.distributions = sample_sign_pattern(signs, n, seed, fixed);
  } else if (kind == "conditional-independent" || kind == "dirichlet") {
    if (kind == "dirichlet")
      allow_keys(params, {"states", "signals", "alpha"}, pw);
    else
      allow_keys(params, {"states", "signals", "prior"}, pw);
    const std::size_t states = count(field(params, "states", pw), pw + ".states");
    const Json& sj = field(params, "signals", pw);
    if (!sj.is_array()) parse_fail(pw + ".signals", "expected signal counts per agent");
    std::vector<std::size_t> signals;
    for (const auto& c : sj) signals.push_back(count(c, pw + ".signals"));
    if (kind == "dirichlet") {
      const double alpha = params.contains("alpha") ? number(params["alpha"], pw + ".alpha") : 1.0;
      out.distributions = sample_dirichlet(states, signals, n, seed, alpha);
    } else {
      std::optional<Vector> prior;
      if (params.contains("prior")) prior = vector_of(params["prior"], pw + ".prior");
      for (auto& model : sample_conditional_independent(states, signals, n, seed, prior)) {
        out.distributions.push_back(model.joint());
        out.models.emplace_back(std::move(model));
      }
    }
  } else {
    parse_fail(where + ".kind", "unknown generator '" + kind + "'");
  }
  return out;
}

}  // namespace

ProblemInstance instance_from_json(const Json& doc) {
  const std::string where = "instance";
  allow_keys(doc, {"schema_version", "states", "signals", "task_count", "reports", "distributions", "models", "generator"},
             where);
  if (doc.contains("schema_version") && count(doc["schema_version"], "schema_version") != kSchemaVersion)
    parse_fail("schema_version", "unsupported version");
  const std::size_t tasks = doc.contains("task_count") ? count(doc["task_count"], "task_count") : 1;

  const int sources = static_cast<int>(doc.contains("distributions")) + static_cast<int>(doc.contains("generator")) +
                      static_cast<int>(doc.contains("models") && !doc.contains("distributions"));
  if (sources != 1 || (doc.contains("generator") && doc.contains("models")))
    parse_fail(where, "give exactly one of 'distributions', 'models' or 'generator'");

  Expanded data;
  if (doc.contains("generator")) {
    data = expand_generator(doc["generator"]);
  } else {
    if (doc.contains("models")) {
      const Json& ms = doc["models"];
      if (!ms.is_array() || ms.empty()) parse_fail("models", "expected a non-empty array");
      for (std::size_t m = 0; m < ms.size(); ++m) {
        ConditionalModel model = model_from_json(ms[m], "models[" + std::to_string(m) + "]");
        for_distribution(m, [&] {
          model.validate();
          return 0;
        });
        data.models.emplace_back(std::move(model));
      }
    }
    if (doc.contains("distributions")) {
      const Json& ds = doc["distributions"];
      if (!ds.is_array() || ds.empty()) parse_fail("distributions", "expected a non-empty array");
      for (std::size_t m = 0; m < ds.size(); ++m) {
        const std::string w = "distributions[" + std::to_string(m) + "]";
        std::vector<std::size_t> shape;
        std::vector<double> flat;
        flatten(ds[m], 0, shape, flat, w);
        if (shape.size() < 2) parse_fail(w, "need axes (state, signal_1, ...)");
        const std::vector<std::size_t> signals(shape.begin() + 1, shape.end());
        data.distributions.push_back(
            for_distribution(m, [&] { return JointDistribution(shape[0], signals, std::move(flat)); }));
      }
      if (!data.models.empty()) {
        if (data.models.size() != data.distributions.size())
          parse_fail("models", "need one model per distribution");
        for (std::size_t m = 0; m < data.models.size(); ++m) {
          const JointDistribution joint = data.models[m]->joint();
          if (!joint.same_spaces(data.distributions[m]))
            fail(ErrorCode::Validation, "distribution " + std::to_string(m) + ": model shape differs");
          for (std::size_t k = 0; k < joint.mass().size(); ++k)
            if (std::abs(joint.mass()[k] - data.distributions[m].mass()[k]) > kDedupTolerance)
              fail(ErrorCode::Validation, "distribution " + std::to_string(m) + ": model does not reproduce it");
        }
      }
    } else {
      for (auto& model : data.models) data.distributions.push_back(model->joint());
    }
  }
  if (data.models.empty()) data.models.resize(data.distributions.size());

  const JointDistribution& first = data.distributions.front();
  if (doc.contains("states") || doc.contains("signals")) {
    std::vector<std::string> states = doc.contains("states") ? strings(doc["states"], "states") : first.state_labels();
    std::vector<std::vector<std::string>> signals;
    if (doc.contains("signals")) {
      const Json& sj = doc["signals"];
      if (!sj.is_array()) parse_fail("signals", "expected label arrays per agent");
      for (std::size_t i = 0; i < sj.size(); ++i) signals.push_back(strings(sj[i], "signals[" + std::to_string(i) + "]"));
    } else {
      for (std::size_t i = 0; i < first.num_agents(); ++i) signals.push_back(first.signal_labels(i));
    }
    for (auto& d : data.distributions) {
      try {
        d.set_labels(states, signals);
      } catch (const Error& e) {
        parse_fail("labels", e.message());
      }
    }
  }

  std::vector<ReportSpec> specs;
  const std::size_t agents = first.num_agents();
  if (!doc.contains("reports")) {
    specs.assign(agents, ReportSpec::identity());
  } else if (doc["reports"].is_array()) {
    const Json& rs = doc["reports"];
    if (rs.size() != agents) parse_fail("reports", "need one report spec per agent");
    for (std::size_t i = 0; i < rs.size(); ++i) specs.push_back(report_spec(rs[i], "reports[" + std::to_string(i) + "]"));
  } else {
    specs.assign(agents, report_spec(doc["reports"], "reports"));
  }
  return ProblemInstance(std::move(data.distributions), std::move(specs), tasks, std::move(data.models));
}

ProblemInstance instance_from_string(const std::string& text_in) {
  Json doc;
  try {
    doc = Json::parse(text_in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("malformed JSON: ") + e.what());
  }
  return instance_from_json(doc);
}

namespace {

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Parse, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

Json parse_text(const std::string& body, const std::string& origin) {
  try {
    return Json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, origin + ": malformed JSON: " + e.what());
  }
}

}  // namespace

ProblemInstance parse_instance(const std::filesystem::path& path) {
  return instance_from_json(parse_text(read_text(path), path.string()));
}

Json instance_to_json(const ProblemInstance& instance) {
  const JointDistribution& first = instance.distribution(0);
  Json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["states"] = first.state_labels();
  Json signals = Json::array();
  for (std::size_t i = 0; i < first.num_agents(); ++i) signals.push_back(first.signal_labels(i));
  doc["signals"] = std::move(signals);
  doc["task_count"] = instance.task_count();
  Json reports = Json::array();
  for (std::size_t i = 0; i < instance.num_agents(); ++i) reports.push_back(report_spec_json(instance.report_spec(i)));
  doc["reports"] = std::move(reports);
  Json ds = Json::array();
  for (const auto& d : instance.distributions()) {
    std::vector<std::size_t> shape{d.num_states()};
    shape.insert(shape.end(), d.signal_counts().begin(), d.signal_counts().end());
    std::size_t pos = 0;
    ds.push_back(nest(d.mass(), shape, 0, pos));
  }
  doc["distributions"] = std::move(ds);
  if (instance.fully_factored()) {
    Json ms = Json::array();
    for (std::size_t m = 0; m < instance.num_distributions(); ++m) ms.push_back(model_json(*instance.factorization(m)));
    doc["models"] = std::move(ms);
  }
  return doc;
}

void save_instance(const ProblemInstance& instance, const std::filesystem::path& path) {
  write_text(path, dump(instance_to_json(instance)));
}

Json mechanism_to_json(const ScoringMechanism& mech) {
  Json agents = Json::array();
  for (std::size_t i = 0; i < mech.num_agents(); ++i) {
    const PaymentTable& shape = mech.table(i, 0);
    Json tables = Json::array();
    for (std::size_t t = 0; t < mech.task_count(); ++t) tables.push_back(mech.table(i, t).values());
    agents.push_back(Json{{"own", shape.own()}, {"peer", shape.peer()}, {"tables", std::move(tables)}});
  }
  return Json{{"schema_version", kSchemaVersion},
              {"name", mech.name()},
              {"task_count", mech.task_count()},
              {"agents", std::move(agents)}};
}

ScoringMechanism mechanism_from_json(const Json& doc) {
  const std::string where = "mechanism";
  allow_keys(doc, {"schema_version", "name", "task_count", "agents"}, where);
  if (doc.contains("schema_version") && count(doc["schema_version"], "schema_version") != kSchemaVersion)
    parse_fail("schema_version", "unsupported version");
  const std::size_t tasks = count(field(doc, "task_count", where), "task_count");
  if (tasks == 0) fail(ErrorCode::Validation, "task count must be positive");
  const std::string name = doc.contains("name") ? text(doc["name"], "name") : "scoring";
  const Json& agents = field(doc, "agents", where);
  if (!agents.is_array() || agents.empty()) parse_fail("agents", "expected a non-empty array");
  std::vector<std::vector<PaymentTable>> all;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const std::string w = "agents[" + std::to_string(i) + "]";
    allow_keys(agents[i], {"own", "peer", "tables"}, w);
    const std::size_t own = count(field(agents[i], "own", w), w + ".own");
    const std::size_t peer = count(field(agents[i], "peer", w), w + ".peer");
    const Json& tables = field(agents[i], "tables", w);
    if (!tables.is_array() || tables.size() != tasks) parse_fail(w + ".tables", "need one table per task");
    std::vector<PaymentTable> per_task;
    for (std::size_t t = 0; t < tasks; ++t) {
      PaymentTable table(own, peer, tasks);
      auto values = numbers(tables[t], w + ".tables[" + std::to_string(t) + "]");
      if (values.size() != table.size())
        parse_fail(w + ".tables", "expected " + std::to_string(table.size()) + " entries, got " +
                                      std::to_string(values.size()));
      table.values() = std::move(values);
      per_task.push_back(std::move(table));
    }
    all.push_back(std::move(per_task));
  }
  return ScoringMechanism(std::move(all), name);
}

ScoringMechanism parse_mechanism(const std::filesystem::path& path) {
  return mechanism_from_json(parse_text(read_text(path), path.string()));
}

void save_mechanism(const ScoringMechanism& mech, const std::filesystem::path& path) {
  write_text(path, dump(mechanism_to_json(mech)));
}

Json to_json(const Vector& v) { return std::vector<double>(v.begin(), v.end()); }

Json to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

Json member_json(const PosteriorMember& m) {
  return Json{{"distribution", m.distribution}, {"signal", m.signal}, {"posterior", to_json(m.posterior)}};
}

struct WitnessJson {
  Json operator()(std::monostate) const { return nullptr; }
  Json operator()(const CollisionWitness& w) const {
    return Json{{"type", "collision"},         {"agent", w.agent},
                {"report_a", w.report_a},      {"report_b", w.report_b},
                {"marginal", w.marginal_key},  {"first", member_json(w.first)},
                {"second", member_json(w.second)}, {"distance", w.distance}};
  }
  Json operator()(const ConvexWitness& w) const {
    Json a = Json::array(), b = Json::array();
    for (const auto& m : w.members_a) a.push_back(member_json(m));
    for (const auto& m : w.members_b) b.push_back(member_json(m));
    return Json{{"type", "convex"},       {"agent", w.agent},        {"report_a", w.report_a},
                {"report_b", w.report_b}, {"marginal", w.marginal_key}, {"members_a", std::move(a)},
                {"members_b", std::move(b)}, {"beta", to_json(w.beta)}, {"beta_prime", to_json(w.beta_prime)},
                {"point", to_json(w.point)}};
  }
  Json operator()(const PermutationWitness& w) const {
    return Json{{"type", "permutation"}, {"distribution", w.distribution}, {"partner", w.partner},
                {"agent", w.agent},       {"permutation", w.permutation},   {"residual", w.residual}};
  }
  Json operator()(const RankWitness& w) const {
    return Json{{"type", "rank"},
                {"distribution", w.distribution},
                {"agent", w.agent},
                {"rank", w.rank},
                {"required", w.required},
                {"singular_values", to_json(w.singular_values)},
                {"null_vector", to_json(w.null_vector)}};
  }
};

}  // namespace

Json to_json(const CheckReport& report) {
  return Json{{"name", report.name},
              {"outcome", std::string(to_string(report.outcome))},
              {"detail", report.detail},
              {"witness", std::visit(WitnessJson{}, report.witness)}};
}

Json to_json(const Verdict& verdict) {
  Json doc{{"distribution", verdict.distribution},
           {"agent", verdict.agent},
           {"status", std::string(to_string(verdict.status))},
           {"margin", verdict.margin},
           {"deviations_checked", verdict.deviations_checked},
           {"witness", nullptr}};
  if (verdict.witness) {
    Json strategy = Json::array();
    for (const auto& m : verdict.witness->strategy.per_task) strategy.push_back(to_json(m));
    doc["witness"] = Json{{"gain", verdict.witness->gain}, {"strategy", std::move(strategy)}};
  }
  return doc;
}

Json to_json(const SynthesisResult& result) {
  Json lp = Json::array();
  for (const auto& s : result.lp_stats)
    lp.push_back(Json{{"variables", s.variables}, {"constraints", s.constraints}, {"iterations", s.iterations}});
  return Json{{"feasible", result.feasible},
              {"margin", result.margin},
              {"lp_status", std::string(to_string(result.status))},
              {"lp", std::move(lp)}};
}

Json to_json(const PowerDiagram& diagram) {
  Json cells = Json::array();
  for (std::size_t k = 0; k < diagram.size(); ++k)
    cells.push_back(Json{{"label", diagram.labels[k]}, {"site", to_json(diagram.sites[k])}, {"weight", diagram.weights[k]}});
  return cells;
}

std::string dump(const Json& doc) { return doc.dump(2) + "\n"; }

void write_text(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Validation, "cannot write " + path.string());
  out << body;
  if (!out) fail(ErrorCode::Validation, "failed writing " + path.string());
}

}  // namespace elicit
