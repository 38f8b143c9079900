#include "amg/io.hpp"

#include <unistd.h>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace amg {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ParseError(path + ": " + what);
}

void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed) ok = ok || it.key() == k;
    if (!ok) fail(path + "/" + it.key(), "unknown key");
  }
}

const json& require(const json& obj, const std::string& path, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(path, std::string("missing key '") + key + "'");
  return *it;
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

std::int64_t get_int(const json& j, const std::string& path) {
  if (j.is_number_unsigned()) {
    auto v = j.get<std::uint64_t>();
    if (v > static_cast<std::uint64_t>(INT64_MAX)) fail(path, "integer out of range");
    return static_cast<std::int64_t>(v);
  }
  if (j.is_number_integer()) return j.get<std::int64_t>();
  fail(path, "expected an integer");
}

Probability get_prob(const json& j, const std::string& path) {
  try {
    if (j.is_number_integer() || j.is_number_unsigned()) return Probability::ratio(get_int(j, path), 1);
    if (j.is_number_float()) return Probability::from_double(j.get<double>());
    if (j.is_string()) return Probability::parse(j.get<std::string>());
  } catch (const ParseError& e) {
    fail(path, e.what());
  }
  fail(path, "expected a probability");
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

json parse_json(std::string_view text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    auto [line, col] = line_column(text, e.byte);
    std::string msg = e.what();
    throw ParseError(std::string(what) + ": syntax error at line " + std::to_string(line) + ", column " +
                         std::to_string(col) + ": " + msg,
                     line, col);
  }
}

ordered_json prob_json(const Probability& p) {
  if (p.den() == 1) return p.num();
  return Probability::parse(p.text()).value();
}

}  // namespace

AmgModel parse_model(std::string_view text) {
  json doc = parse_json(text, "model");
  if (!doc.is_object()) fail("", "model must be a JSON object");
  check_keys(doc, "", {"root", "nodes", "edges", "defenses", "description"});
  AmgModel m;
  m.root = get_string(require(doc, "", "root"), "/root");
  const json& nodes = require(doc, "", "nodes");
  if (!nodes.is_array()) fail("/nodes", "expected a list");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string p = "/nodes/" + std::to_string(i);
    const json& n = nodes[i];
    if (!n.is_object()) fail(p, "expected an object");
    check_keys(n, p, {"id", "kind", "refinement", "t", "p", "c", "cp"});
    NodeSpec s;
    s.id = get_string(require(n, p, "id"), p + "/id");
    const std::string kind = get_string(require(n, p, "kind"), p + "/kind");
    if (kind == "subgoal") s.kind = NodeKind::Subgoal;
    else if (kind == "attack") s.kind = NodeKind::Attack;
    else fail(p + "/kind", "expected \"subgoal\" or \"attack\"");
    if (n.contains("refinement")) {
      const std::string r = get_string(n["refinement"], p + "/refinement");
      if (r == "and") s.refinement = Refinement::And;
      else if (r == "or") s.refinement = Refinement::Or;
      else fail(p + "/refinement", "expected \"and\" or \"or\"");
    }
    if (n.contains("t")) s.time = get_int(n["t"], p + "/t");
    if (n.contains("p")) s.prob = get_prob(n["p"], p + "/p");
    if (n.contains("c")) s.cost = get_int(n["c"], p + "/c");
    if (n.contains("cp")) s.cost_rate = get_int(n["cp"], p + "/cp");
    m.nodes.push_back(std::move(s));
  }
  if (doc.contains("edges")) {
    const json& edges = doc["edges"];
    if (!edges.is_array()) fail("/edges", "expected a list");
    for (std::size_t i = 0; i < edges.size(); ++i) {
      const std::string p = "/edges/" + std::to_string(i);
      if (!edges[i].is_array() || edges[i].size() != 2) fail(p, "expected [parent, child]");
      m.edges.emplace_back(get_string(edges[i][0], p + "/0"), get_string(edges[i][1], p + "/1"));
    }
  }
  if (doc.contains("defenses")) {
    const json& defs = doc["defenses"];
    if (!defs.is_array()) fail("/defenses", "expected a list");
    for (std::size_t i = 0; i < defs.size(); ++i) {
      const std::string p = "/defenses/" + std::to_string(i);
      const json& d = defs[i];
      if (!d.is_object()) fail(p, "expected an object");
      check_keys(d, p, {"id", "t", "p", "defends"});
      DefenseSpec s;
      s.id = get_string(require(d, p, "id"), p + "/id");
      s.period = get_int(require(d, p, "t"), p + "/t");
      s.prob = get_prob(require(d, p, "p"), p + "/p");
      const json& targets = require(d, p, "defends");
      if (!targets.is_array()) fail(p + "/defends", "expected a list");
      for (std::size_t k = 0; k < targets.size(); ++k)
        s.defends.push_back(get_string(targets[k], p + "/defends/" + std::to_string(k)));
      m.defenses.push_back(std::move(s));
    }
  }
  return m;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

AmgModel load_model(const std::string& path) { return parse_model(read_file(path)); }

std::string serialize_model(const AmgModel& m) {
  ordered_json doc;
  doc["root"] = m.root;
  doc["nodes"] = ordered_json::array();
  for (const auto& n : m.nodes) {
    ordered_json j;
    j["id"] = n.id;
    j["kind"] = n.kind == NodeKind::Subgoal ? "subgoal" : "attack";
    if (n.refinement) j["refinement"] = *n.refinement == Refinement::And ? "and" : "or";
    if (n.time) j["t"] = *n.time;
    if (n.prob) j["p"] = prob_json(*n.prob);
    if (n.cost) j["c"] = *n.cost;
    if (n.cost_rate) j["cp"] = *n.cost_rate;
    doc["nodes"].push_back(std::move(j));
  }
  doc["edges"] = ordered_json::array();
  for (const auto& [p, c] : m.edges) doc["edges"].push_back({p, c});
  doc["defenses"] = ordered_json::array();
  for (const auto& d : m.defenses) {
    ordered_json j;
    j["id"] = d.id;
    j["t"] = d.period;
    j["p"] = prob_json(d.prob);
    j["defends"] = d.defends;
    doc["defenses"].push_back(std::move(j));
  }
  return doc.dump(2) + "\n";
}

void write_file_atomic(const std::string& path, std::string_view content) {
  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error("cannot write '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw Error("cannot rename onto '" + path + "'");
  }
}

std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

BudgetSpec parse_budget_spec(std::string_view text) {
  json doc = parse_json(text, "budget spec");
  if (!doc.is_object()) fail("", "budget spec must be a JSON object");
  check_keys(doc, "", {"radix", "budget", "defenses", "cost_budgets", "runs", "screen_runs", "max_final_points",
                       "min_reach_prob", "seed", "horizon", "max_exact_states", "description"});
  BudgetSpec s;
  s.constraint.radix = get_int(require(doc, "", "radix"), "/radix");
  s.constraint.budget = get_int(require(doc, "", "budget"), "/budget");
  const json& defs = require(doc, "", "defenses");
  if (!defs.is_array()) fail("/defenses", "expected a list");
  for (std::size_t i = 0; i < defs.size(); ++i) {
    const std::string p = "/defenses/" + std::to_string(i);
    if (!defs[i].is_object()) fail(p, "expected an object");
    check_keys(defs[i], p, {"id", "base"});
    s.constraint.defenses.push_back(get_string(require(defs[i], p, "id"), p + "/id"));
    s.constraint.bases.push_back(get_int(require(defs[i], p, "base"), p + "/base"));
  }
  if (doc.contains("cost_budgets")) {
    if (!doc["cost_budgets"].is_array()) fail("/cost_budgets", "expected a list");
    for (std::size_t i = 0; i < doc["cost_budgets"].size(); ++i)
      s.cost_budgets.push_back(get_int(doc["cost_budgets"][i], "/cost_budgets/" + std::to_string(i)));
  }
  auto opt_size = [&](const char* key, std::size_t& out) {
    if (doc.contains(key)) {
      auto v = get_int(doc[key], std::string("/") + key);
      if (v < 0) fail(std::string("/") + key, "must be non-negative");
      out = static_cast<std::size_t>(v);
    }
  };
  opt_size("runs", s.frontier.runs);
  opt_size("screen_runs", s.frontier.screen_runs);
  opt_size("max_final_points", s.frontier.max_final_points);
  opt_size("max_exact_states", s.frontier.solver.max_states);
  if (doc.contains("min_reach_prob")) {
    if (!doc["min_reach_prob"].is_number()) fail("/min_reach_prob", "expected a number");
    s.frontier.min_reach_prob = doc["min_reach_prob"].get<double>();
  }
  if (doc.contains("seed")) s.frontier.seed = static_cast<std::uint64_t>(get_int(doc["seed"], "/seed"));
  if (doc.contains("horizon")) s.frontier.horizon = get_int(doc["horizon"], "/horizon");
  return s;
}

std::string frontier_csv_header(const std::vector<std::string>& defenses) {
  std::string h = "config_id";
  for (const auto& d : defenses) h += ",t_d_" + d;
  return h + ",c_max,expected_time,expected_cost,reach_prob,method\n";
}

std::string frontier_csv_row(const CsvRow& r) {
  std::string out = std::to_string(r.config_id);
  for (auto t : r.periods) out += "," + std::to_string(t);
  out += ",";
  if (r.c_max) out += std::to_string(*r.c_max);
  if (r.point) {
    out += "," + format_number(r.point->expected_time) + "," + format_number(r.point->expected_cost) + "," +
           format_number(r.point->reach_prob) + "," + method_name(r.point->method);
  } else {
    out += std::string(",,,0,") + method_name(r.method);
  }
  return out + "\n";
}

std::string frontier_csv(const Amg& amg, const FrontierReport& report) {
  std::vector<std::string> ids;
  std::vector<std::int64_t> periods;
  for (DefenseIndex d = 0; d < amg.defense_count(); ++d) {
    ids.push_back(amg.defense_id(d));
    periods.push_back(amg.defense(d).period);
  }
  std::string out = frontier_csv_header(ids);
  for (const auto& b : report.budgets) out += frontier_csv_row({0, periods, b.c_max, b.point, report.method});
  return out;
}

std::string sweep_csv(const SweepResult& sweep) {
  std::string out = frontier_csv_header(sweep.defenses);
  for (const auto& c : sweep.configs) {
    if (c.error) {
      out += frontier_csv_row({c.id, c.periods, std::nullopt, std::nullopt, c.report.method});
      continue;
    }
    for (const auto& b : c.report.budgets) out += frontier_csv_row({c.id, c.periods, b.c_max, b.point, c.report.method});
  }
  return out;
}

std::string sweep_summary(const SweepResult& sweep) {
  std::ostringstream os;
  std::size_t errors = 0, exact = 0;
  for (const auto& c : sweep.configs) {
    errors += c.error ? 1 : 0;
    exact += !c.error && c.report.method == Method::Exact ? 1 : 0;
  }
  os << "configurations: " << sweep.configs.size() << " (exact " << exact << ", montecarlo "
     << sweep.configs.size() - exact - errors << ", failed " << errors << ")\n";
  os << "dominating configurations (own a point of the combined frontier):\n";
  for (std::size_t id : sweep.dominating) {
    const auto& c = sweep.configs[id];
    os << "  config " << id << ":";
    for (std::size_t k = 0; k < c.periods.size(); ++k) os << " t_" << sweep.defenses[k] << "=" << c.periods[k];
    os << "\n";
    for (const auto& p : c.report.frontier)
      os << "    E[T]=" << format_number(p.expected_time) << " E[C]=" << format_number(p.expected_cost) << " ("
         << p.strategy_label << ")\n";
  }
  for (const auto& c : sweep.configs)
    if (c.error) os << "  config " << c.id << " failed: " << *c.error << "\n";
  return os.str();
}

namespace {

ordered_json estimate_json(const Estimate& e) {
  ordered_json j;
  j["mean"] = e.mean;
  j["se"] = e.std_error;
  j["samples"] = e.samples;
  return j;
}

ordered_json optional_json(const std::optional<Estimate>& e) { return e ? estimate_json(*e) : ordered_json(nullptr); }

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

}  // namespace

std::string stats_json(const EvalStats& st, const std::string& strategy, std::uint64_t seed) {
  ordered_json j;
  j["strategy"] = strategy;
  j["seed"] = seed;
  j["n_runs"] = st.n_runs;
  j["n_reached"] = st.n_reached;
  j["horizon"] = st.horizon;
  j["t_max"] = st.t_max ? ordered_json(*st.t_max) : ordered_json(nullptr);
  j["c_max"] = st.c_max ? ordered_json(*st.c_max) : ordered_json(nullptr);
  j["reach_prob"] = estimate_json(st.reach_prob);
  j["time_given_time"] = optional_json(st.time_given_time);
  j["cost_given_time"] = optional_json(st.cost_given_time);
  j["cost_reach_prob"] = optional_json(st.cost_reach_prob);
  j["time_given_cost"] = optional_json(st.time_given_cost);
  j["cost_given_cost"] = optional_json(st.cost_given_cost);
  j["mean_time"] = optional_json(st.mean_time);
  j["mean_cost"] = optional_json(st.mean_cost);
  return j.dump(2) + "\n";
}

std::string stats_csv(const EvalStats& st) {
  std::string out = "statistic,mean,se,samples\n";
  auto row = [&](const char* name, const std::optional<Estimate>& e) {
    out += name;
    if (e) out += "," + format_number(e->mean) + "," + format_number(e->std_error) + "," + std::to_string(e->samples);
    else out += ",,,0";
    out += "\n";
  };
  row("reach_prob", st.reach_prob);
  row("time_given_time", st.time_given_time);
  row("cost_given_time", st.cost_given_time);
  if (st.c_max) {
    row("cost_reach_prob", st.cost_reach_prob);
    row("time_given_cost", st.time_given_cost);
    row("cost_given_cost", st.cost_given_cost);
  }
  row("mean_time", st.mean_time);
  row("mean_cost", st.mean_cost);
  return out;
}

std::string trace_text(const Amg& amg, const RunTrace& trace, std::size_t run) {
  std::string out;
  for (const auto& s : trace.steps) {
    const std::string label = s.is_delay ? "delay(" + std::to_string(s.delay) + ")" : label_name(amg, s.label);
    out += std::to_string(run) + "," + std::to_string(s.time) + "," + std::to_string(s.cost) + "," + label + "," +
           csv_quote(format_state(amg, s.to.state)) + "\n";
  }
  out += std::to_string(run) + ",";
  if (trace.outcome == Outcome::GoalReached)
    out += std::to_string(trace.attack_time) + "," + std::to_string(trace.attack_cost) + ",goal,";
  else
    out += ",,horizon,";
  out += csv_quote(trace.steps.empty() ? format_state(amg, AttackState{}) : format_state(amg, trace.steps.back().to.state));
  return out + "\n";
}

std::string policy_text(const Amg& amg, const PolicyStrategy& policy) {
  const DecisionGraph& g = policy.graph();
  std::vector<bool> seen(g.size(), false);
  std::vector<std::uint32_t> order{g.initial()};
  seen[g.initial()] = true;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const std::uint32_t s = order[i];
    if (policy.choice()[s] < 0) continue;
    for (const auto& t : g.successors(g.options(s)[policy.choice()[s]]))
      if (!seen[t.target] && t.target != DecisionGraph::goal()) {
        seen[t.target] = true;
        order.push_back(t.target);
      }
  }
  std::sort(order.begin(), order.end());
  std::string out = "node,location,clocks,budget,activate\n";
  for (std::uint32_t s : order) {
    DecisionState st = g.state(s);
    std::string clocks;
    for (NodeIndex a : elements(st.location.activated))
      clocks += (clocks.empty() ? "" : " ") + std::string("x_") + amg.node_id(a) + "=" + std::to_string(st.attack_clocks[a]);
    for (DefenseIndex d = 0; d < amg.defense_count(); ++d)
      clocks += (clocks.empty() ? "" : " ") + std::string("x_") + amg.defense_id(d) + "=" +
                std::to_string(st.defense_clocks[d]);
    NodeSet act;
    const std::int32_t c = policy.choice()[s];
    if (c >= 0 && g.options(s)[c].attack >= 0) act.set(g.options(s)[c].attack);
    out += std::to_string(s) + "," + csv_quote(format_state(amg, st.location)) + "," + csv_quote(clocks) + "," +
           (st.budget ? std::to_string(*st.budget) : std::string()) + "," + csv_quote(format_set(amg, act)) + "\n";
  }
  return out;
}

}  // namespace amg
