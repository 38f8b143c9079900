#include "amg/strategies.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace amg {

using nlohmann::json;

NodeSet GreedyAllStrategy::decide(const Amg& amg, const AttackState& s, const ClockValuation&) const {
  return available_activations(amg, s);
}

NodeSet FixedSetStrategy::decide(const Amg& amg, const AttackState& s, const ClockValuation&) const {
  return attacks_ & available_activations(amg, s);
}

NodeSet RuleStrategy::decide(const Amg&, const AttackState& s, const ClockValuation&) const {
  for (const auto& r : rules_) {
    if (!subset_of(r.activated, s.activated)) continue;
    if ((r.not_activated & s.activated).any()) continue;
    if (!subset_of(r.completed, s.completed)) continue;
    if ((r.not_completed & s.completed).any()) continue;
    return r.activate;
  }
  return default_;
}

namespace {

NodeSet node_list(const Amg& amg, const json& j, const std::string& where, bool attacks_only) {
  if (!j.is_array()) throw ParseError(where + ": expected a list of ids");
  NodeSet out;
  for (const auto& e : j) {
    if (!e.is_string()) throw ParseError(where + ": expected a list of ids");
    const std::string id = e.get<std::string>();
    auto n = amg.find_node(id);
    if (!n) throw UnknownIdError(id);
    if (attacks_only && !amg.is_attack(*n)) throw UnknownIdError(id + " (not an attack)");
    out.set(*n);
  }
  return out;
}

}  // namespace

std::shared_ptr<RuleStrategy> parse_rule_strategy(const Amg& amg, std::string_view text, std::string name) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("strategy file: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("strategy file: expected an object");
  std::vector<StrategyRule> rules;
  NodeSet fallback;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (it.key() == "rules") {
      if (!it->is_array()) throw ParseError("strategy file: /rules must be a list");
      std::size_t k = 0;
      for (const auto& r : *it) {
        const std::string where = "/rules/" + std::to_string(k++);
        if (!r.is_object()) throw ParseError("strategy file: " + where + " must be an object");
        StrategyRule rule;
        bool has_activate = false;
        for (auto f = r.begin(); f != r.end(); ++f) {
          const std::string at = where + "/" + f.key();
          if (f.key() == "activated") rule.activated = node_list(amg, *f, at, true);
          else if (f.key() == "not_activated") rule.not_activated = node_list(amg, *f, at, true);
          else if (f.key() == "completed") rule.completed = node_list(amg, *f, at, false);
          else if (f.key() == "not_completed") rule.not_completed = node_list(amg, *f, at, false);
          else if (f.key() == "activate") {
            rule.activate = node_list(amg, *f, at, true);
            has_activate = true;
          } else {
            throw ParseError("strategy file: unknown key " + at);
          }
        }
        if (!has_activate) throw ParseError("strategy file: " + where + " has no 'activate' list");
        rules.push_back(rule);
      }
    } else if (it.key() == "default") {
      fallback = node_list(amg, *it, "/default", true);
    } else {
      throw ParseError("strategy file: unknown key /" + it.key());
    }
  }
  return std::make_shared<RuleStrategy>(std::move(rules), fallback, std::move(name));
}

std::shared_ptr<const Strategy> make_strategy(const Amg& amg, const std::string& spec) {
  if (spec == "never") return std::make_shared<NeverStrategy>();
  if (spec == "greedy-all") return std::make_shared<GreedyAllStrategy>();
  if (spec.rfind("only:", 0) == 0) {
    NodeSet set;
    std::stringstream ss(spec.substr(5));
    std::string id;
    while (std::getline(ss, id, ',')) {
      if (id.empty()) continue;
      NodeIndex n = amg.node_index(id);
      if (!amg.is_attack(n)) throw UnknownIdError(id + " (not an attack)");
      set.set(n);
    }
    return std::make_shared<FixedSetStrategy>(set, spec);
  }
  std::ifstream in(spec, std::ios::binary);
  if (!in) throw Error("unknown strategy '" + spec + "' (not a builtin and not a readable file)");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_rule_strategy(amg, buf.str(), spec);
}

}  // namespace amg
