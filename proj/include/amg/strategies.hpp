#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "amg/engine.hpp"

namespace amg {

class NeverStrategy final : public Strategy {
 public:
  NodeSet decide(const Amg&, const AttackState&, const ClockValuation&) const override { return {}; }
  std::string describe() const override { return "never"; }
};

// Activates everything available at every decision point.
class GreedyAllStrategy final : public Strategy {
 public:
  NodeSet decide(const Amg& amg, const AttackState& s, const ClockValuation&) const override;
  NodeSet decide_given(const Amg&, const AttackState&, const ClockValuation&, const NodeSet& available) const override {
    return available;
  }
  std::string describe() const override { return "greedy-all"; }
};

// Activates the listed attacks whenever they are available.
class FixedSetStrategy final : public Strategy {
 public:
  FixedSetStrategy(NodeSet attacks, std::string name) : attacks_(attacks), name_(std::move(name)) {}
  NodeSet decide(const Amg& amg, const AttackState& s, const ClockValuation&) const override;
  NodeSet decide_given(const Amg&, const AttackState&, const ClockValuation&, const NodeSet& available) const override {
    return attacks_ & available;
  }
  std::string describe() const override { return name_; }

 private:
  NodeSet attacks_;
  std::string name_;
};

struct StrategyRule {
  NodeSet activated;      // must all be in A
  NodeSet not_activated;  // must all be outside A
  NodeSet completed;      // must all be in C
  NodeSet not_completed;  // must all be outside C
  NodeSet activate;
};

// First matching rule wins; the default applies when none matches.
class RuleStrategy final : public Strategy {
 public:
  RuleStrategy(std::vector<StrategyRule> rules, NodeSet fallback, std::string name)
      : rules_(std::move(rules)), default_(fallback), name_(std::move(name)) {}
  NodeSet decide(const Amg& amg, const AttackState& s, const ClockValuation&) const override;
  std::string describe() const override { return name_; }
  const std::vector<StrategyRule>& rules() const { return rules_; }
  const NodeSet& fallback() const { return default_; }

 private:
  std::vector<StrategyRule> rules_;
  NodeSet default_;
  std::string name_;
};

// Parses a rule document (JSON text). Throws ParseError or UnknownIdError.
std::shared_ptr<RuleStrategy> parse_rule_strategy(const Amg& amg, std::string_view json_text, std::string name);

// "never", "greedy-all", "only:<id>,<id>" or a path to a rule file.
std::shared_ptr<const Strategy> make_strategy(const Amg& amg, const std::string& spec);

}  // namespace amg
