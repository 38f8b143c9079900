#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "amg/operators.hpp"

namespace amg {

enum class ActionKind : std::uint8_t { Activate, DefenseSuccess, DefenseFail, CompleteSuccess, CompleteFail };

struct ActionLabel {
  ActionKind kind = ActionKind::Activate;
  std::uint32_t target = 0;  // attack node index, or defense index for defense kinds

  bool controllable() const { return kind == ActionKind::Activate; }
  bool is_defense() const { return kind == ActionKind::DefenseSuccess || kind == ActionKind::DefenseFail; }
  friend bool operator==(const ActionLabel&, const ActionLabel&) = default;
};

std::string label_name(const Amg& amg, const ActionLabel& label);

struct ClockRef {
  enum class Kind : std::uint8_t { Attack, Defense } kind = Kind::Attack;
  std::uint32_t index = 0;
  friend bool operator==(const ClockRef&, const ClockRef&) = default;
};

std::string clock_name(const Amg& amg, const ClockRef& clock);

// Attack clocks are indexed by node and are zero for inactive attacks.
// `cost` is the accumulated price of the run so far.
struct ClockValuation {
  std::vector<std::int64_t> attack;
  std::vector<std::int64_t> defense;
  std::int64_t global_time = 0;
  std::int64_t cost = 0;

  friend bool operator==(const ClockValuation&, const ClockValuation&) = default;
};

ClockValuation initial_valuation(const Amg& amg);

struct Event {
  enum class Kind : std::uint8_t { Attack, Defense } kind = Kind::Attack;
  std::uint32_t index = 0;
  friend bool operator==(const Event&, const Event&) = default;
};

struct EligibleEvents {
  std::optional<std::int64_t> delay;  // empty when nothing can ever happen
  std::vector<Event> events;          // attacks first, then defenses, each by index
  double kappa() const { return events.empty() ? 0.0 : 1.0 / static_cast<double>(events.size()); }
};

EligibleEvents eligible_events(const Amg& amg, const AttackState& s, const ClockValuation& v);

std::int64_t cost_rate(const Amg& amg, const AttackState& s);

// Lets `delay` time units elapse in s, accruing delay * rate.
ClockValuation advance(const Amg& amg, const AttackState& s, const ClockValuation& v, std::int64_t delay);

struct Configuration {
  AttackState state;
  ClockValuation clocks;
};

// Fires an enabled label. Throws PreconditionError otherwise.
Configuration fire(const Amg& amg, const AttackState& s, const ClockValuation& v, const ActionLabel& label);

struct Transition {
  std::uint32_t source = 0;
  ActionLabel label;
  std::uint32_t target = 0;
  std::int64_t cost = 0;
  ClockRef reset;
};

struct ClockBound {
  ClockRef clock;
  std::int64_t bound = 0;
};

struct BuildLimits {
  std::size_t max_locations = 1'000'000;
};

class Ptmdp {
 public:
  const std::vector<AttackState>& locations() const { return locations_; }
  std::size_t size() const { return locations_.size(); }
  std::uint32_t initial() const { return initial_; }
  std::optional<std::uint32_t> goal() const { return goal_; }
  const std::vector<Transition>& transitions() const { return transitions_; }
  std::span<const Transition> transitions_from(std::uint32_t loc) const {
    return {transitions_.data() + offsets_[loc], transitions_.data() + offsets_[loc + 1]};
  }
  std::int64_t location_cost_rate(std::uint32_t loc) const { return rates_[loc]; }
  std::vector<ClockBound> invariant(const Amg& amg, std::uint32_t loc) const;
  std::optional<std::uint32_t> find(const AttackState& s) const;

 private:
  friend Ptmdp build_ptmdp(const Amg&, const BuildLimits&);
  std::vector<AttackState> locations_;
  std::uint32_t initial_ = 0;
  std::optional<std::uint32_t> goal_;
  std::vector<Transition> transitions_;
  std::vector<std::size_t> offsets_;
  std::vector<std::int64_t> rates_;
};

Ptmdp build_ptmdp(const Amg& amg, const BuildLimits& limits = {});

}  // namespace amg
