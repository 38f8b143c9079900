#include "amg/state_space.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>

namespace amg {

std::string label_name(const Amg& amg, const ActionLabel& label) {
  switch (label.kind) {
    case ActionKind::Activate:
      return "activate(" + amg.node_id(label.target) + ")";
    case ActionKind::CompleteSuccess:
      return "complete(" + amg.node_id(label.target) + ")";
    case ActionKind::CompleteFail:
      return "fail(" + amg.node_id(label.target) + ")";
    case ActionKind::DefenseSuccess:
      return "defend(" + amg.defense_id(label.target) + ")";
    case ActionKind::DefenseFail:
      return "miss(" + amg.defense_id(label.target) + ")";
  }
  return "?";
}

std::string clock_name(const Amg& amg, const ClockRef& clock) {
  return "x_" + (clock.kind == ClockRef::Kind::Attack ? amg.node_id(clock.index) : amg.defense_id(clock.index));
}

ClockValuation initial_valuation(const Amg& amg) {
  ClockValuation v;
  v.attack.assign(amg.node_count(), 0);
  v.defense.assign(amg.defense_count(), 0);
  return v;
}

std::int64_t cost_rate(const Amg& amg, const AttackState& s) {
  std::int64_t rate = 0;
  for (NodeIndex a : elements(s.activated)) rate += amg.attack(a).cost_rate;
  return rate;
}

EligibleEvents eligible_events(const Amg& amg, const AttackState& s, const ClockValuation& v) {
  EligibleEvents out;
  std::int64_t b = INT64_MAX;
  const auto active = elements(s.activated);
  for (NodeIndex a : active) b = std::min(b, amg.attack(a).time - v.attack[a]);
  for (DefenseIndex d = 0; d < amg.defense_count(); ++d) b = std::min(b, amg.defense(d).period - v.defense[d]);
  if (b == INT64_MAX) return out;
  out.delay = b;
  for (NodeIndex a : active)
    if (amg.attack(a).time - v.attack[a] == b) out.events.push_back({Event::Kind::Attack, a});
  std::vector<DefenseIndex> due;
  for (DefenseIndex d = 0; d < amg.defense_count(); ++d)
    if (amg.defense(d).period - v.defense[d] == b) due.push_back(d);
  for (DefenseIndex d1 : due) {
    bool suppressed = std::any_of(due.begin(), due.end(), [&](DefenseIndex d2) { return amg.follows(d1, d2); });
    if (!suppressed) out.events.push_back({Event::Kind::Defense, d1});
  }
  return out;
}

ClockValuation advance(const Amg& amg, const AttackState& s, const ClockValuation& v, std::int64_t delay) {
  ClockValuation out = v;
  for (NodeIndex a : elements(s.activated)) out.attack[a] += delay;
  for (auto& x : out.defense) x += delay;
  out.global_time += delay;
  out.cost += delay * cost_rate(amg, s);
  return out;
}

namespace {

void drop_inactive(const AttackState& s, ClockValuation& v) {
  for (std::size_t a = 0; a < v.attack.size(); ++a)
    if (!s.activated.test(a)) v.attack[a] = 0;
}

bool due_now(const Amg& amg, const AttackState& s, const ClockValuation& v, Event e) {
  EligibleEvents ev = eligible_events(amg, s, v);
  return ev.delay == 0 && std::find(ev.events.begin(), ev.events.end(), e) != ev.events.end();
}

}  // namespace

Configuration fire(const Amg& amg, const AttackState& s, const ClockValuation& v, const ActionLabel& label) {
  Configuration out{s, v};
  switch (label.kind) {
    case ActionKind::Activate: {
      if (label.target >= amg.node_count() || !available_activations(amg, s).test(label.target))
        throw PreconditionError(label_name(amg, label) + " is not enabled in " + format_state(amg, s));
      out.state.activated.set(label.target);
      out.clocks.attack[label.target] = 0;
      out.clocks.cost += amg.attack(label.target).cost;
      return out;
    }
    case ActionKind::CompleteSuccess:
    case ActionKind::CompleteFail: {
      if (label.target >= amg.node_count() || !due_now(amg, s, v, {Event::Kind::Attack, label.target}))
        throw PreconditionError(label_name(amg, label) + " is not enabled in " + format_state(amg, s));
      out.state = apply_completion(amg, s, label.target, label.kind == ActionKind::CompleteSuccess);
      out.clocks.attack[label.target] = 0;
      drop_inactive(out.state, out.clocks);
      return out;
    }
    case ActionKind::DefenseSuccess:
    case ActionKind::DefenseFail: {
      if (label.target >= amg.defense_count() || !due_now(amg, s, v, {Event::Kind::Defense, label.target}))
        throw PreconditionError(label_name(amg, label) + " is not enabled in " + format_state(amg, s));
      if (label.kind == ActionKind::DefenseSuccess) out.state = apply_defense(amg, s, label.target);
      out.clocks.defense[label.target] = 0;
      drop_inactive(out.state, out.clocks);
      return out;
    }
  }
  return out;
}

std::vector<ClockBound> Ptmdp::invariant(const Amg& amg, std::uint32_t loc) const {
  std::vector<ClockBound> out;
  for (NodeIndex a : elements(locations_[loc].activated))
    out.push_back({{ClockRef::Kind::Attack, a}, amg.attack(a).time});
  for (DefenseIndex d = 0; d < amg.defense_count(); ++d)
    out.push_back({{ClockRef::Kind::Defense, d}, amg.defense(d).period});
  return out;
}

std::optional<std::uint32_t> Ptmdp::find(const AttackState& s) const {
  auto it = std::lower_bound(locations_.begin(), locations_.end(), s, state_less);
  if (it == locations_.end() || !(*it == s)) return std::nullopt;
  return static_cast<std::uint32_t>(it - locations_.begin());
}

Ptmdp build_ptmdp(const Amg& amg, const BuildLimits& limits) {
  struct Raw {
    ActionLabel label;
    AttackState target;
    std::int64_t cost;
    ClockRef reset;
  };
  std::vector<AttackState> order;
  std::unordered_map<AttackState, std::uint32_t, AttackStateHash> seen;
  std::vector<std::vector<Raw>> edges;
  std::deque<std::uint32_t> queue;
  auto intern = [&](const AttackState& s) {
    auto [it, fresh] = seen.emplace(s, static_cast<std::uint32_t>(order.size()));
    if (fresh) {
      if (order.size() >= limits.max_locations) throw ExplorationLimitExceeded(order.size(), queue.size(), limits.max_locations);
      order.push_back(s);
      queue.push_back(it->second);
    }
  };
  intern(AttackState{});
  while (!queue.empty()) {
    std::uint32_t id = queue.front();
    queue.pop_front();
    const AttackState s = order[id];
    std::vector<Raw> out;
    for (NodeIndex a : elements(available_activations(amg, s))) {
      AttackState t = s;
      t.activated.set(a);
      out.push_back({{ActionKind::Activate, a}, t, amg.attack(a).cost, {ClockRef::Kind::Attack, a}});
    }
    for (NodeIndex a : elements(s.activated)) {
      out.push_back({{ActionKind::CompleteSuccess, a}, apply_completion(amg, s, a, true), 0, {ClockRef::Kind::Attack, a}});
      out.push_back({{ActionKind::CompleteFail, a}, apply_completion(amg, s, a, false), 0, {ClockRef::Kind::Attack, a}});
    }
    for (DefenseIndex d = 0; d < amg.defense_count(); ++d) {
      out.push_back({{ActionKind::DefenseSuccess, d}, apply_defense(amg, s, d), 0, {ClockRef::Kind::Defense, d}});
      out.push_back({{ActionKind::DefenseFail, d}, s, 0, {ClockRef::Kind::Defense, d}});
    }
    for (const auto& r : out) intern(r.target);
    if (edges.size() <= id) edges.resize(id + 1);
    edges[id] = std::move(out);
  }

  std::vector<std::uint32_t> perm(order.size());
  for (std::uint32_t i = 0; i < perm.size(); ++i) perm[i] = i;
  std::sort(perm.begin(), perm.end(), [&](auto x, auto y) { return state_less(order[x], order[y]); });
  std::vector<std::uint32_t> rank(order.size());
  for (std::uint32_t i = 0; i < perm.size(); ++i) rank[perm[i]] = i;

  Ptmdp p;
  p.offsets_.push_back(0);
  for (std::uint32_t i = 0; i < perm.size(); ++i) {
    const std::uint32_t old = perm[i];
    p.locations_.push_back(order[old]);
    p.rates_.push_back(cost_rate(amg, order[old]));
    for (const auto& r : edges[old]) p.transitions_.push_back({i, r.label, rank[seen.at(r.target)], r.cost, r.reset});
    p.offsets_.push_back(p.transitions_.size());
  }
  p.initial_ = rank[0];
  p.goal_ = p.find(goal_state(amg));
  return p;
}

}  // namespace amg
