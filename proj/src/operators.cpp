#include "amg/operators.hpp"

#include <algorithm>
#include <functional>
#include <queue>

namespace amg {

bool state_less(const AttackState& a, const AttackState& b) {
  if (a.activated != b.activated) return set_less(a.activated, b.activated);
  return set_less(a.completed, b.completed);
}

std::size_t AttackStateHash::operator()(const AttackState& s) const noexcept {
  std::hash<NodeSet> h;
  std::size_t x = h(s.activated);
  return x ^ (h(s.completed) + 0x9e3779b97f4a7c15ULL + (x << 6) + (x >> 2));
}

std::vector<std::string> children(const Amg& amg, std::string_view node) {
  std::vector<std::string> out;
  for (NodeIndex c : amg.children(amg.node_index(node))) out.push_back(amg.node_id(c));
  return out;
}

std::vector<std::pair<DefenseIndex, DefenseIndex>> defense_relation(const Amg& amg) {
  std::vector<std::pair<DefenseIndex, DefenseIndex>> out;
  for (DefenseIndex d1 = 0; d1 < amg.defense_count(); ++d1)
    for (DefenseIndex d2 = 0; d2 < amg.defense_count(); ++d2)
      if (amg.follows(d1, d2)) out.emplace_back(d1, d2);
  return out;
}

std::vector<DefenseIndex> defense_order(const Amg& amg, std::span<const DefenseIndex> defenses) {
  std::vector<DefenseIndex> set(defenses.begin(), defenses.end());
  std::sort(set.begin(), set.end());
  set.erase(std::unique(set.begin(), set.end()), set.end());
  // Pending followers per defense; a defense is ready once all its followers are placed.
  std::vector<std::size_t> pending(set.size(), 0);
  for (std::size_t i = 0; i < set.size(); ++i)
    for (std::size_t j = 0; j < set.size(); ++j)
      if (amg.follows(set[i], set[j])) ++pending[i];
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t i = 0; i < set.size(); ++i)
    if (pending[i] == 0) ready.push(i);
  std::vector<DefenseIndex> order;
  while (!ready.empty()) {
    std::size_t j = ready.top();
    ready.pop();
    order.push_back(set[j]);
    for (std::size_t i = 0; i < set.size(); ++i)
      if (amg.follows(set[i], set[j]) && --pending[i] == 0) ready.push(i);
  }
  if (order.size() != set.size()) throw PreconditionError("▷ has a cycle among the given defenses");
  return order;
}

NodeSet propagate(const Amg& amg, const NodeSet& completed) {
  NodeSet out = completed;
  for (NodeIndex v : amg.bottom_up()) {
    if (out.test(v) || !amg.subgoals().test(v)) continue;
    const auto& ch = amg.children(v);
    bool done;
    if (amg.refinement(v) == Refinement::And) {
      done = std::all_of(ch.begin(), ch.end(), [&](NodeIndex c) { return out.test(c); });
    } else {
      done = std::any_of(ch.begin(), ch.end(), [&](NodeIndex c) { return out.test(c); });
    }
    if (done) out.set(v);
  }
  return out;
}

NodeSet completed_descendants(const Amg& amg, const NodeSet& completed) {
  NodeSet reached;
  reached.set(amg.root());
  std::vector<NodeIndex> stack{amg.root()};
  while (!stack.empty()) {
    NodeIndex v = stack.back();
    stack.pop_back();
    if (completed.test(v)) continue;
    for (NodeIndex c : amg.children(v))
      if (!reached.test(c)) {
        reached.set(c);
        stack.push_back(c);
      }
  }
  NodeSet out;
  for (NodeIndex v = 0; v < amg.node_count(); ++v)
    if (!reached.test(v)) out.set(v);
  return out;
}

AttackState prune(const Amg& amg, const NodeSet& activated, const NodeSet& completed) {
  NodeSet cd = completed_descendants(amg, completed & amg.undefended());
  return {activated & ~(cd | completed), completed & ~cd};
}

AttackState simple_state(const Amg& amg, const NodeSet& activated, const NodeSet& completed) {
  return prune(amg, activated, propagate(amg, completed));
}

AttackState apply_defense(const Amg& amg, const AttackState& s, DefenseIndex d) {
  if (d >= amg.defense_count()) throw UnknownIdError("#" + std::to_string(d));
  const NodeSet& dd = amg.defense(d).defended;
  return simple_state(amg, s.activated & ~dd, s.completed & ~dd);
}

AttackState apply_defenses(const Amg& amg, const AttackState& s, std::span<const DefenseIndex> defenses) {
  NodeSet dd;
  for (DefenseIndex d : defenses) {
    if (d >= amg.defense_count()) throw UnknownIdError("#" + std::to_string(d));
    dd |= amg.defense(d).defended;
  }
  return simple_state(amg, s.activated & ~dd, s.completed & ~dd);
}

AttackState apply_completion(const Amg& amg, const AttackState& s, NodeIndex attack, bool success) {
  if (!s.activated.test(attack))
    throw PreconditionError("attack '" + amg.node_id(attack) + "' is not activated");
  if (success) {
    NodeSet c = s.completed;
    c.set(attack);
    return simple_state(amg, s.activated, c);
  }
  NodeSet a = s.activated;
  a.reset(attack);
  return simple_state(amg, a, s.completed);
}

NodeSet available_activations(const Amg& amg, const AttackState& s) {
  NodeSet cd = completed_descendants(amg, s.completed & amg.undefended());
  return amg.attacks() & ~(s.activated | s.completed | cd);
}

AttackState goal_state(const Amg& amg) {
  AttackState g;
  g.completed.set(amg.root());
  return g;
}

bool is_goal(const Amg& amg, const AttackState& s) {
  return s.activated.none() && s.completed.count() == 1 && s.completed.test(amg.root());
}

std::string format_set(const Amg& amg, const NodeSet& s) {
  std::string out = "{";
  bool first = true;
  for (NodeIndex v : elements(s)) {
    if (!first) out += ", ";
    first = false;
    out += amg.node_id(v);
  }
  return out + "}";
}

std::string format_state(const Amg& amg, const AttackState& s) {
  return "[" + format_set(amg, s.activated) + ", " + format_set(amg, s.completed) + "]";
}

}  // namespace amg
