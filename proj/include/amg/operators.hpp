#pragma once

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "amg/model.hpp"

namespace amg {

// [A, C]: activated attacks and completed nodes.
struct AttackState {
  NodeSet activated;
  NodeSet completed;

  friend bool operator==(const AttackState&, const AttackState&) = default;
};

// Orders by activated set first, then completed set (sorted id lists).
bool state_less(const AttackState& a, const AttackState& b);

struct AttackStateHash {
  std::size_t operator()(const AttackState& s) const noexcept;
};

std::vector<std::string> children(const Amg& amg, std::string_view node);

std::vector<std::pair<DefenseIndex, DefenseIndex>> defense_relation(const Amg& amg);

// Followers first; ties by id. Throws PreconditionError on a cycle within D.
std::vector<DefenseIndex> defense_order(const Amg& amg, std::span<const DefenseIndex> defenses);

NodeSet propagate(const Amg& amg, const NodeSet& completed);

NodeSet completed_descendants(const Amg& amg, const NodeSet& completed);

AttackState prune(const Amg& amg, const NodeSet& activated, const NodeSet& completed);

AttackState simple_state(const Amg& amg, const NodeSet& activated, const NodeSet& completed);

AttackState apply_defense(const Amg& amg, const AttackState& s, DefenseIndex d);

// Simultaneous application of every defense in D.
AttackState apply_defenses(const Amg& amg, const AttackState& s, std::span<const DefenseIndex> defenses);

AttackState apply_completion(const Amg& amg, const AttackState& s, NodeIndex attack, bool success);

NodeSet available_activations(const Amg& amg, const AttackState& s);

bool is_goal(const Amg& amg, const AttackState& s);

AttackState goal_state(const Amg& amg);

// "[{a_0}, {g_0}]"
std::string format_state(const Amg& amg, const AttackState& s);
std::string format_set(const Amg& amg, const NodeSet& s);

}  // namespace amg
