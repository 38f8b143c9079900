#pragma once

#include <string>
#include <vector>

#include "amg/engine.hpp"

namespace amg {

// Heuristic strategies for models whose decision space is too large for the
// exact solver. A plan is a minimal set of attacks that completes the root;
// pacing and guard rules decide when each plan attack is started.
enum class Pacing {
  Parallel,    // start everything at once
  Aligned,     // start shorter attacks so they finish no earlier than longer ones
  Sequential,  // one attack at a time, longest first
};

enum class Guard {
  None,
  Window,  // wait until every defense of the attack leaves enough time to finish, or
           // for defenses faster than the attack, until one has just fired
  Strict,  // as Window, also for defenses of its ancestors and of completed nodes
};

struct PlanSpec {
  NodeSet attacks;
  Pacing pacing = Pacing::Parallel;
  Guard guard = Guard::None;
};

std::string plan_label(const Amg& amg, const PlanSpec& plan);

class PlanStrategy final : public Strategy {
 public:
  PlanStrategy(const Amg& amg, PlanSpec plan);
  NodeSet decide(const Amg& amg, const AttackState& s, const ClockValuation& v) const override;
  NodeSet decide_given(const Amg& amg, const AttackState& s, const ClockValuation& v,
                       const NodeSet& available) const override;
  std::string describe() const override { return label_; }
  const PlanSpec& plan() const { return plan_; }

 private:
  PlanSpec plan_;
  std::string label_;
  std::vector<NodeIndex> by_rank_;  // plan attacks, longest first, ties by id
  std::vector<int> rank_;           // node -> position in by_rank_
  std::vector<NodeSet> ancestors_;  // node -> strict ancestors
};

// Minimal attack sets completing the root (at most `cap`, smallest first).
std::vector<NodeSet> minimal_scenarios(const Amg& amg, std::size_t cap = 256);

// False when some attack of the plan can never complete (p = 0, or a sure
// defense with a period shorter than the attack).
bool plan_feasible(const Amg& amg, const NodeSet& attacks);

std::vector<PlanSpec> candidate_plans(const Amg& amg, std::size_t scenario_cap = 64);

}  // namespace amg
