#include "amg/heuristics.hpp"

#include <algorithm>
#include <set>

namespace amg {

namespace {

const char* pacing_name(Pacing p) {
  switch (p) {
    case Pacing::Parallel: return "parallel";
    case Pacing::Aligned: return "aligned";
    case Pacing::Sequential: return "sequential";
  }
  return "?";
}

const char* guard_name(Guard g) {
  switch (g) {
    case Guard::None: return "none";
    case Guard::Window: return "window";
    case Guard::Strict: return "strict";
  }
  return "?";
}

bool bits_less(const NodeSet& a, const NodeSet& b) {
  if (a.count() != b.count()) return a.count() < b.count();
  return set_less(a, b);
}

std::vector<NodeSet> minimize(std::vector<NodeSet> sets, std::size_t cap) {
  std::sort(sets.begin(), sets.end(), bits_less);
  sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
  std::vector<NodeSet> out;
  for (const auto& s : sets) {
    bool dominated = std::any_of(out.begin(), out.end(), [&](const NodeSet& k) { return subset_of(k, s); });
    if (!dominated) out.push_back(s);
    if (out.size() >= cap) break;
  }
  return out;
}

}  // namespace

std::string plan_label(const Amg& amg, const PlanSpec& plan) {
  std::string ids;
  for (NodeIndex a : elements(plan.attacks)) ids += (ids.empty() ? "" : "+") + amg.node_id(a);
  return "plan(" + ids + ")/" + pacing_name(plan.pacing) + "/" + guard_name(plan.guard);
}

PlanStrategy::PlanStrategy(const Amg& amg, PlanSpec plan)
    : plan_(plan), label_(plan_label(amg, plan)), rank_(amg.node_count(), -1), ancestors_(amg.node_count()) {
  by_rank_ = elements(plan_.attacks);
  std::stable_sort(by_rank_.begin(), by_rank_.end(),
                   [&](NodeIndex a, NodeIndex b) { return amg.attack(a).time > amg.attack(b).time; });
  for (std::size_t i = 0; i < by_rank_.size(); ++i) rank_[by_rank_[i]] = static_cast<int>(i);
  // Parents come after children in bottom-up order, so walk it backwards.
  const auto& order = amg.bottom_up();
  for (auto it = order.rbegin(); it != order.rend(); ++it)
    for (NodeIndex p : amg.parents(*it)) {
      ancestors_[*it].set(p);
      ancestors_[*it] |= ancestors_[p];
    }
}

NodeSet PlanStrategy::decide(const Amg& amg, const AttackState& s, const ClockValuation& v) const {
  return decide_given(amg, s, v, available_activations(amg, s));
}

NodeSet PlanStrategy::decide_given(const Amg& amg, const AttackState& s, const ClockValuation& v,
                                   const NodeSet& available) const {
  const NodeSet avail = available & plan_.attacks;
  if (avail.none()) return {};
  const NodeSet needed = plan_.attacks & (avail | s.activated);
  if (plan_.pacing == Pacing::Sequential && (plan_.attacks & s.activated).any()) return {};
  NodeSet out;
  for (std::size_t a = avail._Find_first(); a < kMaxNodes; a = avail._Find_next(a)) {
    const std::int64_t ta = amg.attack(a).time;
    bool ok = true;
    if (plan_.pacing == Pacing::Sequential) {
      for (std::size_t b = needed._Find_first(); ok && b < kMaxNodes; b = needed._Find_next(b))
        if (rank_[b] < rank_[a]) ok = false;
    } else if (plan_.pacing == Pacing::Aligned) {
      for (std::size_t b = needed._Find_first(); ok && b < kMaxNodes; b = needed._Find_next(b)) {
        if (b == a || rank_[b] > rank_[a]) continue;
        if (!s.activated.test(b) || amg.attack(b).time - v.attack[b] > ta) ok = false;
      }
    }
    if (!ok) continue;
    if (plan_.guard != Guard::None) {
      NodeSet watched;
      watched.set(a);
      if (plan_.guard == Guard::Strict) watched |= ancestors_[a] | s.completed;
      for (std::size_t n = watched._Find_first(); ok && n < kMaxNodes; n = watched._Find_next(n))
        for (DefenseIndex d : amg.defenses_of(n)) {
          const auto& def = amg.defense(d);
          if (def.prob.is_zero()) continue;
          if (def.period < ta ? v.defense[d] != 0 : def.period - v.defense[d] < ta) ok = false;
        }
    }
    if (ok) out.set(a);
  }
  return out;
}

std::vector<NodeSet> minimal_scenarios(const Amg& amg, std::size_t cap) {
  std::vector<std::vector<NodeSet>> sc(amg.node_count());
  for (NodeIndex v : amg.bottom_up()) {
    if (amg.is_attack(v)) {
      NodeSet s;
      s.set(v);
      sc[v] = {s};
      continue;
    }
    std::vector<NodeSet> acc;
    if (amg.refinement(v) == Refinement::Or) {
      for (NodeIndex c : amg.children(v)) acc.insert(acc.end(), sc[c].begin(), sc[c].end());
    } else {
      acc = {NodeSet{}};
      for (NodeIndex c : amg.children(v)) {
        std::vector<NodeSet> next;
        for (const auto& x : acc)
          for (const auto& y : sc[c]) next.push_back(x | y);
        acc = minimize(std::move(next), cap);
      }
    }
    sc[v] = minimize(std::move(acc), cap);
  }
  return sc[amg.root()];
}

bool plan_feasible(const Amg& amg, const NodeSet& attacks) {
  for (NodeIndex a : elements(attacks)) {
    const auto& at = amg.attack(a);
    if (at.prob.is_zero()) return false;
    for (DefenseIndex d : amg.defenses_of(a)) {
      const auto& def = amg.defense(d);
      if (def.prob.is_one() && def.period < at.time) return false;
    }
  }
  return true;
}

std::vector<PlanSpec> candidate_plans(const Amg& amg, std::size_t scenario_cap) {
  std::vector<PlanSpec> out;
  for (const auto& s : minimal_scenarios(amg, scenario_cap)) {
    if (!plan_feasible(amg, s)) continue;
    for (Pacing p : {Pacing::Parallel, Pacing::Aligned, Pacing::Sequential})
      for (Guard g : {Guard::None, Guard::Window, Guard::Strict}) {
        if (s.count() == 1 && p != Pacing::Parallel) continue;
        out.push_back({s, p, g});
      }
  }
  return out;
}

}  // namespace amg
