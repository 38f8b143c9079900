#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "amg/engine.hpp"

namespace amg {

// Location, attack clocks (zero when inactive), defense clocks in [0, t_d]
// (t_d while a follower-suppressed firing is pending) and remaining budget.
struct DecisionState {
  AttackState location;
  std::vector<std::int64_t> attack_clocks;  // indexed by node
  std::vector<std::int64_t> defense_clocks;
  std::optional<std::int64_t> budget;
};

// A rational number kept as decimal-free text, e.g. "20", "81/4".
using ExactValue = std::string;

struct Successor {
  std::uint32_t target = 0;
  double prob = 0.0;
};

struct DecisionOption {
  std::int32_t attack = -1;  // -1: let time run to the next deadline
  double time = 0.0;
  double cost = 0.0;
  std::uint64_t first = 0;  // into successors()
  std::uint32_t count = 0;
};

class DecisionGraph {
 public:
  // Explores every decision state reachable from [∅, ∅] at time 0.
  static DecisionGraph build(const Amg& amg, std::optional<std::int64_t> cost_budget, std::size_t max_states);

  const Amg& amg() const { return *amg_; }
  std::size_t size() const { return node_option_.size() - 1; }
  static constexpr std::uint32_t goal() { return 0; }
  std::uint32_t initial() const { return 1; }
  std::optional<std::int64_t> cost_budget() const { return budget_; }

  std::span<const DecisionOption> options(std::uint32_t node) const {
    return {options_.data() + node_option_[node], options_.data() + node_option_[node + 1]};
  }
  std::span<const Successor> successors(const DecisionOption& o) const {
    return {successors_.data() + o.first, o.count};
  }
  std::size_t option_count() const { return options_.size(); }
  std::size_t transition_count() const { return successors_.size(); }

  DecisionState state(std::uint32_t node) const;
  // Node for an engine configuration (clocks plus accumulated cost), if explored.
  std::optional<std::uint32_t> find(const AttackState& s, const ClockValuation& v) const;

  // Exact outcome distribution of one option, recomputed from the model.
  struct ExactSuccessor {
    std::uint32_t target;
    std::int64_t num;
    std::int64_t den;
  };
  std::vector<ExactSuccessor> exact_successors(std::uint32_t node, const DecisionOption& o) const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
  const Amg* amg_ = nullptr;
  std::optional<std::int64_t> budget_;
  std::vector<std::uint64_t> node_option_;
  std::vector<DecisionOption> options_;
  std::vector<Successor> successors_;
};

// Nodes from which some policy reaches the goal with probability one.
std::vector<bool> reachability_closure(const DecisionGraph& g);

enum class Objective { Time, Cost };

struct SolverOptions {
  std::size_t max_states = 5'000'000;
  double tolerance = 1e-9;
  std::size_t max_iterations = 200'000;
  int threads = 0;
  bool parallel = true;
  std::size_t polish_limit = 200'000;  // policy iteration with a sparse direct solve up to this many states
  std::size_t exact_limit = 400;       // exact rational evaluation of policy chains up to this size
};

// Deterministic memoryless policy read off a decision graph.
class PolicyStrategy final : public Strategy {
 public:
  PolicyStrategy(std::shared_ptr<const DecisionGraph> graph, std::vector<std::int32_t> choice, std::string name);
  NodeSet decide(const Amg& amg, const AttackState& s, const ClockValuation& v) const override;
  std::string describe() const override { return name_; }
  const DecisionGraph& graph() const { return *graph_; }
  // Chosen option index per node (-1 where no choice exists).
  const std::vector<std::int32_t>& choice() const { return choice_; }

 private:
  std::shared_ptr<const DecisionGraph> graph_;
  std::vector<std::int32_t> choice_;
  std::string name_;
};

struct PolicyValue {
  double expected_time = 0.0;
  double expected_cost = 0.0;
  std::optional<ExactValue> exact_time;
  std::optional<ExactValue> exact_cost;
};

struct OptimizationResult {
  Objective objective = Objective::Time;
  std::optional<std::int64_t> cost_budget;
  bool reachable = false;
  double value = 0.0;  // +inf when unreachable
  std::optional<ExactValue> exact_value;
  PolicyValue evaluation;
  std::shared_ptr<const PolicyStrategy> strategy;
  std::size_t decision_states = 0;
  std::size_t closure_size = 0;
  std::size_t iterations = 0;
  std::size_t policy_iterations = 0;
};

OptimizationResult optimize(const Amg& amg, Objective objective, const SolverOptions& options = {},
                            std::optional<std::int64_t> cost_budget = std::nullopt);
// Throw UnreachableGoal when the goal cannot be reached almost surely.
OptimizationResult optimize_expected_time(const Amg& amg, const SolverOptions& options = {});
OptimizationResult optimize_expected_cost(const Amg& amg, const SolverOptions& options = {});

// Value-iteration kernels over a fixed closure; exposed for testing and benchmarks.
struct Weights {
  double time = 1.0;
  double cost = 0.0;
};
std::vector<double> value_iteration(const DecisionGraph& g, const std::vector<bool>& closure, Weights w,
                                    const SolverOptions& options, std::size_t* iterations = nullptr);
std::vector<double> value_iteration_serial(const DecisionGraph& g, const std::vector<bool>& closure, Weights w,
                                           const SolverOptions& options, std::size_t* iterations = nullptr);

// Expected time and cost from the initial node under a fixed choice vector.
PolicyValue evaluate_policy(const DecisionGraph& g, const std::vector<std::int32_t>& choice,
                            const SolverOptions& options = {});

}  // namespace amg
