#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "amg/optimizer.hpp"

namespace amg {

enum class Method { Exact, MonteCarlo };
const char* method_name(Method m);

struct ParetoPoint {
  double expected_time = 0.0;
  double expected_cost = 0.0;
  double reach_prob = 1.0;
  double time_se = 0.0;  // zero for exact points
  double cost_se = 0.0;
  std::optional<std::int64_t> c_max;  // bound the point was computed for
  Method method = Method::Exact;
  std::optional<ExactValue> exact_time;
  std::optional<ExactValue> exact_cost;
  std::string strategy_label;
  std::shared_ptr<const Strategy> strategy;
};

struct BudgetResult {
  std::int64_t c_max = 0;
  std::optional<ParetoPoint> point;
  std::string note;  // why the point is absent
};

struct FrontierReport {
  Method method = Method::Exact;
  std::vector<BudgetResult> budgets;
  std::vector<ParetoPoint> frontier;  // by expected time, strictly decreasing cost
  std::string note;
};

struct FrontierOptions {
  SolverOptions solver;
  bool allow_montecarlo = true;
  std::size_t runs = 100'000;        // final evaluation of each Monte Carlo frontier point
  std::size_t screen_runs = 2'000;   // per heuristic candidate
  std::size_t max_final_points = 6;  // Monte Carlo points evaluated at full size
  double min_reach_prob = 0.99;      // candidates below this are discarded
  std::uint64_t seed = 42;
  std::optional<std::int64_t> horizon;
  int threads = 0;
};

// Keeps non-dominated points; the result is sorted by time with strictly decreasing cost.
std::vector<ParetoPoint> filter_dominated(std::vector<ParetoPoint> points);

FrontierReport pareto_frontier(const Amg& amg, std::span<const std::int64_t> cost_budgets,
                               const FrontierOptions& options = {});

// Heuristic Monte Carlo frontier; used when exact analysis exceeds its caps.
FrontierReport montecarlo_frontier(const Amg& amg, std::span<const std::int64_t> cost_budgets,
                                   const FrontierOptions& options);

struct BudgetConstraint {
  std::vector<std::string> defenses;  // order defines exponent vectors
  std::vector<std::int64_t> bases;
  std::int64_t radix = 3;
  std::int64_t budget = 0;
};

// All exponent vectors with non-negative entries summing to `budget`, lexicographic.
std::vector<std::vector<std::int64_t>> enumerate_exponents(std::size_t defenses, std::int64_t budget);

struct SweepConfig {
  std::size_t id = 0;
  std::vector<std::int64_t> exponents;
  std::vector<std::int64_t> periods;
  FrontierReport report;
  std::optional<std::string> error;
};

struct SweepOptions {
  FrontierOptions frontier;
  std::vector<std::int64_t> cost_budgets;
  int threads = 0;
  // Restricts the sweep to configurations accepted by this predicate (periods in constraint order).
  std::function<bool(const std::vector<std::int64_t>&)> filter;
};

struct SweepResult {
  std::vector<std::string> defenses;
  std::vector<SweepConfig> configs;
  std::vector<std::size_t> dominating;  // configs owning a point of the combined frontier
};

SweepResult sweep_defense_periods(const AmgModel& model, const BudgetConstraint& constraint,
                                  const SweepOptions& options);

}  // namespace amg
