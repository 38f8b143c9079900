#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "amg/state_space.hpp"

namespace amg {

// Independent stream per (master seed, index). Draws avoid std distributions
// so that results do not depend on the standard library implementation.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_index);
  std::uint64_t next() { return gen_(); }
  double uniform();                     // [0, 1)
  std::uint64_t below(std::uint64_t n);  // uniform in [0, n)
  bool bernoulli(const Probability& p);  // exact for decimal probabilities

 private:
  std::mt19937_64 gen_;
};

// Deterministic memoryless attacker policy. Must be safe for concurrent calls.
class Strategy {
 public:
  virtual ~Strategy() = default;
  virtual NodeSet decide(const Amg& amg, const AttackState& s, const ClockValuation& v) const = 0;
  // Same answer as decide(); `available` is available_activations(amg, s), precomputed by the caller.
  virtual NodeSet decide_given(const Amg& amg, const AttackState& s, const ClockValuation& v,
                               const NodeSet& available) const {
    (void)available;
    return decide(amg, s, v);
  }
  virtual std::string describe() const = 0;
};

struct TraceStep {
  Configuration from;
  bool is_delay = false;
  std::int64_t delay = 0;
  ActionLabel label;
  std::int64_t time = 0;  // cumulative after the step
  std::int64_t cost = 0;
  Configuration to;
};

enum class Outcome { GoalReached, HorizonExceeded };

struct RunTrace {
  std::vector<TraceStep> steps;
  Outcome outcome = Outcome::HorizonExceeded;
  std::int64_t attack_time = 0;  // meaningful only when the goal was reached
  std::int64_t attack_cost = 0;
};

struct RunResult {
  bool reached = false;
  std::int64_t time = 0;
  std::int64_t cost = 0;
};

std::int64_t default_horizon(const Amg& amg);

RunTrace simulate_run(const Amg& amg, const Strategy& strategy, RngStream& rng, std::int64_t horizon);
RunResult simulate(const Amg& amg, const Strategy& strategy, RngStream& rng, std::int64_t horizon);

// Runs over a precomputed location table. Same results as simulate(); falls
// back to it when the model has more than `max_locations` locations.
class Simulator {
 public:
  explicit Simulator(const Amg& amg, std::size_t max_locations = 200'000);
  RunResult run(const Strategy& strategy, RngStream& rng, std::int64_t horizon) const;
  bool compiled() const { return !locs_.empty(); }

 private:
  struct Loc {
    AttackState state;
    NodeSet available;
    std::int64_t rate = 0;
    bool goal = false;
    std::uint32_t act_first = 0, act_count = 0;  // into act_
    std::uint32_t active_first = 0, active_count = 0;  // into active_, with completion targets
    std::uint32_t defense_first = 0;  // into def_target_, one per defense
  };
  struct Active {
    std::uint32_t attack, success, fail;
  };
  const Amg* amg_;
  std::vector<Loc> locs_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> act_;  // (attack, target)
  std::vector<Active> active_;
  std::vector<std::uint32_t> def_target_;
  std::uint32_t initial_ = 0;
  std::vector<std::uint8_t> suppress_;  // suppress_[d1 * D + d2] = d1 ▷ d2
};

struct EvalOptions {
  std::size_t runs = 10000;
  std::uint64_t seed = 0;
  std::optional<std::int64_t> t_max;
  std::optional<std::int64_t> c_max;
  std::optional<std::int64_t> horizon;  // used when t_max is absent
  int threads = 0;                      // 0: library default
  // Abandon the evaluation once this many runs miss the goal (0: never). The
  // statistics of an abandoned evaluation cover an unspecified subset of runs.
  std::size_t stop_after_failures = 0;
};

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

struct EvalStats {
  std::size_t n_runs = 0;
  std::size_t n_reached = 0;
  std::int64_t horizon = 0;
  std::optional<std::int64_t> t_max;
  std::optional<std::int64_t> c_max;
  Estimate reach_prob;  // P[T < t_max], or P[goal reached] without t_max
  std::optional<Estimate> time_given_time;
  std::optional<Estimate> cost_given_time;
  std::optional<Estimate> cost_reach_prob;  // P[C < c_max]
  std::optional<Estimate> time_given_cost;
  std::optional<Estimate> cost_given_cost;
  std::optional<Estimate> mean_time;  // over goal-reaching runs
  std::optional<Estimate> mean_cost;
  bool stopped_early = false;
};

EvalStats evaluate(const Amg& amg, const Strategy& strategy, const EvalOptions& options);
// Single-threaded reference; produces identical results.
EvalStats evaluate_serial(const Amg& amg, const Strategy& strategy, const EvalOptions& options);

EvalStats summarize(const std::vector<RunResult>& runs, const EvalOptions& options, std::int64_t horizon);

// Threads to use for a requested count, honouring MTD_FRONTIER_THREADS.
int worker_threads(int requested);

}  // namespace amg
