#include "amg/engine.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>

namespace amg {

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(stream_index), static_cast<std::uint32_t>(stream_index >> 32)};
  gen_.seed(seq);
}

double RngStream::uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

std::uint64_t RngStream::below(std::uint64_t n) {
  if (n <= 1) return 0;
  std::uint64_t x = gen_();
  unsigned __int128 m = static_cast<unsigned __int128>(x) * n;
  std::uint64_t low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      x = gen_();
      m = static_cast<unsigned __int128>(x) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

bool RngStream::bernoulli(const Probability& p) {
  if (p.num() <= 0) return false;
  if (p.num() >= p.den()) return true;
  return below(static_cast<std::uint64_t>(p.den())) < static_cast<std::uint64_t>(p.num());
}

std::int64_t default_horizon(const Amg& amg) { return 64 * amg.max_time(); }

int worker_threads(int requested) {
  int n = requested > 0 ? requested : omp_get_max_threads();
  if (const char* env = std::getenv("MTD_FRONTIER_THREADS")) {
    int cap = std::atoi(env);
    if (cap > 0) n = std::min(n, cap);
  }
  return std::max(n, 1);
}

namespace {

struct Recorder {
  std::vector<TraceStep>* steps = nullptr;
  void record(const AttackState& s0, const ClockValuation& v0, bool is_delay, std::int64_t delay, ActionLabel label,
              const AttackState& s1, const ClockValuation& v1) const {
    if (!steps) return;
    steps->push_back({{s0, v0}, is_delay, delay, label, v1.global_time, v1.cost, {s1, v1}});
  }
};

// Event loop shared by the traced and untraced runners.
RunResult run(const Amg& amg, const Strategy& strategy, RngStream& rng, std::int64_t horizon, const Recorder& rec) {
  AttackState s;
  ClockValuation v = initial_valuation(amg);
  const std::size_t guard = amg.node_count() + 1;
  for (;;) {
    if (is_goal(amg, s)) return {true, v.global_time, v.cost};
    for (std::size_t round = 0; round < guard; ++round) {
      NodeSet pick = strategy.decide(amg, s, v) & available_activations(amg, s);
      if (pick.none()) break;
      for (std::size_t a = pick._Find_first(); a < kMaxNodes; a = pick._Find_next(a)) {
        ActionLabel label{ActionKind::Activate, static_cast<std::uint32_t>(a)};
        AttackState s1 = s;
        s1.activated.set(a);
        ClockValuation v1 = v;
        v1.attack[a] = 0;
        v1.cost += amg.attack(a).cost;
        rec.record(s, v, false, 0, label, s1, v1);
        s = std::move(s1);
        v = std::move(v1);
      }
    }
    EligibleEvents ev = eligible_events(amg, s, v);
    if (!ev.delay) return {false, v.global_time, v.cost};
    if (*ev.delay > 0) {
      if (v.global_time + *ev.delay > horizon) return {false, v.global_time, v.cost};
      ClockValuation v1 = advance(amg, s, v, *ev.delay);
      rec.record(s, v, true, *ev.delay, {}, s, v1);
      v = std::move(v1);
    }
    const Event e = ev.events[rng.below(ev.events.size())];
    ActionLabel label;
    if (e.kind == Event::Kind::Attack) {
      const bool ok = rng.bernoulli(amg.attack(e.index).prob);
      label = {ok ? ActionKind::CompleteSuccess : ActionKind::CompleteFail, e.index};
    } else {
      const bool ok = rng.bernoulli(amg.defense(e.index).prob);
      label = {ok ? ActionKind::DefenseSuccess : ActionKind::DefenseFail, e.index};
    }
    Configuration next = fire(amg, s, v, label);
    rec.record(s, v, false, 0, label, next.state, next.clocks);
    s = std::move(next.state);
    v = std::move(next.clocks);
  }
}

Estimate proportion(std::size_t hits, std::size_t n) {
  Estimate e;
  e.samples = n;
  if (n == 0) return e;
  e.mean = static_cast<double>(hits) / static_cast<double>(n);
  e.std_error = std::sqrt(e.mean * (1.0 - e.mean) / static_cast<double>(n));
  return e;
}

template <class Pred, class Get>
std::optional<Estimate> conditional_mean(const std::vector<RunResult>& runs, Pred pred, Get get) {
  std::size_t m = 0;
  long double sum = 0;
  for (const auto& r : runs)
    if (pred(r)) {
      ++m;
      sum += static_cast<long double>(get(r));
    }
  if (m == 0) return std::nullopt;
  const long double mean = sum / static_cast<long double>(m);
  long double sq = 0;
  for (const auto& r : runs)
    if (pred(r)) {
      const long double d = static_cast<long double>(get(r)) - mean;
      sq += d * d;
    }
  Estimate e;
  e.samples = m;
  e.mean = static_cast<double>(mean);
  e.std_error = m > 1 ? static_cast<double>(std::sqrt(sq / static_cast<long double>(m - 1) / static_cast<long double>(m))) : 0.0;
  return e;
}

std::int64_t horizon_for(const Amg& amg, const EvalOptions& o) {
  if (o.t_max) return std::max<std::int64_t>(*o.t_max, 0);
  if (o.horizon) return *o.horizon;
  return default_horizon(amg);
}

}  // namespace

RunTrace simulate_run(const Amg& amg, const Strategy& strategy, RngStream& rng, std::int64_t horizon) {
  RunTrace trace;
  Recorder rec{&trace.steps};
  RunResult r = run(amg, strategy, rng, horizon, rec);
  trace.outcome = r.reached ? Outcome::GoalReached : Outcome::HorizonExceeded;
  if (r.reached) {
    trace.attack_time = r.time;
    trace.attack_cost = r.cost;
  }
  return trace;
}

RunResult simulate(const Amg& amg, const Strategy& strategy, RngStream& rng, std::int64_t horizon) {
  return run(amg, strategy, rng, horizon, Recorder{});
}

EvalStats summarize(const std::vector<RunResult>& runs, const EvalOptions& o, std::int64_t horizon) {
  EvalStats st;
  st.n_runs = runs.size();
  st.horizon = horizon;
  st.t_max = o.t_max;
  st.c_max = o.c_max;
  for (const auto& r : runs) st.n_reached += r.reached ? 1 : 0;
  auto in_time = [&](const RunResult& r) { return r.reached && (!o.t_max || r.time < *o.t_max); };
  auto in_cost = [&](const RunResult& r) { return r.reached && (!o.c_max || r.cost < *o.c_max); };
  auto time = [](const RunResult& r) { return r.time; };
  auto cost = [](const RunResult& r) { return r.cost; };
  std::size_t hits = 0;
  for (const auto& r : runs) hits += in_time(r) ? 1 : 0;
  st.reach_prob = proportion(hits, runs.size());
  st.time_given_time = conditional_mean(runs, in_time, time);
  st.cost_given_time = conditional_mean(runs, in_time, cost);
  if (o.c_max) {
    std::size_t chits = 0;
    for (const auto& r : runs) chits += in_cost(r) ? 1 : 0;
    st.cost_reach_prob = proportion(chits, runs.size());
    st.time_given_cost = conditional_mean(runs, in_cost, time);
    st.cost_given_cost = conditional_mean(runs, in_cost, cost);
  }
  auto reached = [](const RunResult& r) { return r.reached; };
  st.mean_time = conditional_mean(runs, reached, time);
  st.mean_cost = conditional_mean(runs, reached, cost);
  return st;
}

Simulator::Simulator(const Amg& amg, std::size_t max_locations) : amg_(&amg) {
  Ptmdp m;
  try {
    m = build_ptmdp(amg, {max_locations});
  } catch (const ExplorationLimitExceeded&) {
    return;
  }
  const std::size_t nd = amg.defense_count();
  suppress_.resize(nd * nd);
  for (DefenseIndex a = 0; a < nd; ++a)
    for (DefenseIndex b = 0; b < nd; ++b) suppress_[a * nd + b] = amg.follows(a, b);
  initial_ = m.initial();
  locs_.resize(m.size());
  for (std::uint32_t l = 0; l < m.size(); ++l) {
    Loc& L = locs_[l];
    L.state = m.locations()[l];
    L.goal = m.goal() && *m.goal() == l;
    L.available = available_activations(amg, L.state);
    L.rate = m.location_cost_rate(l);
    L.act_first = static_cast<std::uint32_t>(act_.size());
    L.active_first = static_cast<std::uint32_t>(active_.size());
    L.defense_first = static_cast<std::uint32_t>(def_target_.size());
    def_target_.resize(def_target_.size() + nd, l);
    for (const Transition& t : m.transitions_from(l)) {
      switch (t.label.kind) {
        case ActionKind::Activate:
          act_.emplace_back(t.label.target, t.target);
          break;
        case ActionKind::CompleteSuccess:
          active_.push_back({t.label.target, t.target, t.target});
          break;
        case ActionKind::CompleteFail:
          active_.back().fail = t.target;
          break;
        case ActionKind::DefenseSuccess:
          def_target_[L.defense_first + t.label.target] = t.target;
          break;
        case ActionKind::DefenseFail:
          break;
      }
    }
    L.act_count = static_cast<std::uint32_t>(act_.size()) - L.act_first;
    L.active_count = static_cast<std::uint32_t>(active_.size()) - L.active_first;
  }
}

RunResult Simulator::run(const Strategy& strategy, RngStream& rng, std::int64_t horizon) const {
  const Amg& amg = *amg_;
  if (locs_.empty()) return simulate(amg, strategy, rng, horizon);
  const std::size_t nd = amg.defense_count();
  std::uint32_t loc = initial_;
  ClockValuation v = initial_valuation(amg);
  // Events: attack entries hold their slot in active_, defenses are offset by kDef.
  constexpr std::uint32_t kDef = 1u << 30;
  std::uint32_t events[kMaxNodes + kMaxDefenses];
  std::uint32_t due[kMaxDefenses];
  const std::size_t guard = amg.node_count() + 1;
  for (;;) {
    if (locs_[loc].goal) return {true, v.global_time, v.cost};
    for (std::size_t round = 0; round < guard; ++round) {
      const Loc& L = locs_[loc];
      const NodeSet pick = strategy.decide_given(amg, L.state, v, L.available) & L.available;
      if (pick.none()) break;
      for (std::size_t a = pick._Find_first(); a < kMaxNodes; a = pick._Find_next(a)) {
        const Loc& cur = locs_[loc];
        for (std::uint32_t k = 0; k < cur.act_count; ++k)
          if (act_[cur.act_first + k].first == a) {
            loc = act_[cur.act_first + k].second;
            break;
          }
        v.attack[a] = 0;
        v.cost += amg.attack(a).cost;
      }
    }
    const Loc& L = locs_[loc];
    std::int64_t b = INT64_MAX;
    for (std::uint32_t k = 0; k < L.active_count; ++k) {
      const std::uint32_t a = active_[L.active_first + k].attack;
      b = std::min(b, amg.attack(a).time - v.attack[a]);
    }
    for (std::size_t d = 0; d < nd; ++d) b = std::min(b, amg.defense(d).period - v.defense[d]);
    if (b == INT64_MAX) return {false, v.global_time, v.cost};
    std::size_t n_events = 0, n_due = 0;
    for (std::uint32_t k = 0; k < L.active_count; ++k) {
      const std::uint32_t a = active_[L.active_first + k].attack;
      if (amg.attack(a).time - v.attack[a] == b) events[n_events++] = k;
    }
    for (std::size_t d = 0; d < nd; ++d)
      if (amg.defense(d).period - v.defense[d] == b) due[n_due++] = static_cast<std::uint32_t>(d);
    for (std::size_t i = 0; i < n_due; ++i) {
      bool suppressed = false;
      for (std::size_t j = 0; j < n_due && !suppressed; ++j) suppressed = suppress_[due[i] * nd + due[j]];
      if (!suppressed) events[n_events++] = kDef + due[i];
    }
    if (b > 0) {
      if (v.global_time + b > horizon) return {false, v.global_time, v.cost};
      for (std::uint32_t k = 0; k < L.active_count; ++k) v.attack[active_[L.active_first + k].attack] += b;
      for (auto& x : v.defense) x += b;
      v.global_time += b;
      v.cost += b * L.rate;
    }
    const std::uint32_t e = events[rng.below(n_events)];
    std::uint32_t next;
    if (e < kDef) {
      const Active& act = active_[L.active_first + e];
      next = rng.bernoulli(amg.attack(act.attack).prob) ? act.success : act.fail;
      v.attack[act.attack] = 0;
    } else {
      const std::uint32_t d = e - kDef;
      next = rng.bernoulli(amg.defense(d).prob) ? def_target_[L.defense_first + d] : loc;
      v.defense[d] = 0;
    }
    if (next != loc) {
      const NodeSet& still = locs_[next].state.activated;
      for (std::uint32_t k = 0; k < L.active_count; ++k) {
        const std::uint32_t a = active_[L.active_first + k].attack;
        if (!still.test(a)) v.attack[a] = 0;
      }
      loc = next;
    }
  }
}

EvalStats evaluate(const Amg& amg, const Strategy& strategy, const EvalOptions& o) {
  const std::int64_t horizon = horizon_for(amg, o);
  std::vector<RunResult> runs(o.runs);
  const long long n = static_cast<long long>(o.runs);
  const Simulator sim(amg);
  std::vector<char> done(o.stop_after_failures ? runs.size() : 0, 0);
  std::atomic<std::size_t> failures{0};
#pragma omp parallel for schedule(dynamic, 256) num_threads(worker_threads(o.threads))
  for (long long i = 0; i < n; ++i) {
    if (o.stop_after_failures && failures.load(std::memory_order_relaxed) >= o.stop_after_failures) continue;
    RngStream rng(o.seed, static_cast<std::uint64_t>(i));
    runs[i] = sim.run(strategy, rng, horizon);
    if (o.stop_after_failures) {
      done[i] = 1;
      if (!runs[i].reached) failures.fetch_add(1, std::memory_order_relaxed);
    }
  }
  if (o.stop_after_failures && failures.load() >= o.stop_after_failures) {
    std::vector<RunResult> partial;
    for (std::size_t i = 0; i < runs.size(); ++i)
      if (done[i]) partial.push_back(runs[i]);
    EvalStats st = summarize(partial, o, horizon);
    st.stopped_early = true;
    return st;
  }
  return summarize(runs, o, horizon);
}

EvalStats evaluate_serial(const Amg& amg, const Strategy& strategy, const EvalOptions& o) {
  const std::int64_t horizon = horizon_for(amg, o);
  std::vector<RunResult> runs(o.runs);
  for (std::size_t i = 0; i < o.runs; ++i) {
    RngStream rng(o.seed, i);
    runs[i] = simulate(amg, strategy, rng, horizon);
  }
  return summarize(runs, o, horizon);
}

}  // namespace amg
