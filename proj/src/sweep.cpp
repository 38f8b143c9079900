#include <omp.h>

#include <algorithm>
#include <cmath>

#include "amg/heuristics.hpp"
#include "amg/pareto.hpp"
#include "amg/validate.hpp"

namespace amg {

const char* method_name(Method m) { return m == Method::Exact ? "exact" : "montecarlo"; }

std::vector<ParetoPoint> filter_dominated(std::vector<ParetoPoint> points) {
  std::stable_sort(points.begin(), points.end(), [](const ParetoPoint& a, const ParetoPoint& b) {
    if (a.expected_time != b.expected_time) return a.expected_time < b.expected_time;
    return a.expected_cost < b.expected_cost;
  });
  std::vector<ParetoPoint> out;
  for (auto& p : points)
    if (out.empty() || p.expected_cost < out.back().expected_cost) out.push_back(std::move(p));
  return out;
}

namespace {

std::string number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

FrontierReport exact_frontier(const Amg& amg, std::span<const std::int64_t> budgets, const FrontierOptions& o) {
  FrontierReport rep;
  rep.method = Method::Exact;
  std::vector<ParetoPoint> points;
  for (std::int64_t c : budgets) {
    BudgetResult br;
    br.c_max = c;
    OptimizationResult r = optimize(amg, Objective::Time, o.solver, c);
    if (!r.reachable) {
      br.note = "unreachable: no strategy within the budget reaches the goal almost surely";
    } else if (r.evaluation.expected_cost > static_cast<double>(c) * (1 + 1e-12)) {
      br.note = "over budget: the fastest budget-feasible strategy has expected cost " +
                number(r.evaluation.expected_cost) + " > " + std::to_string(c);
    } else {
      ParetoPoint p;
      p.expected_time = r.evaluation.expected_time;
      p.expected_cost = r.evaluation.expected_cost;
      p.exact_time = r.evaluation.exact_time;
      p.exact_cost = r.evaluation.exact_cost;
      p.c_max = c;
      p.method = Method::Exact;
      p.strategy_label = r.strategy->describe();
      p.strategy = r.strategy;
      br.point = p;
      points.push_back(p);
    }
    rep.budgets.push_back(std::move(br));
  }
  rep.frontier = filter_dominated(std::move(points));
  return rep;
}

}  // namespace

FrontierReport montecarlo_frontier(const Amg& amg, std::span<const std::int64_t> budgets, const FrontierOptions& o) {
  FrontierReport rep;
  rep.method = Method::MonteCarlo;
  struct Cand {
    std::shared_ptr<const Strategy> strategy;
    double time, cost;
  };
  std::vector<Cand> kept;
  EvalOptions screen;
  screen.runs = o.screen_runs;
  screen.seed = o.seed;
  screen.horizon = o.horizon;
  screen.threads = o.threads;
  screen.stop_after_failures =
      static_cast<std::size_t>(std::floor((1.0 - o.min_reach_prob) * static_cast<double>(o.screen_runs))) + 1;
  for (const auto& plan : candidate_plans(amg)) {
    auto s = std::make_shared<PlanStrategy>(amg, plan);
    EvalStats st = evaluate(amg, *s, screen);
    if (st.stopped_early || st.reach_prob.mean < o.min_reach_prob || !st.mean_time) continue;
    kept.push_back({s, st.mean_time->mean, st.mean_cost->mean});
  }
  // Screening frontier, then a spread of at most max_final_points of it.
  std::stable_sort(kept.begin(), kept.end(), [](const Cand& a, const Cand& b) {
    return a.time != b.time ? a.time < b.time : a.cost < b.cost;
  });
  std::vector<Cand> nondom;
  for (auto& c : kept)
    if (nondom.empty() || c.cost < nondom.back().cost) nondom.push_back(c);
  std::vector<Cand> chosen;
  const std::size_t limit = std::max<std::size_t>(o.max_final_points, 1);
  if (nondom.size() <= limit) {
    chosen = nondom;
  } else {
    for (std::size_t i = 0; i < limit; ++i) {
      const std::size_t j = limit == 1 ? 0 : i * (nondom.size() - 1) / (limit - 1);
      if (chosen.empty() || chosen.back().strategy != nondom[j].strategy) chosen.push_back(nondom[j]);
    }
  }
  std::vector<ParetoPoint> points;
  EvalOptions full = screen;
  full.runs = o.runs;
  for (const auto& c : chosen) {
    EvalStats st = evaluate(amg, *c.strategy, full);
    if (!st.mean_time) continue;
    ParetoPoint p;
    p.expected_time = st.mean_time->mean;
    p.expected_cost = st.mean_cost->mean;
    p.time_se = st.mean_time->std_error;
    p.cost_se = st.mean_cost->std_error;
    p.reach_prob = st.reach_prob.mean;
    p.method = Method::MonteCarlo;
    p.strategy_label = c.strategy->describe();
    p.strategy = c.strategy;
    points.push_back(std::move(p));
  }
  rep.frontier = filter_dominated(std::move(points));
  if (rep.frontier.empty()) rep.note = "no heuristic strategy reaches the goal reliably";
  for (std::int64_t c : budgets) {
    BudgetResult br;
    br.c_max = c;
    for (const auto& p : rep.frontier)
      if (p.expected_cost <= static_cast<double>(c)) {
        br.point = p;
        br.point->c_max = c;
        break;
      }
    if (!br.point) br.note = rep.frontier.empty() ? rep.note : "no heuristic strategy within the budget";
    rep.budgets.push_back(std::move(br));
  }
  return rep;
}

FrontierReport pareto_frontier(const Amg& amg, std::span<const std::int64_t> budgets, const FrontierOptions& o) {
  for (std::int64_t c : budgets)
    if (c <= 0) throw PreconditionError("cost budgets must be positive integers");
  if (budgets.empty()) return {};
  try {
    return exact_frontier(amg, budgets, o);
  } catch (const ExplorationLimitExceeded& e) {
    if (!o.allow_montecarlo) throw;
    FrontierReport rep = montecarlo_frontier(amg, budgets, o);
    rep.note = std::string("exact analysis skipped (") + e.what() + ")" + (rep.note.empty() ? "" : "; " + rep.note);
    return rep;
  }
}

std::vector<std::vector<std::int64_t>> enumerate_exponents(std::size_t k, std::int64_t budget) {
  std::vector<std::vector<std::int64_t>> out;
  if (k == 0) {
    if (budget == 0) out.push_back({});
    return out;
  }
  std::vector<std::int64_t> cur(k, 0);
  auto rec = [&](auto& self, std::size_t i, std::int64_t left) -> void {
    if (i + 1 == k) {
      cur[i] = left;
      out.push_back(cur);
      return;
    }
    for (std::int64_t e = 0; e <= left; ++e) {
      cur[i] = e;
      self(self, i + 1, left - e);
    }
  };
  if (budget >= 0) rec(rec, 0, budget);
  return out;
}

SweepResult sweep_defense_periods(const AmgModel& model, const BudgetConstraint& bc, const SweepOptions& o) {
  if (bc.defenses.size() != bc.bases.size()) throw PreconditionError("budget constraint needs one base per defense");
  if (bc.radix < 2) throw PreconditionError("budget constraint radix must be at least 2");
  if (bc.budget < 0) throw PreconditionError("defensive budget must be non-negative");
  for (std::size_t i = 0; i < bc.defenses.size(); ++i) {
    if (!model.find_defense(bc.defenses[i])) throw UnknownIdError(bc.defenses[i]);
    if (bc.bases[i] < 1) throw PreconditionError("base periods must be positive");
  }
  SweepResult res;
  res.defenses = bc.defenses;
  for (const auto& e : enumerate_exponents(bc.defenses.size(), bc.budget)) {
    SweepConfig c;
    c.exponents = e;
    for (std::size_t i = 0; i < e.size(); ++i) {
      long double t = static_cast<long double>(bc.bases[i]) * std::pow(static_cast<long double>(bc.radix), e[i]);
      c.periods.push_back(t > 4e18L ? INT64_MAX : static_cast<std::int64_t>(std::llround(t)));
    }
    if (o.filter && !o.filter(c.periods)) continue;
    c.id = res.configs.size();
    res.configs.push_back(std::move(c));
  }
  const long long n = static_cast<long long>(res.configs.size());
  omp_set_max_active_levels(1);
#pragma omp parallel for schedule(dynamic, 1) num_threads(worker_threads(o.threads))
  for (long long i = 0; i < n; ++i) {
    SweepConfig& c = res.configs[i];
    try {
      AmgModel m = model;
      for (std::size_t k = 0; k < c.periods.size(); ++k) m.find_defense(bc.defenses[k])->period = c.periods[k];
      Amg amg(std::move(m));
      c.report = pareto_frontier(amg, o.cost_budgets, o.frontier);
      // Strategies may refer to the per-configuration model; keep only the numbers.
      for (auto& p : c.report.frontier) p.strategy.reset();
      for (auto& b : c.report.budgets)
        if (b.point) b.point->strategy.reset();
    } catch (const std::exception& e) {
      c.error = e.what();
    }
  }
  struct Tagged {
    double time, cost;
    std::size_t config;
  };
  std::vector<Tagged> all;
  for (const auto& c : res.configs)
    for (const auto& p : c.report.frontier) all.push_back({p.expected_time, p.expected_cost, c.id});
  std::stable_sort(all.begin(), all.end(), [](const Tagged& a, const Tagged& b) {
    return a.time != b.time ? a.time < b.time : a.cost < b.cost;
  });
  double best = INFINITY;
  for (const auto& t : all)
    if (t.cost < best) {
      best = t.cost;
      if (std::find(res.dominating.begin(), res.dominating.end(), t.config) == res.dominating.end())
        res.dominating.push_back(t.config);
    }
  std::sort(res.dominating.begin(), res.dominating.end());
  return res;
}

}  // namespace amg
