// amgmtd: attack-defense models with moving target defenses.
#include <cstdio>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "amg/export.hpp"
#include "amg/io.hpp"
#include "amg/optimizer.hpp"
#include "amg/pareto.hpp"
#include "amg/strategies.hpp"
#include "amg/validate.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitParse = 2;

struct Common {
  std::string model;
  std::optional<std::size_t> limit_states;
  int threads = 0;
  std::string out;
};

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") std::cout << text;
  else amg::write_file_atomic(path, text);
}

amg::Amg load(const std::string& path) { return amg::Amg(amg::load_model(path)); }

std::vector<std::int64_t> parse_budgets(const std::string& text) {
  std::vector<std::int64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    std::size_t used = 0;
    std::int64_t v = 0;
    try {
      v = std::stoll(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || item.find_first_not_of(" \t", used) != std::string::npos)
      throw amg::ParseError("--budgets: '" + item + "' is not an integer");
    out.push_back(v);
  }
  return out;
}

amg::SolverOptions solver_options(const Common& c) {
  amg::SolverOptions s;
  if (c.limit_states) s.max_states = *c.limit_states;
  s.threads = c.threads;
  return s;
}

int cmd_validate(const Common& c) {
  amg::AmgModel m = amg::load_model(c.model);
  amg::ValidationReport r = amg::validate(m);
  if (!r.ok()) {
    std::cout << r.to_string();
    return kExitFailure;
  }
  std::cout << "valid: " << m.nodes.size() << " nodes, " << m.edges.size() << " edges, " << m.defenses.size()
            << " defenses\n";
  return kExitOk;
}

int cmd_build(const Common& c, const std::string& dot) {
  amg::Amg a = load(c.model);
  amg::BuildLimits lim;
  if (c.limit_states) lim.max_locations = *c.limit_states;
  amg::Ptmdp p = amg::build_ptmdp(a, lim);
  std::cout << "locations: " << p.size() << "\ntransitions: " << p.transitions().size()
            << "\ngoal reachable: " << (p.goal() ? "yes" : "no") << "\n";
  if (!dot.empty()) emit(dot, amg::export_ptmdp_dot(a, p));
  return kExitOk;
}

struct SimulateArgs {
  std::string strategy = "greedy-all";
  std::size_t runs = 10000;
  std::uint64_t seed = 0;
  std::optional<std::int64_t> tmax, cmax, horizon;
  std::string trace_out;
  std::size_t trace_runs = 10;
  std::string format = "json";
};

int cmd_simulate(const Common& c, const SimulateArgs& s) {
  amg::Amg a = load(c.model);
  auto strategy = amg::make_strategy(a, s.strategy);
  amg::EvalOptions o;
  o.runs = s.runs;
  o.seed = s.seed;
  o.t_max = s.tmax;
  o.c_max = s.cmax;
  o.horizon = s.horizon;
  o.threads = c.threads;
  amg::EvalStats st = amg::evaluate(a, *strategy, o);
  emit(c.out, s.format == "csv" ? amg::stats_csv(st) : amg::stats_json(st, strategy->describe(), s.seed));
  if (!s.trace_out.empty()) {
    std::string text = "run,time,cost,event,state\n";
    for (std::size_t i = 0; i < std::min(s.runs, s.trace_runs); ++i) {
      amg::RngStream rng(s.seed, i);
      text += amg::trace_text(a, amg::simulate_run(a, *strategy, rng, st.horizon), i);
    }
    emit(s.trace_out, text);
  }
  return kExitOk;
}

struct OptimizeArgs {
  std::string objective = "time";
  std::optional<std::int64_t> cmax, tmax;
  std::string policy_out;
  std::size_t runs = 100000;
  std::uint64_t seed = 42;
};

int cmd_optimize(const Common& c, const OptimizeArgs& o) {
  amg::Amg a = load(c.model);
  const amg::Objective obj = o.objective == "cost" ? amg::Objective::Cost : amg::Objective::Time;
  if (o.cmax && *o.cmax <= 0) throw amg::PreconditionError("--cmax must be positive");
  amg::OptimizationResult r = amg::optimize(a, obj, solver_options(c), o.cmax);
  std::vector<std::string> ids;
  std::vector<std::int64_t> periods;
  for (amg::DefenseIndex d = 0; d < a.defense_count(); ++d) {
    ids.push_back(a.defense_id(d));
    periods.push_back(a.defense(d).period);
  }
  std::optional<amg::ParetoPoint> point;
  if (r.reachable) {
    amg::ParetoPoint p;
    p.expected_time = r.evaluation.expected_time;
    p.expected_cost = r.evaluation.expected_cost;
    p.method = amg::Method::Exact;
    if (o.tmax) {
      // Probability of meeting the time limit under the optimal policy.
      amg::EvalOptions e;
      e.runs = o.runs;
      e.seed = o.seed;
      e.t_max = o.tmax;
      e.threads = c.threads;
      p.reach_prob = amg::evaluate(a, *r.strategy, e).reach_prob.mean;
    }
    point = p;
  } else {
    std::cerr << "goal not reachable almost surely" << (o.cmax ? " within the cost budget" : "") << "\n";
  }
  emit(c.out, amg::frontier_csv_header(ids) + amg::frontier_csv_row({0, periods, o.cmax, point, amg::Method::Exact}));
  if (r.reachable) {
    std::cerr << "objective " << o.objective << ": " << amg::format_number(r.value);
    if (r.exact_value) std::cerr << " (exact " << *r.exact_value << ")";
    std::cerr << "; E[T] = " << r.evaluation.exact_time.value_or(amg::format_number(r.evaluation.expected_time))
              << ", E[C] = " << r.evaluation.exact_cost.value_or(amg::format_number(r.evaluation.expected_cost))
              << "; decision states " << r.decision_states << "\n";
    if (!o.policy_out.empty()) emit(o.policy_out, amg::policy_text(a, *r.strategy));
  }
  return kExitOk;
}

struct FrontierArgs {
  std::string budgets;
  std::size_t runs = 100000;
  std::size_t screen_runs = 2000;
  std::size_t final_points = 6;
  std::uint64_t seed = 42;
  std::optional<std::int64_t> horizon;
  bool exact_only = false;
};

amg::FrontierOptions frontier_options(const Common& c, const FrontierArgs& f) {
  amg::FrontierOptions o;
  o.solver = solver_options(c);
  o.allow_montecarlo = !f.exact_only;
  o.runs = f.runs;
  o.screen_runs = f.screen_runs;
  o.max_final_points = f.final_points;
  o.seed = f.seed;
  o.horizon = f.horizon;
  o.threads = c.threads;
  return o;
}

int cmd_pareto(const Common& c, const FrontierArgs& f) {
  amg::Amg a = load(c.model);
  auto budgets = parse_budgets(f.budgets);
  amg::FrontierReport rep = amg::pareto_frontier(a, budgets, frontier_options(c, f));
  emit(c.out, amg::frontier_csv(a, rep));
  if (!rep.note.empty()) std::cerr << rep.note << "\n";
  for (const auto& b : rep.budgets)
    if (!b.point) std::cerr << "c_max " << b.c_max << ": " << b.note << "\n";
  return kExitOk;
}

int cmd_sweep(const Common& c, const std::string& spec_path, const std::string& summary_path,
              std::optional<std::int64_t> horizon) {
  amg::AmgModel m = amg::load_model(c.model);
  amg::Amg checked(m);
  amg::BudgetSpec spec = amg::parse_budget_spec(amg::read_file(spec_path));
  amg::SweepOptions so;
  so.frontier = spec.frontier;
  if (c.limit_states) so.frontier.solver.max_states = *c.limit_states;
  if (horizon) so.frontier.horizon = horizon;
  so.cost_budgets = spec.cost_budgets;
  so.threads = c.threads;
  amg::SweepResult res = amg::sweep_defense_periods(m, spec.constraint, so);
  emit(c.out, amg::sweep_csv(res));
  const std::string summary = amg::sweep_summary(res);
  if (summary_path.empty()) std::cerr << summary;
  else emit(summary_path, summary);
  return kExitOk;
}

int cmd_export(const Common& c, const std::string& format, std::optional<std::int64_t> query_horizon) {
  amg::Amg a = load(c.model);
  amg::BuildLimits lim;
  if (c.limit_states) lim.max_locations = *c.limit_states;
  if (format == "dot") {
    emit(c.out, amg::export_amg_dot(a));
  } else if (format == "ptmdp-dot") {
    emit(c.out, amg::export_ptmdp_dot(a, amg::build_ptmdp(a, lim)));
  } else {
    amg::UppaalOptions u;
    u.limits = lim;
    u.query_horizon = query_horizon;
    emit(c.out, amg::export_uppaal(a, u));
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Attack-defense models with moving target defenses: simulation, optimization, export"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub, bool with_out) {
    sub->add_option("model", common.model, "model file (.amg.json)")->required();
    sub->add_option("--limit-states", common.limit_states, "exploration cap on states");
    sub->add_option("--threads", common.threads, "worker threads (0: default)");
    if (with_out) sub->add_option("-o,--out", common.out, "output file (default: standard output)");
  };

  auto* validate = app.add_subcommand("validate", "check a model file");
  add_common(validate, false);

  std::string build_dot;
  auto* build = app.add_subcommand("build", "build the timed game of a model");
  add_common(build, false);
  build->add_option("--dot", build_dot, "write the game as DOT");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo evaluation of a strategy");
  add_common(simulate, true);
  simulate->add_option("--strategy", sim.strategy, "never | greedy-all | only:<ids> | rule file");
  simulate->add_option("--runs", sim.runs, "number of runs");
  simulate->add_option("--seed", sim.seed, "random seed");
  simulate->add_option("--tmax", sim.tmax, "time limit for P[T < tmax]");
  simulate->add_option("--cmax", sim.cmax, "cost limit for P[C < cmax]");
  simulate->add_option("--horizon", sim.horizon, "time horizon when --tmax is absent");
  simulate->add_option("--trace-out", sim.trace_out, "write event traces");
  simulate->add_option("--trace-runs", sim.trace_runs, "number of runs to trace");
  simulate->add_option("--format", sim.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  OptimizeArgs opt;
  auto* optimize = app.add_subcommand("optimize", "optimal memoryless strategy");
  add_common(optimize, true);
  optimize->add_option("--objective", opt.objective, "time or cost")->check(CLI::IsMember({"time", "cost"}));
  optimize->add_option("--cmax", opt.cmax, "cost budget");
  optimize->add_option("--tmax", opt.tmax, "time limit reported as reach_prob");
  optimize->add_option("--policy-out", opt.policy_out, "write the policy");
  optimize->add_option("--runs", opt.runs, "Monte Carlo runs for --tmax");
  optimize->add_option("--seed", opt.seed, "random seed for --tmax");

  FrontierArgs fr;
  auto* pareto = app.add_subcommand("pareto", "time/cost Pareto frontier over cost budgets");
  add_common(pareto, true);
  pareto->add_option("--budgets", fr.budgets, "comma-separated cost budgets")->required();
  pareto->add_option("--runs", fr.runs, "Monte Carlo runs per frontier point");
  pareto->add_option("--screen-runs", fr.screen_runs, "Monte Carlo runs per screened candidate");
  pareto->add_option("--final-points", fr.final_points, "Monte Carlo frontier points evaluated with --runs");
  pareto->add_option("--seed", fr.seed, "random seed");
  pareto->add_option("--horizon", fr.horizon, "simulation time horizon");
  pareto->add_flag("--exact-only", fr.exact_only, "fail instead of falling back to Monte Carlo");

  std::string spec_path, summary_path;
  std::optional<std::int64_t> sweep_horizon;
  auto* sweep = app.add_subcommand("sweep", "frontiers for every defense-period configuration");
  add_common(sweep, true);
  sweep->add_option("--budget-spec", spec_path, "budget constraint file (JSON)")->required();
  sweep->add_option("--summary", summary_path, "write the summary (default: standard error)");
  sweep->add_option("--horizon", sweep_horizon, "simulation time horizon");

  std::string format = "uppaal";
  std::optional<std::int64_t> query_horizon;
  auto* exp = app.add_subcommand("export", "DOT or Uppaal Stratego export");
  add_common(exp, true);
  exp->add_option("--format", format, "uppaal, dot or ptmdp-dot")->check(CLI::IsMember({"uppaal", "dot", "ptmdp-dot"}));
  exp->add_option("--query-horizon", query_horizon, "add a minimum expected time query");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitParse;
  }

  try {
    if (*validate) return cmd_validate(common);
    if (*build) return cmd_build(common, build_dot);
    if (*simulate) return cmd_simulate(common, sim);
    if (*optimize) return cmd_optimize(common, opt);
    if (*pareto) return cmd_pareto(common, fr);
    if (*sweep) return cmd_sweep(common, spec_path, summary_path, sweep_horizon);
    if (*exp) return cmd_export(common, format, query_horizon);
  } catch (const amg::ParseError& e) {
    std::cerr << common.model;
    if (e.line() > 0) std::cerr << ":" << e.line() << ":" << e.column();
    std::cerr << ": " << e.what() << "\n";
    return kExitParse;
  } catch (const amg::ValidationError& e) {
    std::cout << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}
