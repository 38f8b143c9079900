// Serial reference vs OpenMP kernels.
#include <benchmark/benchmark.h>

#include "amg/engine.hpp"
#include "amg/io.hpp"
#include "amg/optimizer.hpp"
#include "amg/strategies.hpp"
#include "support/oracle.hpp"

namespace {

const amg::Amg& use_case() {
  static const amg::Amg a(amg::load_model(AMG_MODELS_DIR "/use-case.amg.json"));
  return a;
}

amg::EvalOptions eval_options(int threads) {
  amg::EvalOptions o;
  o.runs = 20'000;
  o.seed = 1;
  o.horizon = 100'000;
  o.threads = threads;
  return o;
}

void BM_evaluate_serial(benchmark::State& state) {
  amg::GreedyAllStrategy g;
  for (auto _ : state) benchmark::DoNotOptimize(amg::evaluate_serial(use_case(), g, eval_options(1)));
}

void BM_evaluate(benchmark::State& state) {
  amg::GreedyAllStrategy g;
  for (auto _ : state)
    benchmark::DoNotOptimize(amg::evaluate(use_case(), g, eval_options(static_cast<int>(state.range(0)))));
}

struct Graph {
  amg::DecisionGraph g;
  std::vector<bool> closure;
};

// First random model whose decision graph has 50k to 400k states.
const Graph& decision_graph() {
  static const amg::Amg model = [] {
    std::mt19937_64 gen(5);
    for (;;) {
      amg::Amg a(oracle::random_model(gen, {10, 4, 8}));
      try {
        const std::size_t n = amg::DecisionGraph::build(a, std::nullopt, 400'000).size();
        if (n >= 50'000) return a;
      } catch (const amg::ExplorationLimitExceeded&) {
      }
    }
  }();
  static const Graph gr = [] {
    amg::DecisionGraph g = amg::DecisionGraph::build(model, std::nullopt, 400'000);
    std::vector<bool> c = amg::reachability_closure(g);
    return Graph{std::move(g), std::move(c)};
  }();
  return gr;
}

amg::SolverOptions vi_options(int threads) {
  amg::SolverOptions o;
  o.threads = threads;
  o.max_iterations = 200;
  return o;
}

void BM_value_iteration_serial(benchmark::State& state) {
  const Graph& gr = decision_graph();
  for (auto _ : state)
    benchmark::DoNotOptimize(amg::value_iteration_serial(gr.g, gr.closure, amg::Weights{}, vi_options(1)));
  state.counters["states"] = static_cast<double>(gr.g.size());
}

void BM_value_iteration(benchmark::State& state) {
  const Graph& gr = decision_graph();
  const int threads = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(amg::value_iteration(gr.g, gr.closure, amg::Weights{}, vi_options(threads)));
  state.counters["states"] = static_cast<double>(gr.g.size());
}

}  // namespace

BENCHMARK(BM_evaluate_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_evaluate)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_value_iteration_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_value_iteration)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
