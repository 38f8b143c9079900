#include <doctest.h>

#include <array>
#include <cmath>

#include "amg/engine.hpp"
#include "amg/strategies.hpp"
#include "support/fixtures.hpp"
#include "support/oracle.hpp"

using namespace amg;

namespace {

NodeSet S(const Amg& a, std::initializer_list<const char*> ids) {
  NodeSet s;
  for (const char* id : ids) s.set(a.node_index(id));
  return s;
}

FixedSetStrategy only(const Amg& a, std::initializer_list<const char*> ids) { return {S(a, ids), "only"}; }

// Recomputes the accumulator from the steps alone.
void check_trace(const Amg& a, const RunTrace& tr) {
  std::int64_t time = 0, cost = 0;
  for (std::size_t i = 0; i < tr.steps.size(); ++i) {
    const TraceStep& st = tr.steps[i];
    if (i > 0) {
      CHECK(tr.steps[i - 1].to.state == st.from.state);
      CHECK(tr.steps[i - 1].to.clocks == st.from.clocks);
    }
    CHECK_FALSE(is_goal(a, st.from.state));
    if (st.is_delay) {
      time += st.delay;
      cost += st.delay * cost_rate(a, st.from.state);
    } else if (st.label.kind == ActionKind::Activate) {
      cost += a.attack(st.label.target).cost;
    }
    CHECK(st.time == time);
    CHECK(st.cost == cost);
  }
  if (tr.outcome == Outcome::GoalReached) {
    REQUIRE_FALSE(tr.steps.empty());
    CHECK(is_goal(a, tr.steps.back().to.state));
    CHECK(tr.attack_time == time);
    CHECK(tr.attack_cost == cost);
  }
}

}  // namespace

TEST_SUITE("engine") {
  TEST_CASE("rng streams are reproducible and distinct") {
    RngStream a(42, 0), b(42, 0), c(42, 1), d(43, 0);
    const auto x = a.next();
    CHECK(x == b.next());
    CHECK(x != c.next());
    CHECK(x != d.next());
    RngStream r(1, 2);
    for (int i = 0; i < 1000; ++i) {
      CHECK(r.below(3) < 3);
      const double u = r.uniform();
      CHECK(u >= 0.0);
      CHECK(u < 1.0);
      CHECK(r.bernoulli(Probability::parse("1")));
      CHECK_FALSE(r.bernoulli(Probability::parse("0")));
    }
  }

  TEST_CASE("a1 loop: attempts of ten time units") {
    Amg a = fixtures::load(fixtures::kSimple);
    auto s = only(a, {"a_1"});
    for (std::uint64_t i = 0; i < 50; ++i) {
      RngStream rng(5, i);
      RunTrace tr = simulate_run(a, s, rng, 10'000);
      REQUIRE(tr.outcome == Outcome::GoalReached);
      CHECK(tr.attack_time % 10 == 0);
      CHECK(tr.attack_cost == 2 * tr.attack_time);
      check_trace(a, tr);
    }
  }

  TEST_CASE("single attack with p = 1 is deterministic") {
    Amg a = fixtures::load(fixtures::single_attack(5, "1", 3, 2));
    GreedyAllStrategy g;
    for (std::uint64_t i = 0; i < 20; ++i) {
      RngStream rng(9, i);
      RunTrace tr = simulate_run(a, g, rng, 1000);
      REQUIRE(tr.outcome == Outcome::GoalReached);
      CHECK(tr.attack_time == 5);
      CHECK(tr.attack_cost == 13);
    }
  }

  TEST_CASE("a0 alone never completes") {
    Amg a = fixtures::load(fixtures::kSimple);
    auto s = only(a, {"a_0"});
    for (std::uint64_t i = 0; i < 20; ++i) {
      RngStream rng(i, 0);
      RunTrace tr = simulate_run(a, s, rng, 2000);
      CHECK(tr.outcome == Outcome::HorizonExceeded);
      check_trace(a, tr);
    }
  }

  TEST_CASE("p = 0 and p = 1 never take the other branch") {
    const char* doc = R"({"root": "g", "nodes": [{"id": "g", "kind": "subgoal", "refinement": "or"},
      {"id": "z", "kind": "attack", "t": 2, "p": 0, "c": 0, "cp": 0},
      {"id": "o", "kind": "attack", "t": 3, "p": 1, "c": 0, "cp": 0}],
      "edges": [["g", "z"], ["g", "o"]]})";
    Amg a = fixtures::load(doc);
    GreedyAllStrategy g;
    for (std::uint64_t i = 0; i < 200; ++i) {
      RngStream rng(3, i);
      RunTrace tr = simulate_run(a, g, rng, 100);
      for (const auto& st : tr.steps) {
        if (st.is_delay) continue;
        if (st.label.target == a.node_index("z")) CHECK(st.label.kind != ActionKind::CompleteSuccess);
        if (st.label.target == a.node_index("o")) CHECK(st.label.kind != ActionKind::CompleteFail);
      }
    }
  }

  TEST_CASE("traces on random models: accumulator, absorption, determinism") {
    std::mt19937_64 gen(31);
    GreedyAllStrategy g;
    for (int m = 0; m < 40; ++m) {
      Amg a(oracle::random_model(gen, {10, 3, 6}));
      for (std::uint64_t i = 0; i < 10; ++i) {
        RngStream r1(77, i), r2(77, i);
        RunTrace t1 = simulate_run(a, g, r1, 300);
        RunTrace t2 = simulate_run(a, g, r2, 300);
        check_trace(a, t1);
        REQUIRE(t1.steps.size() == t2.steps.size());
        CHECK(t1.attack_time == t2.attack_time);
        CHECK(t1.attack_cost == t2.attack_cost);
        for (const auto& st : t1.steps)
          if (!st.is_delay && st.label.kind == ActionKind::Activate)
            CHECK(available_activations(a, st.from.state).test(st.label.target));
      }
    }
  }

  TEST_CASE("compiled simulator agrees run by run") {
    std::mt19937_64 gen(37);
    for (int m = 0; m < 40; ++m) {
      Amg a(oracle::random_model(gen, {10, 3, 6}));
      Simulator sim(a);
      CHECK(sim.compiled());
      NodeSet half;
      for (NodeIndex x : a.attack_list())
        if (gen() % 2) half.set(x);
      GreedyAllStrategy g;
      FixedSetStrategy f(half, "half");
      for (const Strategy* s : {static_cast<const Strategy*>(&g), static_cast<const Strategy*>(&f)}) {
        for (std::uint64_t i = 0; i < 20; ++i) {
          RngStream r1(5, i), r2(5, i);
          RunResult x = simulate(a, *s, r1, 400);
          RunResult y = sim.run(*s, r2, 400);
          CHECK(x.reached == y.reached);
          CHECK(x.time == y.time);
          CHECK(x.cost == y.cost);
        }
      }
    }
  }

  TEST_CASE("parallel evaluation equals the serial reference") {
    Amg a(load_model(fixtures::model_path("use-case.amg.json")));
    GreedyAllStrategy g;
    EvalOptions o;
    o.runs = 2000;
    o.seed = 42;
    o.horizon = 20'000;
    o.threads = 1;
    EvalStats s1 = evaluate(a, g, o);
    o.threads = 8;
    EvalStats s8 = evaluate(a, g, o);
    EvalStats ref = evaluate_serial(a, g, o);
    for (const EvalStats* s : {&s8, &ref}) {
      CHECK(s->n_reached == s1.n_reached);
      REQUIRE(s->mean_time.has_value() == s1.mean_time.has_value());
      if (s1.mean_time) {
        CHECK(s->mean_time->mean == s1.mean_time->mean);
        CHECK(s->mean_time->std_error == s1.mean_time->std_error);
        CHECK(s->mean_cost->mean == s1.mean_cost->mean);
      }
    }
  }

  TEST_CASE("single run statistics") {
    Amg a = fixtures::load(fixtures::single_attack(5, "1", 3, 2));
    GreedyAllStrategy g;
    EvalOptions o;
    o.runs = 1;
    EvalStats s = evaluate(a, g, o);
    CHECK(s.n_runs == 1);
    REQUIRE(s.mean_time);
    CHECK(s.mean_time->mean == 5.0);
    CHECK(s.mean_cost->mean == 13.0);
    CHECK(s.reach_prob.mean == 1.0);
  }

  TEST_CASE("never activating reaches nothing") {
    Amg a = fixtures::load(fixtures::kSimple);
    NeverStrategy n;
    EvalOptions o;
    o.runs = 50;
    o.t_max = 500;
    EvalStats s = evaluate(a, n, o);
    CHECK(s.reach_prob.mean == 0.0);
    CHECK_FALSE(s.time_given_time.has_value());
    CHECK_FALSE(s.mean_time.has_value());
  }

  TEST_CASE("conditional statistics") {
    Amg a = fixtures::load(fixtures::kSimple);
    auto s = only(a, {"a_1"});
    EvalOptions o;
    o.runs = 4000;
    o.seed = 3;
    o.t_max = 15;
    o.c_max = 25;
    EvalStats st = evaluate(a, s, o);
    // T < 15 only for the first attempt.
    CHECK(std::abs(st.reach_prob.mean - 0.5) < 4 * st.reach_prob.std_error + 1e-12);
    REQUIRE(st.time_given_time);
    CHECK(st.time_given_time->mean == 10.0);
    REQUIRE(st.cost_given_cost);
    CHECK(st.cost_given_cost->mean == 20.0);
  }

  TEST_CASE("Monte Carlo agrees with the closed form for the a1 loop") {
    Amg a = fixtures::load(fixtures::kSimple);
    auto s = only(a, {"a_1"});
    EvalOptions o;
    o.runs = 100'000;
    o.seed = 42;
    EvalStats st = evaluate(a, s, o);
    REQUIRE(st.mean_time);
    CHECK(std::abs(st.mean_time->mean - 20.0) <= 3 * st.mean_time->std_error);
    CHECK(std::abs(st.mean_cost->mean - 40.0) <= 3 * st.mean_cost->std_error);
  }

  TEST_CASE("Monte Carlo agrees with exact chain values on random models") {
    std::mt19937_64 gen(41);
    int compared = 0;
    for (int m = 0; m < 40 && compared < 12; ++m) {
      amg::AmgModel model = oracle::random_model(gen, {7, 2, 4});
      oracle::Graph g(model);
      auto v = oracle::plan_value(g, g.attacks, 300);
      if (!v || !v->reaches) continue;
      Amg a(model);
      GreedyAllStrategy greedy;
      EvalOptions o;
      o.runs = 20'000;
      o.seed = 1000 + m;
      o.horizon = 1'000'000;
      EvalStats st = evaluate(a, greedy, o);
      REQUIRE(st.mean_time);
      const double et = static_cast<double>(v->time), ec = static_cast<double>(v->cost);
      CHECK(std::abs(st.mean_time->mean - et) <= 4 * st.mean_time->std_error + 1e-9);
      CHECK(std::abs(st.mean_cost->mean - ec) <= 4 * st.mean_cost->std_error + 1e-9);
      ++compared;
    }
    CHECK(compared >= 5);
  }

  TEST_CASE("engine matches the reference simulator in distribution") {
    Amg a = fixtures::load(fixtures::kFollows);
    oracle::Graph g(a.model());
    std::mt19937_64 gen(5);
    double sum = 0;
    const int n = 20'000;
    for (int i = 0; i < n; ++i) sum += static_cast<double>(oracle::simulate_plan(g, g.attacks, gen, 1'000'000)->time);
    GreedyAllStrategy greedy;
    EvalOptions o;
    o.runs = n;
    o.seed = 8;
    EvalStats st = evaluate(a, greedy, o);
    REQUIRE(st.mean_time);
    const double ref = sum / n;
    CHECK(std::abs(st.mean_time->mean - ref) <= 5 * st.mean_time->std_error * std::sqrt(2.0));
  }

  TEST_CASE("three-way tie is broken uniformly") {
    Amg a = fixtures::load(fixtures::kThreeWay);
    GreedyAllStrategy g;
    std::array<int, 3> first{};
    const int n = 30'000;
    for (int i = 0; i < n; ++i) {
      RngStream rng(42, static_cast<std::uint64_t>(i));
      RunTrace tr = simulate_run(a, g, rng, 100);
      for (const auto& st : tr.steps)
        if (!st.is_delay && st.label.kind == ActionKind::CompleteSuccess) {
          ++first[st.label.target == a.node_index("a") ? 0 : st.label.target == a.node_index("b") ? 1 : 2];
          break;
        }
    }
    const double mean = n / 3.0, sigma = std::sqrt(n * (1.0 / 3) * (2.0 / 3));
    for (int k : first) CHECK(std::abs(k - mean) <= 3 * sigma);
  }
}
