#include "amg/optimizer.hpp"

#include <omp.h>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace amg {

namespace {

using Rational = boost::multiprecision::cpp_rational;
constexpr double kInf = std::numeric_limits<double>::infinity();
// Secondary objective weight: breaks ties and rules out zero-weight loops.
constexpr double kSecondary = 1e-7;

std::uint64_t mix(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string rational_text(const Rational& r) {
  auto num = boost::multiprecision::numerator(r);
  auto den = boost::multiprecision::denominator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

}  // namespace

struct DecisionGraph::Impl {
  const Amg* amg = nullptr;
  std::size_t n_attacks = 0;
  std::size_t n_defenses = 0;
  std::size_t width = 0;
  std::vector<int> slot;  // node index -> attack slot
  bool track_budget = false;
  std::int64_t min_cost = 0;
  std::optional<std::int64_t> budget;

  std::vector<AttackState> locations;
  std::unordered_map<AttackState, std::int32_t, AttackStateHash> location_ids;
  std::vector<std::int32_t> keys;
  std::vector<std::uint32_t> table;
  std::size_t count = 0;
  std::size_t expanded = 0;  // nodes whose options are built

  const std::int32_t* key(std::uint32_t node) const { return keys.data() + node * width; }

  std::uint64_t hash(const std::int32_t* k) const {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL;
    for (std::size_t i = 0; i < width; ++i) h = mix(h ^ static_cast<std::uint32_t>(k[i]));
    return h;
  }

  std::optional<std::uint32_t> lookup(const std::int32_t* k) const {
    if (table.empty()) return std::nullopt;
    const std::size_t mask = table.size() - 1;
    for (std::size_t i = hash(k) & mask;; i = (i + 1) & mask) {
      std::uint32_t v = table[i];
      if (v == UINT32_MAX) return std::nullopt;
      if (std::equal(k, k + width, key(v))) return v;
    }
  }

  void grow() {
    std::vector<std::uint32_t> next(std::max<std::size_t>(1024, table.size() * 2), UINT32_MAX);
    const std::size_t mask = next.size() - 1;
    for (std::uint32_t v = 0; v < count; ++v) {
      std::size_t i = hash(key(v)) & mask;
      while (next[i] != UINT32_MAX) i = (i + 1) & mask;
      next[i] = v;
    }
    table.swap(next);
  }

  // Returns the node for k, adding it when new.
  std::uint32_t intern(const std::int32_t* k, std::size_t cap) {
    if (auto v = lookup(k)) return *v;
    if (count >= cap) throw ExplorationLimitExceeded(count, count - expanded, cap);
    if ((count + 1) * 2 > table.size()) grow();
    keys.insert(keys.end(), k, k + width);
    const std::uint32_t id = static_cast<std::uint32_t>(count++);
    const std::size_t mask = table.size() - 1;
    std::size_t i = hash(k) & mask;
    while (table[i] != UINT32_MAX) i = (i + 1) & mask;
    table[i] = id;
    return id;
  }

  std::int32_t location_id(const AttackState& s) {
    auto [it, fresh] = location_ids.emplace(s, static_cast<std::int32_t>(locations.size()));
    if (fresh) locations.push_back(s);
    return it->second;
  }

  std::int64_t compress(std::int64_t b) const {
    if (b < min_cost) return 0;
    return b;
  }

  void encode(std::int32_t loc, const ClockValuation& v, std::int64_t budget_left, std::int32_t* out) const {
    out[0] = loc;
    if (loc == 0) {
      std::fill(out + 1, out + width, 0);
      return;
    }
    for (std::size_t i = 0; i < n_attacks; ++i) out[1 + i] = static_cast<std::int32_t>(v.attack[amg->attack_list()[i]]);
    for (std::size_t d = 0; d < n_defenses; ++d) out[1 + n_attacks + d] = static_cast<std::int32_t>(v.defense[d]);
    out[width - 1] = track_budget ? static_cast<std::int32_t>(compress(std::max<std::int64_t>(budget_left, 0))) : -1;
  }

  ClockValuation decode(const std::int32_t* k) const {
    ClockValuation v = initial_valuation(*amg);
    for (std::size_t i = 0; i < n_attacks; ++i) v.attack[amg->attack_list()[i]] = k[1 + i];
    for (std::size_t d = 0; d < n_defenses; ++d) v.defense[d] = k[1 + n_attacks + d];
    return v;
  }

  struct RawOption {
    std::int32_t attack;
    std::int64_t time;
    std::int64_t cost;
    std::vector<std::int32_t> keys;  // successor keys, flat
    std::vector<std::int64_t> num;
    std::vector<std::int64_t> den;
  };

  // Options of the decision state k in canonical order: wait first, then activations by id.
  std::vector<RawOption> expand(const std::int32_t* k) {
    std::vector<RawOption> out;
    if (k[0] == 0) return out;
    const AttackState s = locations[k[0]];
    const ClockValuation v = decode(k);
    const std::int64_t budget_left = k[width - 1];
    std::vector<std::int32_t> buf(width);

    EligibleEvents ev = eligible_events(*amg, s, v);
    if (ev.delay) {
      const std::int64_t b = *ev.delay;
      const std::int64_t rate = cost_rate(*amg, s);
      ClockValuation at = advance(*amg, s, v, b);
      RawOption o{-1, b, b * rate, {}, {}, {}};
      const std::int64_t kk = static_cast<std::int64_t>(ev.events.size());
      for (const Event& e : ev.events) {
        const Probability& p = e.kind == Event::Kind::Attack ? amg->attack(e.index).prob : amg->defense(e.index).prob;
        for (int outcome = 0; outcome < 2; ++outcome) {
          const bool success = outcome == 0;
          const std::int64_t num = success ? p.num() : p.den() - p.num();
          if (num == 0) continue;
          ActionLabel label;
          if (e.kind == Event::Kind::Attack)
            label = {success ? ActionKind::CompleteSuccess : ActionKind::CompleteFail, e.index};
          else
            label = {success ? ActionKind::DefenseSuccess : ActionKind::DefenseFail, e.index};
          Configuration next = fire(*amg, s, at, label);
          const std::int32_t loc = location_id(next.state);
          encode(loc, next.clocks, budget_left - b * rate, buf.data());
          o.keys.insert(o.keys.end(), buf.begin(), buf.end());
          o.num.push_back(num);
          o.den.push_back(p.den() * kk);
        }
      }
      out.push_back(std::move(o));
    }
    for (NodeIndex a : elements(available_activations(*amg, s))) {
      const std::int64_t c = amg->attack(a).cost;
      if (track_budget && c > budget_left) continue;
      AttackState t = s;
      t.activated.set(a);
      ClockValuation w = v;
      w.attack[a] = 0;
      encode(location_id(t), w, budget_left - c, buf.data());
      out.push_back({static_cast<std::int32_t>(a), 0, c, std::vector<std::int32_t>(buf), {1}, {1}});
    }
    return out;
  }
};

DecisionGraph DecisionGraph::build(const Amg& amg, std::optional<std::int64_t> cost_budget, std::size_t max_states) {
  auto impl = std::make_shared<Impl>();
  impl->amg = &amg;
  impl->n_attacks = amg.attack_list().size();
  impl->n_defenses = amg.defense_count();
  impl->width = 2 + impl->n_attacks + impl->n_defenses;
  impl->budget = cost_budget;
  std::int64_t min_cost = 0;
  for (NodeIndex a : amg.attack_list()) {
    const std::int64_t c = amg.attack(a).cost;
    if (c > 0 && (min_cost == 0 || c < min_cost)) min_cost = c;
  }
  impl->min_cost = min_cost;
  impl->track_budget = cost_budget.has_value() && min_cost > 0;
  if (impl->track_budget && *cost_budget > INT32_MAX) throw PreconditionError("cost budget too large for exact analysis");
  for (NodeIndex t : amg.attack_list())
    if (amg.attack(t).time > INT32_MAX) throw PreconditionError("attack time too large for exact analysis");
  for (DefenseIndex d = 0; d < amg.defense_count(); ++d)
    if (amg.defense(d).period > INT32_MAX) throw PreconditionError("defense period too large for exact analysis");

  const std::size_t cap = std::max<std::size_t>(max_states, 2);
  std::vector<std::int32_t> buf(impl->width);
  impl->location_id(goal_state(amg));
  impl->encode(0, initial_valuation(amg), 0, buf.data());
  impl->intern(buf.data(), cap);
  impl->encode(impl->location_id(AttackState{}), initial_valuation(amg), cost_budget.value_or(0), buf.data());
  impl->intern(buf.data(), cap);

  DecisionGraph g;
  g.amg_ = &amg;
  g.budget_ = cost_budget;
  std::vector<std::uint32_t> targets;
  std::vector<std::int32_t> key(impl->width);
  for (std::uint32_t node = 0; node < impl->count; ++node) {
    impl->expanded = node;
    g.node_option_.push_back(g.options_.size());
    std::copy(impl->key(node), impl->key(node) + impl->width, key.begin());
    for (auto& raw : impl->expand(key.data())) {
      DecisionOption o;
      o.attack = raw.attack;
      o.time = static_cast<double>(raw.time);
      o.cost = static_cast<double>(raw.cost);
      o.first = g.successors_.size();
      targets.clear();
      for (std::size_t i = 0; i < raw.num.size(); ++i) {
        const std::uint32_t t = impl->intern(raw.keys.data() + i * impl->width, cap);
        const double p = static_cast<double>(raw.num[i]) / static_cast<double>(raw.den[i]);
        auto it = std::find(targets.begin(), targets.end(), t);
        if (it == targets.end()) {
          targets.push_back(t);
          g.successors_.push_back({t, p});
        } else {
          g.successors_[o.first + (it - targets.begin())].prob += p;
        }
      }
      o.count = static_cast<std::uint32_t>(targets.size());
      g.options_.push_back(o);
    }
  }
  g.node_option_.push_back(g.options_.size());
  g.impl_ = impl;
  return g;
}

DecisionState DecisionGraph::state(std::uint32_t node) const {
  const std::int32_t* k = impl_->key(node);
  ClockValuation v = impl_->decode(k);
  DecisionState s{impl_->locations[k[0]], v.attack, v.defense, std::nullopt};
  if (k[impl_->width - 1] >= 0) s.budget = k[impl_->width - 1];
  return s;
}

std::optional<std::uint32_t> DecisionGraph::find(const AttackState& s, const ClockValuation& v) const {
  auto it = impl_->location_ids.find(s);
  if (it == impl_->location_ids.end()) return std::nullopt;
  std::vector<std::int32_t> buf(impl_->width);
  const std::int64_t left = budget_ ? *budget_ - v.cost : 0;
  impl_->encode(it->second, v, left, buf.data());
  return impl_->lookup(buf.data());
}

std::vector<DecisionGraph::ExactSuccessor> DecisionGraph::exact_successors(std::uint32_t node,
                                                                            const DecisionOption& o) const {
  // Expansion only reads and extends the location table, which is complete after build.
  auto& impl = const_cast<Impl&>(*impl_);
  std::vector<std::int32_t> key(impl.key(node), impl.key(node) + impl.width);
  for (auto& raw : impl.expand(key.data())) {
    if (raw.attack != o.attack) continue;
    std::vector<ExactSuccessor> out;
    for (std::size_t i = 0; i < raw.num.size(); ++i) {
      auto t = impl.lookup(raw.keys.data() + i * impl.width);
      if (!t) throw PreconditionError("decision graph is not closed");
      auto it = std::find_if(out.begin(), out.end(), [&](const ExactSuccessor& e) { return e.target == *t; });
      if (it == out.end()) {
        out.push_back({*t, raw.num[i], raw.den[i]});
      } else {
        __int128 num = static_cast<__int128>(it->num) * raw.den[i] + static_cast<__int128>(raw.num[i]) * it->den;
        __int128 den = static_cast<__int128>(it->den) * raw.den[i];
        __int128 a = num, b = den;
        while (b != 0) {
          __int128 r = a % b;
          a = b;
          b = r;
        }
        num /= a;
        den /= a;
        if (den > INT64_MAX || num > INT64_MAX) throw PreconditionError("probability overflow in exact evaluation");
        it->num = static_cast<std::int64_t>(num);
        it->den = static_cast<std::int64_t>(den);
      }
    }
    return out;
  }
  throw PreconditionError("option not found");
}

std::vector<bool> reachability_closure(const DecisionGraph& g) {
  const std::size_t n = g.size();
  std::vector<std::uint32_t> option_node(g.option_count());
  std::vector<std::uint64_t> rev_start(n + 1, 0);
  for (std::uint32_t s = 0; s < n; ++s)
    for (const auto& o : g.options(s)) {
      option_node[&o - g.options(0).data()] = s;
      for (const auto& t : g.successors(o)) ++rev_start[t.target + 1];
    }
  std::partial_sum(rev_start.begin(), rev_start.end(), rev_start.begin());
  std::vector<std::uint32_t> rev(rev_start.back());
  {
    std::vector<std::uint64_t> fill(rev_start.begin(), rev_start.end() - 1);
    for (std::uint32_t s = 0; s < n; ++s)
      for (const auto& o : g.options(s)) {
        const std::uint32_t oi = static_cast<std::uint32_t>(&o - g.options(0).data());
        for (const auto& t : g.successors(o)) rev[fill[t.target]++] = oi;
      }
  }
  const DecisionOption* base = g.options(0).data();
  std::vector<bool> in(n, true);
  std::vector<char> enabled(g.option_count());
  for (;;) {
    for (std::size_t oi = 0; oi < g.option_count(); ++oi) {
      const auto& o = base[oi];
      bool ok = true;
      for (const auto& t : g.successors(o)) ok = ok && in[t.target];
      enabled[oi] = ok;
    }
    std::vector<bool> back(n, false);
    back[DecisionGraph::goal()] = true;
    std::vector<std::uint32_t> queue{DecisionGraph::goal()};
    for (std::size_t q = 0; q < queue.size(); ++q) {
      const std::uint32_t t = queue[q];
      for (std::uint64_t r = rev_start[t]; r < rev_start[t + 1]; ++r) {
        const std::uint32_t oi = rev[r];
        const std::uint32_t s = option_node[oi];
        if (!enabled[oi] || back[s] || !in[s]) continue;
        back[s] = true;
        queue.push_back(s);
      }
    }
    if (back == in) return in;
    in.swap(back);
  }
}

namespace {

struct Solver {
  const DecisionGraph& g;
  const std::vector<bool>& closure;
  Weights w;
  std::vector<char> enabled;  // per option
  const DecisionOption* base;

  Solver(const DecisionGraph& graph, const std::vector<bool>& r, Weights weights)
      : g(graph), closure(r), w(weights), enabled(graph.option_count(), 0), base(graph.options(0).data()) {
    for (std::size_t oi = 0; oi < g.option_count(); ++oi) {
      bool ok = true;
      for (const auto& t : g.successors(base[oi])) ok = ok && closure[t.target];
      enabled[oi] = ok;
    }
  }

  std::size_t index(const DecisionOption& o) const { return static_cast<std::size_t>(&o - base); }

  double q(const DecisionOption& o, const std::vector<double>& v) const {
    double acc = w.time * o.time + w.cost * o.cost;
    for (const auto& t : g.successors(o)) acc += t.prob * v[t.target];
    return acc;
  }

  double backup(std::uint32_t s, const std::vector<double>& v) const {
    if (s == DecisionGraph::goal()) return 0.0;
    if (!closure[s]) return kInf;
    double best = kInf;
    for (const auto& o : g.options(s))
      if (enabled[index(o)]) best = std::min(best, q(o, v));
    return best;
  }
};

template <bool Parallel>
std::vector<double> run_value_iteration(const DecisionGraph& g, const std::vector<bool>& closure, Weights w,
                                        const SolverOptions& options, std::size_t* iterations) {
  Solver solver(g, closure, w);
  const long long n = static_cast<long long>(g.size());
  std::vector<double> v(g.size(), 0.0), next(g.size(), 0.0);
  for (long long s = 0; s < n; ++s)
    if (!closure[s]) v[s] = next[s] = kInf;
  std::size_t it = 0;
  const int threads = worker_threads(options.threads);
  for (; it < options.max_iterations; ++it) {
    double diff = 0.0;
    if constexpr (Parallel) {
#pragma omp parallel for if (n >= 4096) schedule(static) reduction(max : diff) num_threads(threads)
      for (long long s = 0; s < n; ++s) {
        next[s] = solver.backup(static_cast<std::uint32_t>(s), v);
        if (closure[s]) diff = std::max(diff, std::abs(next[s] - v[s]) / std::max(1.0, std::abs(next[s])));
      }
    } else {
      for (long long s = 0; s < n; ++s) {
        next[s] = solver.backup(static_cast<std::uint32_t>(s), v);
        if (closure[s]) diff = std::max(diff, std::abs(next[s] - v[s]) / std::max(1.0, std::abs(next[s])));
      }
    }
    v.swap(next);
    if (diff <= options.tolerance) {
      ++it;
      break;
    }
  }
  if (iterations) *iterations = it;
  return v;
}

// Picks, among near-optimal options, ones that make progress towards the goal,
// which yields a proper policy even when values are not fully converged.
std::vector<std::int32_t> proper_greedy(const Solver& solver, const std::vector<double>& v) {
  const DecisionGraph& g = solver.g;
  const std::size_t n = g.size();
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> rev(n);  // target -> (node, local option)
  std::vector<std::vector<char>> near(n);
  for (std::uint32_t s = 0; s < n; ++s) {
    if (!solver.closure[s] || s == DecisionGraph::goal()) continue;
    auto opts = g.options(s);
    double best = kInf;
    std::vector<double> qs(opts.size(), kInf);
    for (std::size_t i = 0; i < opts.size(); ++i)
      if (solver.enabled[solver.index(opts[i])]) best = std::min(best, qs[i] = solver.q(opts[i], v));
    near[s].assign(opts.size(), 0);
    for (std::size_t i = 0; i < opts.size(); ++i) {
      if (!solver.enabled[solver.index(opts[i])]) continue;
      near[s][i] = qs[i] <= best + 1e-7 * std::max(1.0, std::abs(best));
      for (const auto& t : g.successors(opts[i])) rev[t.target].push_back({s, static_cast<std::uint32_t>(i)});
    }
  }
  std::vector<std::int32_t> choice(n, -1);
  std::vector<bool> done(n, false);
  done[DecisionGraph::goal()] = true;
  std::vector<std::uint32_t> layer{DecisionGraph::goal()};
  for (int pass = 0; pass < 2; ++pass) {
    if (pass == 1) {
      layer.clear();
      for (std::uint32_t s = 0; s < n; ++s)
        if (done[s]) layer.push_back(s);
    }
    while (!layer.empty()) {
      std::vector<std::uint32_t> next;
      for (std::uint32_t t : layer)
        for (auto [s, i] : rev[t]) {
          if (done[s]) continue;
          if (pass == 0 && !near[s][i]) continue;
          if (choice[s] < 0) next.push_back(s);
          if (choice[s] < 0 || static_cast<std::int32_t>(i) < choice[s]) choice[s] = static_cast<std::int32_t>(i);
        }
      std::sort(next.begin(), next.end());
      for (std::uint32_t s : next) done[s] = true;
      layer.swap(next);
    }
  }
  return choice;
}

struct ChainSystem {
  std::vector<std::uint32_t> nodes;  // transient nodes reachable under the policy
  std::vector<std::int64_t> slot;    // node -> row, -1 if absent
  bool proper = true;
};

ChainSystem policy_chain(const DecisionGraph& g, const std::vector<std::int32_t>& choice, std::uint32_t start) {
  ChainSystem c;
  c.slot.assign(g.size(), -1);
  if (start == DecisionGraph::goal()) return c;
  std::vector<std::uint32_t> stack{start};
  c.slot[start] = 0;
  c.nodes.push_back(start);
  while (!stack.empty()) {
    std::uint32_t s = stack.back();
    stack.pop_back();
    if (choice[s] < 0) {
      c.proper = false;
      continue;
    }
    for (const auto& t : g.successors(g.options(s)[choice[s]])) {
      if (t.target == DecisionGraph::goal() || c.slot[t.target] >= 0) continue;
      c.slot[t.target] = static_cast<std::int64_t>(c.nodes.size());
      c.nodes.push_back(t.target);
      stack.push_back(t.target);
    }
  }
  if (!c.proper) return c;
  // Every chain node must reach the goal.
  std::vector<std::vector<std::uint32_t>> rev(c.nodes.size());
  std::vector<bool> ok(c.nodes.size(), false);
  std::vector<std::uint32_t> queue;
  for (std::uint32_t i = 0; i < c.nodes.size(); ++i)
    for (const auto& t : g.successors(g.options(c.nodes[i])[choice[c.nodes[i]]])) {
      if (t.target == DecisionGraph::goal()) {
        if (!ok[i]) {
          ok[i] = true;
          queue.push_back(i);
        }
      } else {
        rev[c.slot[t.target]].push_back(i);
      }
    }
  for (std::size_t q = 0; q < queue.size(); ++q)
    for (std::uint32_t p : rev[queue[q]])
      if (!ok[p]) {
        ok[p] = true;
        queue.push_back(p);
      }
  c.proper = queue.size() == c.nodes.size();
  return c;
}

// Solves (I - P) x = rhs on the chain for each column of rhs.
std::vector<std::vector<double>> solve_chain(const DecisionGraph& g, const std::vector<std::int32_t>& choice,
                                             const ChainSystem& c, const std::vector<Weights>& rhs) {
  const std::size_t m = c.nodes.size();
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::MatrixXd b(m, rhs.size());
  for (std::size_t i = 0; i < m; ++i) {
    const auto& o = g.options(c.nodes[i])[choice[c.nodes[i]]];
    trip.emplace_back(i, i, 1.0);
    for (const auto& t : g.successors(o))
      if (t.target != DecisionGraph::goal()) trip.emplace_back(i, c.slot[t.target], -t.prob);
    for (std::size_t k = 0; k < rhs.size(); ++k) b(i, k) = rhs[k].time * o.time + rhs[k].cost * o.cost;
  }
  Eigen::SparseMatrix<double> a(m, m);
  a.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(a);
  std::vector<std::vector<double>> out(rhs.size(), std::vector<double>(m, kInf));
  if (lu.info() != Eigen::Success) return out;
  Eigen::MatrixXd x = lu.solve(b);
  for (std::size_t k = 0; k < rhs.size(); ++k)
    for (std::size_t i = 0; i < m; ++i) out[k][i] = x(i, k);
  return out;
}

// Iterative evaluation for chains too large for a direct solve.
std::vector<std::vector<double>> iterate_chain(const DecisionGraph& g, const std::vector<std::int32_t>& choice,
                                               const ChainSystem& c, const std::vector<Weights>& rhs,
                                               const SolverOptions& options) {
  const std::size_t m = c.nodes.size();
  std::vector<std::vector<double>> out;
  for (const auto& w : rhs) {
    std::vector<double> x(m, 0.0), y(m, 0.0);
    for (std::size_t it = 0; it < options.max_iterations; ++it) {
      double diff = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const auto& o = g.options(c.nodes[i])[choice[c.nodes[i]]];
        double acc = w.time * o.time + w.cost * o.cost;
        for (const auto& t : g.successors(o))
          if (t.target != DecisionGraph::goal()) acc += t.prob * x[c.slot[t.target]];
        y[i] = acc;
        diff = std::max(diff, std::abs(y[i] - x[i]) / std::max(1.0, std::abs(y[i])));
      }
      x.swap(y);
      if (diff <= options.tolerance) break;
    }
    out.push_back(std::move(x));
  }
  return out;
}

// Exact time and cost from the chain start by rational elimination.
std::optional<std::pair<Rational, Rational>> exact_chain(const DecisionGraph& g, const std::vector<std::int32_t>& choice,
                                                         const ChainSystem& c) {
  const std::size_t m = c.nodes.size();
  std::vector<std::map<std::size_t, Rational>> rows(m);
  std::vector<Rational> bt(m), bc(m);
  for (std::size_t i = 0; i < m; ++i) {
    const std::uint32_t s = c.nodes[i];
    const auto& o = g.options(s)[choice[s]];
    rows[i][i] += 1;
    for (const auto& e : g.exact_successors(s, o))
      if (e.target != DecisionGraph::goal()) rows[i][c.slot[e.target]] -= Rational(e.num, e.den);
    bt[i] = Rational(static_cast<std::int64_t>(o.time));
    bc[i] = Rational(static_cast<std::int64_t>(o.cost));
  }
  std::size_t work = 0;
  for (std::size_t k = 0; k < m; ++k) {
    auto pk = rows[k].find(k);
    if (pk == rows[k].end() || pk->second == 0) return std::nullopt;
    const Rational pivot = pk->second;
    for (std::size_t i = k + 1; i < m; ++i) {
      auto f = rows[i].find(k);
      if (f == rows[i].end()) continue;
      const Rational factor = f->second / pivot;
      for (const auto& [col, val] : rows[k]) {
        Rational& cell = rows[i][col];
        cell -= factor * val;
        if (++work > 20'000'000) return std::nullopt;
      }
      bt[i] -= factor * bt[k];
      bc[i] -= factor * bc[k];
      for (auto it = rows[i].begin(); it != rows[i].end();) it = it->second == 0 ? rows[i].erase(it) : std::next(it);
    }
  }
  std::vector<Rational> xt(m), xc(m);
  for (std::size_t k = m; k-- > 0;) {
    Rational st = bt[k], sc = bc[k];
    for (const auto& [col, val] : rows[k])
      if (col > k) {
        st -= val * xt[col];
        sc -= val * xc[col];
      }
    xt[k] = st / rows[k].at(k);
    xc[k] = sc / rows[k].at(k);
  }
  return std::make_pair(xt[0], xc[0]);
}

}  // namespace

std::vector<double> value_iteration(const DecisionGraph& g, const std::vector<bool>& closure, Weights w,
                                    const SolverOptions& options, std::size_t* iterations) {
  return run_value_iteration<true>(g, closure, w, options, iterations);
}

std::vector<double> value_iteration_serial(const DecisionGraph& g, const std::vector<bool>& closure, Weights w,
                                           const SolverOptions& options, std::size_t* iterations) {
  return run_value_iteration<false>(g, closure, w, options, iterations);
}

PolicyValue evaluate_policy(const DecisionGraph& g, const std::vector<std::int32_t>& choice,
                            const SolverOptions& options) {
  PolicyValue pv;
  ChainSystem c = policy_chain(g, choice, g.initial());
  if (!c.proper) {
    pv.expected_time = pv.expected_cost = kInf;
    return pv;
  }
  if (c.nodes.empty()) {
    pv.exact_time = pv.exact_cost = "0";
    return pv;
  }
  const std::vector<Weights> rhs{{1.0, 0.0}, {0.0, 1.0}};
  auto x = c.nodes.size() <= options.polish_limit ? solve_chain(g, choice, c, rhs)
                                                  : iterate_chain(g, choice, c, rhs, options);
  pv.expected_time = x[0][0];
  pv.expected_cost = x[1][0];
  if (c.nodes.size() <= options.exact_limit) {
    if (auto ex = exact_chain(g, choice, c)) {
      pv.exact_time = rational_text(ex->first);
      pv.exact_cost = rational_text(ex->second);
      pv.expected_time = ex->first.convert_to<double>();
      pv.expected_cost = ex->second.convert_to<double>();
    }
  }
  return pv;
}

PolicyStrategy::PolicyStrategy(std::shared_ptr<const DecisionGraph> graph, std::vector<std::int32_t> choice,
                               std::string name)
    : graph_(std::move(graph)), choice_(std::move(choice)), name_(std::move(name)) {}

NodeSet PolicyStrategy::decide(const Amg&, const AttackState& s, const ClockValuation& v) const {
  auto node = graph_->find(s, v);
  if (!node || choice_[*node] < 0) return {};
  const auto& o = graph_->options(*node)[choice_[*node]];
  NodeSet out;
  if (o.attack >= 0) out.set(o.attack);
  return out;
}

OptimizationResult optimize(const Amg& amg, Objective objective, const SolverOptions& options,
                            std::optional<std::int64_t> cost_budget) {
  OptimizationResult res;
  res.objective = objective;
  res.cost_budget = cost_budget;
  auto graph = std::make_shared<DecisionGraph>(DecisionGraph::build(amg, cost_budget, options.max_states));
  const DecisionGraph& g = *graph;
  res.decision_states = g.size();
  const std::vector<bool> closure = reachability_closure(g);
  res.closure_size = static_cast<std::size_t>(std::count(closure.begin(), closure.end(), true));
  res.reachable = closure[g.initial()];
  if (!res.reachable) {
    res.value = kInf;
    res.evaluation.expected_time = res.evaluation.expected_cost = kInf;
    return res;
  }
  const Weights w = objective == Objective::Time ? Weights{1.0, kSecondary} : Weights{kSecondary, 1.0};
  Solver solver(g, closure, w);
  std::vector<double> v = options.parallel ? value_iteration(g, closure, w, options, &res.iterations)
                                           : value_iteration_serial(g, closure, w, options, &res.iterations);
  std::vector<std::int32_t> choice = proper_greedy(solver, v);

  if (res.closure_size <= options.polish_limit) {
    // Policy iteration from the proper greedy policy.
    std::vector<std::uint32_t> nodes;
    for (std::uint32_t s = 1; s < g.size(); ++s)
      if (closure[s]) nodes.push_back(s);
    for (std::size_t round = 0; round < 100; ++round) {
      ChainSystem c;
      c.nodes = nodes;
      c.slot.assign(g.size(), -1);
      for (std::size_t i = 0; i < nodes.size(); ++i) c.slot[nodes[i]] = static_cast<std::int64_t>(i);
      auto x = solve_chain(g, choice, c, {w});
      std::vector<double> val(g.size(), kInf);
      val[DecisionGraph::goal()] = 0.0;
      for (std::size_t i = 0; i < nodes.size(); ++i) val[nodes[i]] = x[0][i];
      bool changed = false;
      for (std::uint32_t s : nodes) {
        auto opts = g.options(s);
        const double current = solver.q(opts[choice[s]], val);
        std::int32_t best = choice[s];
        double best_q = current;
        for (std::size_t i = 0; i < opts.size(); ++i) {
          if (!solver.enabled[solver.index(opts[i])]) continue;
          const double qi = solver.q(opts[i], val);
          if (qi < best_q - 1e-10 * std::max(1.0, std::abs(current))) {
            best_q = qi;
            best = static_cast<std::int32_t>(i);
          }
        }
        if (best != choice[s]) {
          choice[s] = best;
          changed = true;
        }
      }
      ++res.policy_iterations;
      v = std::move(val);
      if (!changed) break;
    }
  }

  res.evaluation = evaluate_policy(g, choice, options);
  res.value = objective == Objective::Time ? res.evaluation.expected_time : res.evaluation.expected_cost;
  res.exact_value = objective == Objective::Time ? res.evaluation.exact_time : res.evaluation.exact_cost;
  std::string name = objective == Objective::Time ? "dp-min-time" : "dp-min-cost";
  if (cost_budget) name += "@" + std::to_string(*cost_budget);
  res.strategy = std::make_shared<PolicyStrategy>(graph, std::move(choice), name);
  return res;
}

OptimizationResult optimize_expected_time(const Amg& amg, const SolverOptions& options) {
  auto r = optimize(amg, Objective::Time, options);
  if (!r.reachable) throw UnreachableGoal("goal is not reachable with probability one; expected time is infinite");
  return r;
}

OptimizationResult optimize_expected_cost(const Amg& amg, const SolverOptions& options) {
  auto r = optimize(amg, Objective::Cost, options);
  if (!r.reachable) throw UnreachableGoal("goal is not reachable with probability one; expected cost is infinite");
  return r;
}

}  // namespace amg
