#include "oracle.hpp"

#include <algorithm>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "amg/validate.hpp"

namespace oracle {

Graph::Graph(const amg::AmgModel& m) : root(m.root) {
  for (const auto& n : m.nodes) {
    nodes.insert(n.id);
    attrs[n.id] = n;
    children[n.id];
    if (n.kind == amg::NodeKind::Attack) {
      attacks.insert(n.id);
    } else {
      subgoals.insert(n.id);
      conjunctive[n.id] = n.refinement == amg::Refinement::And;
    }
  }
  for (const auto& [p, c] : m.edges) children[p].push_back(c);
  undefended = nodes;
  for (const auto& d : m.defenses) {
    defenses.push_back(d.id);
    defense_attrs[d.id] = d;
    Ids& s = defended[d.id];
    for (const auto& n : d.defends) {
      s.insert(n);
      undefended.erase(n);
    }
  }
  std::sort(defenses.begin(), defenses.end());
}

namespace {

bool contains(const Ids& s, const std::string& x) { return s.count(x) != 0; }

Ids minus(Ids a, const Ids& b) {
  for (const auto& x : b) a.erase(x);
  return a;
}

Ids unite(Ids a, const Ids& b) {
  a.insert(b.begin(), b.end());
  return a;
}

Ids intersect(const Ids& a, const Ids& b) {
  Ids r;
  for (const auto& x : a)
    if (contains(b, x)) r.insert(x);
  return r;
}

}  // namespace

// Iterates F until nothing changes.
Ids propagate(const Graph& g, Ids c) {
  for (;;) {
    Ids next = c;
    for (const auto& s : g.subgoals) {
      const auto& ch = g.children.at(s);
      bool done;
      if (g.conjunctive.at(s))
        done = std::all_of(ch.begin(), ch.end(), [&](const auto& x) { return contains(c, x); });
      else
        done = std::any_of(ch.begin(), ch.end(), [&](const auto& x) { return contains(c, x); });
      if (done) next.insert(s);
    }
    if (next == c) return c;
    c = std::move(next);
  }
}

// n qualifies when every root path ending at a parent of n meets C.
Ids completed_descendants(const Graph& g, const Ids& c) {
  std::map<std::string, bool> all_blocked;  // per node: every root path to it (inclusive) meets C
  std::map<std::string, bool> has_path;
  std::function<void(const std::string&, bool)> walk = [&](const std::string& n, bool met) {
    met = met || contains(c, n);
    if (!has_path[n]) {
      has_path[n] = true;
      all_blocked[n] = met;
    } else {
      all_blocked[n] = all_blocked[n] && met;
    }
    for (const auto& ch : g.children.at(n)) walk(ch, met);
  };
  walk(g.root, false);
  Ids out;
  for (const auto& n : g.nodes) {
    if (n == g.root) continue;
    bool ok = true;
    for (const auto& p : g.nodes) {
      const auto& ch = g.children.at(p);
      if (std::find(ch.begin(), ch.end(), n) == ch.end()) continue;
      if (!all_blocked[p]) ok = false;
    }
    if (ok) out.insert(n);
  }
  return out;
}

State prune(const Graph& g, const Ids& a, const Ids& c) {
  Ids cd = completed_descendants(g, intersect(c, g.undefended));
  return {minus(a, unite(cd, c)), minus(c, cd)};
}

State simple_state(const Graph& g, const Ids& a, const Ids& c) { return prune(g, a, propagate(g, c)); }

State apply_defenses(const Graph& g, const State& s, const Ids& defenses) {
  Ids hit;
  for (const auto& d : defenses) hit = unite(hit, g.defended.at(d));
  return simple_state(g, minus(s.activated, hit), minus(s.completed, hit));
}

Ids available(const Graph& g, const State& s) {
  Ids cd = completed_descendants(g, intersect(s.completed, g.undefended));
  return minus(g.attacks, unite(unite(s.activated, s.completed), cd));
}

bool follows(const Graph& g, const std::string& d1, const std::string& d2) {
  const Ids& s1 = g.defended.at(d1);
  const Ids& s2 = g.defended.at(d2);
  for (const auto& n1 : s1)
    for (const auto& n2 : g.children.at(n1))
      if (!contains(s1, n2) && contains(s2, n2)) return true;
  return false;
}

bool is_goal(const Graph& g, const State& s) { return s.activated.empty() && s.completed == Ids{g.root}; }

amg::AmgModel random_model(std::mt19937_64& rng, const RandomSpec& spec) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  static const char* probs[] = {"0", "0.25", "0.5", "0.75", "1", "0.1", "0.9"};
  for (;;) {
    amg::AmgModel m;
    const int n = pick(2, spec.max_nodes);
    std::vector<std::vector<int>> kids(n);
    for (int i = 1; i < n; ++i) {
      int p = pick(0, i - 1);
      kids[p].push_back(i);
      if (i > 1 && pick(0, 3) == 0) {
        int q = pick(0, i - 1);
        if (q != p) kids[q].push_back(i);
      }
    }
    m.root = "n0";
    for (int i = 0; i < n; ++i) {
      amg::NodeSpec s;
      s.id = "n" + std::to_string(i);
      if (!kids[i].empty()) {
        s.kind = amg::NodeKind::Subgoal;
        s.refinement = pick(0, 1) ? amg::Refinement::And : amg::Refinement::Or;
      } else {
        s.kind = amg::NodeKind::Attack;
        s.time = pick(1, spec.max_time);
        s.prob = amg::Probability::parse(probs[pick(0, 6)]);
        s.cost = pick(0, 5);
        s.cost_rate = pick(0, 3);
      }
      m.nodes.push_back(s);
      for (int k : kids[i]) m.edges.emplace_back(s.id, "n" + std::to_string(k));
    }
    const int nd = pick(0, spec.max_defenses);
    for (int d = 0; d < nd; ++d) {
      amg::DefenseSpec ds;
      ds.id = "d" + std::to_string(d);
      ds.period = pick(1, spec.max_time);
      ds.prob = amg::Probability::parse(probs[pick(0, 6)]);
      std::set<int> targets;
      const int k = pick(1, std::min(3, n - 1));
      while (static_cast<int>(targets.size()) < k) targets.insert(pick(1, n - 1));
      for (int t : targets) ds.defends.push_back("n" + std::to_string(t));
      m.defenses.push_back(ds);
    }
    if (amg::validate(m).ok()) return m;
  }
}

State random_state(const Graph& g, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(0.35);
  Ids a, c;
  for (const auto& x : g.attacks)
    if (coin(rng)) a.insert(x);
  for (const auto& x : g.nodes)
    if (coin(rng)) c.insert(x);
  return simple_state(g, a, c);
}

amg::NodeSet to_bits(const amg::Amg& amg, const Ids& ids) {
  amg::NodeSet s;
  for (const auto& x : ids) s.set(amg.node_index(x));
  return s;
}

Ids to_ids(const amg::Amg& amg, const amg::NodeSet& bits) {
  Ids out;
  for (std::size_t i = 0; i < amg.node_count(); ++i)
    if (bits.test(i)) out.insert(amg.node_id(static_cast<amg::NodeIndex>(i)));
  return out;
}

namespace {

struct Config {
  State state;
  std::map<std::string, std::int64_t> attack_clock;   // active attacks only
  std::map<std::string, std::int64_t> defense_clock;  // every defense
  friend auto operator<=>(const Config&, const Config&) = default;
};

struct Event {
  bool is_attack;
  std::string id;
};

struct Step {
  std::int64_t delay = 0;
  std::int64_t cost = 0;
  std::vector<Event> events;  // eligible at the end of the delay
  Config at;                  // after activations and the delay
};

Config initial_config(const Graph& g) {
  Config c;
  for (const auto& d : g.defenses) c.defense_clock[d] = 0;
  return c;
}

// Activations, then the wait until the next deadline.
std::optional<Step> next_step(const Graph& g, const Ids& plan, Config c) {
  Step st;
  for (const auto& a : intersect(available(g, c.state), plan)) {
    c.state.activated.insert(a);
    c.attack_clock[a] = 0;
    st.cost += g.attrs.at(a).cost.value_or(0);
  }
  std::optional<std::int64_t> b;
  for (const auto& [a, x] : c.attack_clock) {
    std::int64_t r = g.attrs.at(a).time.value() - x;
    b = b ? std::min(*b, r) : r;
  }
  for (const auto& [d, x] : c.defense_clock) {
    std::int64_t r = g.defense_attrs.at(d).period - x;
    b = b ? std::min(*b, r) : r;
  }
  if (!b) return std::nullopt;  // nothing ever happens again
  std::int64_t rate = 0;
  for (const auto& a : c.state.activated) rate += g.attrs.at(a).cost_rate.value_or(0);
  st.delay = *b;
  st.cost += *b * rate;
  for (auto& [a, x] : c.attack_clock) x += *b;
  for (auto& [d, x] : c.defense_clock) x += *b;
  for (const auto& [a, x] : c.attack_clock)
    if (x == g.attrs.at(a).time.value()) st.events.push_back({true, a});
  std::vector<std::string> due;
  for (const auto& [d, x] : c.defense_clock)
    if (x == g.defense_attrs.at(d).period) due.push_back(d);
  for (const auto& d1 : due) {
    bool suppressed = false;
    for (const auto& d2 : due)
      if (d1 != d2 && follows(g, d1, d2)) suppressed = true;
    if (!suppressed) st.events.push_back({false, d1});
  }
  st.at = std::move(c);
  return st;
}

Config fire(const Graph& g, Config c, const Event& e, bool success) {
  if (e.is_attack) {
    c.attack_clock.erase(e.id);
    if (success)
      c.state = simple_state(g, c.state.activated, unite(c.state.completed, {e.id}));
    else
      c.state = simple_state(g, minus(c.state.activated, {e.id}), c.state.completed);
  } else {
    c.defense_clock[e.id] = 0;
    if (success) c.state = apply_defenses(g, c.state, {e.id});
  }
  for (auto it = c.attack_clock.begin(); it != c.attack_clock.end();)
    it = contains(c.state.activated, it->first) ? std::next(it) : c.attack_clock.erase(it);
  return c;
}

Rational prob_of(const Graph& g, const Event& e) {
  const amg::Probability& p = e.is_attack ? *g.attrs.at(e.id).prob : g.defense_attrs.at(e.id).prob;
  return Rational(p.num()) / Rational(p.den());
}

}  // namespace

std::optional<ChainValue> plan_value(const Graph& g, const Ids& plan, std::size_t max_states) {
  std::map<Config, std::size_t> index;
  std::vector<Config> configs;
  struct Row {
    Rational time, cost;
    std::vector<std::pair<std::size_t, Rational>> next;
    bool goal = false;
    bool dead = false;
  };
  std::vector<Row> rows;
  auto intern = [&](const Config& c) {
    auto [it, fresh] = index.emplace(c, configs.size());
    if (fresh) {
      configs.push_back(c);
      rows.emplace_back();
    }
    return it->second;
  };
  intern(initial_config(g));
  for (std::size_t i = 0; i < configs.size(); ++i) {
    if (configs.size() > max_states) return std::nullopt;
    const Config c = configs[i];
    if (is_goal(g, c.state)) {
      rows[i].goal = true;
      continue;
    }
    auto st = next_step(g, plan, c);
    if (!st) {
      rows[i].dead = true;
      continue;
    }
    Row row;
    row.time = st->delay;
    row.cost = st->cost;
    const Rational k = static_cast<long>(st->events.size());
    for (const auto& e : st->events) {
      Rational p = prob_of(g, e);
      if (p != 0) row.next.emplace_back(intern(fire(g, st->at, e, true)), p / k);
      if (p != 1) row.next.emplace_back(intern(fire(g, st->at, e, false)), (1 - p) / k);
    }
    rows[i] = std::move(row);
  }
  const std::size_t n = configs.size();

  // States from which the goal is reachable; anything else reachable means P[goal] < 1.
  std::vector<std::vector<std::size_t>> preds(n);
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& [j, p] : rows[i].next) preds[j].push_back(i);
  std::vector<bool> good(n, false);
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < n; ++i)
    if (rows[i].goal) {
      good[i] = true;
      stack.push_back(i);
    }
  while (!stack.empty()) {
    std::size_t j = stack.back();
    stack.pop_back();
    for (std::size_t i : preds[j])
      if (!good[i]) {
        good[i] = true;
        stack.push_back(i);
      }
  }
  ChainValue out;
  if (!std::all_of(good.begin(), good.end(), [](bool b) { return b; })) return out;

  // x_i = r_i + sum_j P_ij x_j on transient states; goal has value 0.
  std::vector<std::size_t> pos(n, n);
  std::vector<std::size_t> transient;
  for (std::size_t i = 0; i < n; ++i)
    if (!rows[i].goal) {
      pos[i] = transient.size();
      transient.push_back(i);
    }
  const std::size_t m = transient.size();
  std::vector<std::vector<Rational>> mat(m, std::vector<Rational>(m + 2));
  for (std::size_t r = 0; r < m; ++r) {
    const Row& row = rows[transient[r]];
    mat[r][r] += 1;
    for (const auto& [j, p] : row.next)
      if (pos[j] != n) mat[r][pos[j]] -= p;
    mat[r][m] = row.time;
    mat[r][m + 1] = row.cost;
  }
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t piv = col;
    while (piv < m && mat[piv][col] == 0) ++piv;
    if (piv == m) throw std::logic_error("singular chain");
    std::swap(mat[piv], mat[col]);
    const Rational inv = 1 / mat[col][col];
    for (auto& v : mat[col]) v *= inv;
    for (std::size_t r = 0; r < m; ++r) {
      if (r == col || mat[r][col] == 0) continue;
      const Rational f = mat[r][col];
      for (std::size_t k = col; k < m + 2; ++k) mat[r][k] -= f * mat[col][k];
    }
  }
  out.reaches = true;
  if (pos[0] != n) {
    out.time = mat[pos[0]][m];
    out.cost = mat[pos[0]][m + 1];
  }
  return out;
}

std::optional<RunOutcome> simulate_plan(const Graph& g, const Ids& plan, std::mt19937_64& rng, std::int64_t horizon) {
  Config c = initial_config(g);
  RunOutcome out;
  while (!is_goal(g, c.state)) {
    auto st = next_step(g, plan, c);
    if (!st || out.time + st->delay > horizon) return std::nullopt;
    out.time += st->delay;
    out.cost += st->cost;
    std::uniform_int_distribution<std::size_t> which(0, st->events.size() - 1);
    const Event e = st->events[which(rng)];
    std::bernoulli_distribution ok(static_cast<double>(prob_of(g, e)));
    c = fire(g, st->at, e, ok(rng));
  }
  return out;
}

std::string rational_text(const Rational& r) {
  std::ostringstream os;
  os << numerator(r);
  if (denominator(r) != 1) os << '/' << denominator(r);
  return os.str();
}

}  // namespace oracle
