#include "amg/validate.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>

namespace amg {

namespace {

constexpr std::int64_t kMaxAttr = 1'000'000'000;

std::string join(const std::vector<std::string>& ids, const char* sep = ", ") {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += sep;
    out += ids[i];
  }
  return out;
}

struct Reporter {
  ValidationReport report;
  void add(std::string code, std::string message, std::vector<std::string> ids = {}) {
    report.violations.push_back({std::move(code), std::move(message), std::move(ids)});
  }
};

bool prob_ok(const Probability& p) { return p.num() >= 0 && p.num() <= p.den(); }

// Returns one cycle (as a closed id path) per strongly connected knot found by DFS.
template <class Adj>
std::vector<std::vector<std::size_t>> find_cycles(std::size_t n, const Adj& adj) {
  std::vector<int> color(n, 0);
  std::vector<std::size_t> parent(n, n);
  std::vector<std::vector<std::size_t>> cycles;
  for (std::size_t s = 0; s < n; ++s) {
    if (color[s]) continue;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{s, 0}};
    color[s] = 1;
    while (!stack.empty()) {
      auto& [v, next] = stack.back();
      if (next < adj[v].size()) {
        std::size_t w = adj[v][next++];
        if (color[w] == 0) {
          color[w] = 1;
          parent[w] = v;
          stack.push_back({w, 0});
        } else if (color[w] == 1) {
          std::vector<std::size_t> cyc{w};
          for (std::size_t u = v; u != w; u = parent[u]) cyc.push_back(u);
          std::reverse(cyc.begin() + 1, cyc.end());
          cyc.push_back(w);
          cycles.push_back(std::move(cyc));
        }
      } else {
        color[v] = 2;
        stack.pop_back();
      }
    }
  }
  return cycles;
}

}  // namespace

std::string ValidationReport::to_string() const {
  std::string out;
  for (const auto& v : violations) out += "  [" + v.code + "] " + v.message + "\n";
  return out;
}

ValidationReport validate(const AmgModel& model) {
  Reporter r;

  if (model.nodes.empty()) r.add("empty", "model has no nodes");
  if (model.nodes.size() > kMaxNodes)
    r.add("too-large", "model has " + std::to_string(model.nodes.size()) + " nodes; at most " +
                           std::to_string(kMaxNodes) + " are supported");
  if (model.defenses.size() > kMaxDefenses)
    r.add("too-large", "model has " + std::to_string(model.defenses.size()) + " defenses; at most " +
                           std::to_string(kMaxDefenses) + " are supported");

  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < model.nodes.size(); ++i) {
    const auto& n = model.nodes[i];
    if (n.id.empty()) r.add("empty-id", "node with empty id");
    if (!index.emplace(n.id, i).second) r.add("duplicate-id", "duplicate node id '" + n.id + "'", {n.id});
  }
  std::set<std::string> defense_ids;
  for (const auto& d : model.defenses) {
    if (d.id.empty()) r.add("empty-id", "defense with empty id");
    if (!defense_ids.insert(d.id).second) r.add("duplicate-id", "duplicate defense id '" + d.id + "'", {d.id});
    if (index.count(d.id)) r.add("id-collision", "id '" + d.id + "' names both a node and a defense", {d.id});
  }

  const std::size_t n = model.nodes.size();
  std::vector<std::vector<std::size_t>> adj(n);
  std::set<std::pair<std::size_t, std::size_t>> edge_set;
  for (const auto& [p, c] : model.edges) {
    auto pi = index.find(p);
    auto ci = index.find(c);
    if (pi == index.end()) r.add("unknown-id", "edge (" + p + ", " + c + ") has unknown parent '" + p + "'", {p});
    if (ci == index.end()) r.add("unknown-id", "edge (" + p + ", " + c + ") has unknown child '" + c + "'", {c});
    if (pi == index.end() || ci == index.end()) continue;
    if (!edge_set.insert({pi->second, ci->second}).second) {
      r.add("duplicate-edge", "duplicate edge (" + p + ", " + c + ")", {p, c});
      continue;
    }
    adj[pi->second].push_back(ci->second);
  }

  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = model.nodes[i];
    const bool inner = !adj[i].empty();
    if (s.kind == NodeKind::Subgoal) {
      if (!inner) r.add("subgoal-leaf", "subgoal '" + s.id + "' has no children", {s.id});
      if (!s.refinement) r.add("missing-refinement", "subgoal '" + s.id + "' has no refinement", {s.id});
      if (s.time || s.prob || s.cost || s.cost_rate)
        r.add("subgoal-attrs", "subgoal '" + s.id + "' carries attack attributes", {s.id});
    } else {
      if (inner) r.add("attack-inner", "attack '" + s.id + "' has children", {s.id});
      if (s.refinement) r.add("attack-refinement", "attack '" + s.id + "' carries a refinement", {s.id});
      if (!s.time || !s.prob || !s.cost || !s.cost_rate) {
        r.add("missing-attrs", "attack '" + s.id + "' must define t, p, c and cp", {s.id});
        continue;
      }
      if (*s.time < 1 || *s.time > kMaxAttr)
        r.add("range", "attack '" + s.id + "' has t=" + std::to_string(*s.time) + " outside [1, 1e9]", {s.id});
      if (!prob_ok(*s.prob)) r.add("range", "attack '" + s.id + "' has p=" + s.prob->text() + " outside [0, 1]", {s.id});
      if (*s.cost < 0 || *s.cost > kMaxAttr)
        r.add("range", "attack '" + s.id + "' has c=" + std::to_string(*s.cost) + " outside [0, 1e9]", {s.id});
      if (*s.cost_rate < 0 || *s.cost_rate > kMaxAttr)
        r.add("range", "attack '" + s.id + "' has cp=" + std::to_string(*s.cost_rate) + " outside [0, 1e9]", {s.id});
    }
  }

  bool acyclic = true;
  for (const auto& cyc : find_cycles(n, adj)) {
    acyclic = false;
    std::vector<std::string> ids;
    for (auto v : cyc) ids.push_back(model.nodes[v].id);
    r.add("cycle", "directed cycle " + join(ids, " -> "), ids);
  }

  auto root_it = index.find(model.root);
  if (model.root.empty() || root_it == index.end()) {
    r.add("root", "root '" + model.root + "' is not a node", {model.root});
  } else {
    const auto& root = model.nodes[root_it->second];
    if (root.kind != NodeKind::Subgoal) r.add("root", "root '" + root.id + "' must be a subgoal", {root.id});
    std::vector<bool> seen(n, false);
    std::vector<std::size_t> stack{root_it->second};
    seen[root_it->second] = true;
    while (!stack.empty()) {
      auto v = stack.back();
      stack.pop_back();
      for (auto w : adj[v])
        if (!seen[w]) {
          seen[w] = true;
          stack.push_back(w);
        }
    }
    std::vector<std::string> orphans;
    for (std::size_t i = 0; i < n; ++i)
      if (!seen[i]) orphans.push_back(model.nodes[i].id);
    if (!orphans.empty()) r.add("unreachable", "nodes not reachable from root: " + join(orphans), orphans);
  }

  bool defenses_ok = true;
  for (const auto& d : model.defenses) {
    if (d.period < 1 || d.period > kMaxAttr) {
      r.add("range", "defense '" + d.id + "' has t=" + std::to_string(d.period) + " outside [1, 1e9]", {d.id});
    }
    if (!prob_ok(d.prob)) r.add("range", "defense '" + d.id + "' has p=" + d.prob.text() + " outside [0, 1]", {d.id});
    if (d.defends.empty()) r.add("empty-defense", "defense '" + d.id + "' defends nothing", {d.id});
    std::set<std::string> seen;
    for (const auto& t : d.defends) {
      if (!index.count(t)) {
        r.add("unknown-id", "defense '" + d.id + "' defends unknown node '" + t + "'", {d.id, t});
        defenses_ok = false;
      } else if (!seen.insert(t).second) {
        r.add("duplicate-id", "defense '" + d.id + "' lists '" + t + "' twice", {d.id, t});
      }
      if (t == model.root) r.add("root-defended", "defense '" + d.id + "' defends the root '" + t + "'", {d.id, t});
    }
  }

  if (acyclic && defenses_ok && !model.defenses.empty()) {
    std::vector<const DefenseSpec*> ds;
    for (const auto& d : model.defenses) ds.push_back(&d);
    std::sort(ds.begin(), ds.end(), [](auto* a, auto* b) { return a->id < b->id; });
    std::vector<std::set<std::size_t>> defended(ds.size());
    for (std::size_t k = 0; k < ds.size(); ++k)
      for (const auto& t : ds[k]->defends) defended[k].insert(index.at(t));
    std::vector<std::vector<std::size_t>> follows(ds.size());
    for (std::size_t d1 = 0; d1 < ds.size(); ++d1)
      for (std::size_t d2 = 0; d2 < ds.size(); ++d2) {
        bool rel = false;
        for (auto n1 : defended[d1]) {
          for (auto n2 : adj[n1])
            if (!defended[d1].count(n2) && defended[d2].count(n2)) rel = true;
          if (rel) break;
        }
        if (rel) follows[d1].push_back(d2);
      }
    for (const auto& cyc : find_cycles(ds.size(), follows)) {
      std::vector<std::string> ids;
      for (auto v : cyc) ids.push_back(ds[v]->id);
      r.add("defense-cycle", "▷ cycle between defenses " + join(ids, " ▷ "), ids);
    }
  }

  return r.report;
}

}  // namespace amg
