#include "amg/export.hpp"

#include <charconv>
#include <map>
#include <set>
#include <string_view>

namespace amg {

namespace {

std::string dot_quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(std::int64_t v) {
  char buf[24];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string ident(std::string_view id) {
  std::string out;
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
    out += ok ? c : '_';
  }
  return out;
}

std::string joined(const Amg& amg, const NodeSet& s) {
  std::string out;
  for (NodeIndex v : elements(s)) out += (out.empty() ? "" : "_") + ident(amg.node_id(v));
  return out;
}

std::string attrs_label(const Amg& amg, NodeIndex a) {
  const auto& at = amg.attack(a);
  return amg.node_id(a) + "\\nt=" + num(at.time) + " p=" + at.prob.text() + " c=" + num(at.cost) + " c'=" +
         num(at.cost_rate);
}

}  // namespace

std::string export_amg_dot(const Amg& amg) {
  std::string out = "digraph amg {\n  rankdir=TB;\n";
  for (NodeIndex n = 0; n < amg.node_count(); ++n) {
    if (amg.is_attack(n)) {
      out += "  " + dot_quote(amg.node_id(n)) + " [shape=octagon, label=\"" + attrs_label(amg, n) + "\"];\n";
    } else {
      const char* r = amg.refinement(n) == Refinement::And ? "AND" : "OR";
      out += "  " + dot_quote(amg.node_id(n)) + " [shape=box, label=\"" + amg.node_id(n) + "\\n" + r + "\"" +
             (n == amg.root() ? ", peripheries=2" : "") + "];\n";
    }
  }
  for (DefenseIndex d = 0; d < amg.defense_count(); ++d) {
    const auto& def = amg.defense(d);
    out += "  " + dot_quote(def.id) + " [shape=ellipse, style=dashed, label=\"" + def.id + "\\nt=" +
           num(def.period) + " p=" + def.prob.text() + "\"];\n";
  }
  for (NodeIndex n = 0; n < amg.node_count(); ++n)
    for (NodeIndex c : amg.children(n)) out += "  " + dot_quote(amg.node_id(n)) + " -> " + dot_quote(amg.node_id(c)) + ";\n";
  for (DefenseIndex d = 0; d < amg.defense_count(); ++d)
    for (NodeIndex n : elements(amg.defense(d).defended))
      out += "  " + dot_quote(amg.defense(d).id) + " -> " + dot_quote(amg.node_id(n)) + " [style=dashed];\n";
  return out + "}\n";
}

std::string export_ptmdp_dot(const Amg& amg, const Ptmdp& m) {
  std::string out = "digraph ptmdp {\n  rankdir=LR;\n";
  for (std::uint32_t l = 0; l < m.size(); ++l) {
    std::string attrs = "label=" + dot_quote(format_state(amg, m.locations()[l]));
    if (m.goal() && *m.goal() == l) attrs += ", shape=doublecircle";
    if (l == m.initial()) attrs += ", style=bold";
    out += "  L" + num(l) + " [" + attrs + "];\n";
  }
  for (const auto& t : m.transitions()) {
    std::string label = label_name(amg, t.label);
    if (t.cost != 0) label += " / " + num(t.cost);
    out += "  L" + num(t.source) + " -> L" + num(t.target) + " [label=" + dot_quote(label) +
           (t.label.controllable() ? "" : ", style=dashed") + "];\n";
  }
  return out + "}\n";
}

namespace {

struct Loc {
  std::string id;
  std::string name;
  std::string invariant;
  bool urgent = false;
};

struct Edge {
  std::string source, target;
  std::string guard, assignment, probability;
  bool controllable = true;
};

class UppaalWriter {
 public:
  UppaalWriter(const Amg& amg, const Ptmdp& m, const UppaalOptions& o) : amg_(amg), m_(m), o_(o) {}

  std::string run() {
    const std::size_t n = m_.size();
    normal_.resize(n);
    no_act_.resize(n);
    // Location ids in a fixed order: per PTMDP location its NORMAL, cost and NO_ACTIVATION locations.
    for (std::uint32_t l = 0; l < n; ++l) {
      const AttackState& s = m_.locations()[l];
      const std::string prefix = joined(amg_, s.activated) + "__" + joined(amg_, s.completed) + "__";
      normal_[l] = add_location(prefix + "NORMAL", "", !is_goal_loc(l));
      if (is_goal_loc(l)) continue;
      for (const auto& t : m_.transitions_from(l)) {
        if (t.label.kind != ActionKind::Activate) continue;
        const NodeIndex a = t.label.target;
        if (amg_.attack(a).cost == 0) continue;
        cost_loc_[{l, a}] = add_location(prefix + "ACTIVATION_COST_" + ident(amg_.node_id(a)), cost_invariant(a), false);
      }
      no_act_[l] = add_location(prefix + "NO_ACTIVATION", waiting_invariant(l), false);
    }
    for (std::uint32_t l = 0; l < n; ++l) {
      if (is_goal_loc(l)) continue;
      for (const auto& t : m_.transitions_from(l)) {
        if (t.label.kind != ActionKind::Activate) continue;
        const NodeIndex a = t.label.target;
        const std::string reset = "x_" + ident(amg_.node_id(a)) + " = 0";
        auto it = cost_loc_.find({l, a});
        if (it == cost_loc_.end()) {
          edges_.push_back({locs_[normal_[l]].id, locs_[normal_[t.target]].id, "", reset, "", true});
        } else {
          edges_.push_back({locs_[normal_[l]].id, locs_[it->second].id, "", "xcost = 0", "", true});
          edges_.push_back({locs_[it->second].id, locs_[normal_[t.target]].id, "xcost >= 1", reset, "", true});
        }
      }
      edges_.push_back({locs_[normal_[l]].id, locs_[no_act_[l]].id, "", "", "", true});
      environment_edges(l);
    }
    return document();
  }

 private:
  bool is_goal_loc(std::uint32_t l) const { return m_.goal() && *m_.goal() == l; }

  std::size_t add_location(std::string name, std::string invariant, bool urgent) {
    if (!names_.insert(name).second) {
      std::string alt;
      for (int k = 1; !names_.insert(alt = name + "_" + num(k)).second; ++k) {
      }
      name = alt;
    }
    locs_.push_back({"id" + num(static_cast<std::int64_t>(locs_.size())), std::move(name), std::move(invariant), urgent});
    return locs_.size() - 1;
  }

  std::string cost_invariant(NodeIndex a) const {
    std::string inv = "xcost <= 1 && cost' == w_" + ident(amg_.node_id(a));
    for (NodeIndex b : amg_.attack_list()) inv += " && x_" + ident(amg_.node_id(b)) + "' == 0";
    for (DefenseIndex d = 0; d < amg_.defense_count(); ++d) inv += " && x_" + ident(amg_.defense_id(d)) + "' == 0";
    return inv + " && time' == 0";
  }

  std::string waiting_invariant(std::uint32_t l) const {
    std::string inv;
    for (const auto& b : m_.invariant(amg_, l)) {
      const std::string id = ident(b.clock.kind == ClockRef::Kind::Attack ? amg_.node_id(b.clock.index)
                                                                           : amg_.defense_id(b.clock.index));
      inv += (inv.empty() ? "" : " && ") + std::string("x_") + id + " <= t_" + id;
    }
    std::string rate;
    for (NodeIndex a : elements(m_.locations()[l].activated))
      if (amg_.attack(a).cost_rate != 0) rate += (rate.empty() ? "" : " + ") + std::string("cp_") + ident(amg_.node_id(a));
    inv += (inv.empty() ? "" : " && ") + std::string("cost' == ") + (rate.empty() ? "0" : rate);
    return inv;
  }

  void environment_edges(std::uint32_t l) {
    const auto ts = m_.transitions_from(l);
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const auto& t = ts[i];
      if (t.label.kind != ActionKind::CompleteSuccess && t.label.kind != ActionKind::DefenseSuccess) continue;
      // The failure branch follows its success branch.
      const auto& f = ts[i + 1];
      std::string guard, reset;
      Probability p;
      if (t.label.kind == ActionKind::CompleteSuccess) {
        const std::string id = ident(amg_.node_id(t.label.target));
        guard = "x_" + id + " >= t_" + id;
        reset = "x_" + id + " = 0";
        p = amg_.attack(t.label.target).prob;
      } else {
        const DefenseIndex d = t.label.target;
        const std::string id = ident(amg_.defense_id(d));
        guard = "x_" + id + " >= t_" + id;
        for (DefenseIndex d2 = 0; d2 < amg_.defense_count(); ++d2)
          if (amg_.follows(d, d2)) {
            const std::string id2 = ident(amg_.defense_id(d2));
            guard += " && x_" + id2 + " < t_" + id2;
          }
        reset = "x_" + id + " = 0";
        p = amg_.defense(d).prob;
      }
      const std::string bp = "id" + num(static_cast<std::int64_t>(locs_.size() + branchpoints_.size()));
      branchpoints_.push_back(bp);
      edges_.push_back({locs_[no_act_[l]].id, bp, guard, "", "", false});
      if (p.num() != 0)
        edges_.push_back({bp, locs_[normal_[t.target]].id, "", reset, num(p.num()), false});
      if (p.den() - p.num() != 0)
        edges_.push_back({bp, locs_[normal_[f.target]].id, "", reset, num(p.den() - p.num()), false});
    }
  }

  std::string declarations() const {
    std::string d;
    d += "// Generated from an attack-defense model with moving target defenses.\n";
    d += "// Hybrid clocks cannot be incremented, so an activation with cost w_a passes through\n";
    d += "// an ACTIVATION_COST_a location where exactly one time unit elapses with cost' == w_a\n";
    d += "// and every other clock stopped. The native semantics adds w_a instantaneously; both\n";
    d += "// give the same cost and the same value of the clock `time`.\n";
    std::string clocks;
    for (NodeIndex a : amg_.attack_list()) clocks += "x_" + ident(amg_.node_id(a)) + ", ";
    for (DefenseIndex k = 0; k < amg_.defense_count(); ++k) clocks += "x_" + ident(amg_.defense_id(k)) + ", ";
    d += "clock " + clocks + "xcost, time;\n";
    d += "hybrid clock cost;\n";
    for (NodeIndex a : amg_.attack_list()) {
      const std::string id = ident(amg_.node_id(a));
      const auto& at = amg_.attack(a);
      d += "const int t_" + id + " = " + num(at.time) + ";\n";
      d += "const int w_" + id + " = " + num(at.cost) + ";\n";
      d += "const int cp_" + id + " = " + num(at.cost_rate) + ";\n";
    }
    for (DefenseIndex k = 0; k < amg_.defense_count(); ++k)
      d += "const int t_" + ident(amg_.defense_id(k)) + " = " + num(amg_.defense(k).period) + ";\n";
    return d;
  }

  std::string document() const {
    std::string x = "<?xml version=\"1.0\" encoding=\"utf-8\"?>\n";
    x += "<!DOCTYPE nta PUBLIC '-//Uppaal Team//DTD Flat System 1.1//EN' "
         "'http://www.it.uu.se/research/group/darts/uppaal/flat-1_2.dtd'>\n";
    x += "<nta>\n<declaration>" + xml_escape(declarations()) + "</declaration>\n";
    x += "<template>\n<name>" + xml_escape(o_.template_name) + "</name>\n";
    for (const auto& l : locs_) {
      x += "<location id=\"" + l.id + "\">\n<name>" + xml_escape(l.name) + "</name>\n";
      if (!l.invariant.empty()) x += "<label kind=\"invariant\">" + xml_escape(l.invariant) + "</label>\n";
      if (l.urgent) x += "<urgent/>\n";
      x += "</location>\n";
    }
    for (const auto& b : branchpoints_) x += "<branchpoint id=\"" + b + "\"/>\n";
    x += "<init ref=\"" + locs_[normal_[m_.initial()]].id + "\"/>\n";
    for (const auto& e : edges_) {
      x += std::string("<transition") + (e.controllable ? "" : " controllable=\"false\"") + ">\n";
      x += "<source ref=\"" + e.source + "\"/>\n<target ref=\"" + e.target + "\"/>\n";
      if (!e.guard.empty()) x += "<label kind=\"guard\">" + xml_escape(e.guard) + "</label>\n";
      if (!e.assignment.empty()) x += "<label kind=\"assignment\">" + xml_escape(e.assignment) + "</label>\n";
      if (!e.probability.empty()) x += "<label kind=\"probability\">" + e.probability + "</label>\n";
      x += "</transition>\n";
    }
    x += "</template>\n";
    x += "<system>Attacker = " + xml_escape(o_.template_name) + "();\nsystem Attacker;</system>\n";
    if (o_.query_horizon && m_.goal()) {
      x += "<queries>\n<query>\n<formula>" +
           xml_escape("strategy Fastest = minE (time) [<=" + num(*o_.query_horizon) + "] : <> Attacker." +
                      locs_[normal_[*m_.goal()]].name) +
           "</formula>\n<comment>minimum expected attack time</comment>\n</query>\n</queries>\n";
    }
    return x + "</nta>\n";
  }

  const Amg& amg_;
  const Ptmdp& m_;
  const UppaalOptions& o_;
  std::vector<Loc> locs_;
  std::set<std::string> names_;
  std::vector<std::size_t> normal_, no_act_;
  std::map<std::pair<std::uint32_t, NodeIndex>, std::size_t> cost_loc_;
  std::vector<std::string> branchpoints_;
  std::vector<Edge> edges_;
};

}  // namespace

std::string export_uppaal(const Amg& amg, const Ptmdp& ptmdp, const UppaalOptions& options) {
  return UppaalWriter(amg, ptmdp, options).run();
}

std::string export_uppaal(const Amg& amg, const UppaalOptions& options) {
  return export_uppaal(amg, build_ptmdp(amg, options.limits), options);
}

}  // namespace amg
