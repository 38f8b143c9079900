#include "amg/model.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <numeric>

#include "amg/validate.hpp"

namespace amg {

namespace {

std::string shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

constexpr std::int64_t kMaxDen = 1'000'000'000'000'000'000;

}  // namespace

Probability Probability::ratio(std::int64_t num, std::int64_t den) {
  if (den <= 0) throw ParseError("probability denominator must be positive");
  std::int64_t g = std::gcd(num < 0 ? -num : num, den);
  if (g == 0) g = 1;
  Probability p;
  p.num_ = num / g;
  p.den_ = den / g;
  p.value_ = static_cast<double>(p.num_) / static_cast<double>(p.den_);
  p.text_ = shortest(p.value_);
  return p;
}

Probability Probability::parse(std::string_view text) {
  std::size_t i = 0;
  bool negative = false;
  if (i < text.size() && (text[i] == '-' || text[i] == '+')) negative = text[i++] == '-';
  std::int64_t mantissa = 0;
  int digits = 0;
  int scale = 0;
  bool any = false;
  bool dot = false;
  for (; i < text.size(); ++i) {
    char ch = text[i];
    if (ch == '.') {
      if (dot) throw ParseError("malformed probability '" + std::string(text) + "'");
      dot = true;
      continue;
    }
    if (ch < '0' || ch > '9') break;
    any = true;
    if (mantissa == 0 && ch == '0') {
      if (dot) ++scale;
      continue;
    }
    if (++digits > 18) throw ParseError("probability has too many digits: '" + std::string(text) + "'");
    mantissa = mantissa * 10 + (ch - '0');
    if (dot) ++scale;
  }
  if (!any) throw ParseError("malformed probability '" + std::string(text) + "'");
  int exponent = 0;
  if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
    ++i;
    auto res = std::from_chars(text.data() + i + (i < text.size() && text[i] == '+' ? 1 : 0),
                               text.data() + text.size(), exponent);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
      throw ParseError("malformed probability '" + std::string(text) + "'");
    i = text.size();
  }
  if (i != text.size()) throw ParseError("malformed probability '" + std::string(text) + "'");
  scale -= exponent;
  std::int64_t den = 1;
  while (scale < 0) {
    if (mantissa > kMaxDen / 10) throw ParseError("probability out of range: '" + std::string(text) + "'");
    mantissa *= 10;
    ++scale;
  }
  for (int k = 0; k < scale; ++k) {
    if (den > kMaxDen / 10) throw ParseError("probability too precise: '" + std::string(text) + "'");
    den *= 10;
  }
  return ratio(negative ? -mantissa : mantissa, den);
}

Probability Probability::from_double(double v) { return parse(shortest(v)); }

Probability Probability::complement() const { return ratio(den_ - num_, den_); }

NodeSpec* AmgModel::find_node(std::string_view id) {
  for (auto& n : nodes)
    if (n.id == id) return &n;
  return nullptr;
}

const NodeSpec* AmgModel::find_node(std::string_view id) const {
  for (const auto& n : nodes)
    if (n.id == id) return &n;
  return nullptr;
}

DefenseSpec* AmgModel::find_defense(std::string_view id) {
  for (auto& d : defenses)
    if (d.id == id) return &d;
  return nullptr;
}

const DefenseSpec* AmgModel::find_defense(std::string_view id) const {
  for (const auto& d : defenses)
    if (d.id == id) return &d;
  return nullptr;
}

Amg::Amg(AmgModel model) : model_(std::move(model)) {
  ValidationReport report = validate(model_);
  if (!report.ok()) throw ValidationError(std::move(report));

  for (const auto& n : model_.nodes) ids_.push_back(n.id);
  std::sort(ids_.begin(), ids_.end());
  const std::size_t n = ids_.size();
  for (NodeIndex i = 0; i < n; ++i) node_lookup_.emplace(ids_[i], i);

  refinement_.assign(n, Refinement::Or);
  attrs_.assign(n, AttackAttrs{});
  children_.assign(n, {});
  parents_.assign(n, {});
  defenses_of_.assign(n, {});
  for (const auto& spec : model_.nodes) {
    NodeIndex i = node_lookup_.at(spec.id);
    if (spec.kind == NodeKind::Subgoal) {
      subgoals_.set(i);
      refinement_[i] = *spec.refinement;
    } else {
      attacks_.set(i);
      attrs_[i] = AttackAttrs{*spec.time, *spec.prob, *spec.cost, *spec.cost_rate};
      max_time_ = std::max(max_time_, *spec.time);
    }
  }
  for (const auto& [p, c] : model_.edges) {
    NodeIndex pi = node_lookup_.at(p);
    NodeIndex ci = node_lookup_.at(c);
    children_[pi].push_back(ci);
    parents_[ci].push_back(pi);
  }
  for (NodeIndex i = 0; i < n; ++i) {
    std::sort(children_[i].begin(), children_[i].end());
    children_[i].erase(std::unique(children_[i].begin(), children_[i].end()), children_[i].end());
    std::sort(parents_[i].begin(), parents_[i].end());
    parents_[i].erase(std::unique(parents_[i].begin(), parents_[i].end()), parents_[i].end());
  }
  root_ = node_lookup_.at(model_.root);
  attack_list_ = elements(attacks_);

  std::vector<bool> seen(n, false);
  std::function<void(NodeIndex)> visit = [&](NodeIndex v) {
    seen[v] = true;
    for (NodeIndex c : children_[v])
      if (!seen[c]) visit(c);
    bottom_up_.push_back(v);
  };
  visit(root_);

  std::vector<const DefenseSpec*> specs;
  for (const auto& d : model_.defenses) specs.push_back(&d);
  std::sort(specs.begin(), specs.end(), [](auto* a, auto* b) { return a->id < b->id; });
  for (DefenseIndex d = 0; d < specs.size(); ++d) {
    DefenseAttrs attrs{specs[d]->id, specs[d]->period, specs[d]->prob, {}};
    for (const auto& id : specs[d]->defends) attrs.defended.set(node_lookup_.at(id));
    max_time_ = std::max(max_time_, attrs.period);
    defense_lookup_.emplace(attrs.id, d);
    defenses_.push_back(std::move(attrs));
  }
  undefended_.set();
  for (DefenseIndex d = 0; d < defenses_.size(); ++d) {
    for (NodeIndex v : elements(defenses_[d].defended)) defenses_of_[v].push_back(d);
    undefended_ &= ~defenses_[d].defended;
  }
  NodeSet all;
  for (NodeIndex i = 0; i < n; ++i) all.set(i);
  undefended_ &= all;

  const std::size_t k = defenses_.size();
  follows_.assign(k * k, false);
  for (DefenseIndex d1 = 0; d1 < k; ++d1)
    for (NodeIndex n1 : elements(defenses_[d1].defended))
      for (NodeIndex n2 : children_[n1]) {
        if (defenses_[d1].defended.test(n2)) continue;
        for (DefenseIndex d2 : defenses_of_[n2]) follows_[d1 * k + d2] = true;
      }
}

std::optional<NodeIndex> Amg::find_node(std::string_view id) const {
  auto it = node_lookup_.find(std::string(id));
  if (it == node_lookup_.end()) return std::nullopt;
  return it->second;
}

NodeIndex Amg::node_index(std::string_view id) const {
  auto n = find_node(id);
  if (!n) throw UnknownIdError(std::string(id));
  return *n;
}

std::optional<DefenseIndex> Amg::find_defense(std::string_view id) const {
  auto it = defense_lookup_.find(std::string(id));
  if (it == defense_lookup_.end()) return std::nullopt;
  return it->second;
}

DefenseIndex Amg::defense_index(std::string_view id) const {
  auto d = find_defense(id);
  if (!d) throw UnknownIdError(std::string(id));
  return *d;
}

std::vector<std::string> Amg::ids(const NodeSet& s) const {
  std::vector<std::string> out;
  for (NodeIndex i : elements(s)) out.push_back(ids_[i]);
  return out;
}

std::vector<NodeIndex> elements(const NodeSet& s) {
  std::vector<NodeIndex> out;
  for (std::size_t i = s._Find_first(); i < kMaxNodes; i = s._Find_next(i)) out.push_back(static_cast<NodeIndex>(i));
  return out;
}

bool set_less(const NodeSet& a, const NodeSet& b) {
  NodeSet diff = a ^ b;
  std::size_t i = diff._Find_first();
  if (i >= kMaxNodes) return false;
  // Both lists agree below i; the list holding i compares smaller unless the other list ends there.
  NodeSet above;
  above.set();
  above <<= (i + 1);
  if (a.test(i)) return (b & above).any();
  return !(a & above).any();
}

}  // namespace amg
