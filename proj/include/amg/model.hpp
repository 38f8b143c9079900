#pragma once

#include <bitset>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace amg {

inline constexpr std::size_t kMaxNodes = 128;
inline constexpr std::size_t kMaxDefenses = 64;

using NodeIndex = std::uint32_t;
using DefenseIndex = std::uint32_t;
using NodeSet = std::bitset<kMaxNodes>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::size_t line = 0, std::size_t column = 0)
      : Error(msg), line_(line), column_(column) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class UnknownIdError : public Error {
 public:
  explicit UnknownIdError(const std::string& id) : Error("unknown id '" + id + "'"), id_(id) {}
  const std::string& id() const { return id_; }

 private:
  std::string id_;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class ExplorationLimitExceeded : public Error {
 public:
  ExplorationLimitExceeded(std::size_t explored, std::size_t frontier, std::size_t cap)
      : Error("exploration limit of " + std::to_string(cap) + " states exceeded (" +
              std::to_string(explored) + " explored, frontier " + std::to_string(frontier) + ")"),
        explored_(explored),
        frontier_(frontier) {}
  std::size_t explored() const { return explored_; }
  std::size_t frontier() const { return frontier_; }

 private:
  std::size_t explored_;
  std::size_t frontier_;
};

class UnreachableGoal : public Error {
 public:
  using Error::Error;
};

// Exact probability. The decimal text is kept so files round-trip unchanged.
class Probability {
 public:
  Probability() = default;
  static Probability parse(std::string_view text);
  static Probability from_double(double v);
  static Probability ratio(std::int64_t num, std::int64_t den);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  double value() const { return value_; }
  const std::string& text() const { return text_; }
  bool is_zero() const { return num_ == 0; }
  bool is_one() const { return num_ == den_; }
  Probability complement() const;

  friend bool operator==(const Probability& a, const Probability& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
  double value_ = 0.0;
  std::string text_ = "0";
};

enum class NodeKind { Subgoal, Attack };
enum class Refinement { And, Or };

struct NodeSpec {
  std::string id;
  NodeKind kind = NodeKind::Attack;
  std::optional<Refinement> refinement;
  std::optional<std::int64_t> time;
  std::optional<Probability> prob;
  std::optional<std::int64_t> cost;
  std::optional<std::int64_t> cost_rate;
};

struct DefenseSpec {
  std::string id;
  std::int64_t period = 1;
  Probability prob;
  std::vector<std::string> defends;
};

// Raw model as read from a file; may be invalid.
struct AmgModel {
  std::vector<NodeSpec> nodes;
  std::vector<std::pair<std::string, std::string>> edges;
  std::string root;
  std::vector<DefenseSpec> defenses;

  NodeSpec* find_node(std::string_view id);
  const NodeSpec* find_node(std::string_view id) const;
  DefenseSpec* find_defense(std::string_view id);
  const DefenseSpec* find_defense(std::string_view id) const;
};

struct AttackAttrs {
  std::int64_t time = 1;
  Probability prob;
  std::int64_t cost = 0;
  std::int64_t cost_rate = 0;
};

struct DefenseAttrs {
  std::string id;
  std::int64_t period = 1;
  Probability prob;
  NodeSet defended;
};

// Validated, indexed view of a model. Node and defense indices follow
// lexicographic id order, so bit order equals sorted-id order.
class Amg {
 public:
  explicit Amg(AmgModel model);

  const AmgModel& model() const { return model_; }

  std::size_t node_count() const { return ids_.size(); }
  std::size_t defense_count() const { return defenses_.size(); }

  const std::string& node_id(NodeIndex n) const { return ids_[n]; }
  std::optional<NodeIndex> find_node(std::string_view id) const;
  NodeIndex node_index(std::string_view id) const;

  const std::string& defense_id(DefenseIndex d) const { return defenses_[d].id; }
  std::optional<DefenseIndex> find_defense(std::string_view id) const;
  DefenseIndex defense_index(std::string_view id) const;

  NodeIndex root() const { return root_; }
  bool is_attack(NodeIndex n) const { return attacks_.test(n); }
  const NodeSet& attacks() const { return attacks_; }
  const NodeSet& subgoals() const { return subgoals_; }
  const NodeSet& undefended() const { return undefended_; }
  const std::vector<NodeIndex>& attack_list() const { return attack_list_; }

  Refinement refinement(NodeIndex g) const { return refinement_[g]; }
  const AttackAttrs& attack(NodeIndex a) const { return attrs_[a]; }
  const std::vector<NodeIndex>& children(NodeIndex n) const { return children_[n]; }
  const std::vector<NodeIndex>& parents(NodeIndex n) const { return parents_[n]; }
  // Children before parents.
  const std::vector<NodeIndex>& bottom_up() const { return bottom_up_; }

  const DefenseAttrs& defense(DefenseIndex d) const { return defenses_[d]; }
  // Defenses whose defended set contains n.
  const std::vector<DefenseIndex>& defenses_of(NodeIndex n) const { return defenses_of_[n]; }
  // d1 follows-relation: follows(d1, d2) iff d1 ▷ d2.
  bool follows(DefenseIndex d1, DefenseIndex d2) const { return follows_[d1 * defenses_.size() + d2]; }

  std::int64_t max_time() const { return max_time_; }

  std::vector<std::string> ids(const NodeSet& s) const;

 private:
  AmgModel model_;
  std::vector<std::string> ids_;
  std::unordered_map<std::string, NodeIndex> node_lookup_;
  std::unordered_map<std::string, DefenseIndex> defense_lookup_;
  NodeIndex root_ = 0;
  NodeSet attacks_;
  NodeSet subgoals_;
  NodeSet undefended_;
  std::vector<NodeIndex> attack_list_;
  std::vector<Refinement> refinement_;
  std::vector<AttackAttrs> attrs_;
  std::vector<std::vector<NodeIndex>> children_;
  std::vector<std::vector<NodeIndex>> parents_;
  std::vector<NodeIndex> bottom_up_;
  std::vector<DefenseAttrs> defenses_;
  std::vector<std::vector<DefenseIndex>> defenses_of_;
  std::vector<bool> follows_;
  std::int64_t max_time_ = 1;
};

// Elements of s in increasing index order.
std::vector<NodeIndex> elements(const NodeSet& s);
inline bool subset_of(const NodeSet& a, const NodeSet& b) { return (a & ~b).none(); }
// Lexicographic order on sorted element lists.
bool set_less(const NodeSet& a, const NodeSet& b);

}  // namespace amg
