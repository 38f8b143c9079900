#pragma once

#include <string>

#include "amg/io.hpp"
#include "amg/model.hpp"
#include "amg/validate.hpp"

namespace fixtures {

inline const std::string kSimple = R"({
  "root": "g_0",
  "nodes": [
    {"id": "g_0", "kind": "subgoal", "refinement": "or"},
    {"id": "a_0", "kind": "attack", "t": 20, "p": 1, "c": 10, "cp": 0},
    {"id": "a_1", "kind": "attack", "t": 10, "p": 0.5, "c": 0, "cp": 2}
  ],
  "edges": [["g_0", "a_0"], ["g_0", "a_1"]],
  "defenses": [{"id": "d_0", "t": 10, "p": 1, "defends": ["a_0"]}]
})";

// g_0 with a_0 only; d_0 (period 10) always resets a_0 (t = 20).
inline const std::string kSimpleA0Only = R"({
  "root": "g_0",
  "nodes": [
    {"id": "g_0", "kind": "subgoal", "refinement": "or"},
    {"id": "a_0", "kind": "attack", "t": 20, "p": 1, "c": 10, "cp": 0}
  ],
  "edges": [["g_0", "a_0"]],
  "defenses": [{"id": "d_0", "t": 10, "p": 1, "defends": ["a_0"]}]
})";

inline std::string single_attack(int t, const std::string& p, int c, int cp) {
  return R"({"root": "g0", "nodes": [{"id": "g0", "kind": "subgoal", "refinement": "or"},
    {"id": "a", "kind": "attack", "t": )" +
         std::to_string(t) + R"(, "p": )" + p + R"(, "c": )" + std::to_string(c) + R"(, "cp": )" +
         std::to_string(cp) + R"(}], "edges": [["g0", "a"]]})";
}

inline const std::string kConjunction = R"({
  "root": "g0",
  "nodes": [
    {"id": "g0", "kind": "subgoal", "refinement": "and"},
    {"id": "a0", "kind": "attack", "t": 3, "p": 1, "c": 1, "cp": 1},
    {"id": "a1", "kind": "attack", "t": 5, "p": 1, "c": 1, "cp": 1}
  ],
  "edges": [["g0", "a0"], ["g0", "a1"]]
})";

// g0 = g ∧ a3, g = a1 ∧ a2; d defends `defended` (a JSON array).
inline std::string expressivity(const std::string& defended) {
  return R"({"root": "g0", "nodes": [
    {"id": "g0", "kind": "subgoal", "refinement": "and"},
    {"id": "g", "kind": "subgoal", "refinement": "and"},
    {"id": "a1", "kind": "attack", "t": 4, "p": 1, "c": 0, "cp": 1},
    {"id": "a2", "kind": "attack", "t": 6, "p": 1, "c": 0, "cp": 1},
    {"id": "a3", "kind": "attack", "t": 2, "p": 1, "c": 0, "cp": 1}],
    "edges": [["g0", "g"], ["g0", "a3"], ["g", "a1"], ["g", "a2"]],
    "defenses": [{"id": "d", "t": 5, "p": 1, "defends": )" +
         defended + "}]}";
}

// d1 defends g (a child of the root), d2 defends a1 (a child of g): d1 ▷ d2.
inline const std::string kFollows = R"({
  "root": "g0",
  "nodes": [
    {"id": "g0", "kind": "subgoal", "refinement": "or"},
    {"id": "g", "kind": "subgoal", "refinement": "and"},
    {"id": "a1", "kind": "attack", "t": 7, "p": 1, "c": 0, "cp": 1},
    {"id": "a2", "kind": "attack", "t": 3, "p": 1, "c": 0, "cp": 1}
  ],
  "edges": [["g0", "g"], ["g", "a1"], ["g", "a2"]],
  "defenses": [
    {"id": "d1", "t": 10, "p": 1, "defends": ["g"]},
    {"id": "d2", "t": 10, "p": 1, "defends": ["a1"]}
  ]
})";

// Adds the symmetric pair so that d1 ▷ d2 ▷ d1.
inline const std::string kFollowsCycle = R"({
  "root": "g0",
  "nodes": [
    {"id": "g0", "kind": "subgoal", "refinement": "or"},
    {"id": "g", "kind": "subgoal", "refinement": "and"},
    {"id": "h", "kind": "subgoal", "refinement": "and"},
    {"id": "a1", "kind": "attack", "t": 7, "p": 1, "c": 0, "cp": 1},
    {"id": "a2", "kind": "attack", "t": 3, "p": 1, "c": 0, "cp": 1}
  ],
  "edges": [["g0", "g"], ["g0", "h"], ["g", "a1"], ["h", "a2"]],
  "defenses": [
    {"id": "d1", "t": 10, "p": 1, "defends": ["g", "a2"]},
    {"id": "d2", "t": 10, "p": 1, "defends": ["a1", "h"]}
  ]
})";

// Three attacks under an ∧ root with equal completion times.
inline const std::string kThreeWay = R"({
  "root": "g0",
  "nodes": [
    {"id": "g0", "kind": "subgoal", "refinement": "and"},
    {"id": "a", "kind": "attack", "t": 4, "p": 1, "c": 0, "cp": 0},
    {"id": "b", "kind": "attack", "t": 4, "p": 1, "c": 0, "cp": 0},
    {"id": "c", "kind": "attack", "t": 4, "p": 1, "c": 0, "cp": 0}
  ],
  "edges": [["g0", "a"], ["g0", "b"], ["g0", "c"]]
})";

inline amg::Amg load(const std::string& json) { return amg::Amg(amg::parse_model(json)); }

#ifdef AMG_MODELS_DIR
inline std::string model_path(const std::string& name) { return std::string(AMG_MODELS_DIR) + "/" + name; }
#endif

}  // namespace fixtures
