#include <doctest.h>

#include <algorithm>

#include "amg/operators.hpp"
#include "amg/validate.hpp"
#include "support/fixtures.hpp"

using namespace amg;

namespace {

bool has_code(const ValidationReport& r, const std::string& code) {
  return std::any_of(r.violations.begin(), r.violations.end(), [&](const Violation& v) { return v.code == code; });
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("simple model validates") {
    CHECK(validate(parse_model(fixtures::kSimple)).ok());
  }

  TEST_CASE("edge back to the root is a directed cycle") {
    AmgModel m = parse_model(fixtures::kSimple);
    m.edges.emplace_back("a_0", "g_0");
    ValidationReport r = validate(m);
    REQUIRE(has_code(r, "cycle"));
    CHECK(r.to_string().find("directed cycle") != std::string::npos);
  }

  TEST_CASE("follows cycle is rejected and names both defenses") {
    ValidationReport r = validate(parse_model(fixtures::kFollowsCycle));
    REQUIRE(has_code(r, "defense-cycle"));
    const std::string text = r.to_string();
    CHECK(text.find("▷ cycle") != std::string::npos);
    CHECK(text.find("d1") != std::string::npos);
    CHECK(text.find("d2") != std::string::npos);
    CHECK_THROWS_AS(Amg(parse_model(fixtures::kFollowsCycle)), ValidationError);
  }

  TEST_CASE("structural violations") {
    AmgModel m = parse_model(fixtures::kSimple);
    SUBCASE("defended root") {
      m.defenses[0].defends.push_back("g_0");
      CHECK(has_code(validate(m), "root-defended"));
    }
    SUBCASE("empty defense") {
      m.defenses[0].defends.clear();
      CHECK(has_code(validate(m), "empty-defense"));
    }
    SUBCASE("leaf root") {
      AmgModel leaf;
      leaf.root = "x";
      NodeSpec n;
      n.id = "x";
      n.time = 1;
      n.prob = Probability::parse("1");
      n.cost = 0;
      n.cost_rate = 0;
      leaf.nodes.push_back(n);
      CHECK(has_code(validate(leaf), "root"));
    }
    SUBCASE("unreachable node") {
      NodeSpec n = m.nodes[1];
      n.id = "a_9";
      m.nodes.push_back(n);
      CHECK(has_code(validate(m), "unreachable"));
    }
    SUBCASE("probability above one") {
      m.nodes[1].prob = Probability::parse("1.5");
      CHECK(has_code(validate(m), "range"));
    }
    SUBCASE("zero completion time") {
      m.nodes[1].time = 0;
      CHECK(has_code(validate(m), "range"));
    }
    SUBCASE("unknown defended node") {
      m.defenses[0].defends = {"zz"};
      CHECK(has_code(validate(m), "unknown-id"));
    }
    SUBCASE("subgoal without refinement") {
      m.nodes[0].refinement.reset();
      CHECK(has_code(validate(m), "missing-refinement"));
    }
  }

  TEST_CASE("children") {
    Amg a = fixtures::load(fixtures::kSimple);
    CHECK(children(a, "g_0") == std::vector<std::string>{"a_0", "a_1"});
    CHECK(children(a, "a_0").empty());
    CHECK_THROWS_AS(children(a, "nope"), UnknownIdError);
  }

  TEST_CASE("use-case children of g_ac") {
    Amg a(load_model(fixtures::model_path("use-case.amg.json")));
    auto ch = children(a, "g_ac");
    std::sort(ch.begin(), ch.end());
    CHECK(ch == std::vector<std::string>{"a_bf", "a_ss"});
  }

  TEST_CASE("indices follow sorted ids") {
    Amg a = fixtures::load(fixtures::kSimple);
    CHECK(a.node_id(0) == "a_0");
    CHECK(a.node_id(1) == "a_1");
    CHECK(a.node_id(2) == "g_0");
    CHECK(a.root() == 2);
    CHECK(a.attack_list() == std::vector<NodeIndex>{0, 1});
    CHECK(a.undefended().test(1));
    CHECK_FALSE(a.undefended().test(0));
  }

  TEST_CASE("probabilities are exact") {
    Probability p = Probability::parse("0.25");
    CHECK(p.num() == 1);
    CHECK(p.den() == 4);
    CHECK(p.text() == "0.25");
    CHECK(Probability::parse("1").is_one());
    CHECK(Probability::parse("0").is_zero());
    CHECK(Probability::from_double(0.5) == Probability::ratio(1, 2));
    CHECK(p.complement() == Probability::ratio(3, 4));
    CHECK(Probability::parse("1.5").value() == 1.5);
    CHECK_THROWS(Probability::parse("abc"));
  }
}
