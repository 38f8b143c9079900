#include <doctest.h>

#include <regex>

#include "amg/export.hpp"
#include "support/fixtures.hpp"

using namespace amg;

namespace {

std::size_t count(const std::string& s, const std::string& what) {
  std::size_t n = 0;
  for (std::size_t p = s.find(what); p != std::string::npos; p = s.find(what, p + 1)) ++n;
  return n;
}

std::size_t count_lines(const std::string& s, const std::regex& re) {
  std::size_t n = 0;
  std::size_t start = 0;
  while (start < s.size()) {
    std::size_t end = s.find('\n', start);
    if (end == std::string::npos) end = s.size();
    if (std::regex_search(s.substr(start, end - start), re)) ++n;
    start = end + 1;
  }
  return n;
}

}  // namespace

TEST_SUITE("export") {
  TEST_CASE("simple model matches the golden Uppaal file") {
    Amg a(load_model(fixtures::model_path("simple.amg.json")));
    const std::string xml = export_uppaal(a);
    CHECK(xml == read_file(std::string(AMG_GOLDEN_DIR) + "/simple.uppaal.xml"));
  }

  TEST_CASE("location naming") {
    Amg a = fixtures::load(fixtures::kSimple);
    const std::string xml = export_uppaal(a);
    for (const char* name : {"<name>____NORMAL</name>", "<name>____ACTIVATION_COST_a_0</name>",
                             "<name>a_1____NORMAL</name>", "<name>__g_0__NORMAL</name>",
                             "<name>____NO_ACTIVATION</name>"})
      CHECK(count(xml, name) == 1);
    CHECK(count(xml, "<location id=") == 11);
    CHECK(count(xml, "<branchpoint id=") == 8);
    CHECK(count(xml, "<transition") == count(xml, "</transition>"));
    CHECK(count(xml, "<init ref=\"id0\"/>") == 1);
  }

  TEST_CASE("zero-cost model has no cost locations") {
    Amg a = fixtures::load(fixtures::single_attack(5, "1", 0, 0));
    const std::string xml = export_uppaal(a);
    CHECK(count(xml, "__ACTIVATION_COST") == 0);
    CHECK(count(xml, "cost' == 0") == 2);
    CHECK(count(xml, "<location id=") == 5);
  }

  TEST_CASE("follows relation adds a clock constraint to the preceded defense") {
    Amg a = fixtures::load(fixtures::kFollows);
    const std::string xml = export_uppaal(a);
    CHECK(count(xml, "x_d1 &gt;= t_d1 &amp;&amp; x_d2 &lt; t_d2") > 0);
    CHECK(count(xml, "x_d2 &gt;= t_d2 &amp;&amp;") == 0);
    CHECK(count(xml, "x_d1 &gt;= t_d1</label>") == 0);
  }

  TEST_CASE("optional query") {
    Amg a = fixtures::load(fixtures::kSimple);
    UppaalOptions o;
    o.query_horizon = 500;
    const std::string xml = export_uppaal(a, o);
    CHECK(count(xml, "strategy Fastest = minE (time) [&lt;=500] : &lt;&gt; Attacker.__g_0__NORMAL") == 1);
    CHECK(count(export_uppaal(a), "<queries>") == 0);
  }

  TEST_CASE("model graph in DOT") {
    Amg a = fixtures::load(fixtures::kSimple);
    const std::string dot = export_amg_dot(a);
    CHECK(count_lines(dot, std::regex(R"(\[shape=)")) == 4);
    CHECK(count_lines(dot, std::regex(R"(->.*;$)")) == 3);
    CHECK(count_lines(dot, std::regex(R"(-> .*style=dashed)")) == 1);
    CHECK(count(dot, "peripheries=2") == 1);
    CHECK(count(dot, "shape=octagon") == 2);
  }

  TEST_CASE("state space in DOT") {
    Amg a = fixtures::load(fixtures::kSimple);
    Ptmdp p = build_ptmdp(a);
    const std::string dot = export_ptmdp_dot(a, p);
    CHECK(count(dot, "shape=doublecircle") == 1);
    CHECK(count(dot, "style=bold") == 1);
    CHECK(count_lines(dot, std::regex(R"(^  L\d+ -> L\d+)")) == p.transitions().size());
  }
}
