#include <doctest.h>

#include <sstream>

#include "amg/operators.hpp"
#include "amg/validate.hpp"
#include "support/oracle.hpp"
#include "support/properties.hpp"

namespace {

std::string report(const props::Tally& t) {
  std::ostringstream os;
  for (const auto& f : t.failures) os << f << "\n";
  return os.str();
}

}  // namespace

TEST_SUITE("properties") {
  TEST_CASE("random models are valid and within bounds") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 200; ++i) {
      amg::AmgModel m = oracle::random_model(rng);
      CHECK(amg::validate(m).ok());
      CHECK(m.nodes.size() <= 12);
      CHECK(m.defenses.size() <= 4);
    }
  }

  TEST_CASE("operator properties on random models") {
    std::mt19937_64 rng(11);
    props::Tally t;
    for (int i = 0; i < 150; ++i) props::operator_properties(oracle::random_model(rng), rng, 20, t);
    INFO(report(t));
    CHECK(t.ok());
    CHECK(t.checks > 0);
  }

  TEST_CASE("defense chain on random models") {
    std::mt19937_64 rng(13);
    props::Tally t;
    for (int i = 0; i < 150; ++i) props::defense_chain(oracle::random_model(rng), rng, 20, t);
    INFO(report(t));
    CHECK(t.ok());
  }

  TEST_CASE("all orders of a cascade give the same state") {
    // Every permutation consistent with the follows relation is a valid chain.
    std::mt19937_64 rng(17);
    int compared = 0;
    for (int i = 0; i < 100; ++i) {
      amg::Amg a(oracle::random_model(rng));
      if (a.defense_count() < 2) continue;
      oracle::Graph g(a.model());
      std::vector<amg::DefenseIndex> ds(a.defense_count());
      for (std::size_t k = 0; k < ds.size(); ++k) ds[k] = static_cast<amg::DefenseIndex>(k);
      const oracle::State os = oracle::random_state(g, rng);
      const amg::AttackState s{oracle::to_bits(a, os.activated), oracle::to_bits(a, os.completed)};
      const amg::AttackState together = amg::apply_defenses(a, s, ds);
      std::sort(ds.begin(), ds.end());
      do {
        bool valid = true;
        for (std::size_t x = 0; x < ds.size(); ++x)
          for (std::size_t y = 0; y < x; ++y)
            if (a.follows(ds[y], ds[x])) valid = false;
        if (!valid) continue;
        amg::AttackState seq = s;
        for (auto d : ds) seq = amg::apply_defense(a, seq, d);
        CHECK(seq == together);
        ++compared;
      } while (std::next_permutation(ds.begin(), ds.end()));
    }
    CHECK(compared > 0);
  }
}
