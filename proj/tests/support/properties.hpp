#pragma once
// Property checks shared by the unit tests and the acceptance binary.

#include <random>
#include <string>
#include <vector>

#include "amg/model.hpp"

namespace props {

struct Tally {
  std::size_t checks = 0;
  std::vector<std::string> failures;  // first few only
  void expect(bool ok, const std::string& what);
  bool ok() const { return failures.empty(); }
};

// Containment, monotonicity, projection, subtree-subtree, simple-state
// projection and subtree-defense, plus agreement with the reference operators.
void operator_properties(const amg::AmgModel& model, std::mt19937_64& rng, int samples, Tally& tally);

// Simultaneous application of random defense subsets equals sequential
// application in defense_order, and the triangle identity for unrelated pairs.
void defense_chain(const amg::AmgModel& model, std::mt19937_64& rng, int samples, Tally& tally);

}  // namespace props
