#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "amg/state_space.hpp"

namespace amg {

// Subgoals as boxes, attacks as octagons, defenses dashed.
std::string export_amg_dot(const Amg& amg);
// Locations labelled by their (A, C) pair; the goal is a double circle.
std::string export_ptmdp_dot(const Amg& amg, const Ptmdp& ptmdp);

struct UppaalOptions {
  BuildLimits limits;
  std::string template_name = "AMG";
  // Adds a Stratego minimum-expected-time query bounded by this many time units.
  std::optional<std::int64_t> query_horizon;
};

// Uppaal Stratego XML with locations named <A>__<C>__<TYPE>.
std::string export_uppaal(const Amg& amg, const Ptmdp& ptmdp, const UppaalOptions& options = {});
std::string export_uppaal(const Amg& amg, const UppaalOptions& options = {});

}  // namespace amg
