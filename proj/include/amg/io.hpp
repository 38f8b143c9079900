#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "amg/engine.hpp"
#include "amg/optimizer.hpp"
#include "amg/pareto.hpp"

namespace amg {

// Model files are JSON documents; see docs/model.schema.json.
AmgModel parse_model(std::string_view text);
AmgModel load_model(const std::string& path);
std::string serialize_model(const AmgModel& model);

std::string read_file(const std::string& path);
// Writes to a temporary sibling, then renames over the target.
void write_file_atomic(const std::string& path, std::string_view content);

// Locale-independent shortest round-trip formatting; "inf" for infinity.
std::string format_number(double v);

struct BudgetSpec {
  BudgetConstraint constraint;
  std::vector<std::int64_t> cost_budgets;
  FrontierOptions frontier;
};
BudgetSpec parse_budget_spec(std::string_view text);

// FrontierCsv: config_id,t_d_<each defense>,c_max,expected_time,expected_cost,reach_prob,method
std::string frontier_csv_header(const std::vector<std::string>& defenses);
struct CsvRow {
  std::size_t config_id = 0;
  std::vector<std::int64_t> periods;
  std::optional<std::int64_t> c_max;
  std::optional<ParetoPoint> point;  // empty: unreachable row
  Method method = Method::Exact;
};
std::string frontier_csv_row(const CsvRow& row);
std::string frontier_csv(const Amg& amg, const FrontierReport& report);
std::string sweep_csv(const SweepResult& sweep);
std::string sweep_summary(const SweepResult& sweep);

std::string stats_json(const EvalStats& stats, const std::string& strategy, std::uint64_t seed);
std::string stats_csv(const EvalStats& stats);
std::string trace_text(const Amg& amg, const RunTrace& trace, std::size_t run);
std::string policy_text(const Amg& amg, const PolicyStrategy& policy);

}  // namespace amg
