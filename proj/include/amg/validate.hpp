#pragma once

#include <string>
#include <vector>

#include "amg/model.hpp"

namespace amg {

struct Violation {
  std::string code;     // short machine tag, e.g. "cycle", "defense-cycle"
  std::string message;  // human readable, names the offending ids
  std::vector<std::string> ids;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  std::string to_string() const;
};

ValidationReport validate(const AmgModel& model);

class ValidationError : public Error {
 public:
  explicit ValidationError(ValidationReport report)
      : Error("invalid model:\n" + report.to_string()), report_(std::move(report)) {}
  const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

}  // namespace amg
