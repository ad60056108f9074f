#pragma once

#include <functional>
#include <string>
#include <vector>

namespace viscoid {

struct CriterionResult {
  std::string id;
  bool pass = false;
  double measured = 0.0;
  double threshold = 0.0;
  double seconds = 0.0;
  std::string detail;
};

struct AcceptanceOptions {
  // Comma-separated ids (A1..A8) or module names: resolvent, forward,
  // connecting, identify, invariants. Empty runs everything.
  std::string filter;
  // Deliberate defect for checking that the suite notices it: "alpha-sign".
  std::string inject;
  int threads = 1;
};

bool criterion_selected(const std::string& filter, const std::string& id);

/// Runs the selected criteria in order; `progress` sees each result as it lands.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt,
                                            const std::function<void(const CriterionResult&)>& progress = {});

/// "ID status measured threshold"
std::string format_line(const CriterionResult& r);

}  // namespace viscoid
