#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "rcbf/safety_filter.hpp"

namespace rcbf {

enum class VerifyDepth { quick, full };

VerifyDepth verify_depth_from_string(const std::string& name);

struct VerifyOptions {
  VerifyDepth depth = VerifyDepth::quick;
  std::uint64_t seed = 1;
  /// The closed form under test. Replaceable so that harnesses can inject a faulty branch.
  std::function<FilterResult(const FilterProblem&)> scalar_filter = filter_scalar;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;   // worst observed value of the checked quantity
  double threshold = 0.0;  // pass bound for `measured` (a lower bound for the rk4 ratio)
  int instances = 0;
  double seconds = 0.0;
  std::string detail;
};

/// Worst-case oracle agreement, closed-form multiplier identity, three-solver agreement with
/// the epigraph relation, u_p/u_n complementarity, theta = 0 reduction and RK4 order.
std::vector<CheckResult> run_verification(const VerifyOptions& opts);

void print_verification(std::ostream& os, const std::vector<CheckResult>& results);

}  // namespace rcbf
