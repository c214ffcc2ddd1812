#pragma once
// The acceptance checklist: every reproduced number and property the
// project commits to, runnable as one suite from tests and from the CLI.

#include <functional>
#include <string>
#include <vector>

#include "hardyrand/npa.hpp"
#include "hardyrand/sdp.hpp"

namespace hardyrand::verify {

struct CheckResult {
  std::string id;      // e.g. "2", "10c"
  std::string name;
  bool pass = false;
  double measured = std::numeric_limits<double>::quiet_NaN();
  double expected = std::numeric_limits<double>::quiet_NaN();
  double tolerance = std::numeric_limits<double>::quiet_NaN();
  std::string detail;
};

struct VerifyOptions {
  sdp::SolveOptions solve;
  uint64_t seed = 20240817;
  int workers = 1;
  int qubit_restarts = 64;
  /// Adds the level-2 hierarchy checks on top of the 1+AB suite.
  bool include_level2 = false;
};

/// Runs every check; the callback (when set) streams results as they
/// complete, in order.
std::vector<CheckResult> run_checks(const VerifyOptions& opts,
                                    const std::function<void(const CheckResult&)>& on_result = {});

std::string format_row(const CheckResult& r);

}  // namespace hardyrand::verify
