#pragma once
// Exact classical baselines: optimize linear objectives over the local
// polytope, posed as an LP over convex weights on the 16 deterministic
// vertices and solved by the same interior-point core as the SDPs, with
// a final vertex-polish step.

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "hardyrand/bell.hpp"
#include "hardyrand/sdp.hpp"

namespace hardyrand::lhv {

/// Convex mixture of the 16 deterministic strategies, in enumeration order.
struct LocalModel {
  std::array<double, 16> weights{};
  bell::Behavior behavior() const;
};

struct LhvResult {
  sdp::Status status = sdp::Status::SolverFailure;
  double value = std::numeric_limits<double>::quiet_NaN();
  LocalModel model;
  /// Largest violation of the input constraints by the returned model,
  /// re-evaluated independently of the solver.
  double constraint_violation = std::numeric_limits<double>::infinity();
};

/// Maximize objective over local models subject to eqs (expr == rhs) and
/// ineqs (expr <= rhs) on the induced behavior.
LhvResult lhv_optimize(const bell::LinearExpr& objective,
                       const std::vector<bell::LinearConstraint>& eqs,
                       const std::vector<bell::LinearConstraint>& ineqs,
                       const sdp::SolveOptions& opts = {});

/// One constraint set per grid parameter.
struct LhvTask {
  bell::LinearExpr objective;
  std::vector<bell::LinearConstraint> eqs;
  std::vector<bell::LinearConstraint> ineqs;
};
using TaskFamily = std::function<LhvTask(double)>;

struct LhvSweepPoint {
  double parameter = 0.0;
  LhvResult result;
};

/// Per-point lhv_optimize over the grid; failures are recorded in the
/// per-point status without aborting the sweep.
std::vector<LhvSweepPoint> lhv_sweep(const TaskFamily& family, const std::vector<double>& grid,
                                     const sdp::SolveOptions& opts = {});

}  // namespace hardyrand::lhv
