#pragma once
// Two-qubit strategies: a pure state plus one projective measurement per
// (party, setting), and a derivative-free multi-start search that
// maximizes linear figures of merit under linear behavior constraints.
// Serves as the achievability lower bound against the relaxation.

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "hardyrand/bell.hpp"
#include "hardyrand/npa.hpp"

namespace hardyrand::qubit {

/// Measurement direction on the Bloch sphere; defines the '+' projector.
struct BlochDirection {
  double theta = 0.0;  // polar, [0, pi]
  double phi = 0.0;    // azimuth, [0, 2pi)
};

struct QubitStrategy {
  Eigen::Vector4cd state;  // unit norm, basis |00>,|01>,|10>,|11>
  /// Index party*2 + setting: a0, a1, b0, b1.
  std::array<BlochDirection, 4> meas{};
};

/// Born-rule table; throws std::invalid_argument if the state is not
/// normalized to 1e-12.
bell::Behavior behavior_of(const QubitStrategy& s);

/// Re <psi| P_w1 P_w2 ... |psi> for a word over the '+' projectors; feeds
/// the moment-matrix soundness checks.
double moment_value(const QubitStrategy& s, const npa::Monomial& m);

struct NoFeasiblePoint : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OptimizeOptions {
  int restarts = 64;
  uint64_t seed = 1;
  /// Residual below which a restart counts as constraint-feasible.
  double feasible_tol = 1e-6;
  int workers = 1;
};

struct OptimizeResult {
  double value = 0.0;  // objective re-evaluated on the exact behavior
  QubitStrategy strategy;
  double constraint_residual = 0.0;
  int restart_index = -1;
};

/// Multi-start Nelder-Mead with a ramped quadratic penalty on constraint
/// violations. Deterministic for a fixed seed (restarts merged by index).
/// Throws NoFeasiblePoint when no restart meets feasible_tol.
OptimizeResult optimize(const bell::LinearExpr& objective,
                        const std::vector<bell::LinearConstraint>& eqs,
                        const std::vector<bell::LinearConstraint>& ineqs,
                        const OptimizeOptions& opts = {});

}  // namespace hardyrand::qubit
