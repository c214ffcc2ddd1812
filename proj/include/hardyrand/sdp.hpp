#pragma once
// Self-contained solver for small dense semidefinite programs (and,
// degenerately, linear programs): primal-dual path-following with
// Nesterov-Todd scaling and dense factorizations. Equalities are
// eliminated through a nullspace reparametrization, inequalities become
// 1x1 PSD blocks, and infeasibility is decided by a phase-1 margin
// maximization.

#include <Eigen/Dense>

#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace hardyrand::sdp {

/// Affine scalar function: constant + sum coeffs[i] * x[i].
struct LinearForm {
  double constant = 0.0;
  std::map<int, double> coeffs;

  LinearForm& add(int var, double c) {
    coeffs[var] += c;
    return *this;
  }
  double eval(const Eigen::VectorXd& x) const {
    double v = constant;
    for (const auto& [i, c] : coeffs) v += c * x(i);
    return v;
  }
  static LinearForm variable(int var, double c = 1.0) {
    LinearForm f;
    f.add(var, c);
    return f;
  }
};

/// Symmetric-matrix-valued affine map: constant + sum x[j] * coeff[j].
struct PsdBlock {
  int dim = 0;
  Eigen::MatrixXd constant;
  std::map<int, Eigen::MatrixXd> coeff;

  Eigen::MatrixXd eval(const Eigen::VectorXd& x) const {
    Eigen::MatrixXd m = constant;
    for (const auto& [j, g] : coeff) m += x(j) * g;
    return m;
  }
};

/// maximize objective(x) subject to every psd block being PSD,
/// eqs holding with equality and ineqs as form(x) <= rhs.
struct SdpProblem {
  int n_vars = 0;
  LinearForm objective;
  std::vector<PsdBlock> psd_blocks;
  std::vector<std::pair<LinearForm, double>> eqs;
  std::vector<std::pair<LinearForm, double>> ineqs;
};

enum class Status { Optimal, Infeasible, SolverFailure };
const char* to_string(Status s);

struct SdpSolution {
  Status status = Status::SolverFailure;
  double value = std::numeric_limits<double>::quiet_NaN();
  Eigen::VectorXd x;
  double gap = std::numeric_limits<double>::infinity();
  double residual = std::numeric_limits<double>::infinity();
  int iterations = 0;
};

struct SolveOptions {
  double gap_tol = 1e-7;
  double feas_tol = 1e-8;
  int max_iterations = 200;
};

/// Deterministic solve; throws std::invalid_argument on malformed input
/// (NaN/Inf entries, asymmetric coefficient matrices, no cone at all).
SdpSolution solve(const SdpProblem& p, const SolveOptions& opts = {});

struct FeasibilityResult {
  bool feasible = false;
  /// Phase-1 margin: largest t with every block >= t*I on the equality
  /// slice (capped at 1). Negative values are the infeasibility residual.
  double margin = 0.0;
  Eigen::VectorXd point;
  Status solver_status = Status::SolverFailure;
};
FeasibilityResult feasibility(const SdpProblem& p, const SolveOptions& opts = {});

/// Independent check: max violation of x over all constraints of p,
/// using a fresh eigenvalue decomposition per block.
double max_violation(const SdpProblem& p, const Eigen::VectorXd& x);

/// Text dump, one matrix per line (see README for the format).
std::string dump(const SdpProblem& p);

}  // namespace hardyrand::sdp
