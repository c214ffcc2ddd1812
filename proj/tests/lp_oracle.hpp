#pragma once
// Independent LP oracle for the local-polytope programs: exhaustive
// enumeration of basic solutions over vertex supports and tight-constraint
// subsets. Deliberately ignorant of the production solver; used to freeze
// expected values.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "hardyrand/bell.hpp"

namespace lp_oracle {

struct Program {
  hardyrand::bell::LinearExpr objective;
  std::vector<hardyrand::bell::LinearConstraint> eqs;
  std::vector<hardyrand::bell::LinearConstraint> ineqs;
};

inline double expr_on_weights(const hardyrand::bell::LinearExpr& e,
                              const std::array<double, 16>& w) {
  using namespace hardyrand::bell;
  static const std::vector<DeterministicStrategy> strategies = enumerate_deterministic();
  double v = e.constant;
  for (int i = 0; i < 16; ++i) {
    if (w[i] == 0.0) continue;
    const Behavior b = behavior_of(strategies[i]);
    for (int k = 0; k < kEntries; ++k) v += w[i] * e.coeff[k] * b.p[k];
  }
  return v;
}

/// Max of the program over convex vertex weights, or nullopt if infeasible.
/// Enumerates supports up to 1 + #eqs + #ineqs vertices and every subset of
/// tight inequalities, solving each candidate linear system exactly.
inline std::optional<double> brute_force_max(const Program& prog) {
  using namespace hardyrand::bell;
  using Eigen::MatrixXd;
  using Eigen::VectorXd;

  static const std::vector<DeterministicStrategy> strategies = enumerate_deterministic();
  std::array<std::array<double, 16>, 16> vert_cols{};
  for (int i = 0; i < 16; ++i) {
    const Behavior b = behavior_of(strategies[i]);
    for (int k = 0; k < 16; ++k) vert_cols[i][k] = b.p[k];
  }
  auto coeff_on_vertex = [&](const LinearExpr& e, int i) {
    double v = 0.0;
    for (int k = 0; k < 16; ++k) v += e.coeff[k] * vert_cols[i][k];
    return v;
  };

  const int n_ineq = static_cast<int>(prog.ineqs.size());
  const size_t max_support = 1 + prog.eqs.size() + prog.ineqs.size();
  std::optional<double> best;

  std::vector<int> support;
  auto consider = [&]() {
    const int ns = static_cast<int>(support.size());
    for (int tight_mask = 0; tight_mask < (1 << n_ineq); ++tight_mask) {
      std::vector<const LinearConstraint*> rows;
      for (const auto& c : prog.eqs) rows.push_back(&c);
      for (int t = 0; t < n_ineq; ++t)
        if (tight_mask & (1 << t)) rows.push_back(&prog.ineqs[t]);

      MatrixXd A(1 + rows.size(), ns);
      VectorXd b(1 + rows.size());
      for (int s = 0; s < ns; ++s) A(0, s) = 1.0;
      b(0) = 1.0;
      for (size_t r = 0; r < rows.size(); ++r) {
        for (int s = 0; s < ns; ++s) A(r + 1, s) = coeff_on_vertex(rows[r]->expr, support[s]);
        b(r + 1) = rows[r]->rhs - rows[r]->expr.constant;
      }
      const VectorXd w = A.completeOrthogonalDecomposition().solve(b);
      if ((A * w - b).cwiseAbs().maxCoeff() > 1e-9) continue;  // not solvable exactly

      std::array<double, 16> full{};
      bool nonneg = true;
      for (int s = 0; s < ns; ++s) {
        if (w(s) < -1e-9) nonneg = false;
        full[support[s]] = std::max(w(s), 0.0);
      }
      if (!nonneg) continue;
      bool feasible = true;
      for (const auto& c : prog.eqs)
        if (std::abs(expr_on_weights(c.expr, full) - c.rhs) > 1e-9) feasible = false;
      for (const auto& c : prog.ineqs)
        if (expr_on_weights(c.expr, full) - c.rhs > 1e-9) feasible = false;
      if (!feasible) continue;

      const double value = expr_on_weights(prog.objective, full);
      if (!best || value > *best) best = value;
    }
  };

  std::function<void(int)> rec = [&](int start) {
    if (!support.empty()) consider();
    if (support.size() == max_support) return;
    for (int i = start; i < 16; ++i) {
      support.push_back(i);
      rec(i + 1);
      support.pop_back();
    }
  };
  rec(0);
  return best;
}

}  // namespace lp_oracle
