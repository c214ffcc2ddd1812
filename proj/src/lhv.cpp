#include "hardyrand/lhv.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace hardyrand::lhv {

namespace {

const std::array<bell::Behavior, 16>& vertex_behaviors() {
  static const std::array<bell::Behavior, 16> verts = [] {
    std::array<bell::Behavior, 16> out;
    const auto strategies = bell::enumerate_deterministic();
    for (int i = 0; i < 16; ++i) out[i] = bell::behavior_of(strategies[i]);
    return out;
  }();
  return verts;
}

// Value of an affine behavior expression on vertex i, constant excluded.
double vertex_coeff(const bell::LinearExpr& e, int i) {
  double v = 0.0;
  for (int k = 0; k < bell::kEntries; ++k) v += e.coeff[k] * vertex_behaviors()[i].p[k];
  return v;
}

sdp::LinearForm to_weight_form(const bell::LinearExpr& e) {
  sdp::LinearForm f;
  f.constant = e.constant;
  for (int i = 0; i < 16; ++i) {
    const double c = vertex_coeff(e, i);
    if (c != 0.0) f.add(i, c);
  }
  return f;
}

double eval_expr_on_weights(const bell::LinearExpr& e, const std::array<double, 16>& w) {
  double v = e.constant;
  for (int i = 0; i < 16; ++i) v += w[i] * vertex_coeff(e, i);
  return v;
}

double violation_of(const std::array<double, 16>& w,
                    const std::vector<bell::LinearConstraint>& eqs,
                    const std::vector<bell::LinearConstraint>& ineqs) {
  double worst = 0.0;
  double sum = 0.0;
  for (double wi : w) {
    worst = std::max(worst, -wi);
    sum += wi;
  }
  worst = std::max(worst, std::abs(sum - 1.0));
  for (const auto& c : eqs) worst = std::max(worst, std::abs(eval_expr_on_weights(c.expr, w) - c.rhs));
  for (const auto& c : ineqs) worst = std::max(worst, eval_expr_on_weights(c.expr, w) - c.rhs);
  return worst;
}

// Support detection plus an exact solve on the active set. The interior
// point lands in the relative interior of the optimal face; re-solving the
// active equalities there recovers near-rational optima.
void polish(const bell::LinearExpr& objective, const std::vector<bell::LinearConstraint>& eqs,
            const std::vector<bell::LinearConstraint>& ineqs, LhvResult& res) {
  using Eigen::MatrixXd;
  using Eigen::VectorXd;

  std::vector<int> support;
  for (int i = 0; i < 16; ++i)
    if (res.model.weights[i] > 1e-6) support.push_back(i);
  if (support.empty()) return;

  const int ns = static_cast<int>(support.size());
  std::vector<VectorXd> lhs_rows;
  std::vector<double> rhs_vals;
  {
    VectorXd r = VectorXd::Ones(ns);
    lhs_rows.push_back(r);
    rhs_vals.push_back(1.0);
  }
  auto push_constraint = [&](const bell::LinearConstraint& c) {
    VectorXd r(ns);
    for (int s = 0; s < ns; ++s) r(s) = vertex_coeff(c.expr, support[s]);
    lhs_rows.push_back(r);
    rhs_vals.push_back(c.rhs - c.expr.constant);
  };
  for (const auto& c : eqs) push_constraint(c);
  for (const auto& c : ineqs) {
    const double slack = c.rhs - eval_expr_on_weights(c.expr, res.model.weights);
    if (slack < 1e-6) push_constraint(c);  // active at the solution
  }

  MatrixXd A(lhs_rows.size(), ns);
  VectorXd b(lhs_rows.size());
  for (size_t i = 0; i < lhs_rows.size(); ++i) {
    A.row(i) = lhs_rows[i].transpose();
    b(i) = rhs_vals[i];
  }
  const VectorXd ws = A.completeOrthogonalDecomposition().solve(b);

  std::array<double, 16> polished{};
  for (int s = 0; s < ns; ++s) polished[support[s]] = ws(s);

  const double viol = violation_of(polished, eqs, ineqs);
  const double value = eval_expr_on_weights(objective, polished);
  if (viol <= 5e-9 && value >= res.value - 1e-7) {
    res.model.weights = polished;
    res.value = value;
    res.constraint_violation = viol;
  }
}

}  // namespace

bell::Behavior LocalModel::behavior() const {
  bell::Behavior b;
  for (int i = 0; i < 16; ++i)
    for (int k = 0; k < bell::kEntries; ++k) b.p[k] += weights[i] * vertex_behaviors()[i].p[k];
  return b;
}

LhvResult lhv_optimize(const bell::LinearExpr& objective,
                       const std::vector<bell::LinearConstraint>& eqs,
                       const std::vector<bell::LinearConstraint>& ineqs,
                       const sdp::SolveOptions& opts) {
  sdp::SdpProblem p;
  p.n_vars = 16;
  p.objective = to_weight_form(objective);
  {
    sdp::LinearForm sum;
    for (int i = 0; i < 16; ++i) sum.add(i, 1.0);
    p.eqs.push_back({sum, 1.0});
  }
  for (int i = 0; i < 16; ++i) p.ineqs.push_back({sdp::LinearForm::variable(i, -1.0), 0.0});
  for (const auto& c : eqs) p.eqs.push_back({to_weight_form(c.expr), c.rhs});
  for (const auto& c : ineqs) p.ineqs.push_back({to_weight_form(c.expr), c.rhs});

  LhvResult res;
  const sdp::SdpSolution sol = sdp::solve(p, opts);
  res.status = sol.status;
  if (sol.status == sdp::Status::Infeasible) return res;
  if (sol.x.size() == 16) {
    for (int i = 0; i < 16; ++i) res.model.weights[i] = sol.x(i);
    res.value = eval_expr_on_weights(objective, res.model.weights);
    res.constraint_violation = violation_of(res.model.weights, eqs, ineqs);
    if (sol.status == sdp::Status::Optimal) polish(objective, eqs, ineqs, res);
  }
  return res;
}

std::vector<LhvSweepPoint> lhv_sweep(const TaskFamily& family, const std::vector<double>& grid,
                                     const sdp::SolveOptions& opts) {
  std::vector<LhvSweepPoint> out;
  out.reserve(grid.size());
  for (double param : grid) {
    LhvSweepPoint pt;
    pt.parameter = param;
    const LhvTask task = family(param);
    pt.result = lhv_optimize(task.objective, task.eqs, task.ineqs, opts);
    out.push_back(std::move(pt));
  }
  return out;
}

}  // namespace hardyrand::lhv
