#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "hardyrand/sdp.hpp"

using namespace hardyrand::sdp;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// maximize x0 subject to [[1, x0], [x0, 1]] >= 0
SdpProblem arrow_problem() {
  SdpProblem p;
  p.n_vars = 1;
  p.objective = LinearForm::variable(0);
  PsdBlock blk;
  blk.dim = 2;
  blk.constant = MatrixXd::Identity(2, 2);
  MatrixXd g = MatrixXd::Zero(2, 2);
  g(0, 1) = g(1, 0) = 1.0;
  blk.coeff[0] = g;
  p.psd_blocks.push_back(blk);
  return p;
}

SdpProblem box_lp() {
  SdpProblem p;
  p.n_vars = 1;
  p.objective = LinearForm::variable(0);
  p.ineqs.push_back({LinearForm::variable(0), 0.3});        // x <= 0.3
  p.ineqs.push_back({LinearForm::variable(0, -1.0), 0.0});  // -x <= 0
  return p;
}

}  // namespace

TEST_CASE("2x2 determinant condition: max x with [[1,x],[x,1]] psd is 1") {
  auto sol = solve(arrow_problem());
  REQUIRE(sol.status == Status::Optimal);
  CHECK(sol.value == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(sol.gap <= 1e-7);
  CHECK(sol.residual <= 1e-8);
}

TEST_CASE("degenerate LP: max x in [0, 0.3] is 0.3") {
  auto sol = solve(box_lp());
  REQUIRE(sol.status == Status::Optimal);
  CHECK(sol.value == doctest::Approx(0.3).epsilon(1e-7));
}

TEST_CASE("equality elimination: max x+y with x+y=0.4, y in [0,1]") {
  SdpProblem p;
  p.n_vars = 2;
  p.objective = LinearForm::variable(0);
  p.objective.add(1, 1.0);
  LinearForm eq = LinearForm::variable(0);
  eq.add(1, 1.0);
  p.eqs.push_back({eq, 0.4});
  p.ineqs.push_back({LinearForm::variable(1), 1.0});
  p.ineqs.push_back({LinearForm::variable(1, -1.0), 0.0});
  auto sol = solve(p);
  REQUIRE(sol.status == Status::Optimal);
  CHECK(sol.value == doctest::Approx(0.4).epsilon(1e-8));
}

TEST_CASE("inconsistent equalities are infeasible") {
  SdpProblem p;
  p.n_vars = 1;
  p.objective = LinearForm::variable(0);
  p.ineqs.push_back({LinearForm::variable(0), 1.0});
  p.eqs.push_back({LinearForm::variable(0), 0.2});
  p.eqs.push_back({LinearForm::variable(0), 0.7});
  auto sol = solve(p);
  CHECK(sol.status == Status::Infeasible);
  CHECK(sol.residual > 1e-8);
}

TEST_CASE("contradictory box is infeasible with a phase-1 residual") {
  SdpProblem p;
  p.n_vars = 1;
  p.objective = LinearForm::variable(0);
  p.ineqs.push_back({LinearForm::variable(0), -0.5});       // x <= -0.5
  p.ineqs.push_back({LinearForm::variable(0, -1.0), 0.0});  // x >= 0
  auto sol = solve(p);
  CHECK(sol.status == Status::Infeasible);
  CHECK(sol.residual >= 0.2);  // gap between the two half-lines is 0.5
}

TEST_CASE("weak duality and independent psd check on a random-ish SDP") {
  // maximize x0 + 0.5 x1 with [[1+x0, x1],[x1, 1-x0]] psd and |x1| <= 0.8.
  SdpProblem p;
  p.n_vars = 2;
  p.objective = LinearForm::variable(0);
  p.objective.add(1, 0.5);
  PsdBlock blk;
  blk.dim = 2;
  blk.constant = MatrixXd::Identity(2, 2);
  MatrixXd g0 = MatrixXd::Zero(2, 2);
  g0(0, 0) = 1.0;
  g0(1, 1) = -1.0;
  blk.coeff[0] = g0;
  MatrixXd g1 = MatrixXd::Zero(2, 2);
  g1(0, 1) = g1(1, 0) = 1.0;
  blk.coeff[1] = g1;
  p.psd_blocks.push_back(blk);
  p.ineqs.push_back({LinearForm::variable(1), 0.8});
  p.ineqs.push_back({LinearForm::variable(1, -1.0), 0.8});

  auto sol = solve(p);
  REQUIRE(sol.status == Status::Optimal);
  // Independent eigenvalue check of the solution block.
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(p.psd_blocks[0].eval(sol.x));
  CHECK(es.eigenvalues().minCoeff() >= -1e-8);
  CHECK(max_violation(p, sol.x) <= 1e-8);

  // Scaling invariance of the argmax: doubling the objective doubles the
  // value and leaves the solution essentially unchanged.
  SdpProblem p2 = p;
  p2.objective = LinearForm::variable(0, 2.0);
  p2.objective.add(1, 1.0);
  auto sol2 = solve(p2);
  REQUIRE(sol2.status == Status::Optimal);
  CHECK(sol2.value == doctest::Approx(2.0 * sol.value).epsilon(1e-6));
  CHECK((sol2.x - sol.x).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("LP solve matches exhaustive vertex scan on random simplex problems") {
  std::mt19937_64 gen(123);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 3 + static_cast<int>(gen() % 14);  // 3..16 weights
    SdpProblem p;
    p.n_vars = n;
    VectorXd c(n);
    for (int i = 0; i < n; ++i) {
      c(i) = u(gen);
      p.objective.add(i, c(i));
      p.ineqs.push_back({LinearForm::variable(i, -1.0), 0.0});  // w_i >= 0
    }
    LinearForm sum;
    for (int i = 0; i < n; ++i) sum.add(i, 1.0);
    p.eqs.push_back({sum, 1.0});
    auto sol = solve(p);
    REQUIRE(sol.status == Status::Optimal);
    CHECK(std::abs(sol.value - c.maxCoeff()) <= 1e-7);
  }
}

TEST_CASE("feasibility: empty constraint slice is feasible") {
  SdpProblem p;
  p.n_vars = 1;
  p.ineqs.push_back({LinearForm::variable(0), 5.0});
  p.ineqs.push_back({LinearForm::variable(0, -1.0), 5.0});
  auto res = feasibility(p);
  CHECK(res.feasible);
  CHECK(res.margin > 1e-3);
}

TEST_CASE("feasibility margin reflects the interior width") {
  SdpProblem p;
  p.n_vars = 1;
  p.ineqs.push_back({LinearForm::variable(0), 0.3});
  p.ineqs.push_back({LinearForm::variable(0, -1.0), 0.0});
  auto res = feasibility(p);
  REQUIRE(res.feasible);
  CHECK(res.margin == doctest::Approx(0.15).epsilon(1e-4));
  CHECK(res.point(0) == doctest::Approx(0.15).epsilon(1e-3));
}

TEST_CASE("NaN input is rejected") {
  SdpProblem p;
  p.n_vars = 1;
  p.objective = LinearForm::variable(0, std::nan(""));
  p.ineqs.push_back({LinearForm::variable(0), 1.0});
  CHECK_THROWS_AS(solve(p), std::invalid_argument);
}

TEST_CASE("a problem with no cone at all is rejected") {
  SdpProblem p;
  p.n_vars = 1;
  p.objective = LinearForm::variable(0);
  CHECK_THROWS_AS(solve(p), std::invalid_argument);
}

TEST_CASE("dump emits one matrix per line") {
  auto text = dump(arrow_problem());
  CHECK(text.find("sdp n_vars=1") != std::string::npos);
  CHECK(text.find("block 0 dim=2") != std::string::npos);
  CHECK(text.find("F const 1 0 0 1") != std::string::npos);
  CHECK(text.find("F 0 0 1 1 0") != std::string::npos);
}

TEST_CASE("solve is deterministic across repeated runs") {
  auto a = solve(arrow_problem());
  auto b = solve(arrow_problem());
  REQUIRE(a.status == Status::Optimal);
  CHECK(a.value == b.value);
  CHECK(a.iterations == b.iterations);
  CHECK((a.x - b.x).cwiseAbs().maxCoeff() == 0.0);
}
