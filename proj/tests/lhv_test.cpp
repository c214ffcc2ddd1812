#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "hardyrand/bell.hpp"
#include "hardyrand/lhv.hpp"
#include "lp_oracle.hpp"

using namespace hardyrand;
using bell::LinearConstraint;
using bell::LinearExpr;

namespace {

// plus = 1, minus = 0 throughout.
std::vector<LinearConstraint> hardy_zero_eqs() {
  return {
      {LinearExpr::joint(1, 1, 0, 0), 0.0},
      {LinearExpr::joint(1, 0, 1, 0), 0.0},
      {LinearExpr::joint(0, 1, 0, 1), 0.0},
  };
}

std::vector<LinearConstraint> noisy_hardy_ineqs(double eps) {
  return {
      {LinearExpr::joint(1, 1, 0, 0), eps},
      {LinearExpr::joint(1, 0, 1, 0), eps},
      {LinearExpr::joint(0, 1, 0, 1), eps},
  };
}

LinearExpr hardy_merit() { return LinearExpr::joint(1, 1, 1, 1); }

LinearExpr cabello_merit() {
  LinearExpr e = LinearExpr::joint(1, 1, 1, 1);
  e.add(LinearExpr::joint(1, 1, 0, 0), -1.0);
  return e;
}

std::vector<LinearConstraint> cabello_zero_eqs() {
  return {
      {LinearExpr::joint(1, 0, 1, 0), 0.0},
      {LinearExpr::joint(0, 1, 0, 1), 0.0},
  };
}

}  // namespace

TEST_CASE("Hardy zeros force the classical Hardy probability to vanish") {
  auto res = lhv::lhv_optimize(hardy_merit(), hardy_zero_eqs(), {});
  REQUIRE(res.status == sdp::Status::Optimal);
  CHECK(std::abs(res.value) <= 1e-8);
  CHECK(res.constraint_violation <= 1e-8);

  auto oracle = lp_oracle::brute_force_max({hardy_merit(), hardy_zero_eqs(), {}});
  REQUIRE(oracle.has_value());
  CHECK(std::abs(*oracle) <= 1e-12);
}

TEST_CASE("noisy Hardy at eps = 0.1 reaches exactly 3 eps") {
  auto res = lhv::lhv_optimize(hardy_merit(), {}, noisy_hardy_ineqs(0.1));
  REQUIRE(res.status == sdp::Status::Optimal);
  CHECK(res.value == doctest::Approx(0.3).epsilon(1e-9));

  auto oracle = lp_oracle::brute_force_max({hardy_merit(), {}, noisy_hardy_ineqs(0.1)});
  REQUIRE(oracle.has_value());
  CHECK(*oracle == doctest::Approx(0.3).epsilon(1e-10));
}

TEST_CASE("noisy Hardy LHV law: optimum equals 3 eps across the grid") {
  for (int i = 0; i <= 7; ++i) {
    const double eps = i / 21.0;  // 0 .. 1/3
    auto res = lhv::lhv_optimize(hardy_merit(), {}, noisy_hardy_ineqs(eps));
    REQUIRE(res.status == sdp::Status::Optimal);
    CHECK(std::abs(res.value - 3.0 * eps) <= 1e-7);
    // Witness satisfies the constraints and is a genuine local model.
    CHECK(res.constraint_violation <= 1e-8);
    CHECK(bell::is_valid(res.model.behavior()));
  }
}

TEST_CASE("brute-force oracle agrees with the LP on the 3-eps law") {
  for (double eps : {0.05, 0.2, 1.0 / 3.0}) {
    auto oracle = lp_oracle::brute_force_max({hardy_merit(), {}, noisy_hardy_ineqs(eps)});
    REQUIRE(oracle.has_value());
    CHECK(*oracle == doctest::Approx(3.0 * eps).epsilon(1e-10));
    auto res = lhv::lhv_optimize(hardy_merit(), {}, noisy_hardy_ineqs(eps));
    CHECK(std::abs(res.value - *oracle) <= 1e-8);
  }
}

TEST_CASE("Cabello success measure is classically non-positive") {
  auto res = lhv::lhv_optimize(cabello_merit(), cabello_zero_eqs(), {});
  REQUIRE(res.status == sdp::Status::Optimal);
  CHECK(std::abs(res.value) <= 1e-8);  // 0 attained, never positive

  auto oracle = lp_oracle::brute_force_max({cabello_merit(), cabello_zero_eqs(), {}});
  REQUIRE(oracle.has_value());
  CHECK(std::abs(*oracle) <= 1e-12);
}

TEST_CASE("Hardy zeros with a forced positive joint are infeasible") {
  auto eqs = hardy_zero_eqs();
  eqs.push_back({LinearExpr::joint(1, 1, 1, 1), 0.05});
  auto res = lhv::lhv_optimize(hardy_merit(), eqs, {});
  CHECK(res.status == sdp::Status::Infeasible);
}

TEST_CASE("LP optimum is never exceeded by a feasible pure vertex") {
  const auto strategies = bell::enumerate_deterministic();
  for (double eps : {0.0, 0.15, 1.0 / 3.0}) {
    auto res = lhv::lhv_optimize(hardy_merit(), {}, noisy_hardy_ineqs(eps));
    REQUIRE(res.status == sdp::Status::Optimal);
    for (const auto& d : strategies) {
      const bell::Behavior b = bell::behavior_of(d);
      bool feasible = true;
      for (const auto& c : noisy_hardy_ineqs(eps))
        if (c.expr.eval(b) > c.rhs + 1e-12) feasible = false;
      if (feasible) CHECK(hardy_merit().eval(b) <= res.value + 1e-8);
    }
  }
}

TEST_CASE("lhv_sweep reproduces the 3-eps table and isolates failures per point") {
  lhv::TaskFamily family = [](double eps) {
    lhv::LhvTask task;
    task.objective = hardy_merit();
    task.ineqs = noisy_hardy_ineqs(eps);
    return task;
  };
  const std::vector<double> grid = {0.0, 1.0 / 6.0, 1.0 / 3.0};
  auto pts = lhv::lhv_sweep(family, grid);
  REQUIRE(pts.size() == 3);
  CHECK(std::abs(pts[0].result.value - 0.0) <= 1e-8);
  CHECK(std::abs(pts[1].result.value - 0.5) <= 1e-8);
  CHECK(std::abs(pts[2].result.value - 1.0) <= 1e-8);

  // An infeasible point must not abort the sweep.
  lhv::TaskFamily mixed = [](double p) {
    lhv::LhvTask task;
    task.objective = hardy_merit();
    task.eqs = hardy_zero_eqs();
    if (p > 0) task.eqs.push_back({LinearExpr::joint(1, 1, 1, 1), p});
    return task;
  };
  auto pts2 = lhv::lhv_sweep(mixed, {0.0, 0.05, 0.0});
  REQUIRE(pts2.size() == 3);
  CHECK(pts2[0].result.status == sdp::Status::Optimal);
  CHECK(pts2[1].result.status == sdp::Status::Infeasible);
  CHECK(pts2[2].result.status == sdp::Status::Optimal);
}

TEST_CASE("returned local models are valid convex mixtures") {
  auto res = lhv::lhv_optimize(cabello_merit(), cabello_zero_eqs(), {});
  REQUIRE(res.status == sdp::Status::Optimal);
  double sum = 0.0;
  for (double w : res.model.weights) {
    CHECK(w >= -1e-10);
    sum += w;
  }
  CHECK(std::abs(sum - 1.0) <= 1e-10);
  CHECK(bell::validate(res.model.behavior()).empty());
}
