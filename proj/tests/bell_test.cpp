#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "hardyrand/bell.hpp"
#include "test_util.hpp"

using namespace hardyrand::bell;

namespace {
Behavior uniform_behavior() {
  Behavior b;
  b.p.fill(0.25);
  return b;
}
}  // namespace

TEST_CASE("validate accepts the uniform table") {
  CHECK(validate(uniform_behavior()).empty());
}

TEST_CASE("validate reports normalization violations") {
  Behavior b = uniform_behavior();
  b.at(1, 1, 0, 0) = 0.6;
  b.at(0, 0, 0, 0) = 0.6;
  b.at(1, 0, 0, 0) = 0.0;
  b.at(0, 1, 0, 0) = 0.0;  // block sums to 1.2
  auto report = validate(b);
  REQUIRE(!report.empty());
  bool found = false;
  for (const auto& v : report)
    if (v.what.find("normalization") != std::string::npos && v.magnitude > 0.19) found = true;
  CHECK(found);
}

TEST_CASE("validate reports signaling tables with the marginal gap") {
  // p(+|A_0) = 0.7 under y=0 but 0.5 under y=1.
  Behavior b;
  for (int y = 0; y < 2; ++y) {
    const double pa = (y == 0) ? 0.7 : 0.5;
    b.at(1, 1, 0, y) = pa / 2;
    b.at(1, 0, 0, y) = pa / 2;
    b.at(0, 1, 0, y) = (1 - pa) / 2;
    b.at(0, 0, 0, y) = (1 - pa) / 2;
  }
  for (int y = 0; y < 2; ++y)
    for (int a = 0; a < 2; ++a)
      for (int bb = 0; bb < 2; ++bb) b.at(a, bb, 1, y) = 0.25;
  auto report = validate(b);
  REQUIRE(!report.empty());
  bool found = false;
  for (const auto& v : report)
    if (v.what.find("no-signaling") != std::string::npos &&
        std::abs(v.magnitude - 0.2) < 1e-12)
      found = true;
  CHECK(found);
}

TEST_CASE("behavior_of deterministic strategies") {
  DeterministicStrategy all_minus;
  Behavior bm = behavior_of(all_minus);
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) CHECK(bm(0, 0, x, y) == 1.0);

  DeterministicStrategy all_plus{Outcome::plus, Outcome::plus, Outcome::plus, Outcome::plus};
  Behavior bp = behavior_of(all_plus);
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) CHECK(bp(1, 1, x, y) == 1.0);

  DeterministicStrategy mixed{Outcome::plus, Outcome::minus, Outcome::plus, Outcome::minus};
  Behavior b = behavior_of(mixed);
  CHECK(b(1, 1, 0, 0) == 1.0);
  CHECK(b(0, 0, 1, 1) == 1.0);
  CHECK(b(1, 0, 0, 1) == 1.0);
  CHECK(b(0, 1, 1, 0) == 1.0);
}

TEST_CASE("enumerate_deterministic yields 16 distinct strategies, all-minus first") {
  auto strategies = enumerate_deterministic();
  REQUIRE(strategies.size() == 16);
  CHECK(strategies[0].alpha0 == Outcome::minus);
  CHECK(strategies[0].alpha1 == Outcome::minus);
  CHECK(strategies[0].beta0 == Outcome::minus);
  CHECK(strategies[0].beta1 == Outcome::minus);

  std::set<std::array<double, kEntries>> tables;
  for (const auto& d : strategies) {
    Behavior b = behavior_of(d);
    for (double v : b.p) CHECK((v == 0.0 || v == 1.0));
    tables.insert(b.p);
  }
  CHECK(tables.size() == 16);  // induced behaviors pairwise distinct
}

TEST_CASE("ch_value on reference points") {
  CHECK(ch_value(behavior_of(DeterministicStrategy{})) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(ch_value(uniform_behavior()) == doctest::Approx(-0.5).epsilon(1e-14));
}

TEST_CASE("ch_value over all 16 vertices spans exactly [-1, 0]") {
  double lo = 1e9, hi = -1e9;
  for (const auto& d : enumerate_deterministic()) {
    const double v = ch_value(behavior_of(d));
    CHECK(v >= -1.0 - 1e-14);
    CHECK(v <= 0.0 + 1e-14);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(lo == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(hi == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("ch_value >= -1 on random local mixtures") {
  auto gen = testutil::rng(11);
  for (int i = 0; i < 200; ++i) {
    const Behavior b = testutil::random_local_behavior(gen);
    CHECK(ch_value(b) >= -1.0 - 1e-12);
  }
}

TEST_CASE("ch_value rejects invalid behaviors") {
  Behavior b = uniform_behavior();
  b.at(0, 0, 0, 0) = 0.5;  // breaks normalization
  CHECK_THROWS_AS(ch_value(b), std::invalid_argument);
}

TEST_CASE("derived_entries on reference points") {
  auto d = derived_entries(uniform_behavior());
  for (int x = 0; x < 2; ++x) CHECK(d.pa[x] == doctest::Approx(0.5));
  for (int y = 0; y < 2; ++y) CHECK(d.pb[y] == doctest::Approx(0.5));
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) CHECK(d.joint[x][y] == doctest::Approx(0.25));

  DeterministicStrategy all_plus{Outcome::plus, Outcome::plus, Outcome::plus, Outcome::plus};
  auto dp = derived_entries(behavior_of(all_plus));
  for (int x = 0; x < 2; ++x) CHECK(dp.pa[x] == 1.0);
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) CHECK(dp.joint[x][y] == 1.0);
}

TEST_CASE("derived_entries round-trip is the identity on valid behaviors") {
  auto gen = testutil::rng(23);
  for (int i = 0; i < 300; ++i) {
    const Behavior b = (i % 2 == 0) ? testutil::random_local_behavior(gen)
                                    : testutil::random_nosignaling_behavior(gen);
    REQUIRE(is_valid(b));
    const Behavior back = reconstruct(derived_entries(b));
    for (int k = 0; k < kEntries; ++k) CHECK(std::abs(back.p[k] - b.p[k]) <= 1e-12);
  }
}

TEST_CASE("completeness identity p(+,+|00) = p(-,-|00) - p(-|A0) - p(-|B0) + 1") {
  auto gen = testutil::rng(37);
  for (int i = 0; i < 200; ++i) {
    const Behavior b = testutil::random_nosignaling_behavior(gen);
    const double lhs = b(1, 1, 0, 0);
    const double rhs = b(0, 0, 0, 0) - b.marginal_a(0, 0, 0) - b.marginal_b(0, 0, 0) + 1.0;
    CHECK(std::abs(lhs - rhs) <= 1e-12);
  }
}

TEST_CASE("LinearExpr evaluates marginals, joints and CHSH") {
  const Behavior u = uniform_behavior();
  CHECK(LinearExpr::joint(1, 1, 0, 0).eval(u) == doctest::Approx(0.25));
  CHECK(LinearExpr::marginal_a(1, 0, 0).eval(u) == doctest::Approx(0.5));
  CHECK(LinearExpr::marginal_b(0, 1, 1).eval(u) == doctest::Approx(0.5));
  CHECK(LinearExpr::chsh().eval(u) == doctest::Approx(0.0));

  // Deterministic all-plus: every correlator is +1, S = 2.
  DeterministicStrategy all_plus{Outcome::plus, Outcome::plus, Outcome::plus, Outcome::plus};
  CHECK(LinearExpr::chsh().eval(behavior_of(all_plus)) == doctest::Approx(2.0));

  // Classical CHSH maximum over the vertices is 2.
  double best = -1e9;
  for (const auto& d : enumerate_deterministic())
    best = std::max(best, LinearExpr::chsh().eval(behavior_of(d)));
  CHECK(best == doctest::Approx(2.0));
}
