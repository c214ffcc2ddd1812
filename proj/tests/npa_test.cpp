#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>

#include "hardyrand/npa.hpp"

using namespace hardyrand;
using namespace hardyrand::npa;

namespace {

Word w(std::initializer_list<Letter> ls) { return Word(ls); }

// Hardy zero constraints expressed over the structure's moment variables.
std::vector<std::pair<sdp::LinearForm, double>> hardy_zeros(const MomentStructure& st) {
  return {
      {probability_form(st, Quantity::p_ab(1, 1, 0, 0)), 0.0},
      {probability_form(st, Quantity::p_ab(1, 0, 1, 0)), 0.0},
      {probability_form(st, Quantity::p_ab(0, 1, 0, 1)), 0.0},
  };
}

}  // namespace

TEST_CASE("canonicalize applies idempotence, commutation and their composition") {
  CHECK(canonicalize(w({Letter::a0, Letter::a0})).word == w({Letter::a0}));
  CHECK(canonicalize(w({Letter::b1, Letter::a0})).word == w({Letter::a0, Letter::b1}));
  CHECK(canonicalize(w({Letter::a0, Letter::b0, Letter::a0})).word ==
        w({Letter::a0, Letter::b0}));
  CHECK(canonicalize(w({})).word.empty());
}

TEST_CASE("canonicalize is idempotent on every word up to length 6") {
  std::vector<Word> words = {Word{}};
  size_t checked = 0;
  for (int len = 1; len <= 6; ++len) {
    std::vector<Word> next;
    for (const auto& base : words) {
      if (static_cast<int>(base.size()) != len - 1) continue;
      for (int l = 0; l < 4; ++l) {
        Word word = base;
        word.push_back(static_cast<Letter>(l));
        next.push_back(word);
      }
    }
    for (const auto& word : next) {
      const Monomial once = canonicalize(word);
      const Monomial twice = canonicalize(once.word);
      CHECK(once == twice);
      ++checked;
    }
    words.insert(words.end(), next.begin(), next.end());
  }
  CHECK(checked == 4 + 16 + 64 + 256 + 1024 + 4096);
}

TEST_CASE("level 1+AB structure has size 9 with the 8 physical moments") {
  const MomentStructure st = build_structure(Level::l1ab);
  CHECK(st.size == 9);
  CHECK(st.basis.size() == 9);
  // All marginal and joint moments are present.
  for (Letter l : {Letter::a0, Letter::a1, Letter::b0, Letter::b1})
    CHECK_NOTHROW(st.var_of(canonicalize(w({l}))));
  for (Letter a : {Letter::a0, Letter::a1})
    for (Letter b : {Letter::b0, Letter::b1}) CHECK_NOTHROW(st.var_of(canonicalize(w({a, b}))));

  // Entry (a0, b1) names the same variable as entry (1, a0b1).
  CHECK(st.entry(1, 4) == st.entry(0, 6));
}

TEST_CASE("level 2 structure has size 13 and reversal-symmetrized variables") {
  const MomentStructure st = build_structure(Level::l2);
  CHECK(st.size == 13);
  const int v1 = st.var_of(canonicalize(w({Letter::a0, Letter::a1})));
  const int v2 = st.var_of(canonicalize(w({Letter::a1, Letter::a0})));
  CHECK(v1 == v2);
}

TEST_CASE("variable count equals independent enumeration of entry words") {
  for (Level level : {Level::l1ab, Level::l2}) {
    const MomentStructure st = build_structure(level);
    std::set<Word> keys;
    for (int i = 0; i < st.size; ++i) {
      for (int j = 0; j < st.size; ++j) {
        Word prod = reversed(st.basis[i].word);
        prod.insert(prod.end(), st.basis[j].word.begin(), st.basis[j].word.end());
        const Monomial m = canonicalize(prod);
        if (m.word.empty()) continue;
        keys.insert(symmetric_key(m));
      }
    }
    CHECK(static_cast<int>(keys.size()) == st.n_vars);
    // Every variable index appears in the entry map.
    std::set<int> used;
    for (int i = 0; i < st.size; ++i)
      for (int j = 0; j < st.size; ++j)
        if (st.entry(i, j) >= 0) used.insert(st.entry(i, j));
    CHECK(static_cast<int>(used.size()) == st.n_vars);
  }
}

TEST_CASE("probability_form expands probabilities over the moments") {
  const MomentStructure st = build_structure(Level::l1ab);
  const int va0 = st.var_of(canonicalize(w({Letter::a0})));
  const int vb0 = st.var_of(canonicalize(w({Letter::b0})));
  const int va0b0 = st.var_of(canonicalize(w({Letter::a0, Letter::b0})));

  const auto f = probability_form(st, Quantity::p_ab(0, 0, 0, 0));
  CHECK(f.constant == 1.0);
  CHECK(f.coeffs.at(va0) == -1.0);
  CHECK(f.coeffs.at(vb0) == -1.0);
  CHECK(f.coeffs.at(va0b0) == 1.0);

  const auto fm = probability_form(st, Quantity::p_a(1, 1));
  CHECK(fm.constant == 0.0);
  REQUIRE(fm.coeffs.size() == 1);
  CHECK(fm.coeffs.at(st.var_of(canonicalize(w({Letter::a1})))) == 1.0);

  // The four joint forms of a block sum to the normalization identity.
  sdp::LinearForm total;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      const auto pf = probability_form(st, Quantity::p_ab(a, b, 1, 1));
      total.constant += pf.constant;
      for (const auto& [v, c] : pf.coeffs) total.add(v, c);
    }
  CHECK(total.constant == 1.0);
  for (const auto& [v, c] : total.coeffs) {
    (void)v;
    CHECK(c == 0.0);
  }
}

TEST_CASE("to_moment_form matches probability_form on behavior expressions") {
  const MomentStructure st = build_structure(Level::l1ab);
  const auto direct = probability_form(st, Quantity::p_ab(0, 1, 1, 0));
  const auto mapped = to_moment_form(st, bell::LinearExpr::joint(0, 1, 1, 0));
  CHECK(mapped.constant == direct.constant);
  CHECK(mapped.coeffs == direct.coeffs);

  // A marginal expanded over either y block maps to the same moment form.
  const auto m0 = to_moment_form(st, bell::LinearExpr::marginal_a(1, 0, 0));
  const auto m1 = to_moment_form(st, bell::LinearExpr::marginal_a(1, 0, 1));
  CHECK(m0.constant == m1.constant);
  CHECK(m0.coeffs == m1.coeffs);
}

TEST_CASE("assemble with no constraints lets a joint probability reach 1") {
  const MomentStructure st = build_structure(Level::l1ab);
  const auto problem = assemble(st, probability_form(st, Quantity::p_ab(1, 1, 0, 0)), {}, {});
  const auto sol = sdp::solve(problem);
  REQUIRE(sol.status == sdp::Status::Optimal);
  CHECK(sol.value == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("assemble with all physical moments pinned to uniform gives 1/4") {
  const MomentStructure st = build_structure(Level::l1ab);
  std::vector<std::pair<sdp::LinearForm, double>> eqs;
  for (int x = 0; x < 2; ++x) eqs.push_back({probability_form(st, Quantity::p_a(1, x)), 0.5});
  for (int y = 0; y < 2; ++y) eqs.push_back({probability_form(st, Quantity::p_b(1, y)), 0.5});
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      eqs.push_back({probability_form(st, Quantity::p_ab(1, 1, x, y)), 0.25});
  const auto problem = assemble(st, probability_form(st, Quantity::p_ab(1, 1, 0, 0)), eqs, {});
  const auto sol = sdp::solve(problem);
  REQUIRE(sol.status == sdp::Status::Optimal);
  CHECK(sol.value == doctest::Approx(0.25).epsilon(1e-7));
}

TEST_CASE("trivially inconsistent equality is reported at assembly time") {
  const MomentStructure st = build_structure(Level::l1ab);
  sdp::LinearForm zero;  // 0 = 1
  CHECK_THROWS_AS(assemble(st, sdp::LinearForm{}, {{zero, 1.0}}, {}), TriviallyInfeasible);
}

TEST_CASE("Hardy relaxation: maximum of p(+,+|A1,B1) under the three zeros") {
  const double hardy_max = (5.0 * std::sqrt(5.0) - 11.0) / 2.0;
  for (Level level : {Level::l1ab, Level::l2}) {
    const MomentStructure st = build_structure(level);
    const auto problem =
        assemble(st, probability_form(st, Quantity::p_ab(1, 1, 1, 1)), hardy_zeros(st), {});
    const auto sol = sdp::solve(problem);
    INFO("level ", to_string(level), " value ", sol.value, " gap ", sol.gap);
    REQUIRE(sol.status == sdp::Status::Optimal);
    CHECK(sol.value == doctest::Approx(hardy_max).epsilon(6e-3));
    CHECK(sol.value >= hardy_max - 1e-6);  // relaxation upper-bounds the quantum value
  }

  // Hierarchy monotonicity: the level-2 value cannot exceed level 1+AB.
  const MomentStructure s1 = build_structure(Level::l1ab);
  const MomentStructure s2 = build_structure(Level::l2);
  const auto v1 =
      sdp::solve(assemble(s1, probability_form(s1, Quantity::p_ab(1, 1, 1, 1)), hardy_zeros(s1), {}));
  const auto v2 =
      sdp::solve(assemble(s2, probability_form(s2, Quantity::p_ab(1, 1, 1, 1)), hardy_zeros(s2), {}));
  CHECK(v2.value <= v1.value + 1e-7);
}

TEST_CASE("Hardy constraints pinned above the quantum maximum are infeasible") {
  const MomentStructure st = build_structure(Level::l1ab);
  auto eqs = hardy_zeros(st);
  eqs.push_back({probability_form(st, Quantity::p_ab(1, 1, 1, 1)), 0.0902});
  const auto sol = sdp::solve(assemble(st, sdp::LinearForm{}, eqs, {}));
  CHECK(sol.status == sdp::Status::Infeasible);
}

TEST_CASE("feasibility of the Hardy slice flips across the quantum maximum") {
  const MomentStructure st = build_structure(Level::l1ab);
  for (auto [pin, feasible] : {std::pair{0.05, true}, {0.095, false}}) {
    auto eqs = hardy_zeros(st);
    eqs.push_back({probability_form(st, Quantity::p_ab(1, 1, 1, 1)), pin});
    const auto res = sdp::feasibility(assemble(st, sdp::LinearForm{}, eqs, {}));
    INFO("pin ", pin, " margin ", res.margin);
    CHECK(res.feasible == feasible);
    if (!feasible) CHECK(res.margin < -1e-8);
  }
}

TEST_CASE("Hardy problem pinned exactly at the quantum maximum solves cleanly") {
  const double hardy_max = (5.0 * std::sqrt(5.0) - 11.0) / 2.0;
  const MomentStructure st = build_structure(Level::l1ab);
  auto eqs = hardy_zeros(st);
  eqs.push_back({probability_form(st, Quantity::p_ab(1, 1, 1, 1)), hardy_max});
  // Adversarial guessing of the (A0,B0) pair: the largest of the four
  // outcome probabilities over all feasible moment matrices.
  double p_guess = 0.0;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const auto problem = assemble(st, probability_form(st, Quantity::p_ab(a, b, 0, 0)), eqs, {});
      const auto sol = sdp::solve(problem);
      INFO("outcome (", a, ",", b, ") value ", sol.value, " gap ", sol.gap, " residual ",
           sol.residual);
      REQUIRE(sol.status == sdp::Status::Optimal);
      p_guess = std::max(p_guess, sol.value);
    }
  }
  CHECK(p_guess == doctest::Approx(std::pow(2.0, -1.35)).epsilon(0.03));
}
