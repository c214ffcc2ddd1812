#pragma once
// Two-party / two-setting / two-outcome Bell scenario: joint probability
// tables, deterministic strategies, CH evaluation and the moment-level
// reparametrization used by the relaxation and the LP oracle.

#include <array>
#include <string>
#include <vector>

namespace hardyrand::bell {

enum class Outcome : int { minus = 0, plus = 1 };

inline constexpr int kEntries = 16;

/// Index of p(a,b|x,y) in the fixed lexicographic (x,y,a,b) order,
/// with minus ordered before plus and settings ordered 0,1.
constexpr int entry_index(int x, int y, int a, int b) {
  return ((x * 2 + y) * 2 + a) * 2 + b;
}

/// Full conditional probability table p(a,b|x,y).
struct Behavior {
  std::array<double, kEntries> p{};

  double operator()(int a, int b, int x, int y) const { return p[entry_index(x, y, a, b)]; }
  double& at(int a, int b, int x, int y) { return p[entry_index(x, y, a, b)]; }

  /// p(a|A_x) summed from the y block.
  double marginal_a(int a, int x, int y) const {
    return (*this)(a, 0, x, y) + (*this)(a, 1, x, y);
  }
  /// p(b|B_y) summed from the x block.
  double marginal_b(int b, int y, int x) const {
    return (*this)(0, b, x, y) + (*this)(1, b, x, y);
  }
};

struct Violation {
  std::string what;
  double magnitude = 0.0;
};
using ValidityReport = std::vector<Violation>;

/// Checks normalization (1e-12), non-negativity (1e-12) and cross-block
/// no-signaling agreement (1e-9). Empty report means valid.
ValidityReport validate(const Behavior& b);
bool is_valid(const Behavior& b);

/// One local deterministic strategy: fixed answers per setting.
struct DeterministicStrategy {
  Outcome alpha0 = Outcome::minus;
  Outcome alpha1 = Outcome::minus;
  Outcome beta0 = Outcome::minus;
  Outcome beta1 = Outcome::minus;

  Outcome alice(int x) const { return x == 0 ? alpha0 : alpha1; }
  Outcome bob(int y) const { return y == 0 ? beta0 : beta1; }
};

Behavior behavior_of(const DeterministicStrategy& d);

/// All 16 strategies in lexicographic (alpha0, alpha1, beta0, beta1) order,
/// minus before plus; element 0 is the all-minus strategy.
std::vector<DeterministicStrategy> enumerate_deterministic();

/// Left-hand side of the CH inequality,
///   p(+,-|A1,B0) + p(-,+|A0,B1) + p(-,-|A0,B0)
///   - p(-|A0) - p(-|B0) - p(+,+|A1,B1),
/// with marginals taken from the y=0 / x=0 blocks.
/// Throws std::invalid_argument on an invalid behavior.
double ch_value(const Behavior& b);

/// The 8 moment-level quantities {p(+|A_x), p(+|B_y), p(+,+|x,y)}.
struct DerivedEntries {
  std::array<double, 2> pa{};                    // p(+|A_x)
  std::array<double, 2> pb{};                    // p(+|B_y)
  std::array<std::array<double, 2>, 2> joint{};  // p(+,+|x,y), indexed [x][y]
};

/// Throws std::invalid_argument on an invalid behavior.
DerivedEntries derived_entries(const Behavior& b);

/// Inverse of derived_entries via completeness:
///   p(+,-) = p(+|A_x) - p(+,+),  p(-,+) = p(+|B_y) - p(+,+),
///   p(-,-) = 1 - p(+|A_x) - p(+|B_y) + p(+,+).
Behavior reconstruct(const DerivedEntries& d);

/// Affine function of the 16 joint entries: constant + coeff . p.
struct LinearExpr {
  double constant = 0.0;
  std::array<double, kEntries> coeff{};

  double eval(const Behavior& b) const;
  LinearExpr& add(const LinearExpr& other, double scale = 1.0);
  LinearExpr& add_entry(int a, int b, int x, int y, double c);

  static LinearExpr constant_of(double c);
  static LinearExpr joint(int a, int b, int x, int y);
  /// p(a|A_x) expanded over the given y block.
  static LinearExpr marginal_a(int a, int x, int y_block);
  /// p(b|B_y) expanded over the given x block.
  static LinearExpr marginal_b(int b, int y, int x_block);
  /// E(0,0)+E(0,1)+E(1,0)-E(1,1) with E(x,y) = sum_ab (+-1)(+-1) p(a,b|x,y).
  static LinearExpr chsh();
};

/// Linear constraint on behaviors; relation (==, <=) is decided by the
/// list the constraint is placed in.
struct LinearConstraint {
  LinearExpr expr;
  double rhs = 0.0;
};

}  // namespace hardyrand::bell
