#pragma once
// Moment-matrix relaxation of the quantum set for the 2x2x2 scenario.
// Words are built over the four '+'-outcome projector generators
// a0, a1, b0, b1; the '-' projectors are eliminated via completeness.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hardyrand/bell.hpp"
#include "hardyrand/sdp.hpp"

namespace hardyrand::npa {

enum class Letter : uint8_t { a0 = 0, a1 = 1, b0 = 2, b1 = 3 };

inline bool is_alice(Letter l) { return static_cast<uint8_t>(l) < 2; }

using Word = std::vector<Letter>;

/// Canonical word: Alice letters before Bob letters (they commute across
/// parties), each party's internal order preserved, adjacent duplicates
/// collapsed by idempotence. The empty word is the identity.
struct Monomial {
  Word word;
  bool operator==(const Monomial& o) const { return word == o.word; }
  bool operator<(const Monomial& o) const { return word < o.word; }
  std::string str() const;
};

Monomial canonicalize(const Word& w);
Word reversed(const Word& w);

/// Key identifying <w> with <reverse(w)>: the lexicographically smaller of
/// the two canonical forms.
Word symmetric_key(const Monomial& m);

enum class Level { l1ab, l2 };
const char* to_string(Level level);
Level level_from_string(const std::string& s);  // "1ab" or "2"

/// Symmetric moment-matrix template at a fixed level. Matrix position
/// (i,j) carries the variable of canonicalize(reverse(E_i) * E_j); the
/// (0,0) entry is the constant 1.
struct MomentStructure {
  Level level = Level::l1ab;
  int size = 0;
  int n_vars = 0;
  std::vector<Monomial> basis;
  std::map<Word, int> varmap;  // symmetric key -> variable index
  Eigen::MatrixXi entry;       // variable per matrix position, -1 = constant 1

  int var_of(const Monomial& m) const;
};

MomentStructure build_structure(Level level);

struct Quantity {
  enum class Kind { marginal_a, marginal_b, joint } kind = Kind::joint;
  int a = 1;  // outcomes: 0 = minus, 1 = plus
  int b = 1;
  int x = 0;
  int y = 0;

  static Quantity p_a(int a, int x) { return {Kind::marginal_a, a, 1, x, 0}; }
  static Quantity p_b(int b, int y) { return {Kind::marginal_b, 1, b, 0, y}; }
  static Quantity p_ab(int a, int b, int x, int y) { return {Kind::joint, a, b, x, y}; }
};

/// Linear embedding of a probability into the moment variables, e.g.
/// p(-,-|x,y) -> 1 - <a_x> - <b_y> + <a_x b_y>.
sdp::LinearForm probability_form(const MomentStructure& st, const Quantity& q);

/// Same embedding applied to an affine expression over the 16 joint
/// probabilities.
sdp::LinearForm to_moment_form(const MomentStructure& st, const bell::LinearExpr& e);

struct TriviallyInfeasible : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// SDP over the moment variables: maximize the objective subject to the
/// moment matrix being PSD (with its (0,0) entry fixed to 1), diagonal
/// projector moments in [0,1], and the given linear constraints.
/// Throws TriviallyInfeasible on an equality with no variables and an
/// inconsistent constant.
sdp::SdpProblem assemble(const MomentStructure& st, const sdp::LinearForm& objective,
                         const std::vector<std::pair<sdp::LinearForm, double>>& eqs,
                         const std::vector<std::pair<sdp::LinearForm, double>>& ineqs);

}  // namespace hardyrand::npa
