#include "hardyrand/bell.hpp"

#include <cmath>
#include <stdexcept>

namespace hardyrand::bell {

namespace {
constexpr double kArithTol = 1e-12;
constexpr double kNoSignalTol = 1e-9;

std::string block_name(int x, int y) {
  return "(x=" + std::to_string(x) + ",y=" + std::to_string(y) + ")";
}
}  // namespace

ValidityReport validate(const Behavior& b) {
  ValidityReport report;
  for (double v : b.p) {
    if (!std::isfinite(v)) {
      report.push_back({"non-finite entry", INFINITY});
      return report;
    }
  }
  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 2; ++y) {
      double sum = 0.0;
      for (int a = 0; a < 2; ++a)
        for (int bb = 0; bb < 2; ++bb) sum += b(a, bb, x, y);
      if (std::abs(sum - 1.0) > kArithTol)
        report.push_back({"normalization " + block_name(x, y), std::abs(sum - 1.0)});
    }
  }
  for (int i = 0; i < kEntries; ++i) {
    if (b.p[i] < -kArithTol)
      report.push_back({"negative entry at index " + std::to_string(i), -b.p[i]});
  }
  for (int x = 0; x < 2; ++x) {
    for (int a = 0; a < 2; ++a) {
      double diff = std::abs(b.marginal_a(a, x, 0) - b.marginal_a(a, x, 1));
      if (diff > kNoSignalTol)
        report.push_back({"no-signaling p(a=" + std::to_string(a) + "|A_" + std::to_string(x) +
                              ") across y blocks",
                          diff});
    }
  }
  for (int y = 0; y < 2; ++y) {
    for (int bb = 0; bb < 2; ++bb) {
      double diff = std::abs(b.marginal_b(bb, y, 0) - b.marginal_b(bb, y, 1));
      if (diff > kNoSignalTol)
        report.push_back({"no-signaling p(b=" + std::to_string(bb) + "|B_" + std::to_string(y) +
                              ") across x blocks",
                          diff});
    }
  }
  return report;
}

bool is_valid(const Behavior& b) { return validate(b).empty(); }

Behavior behavior_of(const DeterministicStrategy& d) {
  Behavior b;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      b.at(static_cast<int>(d.alice(x)), static_cast<int>(d.bob(y)), x, y) = 1.0;
  return b;
}

std::vector<DeterministicStrategy> enumerate_deterministic() {
  std::vector<DeterministicStrategy> out;
  out.reserve(16);
  for (int i = 0; i < 16; ++i) {
    DeterministicStrategy d;
    d.alpha0 = static_cast<Outcome>((i >> 3) & 1);
    d.alpha1 = static_cast<Outcome>((i >> 2) & 1);
    d.beta0 = static_cast<Outcome>((i >> 1) & 1);
    d.beta1 = static_cast<Outcome>(i & 1);
    out.push_back(d);
  }
  return out;
}

namespace {
void require_valid(const Behavior& b, const char* op) {
  ValidityReport r = validate(b);
  if (!r.empty())
    throw std::invalid_argument(std::string(op) + ": invalid behavior (" + r.front().what + ")");
}
}  // namespace

double ch_value(const Behavior& b) {
  require_valid(b, "ch_value");
  const int m = static_cast<int>(Outcome::minus);
  const int pl = static_cast<int>(Outcome::plus);
  return b(pl, m, 1, 0) + b(m, pl, 0, 1) + b(m, m, 0, 0) - b.marginal_a(m, 0, 0) -
         b.marginal_b(m, 0, 0) - b(pl, pl, 1, 1);
}

DerivedEntries derived_entries(const Behavior& b) {
  require_valid(b, "derived_entries");
  const int pl = static_cast<int>(Outcome::plus);
  DerivedEntries d;
  for (int x = 0; x < 2; ++x) d.pa[x] = b.marginal_a(pl, x, 0);
  for (int y = 0; y < 2; ++y) d.pb[y] = b.marginal_b(pl, y, 0);
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) d.joint[x][y] = b(pl, pl, x, y);
  return d;
}

Behavior reconstruct(const DerivedEntries& d) {
  Behavior b;
  const int m = static_cast<int>(Outcome::minus);
  const int pl = static_cast<int>(Outcome::plus);
  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 2; ++y) {
      const double j = d.joint[x][y];
      b.at(pl, pl, x, y) = j;
      b.at(pl, m, x, y) = d.pa[x] - j;
      b.at(m, pl, x, y) = d.pb[y] - j;
      b.at(m, m, x, y) = 1.0 - d.pa[x] - d.pb[y] + j;
    }
  }
  return b;
}

double LinearExpr::eval(const Behavior& b) const {
  double v = constant;
  for (int i = 0; i < kEntries; ++i) v += coeff[i] * b.p[i];
  return v;
}

LinearExpr& LinearExpr::add(const LinearExpr& other, double scale) {
  constant += scale * other.constant;
  for (int i = 0; i < kEntries; ++i) coeff[i] += scale * other.coeff[i];
  return *this;
}

LinearExpr& LinearExpr::add_entry(int a, int b, int x, int y, double c) {
  coeff[entry_index(x, y, a, b)] += c;
  return *this;
}

LinearExpr LinearExpr::constant_of(double c) {
  LinearExpr e;
  e.constant = c;
  return e;
}

LinearExpr LinearExpr::joint(int a, int b, int x, int y) {
  LinearExpr e;
  e.add_entry(a, b, x, y, 1.0);
  return e;
}

LinearExpr LinearExpr::marginal_a(int a, int x, int y_block) {
  LinearExpr e;
  e.add_entry(a, 0, x, y_block, 1.0);
  e.add_entry(a, 1, x, y_block, 1.0);
  return e;
}

LinearExpr LinearExpr::marginal_b(int b, int y, int x_block) {
  LinearExpr e;
  e.add_entry(0, b, x_block, y, 1.0);
  e.add_entry(1, b, x_block, y, 1.0);
  return e;
}

LinearExpr LinearExpr::chsh() {
  LinearExpr e;
  auto sign = [](int o) { return o == static_cast<int>(Outcome::plus) ? 1.0 : -1.0; };
  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 2; ++y) {
      const double s_xy = (x == 1 && y == 1) ? -1.0 : 1.0;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) e.add_entry(a, b, x, y, s_xy * sign(a) * sign(b));
    }
  }
  return e;
}

}  // namespace hardyrand::bell
