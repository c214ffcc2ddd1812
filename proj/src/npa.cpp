#include "hardyrand/npa.hpp"

#include <algorithm>

namespace hardyrand::npa {

namespace {
const char* letter_name(Letter l) {
  switch (l) {
    case Letter::a0: return "a0";
    case Letter::a1: return "a1";
    case Letter::b0: return "b0";
    case Letter::b1: return "b1";
  }
  return "?";
}
}  // namespace

std::string Monomial::str() const {
  if (word.empty()) return "1";
  std::string s;
  for (Letter l : word) s += letter_name(l);
  return s;
}

Monomial canonicalize(const Word& w) {
  Word a, b;
  for (Letter l : w) (is_alice(l) ? a : b).push_back(l);
  auto collapse = [](Word& part) {
    Word out;
    for (Letter l : part)
      if (out.empty() || out.back() != l) out.push_back(l);
    part = std::move(out);
  };
  collapse(a);
  collapse(b);
  a.insert(a.end(), b.begin(), b.end());
  return Monomial{std::move(a)};
}

Word reversed(const Word& w) { return Word(w.rbegin(), w.rend()); }

Word symmetric_key(const Monomial& m) {
  const Word rev = canonicalize(reversed(m.word)).word;
  return std::min(m.word, rev);
}

const char* to_string(Level level) { return level == Level::l1ab ? "1ab" : "2"; }

Level level_from_string(const std::string& s) {
  if (s == "1ab" || s == "1+ab" || s == "1AB") return Level::l1ab;
  if (s == "2") return Level::l2;
  throw std::invalid_argument("unsupported npa level: " + s);
}

int MomentStructure::var_of(const Monomial& m) const {
  auto it = varmap.find(symmetric_key(m));
  if (it == varmap.end()) throw std::out_of_range("moment not in structure: " + m.str());
  return it->second;
}

MomentStructure build_structure(Level level) {
  MomentStructure st;
  st.level = level;
  auto mono = [](std::initializer_list<Letter> ls) { return Monomial{Word(ls)}; };

  st.basis.push_back(mono({}));
  st.basis.push_back(mono({Letter::a0}));
  st.basis.push_back(mono({Letter::a1}));
  st.basis.push_back(mono({Letter::b0}));
  st.basis.push_back(mono({Letter::b1}));
  st.basis.push_back(mono({Letter::a0, Letter::b0}));
  st.basis.push_back(mono({Letter::a0, Letter::b1}));
  st.basis.push_back(mono({Letter::a1, Letter::b0}));
  st.basis.push_back(mono({Letter::a1, Letter::b1}));
  if (level == Level::l2) {
    st.basis.push_back(mono({Letter::a0, Letter::a1}));
    st.basis.push_back(mono({Letter::a1, Letter::a0}));
    st.basis.push_back(mono({Letter::b0, Letter::b1}));
    st.basis.push_back(mono({Letter::b1, Letter::b0}));
  }
  st.size = static_cast<int>(st.basis.size());

  st.entry = Eigen::MatrixXi::Constant(st.size, st.size, -1);
  for (int i = 0; i < st.size; ++i) {
    for (int j = 0; j < st.size; ++j) {
      Word prod = reversed(st.basis[i].word);
      prod.insert(prod.end(), st.basis[j].word.begin(), st.basis[j].word.end());
      const Monomial m = canonicalize(prod);
      if (m.word.empty()) continue;  // the identity moment, fixed to 1
      const Word key = symmetric_key(m);
      auto [it, inserted] = st.varmap.try_emplace(key, st.n_vars);
      if (inserted) ++st.n_vars;
      st.entry(i, j) = it->second;
    }
  }
  return st;
}

sdp::LinearForm probability_form(const MomentStructure& st, const Quantity& q) {
  auto var = [&st](std::initializer_list<Letter> ls) {
    return st.var_of(canonicalize(Word(ls)));
  };
  const Letter ax = q.x == 0 ? Letter::a0 : Letter::a1;
  const Letter by = q.y == 0 ? Letter::b0 : Letter::b1;

  sdp::LinearForm f;
  switch (q.kind) {
    case Quantity::Kind::marginal_a:
      if (q.a == 1) {
        f.add(var({ax}), 1.0);
      } else {
        f.constant = 1.0;
        f.add(var({ax}), -1.0);
      }
      return f;
    case Quantity::Kind::marginal_b:
      if (q.b == 1) {
        f.add(var({by}), 1.0);
      } else {
        f.constant = 1.0;
        f.add(var({by}), -1.0);
      }
      return f;
    case Quantity::Kind::joint:
      break;
  }
  const int va = var({ax});
  const int vb = var({by});
  const int vab = var({ax, by});
  if (q.a == 1 && q.b == 1) {
    f.add(vab, 1.0);
  } else if (q.a == 1 && q.b == 0) {
    f.add(va, 1.0);
    f.add(vab, -1.0);
  } else if (q.a == 0 && q.b == 1) {
    f.add(vb, 1.0);
    f.add(vab, -1.0);
  } else {
    f.constant = 1.0;
    f.add(va, -1.0);
    f.add(vb, -1.0);
    f.add(vab, 1.0);
  }
  return f;
}

sdp::LinearForm to_moment_form(const MomentStructure& st, const bell::LinearExpr& e) {
  sdp::LinearForm f;
  f.constant = e.constant;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          const double c = e.coeff[bell::entry_index(x, y, a, b)];
          if (c == 0.0) continue;
          const sdp::LinearForm pf = probability_form(st, Quantity::p_ab(a, b, x, y));
          f.constant += c * pf.constant;
          for (const auto& [v, pc] : pf.coeffs) f.add(v, c * pc);
        }
  std::erase_if(f.coeffs, [](const auto& kv) { return kv.second == 0.0; });
  return f;
}

sdp::SdpProblem assemble(const MomentStructure& st, const sdp::LinearForm& objective,
                         const std::vector<std::pair<sdp::LinearForm, double>>& eqs,
                         const std::vector<std::pair<sdp::LinearForm, double>>& ineqs) {
  sdp::SdpProblem p;
  p.n_vars = st.n_vars;
  p.objective = objective;

  sdp::PsdBlock blk;
  blk.dim = st.size;
  blk.constant = Eigen::MatrixXd::Zero(st.size, st.size);
  for (int i = 0; i < st.size; ++i) {
    for (int j = 0; j < st.size; ++j) {
      const int v = st.entry(i, j);
      if (v < 0) {
        blk.constant(i, j) = 1.0;
        continue;
      }
      auto [it, inserted] =
          blk.coeff.try_emplace(v, Eigen::MatrixXd::Zero(st.size, st.size));
      it->second(i, j) = 1.0;
    }
  }
  p.psd_blocks.push_back(std::move(blk));

  // Diagonal entries are moments of products P...P with norm at most 1.
  std::vector<bool> bounded(st.n_vars, false);
  for (int i = 1; i < st.size; ++i) {
    const int v = st.entry(i, i);
    if (v >= 0 && !bounded[v]) {
      bounded[v] = true;
      p.ineqs.push_back({sdp::LinearForm::variable(v), 1.0});
      p.ineqs.push_back({sdp::LinearForm::variable(v, -1.0), 0.0});
    }
  }

  auto check_vars = [&st](const sdp::LinearForm& f) {
    for (const auto& [v, c] : f.coeffs) {
      (void)c;
      if (v < 0 || v >= st.n_vars)
        throw std::invalid_argument("assemble: form uses a variable outside the structure");
    }
  };
  check_vars(objective);
  for (const auto& [f, rhs] : eqs) {
    check_vars(f);
    bool has_var = false;
    for (const auto& [v, c] : f.coeffs)
      if (c != 0.0) {
        (void)v;
        has_var = true;
        break;
      }
    if (!has_var && std::abs(f.constant - rhs) > 1e-12)
      throw TriviallyInfeasible("assemble: equality reduces to " + std::to_string(f.constant) +
                                " = " + std::to_string(rhs));
    p.eqs.push_back({f, rhs});
  }
  for (const auto& [f, rhs] : ineqs) {
    check_vars(f);
    p.ineqs.push_back({f, rhs});
  }
  return p;
}

}  // namespace hardyrand::npa
