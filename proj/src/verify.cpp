#include "hardyrand/verify.hpp"

#include <cmath>
#include <cstdio>
#include <random>

#include "hardyrand/bell.hpp"
#include "hardyrand/lhv.hpp"
#include "hardyrand/protocols.hpp"
#include "hardyrand/qubit.hpp"

namespace hardyrand::verify {

namespace {

using namespace hardyrand::protocols;

constexpr double kHardyMax = 0.09016994374947424;  // (5*sqrt(5)-11)/2

struct Reporter {
  std::vector<CheckResult> results;
  const std::function<void(const CheckResult&)>* sink = nullptr;

  void add(CheckResult r) {
    if (sink && *sink) (*sink)(r);
    results.push_back(std::move(r));
  }
  void window(const std::string& id, const std::string& name, double measured, double expected,
              double tol, std::string detail = {}) {
    CheckResult r{id, name, std::abs(measured - expected) <= tol, measured, expected, tol,
                  std::move(detail)};
    add(std::move(r));
  }
  void at_least(const std::string& id, const std::string& name, double measured, double bound,
                std::string detail = {}) {
    CheckResult r{id, name, measured >= bound, measured, bound,
                  std::numeric_limits<double>::quiet_NaN(), std::move(detail)};
    add(std::move(r));
  }
  void at_most(const std::string& id, const std::string& name, double measured, double bound,
               std::string detail = {}) {
    CheckResult r{id, name, measured <= bound, measured, bound,
                  std::numeric_limits<double>::quiet_NaN(), std::move(detail)};
    add(std::move(r));
  }
};

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back(lo + (hi - lo) * i / (n - 1));
  return out;
}

double certified_h(Family f, double param, npa::Level level, const VerifyOptions& opts) {
  CertifyOptions copts;
  copts.solve = opts.solve;
  copts.with_lhv = false;
  copts.with_qubit = false;
  const auto res = certify(build(f, param, level, opts.solve), level, copts);
  if (res.status != sdp::Status::Optimal) return std::numeric_limits<double>::quiet_NaN();
  return res.h_min;
}

}  // namespace

std::string format_row(const CheckResult& r) {
  char buf[256];
  if (std::isnan(r.tolerance)) {
    std::snprintf(buf, sizeof(buf), "[%s] %-4s %-52s measured=%.6g bound=%.6g %s",
                  r.pass ? "PASS" : "FAIL", r.id.c_str(), r.name.c_str(), r.measured, r.expected,
                  r.detail.c_str());
  } else {
    std::snprintf(buf, sizeof(buf), "[%s] %-4s %-52s measured=%.6g expected=%.6g tol=%.2g %s",
                  r.pass ? "PASS" : "FAIL", r.id.c_str(), r.name.c_str(), r.measured, r.expected,
                  r.tolerance, r.detail.c_str());
  }
  return std::string(buf);
}

std::vector<CheckResult> run_checks(const VerifyOptions& opts,
                                    const std::function<void(const CheckResult&)>& on_result) {
  Reporter rep;
  rep.sink = &on_result;
  const npa::Level l1 = npa::Level::l1ab;
  QubitLowerCache qcache;

  CertifyOptions copts;
  copts.solve = opts.solve;
  copts.with_lhv = false;
  copts.with_qubit = false;
  copts.workers = opts.workers;

  // 1. Hardy maximum and qubit achievability.
  const double hardy_max = max_feasible(Family::hardy, 0, l1, opts.solve);
  {
    CheckResult r{"1a", "hardy maximum at level 1+AB", hardy_max >= 0.0897 && hardy_max <= 0.0907,
                  hardy_max, kHardyMax, 5e-4, "window [0.0897, 0.0907]"};
    rep.add(std::move(r));
  }
  const double hardy_qubit =
      qcache.get_or_compute(Family::hardy, 0, opts.qubit_restarts, opts.seed, opts.workers);
  rep.at_least("1b", "hardy qubit achievability", hardy_qubit, 0.0900);

  // 2. Fig. 1 endpoint entropy.
  rep.window("2", "certify(hardy, 0.090169) min-entropy",
             certified_h(Family::hardy, 0.090169, l1, opts), 1.35, 0.02);

  // 3. Noisy-Hardy LHV law on a 21-point grid.
  {
    double worst = 0.0;
    for (int i = 0; i < 21; ++i) {
      const double eps = (1.0 / 3.0) * i / 20.0;
      const auto lhv_res = lhv_baseline(Family::noisy_hardy, eps, opts.solve);
      worst = std::max(worst, std::abs(lhv_res.value - 3.0 * eps));
    }
    rep.at_most("3", "LHV optimum minus 3*eps on 21-point grid", worst, 1e-7);
  }

  // 4. Noisy-Hardy endpoint: delta and entropy at eps = 1/3.
  rep.window("4a", "noisy-hardy delta at eps=1/3", max_feasible(Family::noisy_hardy, 1.0 / 3.0, l1, opts.solve),
             0.99995, 1e-4);
  rep.window("4b", "certify(noisy-hardy, 1/3) min-entropy",
             certified_h(Family::noisy_hardy, 1.0 / 3.0, l1, opts), 1.58, 0.02);

  // 5. Cabello maximum, level stability, qubit achievability.
  const double cab_max = max_feasible(Family::cabello, 0, l1, opts.solve);
  rep.window("5a", "cabello maximum at level 1+AB", cab_max, 0.10784, 5e-4);
  rep.window("5b", "cabello maximum level-2 agreement",
             max_feasible(Family::cabello, 0, npa::Level::l2, opts.solve), cab_max, 1e-3);
  rep.at_least("5c", "cabello qubit achievability",
               qcache.get_or_compute(Family::cabello, 0, opts.qubit_restarts, opts.seed,
                                     opts.workers),
               0.1070);

  // 6. Fig. 3 endpoint entropy.
  rep.window("6", "certify(cabello, 0.10784) min-entropy",
             certified_h(Family::cabello, 0.10784, l1, opts), 1.56, 0.02);

  // 7. Dimension-witness maximum and Fig. 4 endpoint entropy.
  const double dw_max = max_feasible(Family::dw_cabello, 0, l1, opts.solve);
  rep.window("7a", "dw-cabello maximum at level 1+AB", dw_max, 0.08279, 5e-4);
  rep.window("7b", "certify(dw-cabello, 0.08279) min-entropy",
             certified_h(Family::dw_cabello, 0.08279, l1, opts), 0.68, 0.02);

  // 8. CHSH baseline.
  rep.window("8a", "certify(chsh, 2*sqrt(2)) min-entropy",
             certified_h(Family::chsh, 2.0 * std::sqrt(2.0), l1, opts), 1.23, 0.02);
  rep.at_most("8b", "certify(chsh, 2) min-entropy", certified_h(Family::chsh, 2.0, l1, opts),
              1e-4);

  // 9. Classical-point collapse with explicit deterministic witnesses.
  for (auto [id, family] : {std::pair{"9a", Family::hardy}, {"9b", Family::cabello}}) {
    const auto spec = build(family, 0.0, l1, opts.solve);
    int witness = -1;
    const auto strategies = bell::enumerate_deterministic();
    for (int i = 0; i < 16 && witness < 0; ++i) {
      const bell::Behavior b = bell::behavior_of(strategies[i]);
      bool ok = true;
      for (const auto& c : spec.eqs) ok = ok && std::abs(c.expr.eval(b) - c.rhs) <= 1e-12;
      for (const auto& c : spec.ineqs) ok = ok && c.expr.eval(b) <= c.rhs + 1e-12;
      if (ok) witness = i;
    }
    const double h = certified_h(family, 0.0, l1, opts);
    CheckResult r;
    r.id = id;
    r.name = std::string("certify(") + to_string(family) + ", 0) collapses classically";
    r.measured = h;
    r.expected = 0.0;
    r.tolerance = 1e-6;
    r.pass = (h <= 1e-6) && witness >= 0;
    r.detail = witness >= 0 ? "deterministic witness #" + std::to_string(witness)
                            : "no deterministic witness found";
    rep.add(std::move(r));
  }

  // 10a. Monotone entropy curves on 25-point grids.
  {
    struct GridSpec {
      Family family;
      double lo, hi;
    };
    const double noisy_hi = 1.0 / 3.0;
    const GridSpec grids[] = {{Family::hardy, 0.0, hardy_max},
                              {Family::noisy_hardy, 0.0, noisy_hi},
                              {Family::cabello, 0.0, cab_max},
                              {Family::dw_cabello, 0.0, dw_max},
                              {Family::chsh, 2.0, 2.0 * std::sqrt(2.0)}};
    for (const auto& g : grids) {
      const auto rows = sweep(g.family, linspace(g.lo, g.hi, 25), l1, copts);
      double worst_dip = 0.0;
      bool all_ok = true;
      for (size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].status != sdp::Status::Optimal) all_ok = false;
        if (i > 0 && rows[i].status == sdp::Status::Optimal &&
            rows[i - 1].status == sdp::Status::Optimal)
          worst_dip = std::max(worst_dip, rows[i - 1].h_min - rows[i].h_min);
      }
      CheckResult r;
      r.id = "10a";
      r.measured = worst_dip;
      r.expected = 0.0;
      r.tolerance = 1e-6;
      if (g.family == Family::noisy_hardy) {
        // The noisy-Hardy entropy curve is genuinely U-shaped (it dips to
        // the CHSH value near eps ~ 0.076 before climbing to log2 3), so
        // this family is exempt from the monotonicity requirement; the
        // check covers curve completeness instead.
        r.name = "complete H_min curve: noisy-hardy";
        r.pass = all_ok;
        char note[64];
        std::snprintf(note, sizeof(note), "largest dip %.4f (expected, non-monotone family)",
                      worst_dip);
        r.detail = note;
      } else {
        r.name = std::string("monotone H_min curve: ") + to_string(g.family);
        r.pass = all_ok && worst_dip <= 1e-6;
        if (!all_ok) r.detail = "non-optimal point in sweep";
      }
      rep.add(std::move(r));
    }
  }

  // 10b. Sandwich per family.
  {
    const std::pair<Family, double> cases[] = {{Family::hardy, 0.0},
                                               {Family::noisy_hardy, 1.0 / 6.0},
                                               {Family::cabello, 0.0},
                                               {Family::dw_cabello, 0.0},
                                               {Family::chsh, 0.0}};
    for (const auto& [family, param] : cases) {
      const double lower =
          qcache.get_or_compute(family, param, opts.qubit_restarts, opts.seed, opts.workers);
      const double upper = max_feasible(family, param, l1, opts.solve);
      CheckResult r;
      r.id = "10b";
      r.name = std::string("sandwich qubit <= relaxation: ") + to_string(family);
      r.measured = lower - upper;
      r.expected = 0.0;
      r.tolerance = 1e-5;
      r.pass = lower <= upper + 1e-5;
      rep.add(std::move(r));
    }
  }

  // 10c. Moment matrices of random qubit strategies are PSD.
  {
    std::mt19937_64 gen(opts.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> n(0.0, 1.0);
    const auto st = npa::build_structure(l1);
    double worst = 1e9;
    for (int trial = 0; trial < 100; ++trial) {
      qubit::QubitStrategy s;
      for (int i = 0; i < 4; ++i) s.state(i) = std::complex<double>(n(gen), n(gen));
      s.state /= s.state.norm();
      for (auto& m : s.meas) m = {u(gen) * 3.14159265358979, u(gen) * 6.28318530717959};
      Eigen::MatrixXd mm(st.size, st.size);
      for (int i = 0; i < st.size; ++i)
        for (int j = 0; j < st.size; ++j) {
          npa::Word w = npa::reversed(st.basis[i].word);
          w.insert(w.end(), st.basis[j].word.begin(), st.basis[j].word.end());
          mm(i, j) = qubit::moment_value(s, npa::canonicalize(w));
        }
      mm = 0.5 * (mm + mm.transpose());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mm, Eigen::EigenvaluesOnly);
      worst = std::min(worst, es.eigenvalues().minCoeff());
    }
    rep.at_least("10c", "min eigenvalue of 100 qubit moment matrices", worst, -1e-10);
  }

  // 10d. Canonicalization idempotence, exhaustive to word length 6.
  {
    std::vector<npa::Word> words = {npa::Word{}};
    int mism = 0;
    size_t total = 0;
    for (int len = 1; len <= 6; ++len) {
      std::vector<npa::Word> next;
      for (const auto& base : words) {
        if (static_cast<int>(base.size()) != len - 1) continue;
        for (int l = 0; l < 4; ++l) {
          npa::Word w = base;
          w.push_back(static_cast<npa::Letter>(l));
          next.push_back(w);
        }
      }
      for (const auto& w : next) {
        const auto once = npa::canonicalize(w);
        if (!(npa::canonicalize(once.word) == once)) ++mism;
        ++total;
      }
      words.insert(words.end(), next.begin(), next.end());
    }
    CheckResult r;
    r.id = "10d";
    r.name = "canonicalize idempotent on all words up to length 6";
    r.measured = mism;
    r.expected = 0.0;
    r.tolerance = 0.0;
    r.pass = (mism == 0) && total == 5460;
    r.detail = std::to_string(total) + " words";
    rep.add(std::move(r));
  }

  // 10e. LP solve vs exhaustive vertex scan on random simplex programs.
  {
    std::mt19937_64 gen(opts.seed + 1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
      const int n = 3 + static_cast<int>(gen() % 14);
      sdp::SdpProblem p;
      p.n_vars = n;
      double best_c = -2.0;
      for (int i = 0; i < n; ++i) {
        const double c = u(gen);
        best_c = std::max(best_c, c);
        p.objective.add(i, c);
        p.ineqs.push_back({sdp::LinearForm::variable(i, -1.0), 0.0});
      }
      sdp::LinearForm sum;
      for (int i = 0; i < n; ++i) sum.add(i, 1.0);
      p.eqs.push_back({sum, 1.0});
      const auto sol = sdp::solve(p, opts.solve);
      worst = std::max(worst, std::abs(sol.value - best_c));
      if (sol.status != sdp::Status::Optimal) worst = 1.0;
    }
    rep.at_most("10e", "LP vs vertex scan on 50 random simplex programs", worst, 1e-7);
  }

  // 10f. CH values over the 16 deterministic vertices.
  {
    double lo = 1e9, hi = -1e9;
    for (const auto& d : bell::enumerate_deterministic()) {
      const double v = bell::ch_value(bell::behavior_of(d));
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    CheckResult r;
    r.id = "10f";
    r.name = "CH over deterministic vertices spans [-1, 0]";
    r.measured = lo;
    r.expected = -1.0;
    r.tolerance = 1e-12;
    r.pass = std::abs(lo + 1.0) <= 1e-12 && std::abs(hi) <= 1e-12;
    r.detail = "max = " + std::to_string(hi);
    rep.add(std::move(r));
  }

  if (opts.include_level2) {
    // Hierarchy monotonicity: level 2 certifies at most as much guessing
    // probability as level 1+AB on the same constraint set (noisy-hardy is
    // excluded here: its pinned delta is recomputed per level by design,
    // so the two problems are not nested).
    const std::pair<Family, double> cases[] = {
        {Family::hardy, 0.06}, {Family::cabello, 0.09}, {Family::dw_cabello, 0.05}};
    for (const auto& [family, param] : cases) {
      const auto spec = build(family, param, l1, opts.solve);
      const auto r1 = certify(spec, l1, copts);
      const auto r2 = certify(spec, npa::Level::l2, copts);
      CheckResult r;
      r.id = "h2";
      r.name = std::string("level-2 p_guess <= level-1+AB: ") + to_string(family);
      r.measured = r2.p_guess - r1.p_guess;
      r.expected = 0.0;
      r.tolerance = 1e-6;
      r.pass = r1.status == sdp::Status::Optimal && r2.status == sdp::Status::Optimal &&
               r2.p_guess <= r1.p_guess + 1e-6;
      rep.add(std::move(r));
    }
    const Family fams[] = {Family::hardy, Family::cabello, Family::dw_cabello};
    for (Family family : fams) {
      const double v1 = max_feasible(family, 0, l1, opts.solve);
      const double v2 = max_feasible(family, 0, npa::Level::l2, opts.solve);
      CheckResult r;
      r.id = "h2";
      r.name = std::string("level-2 maximum <= level-1+AB: ") + to_string(family);
      r.measured = v2 - v1;
      r.expected = 0.0;
      r.tolerance = 1e-7;
      r.pass = v2 <= v1 + 1e-7;
      rep.add(std::move(r));
    }
  }

  return rep.results;
}

}  // namespace hardyrand::verify
