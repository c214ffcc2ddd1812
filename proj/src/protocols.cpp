#include "hardyrand/protocols.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace hardyrand::protocols {

namespace {

constexpr double kChshTsirelson = 2.0 * 1.4142135623730951;

bell::LinearExpr joint_pp(int x, int y) { return bell::LinearExpr::joint(1, 1, x, y); }

// The three Hardy constraints: p(+,+|A0,B0), p(+,-|A1,B0), p(-,+|A0,B1).
std::array<bell::LinearExpr, 3> hardy_lhs() {
  return {bell::LinearExpr::joint(1, 1, 0, 0), bell::LinearExpr::joint(1, 0, 1, 0),
          bell::LinearExpr::joint(0, 1, 0, 1)};
}

sdp::LinearForm moment_objective(const npa::MomentStructure& st, const bell::LinearExpr& e) {
  return npa::to_moment_form(st, e);
}

sdp::SdpProblem assemble_protocol(const npa::MomentStructure& st, const bell::LinearExpr& objective,
                                  const std::vector<bell::LinearConstraint>& eqs,
                                  const std::vector<bell::LinearConstraint>& ineqs) {
  std::vector<std::pair<sdp::LinearForm, double>> meqs, mineqs;
  for (const auto& c : eqs) meqs.push_back({npa::to_moment_form(st, c.expr), c.rhs});
  for (const auto& c : ineqs) mineqs.push_back({npa::to_moment_form(st, c.expr), c.rhs});
  return npa::assemble(st, moment_objective(st, objective), meqs, mineqs);
}

const char* outcome_pair_name(int a, int b) {
  static const char* names[2][2] = {{"(-,-)", "(-,+)"}, {"(+,-)", "(+,+)"}};
  return names[a][b];
}

}  // namespace

const char* to_string(Family f) {
  switch (f) {
    case Family::hardy: return "hardy";
    case Family::noisy_hardy: return "noisy-hardy";
    case Family::cabello: return "cabello";
    case Family::dw_cabello: return "dw-cabello";
    case Family::chsh: return "chsh";
  }
  return "?";
}

Family family_from_string(const std::string& s) {
  if (s == "hardy") return Family::hardy;
  if (s == "noisy-hardy") return Family::noisy_hardy;
  if (s == "cabello") return Family::cabello;
  if (s == "dw-cabello") return Family::dw_cabello;
  if (s == "chsh") return Family::chsh;
  throw std::invalid_argument("unknown protocol family: " + s);
}

bell::LinearExpr figure_of_merit(Family f) {
  switch (f) {
    case Family::hardy:
    case Family::noisy_hardy:
      return joint_pp(1, 1);
    case Family::cabello:
    case Family::dw_cabello: {
      bell::LinearExpr e = joint_pp(1, 1);
      e.add(joint_pp(0, 0), -1.0);
      return e;
    }
    case Family::chsh:
      return bell::LinearExpr::chsh();
  }
  throw std::logic_error("unreachable");
}

void structural_constraints(Family f, double parameter,
                            std::vector<bell::LinearConstraint>& eqs,
                            std::vector<bell::LinearConstraint>& ineqs) {
  eqs.clear();
  ineqs.clear();
  const auto hardy3 = hardy_lhs();
  switch (f) {
    case Family::hardy:
      for (const auto& e : hardy3) eqs.push_back({e, 0.0});
      break;
    case Family::noisy_hardy:
      // At zero noise the bounds p <= 0 on probabilities are equalities;
      // stating them as such keeps the relaxation's facial presolve exact.
      if (parameter >= 0.0 && parameter < 1e-9) {
        for (const auto& e : hardy3) eqs.push_back({e, 0.0});
      } else {
        for (const auto& e : hardy3) ineqs.push_back({e, parameter});
      }
      break;
    case Family::dw_cabello:
      // Alice's outcomes are uniform whichever block computes the marginal.
      for (int x = 0; x < 2; ++x)
        for (int y_block = 0; y_block < 2; ++y_block)
          eqs.push_back({bell::LinearExpr::marginal_a(1, x, y_block), 0.5});
      [[fallthrough]];
    case Family::cabello:
      eqs.push_back({bell::LinearExpr::joint(1, 0, 1, 0), 0.0});
      eqs.push_back({bell::LinearExpr::joint(0, 1, 0, 1), 0.0});
      break;
    case Family::chsh:
      break;
  }
}

double max_feasible(Family f, double parameter, npa::Level level, const sdp::SolveOptions& solve) {
  if (f == Family::chsh) return kChshTsirelson;
  std::vector<bell::LinearConstraint> eqs, ineqs;
  structural_constraints(f, parameter, eqs, ineqs);
  const auto st = npa::build_structure(level);
  const auto problem = assemble_protocol(st, figure_of_merit(f), eqs, ineqs);
  const auto sol = sdp::solve(problem, solve);
  if (sol.status != sdp::Status::Optimal)
    throw std::runtime_error(std::string("max_feasible(") + to_string(f) +
                             "): solver returned " + sdp::to_string(sol.status));
  return sol.value;
}

ProtocolSpec build(Family f, double parameter, npa::Level level, const sdp::SolveOptions& solve) {
  ProtocolSpec spec;
  spec.family = f;
  spec.parameter = parameter;
  spec.objective_kind =
      (f == Family::dw_cabello) ? ObjectiveKind::conditional_guessing : ObjectiveKind::pair_guessing;
  structural_constraints(f, parameter, spec.eqs, spec.ineqs);
  double pin = parameter;
  bool solver_derived = false;
  const double fmax = max_feasible(f, parameter, level, solve);
  if (f == Family::noisy_hardy) {
    pin = fmax;
    solver_derived = true;
  } else if (parameter > fmax && parameter - fmax <= 5e-4) {
    // Published maxima are rounded to five digits and can land slightly
    // above the computed boundary; treat such inputs as the maximum
    // itself. Larger excesses stay as stated and come back Infeasible.
    pin = fmax;
    solver_derived = true;
  }
  if (solver_derived) {
    // A computed maximum is certified only to the solver tolerances, so
    // half the time it sits a hair beyond the boundary. Nudge inside by
    // the measured shortfall until the pin verifies feasible.
    const auto st = npa::build_structure(level);
    for (int round = 0; round < 4; ++round) {
      auto eqs = spec.eqs;
      eqs.push_back({figure_of_merit(f), pin});
      const auto feas =
          sdp::feasibility(assemble_protocol(st, bell::LinearExpr{}, eqs, spec.ineqs), solve);
      if (feas.margin >= -solve.feas_tol) break;
      pin -= 2.0 * (-feas.margin) + 1e-9;
    }
  }
  spec.eqs.push_back({figure_of_merit(f), pin});
  return spec;
}

double QubitLowerCache::get_or_compute(Family f, double parameter, int restarts, uint64_t seed,
                                       int workers) {
  // Only noisy-hardy's structural set depends on the parameter.
  const double key_param = (f == Family::noisy_hardy) ? parameter : 0.0;
  const std::pair<int, double> key{static_cast<int>(f), key_param};
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = values_.find(key);
    if (it != values_.end()) return it->second;
  }
  const double value = qubit_optimize(f, parameter, restarts, seed, workers).value;
  std::lock_guard<std::mutex> lock(mu_);
  values_.emplace(key, value);
  return value;
}

CertificationResult certify(const ProtocolSpec& spec, npa::Level level,
                            const CertifyOptions& opts) {
  CertificationResult res;
  res.parameter = spec.parameter;
  res.npa_level = level;

  const auto st = npa::build_structure(level);
  const double scale = (spec.objective_kind == ObjectiveKind::conditional_guessing) ? 2.0 : 1.0;

  res.status = sdp::Status::Optimal;
  double p_guess = 0.0, gap = 0.0;
  for (int a = 0; a < 2 && res.status == sdp::Status::Optimal; ++a) {
    for (int b = 0; b < 2 && res.status == sdp::Status::Optimal; ++b) {
      bell::LinearExpr target = bell::LinearExpr::joint(a, b, 0, 0);
      if (scale != 1.0) {
        bell::LinearExpr scaled;
        scaled.add(target, scale);
        target = scaled;
      }
      sdp::SdpProblem problem;
      try {
        problem = assemble_protocol(st, target, spec.eqs, spec.ineqs);
      } catch (const npa::TriviallyInfeasible&) {
        res.status = sdp::Status::Infeasible;
        break;
      }
      const auto sol = sdp::solve(problem, opts.solve);
      if (sol.status != sdp::Status::Optimal) {
        res.status = sol.status;
        if (sol.status == sdp::Status::SolverFailure)
          res.note = std::string("solver failure on outcome ") + outcome_pair_name(a, b);
        break;
      }
      res.per_outcome[a * 2 + b] = sol.value;
      p_guess = std::max(p_guess, sol.value);
      gap = std::max(gap, sol.gap);
    }
  }

  if (res.status == sdp::Status::Optimal) {
    res.p_guess = std::min(std::max(p_guess, 1e-12), 1.0);
    res.h_min = -std::log2(res.p_guess);
    res.gap = gap;
  }

  if (opts.with_lhv) {
    const auto lhv_res = lhv_baseline(spec.family, spec.parameter, opts.solve);
    if (lhv_res.status == sdp::Status::Optimal) res.lhv_baseline = lhv_res.value;
  }
  if (opts.with_qubit) {
    if (opts.cache) {
      res.qubit_lower = opts.cache->get_or_compute(spec.family, spec.parameter,
                                                   opts.qubit_restarts, opts.seed, opts.workers);
    } else {
      res.qubit_lower =
          qubit_optimize(spec.family, spec.parameter, opts.qubit_restarts, opts.seed, opts.workers)
              .value;
    }
  }
  return res;
}

std::vector<CertificationResult> sweep(Family f, const std::vector<double>& grid, npa::Level level,
                                       const CertifyOptions& opts) {
  std::vector<CertificationResult> rows(grid.size());
  QubitLowerCache local_cache;
  CertifyOptions point_opts = opts;
  if (!point_opts.cache) point_opts.cache = &local_cache;

  auto run_point = [&](size_t i) {
    try {
      const ProtocolSpec spec = build(f, grid[i], level, opts.solve);
      rows[i] = certify(spec, level, point_opts);
    } catch (const std::exception& e) {
      rows[i].status = sdp::Status::SolverFailure;
      rows[i].parameter = grid[i];
      rows[i].npa_level = level;
      rows[i].note = e.what();
    }
  };

  const int workers = std::max(1, std::min<int>(opts.workers, static_cast<int>(grid.size())));
  if (workers == 1) {
    for (size_t i = 0; i < grid.size(); ++i) run_point(i);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (size_t i = next.fetch_add(1); i < grid.size(); i = next.fetch_add(1)) run_point(i);
      });
    for (auto& t : pool) t.join();
  }
  return rows;
}

lhv::LhvResult lhv_baseline(Family f, double parameter, const sdp::SolveOptions& solve) {
  std::vector<bell::LinearConstraint> eqs, ineqs;
  structural_constraints(f, parameter, eqs, ineqs);
  return lhv::lhv_optimize(figure_of_merit(f), eqs, ineqs, solve);
}

qubit::OptimizeResult qubit_optimize(Family f, double parameter, int restarts, uint64_t seed,
                                     int workers) {
  std::vector<bell::LinearConstraint> eqs, ineqs;
  structural_constraints(f, parameter, eqs, ineqs);
  qubit::OptimizeOptions opts;
  opts.restarts = restarts;
  opts.seed = seed;
  opts.workers = workers;
  return qubit::optimize(figure_of_merit(f), eqs, ineqs, opts);
}

CertificationResult certify_behavior(const bell::Behavior& b, npa::Level level,
                                     const CertifyOptions& opts) {
  const auto report = bell::validate(b);
  if (!report.empty())
    throw std::invalid_argument("certify_behavior: invalid behavior (" + report.front().what +
                                ")");
  const auto derived = bell::derived_entries(b);

  ProtocolSpec spec;
  spec.family = Family::hardy;  // unused; constraints fully pin the statistics
  spec.parameter = std::numeric_limits<double>::quiet_NaN();
  for (int x = 0; x < 2; ++x)
    spec.eqs.push_back({bell::LinearExpr::marginal_a(1, x, 0), derived.pa[x]});
  for (int y = 0; y < 2; ++y)
    spec.eqs.push_back({bell::LinearExpr::marginal_b(1, y, 0), derived.pb[y]});
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      spec.eqs.push_back({bell::LinearExpr::joint(1, 1, x, y), derived.joint[x][y]});

  CertifyOptions no_extras = opts;
  no_extras.with_lhv = false;
  no_extras.with_qubit = false;
  CertificationResult res = certify(spec, level, no_extras);

  if (opts.with_lhv) {
    // Baseline: the largest (A0,B0) entry if a local model reproduces b.
    const auto lhv_res = lhv::lhv_optimize(bell::LinearExpr::joint(1, 1, 0, 0), spec.eqs, {},
                                           opts.solve);
    if (lhv_res.status != sdp::Status::Infeasible) {
      double best = 0.0;
      for (int a = 0; a < 2; ++a)
        for (int bo = 0; bo < 2; ++bo) best = std::max(best, b(a, bo, 0, 0));
      res.lhv_baseline = best;
    }
  }
  res.qubit_lower = 0.0;  // no achievability search in behavior mode
  return res;
}

}  // namespace hardyrand::protocols
