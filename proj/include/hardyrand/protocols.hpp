#pragma once
// The paradox programs: Hardy, noisy Hardy, Cabello, the dimension-witness
// Cabello variant, and a CHSH baseline. Builds constraint sets, certifies
// guessing probability / min-entropy against the moment relaxation, and
// assembles the LHV <= qubit <= relaxation sandwich.

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "hardyrand/bell.hpp"
#include "hardyrand/lhv.hpp"
#include "hardyrand/npa.hpp"
#include "hardyrand/qubit.hpp"
#include "hardyrand/sdp.hpp"

namespace hardyrand::protocols {

enum class Family { hardy, noisy_hardy, cabello, dw_cabello, chsh };
const char* to_string(Family f);
Family family_from_string(const std::string& s);

enum class ObjectiveKind { pair_guessing, conditional_guessing };

struct ProtocolSpec {
  Family family = Family::hardy;
  double parameter = 0.0;
  std::vector<bell::LinearConstraint> eqs;
  std::vector<bell::LinearConstraint> ineqs;
  ObjectiveKind objective_kind = ObjectiveKind::pair_guessing;
};

/// The family's figure of merit as a behavior expression.
bell::LinearExpr figure_of_merit(Family f);

/// Family constraints without the parameter pin (the sets the classical
/// baseline and the qubit search optimize over). For noisy-hardy the
/// parameter is the noise bound epsilon.
void structural_constraints(Family f, double parameter,
                            std::vector<bell::LinearConstraint>& eqs,
                            std::vector<bell::LinearConstraint>& ineqs);

/// Maximal feasible figure of merit at the given relaxation level
/// (epsilon-dependent for noisy-hardy, analytic 2*sqrt(2) for chsh).
/// Throws std::runtime_error on solver failure.
double max_feasible(Family f, double parameter, npa::Level level,
                    const sdp::SolveOptions& solve = {});

/// Full constraint set including the parameter pin; for noisy-hardy the
/// pinned joint is delta(epsilon) = max_feasible computed first.
ProtocolSpec build(Family f, double parameter, npa::Level level = npa::Level::l1ab,
                   const sdp::SolveOptions& solve = {});

struct CertificationResult {
  sdp::Status status = sdp::Status::SolverFailure;
  double parameter = 0.0;
  /// Guessing value per outcome pair (a,b) of the (A0,B0) block in
  /// lexicographic order (-,-), (-,+), (+,-), (+,+); conditional families
  /// report 2*p(a,b|00).
  std::array<double, 4> per_outcome{};
  double p_guess = std::numeric_limits<double>::quiet_NaN();
  double h_min = std::numeric_limits<double>::quiet_NaN();
  npa::Level npa_level = npa::Level::l1ab;
  double gap = 0.0;
  std::optional<double> lhv_baseline;  // nullopt: no local model exists
  double qubit_lower = std::numeric_limits<double>::quiet_NaN();
  std::string note;  // offending outcome pair on solver failure
};

/// Cache of qubit achievability bounds, keyed per family and parameter;
/// safe for concurrent use.
class QubitLowerCache {
 public:
  double get_or_compute(Family f, double parameter, int restarts, uint64_t seed, int workers);

 private:
  std::mutex mu_;
  std::map<std::pair<int, double>, double> values_;
};

struct CertifyOptions {
  sdp::SolveOptions solve;
  bool with_lhv = true;
  bool with_qubit = true;
  int qubit_restarts = 64;
  uint64_t seed = 1;
  int workers = 1;
  QubitLowerCache* cache = nullptr;
};

/// Worst-case guessing probability of the (A0,B0) outcomes over all
/// relaxation-feasible behaviors meeting the protocol constraints;
/// H_min = -log2(p_guess).
CertificationResult certify(const ProtocolSpec& spec, npa::Level level,
                            const CertifyOptions& opts = {});

/// certify over a parameter grid; per-point failures recorded in the
/// row's status, the sweep continues.
std::vector<CertificationResult> sweep(Family f, const std::vector<double>& grid,
                                       npa::Level level, const CertifyOptions& opts = {});

/// Classical baseline: LP maximum of the figure of merit under the
/// structural constraints.
lhv::LhvResult lhv_baseline(Family f, double parameter, const sdp::SolveOptions& solve = {});

/// Achievability search: qubit maximum of the figure of merit under the
/// structural constraints.
qubit::OptimizeResult qubit_optimize(Family f, double parameter, int restarts, uint64_t seed,
                                     int workers = 1);

/// Certification for a fully specified behavior: all eight moment-level
/// quantities pinned to the observed table. The LHV baseline is the
/// largest (A0,B0) entry when a local model reproduces the behavior, and
/// absent otherwise.
CertificationResult certify_behavior(const bell::Behavior& b, npa::Level level,
                                     const CertifyOptions& opts = {});

}  // namespace hardyrand::protocols
