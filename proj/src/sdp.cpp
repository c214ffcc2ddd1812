#include "hardyrand/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace hardyrand::sdp {

const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::SolverFailure: return "solver_failure";
  }
  return "?";
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Reduced cone problem: maximize c.v + c0 subject to
//   G0_k + sum_j v_j G_jk  PSD for every block k.
// Equalities of the user problem are eliminated before this form is built.
// ---------------------------------------------------------------------------

struct ConeBlock {
  int dim = 0;
  MatrixXd g0;
  std::vector<MatrixXd> g;  // one dense coefficient per reduced variable
};

struct ConeProblem {
  int n = 0;
  double c0 = 0.0;
  VectorXd c;
  std::vector<ConeBlock> blocks;

  int total_dim() const {
    int m = 0;
    for (const auto& b : blocks) m += b.dim;
    return m;
  }
};

double sym_min_eig(const MatrixXd& m) {
  if (m.rows() == 1) return m(0, 0);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// Largest alpha with m + alpha*dm staying PSD (m assumed PD).
double max_step(const MatrixXd& m, const MatrixXd& dm) {
  if (m.rows() == 1) {
    if (dm(0, 0) >= 0) return kInf;
    return std::max(m(0, 0), 0.0) / -dm(0, 0);
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(m);
  const VectorXd lam = es.eigenvalues().cwiseMax(1e-300);
  const MatrixXd qis = es.eigenvectors() * lam.cwiseSqrt().cwiseInverse().asDiagonal();
  const MatrixXd b = qis.transpose() * dm * qis;
  Eigen::SelfAdjointEigenSolver<MatrixXd> esb(0.5 * (b + b.transpose()), Eigen::EigenvaluesOnly);
  const double lmin = esb.eigenvalues().minCoeff();
  if (lmin >= -1e-16) return kInf;
  return -1.0 / lmin;
}

struct IpmOutcome {
  bool converged = false;
  VectorXd v;
  double dual_obj = std::numeric_limits<double>::quiet_NaN();
  double primal_obj = std::numeric_limits<double>::quiet_NaN();
  double gap = kInf;
  double rp = kInf;
  double rd = kInf;
  int iterations = 0;
};

// Primal-dual NT path following with a Mehrotra-style adaptive centering
// weight. Internally runs on the standard pair
//   (P) min <C,X>  s.t. <A_j,X> = b_j, X PSD
//   (D) max b.y    s.t. C - sum_j y_j A_j = S PSD
// with C = G0, A_j = -G_j, b = c, so (D) is exactly the cone problem above.
IpmOutcome ipm_solve(const ConeProblem& cp, double gap_stop, double feas_stop, int max_iters,
                     const VectorXd* warm_y = nullptr) {
  const int n = cp.n;
  const int nb = static_cast<int>(cp.blocks.size());
  const int m = cp.total_dim();

  std::vector<MatrixXd> cmat(nb);
  std::vector<std::vector<MatrixXd>> amat(nb);  // amat[k][j] = -G_jk
  double scale = 1.0;
  for (int k = 0; k < nb; ++k) {
    cmat[k] = cp.blocks[k].g0;
    scale = std::max(scale, cmat[k].cwiseAbs().maxCoeff());
    amat[k].resize(n);
    for (int j = 0; j < n; ++j) {
      amat[k][j] = -cp.blocks[k].g[j];
      scale = std::max(scale, amat[k][j].cwiseAbs().maxCoeff());
    }
  }
  const VectorXd& b = cp.c;
  if (n > 0) scale = std::max(scale, b.cwiseAbs().maxCoeff());

  const double eta = std::max(5.0, 2.0 * scale);
  std::vector<MatrixXd> X(nb), S(nb);
  VectorXd y = VectorXd::Zero(n);
  bool warm = false;
  if (warm_y && warm_y->size() == n) {
    // Adopt a dual-feasible warm start only if it is safely interior.
    double lmin = kInf;
    std::vector<MatrixXd> strial(nb);
    for (int k = 0; k < nb; ++k) {
      strial[k] = cmat[k];
      for (int j = 0; j < n; ++j) strial[k] -= (*warm_y)(j) * amat[k][j];
      lmin = std::min(lmin, sym_min_eig(strial[k]));
    }
    if (lmin > 1e-6) {
      y = *warm_y;
      S = strial;
      warm = true;
    }
  }
  for (int k = 0; k < nb; ++k) {
    X[k] = eta * MatrixXd::Identity(cp.blocks[k].dim, cp.blocks[k].dim);
    if (!warm) S[k] = eta * MatrixXd::Identity(cp.blocks[k].dim, cp.blocks[k].dim);
  }

  IpmOutcome out;
  double best_merit = kInf;
  int last_improve = 0;
  int frozen_steps = 0;
  const bool trace = std::getenv("HARDYRAND_SDP_TRACE") != nullptr;

  VectorXd rp = VectorXd::Zero(n);
  std::vector<MatrixXd> Rd(nb), W(nb), Sinv(nb);
  std::vector<std::vector<MatrixXd>> WAW(nb);
  std::vector<MatrixXd> dX(nb), dS(nb);
  VectorXd dy(n);

  for (int iter = 0; iter < max_iters; ++iter) {
    double pobj = 0.0, mu = 0.0, rd_norm = 0.0;
    for (int j = 0; j < n; ++j) rp(j) = b(j);
    for (int k = 0; k < nb; ++k) {
      pobj += (cmat[k].array() * X[k].array()).sum();
      mu += (X[k].array() * S[k].array()).sum();
      for (int j = 0; j < n; ++j) rp(j) -= (amat[k][j].array() * X[k].array()).sum();
      Rd[k] = cmat[k] - S[k];
      for (int j = 0; j < n; ++j) Rd[k] -= y(j) * amat[k][j];
      rd_norm = std::max(rd_norm, Rd[k].cwiseAbs().maxCoeff());
    }
    mu /= std::max(1, m);
    const double dobj = b.dot(y);
    const double rp_norm = (n > 0) ? rp.cwiseAbs().maxCoeff() : 0.0;
    const double gap_abs = std::abs(pobj - dobj);

    if (trace)
      std::fprintf(stderr, "ipm it=%3d mu=%9.2e rp=%9.2e rd=%9.2e gap=%9.2e pobj=%.9f dobj=%.9f\n",
                   iter, mu, rp_norm, rd_norm, gap_abs, pobj, dobj);
    const double merit = std::max({rp_norm, rd_norm, gap_abs});
    if (merit < best_merit) {
      if (merit < 0.98 * best_merit) last_improve = iter;
      best_merit = merit;
      out.v = y;
      out.dual_obj = dobj + cp.c0;
      out.primal_obj = pobj + cp.c0;
      out.gap = gap_abs;
      out.rp = rp_norm;
      out.rd = rd_norm;
      out.iterations = iter;
    }
    // Degenerate slices (structurally singular cones) floor the attainable
    // primal residual near 1e-9; the user-facing residual of the returned
    // point is checked independently by the caller.
    const double feas_floor = std::max(0.5 * feas_stop, 2e-9);
    const bool required_ok =
        out.rp <= feas_floor && out.rd <= feas_floor && out.gap <= 0.5 * gap_stop;
    // Once the required tolerances hold, keep polishing while progress
    // lasts; deep iterates sharpen the argmax, not just the value.
    if (rp_norm <= 1e-12 && rd_norm <= 1e-12 && gap_abs <= 2e-12) {
      out.converged = true;
      return out;
    }
    if (required_ok && iter - last_improve >= 6) {
      out.converged = true;
      return out;
    }
    if (iter - last_improve > 40) {  // stalled
      out.converged = required_ok;
      return out;
    }
    if (mu <= 0) break;  // numerical exhaustion; best iterate already kept

    // Nesterov-Todd scaling point per block: W S W = X.
    for (int k = 0; k < nb; ++k) {
      const int d = cp.blocks[k].dim;
      if (d == 1) {
        const double sx = std::max(X[k](0, 0), 1e-300);
        const double ss = std::max(S[k](0, 0), 1e-300);
        W[k] = MatrixXd::Constant(1, 1, std::sqrt(sx / ss));
        Sinv[k] = MatrixXd::Constant(1, 1, 1.0 / ss);
      } else {
        Eigen::SelfAdjointEigenSolver<MatrixXd> ex(X[k]);
        const VectorXd lx =
            ex.eigenvalues().cwiseMax(1e-16 * std::max(ex.eigenvalues().maxCoeff(), 1e-280));
        const MatrixXd xh =
            ex.eigenvectors() * lx.cwiseSqrt().asDiagonal() * ex.eigenvectors().transpose();
        MatrixXd mid = xh * S[k] * xh;
        mid = 0.5 * (mid + mid.transpose());
        Eigen::SelfAdjointEigenSolver<MatrixXd> em(mid);
        const VectorXd lm =
            em.eigenvalues().cwiseMax(1e-16 * std::max(em.eigenvalues().maxCoeff(), 1e-280));
        const MatrixXd misqrt = em.eigenvectors() * lm.cwiseSqrt().cwiseInverse().asDiagonal() *
                                em.eigenvectors().transpose();
        W[k] = xh * misqrt * xh;
        W[k] = 0.5 * (W[k] + W[k].transpose());
        const MatrixXd minv =
            em.eigenvectors() * lm.cwiseInverse().asDiagonal() * em.eigenvectors().transpose();
        Sinv[k] = xh * minv * xh;
        Sinv[k] = 0.5 * (Sinv[k] + Sinv[k].transpose());
      }
    }

    // Schur complement M_jl = sum_k <A_jk, W A_lk W>.
    MatrixXd M = MatrixXd::Zero(n, n);
    for (int k = 0; k < nb; ++k) {
      WAW[k].resize(n);
      for (int j = 0; j < n; ++j) WAW[k][j] = W[k] * amat[k][j] * W[k];
      for (int j = 0; j < n; ++j)
        for (int l = j; l < n; ++l) M(j, l) += (amat[k][j].array() * WAW[k][l].array()).sum();
    }
    M = MatrixXd(M.selfadjointView<Eigen::Upper>());

    // Equilibrated, lightly regularized Cholesky with iterative refinement
    // against the original matrix; the Schur complement gets badly scaled
    // once bound blocks go active.
    const VectorXd dscale = M.diagonal().cwiseMax(1e-30).cwiseSqrt().cwiseInverse();
    MatrixXd Ms = dscale.asDiagonal() * M * dscale.asDiagonal();
    Ms.diagonal().array() += 1e-14;
    Eigen::LLT<MatrixXd> llt(Ms);
    double jitter = 1e-12;
    int tries = 0;
    while (llt.info() != Eigen::Success && tries < 4) {
      Ms.diagonal().array() += jitter;
      llt.compute(Ms);
      jitter *= 100.0;
      ++tries;
    }
    if (llt.info() != Eigen::Success) break;

    auto solve_schur = [&](const VectorXd& r) {
      VectorXd z = dscale.asDiagonal() * llt.solve(dscale.asDiagonal() * r);
      for (int round = 0; round < 3; ++round) {
        const VectorXd res = r - M * z;
        z += dscale.asDiagonal() * llt.solve(dscale.asDiagonal() * res);
      }
      return z;
    };

    auto direction = [&](double sigma_mu) {
      VectorXd rhs = rp;
      for (int k = 0; k < nb; ++k) {
        const MatrixXd hq = sigma_mu * Sinv[k] - X[k] - W[k] * Rd[k] * W[k];
        for (int j = 0; j < n; ++j) rhs(j) -= (amat[k][j].array() * hq.array()).sum();
      }
      dy = solve_schur(rhs);
      for (int k = 0; k < nb; ++k) {
        dS[k] = Rd[k];
        for (int j = 0; j < n; ++j) dS[k] -= dy(j) * amat[k][j];
        dX[k] = sigma_mu * Sinv[k] - X[k] - W[k] * dS[k] * W[k];
        dX[k] = 0.5 * (dX[k] + dX[k].transpose());
      }
    };

    // Predictor fixes the centering weight sigma, then one combined step.
    direction(0.0);
    double ap = 1.0, ad = 1.0;
    for (int k = 0; k < nb; ++k) {
      ap = std::min(ap, max_step(X[k], dX[k]));
      ad = std::min(ad, max_step(S[k], dS[k]));
    }
    double mu_aff = 0.0;
    for (int k = 0; k < nb; ++k)
      mu_aff += ((X[k] + std::min(ap, 1.0) * dX[k]).array() *
                 (S[k] + std::min(ad, 1.0) * dS[k]).array())
                    .sum();
    mu_aff = std::max(mu_aff / std::max(1, m), 0.0);
    double sigma = std::pow(mu_aff / std::max(mu, 1e-300), 3.0);
    sigma = std::clamp(sigma, 1e-10, 0.9);

    direction(sigma * mu);
    const double tau = (iter < 2) ? 0.90 : (mu > 1e-9 ? 0.99 : 0.999);
    ap = 1.0;
    ad = 1.0;
    for (int k = 0; k < nb; ++k) {
      ap = std::min(ap, tau * max_step(X[k], dX[k]));
      ad = std::min(ad, tau * max_step(S[k], dS[k]));
    }
    if (!(ap > 0) || !(ad > 0) || !std::isfinite(ap) || !std::isfinite(ad)) break;

    // Verify the step keeps both cones PSD; clamped factorizations can
    // overshoot at tiny mu. Halve until safe.
    auto min_eig_after = [&](const std::vector<MatrixXd>& base,
                             const std::vector<MatrixXd>& delta, double a) {
      double lmin = kInf;
      for (int k = 0; k < nb; ++k) lmin = std::min(lmin, sym_min_eig(base[k] + a * delta[k]));
      return lmin;
    };
    int halvings = 0;
    while (halvings < 30 && min_eig_after(X, dX, ap) < 0) {
      ap *= 0.5;
      ++halvings;
    }
    while (halvings < 30 && min_eig_after(S, dS, ad) < 0) {
      ad *= 0.5;
      ++halvings;
    }
    if (halvings >= 30 || (ap < 1e-8 && ad < 1e-8)) {
      ++frozen_steps;
      if (frozen_steps >= 2) break;
    } else {
      frozen_steps = 0;
    }
    for (int k = 0; k < nb; ++k) {
      X[k] += ap * dX[k];
      X[k] = 0.5 * (X[k] + X[k].transpose());
      S[k] += ad * dS[k];
      S[k] = 0.5 * (S[k] + S[k].transpose());
    }
    y += ad * dy;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reduction of the user problem: equality elimination, inequality blocks,
// and facial presolve.
// ---------------------------------------------------------------------------

struct Reduction {
  bool eq_consistent = true;
  double eq_residual = 0.0;
  VectorXd x0;     // particular solution of the equalities
  MatrixXd null;   // orthonormal basis of their kernel (n x n_free)
  ConeProblem cone;
};

// Solve E v = d, compose the affine map x = x0 + N v with the new
// elimination, and substitute into the cone. Returns false when the
// equalities are inconsistent (residual reported through r).
bool eliminate_equalities(Reduction& r, const MatrixXd& E, const VectorXd& d,
                          double consistency_tol = 1e-9) {
  Eigen::FullPivLU<MatrixXd> lu(E);
  lu.setThreshold(1e-11);
  const VectorXd v0 = lu.solve(d);
  r.eq_residual = std::max(r.eq_residual, (E * v0 - d).cwiseAbs().maxCoeff());
  if ((E * v0 - d).cwiseAbs().maxCoeff() > consistency_tol * (1.0 + d.cwiseAbs().maxCoeff())) {
    r.eq_consistent = false;
    return false;
  }
  MatrixXd N2;
  const MatrixXd kernel = lu.kernel();
  if (kernel.cols() == 1 && kernel.isZero(0)) {
    N2 = MatrixXd::Zero(E.cols(), 0);
  } else {
    Eigen::HouseholderQR<MatrixXd> qr(kernel);
    N2 = qr.householderQ() * MatrixXd::Identity(E.cols(), kernel.cols());
  }

  r.x0 += r.null * v0;
  r.null = r.null * N2;

  ConeProblem next;
  next.n = static_cast<int>(N2.cols());
  next.c0 = r.cone.c0 + r.cone.c.dot(v0);
  next.c = N2.transpose() * r.cone.c;
  for (auto& blk : r.cone.blocks) {
    ConeBlock nb;
    nb.dim = blk.dim;
    nb.g0 = blk.g0;
    for (int j = 0; j < r.cone.n; ++j) nb.g0 += v0(j) * blk.g[j];
    nb.g.assign(next.n, MatrixXd::Zero(blk.dim, blk.dim));
    for (int j = 0; j < r.cone.n; ++j)
      for (int k = 0; k < next.n; ++k)
        if (N2(j, k) != 0.0) nb.g[k] += N2(j, k) * blk.g[j];
    next.blocks.push_back(std::move(nb));
  }
  r.cone = std::move(next);
  return true;
}

// Drop variable-free blocks; negative constants mean an infeasible slice.
bool prune_constant_blocks(Reduction& r) {
  std::vector<ConeBlock> kept;
  for (auto& blk : r.cone.blocks) {
    double coeff_mag = 0.0;
    for (const auto& g : blk.g) coeff_mag = std::max(coeff_mag, g.cwiseAbs().maxCoeff());
    if (coeff_mag <= 1e-13) {
      const double lmin = sym_min_eig(blk.g0);
      // Threshold sized to the noise the numerical face cuts can leave
      // behind; a dropped sub-2e-8 violation resurfaces in the final
      // residual check rather than as a false infeasibility verdict.
      if (lmin < -2e-8) {
        r.eq_consistent = false;
        r.eq_residual = std::max(r.eq_residual, -lmin);
        return false;
      }
      continue;
    }
    kept.push_back(std::move(blk));
  }
  r.cone.blocks = std::move(kept);
  return true;
}

// Exact facial reduction: directions u (single coordinates or e_i +- e_j)
// with u' B(v) u identically zero over the slice force B(v) u = 0 on every
// feasible point; those rows become equalities and the block is projected
// onto the complement. The zero-probability constraints of the paradox
// families make such faces the rule, not the exception.
bool facial_presolve(Reduction& r) {
  constexpr double kTol = 1e-11;
  for (int round = 0; round < 6; ++round) {
    if (!prune_constant_blocks(r)) return false;
    const int nf = r.cone.n;

    bool changed = false;
    std::vector<std::pair<VectorXd, double>> new_eqs;  // row . v = rhs
    for (auto& blk : r.cone.blocks) {
      if (blk.dim < 2) continue;
      auto form_of = [&](int i, int j) {
        // affine function of entry (i,j): (constant, coefficients)
        VectorXd coef(nf);
        for (int k = 0; k < nf; ++k) coef(k) = blk.g[k](i, j);
        return std::make_pair(blk.g0(i, j), coef);
      };
      std::vector<VectorXd> nulls;
      auto try_null = [&](const VectorXd& u) {
        double c0 = 0.0;
        VectorXd cv = VectorXd::Zero(nf);
        for (int i = 0; i < blk.dim; ++i)
          for (int j = 0; j < blk.dim; ++j) {
            if (u(i) == 0.0 || u(j) == 0.0) continue;
            auto [fc, fv] = form_of(i, j);
            c0 += u(i) * u(j) * fc;
            cv += u(i) * u(j) * fv;
          }
        const double cmag = cv.size() ? cv.cwiseAbs().maxCoeff() : 0.0;
        if (std::abs(c0) <= kTol && cmag <= kTol) nulls.push_back(u);
      };
      for (int i = 0; i < blk.dim; ++i) {
        VectorXd u = VectorXd::Zero(blk.dim);
        u(i) = 1.0;
        try_null(u);
      }
      for (int i = 0; i < blk.dim; ++i)
        for (int j = i + 1; j < blk.dim; ++j)
          for (double s : {1.0, -1.0}) {
            VectorXd u = VectorXd::Zero(blk.dim);
            u(i) = 1.0;
            u(j) = s;
            try_null(u);
          }
      if (nulls.empty()) continue;

      MatrixXd U(blk.dim, nulls.size());
      for (size_t c = 0; c < nulls.size(); ++c) U.col(c) = nulls[c];
      Eigen::FullPivLU<MatrixXd> ulu(U);
      ulu.setThreshold(1e-9);
      const int rank = static_cast<int>(ulu.rank());
      const MatrixXd uimg = ulu.image(U);
      Eigen::HouseholderQR<MatrixXd> uqr(uimg);
      const MatrixXd Uo = uqr.householderQ() * MatrixXd::Identity(blk.dim, rank);

      // B(v) u = 0 rows become equalities on the slice.
      for (int c = 0; c < rank; ++c) {
        const VectorXd u = Uo.col(c);
        const VectorXd bc = blk.g0 * u;
        for (int i = 0; i < blk.dim; ++i) {
          VectorXd row(nf);
          for (int k = 0; k < nf; ++k) row(k) = (blk.g[k] * u)(i);
          const double rmag = row.size() ? row.cwiseAbs().maxCoeff() : 0.0;
          if (rmag <= kTol) continue;  // constant row
          new_eqs.push_back({row, -bc(i)});
        }
      }

      // Project the block onto the orthogonal complement of the face.
      Eigen::HouseholderQR<MatrixXd> cqr(Uo);
      const MatrixXd q = cqr.householderQ();
      const MatrixXd V = q.rightCols(blk.dim - rank);
      blk.g0 = MatrixXd(V.transpose() * blk.g0 * V);
      blk.g0 = 0.5 * (blk.g0 + blk.g0.transpose());
      for (auto& g : blk.g) {
        g = MatrixXd(V.transpose() * g * V);
        g = 0.5 * (g + g.transpose());
      }
      blk.dim -= rank;
      changed = true;
    }

    // Remove emptied blocks.
    std::erase_if(r.cone.blocks, [](const ConeBlock& b) { return b.dim == 0; });

    if (!new_eqs.empty()) {
      MatrixXd E(new_eqs.size(), nf);
      VectorXd d(new_eqs.size());
      for (size_t i = 0; i < new_eqs.size(); ++i) {
        E.row(i) = new_eqs[i].first.transpose();
        d(i) = new_eqs[i].second;
      }
      if (!eliminate_equalities(r, E, d)) return false;
      changed = true;
    }
    if (!changed) break;
  }
  return prune_constant_blocks(r);
}

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw std::invalid_argument(std::string("sdp: non-finite ") + what);
}

void validate_problem(const SdpProblem& p) {
  if (p.n_vars < 0) throw std::invalid_argument("sdp: negative variable count");
  check_finite(p.objective.constant, "objective constant");
  for (const auto& [i, c] : p.objective.coeffs) {
    if (i < 0 || i >= p.n_vars) throw std::invalid_argument("sdp: objective variable out of range");
    check_finite(c, "objective coefficient");
  }
  auto check_form = [&](const LinearForm& f) {
    check_finite(f.constant, "constraint constant");
    for (const auto& [i, c] : f.coeffs) {
      if (i < 0 || i >= p.n_vars)
        throw std::invalid_argument("sdp: constraint variable out of range");
      check_finite(c, "constraint coefficient");
    }
  };
  for (const auto& [f, rhs] : p.eqs) {
    check_form(f);
    check_finite(rhs, "equality rhs");
  }
  for (const auto& [f, rhs] : p.ineqs) {
    check_form(f);
    check_finite(rhs, "inequality rhs");
  }
  for (const auto& blk : p.psd_blocks) {
    if (blk.dim < 1 || blk.constant.rows() != blk.dim || blk.constant.cols() != blk.dim)
      throw std::invalid_argument("sdp: malformed psd block");
    if (!blk.constant.allFinite()) throw std::invalid_argument("sdp: non-finite psd constant");
    if ((blk.constant - blk.constant.transpose()).cwiseAbs().maxCoeff() > 1e-14)
      throw std::invalid_argument("sdp: asymmetric psd constant");
    for (const auto& [j, g] : blk.coeff) {
      if (j < 0 || j >= p.n_vars) throw std::invalid_argument("sdp: block variable out of range");
      if (g.rows() != blk.dim || g.cols() != blk.dim)
        throw std::invalid_argument("sdp: block coefficient dimension mismatch");
      if (!g.allFinite()) throw std::invalid_argument("sdp: non-finite block coefficient");
      if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-14)
        throw std::invalid_argument("sdp: asymmetric block coefficient");
    }
  }
  if (p.psd_blocks.empty() && p.ineqs.empty())
    throw std::invalid_argument("sdp: problem has no psd block and no inequality");
}

Reduction reduce(const SdpProblem& p) {
  Reduction r;
  const int n = p.n_vars;
  r.x0 = VectorXd::Zero(n);
  r.null = MatrixXd::Identity(n, n);

  ConeProblem& cp = r.cone;
  cp.n = n;
  cp.c = VectorXd::Zero(n);
  for (const auto& [i, c] : p.objective.coeffs) cp.c(i) = c;
  cp.c0 = p.objective.constant;

  for (const auto& blk : p.psd_blocks) {
    ConeBlock cb;
    cb.dim = blk.dim;
    cb.g0 = 0.5 * (blk.constant + blk.constant.transpose());
    cb.g.assign(n, MatrixXd::Zero(blk.dim, blk.dim));
    for (const auto& [i, g] : blk.coeff) cb.g[i] = 0.5 * (g + g.transpose());
    cp.blocks.push_back(std::move(cb));
  }
  for (const auto& [f, rhs] : p.ineqs) {
    ConeBlock cb;
    cb.dim = 1;
    cb.g0 = MatrixXd::Constant(1, 1, rhs - f.constant);
    cb.g.assign(n, MatrixXd::Zero(1, 1));
    for (const auto& [i, c] : f.coeffs) cb.g[i](0, 0) = -c;
    cp.blocks.push_back(std::move(cb));
  }

  const int ke = static_cast<int>(p.eqs.size());
  if (ke > 0) {
    MatrixXd E = MatrixXd::Zero(ke, n);
    VectorXd d(ke);
    for (int i = 0; i < ke; ++i) {
      for (const auto& [j, c] : p.eqs[i].first.coeffs) E(i, j) = c;
      d(i) = p.eqs[i].second - p.eqs[i].first.constant;
    }
    if (!eliminate_equalities(r, E, d)) return r;
  }
  facial_presolve(r);
  return r;
}

// Numerical face cut for slices whose degeneracy is not of the exact
// pair form (a parameter pinned right at the quantum boundary). At a
// max-margin point with margin ~ 0, directions where the center itself is
// numerically singular cannot be interior anywhere; dropping them keeps a
// sound relaxation (the quotient admits everything the face admitted) and
// restores an interior. The final residual check runs against the
// original problem, so an over-cut can only surface as SolverFailure,
// never as a silently wrong Optimal.
bool cut_numerical_face(Reduction& r, const VectorXd& center) {
  constexpr double kCut = 1e-8;
  bool cut_any = false;
  std::vector<std::pair<VectorXd, double>> new_eqs;
  const int nf = r.cone.n;
  for (auto& blk : r.cone.blocks) {
    if (blk.dim < 2) continue;
    MatrixXd B = blk.g0;
    for (int j = 0; j < nf; ++j) B += center(j) * blk.g[j];
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (B + B.transpose()));
    const double lmax = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1.0);
    int ncut = 0;
    while (ncut < blk.dim - 1 && es.eigenvalues()(ncut) < kCut * lmax) ++ncut;
    if (ncut == 0) continue;

    // The face certificate also pins B(v) u = 0 for every cut direction.
    for (int c = 0; c < ncut; ++c) {
      const VectorXd u = es.eigenvectors().col(c);
      const VectorXd bc = blk.g0 * u;
      for (int i = 0; i < blk.dim; ++i) {
        VectorXd row(nf);
        for (int k = 0; k < nf; ++k) row(k) = (blk.g[k] * u)(i);
        const double rmag = row.size() ? row.cwiseAbs().maxCoeff() : 0.0;
        if (rmag <= 1e-7) continue;  // too weak to constrain reliably
        new_eqs.push_back({row, -bc(i)});
      }
    }

    const MatrixXd V = es.eigenvectors().rightCols(blk.dim - ncut);
    blk.g0 = MatrixXd(V.transpose() * blk.g0 * V);
    blk.g0 = 0.5 * (blk.g0 + blk.g0.transpose());
    for (auto& g : blk.g) {
      g = MatrixXd(V.transpose() * g * V);
      g = 0.5 * (g + g.transpose());
    }
    blk.dim -= ncut;
    cut_any = true;
  }
  if (cut_any) {
    std::erase_if(r.cone.blocks, [](const ConeBlock& b) { return b.dim == 0; });
    if (!new_eqs.empty()) {
      MatrixXd E(new_eqs.size(), nf);
      VectorXd d(new_eqs.size());
      for (size_t i = 0; i < new_eqs.size(); ++i) {
        E.row(i) = new_eqs[i].first.transpose();
        d(i) = new_eqs[i].second;
      }
      // Rows carry eigenvector noise; judge consistency loosely and let the
      // final residual check police the answer.
      if (!eliminate_equalities(r, E, d, 1e-6)) return true;
    }
    facial_presolve(r);  // cascade; r.eq_consistent reports contradictions
  }
  return cut_any;
}

// Phase 1: maximize t with every block >= t*I, t capped in [floor, 1].
struct Phase1Outcome {
  double margin = 0.0;
  VectorXd v;  // point in reduced coordinates
  bool solver_ok = true;
};

Phase1Outcome phase1(const ConeProblem& cp, int max_iters) {
  Phase1Outcome out;
  const int nf = cp.n;
  if (cp.blocks.empty()) {
    out.margin = 1.0;
    out.v = VectorXd::Zero(nf);
    return out;
  }
  double lmin0 = kInf;
  for (const auto& b : cp.blocks) lmin0 = std::min(lmin0, sym_min_eig(b.g0));
  if (nf == 0) {
    out.margin = std::min(lmin0, 1.0);
    out.v = VectorXd::Zero(0);
    return out;
  }

  ConeProblem aux;
  aux.n = nf + 1;
  aux.c = VectorXd::Zero(nf + 1);
  aux.c(nf) = 1.0;  // maximize t
  for (const auto& b : cp.blocks) {
    ConeBlock cb;
    cb.dim = b.dim;
    cb.g0 = b.g0;
    cb.g = b.g;
    cb.g.push_back(-MatrixXd::Identity(b.dim, b.dim));
    aux.blocks.push_back(std::move(cb));
  }
  const double cap = 1.0;
  const double floor_t = std::min(-2.0, lmin0 - 2.0);
  {
    ConeBlock capb;  // cap - t >= 0
    capb.dim = 1;
    capb.g0 = MatrixXd::Constant(1, 1, cap);
    capb.g.assign(nf + 1, MatrixXd::Zero(1, 1));
    capb.g[nf](0, 0) = -1.0;
    aux.blocks.push_back(std::move(capb));
    ConeBlock floorb;  // t - floor >= 0
    floorb.dim = 1;
    floorb.g0 = MatrixXd::Constant(1, 1, -floor_t);
    floorb.g.assign(nf + 1, MatrixXd::Zero(1, 1));
    floorb.g[nf](0, 0) = 1.0;
    aux.blocks.push_back(std::move(floorb));
  }

  VectorXd warm = VectorXd::Zero(nf + 1);
  warm(nf) = std::min(lmin0 - 1.0, 0.0);

  IpmOutcome ipm = ipm_solve(aux, 1e-9, 1e-8, max_iters, &warm);
  out.solver_ok = ipm.converged;
  if (ipm.v.size() == nf + 1) {
    out.margin = ipm.v(nf);
    out.v = ipm.v.head(nf);
  } else {
    out.margin = -kInf;
    out.v = VectorXd::Zero(nf);
    out.solver_ok = false;
  }
  return out;
}

}  // namespace

double max_violation(const SdpProblem& p, const Eigen::VectorXd& x) {
  double worst = 0.0;
  for (const auto& [f, rhs] : p.eqs) worst = std::max(worst, std::abs(f.eval(x) - rhs));
  for (const auto& [f, rhs] : p.ineqs) worst = std::max(worst, f.eval(x) - rhs);
  for (const auto& blk : p.psd_blocks) worst = std::max(worst, -sym_min_eig(blk.eval(x)));
  return worst;
}

SdpSolution solve(const SdpProblem& p, const SolveOptions& opts) {
  validate_problem(p);
  SdpSolution sol;
  Reduction red = reduce(p);

  auto infeasible_out = [&](double residual, const VectorXd& x) {
    sol.status = Status::Infeasible;
    sol.residual = residual;
    sol.x = x;
    return sol;
  };
  auto pinned_out = [&]() {
    // Eliminations fixed every variable; just evaluate the slice.
    sol.x = red.x0;
    sol.value = p.objective.eval(sol.x);
    sol.residual = max_violation(p, sol.x);
    sol.gap = 0.0;
    sol.status = (sol.residual <= opts.feas_tol) ? Status::Optimal : Status::Infeasible;
    return sol;
  };

  if (!red.eq_consistent) return infeasible_out(red.eq_residual, red.x0);
  if (red.cone.n == 0) return pinned_out();

  std::optional<Reduction> pre_cut;
  Phase1Outcome ph1;
  for (int round = 0; round < 4; ++round) {
    ph1 = phase1(red.cone, opts.max_iterations);
    if (ph1.margin < -opts.feas_tol) {
      // Only the pre-cut geometry can prove infeasibility; a negative
      // margin after a numerical cut is the cut's own noise, so back the
      // cut out and continue best-effort.
      if (round == 0) return infeasible_out(-ph1.margin, red.x0 + red.null * ph1.v);
      red = std::move(*pre_cut);
      ph1 = phase1(red.cone, opts.max_iterations);
      break;
    }
    // Cut only genuinely boundary slices; thin-but-interior problems are
    // the plain path-following method's job.
    if (ph1.margin > opts.feas_tol || round == 3) break;
    pre_cut.emplace(red);
    if (!cut_numerical_face(red, ph1.v)) break;
    if (!red.eq_consistent) {
      red = std::move(*pre_cut);
      ph1 = phase1(red.cone, opts.max_iterations);
      break;
    }
    if (red.cone.n == 0) return pinned_out();
    if (red.cone.blocks.empty()) {
      if (red.cone.c.cwiseAbs().maxCoeff() <= 1e-12) return pinned_out();
      sol.status = Status::SolverFailure;  // unconstrained direction left
      return sol;
    }
  }

  IpmOutcome ipm = ipm_solve(red.cone, 0.5 * opts.gap_tol, 0.5 * opts.feas_tol,
                             opts.max_iterations, &ph1.v);
  sol.iterations = ipm.iterations;
  if (ipm.v.size() != red.cone.n) {
    sol.status = Status::SolverFailure;
    return sol;
  }
  sol.x = red.x0 + red.null * ipm.v;
  sol.value = p.objective.eval(sol.x);
  sol.gap = ipm.gap;
  sol.residual = max_violation(p, sol.x);
  sol.status = (sol.gap <= opts.gap_tol && sol.residual <= opts.feas_tol)
                   ? Status::Optimal
                   : Status::SolverFailure;
  return sol;
}

FeasibilityResult feasibility(const SdpProblem& p, const SolveOptions& opts) {
  validate_problem(p);
  FeasibilityResult res;
  Reduction red = reduce(p);
  if (!red.eq_consistent) {
    res.feasible = false;
    res.margin = -red.eq_residual;
    res.point = red.x0;
    res.solver_status = Status::Infeasible;
    return res;
  }
  Phase1Outcome ph1 = phase1(red.cone, opts.max_iterations);
  res.margin = ph1.margin;
  res.point = red.x0 + red.null * ph1.v;
  res.feasible = ph1.margin >= -opts.feas_tol;
  res.solver_status = ph1.solver_ok
                          ? (res.feasible ? Status::Optimal : Status::Infeasible)
                          : Status::SolverFailure;
  return res;
}

std::string dump(const SdpProblem& p) {
  std::ostringstream os;
  os.precision(17);
  auto put_form = [&os](const LinearForm& f) {
    os << "const=" << f.constant;
    for (const auto& [i, c] : f.coeffs) os << ' ' << i << ':' << c;
  };
  os << "sdp n_vars=" << p.n_vars << '\n';
  os << "objective ";
  put_form(p.objective);
  os << '\n';
  for (const auto& [f, rhs] : p.eqs) {
    os << "eq rhs=" << rhs << ' ';
    put_form(f);
    os << '\n';
  }
  for (const auto& [f, rhs] : p.ineqs) {
    os << "ineq rhs=" << rhs << ' ';
    put_form(f);
    os << '\n';
  }
  int k = 0;
  for (const auto& blk : p.psd_blocks) {
    os << "block " << k++ << " dim=" << blk.dim << '\n';
    auto put_matrix = [&os, &blk](const char* tag, const Eigen::MatrixXd& m) {
      os << tag;
      for (int r = 0; r < blk.dim; ++r)
        for (int c = 0; c < blk.dim; ++c) os << ' ' << m(r, c);
      os << '\n';
    };
    put_matrix("F const", blk.constant);
    for (const auto& [j, g] : blk.coeff) {
      os << "F " << j;
      for (int r = 0; r < blk.dim; ++r)
        for (int c = 0; c < blk.dim; ++c) os << ' ' << g(r, c);
      os << '\n';
    }
  }
  return os.str();
}

}  // namespace hardyrand::sdp
