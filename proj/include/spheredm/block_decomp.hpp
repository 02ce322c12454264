#pragma once

#include "spheredm/global_dm.hpp"
#include "spheredm/linalg.hpp"
#include "spheredm/types.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <limits>
#include <optional>
#include <string>

namespace spheredm {

/// Factors of M_X = V [[Lambda, R], [0, Theta]] V^-1 with V = [P Z] and
/// V^-1 = [Pdag; Zdag].
struct BlockDecomposition {
  Matrix p;       ///< N x M Vandermonde
  Matrix pdag;    ///< M x N left inverse of P
  Matrix w;       ///< N x (N-M) orthonormal basis of range(P)^perp
  Matrix z;       ///< N x (N-M)
  Matrix zdag;    ///< (N-M) x N left inverse of Z
  Vector lambda;  ///< M polynomial-block eigenvalues
  Vector theta;   ///< N-M kernel-block eigenvalues, ascending
  Matrix r;       ///< M x (N-M) coupling block
  Matrix v;       ///< N x N, [P Z]
  double kappa = 0.0;  ///< cond2(V)
  double m_norm = 0.0;         ///< ||M_X||
  double reconstruction_residual = 0.0;  ///< ||M - V T V^-1|| / ||M||
  double phat_cond = 0.0;  ///< condition number of W^T Phi W
};

/// Separation of the operator spectrum across the polynomial cut (Lemma-style
/// lambda_flat / lambda_sharp split). When p(nu_l) is unbounded below on the
/// tail, sharp_finite is false and gamma is undefined.
struct SeparationResult {
  double lambda_flat = 0.0;
  double lambda_sharp = 0.0;
  double gamma = 0.0;
  bool sharp_finite = true;
};

namespace detail {

/// Minimum of p(nu_l) over l in [l0, l0+64], plus a monotonicity certificate
/// for the tail: beyond the scan the leading term must dominate and push
/// p(nu_l) upward. Returns nullopt when the tail diverges to -infinity.
inline std::optional<double> tail_min_lambda(const SpectralOperator& op, int l0) {
  double best = std::numeric_limits<double>::infinity();
  const int l_cap = l0 + 64;
  for (int l = l0; l <= l_cap; ++l) best = std::min(best, op.lambda(l));
  const auto& c = op.coeffs();
  const int deg = op.degree();
  if (deg == 0) return best;  // constant operator
  const double lead = c[static_cast<size_t>(deg)];
  // p(nu) -> +inf as nu -> -inf iff lead * (-1)^deg > 0
  if (lead * ((deg % 2 == 0) ? 1.0 : -1.0) <= 0.0) return std::nullopt;
  // domination check at the end of the scan: |lead| |nu|^deg must exceed
  // twice the sum of the lower-order magnitudes
  const double nu_end = std::abs(laplace_eigenvalue(l_cap));
  double lower = 0.0;
  for (int i = 0; i < deg; ++i) lower += std::abs(c[static_cast<size_t>(i)]) * std::pow(nu_end, i);
  if (std::abs(lead) * std::pow(nu_end, deg) < 2.0 * lower)
    throw NumericalError("separation: monotonicity certificate failed; extend the scan");
  return best;
}

}  // namespace detail

/// lambda_flat = max_{l < mtilde} p(nu_l), lambda_sharp = min_{l >= mtilde} p(nu_l),
/// gamma = lambda_sharp - lambda_flat.
inline SeparationResult separation_gamma(const SpectralOperator& op, int mtilde) {
  require(mtilde >= 1, "separation_gamma: mtilde must be >= 1");
  SeparationResult out;
  out.lambda_flat = -std::numeric_limits<double>::infinity();
  for (int l = 0; l < mtilde; ++l) out.lambda_flat = std::max(out.lambda_flat, op.lambda(l));
  const auto sharp = detail::tail_min_lambda(op, mtilde);
  if (!sharp) {
    out.sharp_finite = false;
    out.lambda_sharp = -std::numeric_limits<double>::infinity();
    out.gamma = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  out.lambda_sharp = *sharp;
  out.gamma = out.lambda_sharp - out.lambda_flat;
  return out;
}

/// Block-triangular similarity of a CPD-mode DM:
///   W from the nullspace of P, Ahat = (W^T Phi W)^-1, S = Ahat^(1/2),
///   S Khat S^T = U Theta U^T, Z = W S^-1 U, Zdag = U^T S W^T,
///   R = (Pdag K - Lambda Pdag Phi) A Z.
/// All structural invariants are checked before returning.
inline BlockDecomposition decompose(const GlobalDM& dm) {
  require(dm.mode == DmMode::cpd && dm.ingredients && dm.ingredients->p.cols() > 0,
          "decompose: needs a CPD-mode DM with mtilde >= 1");
  const auto& ing = *dm.ingredients;
  const int n = static_cast<int>(dm.m.rows());
  const int m = static_cast<int>(ing.p.cols());

  BlockDecomposition bd;
  bd.p = ing.p;
  bd.lambda = ing.lambda;
  bd.w = nullspace_orthobasis(ing.p);

  const Matrix phat = bd.w.transpose() * ing.phi * bd.w;
  SymEig phat_eig;
  try {
    phat_eig = sym_eig(phat);
  } catch (const std::invalid_argument& e) {
    throw NumericalError(std::string("decompose: W^T Phi W not symmetric: ") + e.what());
  }
  const double lam_max = phat_eig.values.cwiseAbs().maxCoeff();
  if (!(phat_eig.values.minCoeff() > 1e-13 * lam_max))
    throw NumericalError(
        "decompose: W^T Phi W is not SPD (CPD order/kernel mismatch; smallest eigenvalue " +
        std::to_string(phat_eig.values.minCoeff()) + ")");
  bd.phat_cond = lam_max / phat_eig.values.minCoeff();

  // S = Ahat^(1/2) = Qd^(-1/2)Q^T and S^-1 = Qd^(1/2)Q^T from one eigensolve
  const Vector droot = phat_eig.values.cwiseSqrt();
  const Matrix s = phat_eig.q * droot.cwiseInverse().asDiagonal() * phat_eig.q.transpose();
  const Matrix s_inv = phat_eig.q * droot.asDiagonal() * phat_eig.q.transpose();

  const Matrix khat = bd.w.transpose() * ing.k * bd.w;
  Matrix g = s * khat * s.transpose();
  g = 0.5 * (g + g.transpose());
  const SymEig core = sym_eig(g);
  bd.theta = core.values;  // ascending
  bd.z = bd.w * (s_inv * core.q);
  bd.zdag = core.q.transpose() * s * bd.w.transpose();

  bd.pdag = solve_linear(ing.p.transpose() * ing.p, ing.p.transpose());
  bd.r = (bd.pdag * ing.k - bd.lambda.asDiagonal() * (bd.pdag * ing.phi)) * (ing.a * bd.z);

  bd.v.resize(n, n);
  bd.v.leftCols(m) = bd.p;
  bd.v.rightCols(n - m) = bd.z;
  bd.kappa = cond2(bd.v);

  // structural invariants
  const int nm = n - m;
  const double e_zz = (bd.zdag * bd.z - Matrix::Identity(nm, nm)).cwiseAbs().maxCoeff();
  if (e_zz > 1e-9)
    throw NumericalError("decompose: Zdag Z != I (error " + std::to_string(e_zz) + ")");
  const double e_pp = (bd.pdag * bd.p - Matrix::Identity(m, m)).cwiseAbs().maxCoeff();
  if (e_pp > 1e-10)
    throw NumericalError("decompose: Pdag P != I (error " + std::to_string(e_pp) + ")");
  const double cross_scale = spectral_norm(bd.p) * spectral_norm(bd.zdag) +
                             spectral_norm(bd.z) * spectral_norm(bd.pdag);
  const double e_cross =
      std::max((bd.pdag * bd.z).cwiseAbs().maxCoeff(), (bd.zdag * bd.p).cwiseAbs().maxCoeff());
  if (e_cross > 1e-9 * std::max(cross_scale, 1.0))
    throw NumericalError("decompose: P/Z blocks not bi-orthogonal (error " +
                         std::to_string(e_cross) + ")");

  // reconstruction residual ||M - V T V^-1|| <= 1e-8 ||M||
  Matrix t = Matrix::Zero(n, n);
  t.topLeftCorner(m, m) = Matrix(bd.lambda.asDiagonal());
  t.topRightCorner(m, nm) = bd.r;
  t.bottomRightCorner(nm, nm) = Matrix(bd.theta.asDiagonal());
  Matrix vinv(n, n);
  vinv.topRows(m) = bd.pdag;
  vinv.bottomRows(nm) = bd.zdag;
  bd.m_norm = spectral_norm(dm.m);
  bd.reconstruction_residual = spectral_norm(dm.m - bd.v * t * vinv) / std::max(bd.m_norm, 1e-300);
  // the attainable residual degrades with the conditioning of the reduced
  // collocation block; 1e-8 applies whenever the eigensolves can deliver it
  const double recon_tol =
      std::max(1e-8, 50.0 * std::numeric_limits<double>::epsilon() * bd.phat_cond);
  if (bd.reconstruction_residual > recon_tol)
    throw NumericalError("decompose: reconstruction residual " +
                         std::to_string(bd.reconstruction_residual) + " exceeds " +
                         std::to_string(recon_tol));

  // Theta sign when the operator tail is non-negative
  const auto tail = detail::tail_min_lambda(ing.op, dm.mtilde);
  if (tail && *tail >= 0.0) {
    const double theta_max = bd.theta.cwiseAbs().maxCoeff();
    if (bd.theta.minCoeff() < -1e-10 * theta_max)
      throw NumericalError("decompose: Theta has a negative entry despite non-negative "
                           "operator tail");
  }
  return bd;
}

enum class SylvesterCase { disjoint, overlapping_consistent, defective };

inline const char* sylvester_case_name(SylvesterCase c) {
  switch (c) {
    case SylvesterCase::disjoint: return "disjoint";
    case SylvesterCase::overlapping_consistent: return "overlapping_consistent";
    case SylvesterCase::defective: return "defective";
  }
  return "?";
}

/// Solution of -Lambda X + X Theta = R through the entrywise form
/// Gamma .* X = R with Gamma_ij = theta_j - lambda_i.
struct SylvesterSolution {
  SylvesterCase kind = SylvesterCase::disjoint;
  Matrix x_tilde;                 ///< M x (N-M), valid unless defective
  double gamma = std::numeric_limits<double>::quiet_NaN();  ///< separation, when known
  double tol = 0.0;
};

inline SylvesterSolution sylvester_diagonalize(const BlockDecomposition& bd, double tol = -1.0) {
  const int m = static_cast<int>(bd.lambda.size());
  const int nm = static_cast<int>(bd.theta.size());
  if (tol < 0.0) {
    const double lmax = (m > 0) ? bd.lambda.cwiseAbs().maxCoeff() : 0.0;
    const double tmax = (nm > 0) ? bd.theta.cwiseAbs().maxCoeff() : 0.0;
    tol = 1e-8 * (lmax + tmax);
  }
  SylvesterSolution out;
  out.tol = tol;
  out.x_tilde = Matrix::Zero(m, nm);
  const double r_norm = bd.r.cwiseAbs().maxCoeff();
  bool any_overlap = false;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < nm; ++j) {
      const double gamma_ij = bd.theta(j) - bd.lambda(i);
      if (std::abs(gamma_ij) > tol) {
        out.x_tilde(i, j) = bd.r(i, j) / gamma_ij;
      } else {
        any_overlap = true;
        if (std::abs(bd.r(i, j)) > tol * std::max(r_norm, 1.0)) {
          out.kind = SylvesterCase::defective;
          out.x_tilde.resize(0, 0);
          return out;
        }
        // consistent zero: leave X at 0 there
      }
    }
  }
  out.kind = any_overlap ? SylvesterCase::overlapping_consistent : SylvesterCase::disjoint;
  return out;
}

/// Convenience overload that also records the operator separation gamma.
inline SylvesterSolution sylvester_diagonalize(const BlockDecomposition& bd,
                                               const SpectralOperator& op, int mtilde,
                                               double tol = -1.0) {
  SylvesterSolution out = sylvester_diagonalize(bd, tol);
  const SeparationResult sep = separation_gamma(op, mtilde);
  if (sep.sharp_finite) out.gamma = sep.gamma;
  return out;
}

/// PD Bauer-Fike bound: cond(Phi^(1/2)) ||M - M_eps||.
inline double bauer_fike_pd(const Matrix& phi, double diff_norm) {
  require(diff_norm >= 0.0, "bauer_fike_pd: negative perturbation norm");
  return cond2(spd_sqrt(phi)) * diff_norm;
}

/// Generalized Bauer-Fike for the block factorization:
/// max(2 kappa d, sqrt(2 kappa ||R|| d)).
inline double bauer_fike_cpd(const BlockDecomposition& bd, double diff_norm) {
  require(diff_norm >= 0.0, "bauer_fike_cpd: negative perturbation norm");
  const double r_norm = spectral_norm(bd.r);
  return std::max(2.0 * bd.kappa * diff_norm,
                  std::sqrt(2.0 * bd.kappa * r_norm * diff_norm));
}

/// Diagonalized-case bound (1 + ||R||/gamma)^2 kappa d, plus the sharper
/// variant (1 + ||X||)^2 kappa d using the actual Sylvester solution norm.
struct DiagBound {
  double bound = 0.0;
  double bound_sharp = 0.0;
};

inline DiagBound bauer_fike_diag(const BlockDecomposition& bd, const SylvesterSolution& sylv,
                                 double diff_norm) {
  require(diff_norm >= 0.0, "bauer_fike_diag: negative perturbation norm");
  if (sylv.kind == SylvesterCase::defective)
    throw NumericalError("bauer_fike_diag: Sylvester problem is defective");
  if (!(sylv.gamma > 0.0))
    throw NumericalError("bauer_fike_diag: separation gamma not positive");
  const double r_norm = spectral_norm(bd.r);
  const double x_norm = spectral_norm(sylv.x_tilde);
  DiagBound out;
  out.bound = (1.0 + r_norm / sylv.gamma) * (1.0 + r_norm / sylv.gamma) * bd.kappa * diff_norm;
  out.bound_sharp = (1.0 + x_norm) * (1.0 + x_norm) * bd.kappa * diff_norm;
  return out;
}

/// Norm diagnostics of the decomposition, serialized with fixed keys.
inline nlohmann::json decomposition_report(const GlobalDM& dm, const BlockDecomposition& bd,
                                           const SylvesterSolution& sylv) {
  nlohmann::json j;
  j["norm_P"] = spectral_norm(bd.p);
  j["norm_Pdag"] = spectral_norm(bd.pdag);
  j["norm_Z"] = spectral_norm(bd.z);
  j["norm_Zdag"] = spectral_norm(bd.zdag);
  j["norm_A"] = dm.ingredients ? spectral_norm(dm.ingredients->a) : 0.0;
  j["norm_R"] = spectral_norm(bd.r);
  j["kappa"] = bd.kappa;
  if (std::isfinite(sylv.gamma))
    j["gamma"] = sylv.gamma;
  else
    j["gamma"] = nullptr;
  j["theta_min"] = bd.theta.minCoeff();
  j["theta_max"] = bd.theta.maxCoeff();
  j["case"] = sylvester_case_name(sylv.kind);
  return j;
}

}  // namespace spheredm
