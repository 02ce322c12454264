#pragma once

#include "spheredm/geometry.hpp"
#include "spheredm/harmonics.hpp"
#include "spheredm/kernels.hpp"
#include "spheredm/linalg.hpp"
#include "spheredm/types.hpp"

#include <memory>
#include <utility>

namespace spheredm {

/// Sampled kernel matrices Phi_X and K_X = (Psi(x_j . x_k)).
struct CollocationPair {
  Matrix phi;
  Matrix k;
};

/// Assemble Phi_X and K_X for one point set. Dot products are computed once;
/// near-coincident pairs (dot > 1 - 1e-14 off the diagonal) are rejected
/// instead of silently producing a near-singular system.
inline CollocationPair collocation_matrices(const ZonalKernel& kernel, const SpectralOperator& op,
                                            const PointSet& x) {
  const ZonalFunction psi = apply_operator(kernel, op);
  const int n = x.size();
  const Matrix dots = x.dot_matrix();
  CollocationPair out;
  out.phi.resize(n, n);
  out.k.resize(n, n);
  const double g1 = kernel.eval(1.0);
  const double psi1 = psi.eval(1.0);
  for (int j = 0; j < n; ++j) {
    out.phi(j, j) = g1;
    out.k(j, j) = psi1;
    for (int kk = j + 1; kk < n; ++kk) {
      const double t = dots(j, kk);
      if (t > 1.0 - 1e-14)
        throw NumericalError("collocation_matrices: coincident points at indices " +
                             std::to_string(j) + ", " + std::to_string(kk));
      const double pv = kernel.eval(t);
      const double kv = psi.eval(t);
      out.phi(j, kk) = pv;
      out.phi(kk, j) = pv;
      out.k(j, kk) = kv;
      out.k(kk, j) = kv;
    }
  }
  return out;
}

/// Coefficient matrices of the augmented collocation problem
///   [ Phi  P ] [ A ]   [ I ]
///   [ P^T  0 ] [ B ] = [ 0 ].
struct SaddleSolution {
  Matrix a;  ///< N x N
  Matrix b;  ///< M x N
};

inline SaddleSolution solve_saddle(const Matrix& phi, const Matrix& p) {
  const int n = static_cast<int>(phi.rows());
  const int m = static_cast<int>(p.cols());
  require(phi.cols() == n && p.rows() == n, "solve_saddle: dimension mismatch");
  Matrix s(n + m, n + m);
  s.topLeftCorner(n, n) = phi;
  s.topRightCorner(n, m) = p;
  s.bottomLeftCorner(m, n) = p.transpose();
  s.bottomRightCorner(m, m).setZero();
  Matrix rhs = Matrix::Zero(n + m, n);
  rhs.topRows(n) = Matrix::Identity(n, n);
  Matrix sol;
  try {
    sol = solve_linear(s, rhs);
  } catch (const NumericalError& e) {
    throw NumericalError(std::string("solve_saddle: bordered system failed: ") + e.what());
  }
  SaddleSolution out;
  out.a = sol.topRows(n);
  out.b = sol.bottomRows(m);
  // normwise backward error; the solution norm grows like 1/lambda_min of
  // the reduced collocation block, so the residual must be measured against
  // ||S|| ||X|| + ||B||
  const double resid = (s * sol - rhs).norm();
  const double scale = spectral_norm(phi) + spectral_norm(p);
  const double denom = std::max(scale, 1e-300) * sol.norm() + rhs.norm();
  if (resid > 1e-9 * denom)
    throw NumericalError("solve_saddle: backward error " + std::to_string(resid / denom) +
                         " exceeds 1e-9");
  return out;
}

/// Residuals of the closed forms A = W (W^T Phi W)^-1 W^T and
/// B = Pdag (I - Phi A) against a bordered-solve result; audit path.
struct SaddleAudit {
  double rel_err_a = 0.0;
  double rel_err_b = 0.0;
};

inline SaddleAudit saddle_audit(const Matrix& phi, const Matrix& p, const SaddleSolution& sol) {
  const int n = static_cast<int>(phi.rows());
  const Matrix w = nullspace_orthobasis(p);
  const Matrix phat = w.transpose() * phi * w;
  const Matrix ahat = solve_linear(phat, Matrix::Identity(n - static_cast<int>(p.cols()),
                                                          n - static_cast<int>(p.cols())));
  const Matrix a_cf = w * ahat * w.transpose();
  const Matrix pdag = solve_linear(p.transpose() * p, p.transpose());
  const Matrix b_cf = pdag * (Matrix::Identity(n, n) - phi * a_cf);
  SaddleAudit out;
  out.rel_err_a = (a_cf - sol.a).norm() / std::max(sol.a.norm(), 1e-300);
  out.rel_err_b = (b_cf - sol.b).norm() / std::max(sol.b.norm(), 1e-300);
  return out;
}

enum class DmMode { pd, cpd };

/// Global (Kansa) differentiation matrix, with the CPD ingredients retained
/// for the block decomposition and the energy seminorm.
struct GlobalDM {
  Matrix m;
  DmMode mode = DmMode::pd;
  int mtilde = 0;

  struct Ingredients {
    Matrix phi;      ///< Phi_X
    Matrix k;        ///< K_X
    Matrix p;        ///< Vandermonde, N x M (empty in pd mode)
    Vector lambda;   ///< diag Lambda, length M
    Matrix a;        ///< saddle A (pd mode: unset)
    Matrix b;        ///< saddle B
    ZonalKernel kernel;
    SpectralOperator op;

    Ingredients(ZonalKernel kk, SpectralOperator oo) : kernel(std::move(kk)), op(std::move(oo)) {}
  };
  std::shared_ptr<const Ingredients> ingredients;
};

/// PD-kernel DM: M = K Phi^-1.
inline GlobalDM global_dm_pd(const ZonalKernel& kernel, const SpectralOperator& op,
                             const PointSet& x) {
  require(kernel.cpd_order() == 0, "global_dm_pd: kernel must be PD (cpd order 0)");
  const auto compat = check_compatibility(kernel, op, 0);
  require(compat.accepted, "global_dm_pd: incompatible kernel/operator: " + compat.diagnostic);
  CollocationPair coll = collocation_matrices(kernel, op, x);
  auto ing = std::make_shared<GlobalDM::Ingredients>(kernel, op);
  GlobalDM dm;
  dm.mode = DmMode::pd;
  dm.mtilde = 0;
  // M Phi = K with both symmetric: M = (Phi^-1 K)^T
  dm.m = solve_linear(coll.phi, coll.k).transpose();
  ing->phi = std::move(coll.phi);
  ing->k = std::move(coll.k);
  dm.ingredients = std::move(ing);
  return dm;
}

/// Lambda diagonal paired with the harmonic enumeration.
inline Vector lambda_diagonal(const HarmonicBasisEnumeration& basis, const SpectralOperator& op) {
  Vector lam(basis.size());
  for (int j = 0; j < basis.size(); ++j) lam(j) = op.lambda(basis.index(j).degree);
  return lam;
}

/// CPD-kernel DM: M = K A + P Lambda B. mtilde = 0 with a PD kernel routes
/// to the PD pipeline.
inline GlobalDM global_dm_cpd(const ZonalKernel& kernel, const SpectralOperator& op,
                              const PointSet& x, int mtilde) {
  require(mtilde >= kernel.cpd_order(), "global_dm_cpd: mtilde below kernel CPD order");
  if (mtilde == 0) return global_dm_pd(kernel, op, x);
  const auto compat = check_compatibility(kernel, op, mtilde);
  require(compat.accepted, "global_dm_cpd: incompatible kernel/operator: " + compat.diagnostic);
  const HarmonicBasisEnumeration basis(mtilde - 1);
  require(x.size() > basis.size(), "global_dm_cpd: need N > M = mtilde^2");
  CollocationPair coll = collocation_matrices(kernel, op, x);
  const Matrix p = vandermonde(x, basis);
  const Vector lam = lambda_diagonal(basis, op);
  SaddleSolution sol = solve_saddle(coll.phi, p);
  GlobalDM dm;
  dm.mode = DmMode::cpd;
  dm.mtilde = mtilde;
  dm.m = coll.k * sol.a + p * lam.asDiagonal() * sol.b;
  auto ing = std::make_shared<GlobalDM::Ingredients>(kernel, op);
  ing->phi = std::move(coll.phi);
  ing->k = std::move(coll.k);
  ing->p = p;
  ing->lambda = lam;
  ing->a = std::move(sol.a);
  ing->b = std::move(sol.b);
  dm.ingredients = std::move(ing);
  return dm;
}

}  // namespace spheredm
