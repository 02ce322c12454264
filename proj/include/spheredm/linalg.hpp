#pragma once

#include "spheredm/types.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

namespace spheredm {

struct SymEig {
  Matrix q;        ///< orthogonal eigenvectors, columns
  Vector values;   ///< ascending
};

/// Symmetric eigendecomposition S = Q diag Q^T (LAPACK dsyevd).
inline SymEig sym_eig(const Matrix& s) {
  require(s.rows() == s.cols(), "sym_eig: matrix must be square");
  check_finite(s, "sym_eig");
  const double scale = s.cwiseAbs().maxCoeff();
  const double asym = (s - s.transpose()).cwiseAbs().maxCoeff();
  if (scale > 0.0 && asym > 1e-10 * scale)
    throw std::invalid_argument("sym_eig: matrix is not symmetric");
  const int n = static_cast<int>(s.rows());
  SymEig out;
  out.q = 0.5 * (s + s.transpose());
  out.values.resize(n);
  const int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, out.q.data(), n,
                                  out.values.data());
  if (info != 0) throw NumericalError("sym_eig: dsyevd failed, info=" + std::to_string(info));
  return out;
}

/// Eigenvalues sorted by real part, then imaginary part.
struct ComplexSpectrum {
  std::vector<std::complex<double>> eigenvalues;

  double spectral_radius() const {
    double r = 0.0;
    for (const auto& e : eigenvalues) r = std::max(r, std::abs(e));
    return r;
  }
  double max_abs_imag() const {
    double r = 0.0;
    for (const auto& e : eigenvalues) r = std::max(r, std::abs(e.imag()));
    return r;
  }
  double min_real() const {
    double r = std::numeric_limits<double>::infinity();
    for (const auto& e : eigenvalues) r = std::min(r, e.real());
    return r;
  }
};

/// Full nonsymmetric spectrum via LAPACK dgeev (balancing + Hessenberg + QR).
inline ComplexSpectrum general_eig(const Matrix& m) {
  require(m.rows() == m.cols(), "general_eig: matrix must be square");
  check_finite(m, "general_eig");
  const int n = static_cast<int>(m.rows());
  Matrix a = m;  // column-major copy, destroyed by dgeev
  std::vector<double> wr(static_cast<size_t>(n)), wi(static_cast<size_t>(n));
  const int info = LAPACKE_dgeev(LAPACK_COL_MAJOR, 'N', 'N', n, a.data(), n, wr.data(),
                                 wi.data(), nullptr, 1, nullptr, 1);
  if (info != 0)
    throw NumericalError("general_eig: QR iteration did not converge, info=" +
                         std::to_string(info));
  ComplexSpectrum spec;
  spec.eigenvalues.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) spec.eigenvalues.emplace_back(wr[static_cast<size_t>(i)], wi[static_cast<size_t>(i)]);
  std::sort(spec.eigenvalues.begin(), spec.eigenvalues.end(),
            [](const std::complex<double>& a, const std::complex<double>& b) {
              if (a.real() != b.real()) return a.real() < b.real();
              return a.imag() < b.imag();
            });
  return spec;
}

/// Orthonormal basis W for range(P)^perp from a full orthogonal decomposition
/// of P; rank deficiency (relative R-diagonal below 1e-10) is an error.
inline Matrix nullspace_orthobasis(const Matrix& p) {
  const int n = static_cast<int>(p.rows());
  const int m = static_cast<int>(p.cols());
  require(n > m, "nullspace_orthobasis: need N > M");
  check_finite(p, "nullspace_orthobasis");
  if (m == 0) return Matrix::Identity(n, n);
  Eigen::ColPivHouseholderQR<Matrix> qr(p);
  const Vector rdiag = qr.matrixR().diagonal().head(m).cwiseAbs();
  if (rdiag.minCoeff() <= 1e-10 * rdiag.maxCoeff())
    throw UnisolvencyError("nullspace_orthobasis: rank-deficient polynomial block (R diagonal " +
                           std::to_string(rdiag.minCoeff()) + " vs " +
                           std::to_string(rdiag.maxCoeff()) + ")");
  Matrix qfull = qr.householderQ() * Matrix::Identity(n, n);
  return qfull.rightCols(n - m);
}

/// Symmetric positive definite square root via sym_eig.
inline Matrix spd_sqrt(const Matrix& a) {
  SymEig eig = sym_eig(a);
  const double largest = eig.values.cwiseAbs().maxCoeff();
  const double smallest = eig.values.minCoeff();
  if (!(smallest > 1e-13 * largest))
    throw NumericalError("spd_sqrt: matrix not SPD (smallest eigenvalue " +
                         std::to_string(smallest) + ")");
  Matrix s = eig.q * eig.values.cwiseSqrt().asDiagonal() * eig.q.transpose();
  return 0.5 * (s + s.transpose());
}

/// Solve A X = B by partial-pivoting LU with one step of iterative
/// refinement; symmetric-indefinite saddle systems go through the same path.
inline Matrix solve_linear(const Matrix& a, const Matrix& b) {
  require(a.rows() == a.cols(), "solve_linear: A must be square");
  require(a.rows() == b.rows(), "solve_linear: dimension mismatch");
  check_finite(a, "solve_linear(A)");
  check_finite(b, "solve_linear(B)");
  Eigen::PartialPivLU<Matrix> lu(a);
  const Vector udiag = lu.matrixLU().diagonal().cwiseAbs();
  const double scale = a.cwiseAbs().maxCoeff();
  if (udiag.minCoeff() <= 1e-14 * std::max(scale, udiag.maxCoeff()))
    throw NumericalError("solve_linear: matrix singular to working precision (pivot " +
                         std::to_string(udiag.minCoeff()) + ")");
  Matrix x = lu.solve(b);
  for (int pass = 0; pass < 2; ++pass) {
    Matrix r = b - a * x;
    x += lu.solve(r);
  }
  if (!x.allFinite()) throw NumericalError("solve_linear: non-finite solution");
  return x;
}

struct SpectralNormResult {
  double value = 0.0;
  bool converged = true;
  int iterations = 0;
};

/// Largest singular value by power iteration on A^T A; deterministic start,
/// relative tolerance 1e-10, at most 1e4 iterations.
inline SpectralNormResult spectral_norm_info(const Matrix& a) {
  check_finite(a, "spectral_norm");
  const int n = static_cast<int>(a.cols());
  if (n == 0 || a.rows() == 0) return {0.0, true, 0};
  if (a.cwiseAbs().maxCoeff() == 0.0) return {0.0, true, 0};
  Vector v(n);
  std::uint64_t state = 0x9e3779b97f4a7c15ull;  // fixed seed
  for (int i = 0; i < n; ++i) {
    state = state * 6364136223846793005ull + 1442695040888963407ull;
    v(i) = static_cast<double>(state >> 11) / 9007199254740992.0 - 0.5;
  }
  v.normalize();
  double sigma = 0.0;
  for (int it = 1; it <= 10000; ++it) {
    Vector av = a * v;
    const double s = av.norm();
    Vector w = a.transpose() * av;
    const double wn = w.norm();
    if (wn == 0.0) return {0.0, true, it};
    v = w / wn;
    if (std::abs(s - sigma) <= 1e-10 * std::max(s, 1e-300)) return {s, true, it};
    sigma = s;
  }
  return {sigma, false, 10000};
}

inline double spectral_norm(const Matrix& a) { return spectral_norm_info(a).value; }

/// l2 condition number ||V|| ||V^-1||.
inline double cond2(const Matrix& v) {
  require(v.rows() == v.cols(), "cond2: matrix must be square");
  const int n = static_cast<int>(v.rows());
  Matrix inv = solve_linear(v, Matrix::Identity(n, n));
  return spectral_norm(v) * spectral_norm(inv);
}

}  // namespace spheredm
