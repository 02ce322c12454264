#pragma once

#include "spheredm/geometry.hpp"
#include "spheredm/global_dm.hpp"
#include "spheredm/harmonics.hpp"
#include "spheredm/kernels.hpp"
#include "spheredm/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <tuple>
#include <utility>
#include <vector>

namespace spheredm {

/// Stencil cardinality n = ceil(K^2 (ln N)^2 / 7), clamped to [M+1, N]
/// where M is the dimension of the augmented harmonic space.
inline int stencil_size(double stencil_k, int n_points, int poly_dim) {
  require(stencil_k > 0.0, "stencil_size: K must be > 0");
  require(n_points >= 2, "stencil_size: N must be >= 2");
  const double ln_n = std::log(static_cast<double>(n_points));
  int n = static_cast<int>(std::ceil(stencil_k * stencil_k * ln_n * ln_n / 7.0));
  n = std::max(n, poly_dim + 1);
  n = std::min(n, n_points);
  return n;
}

/// Per-point nearest-neighbor stencils Upsilon_j, each containing its center.
struct StencilSet {
  double stencil_k = 0.0;
  int n = 0;  ///< common stencil cardinality
  std::vector<std::vector<int>> stencils;
};

inline StencilSet build_stencils(const PointSet& x, double stencil_k, int mtilde) {
  const int poly_dim = mtilde * mtilde;
  StencilSet s;
  s.stencil_k = stencil_k;
  s.n = stencil_size(stencil_k, x.size(), poly_dim);
  s.stencils.resize(static_cast<size_t>(x.size()));
  for (int j = 0; j < x.size(); ++j)
    s.stencils[static_cast<size_t>(j)] = nearest_neighbors(x, j, s.n);
  return s;
}

/// Sparse local (RBF-FD) DM. Row j holds the stencil weights that apply the
/// operator at x_j: entry (j, k) = L b_k(x_j) for x_k in Upsilon_j, where the
/// b_k are the local Lagrange functions of the interpolation problem on
/// Upsilon_j. The augmented local system makes every row exact on sampled
/// harmonics of degree < mtilde.
class LocalDM {
 public:
  LocalDM(int n_points, StencilSet stencils)
      : n_points_(n_points), stencils_(std::move(stencils)) {
    rows_.resize(static_cast<size_t>(n_points));
  }

  int size() const { return n_points_; }
  const StencilSet& stencils() const { return stencils_; }

  void set_row(int j, const std::vector<int>& cols, const Vector& values) {
    auto& row = rows_[static_cast<size_t>(j)];
    row.clear();
    row.reserve(cols.size());
    for (size_t i = 0; i < cols.size(); ++i) row.push_back({cols[i], values(static_cast<int>(i))});
  }

  const std::vector<std::pair<int, double>>& row(int j) const {
    return rows_[static_cast<size_t>(j)];
  }

  int nnz() const {
    int total = 0;
    for (const auto& row : rows_) total += static_cast<int>(row.size());
    return total;
  }

  Matrix to_dense() const {
    Matrix m = Matrix::Zero(n_points_, n_points_);
    for (int j = 0; j < n_points_; ++j)
      for (const auto& [col, val] : rows_[static_cast<size_t>(j)]) m(j, col) = val;
    return m;
  }

  Vector apply(const Vector& u) const {
    Vector out = Vector::Zero(n_points_);
    for (int j = 0; j < n_points_; ++j)
      for (const auto& [col, val] : rows_[static_cast<size_t>(j)]) out(j) += val * u(col);
    return out;
  }

  /// Coordinate triplets "row col value" (0-based), sorted by (col, row).
  void write_coo(std::ostream& os) const {
    std::vector<std::tuple<int, int, double>> triplets;
    triplets.reserve(static_cast<size_t>(nnz()));
    for (int j = 0; j < n_points_; ++j)
      for (const auto& [col, val] : rows_[static_cast<size_t>(j)]) triplets.push_back({col, j, val});
    std::sort(triplets.begin(), triplets.end(), [](const auto& a, const auto& b) {
      return std::make_pair(std::get<0>(a), std::get<1>(a)) <
             std::make_pair(std::get<0>(b), std::get<1>(b));
    });
    os.precision(17);
    for (const auto& [col, row, val] : triplets) os << row << " " << col << " " << val << "\n";
  }

 private:
  int n_points_ = 0;
  StencilSet stencils_;
  std::vector<std::vector<std::pair<int, double>>> rows_;
};

namespace detail {

/// Shared context for stencil solves: global kernel samples gathered per
/// stencil, so profile evaluations happen once for the whole matrix.
struct LocalAssemblyContext {
  Matrix phi;  ///< full Phi_X
  Matrix k;    ///< full K_X
  Matrix p;    ///< full Vandermonde N x M
  Vector lambda;
};

inline LocalAssemblyContext make_context(const ZonalKernel& kernel, const SpectralOperator& op,
                                         const PointSet& x, int mtilde) {
  LocalAssemblyContext ctx;
  CollocationPair coll = collocation_matrices(kernel, op, x);
  ctx.phi = std::move(coll.phi);
  ctx.k = std::move(coll.k);
  if (mtilde > 0) {
    const HarmonicBasisEnumeration basis(mtilde - 1);
    ctx.p = vandermonde(x, basis);
    ctx.lambda = lambda_diagonal(basis, op);
  } else {
    ctx.p = Matrix::Zero(x.size(), 0);
    ctx.lambda = Vector::Zero(0);
  }
  return ctx;
}

/// Bordered local system on one stencil, shared by the row and column paths.
/// Returns [sys | gathered phi/k/p blocks].
struct StencilSystem {
  Matrix sys;    ///< (n + M) x (n + M) bordered matrix
  Matrix k_loc;  ///< n x n operator samples
  Matrix p_loc;  ///< n x M
  int center_pos = -1;
};

inline StencilSystem gather_stencil(const LocalAssemblyContext& ctx, const std::vector<int>& sten,
                                    int center, int poly_dim) {
  const int n = static_cast<int>(sten.size());
  require(n > poly_dim, "local stencil smaller than the polynomial block");
  StencilSystem s;
  s.k_loc.resize(n, n);
  s.p_loc.resize(n, poly_dim);
  Matrix phi_loc(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      phi_loc(a, b) = ctx.phi(sten[static_cast<size_t>(a)], sten[static_cast<size_t>(b)]);
      s.k_loc(a, b) = ctx.k(sten[static_cast<size_t>(a)], sten[static_cast<size_t>(b)]);
    }
    for (int l = 0; l < poly_dim; ++l)
      s.p_loc(a, l) = ctx.p(sten[static_cast<size_t>(a)], l);
    if (sten[static_cast<size_t>(a)] == center) s.center_pos = a;
  }
  require(s.center_pos >= 0, "stencil missing its center");
  s.sys.resize(n + poly_dim, n + poly_dim);
  s.sys.topLeftCorner(n, n) = phi_loc;
  s.sys.topRightCorner(n, poly_dim) = s.p_loc;
  s.sys.bottomLeftCorner(poly_dim, n) = s.p_loc.transpose();
  s.sys.bottomRightCorner(poly_dim, poly_dim).setZero();
  return s;
}

/// Stencil weights applying the operator at the center: solve
///   [Phi P; P^T 0] [w; v] = [K e_center ; Lambda p(center)].
/// The constraint block makes sum_i w_i p(x_i) = lambda p(x_center) exact.
inline Vector local_fd_weights(const LocalAssemblyContext& ctx, const std::vector<int>& sten,
                               int center, int poly_dim) {
  StencilSystem s = gather_stencil(ctx, sten, center, poly_dim);
  const int n = static_cast<int>(sten.size());
  Vector rhs(n + poly_dim);
  rhs.head(n) = s.k_loc.col(s.center_pos);
  for (int l = 0; l < poly_dim; ++l)
    rhs(n + l) = ctx.lambda(l) * s.p_loc(s.center_pos, l);
  Vector sol;
  try {
    sol = solve_linear(s.sys, Matrix(rhs)).col(0);
  } catch (const NumericalError& e) {
    throw UnisolvencyError("local_fd_weights: stencil " + std::to_string(center) +
                           " system failed (try a larger n): " + e.what());
  }
  return sol.head(n);
}

/// Local Lagrange function b_center of the stencil interpolation problem,
/// with L b_center evaluated at every stencil point.
inline Vector local_lagrange_values(const LocalAssemblyContext& ctx, const std::vector<int>& sten,
                                    int center, int poly_dim) {
  StencilSystem s = gather_stencil(ctx, sten, center, poly_dim);
  const int n = static_cast<int>(sten.size());
  Vector rhs = Vector::Zero(n + poly_dim);
  rhs(s.center_pos) = 1.0;
  Vector sol;
  try {
    sol = solve_linear(s.sys, Matrix(rhs)).col(0);
  } catch (const NumericalError& e) {
    throw UnisolvencyError("local_lagrange_column: stencil " + std::to_string(center) +
                           " system failed (try a larger n): " + e.what());
  }
  const Vector coeff_a = sol.head(n);
  const Vector coeff_b = sol.tail(poly_dim);
  Vector lam_b(poly_dim);
  for (int l = 0; l < poly_dim; ++l) lam_b(l) = ctx.lambda(l) * coeff_b(l);
  return s.k_loc * coeff_a + s.p_loc * lam_b;
}

}  // namespace detail

/// L b_k sampled over Upsilon_k, where b_k interpolates the delta at x_k on
/// its own stencil. With n = N this is exactly the global DM column.
inline std::pair<std::vector<int>, Vector> local_lagrange_column(
    const ZonalKernel& kernel, const SpectralOperator& op, const PointSet& x,
    const StencilSet& stencils, int k, int mtilde) {
  const auto ctx = detail::make_context(kernel, op, x, mtilde);
  const auto& sten = stencils.stencils[static_cast<size_t>(k)];
  return {sten, detail::local_lagrange_values(ctx, sten, k, mtilde * mtilde)};
}

/// Assemble the local DM: row j comes from the stencil Upsilon_j, so the
/// matrix applies the operator exactly on sampled harmonics of degree
/// < mtilde and reduces to the global DM when n = N.
inline LocalDM assemble_local_dm(const ZonalKernel& kernel, const SpectralOperator& op,
                                 const PointSet& x, double stencil_k, int mtilde) {
  require(mtilde >= kernel.cpd_order(), "assemble_local_dm: mtilde below kernel CPD order");
  const auto compat = check_compatibility(kernel, op, mtilde);
  require(compat.accepted, "assemble_local_dm: incompatible kernel/operator: " + compat.diagnostic);
  StencilSet stencils = build_stencils(x, stencil_k, mtilde);
  const auto ctx = detail::make_context(kernel, op, x, mtilde);
  LocalDM dm(x.size(), std::move(stencils));
  const int poly_dim = mtilde * mtilde;
  for (int j = 0; j < x.size(); ++j) {
    const auto& sten = dm.stencils().stencils[static_cast<size_t>(j)];
    dm.set_row(j, sten, detail::local_fd_weights(ctx, sten, j, poly_dim));
  }
  return dm;
}

}  // namespace spheredm
