#pragma once

#include "spheredm/geometry.hpp"
#include "spheredm/types.hpp"

#include <cmath>
#include <numbers>

namespace spheredm {

/// Laplace-Beltrami eigenvalue nu_l = -l(l+d-1) on S^d.
inline double laplace_eigenvalue(int degree, int d = 2) {
  require(degree >= 0, "laplace_eigenvalue: degree must be >= 0");
  require(d >= 1, "laplace_eigenvalue: dimension must be >= 1");
  return -static_cast<double>(degree) * (degree + d - 1);
}

/// Dimension of the degree-l eigenspace: (2l+d-1) Gamma(l+d-1) / (Gamma(l+1) Gamma(d)).
inline int eigenspace_dim(int degree, int d = 2) {
  require(degree >= 0, "eigenspace_dim: degree must be >= 0");
  require(d >= 1, "eigenspace_dim: dimension must be >= 1");
  if (d == 1) return degree == 0 ? 1 : 2;
  // (2l+d-1) * binom(l+d-2, l) / (d-1), exact in integers for small d
  long long binom = 1;
  for (int i = 1; i <= d - 2; ++i) binom = binom * (degree + i) / i;
  return static_cast<int>((2LL * degree + d - 1) * binom / (d - 1));
}

/// Legendre polynomial P_l(t), normalized so P_l(1) = 1; three-term recurrence.
inline double legendre(int degree, double t) {
  require(degree >= 0, "legendre: degree must be >= 0");
  require(std::abs(t) <= 1.0 + 1e-14, "legendre: |t| must be <= 1");
  t = std::clamp(t, -1.0, 1.0);
  if (degree == 0) return 1.0;
  double pm1 = 1.0, p = t;
  for (int l = 1; l < degree; ++l) {
    const double pn = ((2.0 * l + 1.0) * t * p - l * pm1) / (l + 1.0);
    pm1 = p;
    p = pn;
  }
  return p;
}

/// Index into the real spherical harmonic basis: degree l and order mu in
/// 1..2l+1. Orders enumerate m=0 first, then (cos, sin) pairs for m=1..l.
struct HarmonicIndex {
  int degree = 0;
  int order = 1;
};

constexpr int kMaxHarmonicDegree = 32;

namespace detail {

/// Associated Legendre P_l^m(x) without the Condon-Shortley phase,
/// P_m^m = (2m-1)!! (1-x^2)^(m/2), upward recurrence in degree.
inline double assoc_legendre(int l, int m, double x) {
  double pmm = 1.0;
  if (m > 0) {
    const double somx2 = std::sqrt(std::max(0.0, (1.0 - x) * (1.0 + x)));
    double fact = 1.0;
    for (int i = 0; i < m; ++i) {
      pmm *= fact * somx2;
      fact += 2.0;
    }
  }
  if (l == m) return pmm;
  double pmmp1 = x * (2.0 * m + 1.0) * pmm;
  if (l == m + 1) return pmmp1;
  double pll = 0.0;
  for (int ll = m + 2; ll <= l; ++ll) {
    pll = ((2.0 * ll - 1.0) * x * pmmp1 - (ll + m - 1.0) * pmm) / (ll - m);
    pmm = pmmp1;
    pmmp1 = pll;
  }
  return pll;
}

inline double factorial_ratio(int l, int m) {
  // (l-m)! / (l+m)!
  double r = 1.0;
  for (int i = l - m + 1; i <= l + m; ++i) r /= i;
  return r;
}

}  // namespace detail

/// Real spherical harmonic Y_l^mu(x), orthonormal in L2(S^2).
inline double eval_harmonic(const HarmonicIndex& idx, const SpherePoint& p) {
  const int l = idx.degree;
  require(l >= 0 && l <= kMaxHarmonicDegree,
          "eval_harmonic: unsupported degree " + std::to_string(l));
  require(idx.order >= 1 && idx.order <= 2 * l + 1, "eval_harmonic: order out of range");
  const double z = std::clamp(p.z, -1.0, 1.0);
  if (idx.order == 1) {
    return std::sqrt((2.0 * l + 1.0) / (4.0 * std::numbers::pi)) * detail::assoc_legendre(l, 0, z);
  }
  const int m = (idx.order) / 2;          // orders 2,3 -> m=1; 4,5 -> m=2; ...
  const bool is_cos = (idx.order % 2 == 0);  // cosine before sine at each |m|
  const double norm = std::sqrt(2.0 * (2.0 * l + 1.0) / (4.0 * std::numbers::pi) *
                                detail::factorial_ratio(l, m));
  const double phi = std::atan2(p.y, p.x);
  const double trig = is_cos ? std::cos(m * phi) : std::sin(m * phi);
  return norm * detail::assoc_legendre(l, m, z) * trig;
}

/// Degree-major, order-minor enumeration of all harmonics with l <= max_degree.
/// On S^2 the total count is M = (max_degree + 1)^2.
class HarmonicBasisEnumeration {
 public:
  explicit HarmonicBasisEnumeration(int max_degree) : max_degree_(max_degree) {
    require(max_degree >= 0 && max_degree <= kMaxHarmonicDegree,
            "HarmonicBasisEnumeration: max_degree out of range");
    for (int l = 0; l <= max_degree; ++l)
      for (int mu = 1; mu <= 2 * l + 1; ++mu) indices_.push_back({l, mu});
  }

  int max_degree() const { return max_degree_; }
  int size() const { return static_cast<int>(indices_.size()); }
  const HarmonicIndex& index(int j) const { return indices_[static_cast<size_t>(j)]; }

 private:
  int max_degree_;
  std::vector<HarmonicIndex> indices_;
};

/// Vandermonde matrix P with P(k, j) = p_j(x_k), N x M.
inline Matrix vandermonde(const PointSet& x, const HarmonicBasisEnumeration& basis) {
  const int n = x.size();
  const int m = basis.size();
  require(n >= m, "vandermonde: need N >= M");
  Matrix p(n, m);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < m; ++j) p(k, j) = eval_harmonic(basis.index(j), x[k]);
  return p;
}

}  // namespace spheredm
