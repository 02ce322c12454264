#pragma once

#include "spheredm/harmonics.hpp"
#include "spheredm/types.hpp"
#include "spheredm/zonal.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace spheredm {

enum class KernelKind { surface_spline, inverse_multiquadric };

/// Zonal kernel Phi(x, y) = g(x . y) with a closed-form profile.
///
/// Surface spline of order m: g(t) = (-1)^m (1-t)^(m-1) log(1-t), CPD of
/// order m. The (-1)^m factor makes the Mercer coefficients positive for
/// l >= m, which the CPD characterization requires; the differentiation
/// matrix itself is invariant under any nonzero kernel scaling.
/// Inverse multiquadric: g(t) = (1 + eps^2 (1-t))^(-1/2), PD (order 0).
class ZonalKernel {
 public:
  static ZonalKernel surface_spline(int m) {
    require(m >= 2, "surface_spline: order m must be >= 2");
    ZonalKernel k;
    k.kind_ = KernelKind::surface_spline;
    k.m_ = m;
    k.cpd_order_ = m;
    Poly pw = Poly::constant(m % 2 == 0 ? 1.0 : -1.0);
    const Poly one_minus_t({1.0, -1.0});
    for (int i = 0; i < m - 1; ++i) pw = pw * one_minus_t;
    k.profile_ = ZonalFunction::log_term(pw);
    return k;
  }

  static ZonalKernel inverse_multiquadric(double eps) {
    require(eps > 0.0, "inverse_multiquadric: eps must be > 0");
    ZonalKernel k;
    k.kind_ = KernelKind::inverse_multiquadric;
    k.eps_ = eps;
    k.cpd_order_ = 0;
    k.profile_ = ZonalFunction::imq_term(eps * eps, 0, Poly::constant(1.0));
    return k;
  }

  KernelKind kind() const { return kind_; }
  int spline_order() const { return m_; }
  double eps() const { return eps_; }
  int cpd_order() const { return cpd_order_; }
  const ZonalFunction& profile() const { return profile_; }
  double eval(double t) const { return profile_.eval(t); }

  /// Same kernel with the profile scaled by s > 0. The DM is invariant under
  /// this, which the scale-invariance diagnostics exercise.
  ZonalKernel scaled(double s) const {
    require(s > 0.0, "ZonalKernel::scaled: scale must be positive");
    ZonalKernel k = *this;
    k.profile_ = profile_.scaled(s);
    return k;
  }

  std::string spec_string() const {
    std::ostringstream os;
    if (kind_ == KernelKind::surface_spline)
      os << "ss:m=" << m_;
    else
      os << "imq:eps=" << eps_;
    return os.str();
  }

 private:
  ZonalKernel() = default;
  KernelKind kind_ = KernelKind::surface_spline;
  int m_ = 0;
  double eps_ = 0.0;
  int cpd_order_ = 0;
  ZonalFunction profile_;
};

/// Spectral operator L = p(Delta): lambda_l = p(nu_l) with nu_l = -l(l+d-1).
class SpectralOperator {
 public:
  explicit SpectralOperator(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
    require(!coeffs_.empty(), "SpectralOperator: empty coefficient list");
  }

  static SpectralOperator from_poly(std::vector<double> coeffs) {
    return SpectralOperator(std::move(coeffs));
  }

  const std::vector<double>& coeffs() const { return coeffs_; }

  int degree() const {
    int deg = 0;
    for (size_t i = 0; i < coeffs_.size(); ++i)
      if (coeffs_[i] != 0.0) deg = static_cast<int>(i);
    return deg;
  }

  double eval_p(double x) const {
    double v = 0.0;
    for (size_t i = coeffs_.size(); i-- > 0;) v = v * x + coeffs_[i];
    return v;
  }

  double lambda(int degree, int d = 2) const { return eval_p(laplace_eigenvalue(degree, d)); }

  std::string spec_string() const {
    std::ostringstream os;
    os << "p=";
    for (size_t i = 0; i < coeffs_.size(); ++i) os << (i ? "," : "") << coeffs_[i];
    return os.str();
  }

 private:
  std::vector<double> coeffs_;
};

struct CompatibilityResult {
  bool accepted = false;
  std::string diagnostic;
};

/// Assumption-1 compatibility between kernel and operator. For surface
/// splines with a degree-L polynomial operator the summability condition is
/// equivalent to L < m - d/2, i.e. L < m - 1 on S^2. IMQ coefficients decay
/// exponentially, so every polynomial operator is admissible.
inline CompatibilityResult check_compatibility(const ZonalKernel& kernel,
                                               const SpectralOperator& op, int mtilde) {
  require(mtilde >= kernel.cpd_order(), "check_compatibility: mtilde below kernel CPD order");
  std::ostringstream os;
  if (kernel.kind() == KernelKind::inverse_multiquadric) {
    os << "imq coefficients decay exponentially; operator degree " << op.degree()
       << " accepted";
    return {true, os.str()};
  }
  const int l_deg = op.degree();
  const int m = kernel.spline_order();
  const bool ok = l_deg < m - 1;
  os << "surface spline m=" << m << ": require L < m - d/2, i.e. " << l_deg << " < " << (m - 1)
     << (ok ? " holds" : " fails");
  return {ok, os.str()};
}

/// Psi = L Phi = sum_i a_i Delta^i(profile), computed symbolically.
inline ZonalFunction apply_operator(const ZonalKernel& kernel, const SpectralOperator& op) {
  ZonalFunction psi = kernel.profile().scaled(op.coeffs()[0]);
  ZonalFunction power = kernel.profile();
  for (size_t i = 1; i < op.coeffs().size(); ++i) {
    power = apply_zonal_laplacian(power);
    if (op.coeffs()[i] != 0.0) psi = psi + power.scaled(op.coeffs()[i]);
  }
  return psi;
}

namespace detail {

/// Gauss-Legendre nodes and weights on [-1, 1], Newton iteration on P_n.
inline void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(static_cast<size_t>(n), 0.0);
  weights.assign(static_cast<size_t>(n), 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double pm1 = 1.0, p = x;
      for (int l = 1; l < n; ++l) {
        const double pn = ((2.0 * l + 1.0) * x * p - l * pm1) / (l + 1.0);
        pm1 = p;
        p = pn;
      }
      dp = n * (x * p - pm1) / (x * x - 1.0);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[static_cast<size_t>(i)] = -x;
    nodes[static_cast<size_t>(n - 1 - i)] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    weights[static_cast<size_t>(i)] = w;
    weights[static_cast<size_t>(n - 1 - i)] = w;
  }
}

}  // namespace detail

/// Mercer coefficient c_l of the kernel's zonal expansion
///   g(t) = sum_l c_l (2l+1)/(4 pi) P_l(t).
/// Surface spline: |prod_{j=0}^{m-1}(nu_l + j(j+1))|^-1 for l >= m (positive
/// by convention; the unknown global factor cancels in every matrix the
/// library builds). IMQ: 2 pi Integral g P_l dt by Gauss-Legendre quadrature
/// with 64 + 2l nodes.
inline double mercer_coeff(const ZonalKernel& kernel, int degree) {
  require(degree >= 0, "mercer_coeff: degree must be >= 0");
  if (kernel.kind() == KernelKind::surface_spline) {
    const int m = kernel.spline_order();
    if (degree < m)
      throw std::invalid_argument("mercer_coeff: surface spline formula needs l >= m (zero factor)");
    const double nu = laplace_eigenvalue(degree);
    double prod = 1.0;
    for (int j = 0; j < m; ++j) prod *= nu + static_cast<double>(j) * (j + 1);
    return 1.0 / std::abs(prod);
  }
  std::vector<double> nodes, weights;
  detail::gauss_legendre(64 + 2 * degree, nodes, weights);
  double integral = 0.0;
  for (size_t i = 0; i < nodes.size(); ++i)
    integral += weights[i] * kernel.eval(nodes[i]) * legendre(degree, nodes[i]);
  return 2.0 * std::numbers::pi * integral;
}

/// Coefficient rule c_l for a kernel; surface spline sums start at l = m.
class MercerCoefficients {
 public:
  explicit MercerCoefficients(ZonalKernel kernel) : kernel_(std::move(kernel)) {}
  int start_degree() const {
    return kernel_.kind() == KernelKind::surface_spline ? kernel_.spline_order() : 0;
  }
  double operator()(int degree) const { return mercer_coeff(kernel_, degree); }
  const ZonalKernel& kernel() const { return kernel_; }

 private:
  ZonalKernel kernel_;
};

/// Truncated Mercer series sum_{l <= l_max} c_l (2l+1)/(4 pi) P_l(t),
/// starting at the kernel's start degree.
inline double truncated_series_eval(const MercerCoefficients& coeffs, double t, int l_max) {
  require(std::abs(t) <= 1.0 + 1e-14, "truncated_series_eval: |t| must be <= 1");
  t = std::clamp(t, -1.0, 1.0);
  const int start = coeffs.start_degree();
  if (l_max < start) return 0.0;
  // IMQ coefficients come from quadrature; cache-free evaluation is fine at
  // the l_max values used in practice. Legendre values by running recurrence.
  double sum = 0.0;
  double pl = 1.0, plm1 = 0.0;
  for (int l = 0; l <= l_max; ++l) {
    if (l >= start)
      sum += coeffs(l) * (2.0 * l + 1.0) / (4.0 * std::numbers::pi) * pl;
    const double pn = ((2.0 * l + 1.0) * t * pl - l * plm1) / (l + 1.0);
    plm1 = pl;
    pl = pn;
  }
  return sum;
}

/// Parse "ss:m=3" or "imq:eps=2.0".
inline ZonalKernel parse_kernel(const std::string& s) {
  if (s.rfind("ss:m=", 0) == 0) {
    const int m = std::stoi(s.substr(5));
    return ZonalKernel::surface_spline(m);
  }
  if (s.rfind("imq:eps=", 0) == 0) {
    const double eps = std::stod(s.substr(8));
    return ZonalKernel::inverse_multiquadric(eps);
  }
  throw std::invalid_argument("parse_kernel: expected 'ss:m=<int>' or 'imq:eps=<real>', got '" +
                              s + "'");
}

/// Parse "p=a0,a1,..." meaning p(x) = a0 + a1 x + ...
inline SpectralOperator parse_operator(const std::string& s) {
  require(s.rfind("p=", 0) == 0, "parse_operator: expected 'p=a0,a1,...', got '" + s + "'");
  std::vector<double> coeffs;
  std::string body = s.substr(2);
  std::istringstream ss(body);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) throw std::invalid_argument("parse_operator: empty coefficient in '" + s + "'");
    coeffs.push_back(std::stod(tok));
  }
  require(!coeffs.empty(), "parse_operator: no coefficients in '" + s + "'");
  return SpectralOperator(std::move(coeffs));
}

}  // namespace spheredm
