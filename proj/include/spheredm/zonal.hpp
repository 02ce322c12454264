#pragma once

#include "spheredm/types.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace spheredm {

/// Dense polynomial in t, ascending coefficients.
class Poly {
 public:
  Poly() = default;
  explicit Poly(std::vector<double> c) : c_(std::move(c)) { trim(); }
  static Poly constant(double v) { return Poly({v}); }
  static Poly monomial(int deg, double v = 1.0) {
    std::vector<double> c(static_cast<size_t>(deg) + 1, 0.0);
    c.back() = v;
    return Poly(std::move(c));
  }

  bool is_zero() const { return c_.empty(); }
  int degree() const { return c_.empty() ? -1 : static_cast<int>(c_.size()) - 1; }
  const std::vector<double>& coeffs() const { return c_; }

  double eval(double t) const {
    double v = 0.0;
    for (size_t i = c_.size(); i-- > 0;) v = v * t + c_[i];
    return v;
  }

  double max_abs_coeff() const {
    double m = 0.0;
    for (double v : c_) m = std::max(m, std::abs(v));
    return m;
  }

  Poly derivative() const {
    if (c_.size() <= 1) return Poly();
    std::vector<double> d(c_.size() - 1);
    for (size_t i = 1; i < c_.size(); ++i) d[i - 1] = c_[i] * static_cast<double>(i);
    return Poly(std::move(d));
  }

  Poly operator+(const Poly& o) const {
    std::vector<double> s(std::max(c_.size(), o.c_.size()), 0.0);
    for (size_t i = 0; i < c_.size(); ++i) s[i] += c_[i];
    for (size_t i = 0; i < o.c_.size(); ++i) s[i] += o.c_[i];
    return Poly(std::move(s));
  }

  Poly operator*(const Poly& o) const {
    if (is_zero() || o.is_zero()) return Poly();
    std::vector<double> p(c_.size() + o.c_.size() - 1, 0.0);
    for (size_t i = 0; i < c_.size(); ++i)
      for (size_t j = 0; j < o.c_.size(); ++j) p[i + j] += c_[i] * o.c_[j];
    return Poly(std::move(p));
  }

  Poly scaled(double s) const {
    std::vector<double> c = c_;
    for (double& v : c) v *= s;
    return Poly(std::move(c));
  }

  /// Exact division by (1 - t). Throws when the remainder is not negligible.
  Poly divide_by_one_minus_t() const {
    if (is_zero()) return Poly();
    const double rem = eval(1.0);
    if (std::abs(rem) > 1e-9 * std::max(1.0, max_abs_coeff()))
      throw NumericalError("zonal algebra: polynomial not divisible by (1 - t)");
    // synthetic division: p(t) = (1-t) s(t) with s built from the top down
    std::vector<double> s(c_.size() - 1, 0.0);
    double carry = 0.0;
    for (size_t i = c_.size(); i-- > 1;) {
      carry += c_[i];
      s[i - 1] = -carry;  // note (1-t) = -(t-1)
    }
    return Poly(std::move(s));
  }

 private:
  void trim() {
    double scale = std::max(1.0, max_abs_coeff());
    while (!c_.empty() && std::abs(c_.back()) <= 1e-300 * scale) c_.pop_back();
  }

  std::vector<double> c_;
};

/// Zonal function on [-1, 1]: a sum of terms
///   poly(t)  +  logp(t) * log(1-t)  +  sum_k imq[k](t) * (1 + eps2 (1-t))^(-1/2 - k).
/// The class is closed under d/dt provided every log-carrying polynomial is
/// divisible by (1-t); evaluation at t = 1 uses the analytic limit.
class ZonalFunction {
 public:
  Poly poly;
  Poly logp;
  double eps2 = 0.0;
  std::vector<Poly> imq;

  static ZonalFunction from_poly(Poly p) {
    ZonalFunction f;
    f.poly = std::move(p);
    return f;
  }

  static ZonalFunction log_term(Poly p) {
    ZonalFunction f;
    f.logp = std::move(p);
    return f;
  }

  static ZonalFunction imq_term(double eps2, int k, Poly p) {
    ZonalFunction f;
    f.eps2 = eps2;
    f.imq.resize(static_cast<size_t>(k) + 1);
    f.imq[static_cast<size_t>(k)] = std::move(p);
    return f;
  }

  bool has_log() const { return !logp.is_zero(); }
  bool has_imq() const {
    return std::any_of(imq.begin(), imq.end(), [](const Poly& p) { return !p.is_zero(); });
  }

  ZonalFunction operator+(const ZonalFunction& o) const {
    if (has_imq() && o.has_imq() && eps2 != o.eps2)
      throw std::invalid_argument("ZonalFunction: mixing different IMQ shape parameters");
    ZonalFunction r;
    r.poly = poly + o.poly;
    r.logp = logp + o.logp;
    r.eps2 = has_imq() ? eps2 : o.eps2;
    r.imq.resize(std::max(imq.size(), o.imq.size()));
    for (size_t k = 0; k < imq.size(); ++k) r.imq[k] = r.imq[k] + imq[k];
    for (size_t k = 0; k < o.imq.size(); ++k) r.imq[k] = r.imq[k] + o.imq[k];
    return r;
  }

  ZonalFunction scaled(double s) const {
    ZonalFunction r = *this;
    r.poly = r.poly.scaled(s);
    r.logp = r.logp.scaled(s);
    for (auto& p : r.imq) p = p.scaled(s);
    return r;
  }

  ZonalFunction times_poly(const Poly& m) const {
    ZonalFunction r = *this;
    r.poly = r.poly * m;
    r.logp = r.logp * m;
    for (auto& p : r.imq) p = p * m;
    return r;
  }

  /// d/dt within the algebra. For the log term,
  ///   (q log(1-t))' = q' log(1-t) - q/(1-t),
  /// so q must be divisible by (1-t).
  ZonalFunction derivative() const {
    ZonalFunction r;
    r.poly = poly.derivative();
    r.eps2 = eps2;
    if (has_log()) {
      r.logp = logp.derivative();
      const Poly ratio = logp.divide_by_one_minus_t();
      r.poly = r.poly + ratio.scaled(-1.0);
    }
    // d/dt [ p * u^(-1/2-k) ] = p' u^(-1/2-k) + p (1/2+k) eps2 u^(-3/2-k), u = 1 + eps2 (1-t)
    r.imq.resize(imq.size() + (has_imq() ? 1 : 0));
    for (size_t k = 0; k < imq.size(); ++k) {
      if (imq[k].is_zero()) continue;
      r.imq[k] = r.imq[k] + imq[k].derivative();
      r.imq[k + 1] = r.imq[k + 1] + imq[k].scaled((0.5 + static_cast<double>(k)) * eps2);
    }
    return r;
  }

  /// Evaluate with t clamped to [-1, 1]; at t = 1 log terms contribute their
  /// analytic limit (zero when the log polynomial vanishes at 1).
  double eval(double t) const {
    t = std::clamp(t, -1.0, 1.0);
    double v = poly.eval(t);
    if (has_log()) {
      if (t == 1.0) {
        if (std::abs(logp.eval(1.0)) > 1e-9 * std::max(1.0, logp.max_abs_coeff()))
          throw NumericalError("ZonalFunction: divergent log term at t = 1");
        // limit of q(t) log(1-t) with q(1) = 0 is 0
      } else {
        v += logp.eval(t) * std::log1p(-t);
      }
    }
    if (has_imq()) {
      const double u = 1.0 + eps2 * (1.0 - t);
      for (size_t k = 0; k < imq.size(); ++k) {
        if (imq[k].is_zero()) continue;
        v += imq[k].eval(t) * std::pow(u, -0.5 - static_cast<double>(k));
      }
    }
    return v;
  }
};

/// Laplace-Beltrami operator on zonal functions of S^2:
/// (Delta f)(t) = (1 - t^2) f''(t) - 2 t f'(t), computed symbolically.
inline ZonalFunction apply_zonal_laplacian(const ZonalFunction& f, int d = 2) {
  require(d == 2, "apply_zonal_laplacian: implemented for S^2 only");
  const ZonalFunction f1 = f.derivative();
  const ZonalFunction f2 = f1.derivative();
  const Poly one_minus_t2({1.0, 0.0, -1.0});
  const Poly minus_two_t({0.0, -2.0});
  return f2.times_poly(one_minus_t2) + f1.times_poly(minus_two_t);
}

}  // namespace spheredm
