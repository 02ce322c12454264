#pragma once

#include "spheredm/global_dm.hpp"
#include "spheredm/linalg.hpp"
#include "spheredm/types.hpp"

#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace spheredm {

/// ||u||^2 in the Phi^-1 inner product (PD energy).
inline double energy_pd(const Matrix& phi, const Vector& u) {
  const Vector w = solve_linear(phi, Matrix(u)).col(0);
  return u.dot(w);
}

/// Seminorm [u]^2 = u^T A u with A from the saddle solve; PSD, zero on
/// sampled harmonics of degree < mtilde. Roundoff-scale negatives clamp to 0.
inline double energy_cpd(const Matrix& a, const Vector& u, double a_norm) {
  const double e = u.dot(a * u);
  const double floor = -1e-12 * a_norm * u.squaredNorm();
  if (e < floor) return e;  // genuinely negative: report as-is, callers assert
  return std::max(e, 0.0);
}

inline double energy_cpd(const Matrix& a, const Vector& u) {
  return energy_cpd(a, u, spectral_norm(a));
}

/// PD energy with the collocation matrix factored once.
class PdEnergy {
 public:
  explicit PdEnergy(const Matrix& phi) : lu_(phi) {
    const double piv = lu_.matrixLU().diagonal().cwiseAbs().minCoeff();
    if (!(piv > 1e-14 * phi.cwiseAbs().maxCoeff()))
      throw NumericalError("PdEnergy: collocation matrix singular to working precision");
  }
  double operator()(const Vector& u) const { return u.dot(lu_.solve(u)); }

 private:
  Eigen::PartialPivLU<Matrix> lu_;
};

/// CPD seminorm with ||A|| cached for the clamp threshold.
class CpdEnergy {
 public:
  explicit CpdEnergy(Matrix a) : a_(std::move(a)), a_norm_(spectral_norm(a_)) {}
  double operator()(const Vector& u) const { return energy_cpd(a_, u, a_norm_); }

 private:
  Matrix a_;
  double a_norm_;
};

/// Dominant-eigenvalue magnitude by power iteration; deterministic start.
inline double spectral_radius_estimate(const Matrix& m, int iterations = 300) {
  require(m.rows() == m.cols(), "spectral_radius_estimate: matrix must be square");
  const int n = static_cast<int>(m.rows());
  if (n == 0 || m.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  Vector v(n);
  std::uint64_t state = 0x243f6a8885a308d3ull;
  for (int i = 0; i < n; ++i) {
    state = state * 6364136223846793005ull + 1442695040888963407ull;
    v(i) = static_cast<double>(state >> 11) / 9007199254740992.0 - 0.5;
  }
  v.normalize();
  double rho = 0.0;
  for (int it = 0; it < iterations; ++it) {
    Vector w = m * v;
    const double wn = w.norm();
    if (wn == 0.0) return 0.0;
    v = w / wn;
    if (std::abs(wn - rho) <= 1e-12 * wn && it > 10) return wn;
    rho = wn;
  }
  return rho;
}

struct EvolutionRun {
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<double> energies;
  std::vector<double> l2_norms;
  double dt = 0.0;
  std::string method = "rk4";
};

/// Classical 4-stage Runge-Kutta for u' = M u with a fixed step, recording
/// the supplied energy functional at every step.
inline EvolutionRun evolve(const Matrix& m, const Vector& u0, double dt, int steps,
                           const std::function<double(const Vector&)>& energy) {
  require(dt > 0.0, "evolve: dt must be > 0");
  require(steps >= 0, "evolve: steps must be >= 0");
  require(m.rows() == m.cols() && m.rows() == u0.size(), "evolve: dimension mismatch");
  EvolutionRun run;
  run.dt = dt;
  Vector u = u0;
  run.times.push_back(0.0);
  run.states.push_back(u);
  run.energies.push_back(energy(u));
  run.l2_norms.push_back(u.norm());
  for (int s = 1; s <= steps; ++s) {
    const Vector k1 = m * u;
    const Vector k2 = m * (u + 0.5 * dt * k1);
    const Vector k3 = m * (u + 0.5 * dt * k2);
    const Vector k4 = m * (u + dt * k3);
    u = u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!u.allFinite())
      throw NumericalError("evolve: state blew up at step " + std::to_string(s));
    run.times.push_back(s * dt);
    run.states.push_back(u);
    run.energies.push_back(energy(u));
    run.l2_norms.push_back(u.norm());
  }
  return run;
}

/// Default step 1 / (2 rho(M)), comfortably inside the RK4 stability
/// interval for the real-spectrum operators in scope.
inline double default_dt(const Matrix& m) {
  const double rho = spectral_radius_estimate(m);
  if (rho <= 0.0) return 1.0;
  return 1.0 / (2.0 * rho);
}

}  // namespace spheredm
