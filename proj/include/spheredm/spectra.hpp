#pragma once

#include "spheredm/block_decomp.hpp"
#include "spheredm/global_dm.hpp"
#include "spheredm/kernels.hpp"
#include "spheredm/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <vector>

namespace spheredm {

struct SpectrumReport {
  ComplexSpectrum spectrum;
  double spectral_radius = 0.0;
  double max_abs_imag = 0.0;
  double min_real = 0.0;
};

inline SpectrumReport spectrum_report(const Matrix& m) {
  SpectrumReport r;
  r.spectrum = general_eig(m);
  r.spectral_radius = r.spectrum.spectral_radius();
  r.max_abs_imag = r.spectrum.max_abs_imag();
  r.min_real = r.spectrum.min_real();
  return r;
}

/// How many copies of each exact polynomial eigenvalue to exclude per degree.
enum class ExclusionMultiplicity { full, single };  // 2l+1 copies vs one copy

struct DistanceReport {
  double value = 0.0;      ///< max-min relative distance (the plotted metric)
  double value_abs = 0.0;  ///< max-min absolute distance (theorem checks)
  std::vector<std::pair<double, std::complex<double>>> excluded_local;
  std::vector<std::pair<double, std::complex<double>>> excluded_global;
  std::vector<std::pair<std::complex<double>, std::complex<double>>> matching;
};

namespace detail {

/// Remove, per degree l < mtilde, the eigenvalues nearest to lambda_l
/// (greedy nearest-first, no reuse). Returns the retained eigenvalues.
inline std::vector<std::complex<double>> exclude_polynomial_eigenvalues(
    const std::vector<std::complex<double>>& spec, const SpectralOperator& op, int mtilde,
    ExclusionMultiplicity mult,
    std::vector<std::pair<double, std::complex<double>>>* excluded) {
  std::vector<std::complex<double>> pool = spec;
  for (int l = 0; l < mtilde; ++l) {
    const double target = op.lambda(l);
    const int copies = (mult == ExclusionMultiplicity::full) ? (2 * l + 1) : 1;
    for (int c = 0; c < copies && !pool.empty(); ++c) {
      size_t best = 0;
      double best_d = std::abs(pool[0] - target);
      for (size_t i = 1; i < pool.size(); ++i) {
        const double d = std::abs(pool[i] - target);
        if (d < best_d) {
          best_d = d;
          best = i;
        }
      }
      if (excluded) excluded->push_back({target, pool[best]});
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(best));
    }
  }
  return pool;
}

}  // namespace detail

/// Directed spectra distance: max over retained local eigenvalues mu of the
/// min over retained global eigenvalues mu* of |mu - mu*| / |mu*|. Exact
/// polynomial eigenvalues (degree < mtilde) are excluded from both spectra
/// first; near-zero global eigenvalues are skipped as relative-denominator
/// targets but kept for the absolute variant.
inline DistanceReport filtered_spectra_distance(const SpectrumReport& local,
                                                const SpectrumReport& global,
                                                const SpectralOperator& op, int mtilde,
                                                ExclusionMultiplicity mult =
                                                    ExclusionMultiplicity::full) {
  DistanceReport rep;
  const auto retained_local = detail::exclude_polynomial_eigenvalues(
      local.spectrum.eigenvalues, op, mtilde, mult, &rep.excluded_local);
  const auto retained_global = detail::exclude_polynomial_eigenvalues(
      global.spectrum.eigenvalues, op, mtilde, mult, &rep.excluded_global);
  require(!retained_local.empty() && !retained_global.empty(),
          "filtered_spectra_distance: no retained eigenvalues");

  const double zero_cut = 1e-12 * global.spectral_radius;
  bool any_rel_target = false;
  for (const auto& mu_star : retained_global)
    if (std::abs(mu_star) >= zero_cut) any_rel_target = true;
  if (!any_rel_target)
    throw NumericalError("filtered_spectra_distance: all match targets are near zero");

  double max_rel = 0.0, max_abs = 0.0;
  for (const auto& mu : retained_local) {
    double min_rel = std::numeric_limits<double>::infinity();
    double min_abs = std::numeric_limits<double>::infinity();
    std::complex<double> best{};
    for (const auto& mu_star : retained_global) {
      const double d = std::abs(mu - mu_star);
      min_abs = std::min(min_abs, d);
      if (std::abs(mu_star) < zero_cut) continue;
      const double rel = d / std::abs(mu_star);
      if (rel < min_rel) {
        min_rel = rel;
        best = mu_star;
      }
    }
    rep.matching.push_back({mu, best});
    max_rel = std::max(max_rel, min_rel);
    max_abs = std::max(max_abs, min_abs);
  }
  rep.value = max_rel;
  rep.value_abs = max_abs;
  return rep;
}

/// One row of the ||R|| vs q experiment.
struct RNormRow {
  int n = 0;
  double q = 0.0;
  double norm_r = 0.0;
  bool ok = false;
  std::string error;
};

/// Build X, the global DM, and the decomposition for each N; record the exact
/// separation radius and ||R||. mtilde = 0 (PD-as-CPD with an empty
/// polynomial block) has no coupling block, recorded as ||R|| = 0.
/// Failures are recorded per row, not fatal.
inline std::vector<RNormRow> r_norm_table(const ZonalKernel& kernel, const SpectralOperator& op,
                                          int mtilde, PointFamily family,
                                          const std::vector<int>& n_list) {
  std::vector<RNormRow> rows;
  for (int n : n_list) {
    RNormRow row;
    row.n = n;
    try {
      PointSet x = (family == PointFamily::fibonacci) ? generate_fibonacci(n)
                   : (family == PointFamily::hammersley)
                       ? generate_hammersley(n)
                       : generate_min_energy(n, 500);
      row.q = separation_radius(x);
      if (mtilde == 0) {
        GlobalDM dm = global_dm_pd(kernel, op, x);
        (void)dm;
        row.norm_r = 0.0;
      } else {
        GlobalDM dm = global_dm_cpd(kernel, op, x, mtilde);
        BlockDecomposition bd = decompose(dm);
        row.norm_r = spectral_norm(bd.r);
      }
      row.ok = true;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(row);
  }
  return rows;
}

enum class FitModel { algebraic, exponential };

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double rms_residual = 0.0;
};

/// Least squares in (log x, log y) for the algebraic model and (x, log y)
/// for the exponential model.
inline FitResult fit_rate(const std::vector<double>& xs, const std::vector<double>& ys,
                          FitModel model) {
  require(xs.size() == ys.size(), "fit_rate: length mismatch");
  require(xs.size() >= 3, "fit_rate: need at least 3 points");
  const size_t n = xs.size();
  std::vector<double> u(n), v(n);
  for (size_t i = 0; i < n; ++i) {
    if (ys[i] <= 0.0) throw std::invalid_argument("fit_rate: y values must be positive");
    if (model == FitModel::algebraic && xs[i] <= 0.0)
      throw std::invalid_argument("fit_rate: x values must be positive for the algebraic model");
    u[i] = (model == FitModel::algebraic) ? std::log(xs[i]) : xs[i];
    v[i] = std::log(ys[i]);
  }
  double su = 0, sv = 0, suu = 0, suv = 0;
  for (size_t i = 0; i < n; ++i) {
    su += u[i];
    sv += v[i];
    suu += u[i] * u[i];
    suv += u[i] * v[i];
  }
  const double denom = n * suu - su * su;
  if (denom <= 0.0) throw std::invalid_argument("fit_rate: degenerate abscissae");
  FitResult out;
  out.slope = (n * suv - su * sv) / denom;
  out.intercept = (sv - out.slope * su) / n;
  double ss = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double r = v[i] - (out.slope * u[i] + out.intercept);
    ss += r * r;
  }
  out.rms_residual = std::sqrt(ss / n);
  return out;
}

}  // namespace spheredm
