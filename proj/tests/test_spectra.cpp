#include "spheredm/spectra.hpp"

#include "spheredm/local_dm.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace spheredm;

namespace {

const SpectralOperator kNegLap({0.0, -1.0});

SpectrumReport report_from(const std::vector<std::complex<double>>& eigs) {
  SpectrumReport r;
  r.spectrum.eigenvalues = eigs;
  std::sort(r.spectrum.eigenvalues.begin(), r.spectrum.eigenvalues.end(),
            [](auto a, auto b) {
              if (a.real() != b.real()) return a.real() < b.real();
              return a.imag() < b.imag();
            });
  r.spectral_radius = r.spectrum.spectral_radius();
  r.max_abs_imag = r.spectrum.max_abs_imag();
  r.min_real = r.spectrum.min_real();
  return r;
}

}  // namespace

TEST_CASE("spectrum report summaries") {
  Matrix d = Matrix::Zero(3, 3);
  d(0, 0) = 1.0;
  d(1, 1) = 2.0;
  d(2, 2) = 3.0;
  const SpectrumReport r = spectrum_report(d);
  CHECK(r.min_real == Catch::Approx(1.0));
  CHECK(r.spectral_radius == Catch::Approx(3.0));
  CHECK(r.max_abs_imag == Catch::Approx(0.0).margin(1e-14));

  Matrix rot(2, 2);
  rot << 0, 1, -1, 0;
  const SpectrumReport r2 = spectrum_report(rot);
  CHECK(r2.min_real == Catch::Approx(0.0).margin(1e-14));
  CHECK(r2.max_abs_imag == Catch::Approx(1.0));
}

TEST_CASE("filtered spectra distance") {
  // mtilde = 1 excludes one eigenvalue near lambda_0 = 0 from each spectrum
  SECTION("identical spectra give zero") {
    const auto rep = report_from({{0.0, 0.0}, {5.0, 0.0}, {9.0, 0.0}});
    const DistanceReport d = filtered_spectra_distance(rep, rep, kNegLap, 1);
    CHECK(d.value == 0.0);
    CHECK(d.value_abs == 0.0);
  }
  SECTION("uniform shift is bounded by the shift") {
    const auto global = report_from({{0.0, 0.0}, {2.0, 0.0}, {5.0, 0.0}, {9.0, 0.0}});
    const double delta = 1e-3;
    const auto local =
        report_from({{0.0 + delta, 0.0}, {2.0 + delta, 0.0}, {5.0 + delta, 0.0}, {9.0 + delta, 0.0}});
    const DistanceReport d = filtered_spectra_distance(local, global, kNegLap, 1);
    CHECK(d.value <= delta + 1e-15);
    CHECK(d.value_abs <= delta + 1e-15);
  }
  SECTION("the metric is directed") {
    // local has an outlier: large distance; global-side extra values are free
    const auto global = report_from({{0.0, 0.0}, {2.0, 0.0}, {4.0, 0.0}});
    const auto local = report_from({{0.0, 0.0}, {2.0, 0.0}, {40.0, 0.0}});
    const double ab = filtered_spectra_distance(local, global, kNegLap, 1).value;
    const double ba = filtered_spectra_distance(global, local, kNegLap, 1).value;
    CHECK(ab != Catch::Approx(ba).margin(1e-9));
    CHECK(ab > ba);
  }
  SECTION("exclusion counts match mtilde squared") {
    const PointSet x = generate_fibonacci(101);
    const ZonalKernel ss3 = ZonalKernel::surface_spline(3);
    const GlobalDM global = global_dm_cpd(ss3, kNegLap, x, 3);
    const LocalDM local = assemble_local_dm(ss3, kNegLap, x, 4.0, 3);
    const SpectrumReport rg = spectrum_report(global.m);
    const SpectrumReport rl = spectrum_report(local.to_dense());
    const DistanceReport d = filtered_spectra_distance(rl, rg, kNegLap, 3);
    CHECK(d.excluded_local.size() == 9);
    CHECK(d.excluded_global.size() == 9);
    // the removed local eigenvalues sit on the exact polynomial values
    for (const auto& [target, removed] : d.excluded_local)
      CHECK(std::abs(removed - std::complex<double>(target, 0.0)) < 1e-5);
    CHECK(d.value >= 0.0);
  }
  SECTION("single-copy exclusion mode removes one per degree") {
    const auto global = report_from({{0.0, 0.0}, {2.0, 0.0}, {2.0, 0.0}, {5.0, 0.0}});
    const auto local = global;
    DistanceReport d = filtered_spectra_distance(local, global, kNegLap, 2,
                                                 ExclusionMultiplicity::single);
    CHECK(d.excluded_local.size() == 2);  // one for degree 0, one for degree 1
  }
  SECTION("near-zero targets are skipped as denominators") {
    const auto global = report_from({{0.0, 0.0}, {1e-15, 0.0}, {5.0, 0.0}});
    const auto local = report_from({{0.0, 0.0}, {4.0, 0.0}, {5.0, 0.0}});
    // mtilde = 1 removes the exact zero; 1e-15 remains but cannot be a
    // relative-denominator target
    const DistanceReport d = filtered_spectra_distance(local, global, kNegLap, 1);
    CHECK(d.value == Catch::Approx(0.2));  // |4 - 5| / 5
  }
}

TEST_CASE("rnorm table") {
  const ZonalKernel ss3 = ZonalKernel::surface_spline(3);
  const auto rows = r_norm_table(ss3, kNegLap, 3, PointFamily::fibonacci, {101});
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].ok);
  CHECK(rows[0].n == 101);
  CHECK(rows[0].q > 0.0);
  CHECK(rows[0].norm_r >= 0.0);
  SECTION("failures are recorded, not fatal") {
    const auto bad = r_norm_table(ss3, kNegLap, 3, PointFamily::fibonacci, {101, 4});
    REQUIRE(bad.size() == 2);
    CHECK(bad[0].ok);
    CHECK_FALSE(bad[1].ok);
    CHECK_FALSE(bad[1].error.empty());
  }
}

TEST_CASE("rate fitting") {
  SECTION("algebraic slope recovery") {
    std::vector<double> xs, ys;
    for (double x : {0.5, 1.0, 2.0, 4.0}) {
      xs.push_back(x);
      ys.push_back(x * x);
    }
    const FitResult f = fit_rate(xs, ys, FitModel::algebraic);
    CHECK(f.slope == Catch::Approx(2.0).margin(1e-10));
    CHECK(f.rms_residual < 1e-12);
  }
  SECTION("exponential slope recovery") {
    std::vector<double> xs, ys;
    for (double x : {0.0, 1.0, 2.0, 3.0}) {
      xs.push_back(x);
      ys.push_back(std::exp(-x));
    }
    const FitResult f = fit_rate(xs, ys, FitModel::exponential);
    CHECK(f.slope == Catch::Approx(-1.0).margin(1e-10));
  }
  SECTION("noisy synthetic decay") {
    std::mt19937 rng(5);
    std::normal_distribution<double> g(0.0, 1e-9);
    std::vector<double> xs, ys;
    for (double k = 3.0; k <= 9.0; k += 1.0) {
      xs.push_back(k);
      ys.push_back(std::exp(-1.3 * k) + std::abs(g(rng)));
    }
    const FitResult f = fit_rate(xs, ys, FitModel::exponential);
    CHECK(f.slope == Catch::Approx(-1.3).margin(0.05));
  }
  SECTION("input validation") {
    CHECK_THROWS_AS(fit_rate({1.0, 2.0}, {1.0, 2.0}, FitModel::algebraic),
                    std::invalid_argument);
    CHECK_THROWS_AS(fit_rate({1.0, 2.0, 3.0}, {1.0, -2.0, 3.0}, FitModel::algebraic),
                    std::invalid_argument);
    CHECK_THROWS_AS(fit_rate({-1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}, FitModel::algebraic),
                    std::invalid_argument);
  }
}
