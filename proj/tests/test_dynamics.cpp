#include "spheredm/dynamics.hpp"

#include "spheredm/global_dm.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace spheredm;

namespace {

const SpectralOperator kLap({0.0, 1.0});

Vector seeded_state(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  Vector u(n);
  for (int i = 0; i < n; ++i) u(i) = g(rng);
  u.normalize();
  return u;
}

}  // namespace

TEST_CASE("pd energy") {
  CHECK(energy_pd(Matrix::Identity(2, 2), Vector::Zero(2)) == 0.0);
  Vector u(2);
  u << 3.0, 4.0;
  CHECK(energy_pd(Matrix::Identity(2, 2), u) == Catch::Approx(25.0));
  const PdEnergy cached(Matrix::Identity(2, 2));
  CHECK(cached(u) == Catch::Approx(25.0));
}

TEST_CASE("cpd seminorm") {
  const PointSet x = generate_fibonacci(101);
  const ZonalKernel ss3 = ZonalKernel::surface_spline(3);
  const GlobalDM dm = global_dm_cpd(ss3, kLap, x, 3);
  const Matrix& a = dm.ingredients->a;
  SECTION("vanishes on sampled low-degree harmonics") {
    const Matrix p = vandermonde(x, HarmonicBasisEnumeration(2));
    const double a_norm = spectral_norm(a);
    for (int j = 0; j < p.cols(); ++j) {
      const Vector u = p.col(j);
      CHECK(energy_cpd(a, u, a_norm) <= 1e-9 * a_norm * u.squaredNorm());
    }
  }
  SECTION("zero vector and positivity off the polynomial space") {
    CHECK(energy_cpd(a, Vector::Zero(101)) == 0.0);
    const Vector u = seeded_state(101, 3);
    CHECK(energy_cpd(a, u) > 0.0);
  }
}

TEST_CASE("rk4 evolution basics") {
  SECTION("zero operator keeps the state") {
    const Vector u0 = seeded_state(5, 1);
    const EvolutionRun run = evolve(Matrix::Zero(5, 5), u0, 0.1, 10,
                                    [](const Vector& u) { return u.squaredNorm(); });
    CHECK((run.states.back() - u0).cwiseAbs().maxCoeff() == 0.0);
    CHECK(run.times.back() == Catch::Approx(1.0));
  }
  SECTION("scalar decay matches the exponential") {
    Matrix m = Matrix::Constant(1, 1, -1.0);
    Vector u0 = Vector::Ones(1);
    const EvolutionRun run =
        evolve(m, u0, 0.1, 10, [](const Vector& u) { return u.squaredNorm(); });
    CHECK(run.states.back()(0) == Catch::Approx(std::exp(-1.0)).margin(1e-6));
  }
  SECTION("blow-up is detected with the step index") {
    Matrix m = Matrix::Constant(1, 1, 1e4);
    Vector u0 = Vector::Ones(1);
    CHECK_THROWS_AS(evolve(m, u0, 1.0, 50, [](const Vector& u) { return u.squaredNorm(); }),
                    NumericalError);
  }
}

TEST_CASE("diffusion with the cpd seminorm is energy stable") {
  const PointSet x = generate_fibonacci(101);
  const ZonalKernel ss3 = ZonalKernel::surface_spline(3);
  const GlobalDM dm = global_dm_cpd(ss3, kLap, x, 3);
  const CpdEnergy energy(dm.ingredients->a);
  const double dt = default_dt(dm.m);
  const Vector u0 = seeded_state(101, 7);
  const EvolutionRun run = evolve(dm.m, u0, dt, 300, std::cref(energy));
  for (size_t i = 1; i < run.energies.size(); ++i)
    CHECK(run.energies[i] <= run.energies[i - 1] + 1e-12);
}

TEST_CASE("diffusion keeps the plain norm contracting once inside the polynomial space") {
  const PointSet x = generate_fibonacci(101);
  const ZonalKernel ss3 = ZonalKernel::surface_spline(3);
  const GlobalDM dm = global_dm_cpd(ss3, kLap, x, 3);
  // start exactly on a sampled degree-1 harmonic: seminorm is zero throughout
  const Matrix p = vandermonde(x, HarmonicBasisEnumeration(2));
  const Vector u0 = p.col(2);
  const CpdEnergy energy(dm.ingredients->a);
  const double dt = default_dt(dm.m);
  const EvolutionRun run = evolve(dm.m, u0, dt, 200, std::cref(energy));
  const double tol = 1e-8 * u0.squaredNorm();
  for (size_t i = 0; i < run.energies.size(); ++i) CHECK(run.energies[i] <= tol);
  for (size_t i = 1; i < run.l2_norms.size(); ++i)
    CHECK(run.l2_norms[i] <= run.l2_norms[i - 1] + 1e-12);
}

TEST_CASE("pd diffusion energy decreases") {
  const PointSet x = generate_fibonacci(101);
  const ZonalKernel imq = ZonalKernel::inverse_multiquadric(2.0);
  const GlobalDM dm = global_dm_pd(imq, kLap, x);
  const PdEnergy energy(dm.ingredients->phi);
  const double dt = default_dt(dm.m);
  const Vector u0 = seeded_state(101, 11);
  const EvolutionRun run = evolve(dm.m, u0, dt, 300, std::cref(energy));
  // strictly decreasing until solver noise
  for (size_t i = 1; i < run.energies.size(); ++i) {
    if (run.energies[i - 1] > 1e-12)
      CHECK(run.energies[i] < run.energies[i - 1]);
  }
}

TEST_CASE("eigenvector initial data decays at the operator rate") {
  const PointSet x = generate_fibonacci(101);
  const ZonalKernel ss3 = ZonalKernel::surface_spline(3);
  const GlobalDM dm = global_dm_cpd(ss3, kLap, x, 3);
  const Matrix p = vandermonde(x, HarmonicBasisEnumeration(2));
  const Vector u0 = p.col(1);  // degree-1 harmonic, eigenvalue -2
  const double dt = default_dt(dm.m);
  const int steps = static_cast<int>(std::ceil(1.0 / dt));
  const EvolutionRun run = evolve(dm.m, u0, dt, steps,
                                  [](const Vector& u) { return u.squaredNorm(); });
  const double t_end = run.times.back();
  const Vector expect = std::exp(-2.0 * t_end) * u0;
  CHECK((run.states.back() - expect).norm() <= 1e-6 * expect.norm());
}

TEST_CASE("default step size sits inside the stability region") {
  const PointSet x = generate_fibonacci(101);
  const ZonalKernel ss3 = ZonalKernel::surface_spline(3);
  const GlobalDM dm = global_dm_cpd(ss3, kLap, x, 3);
  const double dt = default_dt(dm.m);
  const double rho = general_eig(dm.m).spectral_radius();
  CHECK(dt * rho <= Catch::Approx(0.5).epsilon(0.05));
  CHECK(dt * rho < 2.785);
}
