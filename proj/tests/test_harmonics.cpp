#include "spheredm/harmonics.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

using namespace spheredm;

namespace {

SpherePoint random_point(std::mt19937& rng) {
  std::normal_distribution<double> g;
  return SpherePoint::normalized(g(rng), g(rng), g(rng));
}

}  // namespace

TEST_CASE("laplace eigenvalues") {
  CHECK(laplace_eigenvalue(0) == 0.0);
  CHECK(laplace_eigenvalue(1) == -2.0);
  CHECK(laplace_eigenvalue(3) == -12.0);
  for (int l = 0; l < 10; ++l) CHECK(laplace_eigenvalue(l + 1) < laplace_eigenvalue(l));
}

TEST_CASE("eigenspace dimensions") {
  CHECK(eigenspace_dim(0) == 1);
  CHECK(eigenspace_dim(2) == 5);
  int total = 0;
  for (int l = 0; l <= 2; ++l) total += eigenspace_dim(l);
  CHECK(total == 9);
  // d = 3 sanity: (l+1)^2
  CHECK(eigenspace_dim(2, 3) == 9);
}

TEST_CASE("legendre polynomials") {
  CHECK(legendre(0, -0.3) == 1.0);
  CHECK(legendre(2, 0.0) == Catch::Approx(-0.5));
  CHECK(legendre(5, 1.0) == Catch::Approx(1.0));
  SECTION("bounded by 1 on a dense grid") {
    for (int l : {1, 3, 7, 12}) {
      for (int i = 0; i <= 2000; ++i) {
        const double t = -1.0 + 2.0 * i / 2000.0;
        CHECK(std::abs(legendre(l, t)) <= 1.0 + 1e-12);
      }
    }
  }
}

TEST_CASE("constant and zonal harmonic normalization") {
  const SpherePoint north{0, 0, 1};
  std::mt19937 rng(7);
  const SpherePoint anywhere = random_point(rng);
  CHECK(eval_harmonic({0, 1}, anywhere) == Catch::Approx(0.2820947917738781));
  CHECK(eval_harmonic({1, 1}, north) == Catch::Approx(std::sqrt(3.0 / (4.0 * std::numbers::pi))));
}

TEST_CASE("zonal harmonics depend only on colatitude") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const SpherePoint p = random_point(rng);
    const double phi = 1.234;
    const double c = std::cos(phi), s = std::sin(phi);
    const SpherePoint q{c * p.x - s * p.y, s * p.x + c * p.y, p.z};
    for (int l : {1, 2, 4}) {
      CHECK(eval_harmonic({l, 1}, p) == Catch::Approx(eval_harmonic({l, 1}, q)).margin(1e-13));
    }
  }
}

TEST_CASE("addition theorem") {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 25; ++trial) {
    const SpherePoint x = random_point(rng), y = random_point(rng);
    for (int l = 0; l <= 6; ++l) {
      double sum = 0.0;
      for (int mu = 1; mu <= 2 * l + 1; ++mu)
        sum += eval_harmonic({l, mu}, x) * eval_harmonic({l, mu}, y);
      const double expected = (2.0 * l + 1.0) / (4.0 * std::numbers::pi) * legendre(l, x.dot(y));
      CHECK(sum == Catch::Approx(expected).margin(1e-12));
    }
  }
}

TEST_CASE("discrete gram matrix is close to identity") {
  // equal-weight quadrature over a dense lattice: (4 pi / Npts) sum Y Y'
  const int npts = 20001;
  const PointSet x = generate_fibonacci(npts);
  const HarmonicBasisEnumeration basis(4);
  const Matrix p = vandermonde(x, basis);
  const Matrix gram = (4.0 * std::numbers::pi / npts) * (p.transpose() * p);
  const Matrix err = gram - Matrix::Identity(basis.size(), basis.size());
  CHECK(err.cwiseAbs().maxCoeff() < 5e-3);
}

TEST_CASE("basis enumeration is a bijection with degree-major order") {
  const HarmonicBasisEnumeration basis(3);
  CHECK(basis.size() == 16);
  int j = 0;
  for (int l = 0; l <= 3; ++l)
    for (int mu = 1; mu <= 2 * l + 1; ++mu, ++j) {
      CHECK(basis.index(j).degree == l);
      CHECK(basis.index(j).order == mu);
    }
}

TEST_CASE("vandermonde matrix") {
  const PointSet x = generate_fibonacci(101);
  SECTION("degree zero gives the constant column") {
    const Matrix p = vandermonde(x, HarmonicBasisEnumeration(0));
    CHECK(p.cols() == 1);
    for (int k = 0; k < x.size(); ++k)
      CHECK(p(k, 0) == Catch::Approx(0.2820947917738781));
  }
  SECTION("single-degree block reproduces the addition theorem") {
    const HarmonicBasisEnumeration basis(2);
    const Matrix p = vandermonde(x, basis);
    // columns 4..8 hold the degree-2 block
    const Matrix block = p.middleCols(4, 5);
    const Matrix outer = block * block.transpose();
    for (int j : {0, 17, 40}) {
      for (int k : {3, 25, 99}) {
        const double expected =
            5.0 / (4.0 * std::numbers::pi) * legendre(2, x[j].dot(x[k]));
        CHECK(outer(j, k) == Catch::Approx(expected).margin(1e-12));
      }
    }
  }
  SECTION("full column rank at modest degree") {
    const Matrix p = vandermonde(x, HarmonicBasisEnumeration(2));
    Eigen::ColPivHouseholderQR<Matrix> qr(p);
    qr.setThreshold(1e-10);
    CHECK(qr.rank() == 9);
  }
}
