#include "spheredm/linalg.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace spheredm;

namespace {

Matrix random_matrix(int rows, int cols, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = g(rng);
  return m;
}

}  // namespace

TEST_CASE("symmetric eigendecomposition") {
  SECTION("identity") {
    const SymEig e = sym_eig(Matrix::Identity(5, 5));
    for (int i = 0; i < 5; ++i) CHECK(e.values(i) == Catch::Approx(1.0));
  }
  SECTION("diagonal") {
    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 3.0;
    d(1, 1) = -1.0;
    const SymEig e = sym_eig(d);
    CHECK(e.values(0) == Catch::Approx(-1.0));
    CHECK(e.values(1) == Catch::Approx(3.0));
  }
  SECTION("random symmetric reconstruction") {
    Matrix a = random_matrix(50, 50, 1);
    Matrix s = 0.5 * (a + a.transpose());
    const SymEig e = sym_eig(s);
    const Matrix recon = e.q * e.values.asDiagonal() * e.q.transpose();
    CHECK((recon - s).norm() <= 1e-10 * s.norm());
    CHECK((e.q.transpose() * e.q - Matrix::Identity(50, 50)).norm() <= 1e-10 * 50);
  }
  SECTION("rejects asymmetric input") {
    Matrix a = random_matrix(4, 4, 2);
    a(0, 1) += 1.0;
    CHECK_THROWS_AS(sym_eig(a), std::invalid_argument);
  }
}

TEST_CASE("general eigenvalues") {
  SECTION("rotation generator") {
    Matrix a(2, 2);
    a << 0, 1, -1, 0;
    const ComplexSpectrum s = general_eig(a);
    CHECK(s.eigenvalues[0].real() == Catch::Approx(0.0).margin(1e-14));
    CHECK(s.eigenvalues[0].imag() == Catch::Approx(-1.0));
    CHECK(s.eigenvalues[1].imag() == Catch::Approx(1.0));
  }
  SECTION("triangular matrix gives its diagonal") {
    Matrix a = random_matrix(10, 10, 3);
    a = a.triangularView<Eigen::Upper>();
    const ComplexSpectrum s = general_eig(a);
    Vector diag = a.diagonal();
    std::sort(diag.data(), diag.data() + 10);
    for (int i = 0; i < 10; ++i) {
      CHECK(s.eigenvalues[static_cast<size_t>(i)].real() == Catch::Approx(diag(i)).margin(1e-12));
      CHECK(s.eigenvalues[static_cast<size_t>(i)].imag() == Catch::Approx(0.0).margin(1e-12));
    }
  }
  SECTION("companion matrix of (x-1)(x-2)(x-3)") {
    // x^3 - 6 x^2 + 11 x - 6
    Matrix c = Matrix::Zero(3, 3);
    c(0, 2) = 6.0;
    c(1, 2) = -11.0;
    c(2, 2) = 6.0;
    c(1, 0) = 1.0;
    c(2, 1) = 1.0;
    const ComplexSpectrum s = general_eig(c);
    CHECK(s.eigenvalues[0].real() == Catch::Approx(1.0).margin(1e-10));
    CHECK(s.eigenvalues[1].real() == Catch::Approx(2.0).margin(1e-10));
    CHECK(s.eigenvalues[2].real() == Catch::Approx(3.0).margin(1e-10));
  }
  SECTION("conjugate pairs on real input") {
    const Matrix a = random_matrix(20, 20, 4);
    const ComplexSpectrum s = general_eig(a);
    for (const auto& e : s.eigenvalues) {
      if (std::abs(e.imag()) > 0.0) {
        bool found = false;
        for (const auto& f : s.eigenvalues)
          if (std::abs(f - std::conj(e)) < 1e-10) found = true;
        CHECK(found);
      }
    }
  }
  SECTION("matches sym_eig on symmetric input") {
    Matrix a = random_matrix(30, 30, 5);
    Matrix s = 0.5 * (a + a.transpose());
    const SymEig se = sym_eig(s);
    const ComplexSpectrum ge = general_eig(s);
    for (int i = 0; i < 30; ++i) {
      CHECK(ge.eigenvalues[static_cast<size_t>(i)].real() ==
            Catch::Approx(se.values(i)).margin(1e-8 * se.values.cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("nullspace orthobasis") {
  SECTION("two-vector example") {
    Matrix p(2, 1);
    p << 1, 1;
    const Matrix w = nullspace_orthobasis(p);
    CHECK(w.rows() == 2);
    CHECK(w.cols() == 1);
    CHECK(std::abs(w(0, 0)) == Catch::Approx(1.0 / std::sqrt(2.0)));
    CHECK(w(0, 0) + w(1, 0) == Catch::Approx(0.0).margin(1e-14));
  }
  SECTION("identity columns") {
    Matrix p = Matrix::Identity(6, 2);
    const Matrix w = nullspace_orthobasis(p);
    CHECK((p.transpose() * w).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((w.transpose() * w - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-12);
  }
  SECTION("self-check on a random tall matrix") {
    const Matrix p = random_matrix(60, 8, 6);
    const Matrix w = nullspace_orthobasis(p);
    CHECK((w.transpose() * w - Matrix::Identity(52, 52)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(spectral_norm(p.transpose() * w) <= 1e-12 * spectral_norm(p));
  }
  SECTION("rank deficiency is an error") {
    Matrix p(5, 2);
    p.col(0).setOnes();
    p.col(1) = 2.0 * p.col(0);
    CHECK_THROWS_AS(nullspace_orthobasis(p), UnisolvencyError);
  }
}

TEST_CASE("spd square root") {
  CHECK((spd_sqrt(Matrix::Identity(4, 4)) - Matrix::Identity(4, 4)).norm() < 1e-12);
  SECTION("diagonal") {
    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 4.0;
    d(1, 1) = 9.0;
    const Matrix s = spd_sqrt(d);
    CHECK(s(0, 0) == Catch::Approx(2.0));
    CHECK(s(1, 1) == Catch::Approx(3.0));
  }
  SECTION("random spd reconstruction") {
    const Matrix b = random_matrix(30, 30, 7);
    const Matrix a = b.transpose() * b + Matrix::Identity(30, 30);
    const Matrix s = spd_sqrt(a);
    CHECK((s * s - a).norm() <= 1e-10 * a.norm());
    CHECK((s - s.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  }
  SECTION("indefinite input is an error") {
    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 1.0;
    d(1, 1) = -1.0;
    CHECK_THROWS_AS(spd_sqrt(d), NumericalError);
  }
}

TEST_CASE("linear solves") {
  SECTION("identity and diagonal") {
    const Matrix b = random_matrix(5, 2, 8);
    CHECK((solve_linear(Matrix::Identity(5, 5), b) - b).norm() < 1e-14);
    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 2.0;
    d(1, 1) = 4.0;
    Matrix rhs(2, 1);
    rhs << 2, 8;
    const Matrix x = solve_linear(d, rhs);
    CHECK(x(0, 0) == Catch::Approx(1.0));
    CHECK(x(1, 0) == Catch::Approx(2.0));
  }
  SECTION("manufactured solution") {
    const Matrix a = random_matrix(40, 40, 9);
    const Matrix x0 = random_matrix(40, 3, 10);
    const Matrix x = solve_linear(a, a * x0);
    CHECK((x - x0).norm() <= 1e-8 * x0.norm());
  }
  SECTION("singular matrix is an error") {
    Matrix a = Matrix::Zero(3, 3);
    a(0, 0) = 1.0;
    CHECK_THROWS_AS(solve_linear(a, Matrix::Identity(3, 3)), NumericalError);
  }
}

TEST_CASE("spectral norm") {
  Matrix d = Matrix::Zero(3, 3);
  d(0, 0) = 1.0;
  d(1, 1) = -3.0;
  d(2, 2) = 2.0;
  CHECK(spectral_norm(d) == Catch::Approx(3.0));
  CHECK(spectral_norm(Matrix::Zero(4, 4)) == 0.0);
  SECTION("matches an svd oracle") {
    const Matrix a = random_matrix(50, 30, 11);
    Eigen::JacobiSVD<Matrix> svd(a);
    CHECK(spectral_norm(a) == Catch::Approx(svd.singularValues()(0)).epsilon(1e-8));
  }
  SECTION("transpose invariance") {
    const Matrix a = random_matrix(25, 40, 12);
    CHECK(spectral_norm(a) == Catch::Approx(spectral_norm(a.transpose())).epsilon(1e-10));
  }
}

TEST_CASE("condition number") {
  SECTION("orthogonal matrix has condition 1") {
    const Matrix a = random_matrix(12, 12, 13);
    const Eigen::HouseholderQR<Matrix> qr(a);
    const Matrix q = qr.householderQ();
    CHECK(cond2(q) == Catch::Approx(1.0).epsilon(1e-10));
  }
  SECTION("diagonal") {
    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 10.0;
    d(1, 1) = 1.0;
    CHECK(cond2(d) == Catch::Approx(10.0));
  }
  SECTION("singular input is an error") {
    Matrix a = Matrix::Zero(2, 2);
    a(0, 0) = 1.0;
    CHECK_THROWS_AS(cond2(a), NumericalError);
  }
}
