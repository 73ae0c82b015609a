#include <cmath>
#include <complex>
#include <random>

#include "doctest.h"
#include "sparseobs/analysis.hpp"
#include "sparseobs/smd.hpp"

using namespace sparseobs;

namespace {

double grid_norm(const Matrix& A, const Matrix& B, const Matrix& C,
                 const Matrix& D, int points) {
  double best = 0.0;
  for (int k = 0; k < points; ++k) {
    const double w = std::pow(10.0, -3.0 + 6.0 * k / (points - 1.0));
    const int n = static_cast<int>(A.rows());
    Eigen::MatrixXcd M =
        std::complex<double>(0, w) * Eigen::MatrixXcd::Identity(n, n) -
        A.cast<std::complex<double>>();
    Eigen::MatrixXcd G = C.cast<std::complex<double>>() *
                             M.lu().solve(B.cast<std::complex<double>>()) +
                         D.cast<std::complex<double>>();
    best = std::max(best, G.jacobiSvd().singularValues()(0));
  }
  return best;
}

Matrix random_stable(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix A(n, n);
  for (int i = 0; i < n * n; ++i) A(i / n, i % n) = g(rng);
  Eigen::EigenSolver<Matrix> es(A, false);
  const double shift = es.eigenvalues().real().maxCoeff();
  A -= (shift + 0.5) * Matrix::Identity(n, n);
  return A;
}

}  // namespace

TEST_CASE("is_hurwitz") {
  CHECK(is_hurwitz(-Matrix::Identity(3, 3)));
  Matrix rot(2, 2);
  rot << 0, 1, -1, 0;
  CHECK_FALSE(is_hurwitz(rot));
  CHECK(is_hurwitz(smd_nominal(Vector::Ones(3)).A));
}

TEST_CASE("hinf norm of the first-order unit system is 1") {
  Matrix A(1, 1), B(1, 1), C(1, 1), D(1, 1);
  A << -1;
  B << 1;
  C << 1;
  D << 0;
  CHECK(hinf_norm(A, B, C, D) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("hinf norm of a lightly damped resonance matches the peak") {
  Matrix A(2, 2), B(2, 1), C(1, 2), D(1, 1);
  A << 0, 1, -1, -0.1;
  B << 0, 1;
  C << 1, 0;
  D << 0;
  const double zeta = 0.05;
  const double peak = 1.0 / (2.0 * zeta * std::sqrt(1.0 - zeta * zeta));
  const double norm = hinf_norm(A, B, C, D);
  CHECK(norm == doctest::Approx(peak).epsilon(1e-3));
  CHECK(norm == doctest::Approx(grid_norm(A, B, C, D, 20000)).epsilon(1e-3));
}

TEST_CASE("pure feed-through") {
  Matrix A(1, 1), B(1, 1), C(1, 1), D(1, 1);
  A << -1;
  B << 0;
  C << 1;
  D << 2;
  CHECK(hinf_norm(A, B, C, D) == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("hinf rejects unstable systems") {
  Matrix A(1, 1), B(1, 1), C(1, 1), D(1, 1);
  A << 1;
  B << 1;
  C << 1;
  D << 0;
  CHECK_THROWS(hinf_norm(A, B, C, D));
}

TEST_CASE("bisection agrees with a frequency grid on random systems") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> dims(2, 8);
  for (int trial = 0; trial < 8; ++trial) {
    const int n = dims(rng);
    const Matrix A = random_stable(n, rng);
    std::normal_distribution<double> g;
    Matrix B(n, 2), C(2, n);
    for (int i = 0; i < 2 * n; ++i) {
      B(i / 2, i % 2) = g(rng);
      C(i % 2, i / 2) = g(rng);
    }
    const Matrix D = Matrix::Zero(2, 2);
    const double bisected = hinf_norm(A, B, C, D);
    const double grid = grid_norm(A, B, C, D, 4000);
    CHECK(grid <= bisected * (1.0 + 1e-3));
    CHECK(bisected == doctest::Approx(grid).epsilon(2e-3));
  }
}

TEST_CASE("sampled contractions stay inside the unit ball") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix F = sample_contraction(3, 5, rng, trial % 2 == 0);
    const double s = F.jacobiSvd().singularValues()(0);
    CHECK(s <= 1.0 + 1e-12);
    if (trial % 2 == 0) CHECK(std::abs(s - 1.0) <= 1e-12);
  }
  std::mt19937_64 a(7), b(7);
  const Matrix F1 = sample_contraction(4, 4, a, false);
  const Matrix F2 = sample_contraction(4, 4, b, false);
  CHECK((F1 - F2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("diagonal contraction samples") {
  std::mt19937_64 rng(9);
  const Vector d = sample_diagonal_contraction(6, rng, true);
  CHECK(d.cwiseAbs().maxCoeff() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(d.cwiseAbs().maxCoeff() <= 1.0 + 1e-12);
}
