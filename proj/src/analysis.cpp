#include "sparseobs/analysis.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sparseobs/design.hpp"

namespace sparseobs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sigma_max(const Matrix& X) {
  if (X.size() == 0) return 0.0;
  return X.jacobiSvd().singularValues()(0);
}

/// Does the gamma-Hamiltonian of (A,B,C,D) have an imaginary-axis
/// eigenvalue? Equivalent to sigma_max(G(jw)) >= gamma for some w.
bool hamiltonian_crosses(const Matrix& A, const Matrix& B, const Matrix& C,
                         const Matrix& D, double gamma) {
  const int n = static_cast<int>(A.rows());
  const int m = static_cast<int>(B.cols());
  const Matrix R = gamma * gamma * Matrix::Identity(m, m) - D.transpose() * D;
  Eigen::LDLT<Matrix> ldlt(R);
  const Matrix RiBt = ldlt.solve(B.transpose());
  const Matrix RiDtC = ldlt.solve(D.transpose() * C);

  Matrix H(2 * n, 2 * n);
  H.topLeftCorner(n, n) = A + B * RiDtC;
  H.topRightCorner(n, n) = B * RiBt;
  H.bottomLeftCorner(n, n) =
      -C.transpose() * C - (C.transpose() * D) * RiDtC;
  H.bottomRightCorner(n, n) = -(A + B * RiDtC).transpose();

  Eigen::EigenSolver<Matrix> es(H, /*computeEigenvectors=*/false);
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const auto lam = es.eigenvalues()(i);
    if (std::abs(lam.real()) < 1e-8 * (1.0 + std::abs(lam))) return true;
  }
  return false;
}

double grid_sigma(const Matrix& A, const Matrix& B, const Matrix& C,
                  const Matrix& D, double omega) {
  const int n = static_cast<int>(A.rows());
  Eigen::MatrixXcd M =
      std::complex<double>(0.0, omega) * Eigen::MatrixXcd::Identity(n, n) -
      A.cast<std::complex<double>>();
  Eigen::MatrixXcd G =
      C.cast<std::complex<double>>() * M.lu().solve(B.cast<std::complex<double>>()) +
      D.cast<std::complex<double>>();
  return G.jacobiSvd().singularValues()(0);
}

}  // namespace

bool is_hurwitz(const Matrix& A) {
  if (A.rows() != A.cols()) throw std::invalid_argument("A must be square");
  Eigen::EigenSolver<Matrix> es(A, false);
  return es.eigenvalues().real().maxCoeff() < -1e-10;
}

double hinf_norm(const Matrix& A, const Matrix& B, const Matrix& C,
                 const Matrix& D, const HinfOptions& opts) {
  if (!is_hurwitz(A)) throw std::invalid_argument("hinf_norm: A is not Hurwitz");
  if (B.size() == 0 || C.size() == 0) return sigma_max(D);

  const double sd = sigma_max(D);
  // Lower bound from a few frequency probes; keeps the bracket tight.
  double lo = std::max(sd, grid_sigma(A, B, C, D, 0.0));
  for (double w : {1e-2, 1e-1, 1.0, 1e1, 1e2})
    lo = std::max(lo, grid_sigma(A, B, C, D, w));
  if (lo == 0.0) return 0.0;

  double hi = std::max(2.0 * lo, sd + 1.0);
  int grow = 0;
  while (hamiltonian_crosses(A, B, C, D, hi)) {
    hi *= 2.0;
    if (++grow > 60 || hi > opts.gamma_max)
      throw std::runtime_error("hinf_norm: bisection bracket failure");
  }
  double lb = lo;  // crosses (or equals the peak) below lb
  while ((hi - lb) > opts.rel_tol * lb) {
    const double mid = 0.5 * (lb + hi);
    if (hamiltonian_crosses(A, B, C, D, mid))
      lb = mid;
    else
      hi = mid;
  }
  return 0.5 * (lb + hi);
}

Matrix sample_contraction(int rows, int cols, std::mt19937_64& rng,
                          bool boundary) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix G(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) G(i, j) = gauss(rng);
  double s = sigma_max(G);
  if (s == 0.0) return G;
  if (boundary) return G / s;
  std::uniform_real_distribution<double> u(0.05, 0.95);
  return G * (u(rng) / s);
}

Vector sample_diagonal_contraction(int n, std::mt19937_64& rng,
                                   bool boundary) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector d(n);
  for (int i = 0; i < n; ++i) d[i] = u(rng);
  if (boundary) {
    const double m = d.cwiseAbs().maxCoeff();
    if (m > 0.0) d /= m;
  }
  return d;
}

CertificationReport verify_structured(const StateSpaceModel& model,
                                      const AffineUncertainty& unc,
                                      const DesignResult& result, double gamma,
                                      int n_samples, std::uint64_t seed) {
  CertificationReport rep;
  rep.n_samples = n_samples;

  const ErrorSystem nominal = build_structured_error_system(
      model, unc, result.gain, result.precision);
  rep.nominal_norm =
      is_hurwitz(nominal.A_err)
          ? hinf_norm(nominal.A_err, nominal.B_err, nominal.C_err,
                      Matrix::Zero(nominal.C_err.rows(), nominal.B_err.cols()))
          : kInf;
  rep.worst_norm = rep.nominal_norm;
  rep.worst_sample_id = -1;

  const double bound = gamma * (1.0 + kCertTol);
  if (rep.nominal_norm > bound) rep.violations.emplace_back(-1, rep.nominal_norm);

  const int nx = model.n_x();
  const int q1 = static_cast<int>(unc.M1.cols());
  const int p1 = static_cast<int>(unc.N1.rows());
  const int q2 = static_cast<int>(unc.M2.cols());
  const int p2 = static_cast<int>(unc.N2.rows());
  const Matrix Dzero = Matrix::Zero(nominal.C_err.rows(), nominal.B_err.cols());

  for (int k = 0; k < n_samples; ++k) {
    // Per-sample stream so samples are order independent.
    std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ull * (k + 1)));
    const bool boundary = (k % 2 == 1);
    const Matrix F1 = sample_contraction(q1, p1, rng, boundary);
    const Matrix F2 = sample_contraction(q2, p2, rng, boundary);
    const Matrix dA = unc.M1 * F1 * unc.N1;
    const Matrix dB = unc.M2 * F2 * unc.N2;

    Matrix A = nominal.A_err;
    A.topLeftCorner(nx, nx) += dA;
    A.block(nx, 0, nx, nx) += dA;
    Matrix B = nominal.B_err;
    B.block(0, 0, nx, dB.cols()) += dB;
    B.block(nx, 0, nx, dB.cols()) += dB;

    double norm;
    if (!is_hurwitz(A)) {
      norm = kInf;
    } else {
      norm = hinf_norm(A, B, nominal.C_err, Dzero);
    }
    if (norm > rep.worst_norm) {
      rep.worst_norm = norm;
      rep.worst_sample_id = k;
    }
    if (norm > bound) rep.violations.emplace_back(k, norm);
  }
  rep.passed = rep.violations.empty() && rep.worst_norm <= bound;
  return rep;
}

CertificationReport verify_lft(const LftPlant& plant,
                               const DesignResult& result, double gamma,
                               int n_samples, std::uint64_t seed) {
  CertificationReport rep;
  rep.n_samples = n_samples;
  const double bound = gamma * (1.0 + kCertTol);

  // Small-gain condition on the open-loop w_tilde -> z_delta map; by
  // construction the noise channel has a zero column there.
  {
    const int nw = plant.n_w();
    const int nd = plant.n_d();
    const int ny = plant.n_y();
    Matrix B(plant.n_x(), nw + nd + ny);
    B << plant.B_delta, plant.B_d, Matrix::Zero(plant.n_x(), ny);
    Matrix E(plant.n_zd(), nw + nd + ny);
    E << plant.E_delta, plant.E_d, Matrix::Zero(plant.n_zd(), ny);
    rep.small_gain_norm = hinf_norm(plant.A, B, plant.C_delta, E);
  }

  auto closed_norm = [&](const Matrix& Delta) {
    const StateSpaceModel cl =
        close_delta_loop(plant, result.gain, result.precision, Delta);
    if (!is_hurwitz(cl.A)) return kInf;
    return hinf_norm(cl.A, cl.B_d, cl.C_z,
                     Matrix::Zero(cl.n_z(), cl.n_d()));
  };

  // Sample 0 is always Delta = 0 (the nominal closure).
  rep.nominal_norm = closed_norm(Matrix::Zero(plant.n_w(), plant.n_zd()));
  rep.worst_norm = rep.nominal_norm;
  rep.worst_sample_id = 0;
  if (rep.nominal_norm > bound) rep.violations.emplace_back(0, rep.nominal_norm);

  for (int k = 1; k < n_samples; ++k) {
    std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ull * (k + 1)));
    const bool boundary = (k % 2 == 1);
    Matrix Delta;
    if (plant.delta_structure == DeltaStructure::Diagonal) {
      Delta = Matrix(
          sample_diagonal_contraction(plant.n_w(), rng, boundary).asDiagonal());
    } else {
      Delta = sample_contraction(plant.n_w(), plant.n_zd(), rng, boundary);
    }
    double norm;
    try {
      norm = closed_norm(Delta);
    } catch (const std::exception&) {
      norm = kInf;  // well-posedness failure counts as a violation
    }
    if (norm > rep.worst_norm) {
      rep.worst_norm = norm;
      rep.worst_sample_id = k;
    }
    if (norm > bound) rep.violations.emplace_back(k, norm);
  }
  rep.passed = rep.violations.empty() && rep.worst_norm <= bound &&
               rep.small_gain_norm.value() <= 1.0 + kCertTol;
  return rep;
}

}  // namespace sparseobs
