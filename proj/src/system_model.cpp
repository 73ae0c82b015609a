#include "sparseobs/system_model.hpp"

#include <cmath>
#include <stdexcept>

namespace sparseobs {

namespace {

void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument(what);
}

void require_finite(const Matrix& X, const char* name) {
  require(X.allFinite(), std::string(name) + " has non-finite entries");
}

}  // namespace

Matrix symmetrize(const Matrix& X) { return 0.5 * (X + X.transpose()); }

StateSpaceModel::StateSpaceModel(Matrix A_, Matrix B_d_, Matrix C_y_,
                                 Matrix D_d_, Matrix C_z_)
    : A(std::move(A_)),
      B_d(std::move(B_d_)),
      C_y(std::move(C_y_)),
      D_d(std::move(D_d_)),
      C_z(std::move(C_z_)) {
  require(A.rows() == A.cols(), "A must be square");
  require(B_d.rows() == A.rows(), "B_d row count must match A");
  require(C_y.cols() == A.rows(), "C_y column count must match A");
  require(D_d.rows() == C_y.rows() && D_d.cols() == B_d.cols(),
          "D_d must be N_y x N_d");
  require(C_z.cols() == A.rows(), "C_z column count must match A");
  require_finite(A, "A");
  require_finite(B_d, "B_d");
  require_finite(C_y, "C_y");
  require_finite(D_d, "D_d");
  require_finite(C_z, "C_z");
}

AffineUncertainty::AffineUncertainty(Matrix M1_, Matrix N1_, Matrix M2_,
                                     Matrix N2_)
    : M1(std::move(M1_)),
      N1(std::move(N1_)),
      M2(std::move(M2_)),
      N2(std::move(N2_)) {
  require_finite(M1, "M1");
  require_finite(N1, "N1");
  require_finite(M2, "M2");
  require_finite(N2, "N2");
}

void AffineUncertainty::check_against(const StateSpaceModel& model) const {
  require(M1.rows() == model.n_x(), "M1 row count must be n_x");
  require(N1.cols() == model.n_x(), "N1 column count must be n_x");
  require(M2.rows() == model.n_x(), "M2 row count must be n_x");
  require(N2.cols() == model.n_d(), "N2 column count must be N_d");
}

LftPlant::LftPlant(Matrix A_, Matrix B_delta_, Matrix B_d_, Matrix C_delta_,
                   Matrix E_delta_, Matrix E_d_, Matrix C_y_, Matrix D_delta_,
                   Matrix D_d_, Matrix C_z_, DeltaStructure structure)
    : A(std::move(A_)),
      B_delta(std::move(B_delta_)),
      B_d(std::move(B_d_)),
      C_delta(std::move(C_delta_)),
      E_delta(std::move(E_delta_)),
      E_d(std::move(E_d_)),
      C_y(std::move(C_y_)),
      D_delta(std::move(D_delta_)),
      D_d(std::move(D_d_)),
      C_z(std::move(C_z_)),
      delta_structure(structure) {
  const int nx = static_cast<int>(A.rows());
  require(A.cols() == nx, "A must be square");
  require(B_delta.rows() == nx && B_d.rows() == nx, "B blocks must have n_x rows");
  require(C_delta.cols() == nx && C_y.cols() == nx && C_z.cols() == nx,
          "C blocks must have n_x columns");
  require(E_delta.rows() == C_delta.rows() && E_delta.cols() == B_delta.cols(),
          "E_delta must be n_zd x n_w");
  require(E_d.rows() == C_delta.rows() && E_d.cols() == B_d.cols(),
          "E_d must be n_zd x N_d");
  require(D_delta.rows() == C_y.rows() && D_delta.cols() == B_delta.cols(),
          "D_delta must be N_y x n_w");
  require(D_d.rows() == C_y.rows() && D_d.cols() == B_d.cols(),
          "D_d must be N_y x N_d");
  if (delta_structure == DeltaStructure::Diagonal)
    require(B_delta.cols() == C_delta.rows(),
            "diagonal Delta needs n_w == n_zd");
}

StateSpaceModel LftPlant::nominal() const {
  return StateSpaceModel(A, B_d, C_y, D_d, C_z);
}

PrecisionVector::PrecisionVector(Vector beta_)
    : beta(std::move(beta_)), active(beta.size(), true) {
  for (Eigen::Index i = 0; i < beta.size(); ++i)
    require(beta[i] > 0.0 && std::isfinite(beta[i]),
            "active sensor precision must be positive");
}

PrecisionVector::PrecisionVector(Vector beta_, std::vector<bool> active_)
    : beta(std::move(beta_)), active(std::move(active_)) {
  require(static_cast<Eigen::Index>(active.size()) == beta.size(),
          "mask length must match beta");
  for (Eigen::Index i = 0; i < beta.size(); ++i) {
    if (active[i])
      require(beta[i] > 0.0 && std::isfinite(beta[i]),
              "active sensor precision must be positive");
  }
}

int PrecisionVector::active_count() const {
  int n = 0;
  for (bool a : active) n += a ? 1 : 0;
  return n;
}

Vector PrecisionVector::noise_scaling() const {
  Vector s = Vector::Zero(beta.size());
  for (Eigen::Index i = 0; i < beta.size(); ++i)
    if (active[i]) s[i] = 1.0 / std::sqrt(beta[i]);
  return s;
}

PrecisionVector PrecisionVector::unit(int n_y) {
  return PrecisionVector(Vector::Ones(n_y));
}

ErrorSystem build_structured_error_system(const StateSpaceModel& model,
                                          const AffineUncertainty& unc,
                                          const ObserverGain& gain,
                                          const PrecisionVector& prec) {
  unc.check_against(model);
  const int nx = model.n_x();
  const int nd = model.n_d();
  const int ny = model.n_y();
  require(gain.L.rows() == nx && gain.L.cols() == ny, "L must be n_x x N_y");
  require(prec.size() == ny, "precision length must be N_y");

  ErrorSystem err;
  err.kind = ErrorSystemKind::Structured;
  err.input_partition = {nd, ny};

  err.A_err = Matrix::Zero(2 * nx, 2 * nx);
  err.A_err.topLeftCorner(nx, nx) = model.A;
  err.A_err.bottomRightCorner(nx, nx) = model.A + gain.L * model.C_y;

  err.B_unscaled = Matrix::Zero(2 * nx, nd + ny);
  err.B_unscaled.topLeftCorner(nx, nd) = model.B_d;
  err.B_unscaled.block(nx, 0, nx, nd) = model.B_d + gain.L * model.D_d;
  err.B_unscaled.block(nx, nd, nx, ny) = gain.L;

  err.S_scale = Vector::Ones(nd + ny);
  err.S_scale.tail(ny) = prec.noise_scaling();
  err.B_err = err.B_unscaled * err.S_scale.asDiagonal();

  err.C_err = Matrix::Zero(model.n_z(), 2 * nx);
  err.C_err.rightCols(nx) = model.C_z;

  const int q1 = static_cast<int>(unc.M1.cols());
  const int q2 = static_cast<int>(unc.M2.cols());
  err.M1_tilde = Matrix::Zero(2 * nx, q1);
  err.M1_tilde.topRows(nx) = unc.M1;
  err.M1_tilde.bottomRows(nx) = unc.M1;
  err.M2_tilde = Matrix::Zero(2 * nx, q2);
  err.M2_tilde.topRows(nx) = unc.M2;
  err.M2_tilde.bottomRows(nx) = unc.M2;
  err.N1_tilde = Matrix::Zero(unc.N1.rows(), 2 * nx);
  err.N1_tilde.leftCols(nx) = unc.N1;
  err.N2_tilde = Matrix::Zero(unc.N2.rows(), nd + ny);
  err.N2_tilde.leftCols(nd) = unc.N2;
  return err;
}

ErrorSystem build_lft_error_system(const LftPlant& plant,
                                   const ObserverGain& gain,
                                   const PrecisionVector& prec) {
  const int nx = plant.n_x();
  const int nw = plant.n_w();
  const int nd = plant.n_d();
  const int ny = plant.n_y();
  require(gain.L.rows() == nx && gain.L.cols() == ny, "L must be n_x x N_y");
  require(prec.size() == ny, "precision length must be N_y");

  ErrorSystem err;
  err.kind = ErrorSystemKind::Lft;
  err.input_partition = {nw, nd, ny};

  err.A_err = plant.A + gain.L * plant.C_y;

  err.B_unscaled = Matrix::Zero(nx, nw + nd + ny);
  err.B_unscaled.leftCols(nw) = plant.B_delta + gain.L * plant.D_delta;
  err.B_unscaled.middleCols(nw, nd) = plant.B_d + gain.L * plant.D_d;
  err.B_unscaled.rightCols(ny) = gain.L;

  err.S_scale = Vector::Ones(nw + nd + ny);
  err.S_scale.tail(ny) = prec.noise_scaling();
  err.B_err = err.B_unscaled * err.S_scale.asDiagonal();

  err.C_err = plant.C_z;
  return err;
}

StateSpaceModel close_delta_loop(const LftPlant& plant,
                                 const ObserverGain& gain,
                                 const PrecisionVector& prec,
                                 const Matrix& Delta) {
  const int nx = plant.n_x();
  const int nw = plant.n_w();
  const int nzd = plant.n_zd();
  const int nd = plant.n_d();
  const int ny = plant.n_y();
  require(Delta.rows() == nw && Delta.cols() == nzd,
          "Delta must be n_w x n_zd");
  require(gain.L.rows() == nx && gain.L.cols() == ny, "L must be n_x x N_y");
  {
    Eigen::JacobiSVD<Matrix> svd(Delta);
    require(svd.singularValues().size() == 0 ||
                svd.singularValues()(0) <= 1.0 + 1e-9,
            "Delta must be a contraction");
  }

  // w_delta = (I - Delta E_delta)^{-1} Delta (C_delta x + E_d d)
  const Matrix G = Matrix::Identity(nw, nw) - Delta * plant.E_delta;
  Eigen::FullPivLU<Matrix> lu(G);
  require(lu.rcond() >= 1e-10, "I - Delta*E_delta is numerically singular");
  const Matrix Wx = lu.solve(Delta * plant.C_delta);  // n_w x n_x
  const Matrix Wd = lu.solve(Delta * plant.E_d);      // n_w x N_d

  const Matrix Acl = plant.A + plant.B_delta * Wx;
  const Matrix Bcl_d = plant.B_d + plant.B_delta * Wd;
  const Matrix Cycl = plant.C_y + plant.D_delta * Wx;
  const Matrix Dycl_d = plant.D_d + plant.D_delta * Wd;
  const Vector sn = prec.noise_scaling();

  // States (x, e); e follows the observer error dynamics driven by the
  // perturbed plant output.
  Matrix A = Matrix::Zero(2 * nx, 2 * nx);
  A.topLeftCorner(nx, nx) = Acl;
  A.block(nx, 0, nx, nx) = gain.L * (Cycl - plant.C_y) + (Acl - plant.A);
  A.bottomRightCorner(nx, nx) = plant.A + gain.L * plant.C_y;

  Matrix B = Matrix::Zero(2 * nx, nd + ny);
  B.topLeftCorner(nx, nd) = Bcl_d;
  B.block(nx, 0, nx, nd) = Bcl_d + gain.L * Dycl_d;
  B.block(nx, nd, nx, ny) = gain.L * sn.asDiagonal();

  Matrix C = Matrix::Zero(plant.n_z(), 2 * nx);
  C.rightCols(nx) = plant.C_z;

  return StateSpaceModel(A, B, C, Matrix::Zero(plant.n_z(), nd + ny), C);
}

}  // namespace sparseobs
