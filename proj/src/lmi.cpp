#include "sparseobs/lmi.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace sparseobs {

namespace {

void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument(what);
}

int tri_size(int n) { return n * (n + 1) / 2; }

// Reflects the upper triangle onto the lower one; assembler lambdas fill
// only the blocks on and above the diagonal.
Matrix mirror_upper(const Matrix& M) {
  return M.selfadjointView<Eigen::Upper>();
}

}  // namespace

int DecisionVariableSpace::add_symmetric(const std::string& name, int n) {
  require(!has(name), "duplicate variable name: " + name);
  vars_.push_back({name, VarKind::SymmetricMatrix, n, n, dim_, tri_size(n), 0.0});
  dim_ += tri_size(n);
  return static_cast<int>(vars_.size()) - 1;
}

int DecisionVariableSpace::add_full(const std::string& name, int rows,
                                    int cols) {
  require(!has(name), "duplicate variable name: " + name);
  vars_.push_back({name, VarKind::FullMatrix, rows, cols, dim_, rows * cols, 0.0});
  dim_ += rows * cols;
  return static_cast<int>(vars_.size()) - 1;
}

int DecisionVariableSpace::add_nonneg_vector(const std::string& name, int k,
                                             double lower) {
  require(!has(name), "duplicate variable name: " + name);
  vars_.push_back({name, VarKind::NonnegVector, k, 1, dim_, k, lower});
  dim_ += k;
  return static_cast<int>(vars_.size()) - 1;
}

int DecisionVariableSpace::add_nonneg_scalar(const std::string& name,
                                             double lower) {
  require(!has(name), "duplicate variable name: " + name);
  vars_.push_back({name, VarKind::NonnegScalar, 1, 1, dim_, 1, lower});
  dim_ += 1;
  return static_cast<int>(vars_.size()) - 1;
}

bool DecisionVariableSpace::has(const std::string& name) const {
  for (const auto& d : vars_)
    if (d.name == name) return true;
  return false;
}

const VarDescriptor& DecisionVariableSpace::var(const std::string& name) const {
  for (const auto& d : vars_)
    if (d.name == name) return d;
  throw std::invalid_argument("unknown variable: " + name);
}

Matrix DecisionVariableSpace::get_symmetric(const Vector& v,
                                            const std::string& name) const {
  const auto& d = var(name);
  require(d.kind == VarKind::SymmetricMatrix, name + " is not symmetric");
  Matrix X(d.rows, d.rows);
  int k = d.offset;
  for (int j = 0; j < d.rows; ++j)
    for (int i = 0; i <= j; ++i) {
      X(i, j) = v[k];
      X(j, i) = v[k];
      ++k;
    }
  return X;
}

Matrix DecisionVariableSpace::get_full(const Vector& v,
                                       const std::string& name) const {
  const auto& d = var(name);
  require(d.kind == VarKind::FullMatrix, name + " is not a full matrix");
  Matrix X(d.rows, d.cols);
  int k = d.offset;
  for (int j = 0; j < d.cols; ++j)
    for (int i = 0; i < d.rows; ++i) X(i, j) = v[k++];
  return X;
}

Vector DecisionVariableSpace::get_vector(const Vector& v,
                                         const std::string& name) const {
  const auto& d = var(name);
  require(d.kind == VarKind::NonnegVector, name + " is not a vector");
  return v.segment(d.offset, d.size);
}

double DecisionVariableSpace::get_scalar(const Vector& v,
                                         const std::string& name) const {
  const auto& d = var(name);
  require(d.kind == VarKind::NonnegScalar, name + " is not a scalar");
  return v[d.offset];
}

void DecisionVariableSpace::set_symmetric(Vector& v, const std::string& name,
                                          const Matrix& X) const {
  const auto& d = var(name);
  require(d.kind == VarKind::SymmetricMatrix && X.rows() == d.rows &&
              X.cols() == d.rows,
          "bad symmetric assignment to " + name);
  const Matrix S = symmetrize(X);
  int k = d.offset;
  for (int j = 0; j < d.rows; ++j)
    for (int i = 0; i <= j; ++i) v[k++] = S(i, j);
}

void DecisionVariableSpace::set_full(Vector& v, const std::string& name,
                                     const Matrix& X) const {
  const auto& d = var(name);
  require(d.kind == VarKind::FullMatrix && X.rows() == d.rows &&
              X.cols() == d.cols,
          "bad matrix assignment to " + name);
  int k = d.offset;
  for (int j = 0; j < d.cols; ++j)
    for (int i = 0; i < d.rows; ++i) v[k++] = X(i, j);
}

void DecisionVariableSpace::set_vector(Vector& v, const std::string& name,
                                       const Vector& x) const {
  const auto& d = var(name);
  require(d.kind == VarKind::NonnegVector && x.size() == d.size,
          "bad vector assignment to " + name);
  v.segment(d.offset, d.size) = x;
}

void DecisionVariableSpace::set_scalar(Vector& v, const std::string& name,
                                       double x) const {
  const auto& d = var(name);
  require(d.kind == VarKind::NonnegScalar, name + " is not a scalar");
  v[d.offset] = x;
}

Matrix AffineMatrixInequality::evaluate(const Vector& v) const {
  require(v.size() == static_cast<Eigen::Index>(coeffs.size()),
          "decision vector length mismatch");
  Matrix M = A0;
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    if (v[j] == 0.0) continue;
    for (const SymEntry& e : coeffs[j]) {
      M(e.row, e.col) += v[j] * e.value;
      if (e.row != e.col) M(e.col, e.row) += v[j] * e.value;
    }
  }
  return M;
}

std::pair<Matrix, double> evaluate_lmi(const AffineMatrixInequality& lmi,
                                       const Vector& v) {
  Matrix M = lmi.evaluate(v);
  Eigen::SelfAdjointEigenSolver<Matrix> es(M, Eigen::EigenvaluesOnly);
  return {std::move(M), es.eigenvalues().maxCoeff()};
}

AffineMatrixInequality build_affine_lmi(
    const DecisionVariableSpace& space, const std::string& name,
    const std::function<Matrix(const Vector&)>& assemble,
    double margin_coeff) {
  AffineMatrixInequality lmi;
  lmi.name = name;
  Vector v = Vector::Zero(space.dim());
  lmi.A0 = symmetrize(assemble(v));
  lmi.dim = static_cast<int>(lmi.A0.rows());
  lmi.coeffs.resize(space.dim());
  for (int j = 0; j < space.dim(); ++j) {
    v[j] = 1.0;
    const Matrix Aj = symmetrize(assemble(v)) - lmi.A0;
    v[j] = 0.0;
    for (int c = 0; c < lmi.dim; ++c)
      for (int r = 0; r <= c; ++r)
        if (Aj(r, c) != 0.0) lmi.coeffs[j].push_back({r, c, Aj(r, c)});
  }
  lmi.margin = margin_coeff * (1.0 + lmi.A0.cwiseAbs().maxCoeff());
  return lmi;
}

namespace {

AffineMatrixInequality positivity_lmi(const DecisionVariableSpace& space,
                                      const std::string& var_name,
                                      double margin_coeff) {
  return build_affine_lmi(
      space, "neg_" + var_name,
      [&](const Vector& v) { return Matrix(-space.get_symmetric(v, var_name)); },
      margin_coeff);
}

}  // namespace

AssembledProblem assemble_theorem1(const StateSpaceModel& model,
                                   const AffineUncertainty& unc, double gamma,
                                   const LmiBounds& bounds) {
  require(gamma > 0.0, "gamma must be positive");
  unc.check_against(model);
  const int nx = model.n_x();
  const int nd = model.n_d();
  const int ny = model.n_y();
  const int q1 = static_cast<int>(unc.M1.cols());
  const int q2 = static_cast<int>(unc.M2.cols());
  const double g2 = gamma * gamma;

  AssembledProblem out;
  out.space.add_symmetric("X1", nx);
  out.space.add_symmetric("X2", nx);
  out.space.add_full("Y", nx, ny);
  out.space.add_nonneg_vector("beta", ny, bounds.beta_min);
  out.space.add_nonneg_scalar("delta1", bounds.delta_min);
  out.space.add_nonneg_scalar("delta2", bounds.delta_min);

  const int m = 2 * nx + nd + ny + q1 + q2;
  auto main_lmi = [&, m](const Vector& v) {
    const Matrix X1 = out.space.get_symmetric(v, "X1");
    const Matrix X2 = out.space.get_symmetric(v, "X2");
    const Matrix Y = out.space.get_full(v, "Y");
    const Vector beta = out.space.get_vector(v, "beta");
    const double d1 = out.space.get_scalar(v, "delta1");
    const double d2 = out.space.get_scalar(v, "delta2");

    Matrix M = Matrix::Zero(m, m);
    const int ox = 0, oe = nx, od = 2 * nx, on = 2 * nx + nd,
              o1 = 2 * nx + nd + ny, o2 = o1 + q1;

    M.block(ox, ox, nx, nx) = X1 * model.A + model.A.transpose() * X1 +
                              d1 * unc.N1.transpose() * unc.N1;
    const Matrix X2A_YC = X2 * model.A + Y * model.C_y;
    M.block(oe, oe, nx, nx) = X2A_YC + X2A_YC.transpose() +
                              model.C_z.transpose() * model.C_z;
    M.block(ox, od, nx, nd) = X1 * model.B_d;
    M.block(oe, od, nx, nd) = X2 * model.B_d + Y * model.D_d;
    M.block(oe, on, nx, ny) = Y;
    M.block(ox, o1, nx, q1) = X1 * unc.M1;
    M.block(oe, o1, nx, q1) = X2 * unc.M1;
    M.block(ox, o2, nx, q2) = X1 * unc.M2;
    M.block(oe, o2, nx, q2) = X2 * unc.M2;
    M.block(od, od, nd, nd) =
        -g2 * Matrix::Identity(nd, nd) + d2 * unc.N2.transpose() * unc.N2;
    M.block(on, on, ny, ny) = Matrix((-g2 * beta).asDiagonal());
    M.block(o1, o1, q1, q1) = -d1 * Matrix::Identity(q1, q1);
    M.block(o2, o2, q2, q2) = -d2 * Matrix::Identity(q2, q2);
    return mirror_upper(M);
  };

  out.lmis.push_back(build_affine_lmi(out.space, "theorem1_main", main_lmi,
                                      bounds.margin_coeff));
  out.lmis.push_back(positivity_lmi(out.space, "X1", bounds.x_floor));
  out.lmis.push_back(positivity_lmi(out.space, "X2", bounds.x_floor));
  return out;
}

AssembledProblem assemble_theorem2(const LftPlant& plant, double gamma,
                                   const LmiBounds& bounds) {
  require(gamma > 0.0, "gamma must be positive");
  const int nx = plant.n_x();
  const int nw = plant.n_w();
  const int nd = plant.n_d();
  const int ny = plant.n_y();
  const double g2 = gamma * gamma;

  AssembledProblem out;
  out.space.add_symmetric("X1", nx);
  out.space.add_symmetric("X2", nx);
  out.space.add_full("Y", nx, ny);
  out.space.add_nonneg_vector("beta", ny, bounds.beta_min);

  // Small-gain condition on w_tilde -> z_delta; involves X1 only.
  auto lmi1 = [&](const Vector& v) {
    const Matrix X1 = out.space.get_symmetric(v, "X1");
    const int m = nx + nw + nd;
    Matrix M = Matrix::Zero(m, m);
    M.block(0, 0, nx, nx) = X1 * plant.A + plant.A.transpose() * X1 +
                            plant.C_delta.transpose() * plant.C_delta;
    M.block(0, nx, nx, nw) =
        X1 * plant.B_delta + plant.C_delta.transpose() * plant.E_delta;
    M.block(0, nx + nw, nx, nd) =
        X1 * plant.B_d + plant.C_delta.transpose() * plant.E_d;
    M.block(nx, nx, nw, nw) =
        plant.E_delta.transpose() * plant.E_delta - Matrix::Identity(nw, nw);
    M.block(nx, nx + nw, nw, nd) = plant.E_delta.transpose() * plant.E_d;
    M.block(nx + nw, nx + nw, nd, nd) =
        plant.E_d.transpose() * plant.E_d - Matrix::Identity(nd, nd);
    return mirror_upper(M);
  };

  // Performance condition on w_tilde -> eps for the error dynamics.
  auto lmi2 = [&](const Vector& v) {
    const Matrix X2 = out.space.get_symmetric(v, "X2");
    const Matrix Y = out.space.get_full(v, "Y");
    const Vector beta = out.space.get_vector(v, "beta");
    const int m = nx + nw + nd + ny;
    Matrix M = Matrix::Zero(m, m);
    const Matrix W11 = X2 * plant.A + Y * plant.C_y;
    M.block(0, 0, nx, nx) =
        W11 + W11.transpose() + plant.C_z.transpose() * plant.C_z;
    M.block(0, nx, nx, nw) = X2 * plant.B_delta + Y * plant.D_delta;
    M.block(0, nx + nw, nx, nd) = X2 * plant.B_d + Y * plant.D_d;
    M.block(0, nx + nw + nd, nx, ny) = Y;
    M.block(nx, nx, nw, nw) = -g2 * Matrix::Identity(nw, nw);
    M.block(nx + nw, nx + nw, nd, nd) = -g2 * Matrix::Identity(nd, nd);
    M.block(nx + nw + nd, nx + nw + nd, ny, ny) =
        Matrix((-g2 * beta).asDiagonal());
    return mirror_upper(M);
  };

  out.lmis.push_back(build_affine_lmi(out.space, "theorem2_smallgain", lmi1,
                                      bounds.margin_coeff));
  out.lmis.push_back(build_affine_lmi(out.space, "theorem2_perf", lmi2,
                                      bounds.margin_coeff));
  out.lmis.push_back(positivity_lmi(out.space, "X1", bounds.x_floor));
  out.lmis.push_back(positivity_lmi(out.space, "X2", bounds.x_floor));
  return out;
}

AssembledProblem assemble_bounded_real(const Matrix& A, const Matrix& B,
                                       const Matrix& C, const Matrix& D,
                                       double gamma, const LmiBounds& bounds) {
  require(A.rows() == A.cols(), "A must be square");
  require(B.rows() == A.rows() && C.cols() == A.rows(), "B/C dims");
  require(D.rows() == C.rows() && D.cols() == B.cols(), "D dims");
  const int n = static_cast<int>(A.rows());
  const int m = static_cast<int>(B.cols());
  const double g2 = gamma * gamma;

  AssembledProblem out;
  out.space.add_symmetric("X", n);
  auto lmi = [&, n, m, g2](const Vector& v) {
    const Matrix X = out.space.get_symmetric(v, "X");
    Matrix M = Matrix::Zero(n + m, n + m);
    M.block(0, 0, n, n) = X * A + A.transpose() * X + C.transpose() * C;
    M.block(0, n, n, m) = X * B + C.transpose() * D;
    M.block(n, n, m, m) = D.transpose() * D - g2 * Matrix::Identity(m, m);
    return mirror_upper(M);
  };
  out.lmis.push_back(build_affine_lmi(out.space, "bounded_real", lmi,
                                      bounds.margin_coeff));
  out.lmis.push_back(positivity_lmi(out.space, "X", bounds.margin_coeff));
  return out;
}

AssembledProblem assemble_robust_bounded_real(const ErrorSystem& err,
                                              double gamma,
                                              const LmiBounds& bounds) {
  require(err.kind == ErrorSystemKind::Structured,
          "robust bounded-real certificate needs a structured error system");
  const int n = static_cast<int>(err.A_err.rows());
  const int k = static_cast<int>(err.B_err.cols());
  const int q1 = static_cast<int>(err.M1_tilde.cols());
  const int q2 = static_cast<int>(err.M2_tilde.cols());
  const double g2 = gamma * gamma;

  AssembledProblem out;
  out.space.add_symmetric("X", n);
  out.space.add_nonneg_scalar("delta1", bounds.delta_min);
  out.space.add_nonneg_scalar("delta2", bounds.delta_min);

  auto lmi = [&](const Vector& v) {
    const Matrix X = out.space.get_symmetric(v, "X");
    const double d1 = out.space.get_scalar(v, "delta1");
    const double d2 = out.space.get_scalar(v, "delta2");
    const int m = n + k + q1 + q2;
    Matrix M = Matrix::Zero(m, m);
    M.block(0, 0, n, n) = X * err.A_err + err.A_err.transpose() * X +
                          err.C_err.transpose() * err.C_err +
                          d1 * err.N1_tilde.transpose() * err.N1_tilde;
    M.block(0, n, n, k) = X * err.B_err;
    M.block(0, n + k, n, q1) = X * err.M1_tilde;
    M.block(0, n + k + q1, n, q2) = X * err.M2_tilde;
    M.block(n, n, k, k) = -g2 * Matrix::Identity(k, k) +
                          d2 * err.N2_tilde.transpose() * err.N2_tilde;
    M.block(n + k, n + k, q1, q1) = -d1 * Matrix::Identity(q1, q1);
    M.block(n + k + q1, n + k + q1, q2, q2) = -d2 * Matrix::Identity(q2, q2);
    return mirror_upper(M);
  };
  out.lmis.push_back(build_affine_lmi(out.space, "robust_bounded_real", lmi,
                                      bounds.margin_coeff));
  out.lmis.push_back(positivity_lmi(out.space, "X", bounds.margin_coeff));
  return out;
}

}  // namespace sparseobs
