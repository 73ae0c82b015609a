#include "sparseobs/smd.hpp"

#include <stdexcept>

namespace sparseobs {

namespace {

Matrix smd_H() {
  Matrix H(3, 3);
  H << -2, 1, 0,
        1, -2, 1,
        0, 1, -1;
  return H;
}

// Relative-displacement map r = T x (spring j spans masses j-1 and j,
// with the wall at j = 0).
Matrix smd_T() {
  Matrix T(3, 3);
  T << 1, 0, 0,
      -1, 1, 0,
       0, -1, 1;
  return T;
}

}  // namespace

StateSpaceModel smd_nominal(const Vector& S_d_diag) {
  if (S_d_diag.size() != 3 || S_d_diag.minCoeff() <= 0.0)
    throw std::invalid_argument("S_d must be a positive 3-vector");
  const Matrix H = smd_H();
  Matrix A = Matrix::Zero(6, 6);
  A.topRightCorner(3, 3) = Matrix::Identity(3, 3);
  A.bottomLeftCorner(3, 3) = H;
  A.bottomRightCorner(3, 3) = H;
  Matrix B_d = Matrix::Zero(6, 3);
  B_d.bottomRows(3) = Matrix(S_d_diag.asDiagonal());
  return StateSpaceModel(A, B_d, Matrix::Identity(6, 6), Matrix::Zero(6, 3),
                         Matrix::Identity(6, 6));
}

AffineUncertainty smd_affine(double c0, double c1, double c2) {
  if (c0 < 0.0 || c1 < 0.0 || c2 < 0.0)
    throw std::invalid_argument("uncertainty magnitudes must be nonnegative");
  const Matrix H = smd_H();
  Matrix M = Matrix::Zero(6, 3);
  M.bottomRows(3) = Matrix::Identity(3, 3);
  Matrix N1 = Matrix::Zero(6, 6);
  N1.topLeftCorner(3, 3) = c0 * H;
  N1.bottomRightCorner(3, 3) = c1 * H;
  const Matrix N2 = c2 * Matrix::Identity(3, 3);
  return AffineUncertainty(M, N1, M, N2);
}

Matrix smd_state_matrix(const Vector& springs, const Vector& dampers) {
  if (springs.size() != 3 || dampers.size() != 3)
    throw std::invalid_argument("need three springs and three dampers");
  const Matrix T = smd_T();
  Matrix A = Matrix::Zero(6, 6);
  A.topRightCorner(3, 3) = Matrix::Identity(3, 3);
  A.bottomLeftCorner(3, 3) = -T.transpose() * springs.asDiagonal() * T;
  A.bottomRightCorner(3, 3) = -T.transpose() * dampers.asDiagonal() * T;
  return A;
}

LftPlant smd_lft(double c0, double c1, const Vector& S_d_diag) {
  if (c0 < 0.0 || c1 < 0.0)
    throw std::invalid_argument("uncertainty magnitudes must be nonnegative");
  const StateSpaceModel nominal = smd_nominal(S_d_diag);
  const Matrix T = smd_T();

  // z_delta = (c0 r, c1 rdot); w_delta feeds back as -T' on the
  // accelerations for both the spring and damper channels.
  Matrix B_delta = Matrix::Zero(6, 6);
  B_delta.bottomLeftCorner(3, 3) = -T.transpose();
  B_delta.bottomRightCorner(3, 3) = -T.transpose();
  Matrix C_delta = Matrix::Zero(6, 6);
  C_delta.topLeftCorner(3, 3) = c0 * T;
  C_delta.bottomRightCorner(3, 3) = c1 * T;

  return LftPlant(nominal.A, B_delta, nominal.B_d, C_delta,
                  Matrix::Zero(6, 6), Matrix::Zero(6, 3),
                  Matrix::Identity(6, 6), Matrix::Zero(6, 6),
                  Matrix::Zero(6, 3), Matrix::Identity(6, 6),
                  DeltaStructure::Diagonal);
}

namespace {

SweepPoint run_point(SmdKind kind, const SmdConfig& cfg, double sweep_value,
                     const SweepSettings& settings) {
  SweepPoint pt;
  pt.sweep_value = sweep_value;
  try {
    if (kind == SmdKind::Structured) {
      const StateSpaceModel model = smd_nominal(cfg.S_d);
      const AffineUncertainty unc = smd_affine(cfg.c0, cfg.c1, cfg.c2);
      DesignResult res =
          design_structured(model, unc, cfg.gamma, settings.options);
      if (res.feasible) {
        pt.cert = verify_structured(model, unc, res, cfg.gamma,
                                    settings.n_samples, settings.seed);
        pt.solved = true;
      }
      pt.design = std::move(res);
    } else {
      const LftPlant plant = smd_lft(cfg.c0, cfg.c1, cfg.S_d);
      DesignResult res = design_lft(plant, cfg.gamma, settings.options);
      if (res.feasible) {
        pt.cert = verify_lft(plant, res, cfg.gamma, settings.n_samples,
                             settings.seed);
        pt.solved = true;
      }
      pt.design = std::move(res);
    }
  } catch (const std::exception&) {
    pt.solved = false;  // recorded as a failed point, sweep continues
  }
  return pt;
}

}  // namespace

std::vector<SweepPoint> sweep_gamma(SmdKind kind, const SmdConfig& config,
                                    const std::vector<double>& gamma_list,
                                    const SweepSettings& settings) {
  std::vector<SweepPoint> table;
  for (double gamma : gamma_list) {
    SmdConfig cfg = config;
    cfg.gamma = gamma;
    table.push_back(run_point(kind, cfg, gamma, settings));
  }
  return table;
}

std::vector<SweepPoint> sweep_uncertainty(SmdKind kind, const SmdConfig& config,
                                          const std::vector<double>& c0_list,
                                          const SweepSettings& settings) {
  std::vector<SweepPoint> table;
  for (double c0 : c0_list) {
    SmdConfig cfg = config;
    cfg.c0 = c0;
    table.push_back(run_point(kind, cfg, c0, settings));
  }
  return table;
}

}  // namespace sparseobs
