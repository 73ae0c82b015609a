#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace sparseobs {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Nominal LTI plant
///   xdot = A x + B_d d
///   y    = C_y x + D_d d + S_n n
///   z    = C_z x
/// The sensor-noise feed-through is identity (independent channels), so no
/// D_n field exists.
struct StateSpaceModel {
  Matrix A;    // n_x x n_x
  Matrix B_d;  // n_x x N_d
  Matrix C_y;  // N_y x n_x
  Matrix D_d;  // N_y x N_d
  Matrix C_z;  // N_z x n_x

  StateSpaceModel(Matrix A, Matrix B_d, Matrix C_y, Matrix D_d, Matrix C_z);

  int n_x() const { return static_cast<int>(A.rows()); }
  int n_d() const { return static_cast<int>(B_d.cols()); }
  int n_y() const { return static_cast<int>(C_y.rows()); }
  int n_z() const { return static_cast<int>(C_z.rows()); }
};

/// Norm-bounded affine uncertainty
///   dA = M1 F1 N1,  F1' F1 <= I
///   dB = M2 F2 N2,  F2' F2 <= I
/// The contraction factors F1, F2 are not stored; they are sampled at
/// verification time.
struct AffineUncertainty {
  Matrix M1;  // n_x x q1
  Matrix N1;  // p1 x n_x
  Matrix M2;  // n_x x q2
  Matrix N2;  // p2 x N_d

  AffineUncertainty(Matrix M1, Matrix N1, Matrix M2, Matrix N2);
  void check_against(const StateSpaceModel& model) const;
};

enum class DeltaStructure { FullBlock, Diagonal };

/// Plant with the uncertainty pulled out into a norm-bounded block Delta
/// closing the loop w_delta = Delta z_delta:
///   xdot    = A x + B_delta w_delta + B_d d
///   z_delta = C_delta x + E_delta w_delta + E_d d
///   y       = C_y x + D_delta w_delta + D_d d + S_n n
///   z       = C_z x
struct LftPlant {
  Matrix A;        // n_x x n_x
  Matrix B_delta;  // n_x x n_w
  Matrix B_d;      // n_x x N_d
  Matrix C_delta;  // n_zd x n_x
  Matrix E_delta;  // n_zd x n_w
  Matrix E_d;      // n_zd x N_d
  Matrix C_y;      // N_y x n_x
  Matrix D_delta;  // N_y x n_w
  Matrix D_d;      // N_y x N_d
  Matrix C_z;      // N_z x n_x
  DeltaStructure delta_structure = DeltaStructure::FullBlock;

  LftPlant(Matrix A, Matrix B_delta, Matrix B_d, Matrix C_delta,
           Matrix E_delta, Matrix E_d, Matrix C_y, Matrix D_delta, Matrix D_d,
           Matrix C_z, DeltaStructure structure = DeltaStructure::FullBlock);

  int n_x() const { return static_cast<int>(A.rows()); }
  int n_w() const { return static_cast<int>(B_delta.cols()); }
  int n_zd() const { return static_cast<int>(C_delta.rows()); }
  int n_d() const { return static_cast<int>(B_d.cols()); }
  int n_y() const { return static_cast<int>(C_y.rows()); }
  int n_z() const { return static_cast<int>(C_z.rows()); }

  /// Nominal plant obtained by dropping the uncertainty channel.
  StateSpaceModel nominal() const;
};

/// Per-sensor precision beta with active-sensor mask. The noise scaling
/// is S_n = diag(beta)^{-1/2} on active channels; inactive channels carry
/// zero scaling (their observer-gain columns are zero as well, so the
/// channel is inert either way).
struct PrecisionVector {
  Vector beta;
  std::vector<bool> active;

  explicit PrecisionVector(Vector beta);
  PrecisionVector(Vector beta, std::vector<bool> active);

  int size() const { return static_cast<int>(beta.size()); }
  int active_count() const;
  /// Diagonal entries of S_n.
  Vector noise_scaling() const;

  static PrecisionVector unit(int n_y);
};

struct ObserverGain {
  Matrix L;  // n_x x N_y

  explicit ObserverGain(Matrix L) : L(std::move(L)) {}
  static ObserverGain zero(int n_x, int n_y) {
    return ObserverGain(Matrix::Zero(n_x, n_y));
  }
};

enum class ErrorSystemKind { Structured, Lft };

/// Augmented error dynamics xdot = A_err x + B_err w,  eps = C_err x.
/// B_err already includes both the gain coupling and the noise scaling
/// S_scale, i.e. B_err = B_tilde * S_tilde.
struct ErrorSystem {
  Matrix A_err;
  Matrix B_err;
  Vector S_scale;  // diagonal of S_tilde, length = B_err.cols()
  Matrix C_err;
  ErrorSystemKind kind;
  std::vector<int> input_partition;  // sizes of the (w_delta|)d|n segments

  // Tiled uncertainty factors, populated for kind == Structured only
  // (robust bounded-real certificate inputs).
  Matrix M1_tilde, N1_tilde, M2_tilde, N2_tilde;

  /// B_tilde without the S_tilde scaling (B_err = B_unscaled * diag(S_scale)).
  Matrix B_unscaled;
};

/// 2 n_x state error system for the structured-affine uncertainty class,
/// with the tiled factors M_i_tilde = [M_i; M_i], N_i_tilde = [N_i, 0].
ErrorSystem build_structured_error_system(const StateSpaceModel& model,
                                          const AffineUncertainty& unc,
                                          const ObserverGain& gain,
                                          const PrecisionVector& prec);

/// n_x state error system for the LFT uncertainty class; inputs are
/// (w_delta, d, n) and S_scale = (I, I, S_n).
ErrorSystem build_lft_error_system(const LftPlant& plant,
                                   const ObserverGain& gain,
                                   const PrecisionVector& prec);

/// Closes the uncertainty loop w_delta = Delta z_delta and attaches the
/// observer error dynamics. Returns the 2 n_x state interconnection with
/// inputs (d, n), states (x, e) and output eps = C_z e.
/// Requires sigma_max(Delta) <= 1 and I - Delta E_delta well conditioned
/// (reciprocal condition number >= 1e-10).
StateSpaceModel close_delta_loop(const LftPlant& plant,
                                 const ObserverGain& gain,
                                 const PrecisionVector& prec,
                                 const Matrix& Delta);

/// (X + X') / 2; used on ingestion of symmetric data.
Matrix symmetrize(const Matrix& X);

}  // namespace sparseobs
