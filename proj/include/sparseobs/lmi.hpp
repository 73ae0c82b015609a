#pragma once

#include <functional>
#include <string>
#include <vector>

#include "sparseobs/system_model.hpp"

namespace sparseobs {

enum class VarKind { SymmetricMatrix, FullMatrix, NonnegVector, NonnegScalar };

struct VarDescriptor {
  std::string name;
  VarKind kind;
  int rows = 0;
  int cols = 0;
  int offset = 0;
  int size = 0;
  double lower = 0.0;  // elementwise lower bound for Nonneg kinds
};

/// Ordered list of matrix/vector/scalar decision variables mapped onto a
/// flat real vector. Symmetric matrices are parameterized by their upper
/// triangle (column major), so n x n contributes n(n+1)/2 scalars.
class DecisionVariableSpace {
 public:
  int add_symmetric(const std::string& name, int n);
  int add_full(const std::string& name, int rows, int cols);
  int add_nonneg_vector(const std::string& name, int k, double lower);
  int add_nonneg_scalar(const std::string& name, double lower);

  int dim() const { return dim_; }
  const std::vector<VarDescriptor>& vars() const { return vars_; }
  const VarDescriptor& var(const std::string& name) const;
  bool has(const std::string& name) const;

  Matrix get_symmetric(const Vector& v, const std::string& name) const;
  Matrix get_full(const Vector& v, const std::string& name) const;
  Vector get_vector(const Vector& v, const std::string& name) const;
  double get_scalar(const Vector& v, const std::string& name) const;

  void set_symmetric(Vector& v, const std::string& name, const Matrix& X) const;
  void set_full(Vector& v, const std::string& name, const Matrix& X) const;
  void set_vector(Vector& v, const std::string& name, const Vector& x) const;
  void set_scalar(Vector& v, const std::string& name, double x) const;

 private:
  std::vector<VarDescriptor> vars_;
  int dim_ = 0;
};

/// One sparse symmetric coefficient entry; row <= col, mirrored implicitly.
struct SymEntry {
  int row;
  int col;
  double value;
};

/// Symmetric matrix-valued affine function M(v) = A0 + sum_j v_j A_j,
/// constrained M(v) <= -margin * I.
struct AffineMatrixInequality {
  std::string name;
  int dim = 0;
  Matrix A0;
  std::vector<std::vector<SymEntry>> coeffs;  // indexed by decision index j
  double margin = 0.0;

  Matrix evaluate(const Vector& v) const;
};

/// Returns (M(v), largest eigenvalue of M(v)).
std::pair<Matrix, double> evaluate_lmi(const AffineMatrixInequality& lmi,
                                       const Vector& v);

/// Builds the coefficient representation of an affine map by probing the
/// assembler at v = 0 and at each basis vector. The assembler must be
/// exactly affine in v and return a symmetric matrix. The margin is
/// margin_coeff * (1 + max|A0|).
AffineMatrixInequality build_affine_lmi(
    const DecisionVariableSpace& space, const std::string& name,
    const std::function<Matrix(const Vector&)>& assemble,
    double margin_coeff = 1e-7);

struct LmiBounds {
  double beta_min = 1e-8;
  double delta_min = 1e-9;
  double margin_coeff = 1e-7;  // margin = coeff * (1 + max|A0|)
  // Floor on the synthesis Lyapunov blocks, X >= x_floor * I. A substantive
  // floor keeps X2 away from singularity, so the recovered gain X2^{-1} Y
  // stays moderate and downstream certificates remain well conditioned.
  double x_floor = 1e-3;
};

struct AssembledProblem {
  DecisionVariableSpace space;
  std::vector<AffineMatrixInequality> lmis;
};

/// Robust observer synthesis LMIs for the structured-affine uncertainty
/// class. Variables {X1, X2, Y, beta, delta1, delta2}; the main 4x4-block
/// inequality plus the positivity constraints on X1 and X2.
AssembledProblem assemble_theorem1(const StateSpaceModel& model,
                                   const AffineUncertainty& unc, double gamma,
                                   const LmiBounds& bounds = {});

/// Observer synthesis LMIs for the LFT uncertainty class. Variables
/// {X1, X2, Y, beta}; the small-gain inequality (X1 only), the performance
/// inequality, and the positivity constraints.
AssembledProblem assemble_theorem2(const LftPlant& plant, double gamma,
                                   const LmiBounds& bounds = {});

/// Bounded-real inequality: ||C (sI-A)^{-1} B + D||_inf <= gamma iff
/// feasible over X > 0.
AssembledProblem assemble_bounded_real(const Matrix& A, const Matrix& B,
                                       const Matrix& C, const Matrix& D,
                                       double gamma,
                                       const LmiBounds& bounds = {});

/// Robust bounded-real certificate on a structured error system (the
/// independent cross-check for synthesized designs). Variables
/// {X, delta1, delta2}.
AssembledProblem assemble_robust_bounded_real(const ErrorSystem& err,
                                              double gamma,
                                              const LmiBounds& bounds = {});

}  // namespace sparseobs
