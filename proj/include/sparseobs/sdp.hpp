#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "sparseobs/lmi.hpp"

namespace sparseobs {

/// svec: upper triangle stacked column major with off-diagonal entries
/// scaled by sqrt(2), so <svec(A), svec(B)> = trace(A B).
Vector svec(const Matrix& A);
Matrix unsvec(const Vector& s, int n);

/// Standard-form conic program over PSD cones:
///   minimize c' v   s.t.   M_k(v) <= 0 for every cone k,   v >= lower
/// where each cone stores -M_k as (constant svec block, sparse columns).
struct ConicProgram {
  struct Cone {
    std::string name;
    int dim = 0;
    Vector b;  // svec(-A0 - margin I)
    std::vector<std::vector<std::pair<int, double>>> cols;  // per var index
  };

  Vector c;
  std::vector<Cone> cones;
  Vector lower;
  std::vector<bool> has_lower;

  int n_vars() const { return static_cast<int>(c.size()); }
};

/// Compiles the weighted-l1-on-beta objective (rho' beta; beta > 0 makes it
/// linear) plus the given inequalities into a conic program. Pass an empty
/// rho for a pure feasibility problem. Box lower bounds come from the
/// nonneg variable descriptors.
ConicProgram compile(const DecisionVariableSpace& space, const Vector& rho,
                     const std::vector<AffineMatrixInequality>& lmis);

/// Plain-text sparse dump for cross-solver differential testing.
/// Header "SDP n_v n_cones"; per cone "CONE m nnz" followed by
/// "row col val var_index" quadruples (var_index = -1 for the constant).
void dump_program(const ConicProgram& prog, std::ostream& os);

enum class SolveStatus { Optimal, Infeasible, NumericalTrouble, IterationLimit };

const char* to_string(SolveStatus s);

struct SolveSettings {
  double abs_tol = 1e-8;
  double rel_tol = 1e-8;
  int max_iter = 200;
};

struct SolveReport {
  SolveStatus status = SolveStatus::NumericalTrouble;
  Vector v;
  double objective = 0.0;
  double primal_residual = 0.0;
  double solve_time_s = 0.0;
  int newton_steps = 0;
};

/// Deterministic barrier interior-point solve. Infeasibility is reported,
/// never repaired.
SolveReport solve(const ConicProgram& prog, const SolveSettings& settings = {});

}  // namespace sparseobs
