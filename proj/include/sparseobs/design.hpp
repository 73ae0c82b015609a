#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sparseobs/lmi.hpp"
#include "sparseobs/sdp.hpp"
#include "sparseobs/system_model.hpp"

namespace sparseobs {

struct DesignOptions {
  double epsilon_reweight = 1e-4;  // scaled by max(1, max beta of iteration 1)
  int max_reweight_iters = 10;
  double convergence_tol = 1e-3;   // relative change of ||beta||_1
  double prune_rel = 1e-5;
  double prune_abs = 1e-7;
  double beta_min = 1e-8;
  double delta_min = 1e-9;
  std::uint64_t rng_seed = 0;
  bool bisect_on_infeasible = true;
  int bisect_steps = 12;
  double bisect_gamma_max = 100.0;
  SolveSettings solver;
};

struct IterationRecord {
  Vector rho;
  Vector beta;
  double objective = 0.0;
  SolveStatus status = SolveStatus::NumericalTrouble;
};

struct DesignResult {
  ObserverGain gain;
  PrecisionVector precision;
  double gamma = 0.0;
  int active_count = 0;
  std::vector<IterationRecord> history;
  bool refined = false;
  bool feasible = false;
  // Smallest feasible gamma found by bisection when the request was
  // infeasible at iteration 1.
  std::optional<double> gamma_frontier;

  DesignResult(ObserverGain g, PrecisionVector p)
      : gain(std::move(g)), precision(std::move(p)) {}
};

/// rho_i = 1 / (epsilon + |beta_i|).
Vector reweight(const Vector& beta, double epsilon);

/// Solves X2 L = Y for the observer gain; X2 must be positive definite.
ObserverGain recover_gain(const Matrix& X2, const Matrix& Y);

/// Reweighted-l1 synthesis for the structured-affine uncertainty class.
DesignResult design_structured(const StateSpaceModel& model,
                               const AffineUncertainty& unc, double gamma,
                               const DesignOptions& opts = {});

/// Reweighted-l1 synthesis for the LFT uncertainty class.
DesignResult design_lft(const LftPlant& plant, double gamma,
                        const DesignOptions& opts = {});

}  // namespace sparseobs
