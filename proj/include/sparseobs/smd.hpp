#pragma once

#include <optional>
#include <vector>

#include "sparseobs/analysis.hpp"
#include "sparseobs/design.hpp"
#include "sparseobs/system_model.hpp"

namespace sparseobs {

/// Serially connected three-mass spring-mass-damper benchmark; all nominal
/// masses, spring constants and damper coefficients are unity.
struct SmdConfig {
  Vector S_d = Vector::Ones(3);  // diagonal disturbance scaling
  double c0 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double gamma = 1.0;
};

/// Nominal plant: A = [0 I; H H], B_d = [0; I] S_d, six sensors (three
/// positions then three velocities), C_y = C_z = I, D_d = 0.
StateSpaceModel smd_nominal(const Vector& S_d_diag);

/// Structured uncertainty: M1 = M2 = [0; I], N1 = blkdiag(c0 H, c1 H),
/// N2 = c2 I.
AffineUncertainty smd_affine(double c0, double c1, double c2);

/// LFT form with spring constants 1 + c0 d_j and damper coefficients
/// 1 + c1 d_{3+j}, |d| <= 1, pulled out as Delta = diag(d).
LftPlant smd_lft(double c0, double c1, const Vector& S_d_diag);

/// Direct physical assembly of the uncertain A matrix at given spring
/// constants and damper coefficients (the fidelity oracle for smd_lft).
Matrix smd_state_matrix(const Vector& springs, const Vector& dampers);

enum class SmdKind { Structured, Lft };

struct SweepPoint {
  double sweep_value = 0.0;
  bool solved = false;
  std::optional<DesignResult> design;
  std::optional<CertificationReport> cert;
};

struct SweepSettings {
  DesignOptions options;
  int n_samples = 200;
  std::uint64_t seed = 1;
};

/// One design + certification per gamma in the grid.
std::vector<SweepPoint> sweep_gamma(SmdKind kind, const SmdConfig& config,
                                    const std::vector<double>& gamma_list,
                                    const SweepSettings& settings = {});

/// One design + certification per c0 in the grid (c1, c2, gamma fixed).
std::vector<SweepPoint> sweep_uncertainty(SmdKind kind, const SmdConfig& config,
                                          const std::vector<double>& c0_list,
                                          const SweepSettings& settings = {});

}  // namespace sparseobs
