#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <optional>
#include <vector>

#include "sparseobs/system_model.hpp"

namespace sparseobs {

struct DesignResult;  // design.hpp

/// true iff all eigenvalues of A satisfy Re(lambda) < -1e-10.
bool is_hurwitz(const Matrix& A);

struct HinfOptions {
  double rel_tol = 1e-6;
  double gamma_max = 1e8;
};

/// H-infinity norm of C (sI - A)^{-1} B + D for Hurwitz A, by bisection on
/// gamma with the Hamiltonian imaginary-axis eigenvalue test.
double hinf_norm(const Matrix& A, const Matrix& B, const Matrix& C,
                 const Matrix& D, const HinfOptions& opts = {});

/// Draws a matrix F with sigma_max(F) <= 1. Interior draws land strictly
/// inside the unit ball; boundary draws are scaled to sigma_max(F) = 1.
Matrix sample_contraction(int rows, int cols, std::mt19937_64& rng,
                          bool boundary);

/// Diagonal counterpart for structured Delta blocks: entries in [-1, 1],
/// boundary draws scaled so max |delta_i| = 1.
Vector sample_diagonal_contraction(int n, std::mt19937_64& rng, bool boundary);

struct CertificationReport {
  int n_samples = 0;
  double worst_norm = 0.0;
  int worst_sample_id = -1;
  std::vector<std::pair<int, double>> violations;
  double nominal_norm = 0.0;
  bool passed = false;
  // LFT case only: nominal norm of the w_tilde -> z_delta map (must be <= 1).
  std::optional<double> small_gain_norm;
};

constexpr double kCertTol = 1e-4;

/// Monte-Carlo certification of a structured-uncertainty design: samples
/// (F1, F2), half on the boundary shell, and checks every perturbed error
/// system against gamma * (1 + kCertTol).
CertificationReport verify_structured(const StateSpaceModel& model,
                                      const AffineUncertainty& unc,
                                      const DesignResult& result, double gamma,
                                      int n_samples, std::uint64_t seed);

/// Certification of an LFT design: nominal small-gain check plus sampled
/// Delta closures (respecting plant.delta_structure).
CertificationReport verify_lft(const LftPlant& plant,
                               const DesignResult& result, double gamma,
                               int n_samples, std::uint64_t seed);

}  // namespace sparseobs
