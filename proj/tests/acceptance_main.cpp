// Acceptance gate: one pass/fail line per criterion, exit code = #failures.
#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <optional>
#include <random>
#include <vector>

#include "sparseobs/analysis.hpp"
#include "sparseobs/design.hpp"
#include "sparseobs/sdp.hpp"
#include "sparseobs/smd.hpp"

using namespace sparseobs;

namespace {

int g_failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail = "") {
  std::printf("criterion %d (%s): %s%s%s\n", id, name, ok ? "PASS" : "FAIL",
              detail.empty() ? "" : " -- ", detail.c_str());
  if (!ok) ++g_failures;
}

std::string counts_of(const std::vector<SweepPoint>& table) {
  std::string s = "counts";
  for (const auto& pt : table) {
    s += " ";
    s += (pt.solved && pt.design && pt.design->feasible)
             ? std::to_string(pt.design->active_count)
             : std::string("x");
  }
  return s;
}

bool counts_monotone_nondecreasing(const std::vector<SweepPoint>& table) {
  int prev = -1;
  for (const auto& pt : table) {
    if (!pt.solved || !pt.design || !pt.design->feasible) return false;
    if (pt.design->active_count < prev) return false;
    prev = pt.design->active_count;
  }
  return true;
}

int count_at(const std::vector<SweepPoint>& table, size_t i) {
  if (i >= table.size() || !table[i].design) return -1;
  return table[i].design->active_count;
}

bool all_certified(const std::vector<SweepPoint>& table) {
  for (const auto& pt : table)
    if (!pt.cert || !pt.cert->passed) return false;
  return true;
}

Matrix random_matrix(int r, int c, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Matrix M(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) M(i, j) = gauss(rng);
  return M;
}

double grid_norm(const Matrix& A, const Matrix& B, const Matrix& C,
                 const Matrix& D, int n_points) {
  const int n = static_cast<int>(A.rows());
  double best = D.jacobiSvd().singularValues().size()
                    ? D.jacobiSvd().singularValues()(0)
                    : 0.0;
  const double lo = std::log10(1e-4), hi = std::log10(1e4);
  const Eigen::MatrixXcd In = Eigen::MatrixXcd::Identity(n, n);
  for (int k = 0; k < n_points; ++k) {
    const double w =
        (k == 0) ? 0.0 : std::pow(10.0, lo + (hi - lo) * (k - 1) / (n_points - 2));
    const Eigen::MatrixXcd G =
        C * (std::complex<double>(0, w) * In - A).lu().solve(
                Eigen::MatrixXcd(B.cast<std::complex<double>>())) +
        D;
    best = std::max(best, G.jacobiSvd().singularValues()(0));
  }
  return best;
}

}  // namespace

int main() {
  const Vector sd_unit = Vector::Ones(3);
  const Vector sd_02 = 0.2 * Vector::Ones(3);

  // --- criteria 1 and 2: structured sweeps with pinned endpoints -----------
  SmdConfig fig3;
  fig3.c0 = 0.01;
  fig3.c1 = 0.02;
  fig3.c2 = 0.03;
  const std::vector<double> gamma_grid = {1.0, 0.75, 0.5, 0.25};
  const auto fig3_table =
      sweep_gamma(SmdKind::Structured, fig3, gamma_grid);
  {
    const bool ok = count_at(fig3_table, 0) == 2 &&
                    count_at(fig3_table, 3) == 6 &&
                    counts_monotone_nondecreasing(fig3_table);
    report(1, "gamma sweep endpoints 2 and 6 sensors", ok,
           counts_of(fig3_table));
  }

  SmdConfig fig4;
  fig4.gamma = 1.0;
  const std::vector<double> c0_grid = {0.0, 0.1, 0.2, 0.3};
  const auto fig4_table = sweep_uncertainty(SmdKind::Structured, fig4, c0_grid);
  {
    const bool ok = count_at(fig4_table, 0) == 1 &&
                    count_at(fig4_table, 3) == 3 &&
                    counts_monotone_nondecreasing(fig4_table);
    report(2, "uncertainty sweep endpoints 1 and 3 sensors", ok,
           counts_of(fig4_table));
  }

  // --- criterion 8 first (designs reused by criterion 3) -------------------
  SmdConfig fig5;
  fig5.c0 = 0.1;
  fig5.c1 = 0.1;
  fig5.S_d = sd_02;
  const std::vector<double> fig5_grid = {1.0, 0.75, 0.5, 0.25, 0.2};
  const auto fig5_table = sweep_gamma(SmdKind::Lft, fig5, fig5_grid);

  SmdConfig fig6;
  fig6.gamma = 0.2;
  fig6.c1 = 0.0;
  fig6.S_d = sd_02;
  // The combined small-gain channel of the LFT feasibility test crosses 1
  // between c0 = 0.29 and c0 = 0.3 on this plant, so the sweep stops at 0.25.
  const std::vector<double> fig6_grid = {0.0, 0.1, 0.2, 0.25};
  const auto fig6_table = sweep_uncertainty(SmdKind::Lft, fig6, fig6_grid);
  {
    // Counts pinned at the first verified reproduction.
    const std::vector<int> fig5_pinned = {3, 4, 5, 6, 6};
    const std::vector<int> fig6_pinned = {6, 6, 6, 6};
    bool ok = counts_monotone_nondecreasing(fig5_table) &&
              counts_monotone_nondecreasing(fig6_table) &&
              all_certified(fig5_table) && all_certified(fig6_table);
    for (size_t i = 0; i < fig5_pinned.size(); ++i)
      ok = ok && count_at(fig5_table, i) == fig5_pinned[i];
    for (size_t i = 0; i < fig6_pinned.size(); ++i)
      ok = ok && count_at(fig6_table, i) == fig6_pinned[i];
    report(8, "lft sweep regression", ok,
           counts_of(fig5_table) + " | " + counts_of(fig6_table));
  }

  // --- criterion 3: certification of every design above --------------------
  {
    bool ok = all_certified(fig3_table) && all_certified(fig4_table) &&
              all_certified(fig5_table) && all_certified(fig6_table);
    // Independent verification SDP at the same gamma for the structured runs.
    const StateSpaceModel model = smd_nominal(sd_unit);
    auto lemma5_feasible = [&](const AffineUncertainty& unc,
                               const DesignResult& res, double gamma) {
      const ErrorSystem err =
          build_structured_error_system(model, unc, res.gain, res.precision);
      LmiBounds vb;
      vb.margin_coeff = 0.0;  // the design sits at the boundary by design
      const AssembledProblem cert = assemble_robust_bounded_real(err, gamma, vb);
      return solve(compile(cert.space, Vector(), cert.lmis)).status ==
             SolveStatus::Optimal;
    };
    const AffineUncertainty unc3 = smd_affine(fig3.c0, fig3.c1, fig3.c2);
    for (size_t i = 0; i < fig3_table.size() && ok; ++i)
      ok = lemma5_feasible(unc3, *fig3_table[i].design, gamma_grid[i]);
    for (size_t i = 0; i < fig4_table.size() && ok; ++i)
      ok = lemma5_feasible(smd_affine(c0_grid[i], 0.0, 0.0),
                           *fig4_table[i].design, 1.0);
    report(3, "monte carlo and verification-sdp certification", ok);
  }

  // --- criterion 4: norm oracle equivalence --------------------------------
  {
    bool ok = true;
    const Matrix one = Matrix::Ones(1, 1);
    const double unit = hinf_norm(-one, one, one, Matrix::Zero(1, 1));
    ok = std::abs(unit - 1.0) <= 1e-6;

    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> dim(2, 8);
    for (int trial = 0; trial < 20 && ok; ++trial) {
      const int n = dim(rng);
      Matrix A = random_matrix(n, n, rng);
      const double max_re = A.eigenvalues().real().maxCoeff();
      A -= (max_re + 0.5) * Matrix::Identity(n, n);
      const Matrix B = random_matrix(n, 2, rng);
      const Matrix C = random_matrix(2, n, rng);
      const Matrix D = 0.1 * random_matrix(2, 2, rng);
      const double bisected = hinf_norm(A, B, C, D);
      const double gridded = grid_norm(A, B, C, D, 100000);
      ok = std::abs(bisected - gridded) <= 1e-3 * std::max(1.0, bisected);
    }
    report(4, "hinf norm vs frequency grid oracle", ok);
  }

  // --- criterion 5: residual soundness of accepted solves -------------------
  {
    bool ok = true;
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 5 && ok; ++trial) {
      const int n = 3;
      Matrix A = random_matrix(n, n, rng);
      A -= (A.eigenvalues().real().maxCoeff() + 1.0) * Matrix::Identity(n, n);
      const Matrix B = random_matrix(n, 1, rng);
      const Matrix C = random_matrix(1, n, rng);
      const Matrix D = Matrix::Zero(1, 1);
      const double gamma = 1.2 * hinf_norm(A, B, C, D);
      const AssembledProblem prob = assemble_bounded_real(A, B, C, D, gamma);
      const SolveReport rep = solve(compile(prob.space, Vector(), prob.lmis));
      if (rep.status != SolveStatus::Optimal) {
        ok = false;
        break;
      }
      for (const auto& lmi : prob.lmis)
        ok = ok && evaluate_lmi(lmi, rep.v).second <= -lmi.margin / 2;
    }
    // Gain recovery residual on random well-posed instances.
    for (int trial = 0; trial < 5 && ok; ++trial) {
      const Matrix G = random_matrix(6, 6, rng);
      const Matrix X2 = G * G.transpose() + Matrix::Identity(6, 6);
      const Matrix Y = random_matrix(6, 4, rng);
      const ObserverGain gain = recover_gain(X2, Y);
      const double resid = (X2 * gain.L - Y).cwiseAbs().maxCoeff();
      ok = ok && resid <= 1e-8 * (1 + Y.cwiseAbs().maxCoeff());
    }
    report(5, "lmi residual and gain recovery soundness", ok);
  }

  // --- criterion 6: lft fidelity --------------------------------------------
  {
    bool ok = true;
    const double c0 = 0.1, c1 = 0.1;
    const LftPlant plant = smd_lft(c0, c1, sd_unit);
    const ObserverGain zero = ObserverGain::zero(plant.n_x(), plant.n_y());
    const PrecisionVector unit = PrecisionVector::unit(plant.n_y());

    const Matrix nominal_A =
        close_delta_loop(plant, zero, unit, Matrix::Zero(6, 6))
            .A.topLeftCorner(6, 6);
    ok = (nominal_A - smd_nominal(sd_unit).A).cwiseAbs().maxCoeff() == 0.0;

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 100 && ok; ++k) {
      Vector d(6);
      for (int i = 0; i < 6; ++i) d(i) = u(rng);
      const Matrix closed =
          close_delta_loop(plant, zero, unit, Matrix(d.asDiagonal()))
              .A.topLeftCorner(6, 6);
      const Vector springs = Vector::Ones(3) + c0 * d.head(3);
      const Vector dampers = Vector::Ones(3) + c1 * d.tail(3);
      const Matrix physical = smd_state_matrix(springs, dampers);
      ok = (closed - physical).cwiseAbs().maxCoeff() <= 1e-12;
    }
    report(6, "lft closure matches physical assembly", ok);
  }

  // --- criterion 7: precision monotonicity -----------------------------------
  {
    bool ok = fig3_table[0].design && fig3_table[0].design->feasible;
    if (ok) {
      const StateSpaceModel model = smd_nominal(sd_unit);
      const AffineUncertainty unc = smd_affine(fig3.c0, fig3.c1, fig3.c2);
      const DesignResult& base = *fig3_table[0].design;
      DesignResult doubled = base;
      doubled.precision.beta *= 2.0;
      const auto rep_base =
          verify_structured(model, unc, base, 1.0, 20, 555);
      const auto rep_doubled =
          verify_structured(model, unc, doubled, 1e9, 20, 555);
      ok = rep_doubled.worst_norm <= rep_base.worst_norm * (1 + 1e-9);
    }
    report(7, "doubling precision never increases certified norm", ok);
  }

  std::printf("%s (%d failure%s)\n", g_failures == 0 ? "ACCEPTED" : "REJECTED",
              g_failures, g_failures == 1 ? "" : "s");
  return g_failures;
}
