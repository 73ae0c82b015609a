#include "sparseobs/design.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sparseobs {

Vector reweight(const Vector& beta, double epsilon) {
  if (epsilon <= 0.0) throw std::invalid_argument("epsilon must be positive");
  Vector rho(beta.size());
  for (Eigen::Index i = 0; i < beta.size(); ++i) {
    if (beta[i] < 0.0)
      throw std::invalid_argument("beta must be nonnegative");
    rho[i] = 1.0 / (epsilon + std::abs(beta[i]));
  }
  return rho;
}

ObserverGain recover_gain(const Matrix& X2, const Matrix& Y) {
  if (X2.rows() != X2.cols() || X2.rows() != Y.rows())
    throw std::invalid_argument("recover_gain: dimension mismatch");
  Eigen::SelfAdjointEigenSolver<Matrix> es(X2, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw std::runtime_error("recover_gain: X2 is not positive definite");
  Matrix L = Eigen::LLT<Matrix>(X2).solve(Y);
  const double resid = (X2 * L - Y).cwiseAbs().maxCoeff();
  if (resid > 1e-8 * (1.0 + Y.cwiseAbs().maxCoeff()))
    throw std::runtime_error("recover_gain: residual too large");
  return ObserverGain(std::move(L));
}

namespace {

using SensorSet = std::vector<int>;

Matrix select_rows(const Matrix& M, const SensorSet& rows) {
  Matrix R(static_cast<Eigen::Index>(rows.size()), M.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) R.row(i) = M.row(rows[i]);
  return R;
}

// Problem-class specific pieces of the synthesis loop.
struct SynthesisHooks {
  int n_y;
  int n_x;
  std::function<AssembledProblem(const SensorSet&)> assemble;
  // Feasibility of the gamma-independent part (LFT small-gain); empty when
  // not applicable.
  std::function<bool()> precheck;
  std::function<bool(double)> gamma_feasible;  // for frontier bisection
};

struct SolveOutcome {
  SolveReport report;
  AssembledProblem prob;
};

SolveOutcome solve_weighted(const SynthesisHooks& hooks, const SensorSet& sensors,
                            const Vector& rho, const DesignOptions& opts) {
  SolveOutcome out{.report = {}, .prob = hooks.assemble(sensors)};
  ConicProgram prog = compile(out.prob.space, rho, out.prob.lmis);
  out.report = solve(prog, opts.solver);
  return out;
}

void check_residuals(const AssembledProblem& prob, const Vector& v) {
  for (const AffineMatrixInequality& lmi : prob.lmis) {
    const auto [M, max_eig] = evaluate_lmi(lmi, v);
    if (max_eig > -lmi.margin / 2.0)
      throw std::runtime_error("solution fails the LMI residual check: " +
                               lmi.name);
  }
}

Vector embed(const Vector& x, const SensorSet& sensors, int n_y) {
  Vector full = Vector::Zero(n_y);
  for (std::size_t i = 0; i < sensors.size(); ++i) full[sensors[i]] = x[i];
  return full;
}

DesignResult run_synthesis(const SynthesisHooks& hooks, double gamma,
                           const DesignOptions& opts) {
  const int n_y = hooks.n_y;
  DesignResult result(ObserverGain::zero(hooks.n_x, n_y),
                      PrecisionVector::unit(n_y));
  result.gamma = gamma;

  SensorSet all(n_y);
  std::iota(all.begin(), all.end(), 0);

  if (hooks.precheck && !hooks.precheck()) {
    result.feasible = false;
    return result;
  }

  // Reweighted-l1 iterations on the full sensor set.
  Vector rho = Vector::Ones(n_y);
  Vector beta;
  double epsilon = opts.epsilon_reweight;
  double prev_l1 = -1.0;
  SolveOutcome last{.report = {}, .prob = {}};
  for (int it = 0; it < opts.max_reweight_iters; ++it) {
    last = solve_weighted(hooks, all, rho, opts);
    IterationRecord rec;
    rec.rho = rho;
    rec.status = last.report.status;
    rec.objective = last.report.objective;
    if (last.report.status != SolveStatus::Optimal) {
      result.history.push_back(std::move(rec));
      if (it == 0) {
        result.feasible = false;
        if (opts.bisect_on_infeasible && hooks.gamma_feasible) {
          // Feasibility frontier: grow an upper bracket, then bisect.
          double lo = gamma, hi = gamma;
          bool found = false;
          while (hi < opts.bisect_gamma_max) {
            hi = std::min(opts.bisect_gamma_max, hi * 2.0);
            if (hooks.gamma_feasible(hi)) {
              found = true;
              break;
            }
            lo = hi;
          }
          if (found) {
            for (int s = 0; s < opts.bisect_steps; ++s) {
              const double mid = 0.5 * (lo + hi);
              if (hooks.gamma_feasible(mid))
                hi = mid;
              else
                lo = mid;
            }
            result.gamma_frontier = hi;
          }
        }
        return result;
      }
      break;  // keep the previous iterate
    }
    beta = last.prob.space.get_vector(last.report.v, "beta");
    rec.beta = beta;
    result.history.push_back(std::move(rec));

    if (it == 0) epsilon = opts.epsilon_reweight * std::max(1.0, beta.maxCoeff());
    const double l1 = beta.lpNorm<1>();
    if (prev_l1 >= 0.0 &&
        std::abs(l1 - prev_l1) < opts.convergence_tol * std::max(prev_l1, 1e-300))
      break;
    prev_l1 = l1;
    rho = reweight(beta, epsilon);
  }
  if (beta.size() == 0) {
    result.feasible = false;
    return result;
  }

  // Prune sensors with very small precision.
  const double thr =
      std::max(opts.prune_rel * beta.maxCoeff(), opts.prune_abs);
  SensorSet active;
  std::vector<std::pair<double, int>> pruned;  // (pre-prune beta, sensor)
  for (int i = 0; i < n_y; ++i) {
    if (beta[i] >= thr)
      active.push_back(i);
    else
      pruned.emplace_back(beta[i], i);
  }
  std::sort(pruned.begin(), pruned.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });

  // Refine: equal weights on the reduced set; restore sensors if needed.
  for (int attempt = 0; attempt <= n_y; ++attempt) {
    SolveOutcome ref =
        solve_weighted(hooks, active, Vector::Ones(active.size()), opts);
    IterationRecord rec;
    rec.rho = embed(Vector::Ones(active.size()), active, n_y);
    rec.status = ref.report.status;
    rec.objective = ref.report.objective;
    if (ref.report.status == SolveStatus::Optimal) {
      const Vector beta_r =
          ref.prob.space.get_vector(ref.report.v, "beta");
      rec.beta = embed(beta_r, active, n_y);
      result.history.push_back(std::move(rec));
      check_residuals(ref.prob, ref.report.v);

      const Matrix X2 = ref.prob.space.get_symmetric(ref.report.v, "X2");
      const Matrix Yr = ref.prob.space.get_full(ref.report.v, "Y");
      const ObserverGain Lr = recover_gain(X2, Yr);

      Matrix L = Matrix::Zero(hooks.n_x, n_y);
      std::vector<bool> mask(n_y, false);
      for (std::size_t i = 0; i < active.size(); ++i) {
        L.col(active[i]) = Lr.L.col(i);
        mask[active[i]] = true;
      }
      result.gain = ObserverGain(std::move(L));
      result.precision = PrecisionVector(embed(beta_r, active, n_y), mask);
      result.active_count = result.precision.active_count();
      result.refined = true;
      result.feasible = true;
      return result;
    }
    result.history.push_back(std::move(rec));
    if (pruned.empty())
      throw std::runtime_error(
          "refinement infeasible with every sensor restored");
    active.push_back(pruned.front().second);
    std::sort(active.begin(), active.end());
    pruned.erase(pruned.begin());
  }
  throw std::runtime_error("refinement failed");
}

}  // namespace

DesignResult design_structured(const StateSpaceModel& model,
                               const AffineUncertainty& unc, double gamma,
                               const DesignOptions& opts) {
  if (gamma <= 0.0) throw std::invalid_argument("gamma must be positive");
  LmiBounds bounds{opts.beta_min, opts.delta_min, 1e-7};

  auto reduced = [&](const SensorSet& sensors) {
    return StateSpaceModel(model.A, model.B_d, select_rows(model.C_y, sensors),
                           select_rows(model.D_d, sensors), model.C_z);
  };
  SynthesisHooks hooks;
  hooks.n_y = model.n_y();
  hooks.n_x = model.n_x();
  hooks.assemble = [&, bounds](const SensorSet& sensors) {
    return assemble_theorem1(reduced(sensors), unc, gamma, bounds);
  };
  hooks.gamma_feasible = [&, bounds](double g) {
    AssembledProblem prob = assemble_theorem1(model, unc, g, bounds);
    ConicProgram prog = compile(prob.space, Vector(), prob.lmis);
    return solve(prog, opts.solver).status == SolveStatus::Optimal;
  };
  return run_synthesis(hooks, gamma, opts);
}

DesignResult design_lft(const LftPlant& plant, double gamma,
                        const DesignOptions& opts) {
  if (gamma <= 0.0) throw std::invalid_argument("gamma must be positive");
  LmiBounds bounds{opts.beta_min, opts.delta_min, 1e-7};

  auto reduced = [&](const SensorSet& sensors) {
    return LftPlant(plant.A, plant.B_delta, plant.B_d, plant.C_delta,
                    plant.E_delta, plant.E_d, select_rows(plant.C_y, sensors),
                    select_rows(plant.D_delta, sensors),
                    select_rows(plant.D_d, sensors), plant.C_z,
                    plant.delta_structure);
  };
  SynthesisHooks hooks;
  hooks.n_y = plant.n_y();
  hooks.n_x = plant.n_x();
  hooks.assemble = [&, bounds](const SensorSet& sensors) {
    return assemble_theorem2(reduced(sensors), gamma, bounds);
  };
  // The small-gain inequality involves neither beta nor Y; check it once.
  hooks.precheck = [&, bounds]() {
    AssembledProblem prob = assemble_theorem2(plant, gamma, bounds);
    std::vector<AffineMatrixInequality> subset = {prob.lmis[0], prob.lmis[2]};
    ConicProgram prog = compile(prob.space, Vector(), subset);
    return solve(prog, opts.solver).status == SolveStatus::Optimal;
  };
  hooks.gamma_feasible = [&, bounds](double g) {
    AssembledProblem prob = assemble_theorem2(plant, g, bounds);
    ConicProgram prog = compile(prob.space, Vector(), prob.lmis);
    return solve(prog, opts.solver).status == SolveStatus::Optimal;
  };
  return run_synthesis(hooks, gamma, opts);
}

}  // namespace sparseobs
