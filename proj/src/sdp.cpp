#include "sparseobs/sdp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace sparseobs {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
const double kSqrt2 = std::sqrt(2.0);
}  // namespace

Vector svec(const Matrix& A) {
  if (A.rows() != A.cols()) throw std::invalid_argument("svec: not square");
  const int n = static_cast<int>(A.rows());
  Vector s(n * (n + 1) / 2);
  int k = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= j; ++i)
      s[k++] = (i == j) ? A(i, j) : kSqrt2 * A(i, j);
  return s;
}

Matrix unsvec(const Vector& s, int n) {
  if (s.size() != n * (n + 1) / 2)
    throw std::invalid_argument("unsvec: length mismatch");
  Matrix A(n, n);
  int k = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= j; ++i) {
      const double x = (i == j) ? s[k] : s[k] / kSqrt2;
      A(i, j) = x;
      A(j, i) = x;
      ++k;
    }
  return A;
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::NumericalTrouble: return "NumericalTrouble";
    case SolveStatus::IterationLimit: return "IterationLimit";
  }
  return "?";
}

ConicProgram compile(const DecisionVariableSpace& space, const Vector& rho,
                     const std::vector<AffineMatrixInequality>& lmis) {
  const int nv = space.dim();
  ConicProgram prog;
  prog.c = Vector::Zero(nv);
  if (rho.size() > 0) {
    const VarDescriptor& beta = space.var("beta");
    if (rho.size() != beta.size)
      throw std::invalid_argument("rho length must match beta");
    if (rho.minCoeff() <= 0.0)
      throw std::invalid_argument("rho must be elementwise positive");
    prog.c.segment(beta.offset, beta.size) = rho;
  }

  prog.lower = Vector::Zero(nv);
  prog.has_lower.assign(nv, false);
  for (const VarDescriptor& d : space.vars()) {
    if (d.kind == VarKind::NonnegVector || d.kind == VarKind::NonnegScalar) {
      for (int i = 0; i < d.size; ++i) {
        prog.has_lower[d.offset + i] = true;
        prog.lower[d.offset + i] = d.lower;
      }
    }
  }

  for (const AffineMatrixInequality& lmi : lmis) {
    if (static_cast<int>(lmi.coeffs.size()) != nv)
      throw std::invalid_argument("LMI built over a different variable space");
    ConicProgram::Cone cone;
    cone.name = lmi.name;
    cone.dim = lmi.dim;
    cone.b = svec(-lmi.A0 - lmi.margin * Matrix::Identity(lmi.dim, lmi.dim));
    cone.cols.resize(nv);
    for (int j = 0; j < nv; ++j) {
      for (const SymEntry& e : lmi.coeffs[j]) {
        // svec index of (row, col), row <= col, column-major triangle
        const int idx = e.col * (e.col + 1) / 2 + e.row;
        const double val = (e.row == e.col) ? -e.value : -kSqrt2 * e.value;
        cone.cols[j].emplace_back(idx, val);
      }
    }
    prog.cones.push_back(std::move(cone));
  }
  return prog;
}

void dump_program(const ConicProgram& prog, std::ostream& os) {
  os << "SDP " << prog.n_vars() << " " << prog.cones.size() << "\n";
  for (const auto& cone : prog.cones) {
    std::size_t nnz = 0;
    for (int k = 0; k < cone.b.size(); ++k)
      if (cone.b[k] != 0.0) ++nnz;
    for (const auto& col : cone.cols) nnz += col.size();
    os << "CONE " << cone.dim << " " << nnz << "\n";
    auto emit = [&](int idx, double val, int var) {
      // invert the svec index to (row, col)
      int col = 0;
      while ((col + 1) * (col + 2) / 2 <= idx) ++col;
      const int row = idx - col * (col + 1) / 2;
      os << row << " " << col << " " << val << " " << var << "\n";
    };
    for (int k = 0; k < cone.b.size(); ++k)
      if (cone.b[k] != 0.0) emit(k, cone.b[k], -1);
    for (int j = 0; j < prog.n_vars(); ++j)
      for (const auto& [idx, val] : cone.cols[j]) emit(idx, val, j);
  }
}

namespace {

// Dense working form of one cone: S(v) = F0 + sum_j v_j F_j must stay PD.
struct DenseCone {
  int dim;
  Matrix F0;
  std::vector<int> active;      // variable indices with nonzero F_j
  std::vector<Matrix> F;        // aligned with active
};

struct BarrierProblem {
  int nv = 0;
  Vector c;
  std::vector<DenseCone> cones;
  std::vector<int> bounded;  // indices with lower bounds
  Vector lower;
  Vector vscale;     // scaled variable u_j = vscale_j * v_j
  double nu = 0.0;   // total barrier parameter
  double box = 0.0;  // |v_j| <= box for every variable; keeps the feasible
                     // set bounded (the raw LMIs are positively homogeneous,
                     // so an analytic center need not exist without it)

  double barrier(const Vector& v, bool* ok) const {
    double phi = 0.0;
    *ok = true;
    for (int j : bounded) {
      const double g = v[j] - lower[j];
      if (g <= 0.0) {
        *ok = false;
        return kInf;
      }
      phi -= std::log(g);
    }
    for (int j = 0; j < nv; ++j) {
      const double lo = box + v[j], hi = box - v[j];
      if (lo <= 0.0 || hi <= 0.0) {
        *ok = false;
        return kInf;
      }
      phi -= std::log(lo) + std::log(hi);
    }
    for (const DenseCone& cone : cones) {
      Matrix S = cone.F0;
      for (std::size_t a = 0; a < cone.active.size(); ++a)
        S += v[cone.active[a]] * cone.F[a];
      Eigen::LLT<Matrix> llt(S);
      if (llt.info() != Eigen::Success) {
        *ok = false;
        return kInf;
      }
      phi -= 2.0 * Matrix(llt.matrixL()).diagonal().array().log().sum();
    }
    return phi;
  }

  // Gradient and Hessian of the barrier at a strictly feasible v.
  bool barrier_derivs(const Vector& v, Vector& g, Matrix& H) const {
    g.setZero(nv);
    H.setZero(nv, nv);
    for (int j : bounded) {
      const double d = v[j] - lower[j];
      if (d <= 0.0) return false;
      g[j] -= 1.0 / d;
      H(j, j) += 1.0 / (d * d);
    }
    for (int j = 0; j < nv; ++j) {
      const double lo = box + v[j], hi = box - v[j];
      if (lo <= 0.0 || hi <= 0.0) return false;
      g[j] += -1.0 / lo + 1.0 / hi;
      H(j, j) += 1.0 / (lo * lo) + 1.0 / (hi * hi);
    }
    for (const DenseCone& cone : cones) {
      Matrix S = cone.F0;
      for (std::size_t a = 0; a < cone.active.size(); ++a)
        S += v[cone.active[a]] * cone.F[a];
      Eigen::LLT<Matrix> llt(S);
      if (llt.info() != Eigen::Success) return false;
      const Matrix L = llt.matrixL();
      const auto solveL = L.triangularView<Eigen::Lower>();
      const int na = static_cast<int>(cone.active.size());
      std::vector<Matrix> B(na);
      for (int a = 0; a < na; ++a) {
        Matrix T = solveL.solve(cone.F[a]);
        B[a] = solveL.solve(T.transpose()).transpose();
        g[cone.active[a]] -= B[a].trace();
      }
      for (int a = 0; a < na; ++a)
        for (int b = a; b < na; ++b) {
          const double h = (B[a].array() * B[b].array()).sum();
          H(cone.active[a], cone.active[b]) += h;
          if (a != b) H(cone.active[b], cone.active[a]) += h;
        }
    }
    return true;
  }
};

BarrierProblem make_barrier(const ConicProgram& prog) {
  BarrierProblem bp;
  bp.nv = prog.n_vars();
  bp.c = prog.c;
  bp.lower = prog.lower;
  bp.box = 1e7;
  for (int j = 0; j < bp.nv; ++j)
    if (prog.has_lower[j]) bp.bounded.push_back(j);
  bp.nu = static_cast<double>(bp.bounded.size() + 2 * bp.nv);
  for (const auto& cone : prog.cones) {
    DenseCone dc;
    dc.dim = cone.dim;
    dc.F0 = unsvec(cone.b, cone.dim);
    for (int j = 0; j < bp.nv; ++j) {
      if (cone.cols[j].empty()) continue;
      Vector s = Vector::Zero(cone.b.size());
      for (const auto& [idx, val] : cone.cols[j]) s[idx] += val;
      dc.active.push_back(j);
      dc.F.push_back(unsvec(s, cone.dim));
    }
    bp.cones.push_back(std::move(dc));
    bp.nu += cone.dim;
  }

  // Ruiz equilibration: alternately rescale each cone by a diagonal
  // congruence (which preserves semidefiniteness) and substitute
  // u_j = vscale_j * v_j, so constraint rows and decision variables both end
  // up with unit-magnitude coefficients. Without this, problems whose data
  // spans many orders of magnitude stall the Newton iteration.
  bp.vscale = Vector::Ones(bp.nv);
  for (int sweep = 0; sweep < 5; ++sweep) {
    for (DenseCone& cone : bp.cones) {
      Vector r = cone.F0.cwiseAbs().rowwise().maxCoeff();
      for (const Matrix& Fj : cone.F)
        r = r.cwiseMax(Fj.cwiseAbs().rowwise().maxCoeff());
      Vector d(cone.dim);
      for (int i = 0; i < cone.dim; ++i)
        d[i] = r[i] > 0.0 ? 1.0 / std::sqrt(r[i]) : 1.0;
      cone.F0 = d.asDiagonal() * cone.F0 * d.asDiagonal();
      for (Matrix& Fj : cone.F) Fj = d.asDiagonal() * Fj * d.asDiagonal();
    }
    Vector m = Vector::Zero(bp.nv);
    for (const DenseCone& cone : bp.cones)
      for (std::size_t a = 0; a < cone.active.size(); ++a)
        m[cone.active[a]] =
            std::max(m[cone.active[a]], cone.F[a].cwiseAbs().maxCoeff());
    for (int j = 0; j < bp.nv; ++j)
      if (m[j] <= 0.0) m[j] = 1.0;
    for (DenseCone& cone : bp.cones)
      for (std::size_t a = 0; a < cone.active.size(); ++a)
        cone.F[a] /= m[cone.active[a]];
    for (int j = 0; j < bp.nv; ++j) {
      bp.c[j] /= m[j];
      bp.lower[j] *= m[j];
      bp.vscale[j] *= m[j];
    }
  }
  return bp;
}

struct CenterResult {
  bool converged = false;
  bool trouble = false;
  int steps = 0;
};

// Damped Newton minimization of t * c'v + barrier(v), in place.
CenterResult center(const BarrierProblem& bp, double t, Vector& v,
                    int max_steps, int* total_steps, int step_budget) {
  CenterResult res;
  Vector g(bp.nv);
  Matrix H(bp.nv, bp.nv);
  for (int it = 0; it < max_steps; ++it) {
    if (*total_steps >= step_budget) return res;
    if (!bp.barrier_derivs(v, g, H)) {
      res.trouble = true;
      return res;
    }
    g += t * bp.c;
    // The barrier Hessian can be numerically singular near the boundary, in
    // which case a plain factorization may return an ascent direction. Fall
    // back to escalating Tikhonov jitter until the direction is descent.
    Vector d = Eigen::LDLT<Matrix>(H).solve(-g);
    double lambda2 = d.allFinite() ? -g.dot(d) : -1.0;
    if (lambda2 < 0.0) {
      const double hscale = 1.0 + H.diagonal().cwiseAbs().maxCoeff();
      for (double mu = 1e-14 * hscale; mu <= 1e-2 * hscale; mu *= 10.0) {
        Matrix Hr = H;
        Hr.diagonal().array() += mu;
        d = Hr.ldlt().solve(-g);
        if (d.allFinite()) {
          lambda2 = -g.dot(d);
          if (lambda2 >= 0.0) break;
        }
      }
    }
    if (!d.allFinite() || lambda2 < 0.0) {
      res.trouble = true;
      return res;
    }
    // The Newton decrement is affine invariant; lambda^2 <= 1e-4 places the
    // iterate well inside the quadratic convergence region of the center.
    if (lambda2 <= 1e-4) {
      res.converged = true;
      return res;
    }

    bool ok = false;
    const double f0 = t * bp.c.dot(v) + bp.barrier(v, &ok);
    if (!ok) {
      res.trouble = true;
      return res;
    }
    // Damped Newton step: near-degenerate Hessians can make the direction
    // astronomically long, so start the backtracking at the self-concordant
    // damping 1/(1+lambda) instead of a full step.
    double alpha = std::min(1.0, 1.0 / (1.0 + std::sqrt(lambda2)));
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls) {
      Vector vn = v + alpha * d;
      bool okn = false;
      const double fn = t * bp.c.dot(vn) + bp.barrier(vn, &okn);
      if (okn && fn <= f0 + 0.25 * alpha * g.dot(d)) {
        v = vn;
        moved = true;
        break;
      }
      alpha *= 0.5;
    }
    ++(*total_steps);
    ++res.steps;
    if (!moved) {
      // Step stalled at line-search resolution; accept only if the Newton
      // decrement already places the iterate near the central path.
      res.converged = lambda2 >= 0.0 && lambda2 <= 1e-2;
      res.trouble = !res.converged;
      return res;
    }
  }
  // Step allowance exhausted without reaching the central path; the caller
  // decides whether budget remains for another round at the same t.
  return res;
}

}  // namespace

SolveReport solve(const ConicProgram& prog, const SolveSettings& settings) {
  const auto t_start = std::chrono::steady_clock::now();
  SolveReport rep;
  const int nv = prog.n_vars();
  BarrierProblem bp = make_barrier(prog);

  Vector v = Vector::Zero(nv);
  for (int j : bp.bounded) v[j] = bp.lower[j] + 1.0;

  // settings.max_iter caps the outer path-following stages; each centering
  // gets up to 100 Newton steps, with a generous global safety cap.
  int total_steps = 0;
  int stages = 0;
  const int budget = settings.max_iter * 100;

  // Phase I: minimize s subject to S_k(v) + s I >= 0; exits as soon as a
  // comfortably interior point is found.
  double scale = 1.0;
  for (const DenseCone& cone : bp.cones)
    scale = std::max(scale, cone.F0.cwiseAbs().maxCoeff());
  {
    double lam_min = kInf;
    for (const DenseCone& cone : bp.cones) {
      Matrix S = cone.F0;
      for (std::size_t a = 0; a < cone.active.size(); ++a)
        S += v[cone.active[a]] * cone.F[a];
      Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
      lam_min = std::min(lam_min, es.eigenvalues().minCoeff());
    }
    if (bp.cones.empty()) lam_min = 1.0;

    if (lam_min <= 1e-8 * scale) {
      // Extend with the slack variable.
      BarrierProblem ph1;
      ph1.nv = nv + 1;
      ph1.c = Vector::Zero(nv + 1);
      ph1.c[nv] = 1.0;
      ph1.lower = Vector::Zero(nv + 1);
      ph1.lower.head(nv) = bp.lower;
      ph1.bounded = bp.bounded;
      ph1.nu = static_cast<double>(ph1.bounded.size() + 2 * ph1.nv);
      for (const DenseCone& cone : bp.cones) {
        DenseCone dc = cone;
        dc.active.push_back(nv);
        dc.F.push_back(Matrix::Identity(cone.dim, cone.dim));
        ph1.cones.push_back(std::move(dc));
        ph1.nu += cone.dim;
      }
      Vector w(nv + 1);
      w.head(nv) = v;
      w[nv] = std::max(-lam_min * 1.5 + 0.1 * scale, 0.1 * scale);
      ph1.box = std::max(bp.box, 10.0 * w[nv]);

      const double exit_level = -1e-3 * scale;
      double t = 1.0 / std::max(1.0, std::abs(w[nv]));
      bool feasible_found = false;
      while (true) {
        CenterResult cr =
            center(ph1, t, w, 100, &total_steps, budget);
        if (w[nv] < exit_level) {
          feasible_found = true;
          break;
        }
        if (cr.trouble) {
          rep.status = SolveStatus::NumericalTrouble;
          return rep;
        }
        if (++stages > settings.max_iter || total_steps >= budget) {
          rep.status = SolveStatus::IterationLimit;
          return rep;
        }
        if (cr.converged) {
          if (ph1.nu / t <= std::max(settings.abs_tol, 1e-10 * scale)) {
            feasible_found = (w[nv] < -1e-12 * scale);
            break;
          }
          t *= 20.0;  // otherwise recenter at the same t
        }
      }
      if (!feasible_found) {
        rep.status = SolveStatus::Infeasible;
        rep.v = w.head(nv).cwiseQuotient(bp.vscale);
        rep.objective = bp.c.dot(w.head(nv));
        return rep;
      }
      v = w.head(nv);
    }
  }

  // Phase II: follow the central path of t c'v + barrier(v). The objective
  // is normalized so reweighting factors of any magnitude solve alike.
  const double c_scale = std::max(1.0, prog.c.cwiseAbs().maxCoeff());
  bp.c /= c_scale;
  if (bp.c.cwiseAbs().maxCoeff() > 0.0) {
    double t = std::max(1.0, bp.nu / std::max(1.0, std::abs(bp.c.dot(v))));
    while (true) {
      CenterResult cr = center(bp, t, v, 100, &total_steps, budget);
      if (cr.trouble) {
        rep.status = SolveStatus::NumericalTrouble;
        rep.v = v.cwiseQuotient(bp.vscale);
        return rep;
      }
      const double obj = c_scale * bp.c.dot(v);
      if (cr.converged) {
        const double gap_tol = std::max(
            settings.abs_tol, settings.rel_tol * (1.0 + std::abs(obj)));
        if (c_scale * bp.nu / t <= gap_tol) break;
      }
      if (++stages > settings.max_iter || total_steps >= budget) {
        rep.status = SolveStatus::IterationLimit;
        rep.v = v.cwiseQuotient(bp.vscale);
        rep.objective = obj;
        return rep;
      }
      if (cr.converged) t *= 20.0;  // otherwise recenter at the same t
    }
  }

  rep.status = SolveStatus::Optimal;
  rep.v = v.cwiseQuotient(bp.vscale);
  rep.objective = c_scale * bp.c.dot(v);
  rep.newton_steps = total_steps;
  double worst = 0.0;
  for (const DenseCone& cone : bp.cones) {
    Matrix S = cone.F0;
    for (std::size_t a = 0; a < cone.active.size(); ++a)
      S += v[cone.active[a]] * cone.F[a];
    Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
    worst = std::max(worst, -es.eigenvalues().minCoeff());
  }
  rep.primal_residual = worst;
  rep.solve_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return rep;
}

}  // namespace sparseobs
