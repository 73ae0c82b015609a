#include <random>

#include "doctest.h"
#include "sparseobs/lmi.hpp"
#include "sparseobs/smd.hpp"

using namespace sparseobs;

TEST_CASE("decision variable space packs and unpacks consistently") {
  DecisionVariableSpace space;
  space.add_symmetric("X", 3);
  space.add_full("Y", 2, 4);
  space.add_nonneg_vector("beta", 5, 1e-8);
  space.add_nonneg_scalar("delta", 1e-9);
  CHECK(space.dim() == 6 + 8 + 5 + 1);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  Matrix X(3, 3);
  for (int i = 0; i < 9; ++i) X(i / 3, i % 3) = g(rng);
  X = symmetrize(X);
  Matrix Y(2, 4);
  for (int i = 0; i < 8; ++i) Y(i / 4, i % 4) = g(rng);
  Vector beta(5);
  for (int i = 0; i < 5; ++i) beta[i] = std::abs(g(rng));

  Vector v = Vector::Zero(space.dim());
  space.set_symmetric(v, "X", X);
  space.set_full(v, "Y", Y);
  space.set_vector(v, "beta", beta);
  space.set_scalar(v, "delta", 0.25);
  CHECK((space.get_symmetric(v, "X") - X).cwiseAbs().maxCoeff() == 0.0);
  CHECK((space.get_full(v, "Y") - Y).cwiseAbs().maxCoeff() == 0.0);
  CHECK((space.get_vector(v, "beta") - beta).cwiseAbs().maxCoeff() == 0.0);
  CHECK(space.get_scalar(v, "delta") == 0.25);
  CHECK_THROWS(space.add_symmetric("X", 2));
}

TEST_CASE("theorem 1 block bookkeeping on the benchmark sizes") {
  const StateSpaceModel model = smd_nominal(Vector::Ones(3));
  const AffineUncertainty unc = smd_affine(0.01, 0.02, 0.03);
  const AssembledProblem prob = assemble_theorem1(model, unc, 1.0);
  CHECK(prob.space.dim() == 21 + 21 + 36 + 6 + 1 + 1);
  REQUIRE(prob.lmis.size() == 3);
  // 2 n_x + (n_d + n_y) + q1 + q2 = 12 + 9 + 3 + 3.
  CHECK(prob.lmis[0].dim == 27);
  CHECK(prob.lmis[1].dim == 6);
  CHECK(prob.lmis[2].dim == 6);

  // v = 0 evaluates to the constant term; the beta block contributes nothing
  const Vector v0 = Vector::Zero(prob.space.dim());
  const auto [M0, eig0] = evaluate_lmi(prob.lmis[0], v0);
  CHECK((M0 - prob.lmis[0].A0).cwiseAbs().maxCoeff() == 0.0);
  CHECK(M0.block(15, 15, 6, 6).cwiseAbs().maxCoeff() == 0.0);
  // the d-block carries -gamma^2 I
  CHECK(M0.block(12, 12, 3, 3).diagonal().maxCoeff() == doctest::Approx(-1.0));
}

TEST_CASE("affinity and symmetry of assembled inequalities") {
  const StateSpaceModel model = smd_nominal(Vector::Ones(3));
  const AffineUncertainty unc = smd_affine(0.1, 0.1, 0.1);
  const AssembledProblem prob = assemble_theorem1(model, unc, 0.5);
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> ua(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    Vector u(prob.space.dim()), v(prob.space.dim());
    for (int i = 0; i < prob.space.dim(); ++i) {
      u[i] = g(rng);
      v[i] = g(rng);
    }
    const double a = ua(rng);
    for (const auto& lmi : prob.lmis) {
      const Matrix mix = lmi.evaluate(a * u + (1 - a) * v);
      const Matrix combo = a * lmi.evaluate(u) + (1 - a) * lmi.evaluate(v);
      CHECK((mix - combo).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((mix - mix.transpose()).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("theorem 2 small-gain inequality involves only X1") {
  const LftPlant plant = smd_lft(0.1, 0.1, 0.2 * Vector::Ones(3));
  const AssembledProblem prob = assemble_theorem2(plant, 0.2);
  REQUIRE(prob.lmis.size() == 4);
  const AffineMatrixInequality& lmi1 = prob.lmis[0];
  const VarDescriptor& Y = prob.space.var("Y");
  const VarDescriptor& beta = prob.space.var("beta");
  const VarDescriptor& X2 = prob.space.var("X2");
  for (const auto& d : {Y, beta, X2})
    for (int j = d.offset; j < d.offset + d.size; ++j)
      CHECK(lmi1.coeffs[j].empty());

  // E_delta = 0 and E_d = 0: trailing 2x2 block of the constant is -I
  const int nx = plant.n_x(), nw = plant.n_w(), nd = plant.n_d();
  const Matrix tail = lmi1.A0.block(nx, nx, nw + nd, nw + nd);
  CHECK((tail + Matrix::Identity(nw + nd, nw + nd)).cwiseAbs().maxCoeff() ==
        0.0);
}

TEST_CASE("evaluate_lmi on a single negated symmetric variable") {
  DecisionVariableSpace space;
  space.add_symmetric("X", 3);
  const AffineMatrixInequality lmi = build_affine_lmi(
      space, "negX", [&](const Vector& v) {
        return Matrix(-space.get_symmetric(v, "X"));
      });
  Vector v = Vector::Zero(space.dim());
  space.set_symmetric(v, "X", Matrix::Identity(3, 3));
  const auto [M, eig] = evaluate_lmi(lmi, v);
  CHECK(eig == doctest::Approx(-1.0));
  CHECK_THROWS(evaluate_lmi(lmi, Vector::Zero(2)));
}

TEST_CASE("robust bounded-real reduces to bounded-real at zero factors") {
  const StateSpaceModel model = smd_nominal(Vector::Ones(3));
  const AffineUncertainty zero_unc(Matrix::Zero(6, 3), Matrix::Zero(6, 6),
                                   Matrix::Zero(6, 3), Matrix::Zero(3, 3));
  const ErrorSystem err = build_structured_error_system(
      model, zero_unc, ObserverGain::zero(6, 6), PrecisionVector::unit(6));
  const AssembledProblem rob = assemble_robust_bounded_real(err, 2.0);
  const AssembledProblem plain = assemble_bounded_real(
      err.A_err, err.B_err, err.C_err,
      Matrix::Zero(err.C_err.rows(), err.B_err.cols()), 2.0);

  // With M = N = 0 the delta blocks decouple: the leading principal block
  // of the robust constant term equals the plain bounded-real constant.
  const int m = plain.lmis[0].dim;
  CHECK((rob.lmis[0].A0.topLeftCorner(m, m) - plain.lmis[0].A0)
            .cwiseAbs()
            .maxCoeff() == 0.0);
}

TEST_CASE("gamma validation") {
  const StateSpaceModel model = smd_nominal(Vector::Ones(3));
  const AffineUncertainty unc = smd_affine(0, 0, 0);
  CHECK_THROWS(assemble_theorem1(model, unc, 0.0));
  CHECK_THROWS(assemble_theorem1(model, unc, -1.0));
}
