#include <doctest.h>

#include <nlohmann/json.hpp>

#include "sparseobs/run_config.hpp"

using namespace sparseobs;
using namespace sparseobs::cli;
using nlohmann::json;

TEST_CASE("matrix json round trip is exact") {
  Matrix M(2, 3);
  M << 1.5, -2.25, 0.0, 4.0, 1e-17, -3.125;
  const Matrix back = matrix_from_json(matrix_to_json(M), "M");
  CHECK((back - M).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("matrix json rejects shape mismatch") {
  json j = {{"rows", 2}, {"cols", 2}, {"data", {1.0, 2.0, 3.0}}};
  CHECK_THROWS_AS(matrix_from_json(j, "M"), std::invalid_argument);
}

TEST_CASE("smd config parses defaults and scalar S_d") {
  json j = {{"kind", "smd-structured"},
            {"smd", {{"c0", 0.01}, {"c1", 0.02}, {"c2", 0.03}, {"S_d", 0.2}}},
            {"gamma", 0.5}};
  const RunConfig cfg = parse_config(j);
  CHECK(cfg.kind == ProblemKind::SmdStructured);
  CHECK(cfg.gamma == doctest::Approx(0.5));
  CHECK(cfg.smd.c0 == doctest::Approx(0.01));
  CHECK(cfg.smd.S_d(1) == doctest::Approx(0.2));
  CHECK(cfg.n_samples == 200);
  CHECK(cfg.seed == 1);
}

TEST_CASE("bad configs raise field diagnostics") {
  CHECK_THROWS_AS(parse_config(json{{"kind", "bogus"}}), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(json::object()), std::invalid_argument);
  json sweep_bad = {{"kind", "smd-structured"},
                    {"smd", json::object()},
                    {"sweep", {{"param", "mass"}, {"values", {1.0}}}}};
  CHECK_THROWS_AS(parse_config(sweep_bad), std::invalid_argument);
}

TEST_CASE("explicit structured model parses into a plant") {
  auto eye = [](int n) {
    json j;
    j["rows"] = n;
    j["cols"] = n;
    std::vector<double> d(n * n, 0.0);
    for (int i = 0; i < n; ++i) d[i * n + i] = 1.0;
    j["data"] = d;
    return j;
  };
  json m = {{"A", eye(2)}, {"B_d", eye(2)}, {"C_y", eye(2)},
            {"D_d", eye(2)}, {"C_z", eye(2)}};
  json u = {{"M1", eye(2)}, {"N1", eye(2)}, {"M2", eye(2)}, {"N2", eye(2)}};
  json j = {{"kind", "structured"}, {"model", m}, {"uncertainty", u}};
  const RunConfig cfg = parse_config(j);
  REQUIRE(cfg.model.has_value());
  CHECK(cfg.model->n_x() == 2);
  CHECK(cfg.uncertainty.has_value());
}

TEST_CASE("design document round trips through json") {
  Matrix L(2, 3);
  L << 1, 2, 3, 4, 5, 6;
  Vector beta(3);
  beta << 0.5, 0.0, 2.0;
  DesignResult res(ObserverGain(L),
                   PrecisionVector(beta, {true, false, true}));
  res.gamma = 0.75;
  res.feasible = true;
  res.active_count = 2;

  const json doc = design_to_json(res, nullptr);
  const DesignResult back = design_from_json(doc);
  CHECK((back.gain.L - L).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.precision.beta - beta).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.precision.active == std::vector<bool>{true, false, true});
  CHECK(back.gamma == doctest::Approx(0.75));
  CHECK(back.active_count == 2);
}

TEST_CASE("sweep csv has the exact header and NA rows for failures") {
  std::vector<SweepPoint> table(2);
  table[0].sweep_value = 1.0;
  table[0].solved = false;
  table[1].sweep_value = 0.5;
  table[1].solved = true;
  Vector beta(2);
  beta << 0.25, 0.0;
  DesignResult res(ObserverGain(Matrix::Zero(2, 2)),
                   PrecisionVector(beta, {true, false}));
  res.feasible = true;
  table[1].design = res;
  CertificationReport rep;
  rep.passed = true;
  rep.worst_norm = 0.5;
  table[1].cert = rep;

  const std::string csv = sweep_to_csv("gamma", table, 2);
  const std::string header =
      "sweep_param,sweep_value,sensor_index,active,beta,certified,worst_norm";
  REQUIRE(csv.rfind(header + "\n", 0) == 0);

  // Rows sorted by sweep value: the solved 0.5 point precedes the failed 1.0.
  const auto second_line = csv.substr(header.size() + 1);
  CHECK(second_line.rfind("gamma,0.5,0,1,0.25,1,0.5", 0) == 0);
  CHECK(csv.find("gamma,1,0,NA,NA,NA,NA") != std::string::npos);
  CHECK(csv.find("gamma,1,1,NA,NA,NA,NA") != std::string::npos);
}
