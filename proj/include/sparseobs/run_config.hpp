#pragma once

#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <string>
#include <vector>

#include "sparseobs/smd.hpp"

namespace sparseobs::cli {

using json = nlohmann::json;

enum class ProblemKind { Structured, Lft, SmdStructured, SmdLft };

/// Parsed run configuration; one problem kind, matrices row-major with
/// explicit dimensions, all randomness from a single seed.
struct RunConfig {
  ProblemKind kind = ProblemKind::SmdStructured;
  SmdConfig smd;
  std::optional<StateSpaceModel> model;
  std::optional<AffineUncertainty> uncertainty;
  std::optional<LftPlant> plant;
  double gamma = 1.0;
  std::string sweep_param;  // "gamma" or "c0" (sweep command only)
  std::vector<double> sweep_values;
  DesignOptions options;
  int n_samples = 200;
  std::uint64_t seed = 1;
  std::string out_design = "design.json";
  std::string out_report = "report.json";
  std::string out_csv = "sweep.csv";
  std::string out_meta = "sweep_meta.json";
};

/// Throws std::invalid_argument with a field diagnostic on malformed input.
RunConfig parse_config(const json& j);
RunConfig load_config(const std::string& path);

json matrix_to_json(const Matrix& M);
Matrix matrix_from_json(const json& j, const std::string& field);

json design_to_json(const DesignResult& result,
                    const CertificationReport* cert);
/// Rebuilds gain/precision/gamma from a design document (for `verify`).
DesignResult design_from_json(const json& j);
json report_to_json(const CertificationReport& rep);

// Exit codes: 0 feasible and certified, 1 usage/parse error, 2 infeasible,
// 3 certification failure.
int run_design(const RunConfig& cfg, const std::string& out_dir, bool quiet);
int run_verify(const RunConfig& cfg, const std::string& design_path,
               const std::string& out_dir, bool quiet);
int run_sweep(const RunConfig& cfg, const std::string& out_dir, bool quiet);

/// CSV rows (header included), sorted by sweep value then sensor index.
std::string sweep_to_csv(const std::string& sweep_param,
                         const std::vector<SweepPoint>& table, int n_y);

}  // namespace sparseobs::cli
