#include "sparseobs/run_config.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>

namespace sparseobs::cli {

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& why) {
  throw std::invalid_argument("config field '" + field + "': " + why);
}

double get_number(const json& j, const std::string& field, double fallback,
                  bool required = false) {
  if (!j.contains(field)) {
    if (required) fail(field, "missing");
    return fallback;
  }
  if (!j.at(field).is_number()) fail(field, "expected a number");
  return j.at(field).get<double>();
}

}  // namespace

json matrix_to_json(const Matrix& M) {
  json j;
  j["rows"] = M.rows();
  j["cols"] = M.cols();
  std::vector<double> data;
  data.reserve(M.size());
  for (Eigen::Index r = 0; r < M.rows(); ++r)
    for (Eigen::Index c = 0; c < M.cols(); ++c) data.push_back(M(r, c));
  j["data"] = data;
  return j;
}

Matrix matrix_from_json(const json& j, const std::string& field) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") ||
      !j.contains("data"))
    fail(field, "expected {rows, cols, data}");
  const int rows = j.at("rows").get<int>();
  const int cols = j.at("cols").get<int>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (rows < 0 || cols < 0 ||
      static_cast<int>(data.size()) != rows * cols)
    fail(field, "data length does not match rows*cols");
  Matrix M(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) M(r, c) = data[r * cols + c];
  return M;
}

namespace {

Vector parse_sd(const json& j) {
  if (!j.contains("S_d")) return Vector::Ones(3);
  const auto& sd = j.at("S_d");
  if (sd.is_number()) return sd.get<double>() * Vector::Ones(3);
  if (sd.is_array()) {
    const auto v = sd.get<std::vector<double>>();
    if (v.size() != 3) fail("smd.S_d", "expected a scalar or 3 values");
    return Eigen::Map<const Vector>(v.data(), 3);
  }
  fail("smd.S_d", "expected a scalar or 3 values");
}

DesignOptions parse_options(const json& j) {
  DesignOptions opts;
  if (!j.contains("options")) return opts;
  const json& o = j.at("options");
  opts.epsilon_reweight =
      get_number(o, "epsilon_reweight", opts.epsilon_reweight);
  opts.max_reweight_iters = static_cast<int>(
      get_number(o, "max_reweight_iters", opts.max_reweight_iters));
  opts.convergence_tol = get_number(o, "convergence_tol", opts.convergence_tol);
  opts.prune_rel = get_number(o, "prune_rel", opts.prune_rel);
  opts.prune_abs = get_number(o, "prune_abs", opts.prune_abs);
  opts.beta_min = get_number(o, "beta_min", opts.beta_min);
  opts.delta_min = get_number(o, "delta_min", opts.delta_min);
  opts.solver.abs_tol = get_number(o, "abs_tol", opts.solver.abs_tol);
  opts.solver.rel_tol = get_number(o, "rel_tol", opts.solver.rel_tol);
  opts.solver.max_iter =
      static_cast<int>(get_number(o, "max_iter", opts.solver.max_iter));
  return opts;
}

}  // namespace

RunConfig parse_config(const json& j) {
  RunConfig cfg;
  if (!j.contains("kind")) fail("kind", "missing");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "structured")
    cfg.kind = ProblemKind::Structured;
  else if (kind == "lft")
    cfg.kind = ProblemKind::Lft;
  else if (kind == "smd-structured")
    cfg.kind = ProblemKind::SmdStructured;
  else if (kind == "smd-lft")
    cfg.kind = ProblemKind::SmdLft;
  else
    fail("kind", "unknown problem kind '" + kind + "'");

  if (cfg.kind == ProblemKind::SmdStructured || cfg.kind == ProblemKind::SmdLft) {
    if (!j.contains("smd")) fail("smd", "missing");
    const json& s = j.at("smd");
    cfg.smd.S_d = parse_sd(s);
    cfg.smd.c0 = get_number(s, "c0", 0.0);
    cfg.smd.c1 = get_number(s, "c1", 0.0);
    cfg.smd.c2 = get_number(s, "c2", 0.0);
  } else if (cfg.kind == ProblemKind::Structured) {
    if (!j.contains("model")) fail("model", "missing");
    const json& m = j.at("model");
    cfg.model.emplace(matrix_from_json(m.at("A"), "model.A"),
                      matrix_from_json(m.at("B_d"), "model.B_d"),
                      matrix_from_json(m.at("C_y"), "model.C_y"),
                      matrix_from_json(m.at("D_d"), "model.D_d"),
                      matrix_from_json(m.at("C_z"), "model.C_z"));
    if (!j.contains("uncertainty")) fail("uncertainty", "missing");
    const json& u = j.at("uncertainty");
    cfg.uncertainty.emplace(matrix_from_json(u.at("M1"), "uncertainty.M1"),
                            matrix_from_json(u.at("N1"), "uncertainty.N1"),
                            matrix_from_json(u.at("M2"), "uncertainty.M2"),
                            matrix_from_json(u.at("N2"), "uncertainty.N2"));
  } else {
    if (!j.contains("plant")) fail("plant", "missing");
    const json& p = j.at("plant");
    const std::string structure =
        p.value("delta_structure", std::string("full-block"));
    cfg.plant.emplace(
        matrix_from_json(p.at("A"), "plant.A"),
        matrix_from_json(p.at("B_delta"), "plant.B_delta"),
        matrix_from_json(p.at("B_d"), "plant.B_d"),
        matrix_from_json(p.at("C_delta"), "plant.C_delta"),
        matrix_from_json(p.at("E_delta"), "plant.E_delta"),
        matrix_from_json(p.at("E_d"), "plant.E_d"),
        matrix_from_json(p.at("C_y"), "plant.C_y"),
        matrix_from_json(p.at("D_delta"), "plant.D_delta"),
        matrix_from_json(p.at("D_d"), "plant.D_d"),
        matrix_from_json(p.at("C_z"), "plant.C_z"),
        structure == "diagonal" ? DeltaStructure::Diagonal
                                : DeltaStructure::FullBlock);
  }

  cfg.gamma = get_number(j, "gamma", 1.0);
  cfg.smd.gamma = cfg.gamma;
  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    cfg.sweep_param = s.value("param", std::string());
    if (cfg.sweep_param != "gamma" && cfg.sweep_param != "c0")
      fail("sweep.param", "expected 'gamma' or 'c0'");
    if (!s.contains("values") || !s.at("values").is_array() ||
        s.at("values").empty())
      fail("sweep.values", "expected a nonempty array");
    cfg.sweep_values = s.at("values").get<std::vector<double>>();
  }

  cfg.options = parse_options(j);
  if (j.contains("verification")) {
    const json& v = j.at("verification");
    cfg.n_samples = static_cast<int>(get_number(v, "n_samples", 200));
    if (!v.contains("seed")) fail("verification.seed", "missing");
    cfg.seed = v.at("seed").get<std::uint64_t>();
  }
  cfg.options.rng_seed = cfg.seed;
  if (j.contains("output")) {
    const json& o = j.at("output");
    cfg.out_design = o.value("design", cfg.out_design);
    cfg.out_report = o.value("report", cfg.out_report);
    cfg.out_csv = o.value("csv", cfg.out_csv);
    cfg.out_meta = o.value("meta", cfg.out_meta);
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config parse error: ") + e.what());
  }
  return parse_config(j);
}

json design_to_json(const DesignResult& result,
                    const CertificationReport* cert) {
  json j;
  j["gamma"] = result.gamma;
  j["feasible"] = result.feasible;
  j["refined"] = result.refined;
  j["active_count"] = result.active_count;
  std::vector<int> active;
  for (int i = 0; i < result.precision.size(); ++i)
    if (result.precision.active[i]) active.push_back(i);
  j["active_sensors"] = active;
  j["beta"] = std::vector<double>(
      result.precision.beta.data(),
      result.precision.beta.data() + result.precision.beta.size());
  j["gain"] = matrix_to_json(result.gain.L);
  if (result.gamma_frontier) j["gamma_frontier"] = *result.gamma_frontier;
  json iters = json::array();
  for (const auto& it : result.history) {
    json rec;
    rec["rho"] = std::vector<double>(it.rho.data(), it.rho.data() + it.rho.size());
    rec["beta"] =
        std::vector<double>(it.beta.data(), it.beta.data() + it.beta.size());
    rec["objective"] = it.objective;
    rec["status"] = to_string(it.status);
    iters.push_back(std::move(rec));
  }
  j["iterations"] = std::move(iters);
  if (cert) j["certification"] = report_to_json(*cert);
  return j;
}

DesignResult design_from_json(const json& j) {
  const Matrix L = matrix_from_json(j.at("gain"), "gain");
  const auto beta = j.at("beta").get<std::vector<double>>();
  const auto active = j.at("active_sensors").get<std::vector<int>>();
  if (static_cast<Eigen::Index>(beta.size()) != L.cols())
    fail("beta", "length must match gain columns");
  Vector b = Eigen::Map<const Vector>(beta.data(), beta.size());
  std::vector<bool> mask(beta.size(), false);
  for (int i : active) {
    if (i < 0 || i >= static_cast<int>(mask.size()))
      fail("active_sensors", "index out of range");
    mask[i] = true;
  }
  DesignResult result(ObserverGain(L), PrecisionVector(b, mask));
  result.gamma = j.at("gamma").get<double>();
  result.feasible = j.value("feasible", true);
  result.refined = j.value("refined", true);
  result.active_count = result.precision.active_count();
  return result;
}

json report_to_json(const CertificationReport& rep) {
  json j;
  j["n_samples"] = rep.n_samples;
  j["worst_norm"] = rep.worst_norm;
  j["worst_sample_id"] = rep.worst_sample_id;
  j["nominal_norm"] = rep.nominal_norm;
  j["passed"] = rep.passed;
  if (rep.small_gain_norm) j["small_gain_norm"] = *rep.small_gain_norm;
  json v = json::array();
  for (const auto& [id, norm] : rep.violations)
    v.push_back({{"sample_id", id}, {"norm", norm}});
  j["violations"] = std::move(v);
  return j;
}

namespace {

void write_file(const std::string& dir, const std::string& name,
                const std::string& text) {
  const std::filesystem::path p = std::filesystem::path(dir) / name;
  std::filesystem::create_directories(p.parent_path().empty()
                                          ? std::filesystem::path(".")
                                          : p.parent_path());
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

struct Designed {
  DesignResult result;
  std::optional<CertificationReport> cert;
  int n_y;
};

Designed design_and_certify(const RunConfig& cfg) {
  switch (cfg.kind) {
    case ProblemKind::SmdStructured: {
      const StateSpaceModel model = smd_nominal(cfg.smd.S_d);
      const AffineUncertainty unc =
          smd_affine(cfg.smd.c0, cfg.smd.c1, cfg.smd.c2);
      DesignResult res = design_structured(model, unc, cfg.gamma, cfg.options);
      std::optional<CertificationReport> cert;
      if (res.feasible)
        cert = verify_structured(model, unc, res, cfg.gamma, cfg.n_samples,
                                 cfg.seed);
      return {std::move(res), std::move(cert), model.n_y()};
    }
    case ProblemKind::SmdLft: {
      const LftPlant plant = smd_lft(cfg.smd.c0, cfg.smd.c1, cfg.smd.S_d);
      DesignResult res = design_lft(plant, cfg.gamma, cfg.options);
      std::optional<CertificationReport> cert;
      if (res.feasible)
        cert = verify_lft(plant, res, cfg.gamma, cfg.n_samples, cfg.seed);
      return {std::move(res), std::move(cert), plant.n_y()};
    }
    case ProblemKind::Structured: {
      DesignResult res =
          design_structured(*cfg.model, *cfg.uncertainty, cfg.gamma, cfg.options);
      std::optional<CertificationReport> cert;
      if (res.feasible)
        cert = verify_structured(*cfg.model, *cfg.uncertainty, res, cfg.gamma,
                                 cfg.n_samples, cfg.seed);
      return {std::move(res), std::move(cert), cfg.model->n_y()};
    }
    case ProblemKind::Lft: {
      DesignResult res = design_lft(*cfg.plant, cfg.gamma, cfg.options);
      std::optional<CertificationReport> cert;
      if (res.feasible)
        cert = verify_lft(*cfg.plant, res, cfg.gamma, cfg.n_samples, cfg.seed);
      return {std::move(res), std::move(cert), cfg.plant->n_y()};
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace

int run_design(const RunConfig& cfg, const std::string& out_dir, bool quiet) {
  const Designed d = design_and_certify(cfg);
  const json doc = design_to_json(d.result, d.cert ? &*d.cert : nullptr);
  write_file(out_dir, cfg.out_design, doc.dump(2) + "\n");
  if (!quiet) {
    if (d.result.feasible)
      std::cout << "design: " << d.result.active_count
                << " active sensors, certification "
                << (d.cert && d.cert->passed ? "passed" : "FAILED") << "\n";
    else
      std::cout << "design: infeasible at gamma = " << cfg.gamma
                << (d.result.gamma_frontier
                        ? " (frontier near " +
                              std::to_string(*d.result.gamma_frontier) + ")"
                        : "")
                << "\n";
  }
  if (!d.result.feasible) return 2;
  return (d.cert && d.cert->passed) ? 0 : 3;
}

int run_verify(const RunConfig& cfg, const std::string& design_path,
               const std::string& out_dir, bool quiet) {
  std::ifstream in(design_path);
  if (!in) throw std::invalid_argument("cannot open design file: " + design_path);
  json dj;
  try {
    dj = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("design parse error: ") + e.what());
  }
  DesignResult result = design_from_json(dj);

  CertificationReport rep;
  switch (cfg.kind) {
    case ProblemKind::SmdStructured: {
      const StateSpaceModel model = smd_nominal(cfg.smd.S_d);
      const AffineUncertainty unc =
          smd_affine(cfg.smd.c0, cfg.smd.c1, cfg.smd.c2);
      if (result.gain.L.cols() != model.n_y() ||
          result.gain.L.rows() != model.n_x())
        throw std::invalid_argument("design/plant dimension mismatch");
      rep = verify_structured(model, unc, result, result.gamma, cfg.n_samples,
                              cfg.seed);
      break;
    }
    case ProblemKind::Structured: {
      if (result.gain.L.cols() != cfg.model->n_y() ||
          result.gain.L.rows() != cfg.model->n_x())
        throw std::invalid_argument("design/plant dimension mismatch");
      rep = verify_structured(*cfg.model, *cfg.uncertainty, result,
                              result.gamma, cfg.n_samples, cfg.seed);
      break;
    }
    case ProblemKind::SmdLft: {
      const LftPlant plant = smd_lft(cfg.smd.c0, cfg.smd.c1, cfg.smd.S_d);
      if (result.gain.L.cols() != plant.n_y() ||
          result.gain.L.rows() != plant.n_x())
        throw std::invalid_argument("design/plant dimension mismatch");
      rep = verify_lft(plant, result, result.gamma, cfg.n_samples, cfg.seed);
      break;
    }
    case ProblemKind::Lft: {
      if (result.gain.L.cols() != cfg.plant->n_y() ||
          result.gain.L.rows() != cfg.plant->n_x())
        throw std::invalid_argument("design/plant dimension mismatch");
      rep = verify_lft(*cfg.plant, result, result.gamma, cfg.n_samples,
                       cfg.seed);
      break;
    }
  }
  write_file(out_dir, cfg.out_report, report_to_json(rep).dump(2) + "\n");
  if (!quiet)
    std::cout << "verify: worst norm " << rep.worst_norm << " over "
              << rep.n_samples << " samples, "
              << (rep.passed ? "passed" : "FAILED") << "\n";
  return rep.passed ? 0 : 3;
}

std::string sweep_to_csv(const std::string& sweep_param,
                         const std::vector<SweepPoint>& table, int n_y) {
  std::vector<const SweepPoint*> sorted;
  for (const auto& pt : table) sorted.push_back(&pt);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const SweepPoint* a, const SweepPoint* b) {
                     return a->sweep_value < b->sweep_value;
                   });
  std::ostringstream os;
  os << "sweep_param,sweep_value,sensor_index,active,beta,certified,worst_norm\n";
  os.precision(17);
  for (const SweepPoint* pt : sorted) {
    for (int i = 0; i < n_y; ++i) {
      os << sweep_param << "," << pt->sweep_value << "," << i << ",";
      if (!pt->solved || !pt->design || !pt->design->feasible) {
        os << "NA,NA,NA,NA\n";
        continue;
      }
      const bool active = pt->design->precision.active[i];
      os << (active ? 1 : 0) << "," << pt->design->precision.beta[i] << ","
         << (pt->cert && pt->cert->passed ? 1 : 0) << ","
         << (pt->cert ? pt->cert->worst_norm : 0.0) << "\n";
    }
  }
  return os.str();
}

int run_sweep(const RunConfig& cfg, const std::string& out_dir, bool quiet) {
  if (cfg.sweep_param.empty())
    throw std::invalid_argument("sweep requires a 'sweep' config section");
  if (cfg.kind != ProblemKind::SmdStructured && cfg.kind != ProblemKind::SmdLft)
    throw std::invalid_argument("sweep supports the smd problem kinds");
  const SmdKind kind = cfg.kind == ProblemKind::SmdStructured
                           ? SmdKind::Structured
                           : SmdKind::Lft;
  SweepSettings settings;
  settings.options = cfg.options;
  settings.n_samples = cfg.n_samples;
  settings.seed = cfg.seed;

  const std::vector<SweepPoint> table =
      cfg.sweep_param == "gamma"
          ? sweep_gamma(kind, cfg.smd, cfg.sweep_values, settings)
          : sweep_uncertainty(kind, cfg.smd, cfg.sweep_values, settings);

  const int n_y = 6;
  write_file(out_dir, cfg.out_csv, sweep_to_csv(cfg.sweep_param, table, n_y));

  json meta = json::array();
  bool all_ok = true;
  for (const auto& pt : table) {
    json p;
    p["sweep_param"] = cfg.sweep_param;
    p["sweep_value"] = pt.sweep_value;
    p["solved"] = pt.solved;
    if (pt.design) {
      p["feasible"] = pt.design->feasible;
      p["active_count"] = pt.design->active_count;
      p["iterations"] = pt.design->history.size();
      if (pt.design->gamma_frontier)
        p["gamma_frontier"] = *pt.design->gamma_frontier;
    }
    if (pt.cert) p["certification"] = report_to_json(*pt.cert);
    all_ok = all_ok && pt.solved && pt.cert && pt.cert->passed;
    meta.push_back(std::move(p));
  }
  write_file(out_dir, cfg.out_meta, json{{"points", meta}}.dump(2) + "\n");
  if (!quiet)
    std::cout << "sweep: " << table.size() << " points written to "
              << cfg.out_csv << "\n";
  return all_ok ? 0 : (std::any_of(table.begin(), table.end(),
                                   [](const SweepPoint& pt) {
                                     return pt.design && !pt.design->feasible;
                                   })
                           ? 2
                           : 3);
}

}  // namespace sparseobs::cli
