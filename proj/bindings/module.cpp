#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sparseobs/analysis.hpp"
#include "sparseobs/design.hpp"
#include "sparseobs/smd.hpp"
#include "sparseobs/system_model.hpp"

namespace py = pybind11;
using namespace sparseobs;

PYBIND11_MODULE(_sparseobs, m) {
  m.doc() = "Sparse robust observer synthesis and certification";

  py::class_<StateSpaceModel>(m, "StateSpaceModel")
      .def(py::init<Matrix, Matrix, Matrix, Matrix, Matrix>(), py::arg("A"),
           py::arg("B_d"), py::arg("C_y"), py::arg("D_d"), py::arg("C_z"))
      .def_readonly("A", &StateSpaceModel::A)
      .def_readonly("B_d", &StateSpaceModel::B_d)
      .def_readonly("C_y", &StateSpaceModel::C_y)
      .def_readonly("D_d", &StateSpaceModel::D_d)
      .def_readonly("C_z", &StateSpaceModel::C_z)
      .def("n_x", &StateSpaceModel::n_x)
      .def("n_d", &StateSpaceModel::n_d)
      .def("n_y", &StateSpaceModel::n_y)
      .def("n_z", &StateSpaceModel::n_z);

  py::class_<AffineUncertainty>(m, "AffineUncertainty")
      .def(py::init<Matrix, Matrix, Matrix, Matrix>(), py::arg("M1"),
           py::arg("N1"), py::arg("M2"), py::arg("N2"))
      .def_readonly("M1", &AffineUncertainty::M1)
      .def_readonly("N1", &AffineUncertainty::N1)
      .def_readonly("M2", &AffineUncertainty::M2)
      .def_readonly("N2", &AffineUncertainty::N2);

  py::enum_<DeltaStructure>(m, "DeltaStructure")
      .value("FULL_BLOCK", DeltaStructure::FullBlock)
      .value("DIAGONAL", DeltaStructure::Diagonal);

  py::class_<LftPlant>(m, "LftPlant")
      .def(py::init<Matrix, Matrix, Matrix, Matrix, Matrix, Matrix, Matrix,
                    Matrix, Matrix, Matrix, DeltaStructure>(),
           py::arg("A"), py::arg("B_delta"), py::arg("B_d"),
           py::arg("C_delta"), py::arg("E_delta"), py::arg("E_d"),
           py::arg("C_y"), py::arg("D_delta"), py::arg("D_d"), py::arg("C_z"),
           py::arg("delta_structure") = DeltaStructure::FullBlock)
      .def_readonly("A", &LftPlant::A)
      .def_readonly("B_delta", &LftPlant::B_delta)
      .def_readonly("B_d", &LftPlant::B_d)
      .def_readonly("C_delta", &LftPlant::C_delta)
      .def_readonly("E_delta", &LftPlant::E_delta)
      .def_readonly("E_d", &LftPlant::E_d)
      .def_readonly("C_y", &LftPlant::C_y)
      .def_readonly("D_delta", &LftPlant::D_delta)
      .def_readonly("D_d", &LftPlant::D_d)
      .def_readonly("C_z", &LftPlant::C_z)
      .def("nominal", &LftPlant::nominal)
      .def("n_x", &LftPlant::n_x)
      .def("n_w", &LftPlant::n_w)
      .def("n_y", &LftPlant::n_y);

  py::class_<PrecisionVector>(m, "PrecisionVector")
      .def(py::init<Vector>(), py::arg("beta"))
      .def_readonly("beta", &PrecisionVector::beta)
      .def_readonly("active", &PrecisionVector::active)
      .def("active_count", &PrecisionVector::active_count)
      .def("noise_scaling", &PrecisionVector::noise_scaling)
      .def_static("unit", &PrecisionVector::unit, py::arg("n_y"));

  py::class_<ObserverGain>(m, "ObserverGain")
      .def(py::init<Matrix>(), py::arg("L"))
      .def_readonly("L", &ObserverGain::L);

  py::class_<DesignOptions>(m, "DesignOptions")
      .def(py::init<>())
      .def_readwrite("epsilon_reweight", &DesignOptions::epsilon_reweight)
      .def_readwrite("max_reweight_iters", &DesignOptions::max_reweight_iters)
      .def_readwrite("convergence_tol", &DesignOptions::convergence_tol)
      .def_readwrite("prune_rel", &DesignOptions::prune_rel)
      .def_readwrite("prune_abs", &DesignOptions::prune_abs)
      .def_readwrite("bisect_on_infeasible", &DesignOptions::bisect_on_infeasible);

  py::class_<DesignResult>(m, "DesignResult")
      .def_readonly("gain", &DesignResult::gain)
      .def_readonly("precision", &DesignResult::precision)
      .def_readonly("gamma", &DesignResult::gamma)
      .def_readonly("active_count", &DesignResult::active_count)
      .def_readonly("refined", &DesignResult::refined)
      .def_readonly("feasible", &DesignResult::feasible)
      .def_readonly("gamma_frontier", &DesignResult::gamma_frontier);

  py::class_<CertificationReport>(m, "CertificationReport")
      .def_readonly("n_samples", &CertificationReport::n_samples)
      .def_readonly("worst_norm", &CertificationReport::worst_norm)
      .def_readonly("worst_sample_id", &CertificationReport::worst_sample_id)
      .def_readonly("violations", &CertificationReport::violations)
      .def_readonly("nominal_norm", &CertificationReport::nominal_norm)
      .def_readonly("passed", &CertificationReport::passed)
      .def_readonly("small_gain_norm", &CertificationReport::small_gain_norm);

  m.def("smd_nominal", &smd_nominal, py::arg("S_d_diag"));
  m.def("smd_affine", &smd_affine, py::arg("c0"), py::arg("c1"), py::arg("c2"));
  m.def("smd_lft", &smd_lft, py::arg("c0"), py::arg("c1"), py::arg("S_d_diag"));
  m.def("smd_state_matrix", &smd_state_matrix, py::arg("springs"),
        py::arg("dampers"));

  m.def("design_structured", &design_structured, py::arg("model"),
        py::arg("uncertainty"), py::arg("gamma"),
        py::arg("options") = DesignOptions{},
        py::call_guard<py::gil_scoped_release>());
  m.def("design_lft", &design_lft, py::arg("plant"), py::arg("gamma"),
        py::arg("options") = DesignOptions{},
        py::call_guard<py::gil_scoped_release>());

  m.def("verify_structured", &verify_structured, py::arg("model"),
        py::arg("uncertainty"), py::arg("result"), py::arg("gamma"),
        py::arg("n_samples"), py::arg("seed"),
        py::call_guard<py::gil_scoped_release>());
  m.def("verify_lft", &verify_lft, py::arg("plant"), py::arg("result"),
        py::arg("gamma"), py::arg("n_samples"), py::arg("seed"),
        py::call_guard<py::gil_scoped_release>());

  m.def(
      "hinf_norm",
      [](const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& D) {
        return hinf_norm(A, B, C, D);
      },
      py::arg("A"), py::arg("B"), py::arg("C"), py::arg("D"));
  m.def("is_hurwitz", &is_hurwitz, py::arg("A"));
}
