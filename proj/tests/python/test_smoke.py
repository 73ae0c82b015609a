import numpy as np
import pytest

import _sparseobs as so


def test_smd_nominal_shapes():
    model = so.smd_nominal(np.ones(3))
    assert model.n_x() == 6
    assert model.n_y() == 6
    assert model.A.shape == (6, 6)
    assert so.is_hurwitz(model.A)


def test_hinf_norm_first_order():
    one = np.ones((1, 1))
    assert so.hinf_norm(-one, one, one, np.zeros((1, 1))) == pytest.approx(
        1.0, abs=1e-6
    )


def test_design_and_verify_nominal():
    model = so.smd_nominal(np.ones(3))
    unc = so.smd_affine(0.0, 0.0, 0.0)
    result = so.design_structured(model, unc, 1.0)
    assert result.feasible
    assert result.active_count == 1
    report = so.verify_structured(model, unc, result, 1.0, 20, 7)
    assert report.passed
    assert report.worst_norm <= 1.0 * (1 + 1e-4)


def test_lft_roundtrip():
    plant = so.smd_lft(0.1, 0.1, np.ones(3))
    nominal = plant.nominal()
    assert np.allclose(nominal.A, so.smd_nominal(np.ones(3)).A)
    springs = np.array([1.05, 0.95, 1.0])
    dampers = np.array([1.1, 1.0, 0.9])
    A = so.smd_state_matrix(springs, dampers)
    assert A.shape == (6, 6)


def test_infeasible_design_reports_frontier():
    model = so.smd_nominal(np.ones(3))
    unc = so.smd_affine(0.0, 0.0, 0.0)
    opts = so.DesignOptions()
    result = so.design_structured(model, unc, 1e-9, opts)
    assert not result.feasible
    assert result.gamma_frontier is not None
