from pathlib import Path
import json

import numpy as np
import pytest

import parcell

SCENARIOS = Path(__file__).resolve().parents[2] / "scenarios"
GAIN = np.array([-30.0, -30.0, -20.0, 2.0, 4.0, -20.0])


@pytest.fixture(scope="module")
def reference():
    model, z0 = parcell.load_pack_config(str(SCENARIOS / "reference_pack.json"))
    return model, z0


def test_structure(reference):
    model, _ = reference
    assert model.n == 2
    assert model.a22_determinant == pytest.approx(0.004, abs=1e-15)
    assert model.E.shape == (6, 6)
    np.testing.assert_array_equal(model.E[4:, :], 0.0)


def test_current_split(reference):
    model, _ = reference
    u = model.solve_algebraic(np.array([0.5, 0.0, 0.5, 0.0]), 10.0)
    np.testing.assert_allclose(u, [3.75, 6.25], rtol=1e-12)


def test_simulate_kirchhoff(reference):
    model, z0 = reference
    cycle = parcell.synth_udds_like(20.0, 100.0, 3)
    traj = parcell.simulate(model, parcell.rest_state(z0), cycle, dt=0.1, t_end=100.0)
    assert traj["x"].shape == (1001, 4)
    np.testing.assert_allclose(traj["u"].sum(axis=1), traj["i_total"], atol=1e-9)


def test_observability(reference):
    model, _ = reference
    rep = parcell.analyze_observability(model, np.array([0.4, 0.0, 0.5, 0.0]))
    assert rep.verdict == "Observable"
    assert rep.lie_rank == 4
    rows, labels = parcell.lie_observability_matrix(model, np.array([0.4, 0.0, 0.5, 0.0]))
    assert rows.shape == (7, 4)
    assert labels[0] == "h"


def test_identical_cells_unobservable():
    cell = parcell.CellParams(0.0025, 0.004, 1500.0, 2.3)
    model = parcell.PackModel([cell, cell])
    rep = parcell.analyze_observability(model, np.array([0.5, 0.01, 0.5, 0.01]))
    assert rep.verdict == "Unobservable"
    assert rep.lie_rank <= 2


def test_observer_converges(reference):
    model, z0 = reference
    cycle = parcell.synth_udds_like(20.0, 400.0, 7)
    x0 = parcell.rest_state(z0)
    traj = parcell.simulate(model, x0, cycle, dt=0.1, t_end=400.0)
    xhat0 = x0 + np.array([0.15, 0.0, 0.10, 0.0])
    est = parcell.run_observer(model, parcell.ObserverGain(GAIN), xhat0,
                               traj["t"], traj["v_terminal"], traj["i_total"])
    err = np.abs(est["xhat"][-1] - traj["x"][-1])
    assert err[[0, 2]].max() < 0.01


def test_validate_gain(reference):
    model, _ = reference
    rep = parcell.validate_gain(model, parcell.ObserverGain(GAIN), lipschitz_samples=64)
    assert rep.impulse_obs and rep.g_tilde_stable
    assert json.loads(rep.to_json())["g_tilde_stable"] is True


def test_errors_map_to_python(reference):
    model, _ = reference
    with pytest.raises(parcell.ParcellError):
        parcell.ObserverGain(np.array([1.0, 2.0]))
    with pytest.raises(parcell.ParcellError):
        parcell.PackModel([parcell.CellParams(0.0025, 0.004, 1500.0, 2.3)])


def test_scenario_runner(tmp_path):
    summary = json.loads(parcell.load_scenario_and_run(str(SCENARIOS / "same_sign.json"), str(tmp_path)))
    assert summary["highest_r1_current_share"] < 0.5
    assert (tmp_path / "trajectory.csv").exists()
