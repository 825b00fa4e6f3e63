import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rotvlab.envsim import CSV_COLUMNS, Trajectory
from rotvlab.metrics import StepWindow, Windows, compute_metrics, control_effort, settling_time

DT = 0.005


def synthetic(t, z_err=None, phi=None, fins=None):
    data = np.zeros((len(t), len(CSV_COLUMNS)))
    data[:, 0] = t
    data[:, CSV_COLUMNS.index("z_ref")] = 10.0
    data[:, CSV_COLUMNS.index("z")] = 10.0 + (0 if z_err is None else z_err)
    if phi is not None:
        data[:, CSV_COLUMNS.index("phi")] = phi
    if fins is not None:
        for k, c in enumerate(("u1", "u2", "u3")):
            data[:, CSV_COLUMNS.index(c)] = fins[:, k]
    return Trajectory(data)


def test_exponential_settling_time():
    tau = 0.8
    t = np.arange(0, 10, DT)
    ts = settling_time(t, -np.exp(-t / tau), 1.0)
    assert abs(ts - tau * math.log(50)) <= DT


def test_settling_never_reached_is_infinite():
    t = np.arange(0, 1, DT)
    assert settling_time(t, np.ones_like(t), 1.0) == math.inf


def test_zero_error_settles_immediately():
    t = np.arange(0, 1, DT)
    assert settling_time(t, np.zeros_like(t), 1.0) == 0.0


def test_constant_deflection_has_zero_effort():
    t = np.arange(0, 2, DT)
    assert control_effort(t, np.full((len(t), 3), 0.1)) == 0.0


def test_ramp_effort():
    t = np.arange(0, 2 + DT / 2, DT)
    fins = np.column_stack([0.1 * t, np.zeros_like(t), np.zeros_like(t)])
    assert control_effort(t, fins) == pytest.approx(0.1 * math.sqrt(2.0))


@given(st.floats(0.1, 10.0))
def test_effort_scales_linearly(c):
    t = np.arange(0, 1, DT)
    fins = np.column_stack([np.sin(3 * t), np.cos(2 * t), t])
    assert control_effort(t, c * fins) == pytest.approx(c * control_effort(t, fins))


def test_metrics_on_zero_trajectory():
    t = np.arange(0, 5, DT)
    m = compute_metrics(synthetic(t), Windows(flats=((0.0, 5.0),),
                                             steps=(StepWindow(1.0, 0.5, 5.0),)))
    assert m.max_abs_depth_error == 0.0
    assert m.steady_state_depth_error == (0.0,)
    assert m.overshoot == (0.0,) and m.settling_time == (0.0,)
    assert m.control_effort == 0.0


def test_overshoot_and_span():
    t = np.arange(0, 4, DT)
    # reference stepped by +1 at t=1: error starts at -1 and crosses to +0.2
    err = np.where(t < 1, 0.0, -np.cos(3 * (t - 1)) * np.exp(-(t - 1)) * 1.0)
    m = compute_metrics(synthetic(t, z_err=err), Windows(steps=(StepWindow(1.0, 1.0, 4.0),),
                                                         span=(1.0, 4.0)))
    assert m.overshoot[0] == pytest.approx(np.max(err[t >= 1]), rel=1e-12)
    assert m.max_abs_depth_error == pytest.approx(1.0)


def test_steady_state_uses_second_half_of_window():
    t = np.arange(0, 2, DT)
    err = np.where(t < 1, 1.0, 0.01)
    m = compute_metrics(synthetic(t, z_err=err), Windows(flats=((0.0, 2.0),)))
    assert m.steady_state_depth_error[0] == pytest.approx(0.01)


def test_metrics_do_not_modify_trajectory():
    t = np.arange(0, 1, DT)
    traj = synthetic(t, z_err=np.sin(t), phi=0.1 * t)
    before = traj.data.copy()
    compute_metrics(traj, Windows(flats=((0, 1),)))
    np.testing.assert_array_equal(traj.data, before)


def test_empty_trajectory_rejected():
    with pytest.raises(ValueError):
        compute_metrics(Trajectory(np.zeros((0, len(CSV_COLUMNS)))), Windows())
