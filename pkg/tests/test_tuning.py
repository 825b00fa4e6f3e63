import math

import pytest

from rotvlab.scenarios import pid_gains
from rotvlab.tuning import MATCH_TOLERANCE, _match_scale, axis_settling, tune_pid


def test_shipped_depth_gains_match_lqr_settling(cfg):
    lqr = axis_settling(cfg, "lqr", "depth")
    pid = axis_settling(cfg, "pid", "depth")
    assert math.isfinite(lqr)
    assert abs(pid - lqr) / lqr <= MATCH_TOLERANCE


@pytest.mark.parametrize("axis", ["roll", "pitch"])
def test_attitude_loops_settle_no_slower_than_lqr(cfg, axis):
    lqr = axis_settling(cfg, "lqr", axis)
    pid = axis_settling(cfg, "pid", axis)
    assert math.isfinite(pid) and pid <= lqr * (1 + MATCH_TOLERANCE)


def test_tuner_reproduces_shipped_depth_gains(cfg):
    res = tune_pid(cfg.updated(**{"pid.depth": "0.06, 0.0015, 0.03"}))
    assert res.mismatch <= MATCH_TOLERANCE
    shipped = pid_gains(cfg)[0]
    assert res.gains[0].kp == pytest.approx(shipped.kp, rel=0.05)


def test_match_scale_bisects_monotone_cost():
    scale, val = _match_scale(lambda s: 10.0 / s, 3.0, [1.0, 2.0, 4.0, 8.0], 1e-6, 60)
    assert scale == pytest.approx(10.0 / 3.0, rel=1e-5)


def test_match_scale_reports_no_bracket():
    assert _match_scale(lambda s: 5.0, 1.0, [1.0, 2.0], 0.05, 10) is None
