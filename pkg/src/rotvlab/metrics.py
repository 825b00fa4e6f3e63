"""Performance metrics extracted from a trajectory.

Errors are ``z - z_ref``, ``phi - 0`` and ``theta - 0``.  Steady-state values
are mean absolute errors over the last half of each flat window; settling time
is the first instant after a reference step from which the error stays inside
a band of 2% of the step magnitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .envsim import Scenario, Trajectory

SETTLING_BAND = 0.02


@dataclass(frozen=True)
class StepWindow:
    t_step: float
    magnitude: float           # reference change, m (signed)
    t_end: float


@dataclass(frozen=True)
class Windows:
    flats: tuple[tuple[float, float], ...] = ()      # time intervals
    steps: tuple[StepWindow, ...] = ()
    span: tuple[float, float] | None = None          # restrict global maxima


@dataclass(frozen=True)
class Metrics:
    max_abs_depth_error: float
    steady_state_depth_error: tuple[float, ...]
    steady_state_roll_error: tuple[float, ...]
    steady_state_pitch_error: tuple[float, ...]
    overshoot: tuple[float, ...]
    settling_time: tuple[float, ...]                 # inf when unsettled
    step_max_deflection: tuple[float, ...]
    max_abs_roll_error: float
    max_abs_pitch_error: float
    max_abs_deflection: tuple[float, float, float]
    control_effort: float
    extras: dict = field(default_factory=dict)

    def report(self, title: str = "") -> str:
        deg = math.degrees
        lines = []
        if title:
            lines.append(title)
        lines.append(f"settling band: {SETTLING_BAND:.0%} of step magnitude")
        lines.append(f"max_abs_depth_error_m = {self.max_abs_depth_error:.6g}")
        lines.append("steady_state_depth_error_m = " + _fmt(self.steady_state_depth_error))
        lines.append("steady_state_roll_error_deg = " + _fmt(map(deg, self.steady_state_roll_error)))
        lines.append("steady_state_pitch_error_deg = " + _fmt(map(deg, self.steady_state_pitch_error)))
        lines.append("overshoot_m = " + _fmt(self.overshoot))
        lines.append("settling_time_s = " + _fmt(self.settling_time))
        lines.append("step_max_deflection_deg = " + _fmt(map(deg, self.step_max_deflection)))
        lines.append(f"max_abs_roll_error_deg = {deg(self.max_abs_roll_error):.6g}")
        lines.append(f"max_abs_pitch_error_deg = {deg(self.max_abs_pitch_error):.6g}")
        lines.append("max_abs_deflection_deg = " + _fmt(map(deg, self.max_abs_deflection)))
        lines.append(f"control_effort_rad_per_sqrt_s = {self.control_effort:.6g}")
        for k, v in self.extras.items():
            lines.append(f"{k} = {v}")
        return "\n".join(lines) + "\n"


def _fmt(vals) -> str:
    vals = list(vals)
    return ", ".join("unsettled" if math.isinf(v) else f"{v:.6g}" for v in vals) if vals else "-"


def settling_time(t: np.ndarray, err: np.ndarray, magnitude: float,
                  band: float = SETTLING_BAND) -> float:
    """Time from t[0] until |err| enters and stays inside band*|magnitude|."""
    tol = band * abs(magnitude)
    outside = np.nonzero(np.abs(err) > tol)[0]
    if outside.size == 0:
        return 0.0
    last = outside[-1]
    if last + 1 >= len(t):
        return math.inf
    return float(t[last + 1] - t[0])


def control_effort(t: np.ndarray, fins: np.ndarray) -> float:
    """sqrt(sum((du/dt)^2 dt)) over all channels."""
    if len(t) < 2:
        return 0.0
    dt = np.diff(t)
    rates = np.diff(fins, axis=0) / dt[:, None]
    return float(math.sqrt(np.sum(rates ** 2 * dt[:, None])))


def compute_metrics(traj: Trajectory, windows: Windows) -> Metrics:
    if len(traj) == 0:
        raise ValueError("cannot compute metrics of an empty trajectory")
    t = traj["t"]
    ez = traj["z"] - traj["z_ref"]
    phi = traj["phi"]
    th = traj["theta"]
    fins = np.column_stack([traj["u1"], traj["u2"], traj["u3"]])

    if windows.span is None:
        sel = np.ones(len(t), dtype=bool)
    else:
        sel = (t >= windows.span[0]) & (t <= windows.span[1])

    ss_z, ss_phi, ss_th = [], [], []
    for a, b in windows.flats:
        idx = np.nonzero((t >= a) & (t < b))[0]
        if idx.size == 0:
            continue
        h = idx[idx.size // 2:]
        ss_z.append(float(np.mean(np.abs(ez[h]))))
        ss_phi.append(float(np.mean(np.abs(phi[h]))))
        ss_th.append(float(np.mean(np.abs(th[h]))))

    over, settle, defl = [], [], []
    for s in windows.steps:
        idx = np.nonzero((t >= s.t_step) & (t < s.t_end))[0]
        if idx.size == 0:
            continue
        e = ez[idx]
        # the step leaves the error at -magnitude; overshoot is a crossing past zero
        direction = -math.copysign(1.0, s.magnitude) if s.magnitude else 1.0
        over.append(float(max(0.0, np.max(-direction * e))))
        settle.append(settling_time(t[idx], e, s.magnitude))
        defl.append(float(np.max(np.abs(fins[idx]))))

    return Metrics(
        max_abs_depth_error=float(np.max(np.abs(ez[sel]))) if sel.any() else 0.0,
        steady_state_depth_error=tuple(ss_z),
        steady_state_roll_error=tuple(ss_phi),
        steady_state_pitch_error=tuple(ss_th),
        overshoot=tuple(over),
        settling_time=tuple(settle),
        step_max_deflection=tuple(defl),
        max_abs_roll_error=float(np.max(np.abs(phi[sel]))) if sel.any() else 0.0,
        max_abs_pitch_error=float(np.max(np.abs(th[sel]))) if sel.any() else 0.0,
        max_abs_deflection=tuple(float(v) for v in np.max(np.abs(fins[sel]), axis=0))
        if sel.any() else (0.0, 0.0, 0.0),
        control_effort=control_effort(t[sel], fins[sel]),
    )


def _time_at_x(traj: Trajectory, x: float) -> float:
    xs = traj["x"]
    i = int(np.searchsorted(xs, x, side="left"))
    if i >= len(xs):
        return math.inf
    return float(traj["t"][i])


def scenario_windows(traj: Trajectory, scenario: Scenario,
                     x_span: tuple[float, float] | None = None) -> Windows:
    """Flat windows, ledge and commanded steps of a scenario, expressed in time.

    Only the part of each window after the controller starts is used; windows
    outside ``x_span`` (along-track metres) are dropped.
    """
    t_on = scenario.start_tick * scenario.dt
    t_final = float(traj["t"][-1]) + scenario.dt if len(traj) else 0.0
    lo, hi = x_span if x_span is not None else (-math.inf, math.inf)

    flats = []
    for a, b in scenario.profile.flat_windows():
        a, b = max(a, lo), min(b, hi)
        if b <= a:
            continue
        ta, tb = max(_time_at_x(traj, a), t_on), min(_time_at_x(traj, b), t_final)
        if tb > ta:
            flats.append((ta, tb))

    events = []
    for x, dh in scenario.profile.ledges():
        if lo <= x <= hi:
            ts = _time_at_x(traj, x)
            if math.isfinite(ts) and ts >= t_on:
                events.append((ts, -dh))          # seabed drop -> deeper reference
    for ts, dz in scenario.reference_steps:
        if ts >= t_on and ts < t_final:
            events.append((ts, dz))
    events.sort()
    steps = []
    for k, (ts, mag) in enumerate(events):
        te = events[k + 1][0] if k + 1 < len(events) else t_final
        steps.append(StepWindow(ts, mag, te))

    span = None
    if x_span is not None:
        span = (_time_at_x(traj, lo) if lo > 0 else 0.0, min(_time_at_x(traj, hi), t_final))
    return Windows(tuple(flats), tuple(steps), span)
