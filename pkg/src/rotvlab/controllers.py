"""Runtime control laws: gain-scheduled LQR with an outer depth loop, PID baseline.

Both controllers are immutable values: a step takes the current controller
state and returns the command together with the advanced state.  Errors are
measured as ``measured - reference`` throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .lincontrol import GainSchedule, scheduled_gain
from .model import FinDeflections

DEFAULT_LIMIT = math.radians(20.0)

# axis command -> fin mixing for the PID baseline (columns: depth, roll, pitch).
# Depth drives the flaps collectively and noses the tail down; roll is purely
# differential; pitch uses the tail alone.
DEFAULT_MIXING = np.array([[1.0, 1.0, 0.0],
                           [1.0, -1.0, 0.0],
                           [-0.5, 0.0, -1.0]])


@dataclass(frozen=True)
class ControlCommand:
    raw: FinDeflections                 # before actuator saturation
    fins: FinDeflections                # clamped to the deflection limits
    saturated: tuple[bool, bool, bool]


def _saturate(u_raw: np.ndarray, limit: float) -> ControlCommand:
    u = np.clip(u_raw, -limit, limit)
    sat = tuple(bool(abs(r) > limit) for r in u_raw)
    return ControlCommand(FinDeflections(*map(float, u_raw)), FinDeflections(*map(float, u)), sat)


def anti_windup_update(integrator: float, error: float, u_raw, u_limits, dt: float, *,
                       gain_sign=1.0, integrator_limit: float = math.inf,
                       increment: float | None = None) -> float:
    """Conditional integration ("integration is halted" while pushing into saturation).

    ``u_raw`` may be a scalar or a vector of channel outputs; ``gain_sign`` gives
    the sign with which the integrator moves each channel.  Integration stops if
    any saturated channel would be driven further past its limit; otherwise the
    integrator accumulates ``increment`` (default ``error*dt``) and is clamped to
    ``integrator_limit``.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    u_raw = np.atleast_1d(np.asarray(u_raw, dtype=float))
    signs = np.broadcast_to(np.asarray(gain_sign, dtype=float), u_raw.shape)
    if np.isscalar(u_limits) or np.ndim(u_limits) == 0:
        lo, hi = -float(u_limits), float(u_limits)
    else:
        lo, hi = float(u_limits[0]), float(u_limits[1])
    for u, s in zip(u_raw, signs):
        excess = 1.0 if u > hi else (-1.0 if u < lo else 0.0)
        if excess != 0.0 and s != 0.0 and np.sign(error * s) == excess:
            return integrator
    step = error * dt if increment is None else increment
    return float(np.clip(integrator + step, -integrator_limit, integrator_limit))


# -------------------------------------------------------------------- LQR --

@dataclass(frozen=True)
class LqrControllerState:
    schedule: GainSchedule
    depth_integrator: float = 0.0                 # m*s
    reference: tuple[float, float, float] = (0.0, 0.0, 0.0)   # z_ref, phi_ref, theta_ref
    ki_depth: float = 0.0                         # 1/s
    integrator_limit: float = 5.0                 # m*s
    deflection_limit: float = DEFAULT_LIMIT
    antiwindup: bool = True
    trim_fins: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if abs(self.depth_integrator) > self.integrator_limit:
            raise ValueError("depth integrator outside its limits")

    def with_reference(self, z_ref: float, phi_ref: float = 0.0,
                       theta_ref: float | None = None) -> "LqrControllerState":
        th = self.reference[2] if theta_ref is None else theta_ref
        return replace(self, reference=(float(z_ref), float(phi_ref), float(th)))


def _x6(x) -> np.ndarray:
    if hasattr(x, "as_array"):
        a = x.as_array()
        return a[1:7]
    return np.asarray(x, dtype=float)


def lqr_step(ctrl: LqrControllerState, x, U: float, dt: float
             ) -> tuple[ControlCommand, LqrControllerState]:
    """u = u_trim - K(U) (x - x_ref); x_ref's depth is augmented by Ki * integral."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    x = _x6(x)
    z_ref, phi_ref, th_ref = ctrl.reference
    K = scheduled_gain(ctrl.schedule, U)
    z_aug = z_ref + ctrl.ki_depth * ctrl.depth_integrator
    e = x - np.array([z_aug, 0.0, phi_ref, 0.0, th_ref, 0.0])
    u_raw = np.asarray(ctrl.trim_fins) - K @ e
    cmd = _saturate(u_raw, ctrl.deflection_limit)

    err = z_ref - x[0]
    # d u / d integrator = +Ki * K[:, 0]
    if ctrl.antiwindup:
        integ = anti_windup_update(ctrl.depth_integrator, err, u_raw, ctrl.deflection_limit, dt,
                                   gain_sign=np.sign(ctrl.ki_depth * K[:, 0]),
                                   integrator_limit=ctrl.integrator_limit)
    else:
        integ = float(np.clip(ctrl.depth_integrator + err * dt,
                              -ctrl.integrator_limit, ctrl.integrator_limit))
    return cmd, replace(ctrl, depth_integrator=integ)


# -------------------------------------------------------------------- PID --

@dataclass(frozen=True)
class PidGains:
    kp: float = 0.0
    ki: float = 0.0
    kd: float = 0.0

    def scaled(self, s: float) -> "PidGains":
        return PidGains(self.kp * s, self.ki * s, self.kd * s)


@dataclass(frozen=True)
class PidControllerState:
    gains: tuple[PidGains, PidGains, PidGains]          # depth, roll, pitch
    mixing: np.ndarray = field(default_factory=lambda: DEFAULT_MIXING.copy())
    integrators: tuple[float, float, float] = (0.0, 0.0, 0.0)    # Ki-weighted, rad
    prev_errors: tuple[float, float, float] | None = None
    derivatives: tuple[float, float, float] = (0.0, 0.0, 0.0)
    integrator_limits: tuple[float, float, float] = (DEFAULT_LIMIT,) * 3
    derivative_filter: float = 0.05                     # s
    deflection_limit: float = DEFAULT_LIMIT
    antiwindup: bool = True
    trim_fins: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if np.shape(self.mixing) != (3, 3):
            raise ValueError("mixing matrix must be 3x3")
        if any(abs(i) > lim for i, lim in zip(self.integrators, self.integrator_limits)):
            raise ValueError("PID integrator outside its limits")


def pid_step(ctrl: PidControllerState, errors: Sequence[float], dt: float
             ) -> tuple[ControlCommand, PidControllerState]:
    """Three SISO PID loops on (e_z, e_phi, e_theta), mixed onto the fins."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    e = np.asarray(errors, dtype=float)
    prev = e if ctrl.prev_errors is None else np.asarray(ctrl.prev_errors)
    tf = ctrl.derivative_filter
    d_prev = np.asarray(ctrl.derivatives)
    d = (tf * d_prev + (e - prev)) / (tf + dt)

    integ = np.asarray(ctrl.integrators, dtype=float)
    kp = np.array([g.kp for g in ctrl.gains])
    ki = np.array([g.ki for g in ctrl.gains])
    kd = np.array([g.kd for g in ctrl.gains])
    axis = kp * e + integ + kd * d
    M = np.asarray(ctrl.mixing)
    u_raw = np.asarray(ctrl.trim_fins) + M @ axis
    cmd = _saturate(u_raw, ctrl.deflection_limit)

    new_int = []
    for i in range(3):
        inc = ki[i] * 0.5 * (e[i] + prev[i]) * dt
        if ctrl.antiwindup:
            v = anti_windup_update(integ[i], e[i], u_raw, ctrl.deflection_limit, dt,
                                   gain_sign=np.sign(M[:, i] * ki[i]),
                                   integrator_limit=ctrl.integrator_limits[i], increment=inc)
        else:
            v = float(np.clip(integ[i] + inc, -ctrl.integrator_limits[i],
                              ctrl.integrator_limits[i]))
        new_int.append(v)
    return cmd, replace(ctrl, integrators=tuple(new_int), prev_errors=tuple(map(float, e)),
                        derivatives=tuple(map(float, d)))
