"""Backend selection for the simulation hot loop.

The compiled ``_kernel`` extension is used when importable; otherwise (or when
``ROTVLAB_PURE_PYTHON=1`` is set) the pure-Python twin takes over.  Both expose
the same functions with identical semantics; callers go through the wrappers
here so they never care which one is live.
"""

from __future__ import annotations

import math
import os

import numpy as np

from . import _kernel_py
from ._kernel_py import N_REC, N_SERVO, N_VEHICLE  # noqa: F401  (re-exported)

_py = _kernel_py

if os.environ.get("ROTVLAB_PURE_PYTHON", "") not in ("", "0"):
    _ext = None
else:
    try:
        from . import _kernel as _ext
    except ImportError:  # extension not built
        _ext = None

BACKEND = "cython" if _ext is not None else "python"

ALPHA_MAX = math.radians(8.0)


def available_backends() -> list[str]:
    return ["python"] + (["cython"] if _ext is not None else [])


def _impl(backend: str | None):
    name = backend or BACKEND
    if name == "cython":
        if _ext is None:
            raise RuntimeError("compiled kernel is not available")
        return _ext
    if name == "python":
        return _py
    raise ValueError(f"unknown backend {name!r}")


def pack_vehicle(params, coeffs) -> np.ndarray:
    """Flatten vehicle parameters and added-mass terms for the kernel."""
    P = _kernel_py
    prm = np.zeros(N_VEHICLE)
    prm[P.P_M] = params.mass
    prm[P.P_ZWD] = coeffs.Z_wdot
    prm[P.P_RHO] = params.fluid_density
    prm[P.P_K] = params.lift_slope
    prm[P.P_AMAX] = ALPHA_MAX
    prm[P.P_S1:P.P_S4 + 1] = params.wing_areas
    prm[P.P_D1:P.P_D4 + 1] = params.moment_arms
    prm[P.P_R1] = params.flap_lateral_offset
    prm[P.P_DRAG] = 0.5 * params.fluid_density * params.drag_coeff * params.frontal_area
    prm[P.P_LCAB] = params.cable_arm
    prm[P.P_ZW], prm[P.P_KP], prm[P.P_MQ] = params.damping_linear
    prm[P.P_ZWW], prm[P.P_KPP], prm[P.P_MQQ] = params.damping_quadratic
    prm[P.P_IXZ] = params.Ixz
    prm[P.P_IYZ] = params.Iyz
    prm[P.P_INVH] = 1.0 / (params.mass + coeffs.Z_wdot)
    rot = np.array([[params.Ix + coeffs.K_pdot, -params.Ixy],
                    [-params.Ixy, params.Iy + coeffs.M_qdot]])
    inv = np.linalg.inv(rot)
    prm[P.P_MI00], prm[P.P_MI01] = inv[0]
    prm[P.P_MI10], prm[P.P_MI11] = inv[1]
    prm[P.P_ANGLIM] = 0.5 * math.pi
    return prm


def pack_servo(servo) -> np.ndarray:
    P = _kernel_py
    s = np.zeros(N_SERVO)
    s[P.S_TAU] = servo.time_constant
    s[P.S_DZ] = servo.dead_zone
    s[P.S_RATE] = servo.max_rate
    s[P.S_LIM] = servo.limit
    s[P.S_IDEAL] = 1.0 if servo.ideal else 0.0
    return s


def _arg(arr, impl):
    return arr.tolist() if impl is _py else np.ascontiguousarray(arr, dtype=float)


def torques(y, U, fins, prm, backend=None):
    impl = _impl(backend)
    return impl.torques(list(y), float(U), float(fins[0]), float(fins[1]),
                        float(fins[2]), _arg(np.asarray(prm), impl))


def deriv(y, U, fins, dist, prm, backend=None) -> np.ndarray:
    impl = _impl(backend)
    out = [0.0] * 7
    impl.deriv(list(y), float(U), float(fins[0]), float(fins[1]), float(fins[2]),
               float(dist[0]), float(dist[1]), float(dist[2]),
               _arg(np.asarray(prm), impl), out)
    return np.array(out)


def dead_zone_rate(pwm, sprm, backend=None) -> float:
    impl = _impl(backend)
    return impl.dead_zone_rate(float(pwm), _arg(np.asarray(sprm), impl))


def servo_step(defl, cmd, dt, sprm, backend=None) -> float:
    impl = _impl(backend)
    return impl.servo_step(float(defl), float(cmd), float(dt), _arg(np.asarray(sprm), impl))


def advance(y, defl, cmd, dist, prm, sprm, U0, dU, n, dt, out, row0, backend=None) -> int:
    """Advance ``n`` physics ticks in place; see ``_kernel_py.advance``."""
    impl = _impl(backend)
    if impl is _py:
        yl, dl = y.tolist(), defl.tolist()
        done = _py.advance(yl, dl, list(cmd), list(dist), prm.tolist(), sprm.tolist(),
                           float(U0), float(dU), int(n), float(dt), out, int(row0))
        y[:] = yl
        defl[:] = dl
        return done
    return impl.advance(y, defl, np.ascontiguousarray(cmd, dtype=float),
                        np.ascontiguousarray(dist, dtype=float), prm, sprm,
                        float(U0), float(dU), int(n), float(dt), out, int(row0))
