"""Trim, surge-dependent linearization, LQR synthesis and gain scheduling.

Linear models use the state ``[z, zdot, phi, phidot, theta, thetadot]`` and the
input ``[u1, u2, u3]``, all in SI units (m, rad).  LQR weights may be quoted in
engineering units (angles in degrees) and are converted before synthesis.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .errors import SynthesisError, TrimError
from .model import BodyState, FinDeflections, VehicleModel

log = logging.getLogger(__name__)

STATE_NAMES = ("z", "zdot", "phi", "phidot", "theta", "thetadot")
INPUT_NAMES = ("u1", "u2", "u3")
DEFAULT_Q = (500.0, 30.0, 20.0, 10.0, 50.0, 30.0)
DEFAULT_R = (11.0, 11.0, 19.0)
DEFAULT_SPEEDS = (1.0, 2.0, 3.0, 4.0, 5.0)
_ANGLE_STATES = (2, 3, 4, 5)


@dataclass(frozen=True)
class StateSpace:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    surge: float

    def __post_init__(self):
        if self.A.shape != (6, 6) or self.B.shape != (6, 3) or self.C.shape != (6, 6):
            raise ValueError("state space must be 6x6 / 6x3 / 6x6")
        if not (np.all(np.isfinite(self.A)) and np.all(np.isfinite(self.B))):
            raise SynthesisError(f"non-finite linearization at U={self.surge}")


@dataclass(frozen=True)
class LQRWeights:
    Q: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        if np.any(np.linalg.eigvalsh(0.5 * (self.Q + self.Q.T)) < -1e-12):
            raise SynthesisError("Q must be positive semidefinite")
        if np.any(np.linalg.eigvalsh(0.5 * (self.R + self.R.T)) <= 0):
            raise SynthesisError("R must be positive definite")

    @classmethod
    def from_diagonals(cls, q, r, units: str = "deg") -> "LQRWeights":
        """Diagonal weights; with ``units='deg'`` angles/rates/fins are in degrees."""
        q = np.array(q, dtype=float)
        r = np.array(r, dtype=float)
        if units == "deg":
            c2 = (180.0 / math.pi) ** 2
            q[list(_ANGLE_STATES)] *= c2
            r *= c2
        elif units != "rad":
            raise ValueError(f"weight units must be 'deg' or 'rad', not {units!r}")
        return cls(np.diag(q), np.diag(r))

    @classmethod
    def default(cls, units: str = "deg") -> "LQRWeights":
        return cls.from_diagonals(DEFAULT_Q, DEFAULT_R, units)


# --------------------------------------------------------------------- trim --

def trim_state(U: float, model: VehicleModel, tol: float = 1e-10,
               max_iter: int = 100) -> tuple[BodyState, FinDeflections]:
    """Level flight at constant depth: zero rates, heave/pitch accelerations zero.

    Damped Newton on (theta, collective flap, tail flap); with three unknowns and
    two residuals the step is the minimum-norm least-squares correction.
    """
    if not U > 0:
        raise TrimError("trim needs a positive surge velocity")

    def residual(v):
        th, uc, u3 = v
        y = np.array([0.0, 0.0, 0.0, 0.0, 0.0, th, 0.0])
        d = model.derivative(y, U, (uc, uc, u3))
        return np.array([d[2], d[6]])

    v = np.zeros(3)
    r = residual(v)
    for _ in range(max_iter):
        if np.max(np.abs(r)) <= tol:
            break
        J = np.empty((2, 3))
        for j in range(3):
            e = np.zeros(3)
            e[j] = 1e-7
            J[:, j] = (residual(v + e) - residual(v - e)) / 2e-7
        step = np.linalg.lstsq(J, -r, rcond=None)[0]
        lam = 1.0
        while lam > 1e-4:
            trial = v + lam * step
            rt = residual(trial)
            if np.linalg.norm(rt) < np.linalg.norm(r):
                break
            lam *= 0.5
        v, r = trial, rt
    else:
        raise TrimError(f"trim did not converge at U={U} (residual {np.max(np.abs(r)):.3g})")
    if np.max(np.abs(r)) > tol:
        raise TrimError(f"trim did not converge at U={U} (residual {np.max(np.abs(r)):.3g})")
    th, uc, u3 = (float(a) for a in v)
    return BodyState(theta=th, surge=U), FinDeflections(uc, uc, u3)


# ------------------------------------------------------------ linearization --

def _f(model: VehicleModel, x6, u3v, U):
    y = np.array([0.0, x6[0], x6[1], x6[2], x6[3], x6[4], x6[5]])
    d = model.derivative(y, U, u3v)
    return d[1:]


def _x6(state: BodyState) -> np.ndarray:
    return np.array([state.z, state.w, state.phi, state.p, state.theta, state.q])


def jacobians(model: VehicleModel, U: float, x0, u0, h: float,
              scheme: str = "central") -> tuple[np.ndarray, np.ndarray]:
    """Finite-difference (A, B) of the nonlinear dynamics about (x0, u0)."""
    x0 = np.asarray(x0, dtype=float)
    u0 = np.asarray(u0, dtype=float)
    f0 = _f(model, x0, u0, U) if scheme == "forward" else None
    A = np.empty((6, 6))
    B = np.empty((6, 3))
    for j in range(6):
        e = np.zeros(6)
        e[j] = h
        if scheme == "central":
            A[:, j] = (_f(model, x0 + e, u0, U) - _f(model, x0 - e, u0, U)) / (2 * h)
        else:
            A[:, j] = (_f(model, x0 + e, u0, U) - f0) / h
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        if scheme == "central":
            B[:, j] = (_f(model, x0, u0 + e, U) - _f(model, x0, u0 - e, U)) / (2 * h)
        else:
            B[:, j] = (_f(model, x0, u0 + e, U) - f0) / h
    return A, B


def linearize(U: float, model: VehicleModel, h: float = 1e-6) -> StateSpace:
    trim, fins = trim_state(U, model)
    x0, u0 = _x6(trim), np.array(fins)
    A, B = jacobians(model, U, x0, u0, h)
    A2, B2 = jacobians(model, U, x0, u0, 2 * h)
    # Richardson check: the h and 2h estimates must agree to FD accuracy
    scale = 1.0 + max(np.max(np.abs(A)), np.max(np.abs(B)))
    gap = max(np.max(np.abs(A - A2)), np.max(np.abs(B - B2))) / scale
    if gap > 1e-5:
        log.warning("linearization at U=%.3g: h/2h Jacobians differ by %.2e", U, gap)
    return StateSpace(A=A, B=B, C=np.eye(6), surge=float(U))


# ---------------------------------------------------------------- riccati --

def spectral_abscissa(M: np.ndarray) -> float:
    return float(np.max(np.linalg.eigvals(M).real))


def _seed_gain(A, B):
    """Stabilizing initial gain by the pole-shift (Bass) construction."""
    if spectral_abscissa(A) < 0:
        return np.zeros((B.shape[1], A.shape[0]))
    beta = 1.0 + max(np.max(np.abs(np.linalg.eigvals(A))), 0.0)
    Ab = A + beta * np.eye(A.shape[0])
    # (-Ab) X + X (-Ab)^T = -2 B B^T, with -Ab Hurwitz
    X = linalg.solve_continuous_lyapunov(-Ab, -2.0 * B @ B.T)
    X = 0.5 * (X + X.T)
    try:
        K0 = np.linalg.solve(X, B).T
    except np.linalg.LinAlgError:
        raise SynthesisError("pair (A, B) is not controllable; no pole-shift seed") from None
    if not np.all(np.isfinite(K0)) or spectral_abscissa(A - B @ K0) >= 0:
        raise SynthesisError("pole-shift seed failed to stabilize (A, B)")
    return K0


def care_residual(A, B, Q, R, P) -> np.ndarray:
    return A.T @ P + P @ A - P @ B @ np.linalg.solve(R, B.T @ P) + Q


def solve_care(A, B, Q, R, tol: float = 1e-8, max_iter: int = 100) -> np.ndarray:
    """Stabilizing solution of A'P + PA - PBR^-1B'P + Q = 0 (Newton-Kleinman)."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.asarray(B, dtype=float).reshape(A.shape[0], -1)
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    R = np.atleast_2d(np.asarray(R, dtype=float))
    K = _seed_gain(A, B)
    P = np.zeros_like(A)
    for _ in range(max_iter):
        Ak = A - B @ K
        if spectral_abscissa(Ak) >= 0:
            raise SynthesisError("Newton-Kleinman iterate lost stability")
        P_new = linalg.solve_continuous_lyapunov(Ak.T, -(Q + K.T @ R @ K))
        P_new = 0.5 * (P_new + P_new.T)
        K = np.linalg.solve(R, B.T @ P_new)
        done = np.linalg.norm(P_new - P) <= 1e-14 * (1.0 + np.linalg.norm(P_new))
        P = P_new
        res = np.linalg.norm(care_residual(A, B, Q, R, P))
        if done or res <= 1e-3 * tol * (1.0 + np.linalg.norm(P)):
            break
    res = np.linalg.norm(care_residual(A, B, Q, R, P))
    if not np.isfinite(res) or res > tol * (1.0 + np.linalg.norm(P)):
        raise SynthesisError(f"Riccati iteration did not converge (residual {res:.3g})")
    return P


def lqr_gain(A, B, Q, R) -> np.ndarray:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.asarray(B, dtype=float).reshape(A.shape[0], -1)
    R = np.atleast_2d(np.asarray(R, dtype=float))
    P = solve_care(A, B, Q, R)
    K = np.linalg.solve(R, B.T @ P)
    if spectral_abscissa(A - B @ K) >= 0:
        raise SynthesisError("LQR gain does not stabilize the pair")
    return K


# --------------------------------------------------------------- schedule --

@dataclass(frozen=True)
class GainSchedule:
    velocities: tuple[float, ...]
    gains: np.ndarray                      # (n, 3, 6)
    warnings: tuple[str, ...] = field(default=())

    def __post_init__(self):
        v = self.velocities
        if len(v) < 1:
            raise SynthesisError("gain schedule needs at least one entry")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise SynthesisError("schedule velocities must be strictly increasing")
        if self.gains.shape != (len(v), 3, 6):
            raise SynthesisError("gain array must be (n, 3, 6)")

    def __len__(self):
        return len(self.velocities)

    def to_csv(self) -> str:
        head = ["U"] + [f"K{i}{j}" for i in range(3) for j in range(6)]
        rows = [",".join(head)]
        for U, K in zip(self.velocities, self.gains):
            rows.append(",".join([f"{U:.9g}"] + [f"{k:.9g}" for k in K.ravel()]))
        return "\n".join(rows) + "\n"


def scheduled_gain(schedule: GainSchedule, U: float) -> np.ndarray:
    v = schedule.velocities
    G = schedule.gains
    if U <= v[0]:
        return G[0].copy()
    if U >= v[-1]:
        return G[-1].copy()
    i = int(np.searchsorted(v, U, side="right")) - 1
    t = (U - v[i]) / (v[i + 1] - v[i])
    return (1.0 - t) * G[i] + t * G[i + 1]


def build_gain_schedule(velocities, weights: LQRWeights,
                        model: VehicleModel) -> GainSchedule:
    velocities = tuple(float(u) for u in velocities)
    if any(b <= a for a, b in zip(velocities, velocities[1:])):
        raise SynthesisError("schedule velocities must be sorted and distinct")
    gains = []
    for U in velocities:
        try:
            ss = linearize(U, model)
            gains.append(lqr_gain(ss.A, ss.B, weights.Q, weights.R))
        except (SynthesisError, TrimError) as exc:
            raise SynthesisError(f"synthesis failed at U={U}: {exc}") from exc
    warnings = []
    for (U0, K0), (U1, K1) in zip(zip(velocities, gains), zip(velocities[1:], gains[1:])):
        Um = 0.5 * (U0 + U1)
        ss = linearize(Um, model)
        a = spectral_abscissa(ss.A - ss.B @ (0.5 * (K0 + K1)))
        if a >= 0:
            msg = f"interpolated gain at U={Um:.3g} is not stabilizing (abscissa {a:.3g})"
            log.warning(msg)
            warnings.append(msg)
    return GainSchedule(velocities, np.array(gains), tuple(warnings))
