"""Seabed terrain, disturbance generation and the fixed-step simulation engine.

Physics runs at ``physics_hz`` with RK4; the controller runs every
``physics_hz // control_hz`` ticks with a zero-order hold on its commands, and
the commanded deflections pass through the servo model on every physics tick.
"""

from __future__ import annotations

import bisect
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from . import kernels
from .controllers import LqrControllerState, PidControllerState, lqr_step, pid_step
from .errors import ParameterError, SimulationDiverged
from .model import VehicleModel
from .params import ServoParams, VehicleParams

# ---------------------------------------------------------------- terrain --


@dataclass(frozen=True)
class Flat:
    length: float
    elevation: float | None = None      # None: continue from the previous segment


@dataclass(frozen=True)
class Slope:
    length: float
    grade: float                        # rise / run; positive = seabed rising


@dataclass(frozen=True)
class LedgeDown:
    drop: float


@dataclass(frozen=True)
class LedgeUp:
    rise: float


Segment = Union[Flat, Slope, LedgeDown, LedgeUp]


@dataclass(frozen=True)
class SeabedProfile:
    segments: tuple[Segment, ...]
    start_elevation: float = -20.0

    def __post_init__(self):
        if self.total_length <= 0:
            raise ParameterError("seabed profile must have positive length")
        for s in self.segments:
            if isinstance(s, (Flat, Slope)) and s.length < 0:
                raise ParameterError("segment lengths must be non-negative")

    @property
    def total_length(self) -> float:
        return float(sum(getattr(s, "length", 0.0) for s in self.segments))

    def pieces(self) -> list[tuple[float, float, float, float, Segment]]:
        """(x0, x1, elevation at x0, slope, segment) for every segment with length."""
        out = []
        x, h = 0.0, self.start_elevation
        for s in self.segments:
            if isinstance(s, LedgeDown):
                h -= s.drop
            elif isinstance(s, LedgeUp):
                h += s.rise
            elif isinstance(s, Flat):
                if s.elevation is not None:
                    h = s.elevation
                out.append((x, x + s.length, h, 0.0, s))
                x += s.length
            else:
                out.append((x, x + s.length, h, s.grade, s))
                x += s.length
                h += s.grade * s.length
        return out

    def flat_windows(self) -> list[tuple[float, float]]:
        return [(a, b) for a, b, _, _, s in self.pieces() if isinstance(s, Flat) and b > a]

    def ledges(self) -> list[tuple[float, float]]:
        """(x position, elevation change) for every ledge."""
        out = []
        x = 0.0
        for s in self.segments:
            if isinstance(s, LedgeDown):
                out.append((x, -s.drop))
            elif isinstance(s, LedgeUp):
                out.append((x, s.rise))
            else:
                x += s.length
        return out


def default_profile() -> SeabedProfile:
    return SeabedProfile((Flat(20.0, -20.0), Slope(20.0, 0.10), Flat(15.0), LedgeDown(1.0),
                          Flat(15.0), LedgeUp(1.0), Flat(29.0)))


def flat_profile(length: float, elevation: float = -20.0) -> SeabedProfile:
    return SeabedProfile((Flat(length, elevation),), start_elevation=elevation)


def seabed_elevation(profile: SeabedProfile, x: float) -> float:
    """Seabed height (up positive) at along-track position x; clamped to the course."""
    pieces = profile.pieces()
    x = min(max(x, 0.0), profile.total_length)
    starts = [p[0] for p in pieces]
    i = max(bisect.bisect_right(starts, x) - 1, 0)
    # a ledge sits at the boundary: the later segment wins
    while i + 1 < len(pieces) and pieces[i + 1][0] <= x and pieces[i + 1][1] > pieces[i + 1][0]:
        i += 1
    x0, _, h0, g, _ = pieces[i]
    return h0 + g * (x - x0)


def depth_reference(profile: SeabedProfile, x: float, target_altitude: float) -> float:
    """Depth (NED, positive down) that keeps ``target_altitude`` above the seabed."""
    return -seabed_elevation(profile, x) - target_altitude


# ------------------------------------------------------------ disturbance --

DEFAULT_DISTURBANCE_SCALE = (0.0, 0.0, 2.0, 15.0, 5.0, 0.0)


def sample_disturbance(rng: np.random.Generator, sigma: float,
                       scale=DEFAULT_DISTURBANCE_SCALE) -> np.ndarray:
    """Generalized force (6-vector) with independent N(0, sigma^2) draws per slot."""
    scale = np.asarray(scale, dtype=float)
    if scale.shape != (6,):
        raise ParameterError("disturbance scale must have six components")
    out = np.zeros(6)
    out[2:5] = sigma * rng.standard_normal(3) * scale[2:5]
    return out


@dataclass(frozen=True)
class Disturbance:
    sigma: float = 0.4
    scale: tuple[float, ...] = DEFAULT_DISTURBANCE_SCALE
    seed: int = 0


# --------------------------------------------------------------- scenario --

@dataclass(frozen=True)
class Scenario:
    profile: SeabedProfile = field(default_factory=default_profile)
    course_length: float | None = None          # default: profile length
    target_surge: float = 5.0
    ramp_ticks: int = 200
    target_altitude: float = 3.0
    disturbance: Disturbance | None = None
    controller: str = "lqr"                     # lqr | pid | none
    physics_hz: int = 200
    control_hz: int = 50
    controller_start_tick: int | None = None    # default: end of the surge ramp
    reference_steps: tuple[tuple[float, float], ...] = ()   # (time s, depth change m)
    initial_offset: tuple[float, float, float] = (0.0, 0.0, 0.0)  # z, phi, theta

    def __post_init__(self):
        if self.physics_hz <= 0 or self.control_hz <= 0 or self.physics_hz % self.control_hz:
            raise ParameterError("physics_hz must be a positive multiple of control_hz")
        if self.ramp_ticks < 0:
            raise ParameterError("ramp_ticks must be >= 0")
        if not self.target_altitude > 0:
            raise ParameterError("target_altitude must be positive")
        if not self.target_surge > 0:
            raise ParameterError("target_surge must be positive")
        if self.controller not in ("lqr", "pid", "none"):
            raise ParameterError(f"unknown controller {self.controller!r}")

    @property
    def length(self) -> float:
        return self.profile.total_length if self.course_length is None else self.course_length

    @property
    def dt(self) -> float:
        return 1.0 / self.physics_hz

    @property
    def start_tick(self) -> int:
        return self.ramp_ticks if self.controller_start_tick is None else self.controller_start_tick

    def surge_at_tick(self, i: int) -> float:
        if self.ramp_ticks == 0 or i >= self.ramp_ticks:
            return self.target_surge
        return self.target_surge * i / self.ramp_ticks

    def n_ticks(self) -> int:
        """Ticks needed for the along-track position to reach the course length."""
        L = self.length
        if L <= 0:
            return 0
        T_r = self.ramp_ticks * self.dt
        x_r = 0.5 * self.target_surge * T_r
        t = math.sqrt(2.0 * L * T_r / self.target_surge) if L <= x_r else T_r + (L - x_r) / self.target_surge
        return int(math.ceil(t * self.physics_hz - 1e-9))

    def depth_ref(self, x: float, t: float) -> float:
        z = depth_reference(self.profile, x, self.target_altitude)
        for ts, dz in self.reference_steps:
            if t >= ts:
                z += dz
        return z


# ------------------------------------------------------------- trajectory --

CSV_COLUMNS = ("t", "x", "z", "z_ref", "w", "phi", "p", "theta", "q", "u1", "u2", "u3",
               "u1_cmd", "u2_cmd", "u3_cmd", "d_heave", "d_roll", "d_pitch", "surge")


@dataclass
class Trajectory:
    """Per-tick record; row i holds the state at t_i and the fins applied over [t_i, t_i+dt)."""
    data: np.ndarray                        # (n, len(CSV_COLUMNS))
    scenario: Scenario | None = None

    def __len__(self):
        return self.data.shape[0]

    def __getitem__(self, name: str) -> np.ndarray:
        return self.data[:, CSV_COLUMNS.index(name)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(CSV_COLUMNS) + "\n")
        for row in self.data:
            buf.write(",".join(f"{v:.9g}" for v in row))
            buf.write("\n")
        return buf.getvalue()

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_csv())


# ----------------------------------------------------------------- engine --

Controller = Union[LqrControllerState, PidControllerState, None]


def _control(ctrl: Controller, y: np.ndarray, z_ref: float, U: float, dt: float):
    if isinstance(ctrl, LqrControllerState):
        ctrl = ctrl.with_reference(z_ref)
        cmd, ctrl = lqr_step(ctrl, y[1:7], U, dt)
    else:
        e = (y[1] - z_ref, y[3], y[5] - 0.0)
        cmd, ctrl = pid_step(ctrl, e, dt)
    return np.array(cmd.fins), ctrl


def simulate(scenario: Scenario, params: VehicleParams | VehicleModel | None = None, *,
             servo: ServoParams | None = None, controller: Controller = None,
             trim_fins=(0.0, 0.0, 0.0), trim_theta: float = 0.0,
             observer: Callable | None = None, backend: str | None = None) -> Trajectory:
    """Run a scenario and return the per-tick trajectory.

    ``controller`` must be supplied for the ``lqr``/``pid`` scenario kinds (the
    harness builds it from configuration); ``none`` holds the trim fins.
    """
    model = params if isinstance(params, VehicleModel) else VehicleModel(params or VehicleParams.default())
    servo = servo or ServoParams()
    if scenario.controller != "none" and controller is None:
        raise ParameterError(f"scenario needs a {scenario.controller} controller")
    if scenario.controller == "none":
        controller = None

    n = scenario.n_ticks()
    dt = scenario.dt
    m = scenario.physics_hz // scenario.control_hz
    prm = model.packed
    sprm = kernels.pack_servo(servo)
    rec = np.zeros((n, kernels.N_REC))
    cmd_rec = np.zeros((n, 3))
    dist_rec = np.zeros((n, 3))

    dz0, dphi0, dth0 = scenario.initial_offset
    y = np.array([0.0, scenario.depth_ref(0.0, 0.0) + dz0, 0.0, dphi0, 0.0, trim_theta + dth0, 0.0])
    trim = np.asarray(trim_fins, dtype=float)
    defl = np.clip(trim.copy(), -servo.limit, servo.limit)
    cmd = trim.copy()
    dist = np.zeros(3)
    rng = np.random.default_rng(scenario.disturbance.seed) if scenario.disturbance else None
    ctrl = controller
    ramp = scenario.ramp_ticks

    k = 0
    while k < n:
        U = scenario.surge_at_tick(k)
        if ctrl is not None and k >= scenario.start_tick:
            cmd, ctrl = _control(ctrl, y, scenario.depth_ref(y[0], k * dt), U, m * dt)
        if rng is not None:
            d = scenario.disturbance
            dist = sample_disturbance(rng, d.sigma, d.scale)[2:5]
        cmd_rec[k:k + m] = cmd
        dist_rec[k:k + m] = dist
        end = min(k + m, n)
        i = k
        while i < end:                       # split at the end of the surge ramp
            j = min(end, ramp) if i < ramp else end
            U0 = scenario.surge_at_tick(i)
            dU = scenario.target_surge / ramp if i < ramp else 0.0
            done = kernels.advance(y, defl, cmd, dist, prm, sprm, U0, dU, j - i, dt, rec, i,
                                   backend=backend)
            if done < j - i:
                raise SimulationDiverged(
                    f"state left the model envelope at tick {i + done}", tick=i + done)
            i = j
        if observer is not None:
            observer(k, y, ctrl)
        k = end

    t = np.arange(n) * dt
    zref = np.array([scenario.depth_ref(x, ti) for x, ti in zip(rec[:, 0], t)])
    data = np.column_stack([t, rec[:, 0], rec[:, 1], zref, rec[:, 2], rec[:, 3], rec[:, 4],
                            rec[:, 5], rec[:, 6], rec[:, 7], rec[:, 8], rec[:, 9],
                            cmd_rec, dist_rec, rec[:, 10]]) if n else np.zeros((0, len(CSV_COLUMNS)))
    return Trajectory(data, scenario)
