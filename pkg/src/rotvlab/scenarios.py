"""The built-in experiments and the plumbing that turns configuration into runs."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from pathlib import Path

import numpy as np

from .config import Config, load_config
from .controllers import (DEFAULT_MIXING, LqrControllerState, PidControllerState, PidGains)
from .envsim import (Disturbance, Flat, LedgeDown, LedgeUp, Scenario, SeabedProfile, Slope,
                     Trajectory, default_profile, flat_profile, simulate)
from .errors import ConfigError
from .lincontrol import DEFAULT_SPEEDS, GainSchedule, LQRWeights, build_gain_schedule
from .metrics import Metrics, compute_metrics, scenario_windows
from .model import VehicleModel
from .params import ServoParams, VehicleParams

SCENARIOS = ("nominal", "disturbed", "gainsched")
CONTROLLERS = ("lqr", "pid")
DISTURBED_SPAN = (52.0, 148.0)


# ----------------------------------------------------------- scenarios --

def nominal_scenario(controller: str = "lqr") -> Scenario:
    return Scenario(profile=default_profile(), controller=controller)


def long_course_scenario(controller: str = "lqr", ticks: int = 20_000) -> Scenario:
    """The nominal terrain followed by flat seabed, sized to exactly ``ticks`` physics ticks."""
    base = nominal_scenario(controller)
    T = ticks / base.physics_hz
    T_r = base.ramp_ticks * base.dt
    length = 0.5 * base.target_surge * T_r + base.target_surge * (T - T_r)
    extra = length - base.profile.total_length
    if extra < 0:
        raise ConfigError(f"{ticks} ticks is shorter than the nominal course")
    profile = SeabedProfile(base.profile.segments + (Flat(extra),), base.profile.start_elevation)
    return replace(base, profile=profile)


def disturbed_profile() -> SeabedProfile:
    """The nominal terrain features placed inside a 150 m course."""
    return SeabedProfile((Flat(55.0, -20.0), Slope(20.0, 0.10), Flat(15.0), LedgeDown(1.0),
                          Flat(15.0), LedgeUp(1.0), Flat(45.0)))


def disturbed_scenario(controller: str = "lqr", seed: int = 0) -> Scenario:
    return Scenario(profile=disturbed_profile(), controller=controller,
                    disturbance=Disturbance(sigma=0.4, seed=int(seed)))


def gainsched_scenario(controller: str = "lqr") -> Scenario:
    """Five -0.5 m reference steps while surge ramps 0 -> 5 m/s over 50 s.

    Steps are issued every 10 s, i.e. at U = 1, 2, 3, 4, 5 m/s; the run holds
    5 m/s for a final 10 s so the last step can settle.
    """
    ramp_s, hold_s, U = 50.0, 10.0, 5.0
    length = 0.5 * U * ramp_s + U * hold_s
    return Scenario(profile=flat_profile(length), controller=controller, target_surge=U,
                    ramp_ticks=int(ramp_s * 200), controller_start_tick=200,
                    reference_steps=tuple((10.0 * k, -0.5) for k in range(1, 6)))


def step_scenario(controller: str = "lqr", step: float = 1.0, surge: float = 5.0,
                  duration: float = 9.0, t_step: float = 0.5) -> Scenario:
    """Flat terrain at constant surge with one depth reference step (tuning episode)."""
    return Scenario(profile=flat_profile(surge * duration + 10.0), course_length=surge * duration,
                    controller=controller, target_surge=surge, ramp_ticks=0,
                    controller_start_tick=0, reference_steps=((t_step, step),))


ANTIWINDUP_STEP = 2.0          # m
ANTIWINDUP_LIMIT_DEG = 5.0     # fin travel during the saturation episode
ANTIWINDUP_KI_DEPTH = 0.3      # 1/s, outer-loop integral gain during the episode


def antiwindup_scenario(controller: str = "lqr") -> Scenario:
    """2 m depth step at 5 m/s, long enough to see the post-saturation overshoot."""
    return step_scenario(controller, step=ANTIWINDUP_STEP, duration=20.0)


def antiwindup_episode(cfg: Config, controller: str, antiwindup: bool) -> tuple[Trajectory, Metrics]:
    """Scripted saturation episode: the 2 m step with fin travel cut to 5 deg.

    The reduced travel pins the fins for the first seconds of the response, and
    the LQR runs with an active outer integral (Ki_depth = 0.3 1/s) so that both
    controllers carry an integrator that can wind up.
    """
    cfg = cfg.updated(**{"servo.limit_deg": ANTIWINDUP_LIMIT_DEG})
    kw = {"antiwindup": antiwindup}
    if controller == "lqr":
        kw["ki_depth"] = ANTIWINDUP_KI_DEPTH
    return run(antiwindup_scenario(controller), cfg, **kw)


def build_scenario(name: str, controller: str, seed: int | None = None) -> Scenario:
    if name == "nominal":
        return nominal_scenario(controller)
    if name == "disturbed":
        if seed is None:
            raise ConfigError("the disturbed scenario needs --seed")
        return disturbed_scenario(controller, seed)
    if name == "gainsched":
        return gainsched_scenario(controller)
    raise ConfigError(f"unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}")


def scenario_x_span(name: str):
    return DISTURBED_SPAN if name == "disturbed" else None


# ---------------------------------------------------------- controllers --

def lqr_weights(cfg: Config) -> LQRWeights:
    q = cfg.get_floats("lqr.Q", 6, default=(500.0, 30.0, 20.0, 10.0, 50.0, 30.0))
    r = cfg.get_floats("lqr.R", 3, default=(11.0, 11.0, 19.0))
    return LQRWeights.from_diagonals(q, r, units=cfg.get_str("lqr.units", "deg"))


def schedule_speeds(cfg: Config) -> tuple[float, ...]:
    return cfg.get_floats("lqr.speeds", default=DEFAULT_SPEEDS)


@lru_cache(maxsize=16)
def _cached_schedule(params: VehicleParams, speeds: tuple, q: tuple, r: tuple) -> GainSchedule:
    w = LQRWeights(np.diag(q), np.diag(r))
    return build_gain_schedule(speeds, w, VehicleModel(params))


def gain_schedule(cfg: Config, params: VehicleParams) -> GainSchedule:
    w = lqr_weights(cfg)
    return _cached_schedule(params, schedule_speeds(cfg), tuple(np.diag(w.Q)), tuple(np.diag(w.R)))


def pid_gains(cfg: Config) -> tuple[PidGains, PidGains, PidGains]:
    out = []
    for axis in ("depth", "roll", "pitch"):
        kp, ki, kd = cfg.get_floats(f"pid.{axis}", 3)
        out.append(PidGains(kp, ki, kd))
    return tuple(out)


def pid_mixing(cfg: Config) -> np.ndarray:
    if "pid.mixing" not in cfg:
        return DEFAULT_MIXING.copy()
    return np.array(cfg.get_floats("pid.mixing", 9)).reshape(3, 3)


def build_controller(kind: str, cfg: Config, params: VehicleParams, servo: ServoParams, *,
                     pid: tuple[PidGains, PidGains, PidGains] | None = None,
                     antiwindup: bool | None = None, ki_depth: float | None = None):
    aw = cfg.get_bool("antiwindup", True) if antiwindup is None else antiwindup
    if kind == "lqr":
        return LqrControllerState(
            gain_schedule(cfg, params),
            ki_depth=cfg.get_float("lqr.ki_depth", 0.0) if ki_depth is None else ki_depth,
            integrator_limit=cfg.get_float("lqr.integrator_limit", 5.0),
            deflection_limit=servo.limit, antiwindup=aw)
    if kind == "pid":
        lim = cfg.get_float("pid.integrator_limit_deg", math.degrees(servo.limit))
        return PidControllerState(
            pid or pid_gains(cfg), mixing=pid_mixing(cfg),
            integrator_limits=(math.radians(lim),) * 3,
            derivative_filter=cfg.get_float("pid.derivative_filter", 0.05),
            deflection_limit=servo.limit, antiwindup=aw)
    if kind == "none":
        return None
    raise ConfigError(f"unknown controller {kind!r}; choose from {', '.join(CONTROLLERS)}")


# ------------------------------------------------------------------ runs --

@dataclass(frozen=True)
class RunConfig:
    scenario: str
    controller: str = "lqr"
    seed: int | None = None
    out_dir: Path | None = None
    config_path: str | None = None


@dataclass
class RunResult:
    trajectory: Trajectory
    metrics: Metrics
    report: str
    csv_path: Path | None = None
    report_path: Path | None = None


def run(scenario: Scenario, cfg: Config, *, x_span=None, backend: str | None = None,
        **controller_kw) -> tuple[Trajectory, Metrics]:
    params = VehicleParams.from_config(cfg)
    servo = ServoParams.from_config(cfg)
    ctrl = build_controller(scenario.controller, cfg, params, servo, **controller_kw)
    traj = simulate(scenario, VehicleModel(params), servo=servo, controller=ctrl, backend=backend)
    return traj, compute_metrics(traj, scenario_windows(traj, scenario, x_span))


def run_scenario(rc: RunConfig, cfg: Config | None = None) -> RunResult:
    cfg = cfg or load_config(rc.config_path)
    if rc.controller not in CONTROLLERS:
        raise ConfigError(f"unknown controller {rc.controller!r}")
    sc = build_scenario(rc.scenario, rc.controller, rc.seed)
    traj, met = run(sc, cfg, x_span=scenario_x_span(rc.scenario))
    title = f"scenario={rc.scenario} controller={rc.controller}" + (
        f" seed={rc.seed}" if rc.seed is not None else "")
    res = RunResult(traj, met, met.report(title))
    if rc.out_dir is not None:
        out = Path(rc.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        stem = f"{rc.scenario}_{rc.controller}" + (f"_seed{rc.seed}" if rc.seed is not None else "")
        res.csv_path = out / f"{stem}.csv"
        res.report_path = out / f"{stem}.txt"
        traj.write_csv(res.csv_path)
        res.report_path.write_text(res.report, encoding="utf-8")
    return res


def _ratio(a: float, b: float) -> float:
    if b == 0:
        return 1.0 if a == 0 else math.inf
    return a / b


def compare_controllers(cfg: Config, scenario: str, seed: int | None = None,
                        kinds: tuple[str, str] = ("lqr", "pid")) -> tuple[str, dict]:
    """Run both controllers on the same scenario and seed; return (table, numbers)."""
    res = {k: run_scenario(RunConfig(scenario, k, seed), cfg) for k in dict.fromkeys(kinds)}
    a, b = res[kinds[0]].metrics, res[kinds[1]].metrics
    rows = [
        ("max_abs_depth_error_m", a.max_abs_depth_error, b.max_abs_depth_error),
        ("mean_steady_state_depth_error_m", _mean(a.steady_state_depth_error),
         _mean(b.steady_state_depth_error)),
        ("max_abs_roll_error_deg", math.degrees(a.max_abs_roll_error),
         math.degrees(b.max_abs_roll_error)),
        ("max_abs_pitch_error_deg", math.degrees(a.max_abs_pitch_error),
         math.degrees(b.max_abs_pitch_error)),
        ("max_abs_u1_deg", math.degrees(a.max_abs_deflection[0]), math.degrees(b.max_abs_deflection[0])),
        ("max_abs_u2_deg", math.degrees(a.max_abs_deflection[1]), math.degrees(b.max_abs_deflection[1])),
        ("max_abs_u3_deg", math.degrees(a.max_abs_deflection[2]), math.degrees(b.max_abs_deflection[2])),
        ("control_effort", a.control_effort, b.control_effort),
    ]
    head = f"metric,{kinds[0]},{kinds[1]},ratio"
    lines = [f"# scenario={scenario}" + (f" seed={seed}" if seed is not None else ""), head]
    numbers = {}
    for name, va, vb in rows:
        r = _ratio(vb, va)
        numbers[name] = (va, vb, r)
        lines.append(f"{name},{va:.6g},{vb:.6g},{r:.6g}")
    numbers["actuation_ratio"] = numbers["max_abs_u3_deg"][2]
    lines.append(f"# actuation ratio max|u3|_{kinds[1]} / max|u3|_{kinds[0]} = "
                 f"{numbers['actuation_ratio']:.6g}")
    return "\n".join(lines) + "\n", numbers


def _mean(v) -> float:
    return float(np.mean(v)) if len(v) else 0.0


def with_overrides(cfg: Config, **kw) -> Config:
    return cfg.updated(**{k: str(v) for k, v in kw.items()})


__all__ = [
    "SCENARIOS", "CONTROLLERS", "RunConfig", "RunResult", "nominal_scenario", "disturbed_scenario",
    "gainsched_scenario", "long_course_scenario", "step_scenario", "antiwindup_scenario", "antiwindup_episode",
    "build_scenario",
    "build_controller", "gain_schedule", "run", "run_scenario", "compare_controllers",
]
