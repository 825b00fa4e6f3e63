"""Physical parameter sets for the vehicle and its servos."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

import numpy as np

from .config import Config, load_config
from .errors import ParameterError


@dataclass(frozen=True)
class VehicleParams:
    mass: float                       # kg
    inertia: tuple[float, ...]        # Ix, Iy, Iz, Ixy, Ixz, Iyz [kg m^2]
    body_length: float                # m
    r_profile: tuple[tuple[float, float], ...]  # (x, r) knots, x from CoM [m]
    fw_chord: float
    fw_span: float
    tw_chord: float
    tw_span: float
    k_trans_fw: float
    k_trans_tw: float
    k_rot_fw: float
    k_rot_tw: float
    wing_areas: tuple[float, float, float, float]   # S1..S4 [m^2]
    moment_arms: tuple[float, float, float, float]  # d1..d4 [m], + forward
    flap_lateral_offset: float        # r1 [m]
    fluid_density: float              # kg/m^3
    frontal_area: float               # m^2
    drag_coeff: float
    cable_arm: float                  # m
    damping_linear: tuple[float, float, float]      # Z_w, K_p, M_q
    damping_quadratic: tuple[float, float, float]   # Z_w|w|, K_p|p|, M_q|q|
    lift_slope_per_degree: bool = True
    quad_panels: int = 256

    def __post_init__(self):
        self.validate()

    @property
    def Ix(self): return self.inertia[0]
    @property
    def Iy(self): return self.inertia[1]
    @property
    def Iz(self): return self.inertia[2]
    @property
    def Ixy(self): return self.inertia[3]
    @property
    def Ixz(self): return self.inertia[4]
    @property
    def Iyz(self): return self.inertia[5]

    @property
    def lift_slope(self) -> float:
        """Lift-curve slope per radian of attack angle."""
        return (180.0 / math.pi) / 8.0 if self.lift_slope_per_degree else 1.0 / 8.0

    def inertia_tensor(self) -> np.ndarray:
        Ix, Iy, Iz, Ixy, Ixz, Iyz = self.inertia
        return np.array([[Ix, -Ixy, -Ixz],
                         [-Ixy, Iy, -Iyz],
                         [-Ixz, -Iyz, Iz]])

    def radius(self, x):
        """Body radius at longitudinal position(s) x; zero outside the table."""
        xs = np.array([k[0] for k in self.r_profile])
        rs = np.array([k[1] for k in self.r_profile])
        return np.interp(x, xs, rs, left=0.0, right=0.0)

    def validate(self) -> None:
        if len(self.inertia) != 6:
            raise ParameterError("inertia needs six values: Ix, Iy, Iz, Ixy, Ixz, Iyz")
        positive = {
            "mass": self.mass, "Ix": self.Ix, "Iy": self.Iy, "Iz": self.Iz,
            "body_length": self.body_length, "fluid_density": self.fluid_density,
            "frontal_area": self.frontal_area,
        }
        for name, value in positive.items():
            if not (math.isfinite(value) and value > 0):
                raise ParameterError(f"{name} must be positive and finite, got {value}")
        nonneg = {
            "fw_chord": self.fw_chord, "fw_span": self.fw_span,
            "tw_chord": self.tw_chord, "tw_span": self.tw_span,
            "drag_coeff": self.drag_coeff, "cable_arm": self.cable_arm,
            "flap_lateral_offset": self.flap_lateral_offset,
        }
        nonneg.update({f"wing_areas[{i}]": s for i, s in enumerate(self.wing_areas)})
        nonneg.update({f"damping_linear[{i}]": d for i, d in enumerate(self.damping_linear)})
        nonneg.update({f"damping_quadratic[{i}]": d
                       for i, d in enumerate(self.damping_quadratic)})
        for name, value in nonneg.items():
            if not (math.isfinite(value) and value >= 0):
                raise ParameterError(f"{name} must be non-negative and finite, got {value}")
        if np.any(np.linalg.eigvalsh(self.inertia_tensor()) <= 0):
            raise ParameterError("inertia tensor is not positive definite")
        xs = [k[0] for k in self.r_profile]
        if len(xs) < 2 or any(b <= a for a, b in zip(xs, xs[1:])):
            raise ParameterError("r_profile needs >= 2 knots with increasing x")
        if self.quad_panels < 2 or self.quad_panels % 2:
            raise ParameterError("quad_panels must be an even integer >= 2")

    def with_(self, **changes) -> "VehicleParams":
        return replace(self, **changes)

    @classmethod
    def from_config(cls, cfg: Config) -> "VehicleParams":
        kw = dict(
            mass=cfg.get_float("mass"),
            inertia=cfg.get_floats("inertia", 6),
            body_length=cfg.get_float("body_length"),
            r_profile=cfg.get_pairs("r_profile"),
            wing_areas=cfg.get_floats("wing_areas", 4),
            moment_arms=cfg.get_floats("moment_arms", 4),
            damping_linear=cfg.get_floats("damping_linear", 3),
            damping_quadratic=cfg.get_floats("damping_quadratic", 3),
            lift_slope_per_degree=cfg.get_bool("lift_slope_per_degree", True),
            quad_panels=int(cfg.get_float("quad_panels", 256)),
        )
        for f in fields(cls):
            if f.name not in kw:
                kw[f.name] = cfg.get_float(f.name)
        return cls(**kw)

    @classmethod
    def default(cls) -> "VehicleParams":
        return cls.from_config(load_config(None))


@dataclass(frozen=True)
class ServoParams:
    time_constant: float = 0.002      # s
    dead_zone: float = 0.17           # PWM fraction
    max_rate: float = 2.0             # rad/s at full PWM
    limit: float = math.radians(20.0)  # rad
    ideal: bool = False

    def __post_init__(self):
        if not self.time_constant > 0:
            raise ParameterError("servo time_constant must be > 0")
        if not 0.0 <= self.dead_zone < 1.0:
            raise ParameterError("servo dead_zone must lie in [0, 1)")
        if not self.max_rate > 0:
            raise ParameterError("servo max_rate must be > 0")
        if not self.limit > 0:
            raise ParameterError("servo limit must be > 0")

    @property
    def residual_band(self) -> float:
        """Command/deflection mismatch the dead zone can leave in steady state.

        The PWM demand is ``error / time_constant``, so motion stops once the
        error falls below ``dead_zone * time_constant``.
        """
        return 0.0 if self.ideal else self.dead_zone * self.time_constant

    @classmethod
    def from_config(cls, cfg: Config) -> "ServoParams":
        d = cls()
        return cls(
            time_constant=cfg.get_float("servo.time_constant", d.time_constant),
            dead_zone=cfg.get_float("servo.dead_zone", d.dead_zone),
            max_rate=cfg.get_float("servo.max_rate", d.max_rate),
            limit=math.radians(cfg.get_float("servo.limit_deg", math.degrees(d.limit))),
            ideal=cfg.get_bool("servo.ideal", d.ideal),
        )
