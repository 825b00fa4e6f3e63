"""Control-surface servo: proportional PWM demand, dead zone, rate and position limits."""

from __future__ import annotations

from dataclasses import dataclass

from . import kernels
from .params import ServoParams


@dataclass(frozen=True)
class ServoState:
    deflection: float = 0.0   # rad
    commanded: float = 0.0    # rad


def dead_zone_rate(pwm: float, params: ServoParams) -> float:
    """Angular rate produced by a signed PWM fraction (clamped to [-1, 1])."""
    return kernels.dead_zone_rate(pwm, kernels.pack_servo(params))


def pwm_demand(error: float, params: ServoParams) -> float:
    """PWM demand: angle error times 1/time_constant, saturated to [-1, 1]."""
    pwm = error / params.time_constant
    return max(-1.0, min(1.0, pwm))


def servo_step(state: ServoState, command: float, dt: float,
               params: ServoParams) -> ServoState:
    if dt <= 0:
        raise ValueError("dt must be positive")
    defl = kernels.servo_step(state.deflection, command, dt, kernels.pack_servo(params))
    return ServoState(deflection=defl, commanded=command)


def run_servo(state: ServoState, command: float, dt: float, steps: int,
              params: ServoParams) -> list[float]:
    """Deflection history for a held command (convenience for tests and tuning)."""
    sprm = kernels.pack_servo(params)
    out = []
    defl = state.deflection
    for _ in range(steps):
        defl = kernels.servo_step(defl, command, dt, sprm)
        out.append(defl)
    return out
