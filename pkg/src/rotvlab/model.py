"""Nonlinear heave/roll/pitch dynamics of the towed vehicle.

Two routes to the same right-hand side live here:

* the closed-form torque expressions (evaluated by the hot kernel, used for
  simulation and linearization), and
* a matrix assembly from the individual Coriolis, damping, restoring and lift
  terms, kept as an independent cross-check of the closed form.

Generalized forces are 6-vectors ordered (surge, sway, heave, roll, pitch,
yaw).  Body velocity is ``nu = [U, 0, w, p, q, 0]``; sway and yaw are
constrained by the tow configuration and never carry anything.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, astuple
from typing import NamedTuple

import numpy as np
from scipy.integrate import simpson

from . import kernels
from .errors import ModelDomainError, ParameterError
from .params import VehicleParams

HEAVE, ROLL, PITCH = 2, 3, 4
LIFT_RANGE_DEG = 8.0


@dataclass(frozen=True)
class AddedMassCoeffs:
    """Added-mass magnitudes; applied with the sign of the added-mass matrix."""
    Z_wdot: float
    K_pdot: float
    M_qdot: float

    def __post_init__(self):
        for name, v in zip(("Z_wdot", "K_pdot", "M_qdot"), astuple(self)):
            if not (math.isfinite(v) and v >= 0):
                raise ParameterError(f"{name} must be a non-negative magnitude, got {v}")


@dataclass(frozen=True)
class BodyState:
    x: float = 0.0
    z: float = 0.0
    w: float = 0.0
    phi: float = 0.0
    p: float = 0.0
    theta: float = 0.0
    q: float = 0.0
    surge: float = 0.0

    def __post_init__(self):
        vals = astuple(self)
        if not all(math.isfinite(v) for v in vals):
            raise ModelDomainError(f"non-finite state {vals}")
        if abs(self.phi) >= math.pi / 2 or abs(self.theta) >= math.pi / 2:
            raise ModelDomainError(
                f"attitude outside model envelope: phi={self.phi:.4g}, theta={self.theta:.4g}"
            )

    def as_array(self) -> np.ndarray:
        """Kernel layout: x, z, w, phi, p, theta, q."""
        return np.array([self.x, self.z, self.w, self.phi, self.p, self.theta, self.q])

    @classmethod
    def from_array(cls, y, surge: float) -> "BodyState":
        return cls(*(float(v) for v in y[:7]), surge=float(surge))

    @property
    def nu(self) -> np.ndarray:
        return np.array([self.surge, 0.0, self.w, self.p, self.q, 0.0])


class FinDeflections(NamedTuple):
    u1: float = 0.0   # port flap [rad]
    u2: float = 0.0   # starboard flap [rad]
    u3: float = 0.0   # tail flap [rad]


def generalized_force(heave=0.0, roll=0.0, pitch=0.0) -> np.ndarray:
    return np.array([0.0, 0.0, heave, roll, pitch, 0.0])


def _active(f: np.ndarray) -> np.ndarray:
    out = np.zeros(6)
    out[HEAVE:PITCH + 1] = f[HEAVE:PITCH + 1]
    return out


# ---------------------------------------------------------------- inertia --

def compute_added_mass_coefficients(params: VehicleParams,
                                    panels: int | None = None) -> AddedMassCoeffs:
    """Strip-theory added mass: slender body plus flat-plate wings."""
    n = panels or params.quad_panels
    if n < 2 or n % 2:
        raise ParameterError("Simpson quadrature needs an even panel count")
    half = 0.5 * params.body_length
    xs = np.linspace(-half, half, n + 1)
    r = params.radius(xs)
    if not np.all(np.isfinite(r)) or np.any(r < 0):
        raise ParameterError("radius profile has negative or non-finite samples")
    rho = params.fluid_density
    body_heave = simpson(math.pi * rho * r**2, x=xs)
    body_pitch = simpson(math.pi * rho * xs**2 * r**2, x=xs)

    plate_fw = math.pi * rho * params.fw_chord**2 * params.fw_span**3
    plate_tw = math.pi * rho * params.tw_chord**2 * params.tw_span**3
    trans = 2.0 * (params.k_trans_fw * plate_fw / 4 + params.k_trans_tw * plate_tw / 4)
    rot = 2.0 * (params.k_rot_fw * plate_fw / 48 + params.k_rot_tw * plate_tw / 48)
    return AddedMassCoeffs(Z_wdot=float(body_heave + trans), K_pdot=float(rot),
                           M_qdot=float(body_pitch + rot))


def rigid_body_inertia(params: VehicleParams) -> np.ndarray:
    M = np.zeros((6, 6))
    M[0, 0] = M[1, 1] = M[2, 2] = params.mass
    M[3:, 3:] = params.inertia_tensor()
    return M


def assemble_total_inertia(params: VehicleParams, coeffs: AddedMassCoeffs) -> np.ndarray:
    M = rigid_body_inertia(params)
    M[2, 2] += coeffs.Z_wdot
    M[3, 3] += coeffs.K_pdot
    M[4, 4] += coeffs.M_qdot
    return M


# --------------------------------------------------------------- coriolis --

def coriolis_added_matrix(nu, coeffs: AddedMassCoeffs) -> np.ndarray:
    _, _, w, p, q, _ = nu
    Zw, Kp, Mq = coeffs.Z_wdot * w, coeffs.K_pdot * p, coeffs.M_qdot * q
    return np.array([
        [0, 0, 0, 0, -Zw, 0],
        [0, 0, 0, Zw, 0, 0],
        [0, 0, 0, 0, 0, 0],
        [0, -Zw, 0, 0, 0, Mq],
        [Zw, 0, 0, 0, 0, -Kp],
        [0, 0, 0, -Mq, Kp, 0],
    ], dtype=float)


def coriolis_added_force(state: BodyState, coeffs: AddedMassCoeffs) -> np.ndarray:
    """Added-mass Coriolis force on the active DOF (only the Munk pitch term survives)."""
    return _active(coriolis_added_matrix(state.nu, coeffs) @ state.nu)


def coriolis_rigid_matrix(nu, params: VehicleParams) -> np.ndarray:
    """Rigid-body Coriolis matrix with the origin at the CoM.

    Kept as tabulated for reference.  Its product with ``nu`` does not reproduce
    the reduced force vector used by the dynamics (the rotational block is not
    skew-symmetric as tabulated), so ``coriolis_rigid_force`` is the one used.
    """
    _, _, _, p, q, r = nu
    m = params.mass
    Ix, Iy, Iz, Ixy, Ixz, Iyz = params.inertia
    return np.array([
        [0, 0, m * q, 0, 0, 0],
        [0, 0, -m * p, 0, 0, 0],
        [-m * q, m * p, 0, 0, 0, 0],
        [0, 0, 0, 0, -Iyz * q - Ixz * r, Ixy * p - Iy * q],
        [0, 0, 0, Iyz * q + Ixz * r, 0, -Ixy * q + Iz * p],
        [0, 0, 0, -Ixy * p + Iy * q, Ixy * q - Ix * p, 0],
    ], dtype=float)


def coriolis_rigid_force(state: BodyState, params: VehicleParams) -> np.ndarray:
    U, p, q = state.surge, state.p, state.q
    return generalized_force(
        heave=-U * params.mass * q,
        roll=q * (params.Iyz * q - params.Ixz * p),
        pitch=p * (params.Iyz * q + params.Ixz * p),
    )


# ---------------------------------------------------------------- damping --

def damping_matrix(nu, params: VehicleParams) -> np.ndarray:
    _, _, w, p, q, _ = nu
    Zw, Kp, Mq = params.damping_linear
    Zww, Kpp, Mqq = params.damping_quadratic
    D = np.zeros((6, 6))
    D[2, 2] = Zw + Zww * abs(w)
    D[3, 3] = Kp + Kpp * abs(p)
    D[4, 4] = Mq + Mqq * abs(q)
    return D


def damping_force(state: BodyState, params: VehicleParams) -> np.ndarray:
    """Resistive force D(nu) nu; subtracted when assembling the dynamics."""
    return damping_matrix(state.nu, params) @ state.nu


# ------------------------------------------------------------------- lift --

def lift_coefficient(alpha_deg: float, per_degree: bool = True) -> tuple[float, bool]:
    """Linear lift coefficient, clamped to the +/-8 deg validity range.

    Returns ``(c_l, in_range)``; out-of-range angles are clamped rather than
    rejected so transients do not abort a run.
    """
    in_range = abs(alpha_deg) <= LIFT_RANGE_DEG
    a = min(max(alpha_deg, -LIFT_RANGE_DEG), LIFT_RANGE_DEG)
    if not per_degree:
        a = math.radians(a)
    return a / 8.0, in_range


def lift_force(rho: float, c_l: float, planform_area: float, flow_speed: float) -> float:
    return 0.5 * rho * c_l * planform_area * flow_speed**2


def effective_attack_angles(theta: float, fins: FinDeflections) -> tuple[float, float, float]:
    return theta - fins[0], theta - fins[1], theta - fins[2]


def lift_control_force(state: BodyState, fins: FinDeflections,
                       params: VehicleParams) -> np.ndarray:
    """Control force/moments built section by section from the lift law."""
    rho, U = params.fluid_density, state.surge
    S1, S2, S3, S4 = params.wing_areas
    d1, d2, d3, d4 = params.moment_arms

    def F(area, angle):
        c_l, _ = lift_coefficient(math.degrees(angle), params.lift_slope_per_degree)
        return lift_force(rho, c_l, area, U)

    bl, br, bt = effective_attack_angles(state.theta, fins)
    # fixed wing sections and the tail appear on both sides of the vehicle
    f1, f3 = 2 * F(S1, state.theta), 2 * F(S3, state.theta)
    fl, fr = F(S2, bl), F(S2, br)
    ft = 2 * F(S4, bt)
    return generalized_force(
        heave=f1 + f3 + fl + fr + ft,
        roll=params.flap_lateral_offset * (fl - fr),
        pitch=d1 * f1 + d3 * f3 + d2 * (fl + fr) + d4 * ft,
    )


# ------------------------------------------------------------------ cable --

def cable_drag_force(U: float, params: VehicleParams) -> float:
    return 0.5 * params.fluid_density * params.drag_coeff * params.frontal_area * U**2


def cable_restoring_moment(theta: float, U: float, params: VehicleParams) -> float:
    """Magnitude-signed cable moment; subtracted in the pitch equation so it restores."""
    return cable_drag_force(U, params) * math.sin(theta) * params.cable_arm


def restoring_force(state: BodyState, params: VehicleParams) -> np.ndarray:
    """g(eta) for a neutrally buoyant vehicle: only the cable moment remains."""
    return generalized_force(pitch=cable_restoring_moment(state.theta, state.surge, params))


# ------------------------------------------------------------ assembly ----

class VehicleModel:
    """Parameters, added mass and the packed kernel arrays, computed once."""

    def __init__(self, params: VehicleParams, coeffs: AddedMassCoeffs | None = None):
        self.params = params
        self.coeffs = coeffs or compute_added_mass_coefficients(params)
        M = assemble_total_inertia(params, self.coeffs)
        if np.linalg.cond(M) > 1e12:
            raise ParameterError("total inertia matrix is singular")
        self.total_inertia = M
        self.packed = kernels.pack_vehicle(params, self.coeffs)

    @classmethod
    def default(cls) -> "VehicleModel":
        return cls(VehicleParams.default())

    def derivative(self, y, U, fins, dist=(0.0, 0.0, 0.0), backend=None) -> np.ndarray:
        """Kernel-layout derivative; ``dist`` is (heave, roll, pitch)."""
        return kernels.deriv(y, U, fins, dist, self.packed, backend=backend)


def control_torques(state: BodyState, fins: FinDeflections, params: VehicleParams,
                    coeffs: AddedMassCoeffs, backend=None) -> tuple[float, float, float]:
    """Closed-form heave force, roll and pitch moments (all terms included)."""
    prm = kernels.pack_vehicle(params, coeffs)
    return kernels.torques(state.as_array(), state.surge, fins, prm, backend=backend)


def matrix_form_rhs(state: BodyState, fins: FinDeflections, params: VehicleParams,
                    coeffs: AddedMassCoeffs) -> np.ndarray:
    """Right-hand side assembled term by term from the matrices.

    The reduced Coriolis vectors enter with a plus sign: they already carry
    the sign of the force acting on the vehicle.
    """
    nu = state.nu
    rhs = (coriolis_rigid_force(state, params)
           + _active(coriolis_added_matrix(nu, coeffs) @ nu)
           - damping_matrix(nu, params) @ nu
           - restoring_force(state, params)
           + lift_control_force(state, fins, params))
    return _active(rhs)


def _accelerations(model: VehicleModel, state: BodyState, fins, disturbance,
                   backend=None) -> np.ndarray:
    dist = np.asarray(disturbance, dtype=float)
    return model.derivative(state.as_array(), state.surge, fins,
                            (dist[HEAVE], dist[ROLL], dist[PITCH]), backend=backend)


def state_derivative(state: BodyState, fins: FinDeflections,
                     disturbance=None, params: VehicleParams | None = None,
                     coeffs: AddedMassCoeffs | None = None, *,
                     model: VehicleModel | None = None, backend=None) -> np.ndarray:
    """d/dt of (x, z, w, phi, p, theta, q).

    Either pass ``params`` (and optionally ``coeffs``) or a prebuilt ``model``.
    """
    if model is None:
        if params is None:
            raise TypeError("state_derivative needs params or model")
        model = VehicleModel(params, coeffs)
    if disturbance is None:
        disturbance = np.zeros(6)
    return _accelerations(model, state, fins, disturbance, backend)


def body_acceleration(state: BodyState, fins: FinDeflections, disturbance=None, *,
                      model: VehicleModel) -> np.ndarray:
    """nu-dot as a 6-vector; surge, sway and yaw are held at zero."""
    d = state_derivative(state, fins, disturbance, model=model)
    return np.array([0.0, 0.0, d[2], d[4], d[6], 0.0])
