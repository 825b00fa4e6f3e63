import math
import time

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given
from hypothesis import strategies as st

from rotvlab.errors import SynthesisError, TrimError
from rotvlab.lincontrol import (GainSchedule, LQRWeights, build_gain_schedule, care_residual,
                                linearize, lqr_gain, scheduled_gain, solve_care,
                                spectral_abscissa, trim_state)
from rotvlab.model import BodyState, FinDeflections, state_derivative

SPEEDS = (1.0, 3.0, 5.0)


@pytest.fixture(scope="module")
def linear_models():
    from rotvlab.model import VehicleModel
    m = VehicleModel.default()
    return {U: linearize(U, m) for U in SPEEDS}


def care_checks(A, B, Q, R, P):
    K = np.linalg.solve(R, B.T @ P)
    assert np.linalg.norm(care_residual(A, B, Q, R, P)) <= 1e-8 * (1 + np.linalg.norm(P))
    np.testing.assert_array_equal(P, P.T)
    assert np.linalg.eigvalsh(P).min() >= -1e-10 * (1 + np.linalg.norm(P))
    assert spectral_abscissa(A - B @ K) < 0


# ---------------------------------------------------------------- riccati --

def test_scalar_care_closed_form():
    P = solve_care([[0.0]], [[1.0]], [[1.0]], [[1.0]])
    assert abs(P[0, 0] - 1.0) <= 1e-10


def test_scalar_unstable_care_closed_form():
    a, b, q, r = 2.0, 1.0, 3.0, 0.5
    P = solve_care([[a]], [[b]], [[q]], [[r]])
    expect = r * (a + math.sqrt(a * a + b * b * q / r)) / b**2
    assert abs(P[0, 0] - expect) <= 1e-10 * expect


def test_double_integrator_closed_form():
    A = np.array([[0.0, 1.0], [0.0, 0.0]])
    B = np.array([[0.0], [1.0]])
    P = solve_care(A, B, np.eye(2), np.eye(1))
    s3 = math.sqrt(3.0)
    np.testing.assert_allclose(P, [[s3, 1.0], [1.0, s3]], rtol=0, atol=1e-10)
    np.testing.assert_allclose(lqr_gain(A, B, np.eye(2), np.eye(1)), [[1.0, s3]], atol=1e-10)


def test_stable_system_zero_state_weight_gives_zero():
    A = np.array([[-1.0, 0.3], [0.0, -2.0]])
    P = solve_care(A, np.array([[1.0], [0.5]]), np.zeros((2, 2)), np.eye(1))
    np.testing.assert_allclose(P, np.zeros((2, 2)), atol=1e-12)


def test_uncontrollable_unstable_pair_is_rejected():
    A = np.diag([1.0, -1.0])
    B = np.array([[0.0], [1.0]])
    with pytest.raises(SynthesisError):
        solve_care(A, B, np.eye(2), np.eye(1))


@pytest.mark.parametrize("U", SPEEDS)
def test_vehicle_care_matches_scipy(U, linear_models):
    ss = linear_models[U]
    w = LQRWeights.default()
    t0 = time.perf_counter()
    P = solve_care(ss.A, ss.B, w.Q, w.R)
    assert time.perf_counter() - t0 < 1.0
    care_checks(ss.A, ss.B, w.Q, w.R, P)
    ref = scipy.linalg.solve_continuous_are(ss.A, ss.B, w.Q, w.R)
    np.testing.assert_allclose(P, ref, rtol=1e-7, atol=1e-7 * np.linalg.norm(ref))


@given(st.integers(0, 10_000))
def test_random_stabilizable_systems(seed):
    rng = np.random.default_rng(seed)
    n, m = 4, 2
    A = rng.normal(size=(n, n))
    B = rng.normal(size=(n, m))
    L = rng.normal(size=(n, n))
    Q = L @ L.T + 0.1 * np.eye(n)
    R = np.diag(rng.uniform(0.5, 2.0, m))
    care_checks(A, B, Q, R, solve_care(A, B, Q, R))


@given(st.floats(0.1, 100.0))
def test_care_is_homogeneous_in_weights(c):
    A = np.array([[0.0, 1.0], [2.0, -0.5]])
    B = np.array([[0.0], [1.0]])
    P1 = solve_care(A, B, np.eye(2), np.eye(1))
    Pc = solve_care(A, B, c * np.eye(2), c * np.eye(1))
    np.testing.assert_allclose(Pc, c * P1, rtol=1e-8)


def test_weights_validation():
    with pytest.raises(SynthesisError):
        LQRWeights.from_diagonals([1, 1, 1, 1, 1, 1], [1, 0, 1])
    with pytest.raises(SynthesisError):
        LQRWeights.from_diagonals([1, -1, 1, 1, 1, 1], [1, 1, 1])


def test_degree_weights_convert_angles_only():
    w = LQRWeights.from_diagonals([500, 30, 20, 10, 50, 30], [11, 11, 19], units="deg")
    c2 = (180 / math.pi) ** 2
    np.testing.assert_allclose(np.diag(w.Q), [500, 30, 20 * c2, 10 * c2, 50 * c2, 30 * c2])
    np.testing.assert_allclose(np.diag(w.R), np.array([11, 11, 19]) * c2)


# ------------------------------------------------------------------- trim --

@pytest.mark.parametrize("U", [1.0, 2.0, 3.0, 4.0, 5.0])
def test_trim_is_symmetric_and_level(U, model):
    st_, fins = trim_state(U, model)
    assert fins.u1 == fins.u2
    assert abs(st_.theta) < math.radians(5)
    d = model.derivative(np.array([0, 0, 0, 0, 0, st_.theta, 0]), U, tuple(fins))
    assert abs(d[2]) < 1e-9 and abs(d[6]) < 1e-9


def test_trim_needs_forward_speed(model):
    with pytest.raises(TrimError):
        trim_state(0.0, model)


# --------------------------------------------------------- linearization --

@pytest.mark.parametrize("U", SPEEDS)
def test_linearization_is_second_order_accurate(U, model, linear_models):
    ss = linear_models[U]
    trim, fins = trim_state(U, model)
    x0 = np.array([0.0, 0.0, 0.0, 0.0, trim.theta, 0.0])
    u0 = np.array(tuple(fins))
    f0 = state_derivative(trim, fins, model=model)[1:]
    rng = np.random.default_rng(int(U))
    dx = rng.normal(size=6)
    dx /= np.linalg.norm(dx)
    du = 0.5 * rng.normal(size=3)
    du /= np.linalg.norm(du)
    eps = 1e-2 / 2.0 ** np.arange(4)
    res = []
    for e in eps:
        x = x0 + e * dx
        s = BodyState(z=x[0], w=x[1], phi=x[2], p=x[3], theta=x[4], q=x[5], surge=U)
        f = state_derivative(s, FinDeflections(*(u0 + e * du)), model=model)[1:]
        res.append(np.linalg.norm(f - f0 - e * (ss.A @ dx + ss.B @ du)))
    order = np.polyfit(np.log(eps), np.log(res), 1)[0]
    assert order >= 1.9


@pytest.mark.parametrize("U", SPEEDS)
def test_jacobian_matches_forward_difference_oracle(U, model, linear_models):
    ss = linear_models[U]
    trim, fins = trim_state(U, model)
    base = trim.as_array()
    u0 = np.array(tuple(fins))
    h = 1e-7

    def f(y, u):
        s = BodyState.from_array(y, U)
        return state_derivative(s, FinDeflections(*u), model=model)[1:]

    f0 = f(base, u0)
    A = np.column_stack([(f(base + np.eye(7)[j + 1] * h, u0) - f0) / h for j in range(6)])
    B = np.column_stack([(f(base, u0 + np.eye(3)[j] * h) - f0) / h for j in range(3)])
    scale = 1 + np.abs(ss.A).max()
    np.testing.assert_allclose(ss.A, A, atol=1e-5 * scale)
    np.testing.assert_allclose(ss.B, B, atol=1e-5 * (1 + np.abs(ss.B).max()))


@pytest.mark.parametrize("U", SPEEDS)
def test_linear_model_structure(U, linear_models):
    ss = linear_models[U]
    assert ss.A[0, 1] == pytest.approx(1.0)
    assert ss.A[2, 3] == pytest.approx(1.0) and ss.A[4, 5] == pytest.approx(1.0)
    np.testing.assert_allclose(ss.A[:, 0], 0.0, atol=1e-9)       # depth is a pure integrator
    assert abs(ss.B[3, 2]) < 1e-9                                  # tail flap has no roll authority
    assert ss.B[3, 0] == pytest.approx(-ss.B[3, 1], rel=1e-6)      # flaps roll differentially


def test_control_authority_grows_with_speed(linear_models):
    b = [abs(linear_models[U].B[1, 0]) for U in SPEEDS]
    assert b[0] < b[1] < b[2]


# --------------------------------------------------------------- schedule --

@pytest.fixture(scope="module")
def schedule():
    from rotvlab.model import VehicleModel
    return build_gain_schedule((1, 2, 3, 4, 5), LQRWeights.default(), VehicleModel.default())


def test_schedule_stabilizes_every_node(schedule):
    from rotvlab.model import VehicleModel
    m = VehicleModel.default()
    assert len(schedule) == 5 and schedule.warnings == ()
    for U, K in zip(schedule.velocities, schedule.gains):
        ss = linearize(U, m)
        assert spectral_abscissa(ss.A - ss.B @ K) < 0


def test_scheduled_gain_nodes_midpoints_and_clamping(schedule):
    G = schedule.gains
    np.testing.assert_array_equal(scheduled_gain(schedule, 3.0), G[2])
    np.testing.assert_allclose(scheduled_gain(schedule, 2.5), 0.5 * (G[1] + G[2]))
    np.testing.assert_array_equal(scheduled_gain(schedule, 0.2), G[0])
    np.testing.assert_array_equal(scheduled_gain(schedule, 9.0), G[-1])


def test_schedule_csv_shape(schedule):
    lines = schedule.to_csv().strip().splitlines()
    assert len(lines) == 6
    assert lines[0].split(",")[:3] == ["U", "K00", "K01"]
    assert all(len(line.split(",")) == 19 for line in lines)


def test_schedule_rejects_unsorted_speeds(model):
    with pytest.raises(SynthesisError):
        build_gain_schedule((3, 1), LQRWeights.default(), model)
    with pytest.raises(SynthesisError):
        GainSchedule((1.0, 1.0), np.zeros((2, 3, 6)))


def test_depth_weight_fixes_depth_gain_norm(schedule):
    # z is a pure integrator, so the (z, z) entry of the Riccati equation pins
    # sum_j r_j K_jz^2 to q_z independently of speed
    w = LQRWeights.default()
    for K in schedule.gains:
        assert K[:, 0] @ w.R @ K[:, 0] == pytest.approx(w.Q[0, 0], rel=1e-8)
