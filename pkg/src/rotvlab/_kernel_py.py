"""Pure-Python hot loop: closed-form torques, RK4 stepping and servo update.

This mirrors ``_kernel.pyx`` line for line and is used when the compiled
extension is unavailable (or ``ROTVLAB_PURE_PYTHON=1``).  Everything here works
on flat float sequences so the same call sites drive both backends.

State layout ``y``: x, z, w, phi, p, theta, q.
"""

import math

# packed vehicle parameter layout (see kernels.pack_vehicle)
P_M, P_ZWD, P_RHO, P_K, P_AMAX = 0, 1, 2, 3, 4
P_S1, P_S2, P_S3, P_S4 = 5, 6, 7, 8
P_D1, P_D2, P_D3, P_D4 = 9, 10, 11, 12
P_R1, P_DRAG, P_LCAB = 13, 14, 15
P_ZW, P_KP, P_MQ, P_ZWW, P_KPP, P_MQQ = 16, 17, 18, 19, 20, 21
P_IXZ, P_IYZ, P_INVH = 22, 23, 24
P_MI00, P_MI01, P_MI10, P_MI11 = 25, 26, 27, 28
P_ANGLIM = 29
N_VEHICLE = 30

# packed servo layout
S_TAU, S_DZ, S_RATE, S_LIM, S_IDEAL = 0, 1, 2, 3, 4
N_SERVO = 5

N_REC = 11   # x z w phi p theta q u1 u2 u3 U


def _clamp(v, lo, hi):
    return lo if v < lo else (hi if v > hi else v)


def torques(y, U, u1, u2, u3, prm):
    """Heave force, roll and pitch moment from the closed-form expressions."""
    w = y[2]
    p = y[4]
    th = y[5]
    q = y[6]
    amax = prm[P_AMAX]
    qk = prm[P_RHO] * U * U * prm[P_K]
    th_c = _clamp(th, -amax, amax)
    bl = _clamp(th - u1, -amax, amax)
    br = _clamp(th - u2, -amax, amax)
    bt = _clamp(th - u3, -amax, amax)
    s2 = prm[P_S2]
    s4 = prm[P_S4]

    heave = (qk * th_c * (prm[P_S1] + prm[P_S3])
             + qk * bt * s4
             + 0.5 * qk * s2 * (bl + br)
             - prm[P_ZW] * w
             - prm[P_ZWW] * abs(w) * w
             - U * prm[P_M] * q)
    roll = (0.5 * qk * s2 * prm[P_R1] * (bl - br)
            - prm[P_KP] * p
            - prm[P_KPP] * abs(p) * p
            + q * (prm[P_IYZ] * q - prm[P_IXZ] * p))
    pitch = (qk * th_c * (prm[P_S1] * prm[P_D1] + prm[P_S3] * prm[P_D3])
             + 0.5 * qk * s2 * prm[P_D2] * (bl + br)
             + qk * prm[P_D4] * bt * s4
             - prm[P_MQ] * q
             - prm[P_MQQ] * abs(q) * q
             - prm[P_DRAG] * U * U * math.sin(th) * prm[P_LCAB]
             + p * (prm[P_IYZ] * q + prm[P_IXZ] * p)
             + prm[P_ZWD] * w * U)
    return heave, roll, pitch


def deriv(y, U, u1, u2, u3, d0, d1, d2, prm, out):
    heave, roll, pitch = torques(y, U, u1, u2, u3, prm)
    heave += d0
    roll += d1
    pitch += d2
    out[0] = U
    out[1] = y[2]
    out[2] = prm[P_INVH] * heave
    out[3] = y[4]
    out[4] = prm[P_MI00] * roll + prm[P_MI01] * pitch
    out[5] = y[6]
    out[6] = prm[P_MI10] * roll + prm[P_MI11] * pitch


def dead_zone_rate(pwm, sprm):
    pwm = _clamp(pwm, -1.0, 1.0)
    dz = sprm[S_DZ]
    mag = abs(pwm)
    if mag < dz or mag == 0.0:
        return 0.0
    rate = sprm[S_RATE] * (mag - dz) / (1.0 - dz)
    return rate if pwm > 0 else -rate


def servo_step(defl, cmd, dt, sprm):
    lim = sprm[S_LIM]
    if sprm[S_IDEAL] != 0.0:
        return _clamp(cmd, -lim, lim)
    err = cmd - defl
    pwm = err / sprm[S_TAU]
    move = dead_zone_rate(pwm, sprm) * dt
    # never step past the command
    if abs(move) > abs(err):
        move = err
    return _clamp(defl + move, -lim, lim)


def advance(y, defl, cmd, dist, prm, sprm, U0, dU, n, dt, out, row0):
    """Run ``n`` physics ticks, writing one record per tick into ``out``.

    Surge is ``U0 + i*dU`` at the start of tick ``i`` and varies linearly inside
    the tick.  ``y`` and ``defl`` are updated in place.  Returns the number of
    ticks completed; fewer than ``n`` means the state left the valid envelope.
    """
    k1 = [0.0] * 7
    k2 = [0.0] * 7
    k3 = [0.0] * 7
    k4 = [0.0] * 7
    yt = [0.0] * 7
    d0, d1, d2 = dist[0], dist[1], dist[2]
    lim = prm[P_ANGLIM]
    for i in range(n):
        for j in range(3):
            defl[j] = servo_step(defl[j], cmd[j], dt, sprm)
        u1, u2, u3 = defl[0], defl[1], defl[2]
        Ua = U0 + i * dU
        Um = Ua + 0.5 * dU
        Ub = Ua + dU
        r = out[row0 + i]
        for j in range(7):
            r[j] = y[j]
        r[7] = u1
        r[8] = u2
        r[9] = u3
        r[10] = Ua

        deriv(y, Ua, u1, u2, u3, d0, d1, d2, prm, k1)
        for j in range(7):
            yt[j] = y[j] + 0.5 * dt * k1[j]
        deriv(yt, Um, u1, u2, u3, d0, d1, d2, prm, k2)
        for j in range(7):
            yt[j] = y[j] + 0.5 * dt * k2[j]
        deriv(yt, Um, u1, u2, u3, d0, d1, d2, prm, k3)
        for j in range(7):
            yt[j] = y[j] + dt * k3[j]
        deriv(yt, Ub, u1, u2, u3, d0, d1, d2, prm, k4)
        for j in range(7):
            y[j] = y[j] + dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])

        for j in range(7):
            if not math.isfinite(y[j]):
                return i
        if abs(y[3]) >= lim or abs(y[5]) >= lim:
            return i
    return n
