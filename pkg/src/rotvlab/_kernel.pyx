# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loop; see _kernel_py.py for the reference semantics."""

from libc.math cimport sin, fabs, isfinite

cdef enum:
    P_M = 0
    P_ZWD = 1
    P_RHO = 2
    P_K = 3
    P_AMAX = 4
    P_S1 = 5
    P_S2 = 6
    P_S3 = 7
    P_S4 = 8
    P_D1 = 9
    P_D2 = 10
    P_D3 = 11
    P_D4 = 12
    P_R1 = 13
    P_DRAG = 14
    P_LCAB = 15
    P_ZW = 16
    P_KP = 17
    P_MQ = 18
    P_ZWW = 19
    P_KPP = 20
    P_MQQ = 21
    P_IXZ = 22
    P_IYZ = 23
    P_INVH = 24
    P_MI00 = 25
    P_MI01 = 26
    P_MI10 = 27
    P_MI11 = 28
    P_ANGLIM = 29

cdef enum:
    S_TAU = 0
    S_DZ = 1
    S_RATE = 2
    S_LIM = 3
    S_IDEAL = 4


cdef inline double _clamp(double v, double lo, double hi) nogil:
    if v < lo:
        return lo
    if v > hi:
        return hi
    return v


cdef void _torques(const double* y, double U, double u1, double u2, double u3,
                   const double[::1] prm, double* h, double* r, double* m) noexcept nogil:
    cdef double w = y[2]
    cdef double p = y[4]
    cdef double th = y[5]
    cdef double q = y[6]
    cdef double amax = prm[P_AMAX]
    cdef double qk = prm[P_RHO] * U * U * prm[P_K]
    cdef double th_c = _clamp(th, -amax, amax)
    cdef double bl = _clamp(th - u1, -amax, amax)
    cdef double br = _clamp(th - u2, -amax, amax)
    cdef double bt = _clamp(th - u3, -amax, amax)
    cdef double s2 = prm[P_S2]
    cdef double s4 = prm[P_S4]
    h[0] = (qk * th_c * (prm[P_S1] + prm[P_S3])
            + qk * bt * s4
            + 0.5 * qk * s2 * (bl + br)
            - prm[P_ZW] * w
            - prm[P_ZWW] * fabs(w) * w
            - U * prm[P_M] * q)
    r[0] = (0.5 * qk * s2 * prm[P_R1] * (bl - br)
            - prm[P_KP] * p
            - prm[P_KPP] * fabs(p) * p
            + q * (prm[P_IYZ] * q - prm[P_IXZ] * p))
    m[0] = (qk * th_c * (prm[P_S1] * prm[P_D1] + prm[P_S3] * prm[P_D3])
            + 0.5 * qk * s2 * prm[P_D2] * (bl + br)
            + qk * prm[P_D4] * bt * s4
            - prm[P_MQ] * q
            - prm[P_MQQ] * fabs(q) * q
            - prm[P_DRAG] * U * U * sin(th) * prm[P_LCAB]
            + p * (prm[P_IYZ] * q + prm[P_IXZ] * p)
            + prm[P_ZWD] * w * U)


cdef void _deriv(const double* y, double U, double u1, double u2, double u3,
                 double d0, double d1, double d2, const double[::1] prm,
                 double* out) noexcept nogil:
    cdef double h, r, m
    _torques(y, U, u1, u2, u3, prm, &h, &r, &m)
    h += d0
    r += d1
    m += d2
    out[0] = U
    out[1] = y[2]
    out[2] = prm[P_INVH] * h
    out[3] = y[4]
    out[4] = prm[P_MI00] * r + prm[P_MI01] * m
    out[5] = y[6]
    out[6] = prm[P_MI10] * r + prm[P_MI11] * m


cdef inline double _dead_zone_rate(double pwm, const double[::1] sprm) noexcept nogil:
    pwm = _clamp(pwm, -1.0, 1.0)
    cdef double dz = sprm[S_DZ]
    cdef double mag = fabs(pwm)
    if mag < dz or mag == 0.0:
        return 0.0
    cdef double rate = sprm[S_RATE] * (mag - dz) / (1.0 - dz)
    return rate if pwm > 0 else -rate


cdef inline double _servo_step(double defl, double cmd, double dt,
                               const double[::1] sprm) noexcept nogil:
    cdef double lim = sprm[S_LIM]
    if sprm[S_IDEAL] != 0.0:
        return _clamp(cmd, -lim, lim)
    cdef double err = cmd - defl
    cdef double pwm = err / sprm[S_TAU]
    cdef double move = _dead_zone_rate(pwm, sprm) * dt
    if fabs(move) > fabs(err):
        move = err
    return _clamp(defl + move, -lim, lim)


def torques(y, double U, double u1, double u2, double u3, const double[::1] prm):
    cdef double yy[7]
    cdef int j
    for j in range(7):
        yy[j] = y[j]
    cdef double h, r, m
    _torques(yy, U, u1, u2, u3, prm, &h, &r, &m)
    return h, r, m


def deriv(y, double U, double u1, double u2, double u3,
          double d0, double d1, double d2, const double[::1] prm, out):
    cdef double yy[7]
    cdef double o[7]
    cdef int j
    for j in range(7):
        yy[j] = y[j]
    _deriv(yy, U, u1, u2, u3, d0, d1, d2, prm, o)
    for j in range(7):
        out[j] = o[j]


def dead_zone_rate(double pwm, const double[::1] sprm):
    return _dead_zone_rate(pwm, sprm)


def servo_step(double defl, double cmd, double dt, const double[::1] sprm):
    return _servo_step(defl, cmd, dt, sprm)


def advance(double[::1] y, double[::1] defl, const double[::1] cmd,
            const double[::1] dist, const double[::1] prm, const double[::1] sprm,
            double U0, double dU, int n, double dt, double[:, ::1] out, int row0):
    cdef double k1[7]
    cdef double k2[7]
    cdef double k3[7]
    cdef double k4[7]
    cdef double yt[7]
    cdef double yy[7]
    cdef double d0 = dist[0], d1 = dist[1], d2 = dist[2]
    cdef double lim = prm[P_ANGLIM]
    cdef double u1, u2, u3, Ua, Um, Ub
    cdef int i, j, row
    cdef int done = n
    for j in range(7):
        yy[j] = y[j]
    with nogil:
        for i in range(n):
            for j in range(3):
                defl[j] = _servo_step(defl[j], cmd[j], dt, sprm)
            u1 = defl[0]
            u2 = defl[1]
            u3 = defl[2]
            Ua = U0 + i * dU
            Um = Ua + 0.5 * dU
            Ub = Ua + dU
            row = row0 + i
            for j in range(7):
                out[row, j] = yy[j]
            out[row, 7] = u1
            out[row, 8] = u2
            out[row, 9] = u3
            out[row, 10] = Ua

            _deriv(yy, Ua, u1, u2, u3, d0, d1, d2, prm, k1)
            for j in range(7):
                yt[j] = yy[j] + 0.5 * dt * k1[j]
            _deriv(yt, Um, u1, u2, u3, d0, d1, d2, prm, k2)
            for j in range(7):
                yt[j] = yy[j] + 0.5 * dt * k2[j]
            _deriv(yt, Um, u1, u2, u3, d0, d1, d2, prm, k3)
            for j in range(7):
                yt[j] = yy[j] + dt * k3[j]
            _deriv(yt, Ub, u1, u2, u3, d0, d1, d2, prm, k4)
            for j in range(7):
                yy[j] = yy[j] + dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])

            for j in range(7):
                if not isfinite(yy[j]):
                    done = i
                    break
            if done != n:
                break
            if fabs(yy[3]) >= lim or fabs(yy[5]) >= lim:
                done = i
                break
    for j in range(7):
        y[j] = yy[j]
    return done
