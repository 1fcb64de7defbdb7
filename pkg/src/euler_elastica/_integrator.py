"""Compiled adaptive Runge-Kutta 8(5,3) integrator for the extremal flow.

State layout: [beta, c, x, y, theta, J] followed, when requested, by the
sensitivities of (beta, c, x, y, theta) with respect to the initial data
(beta0, c0, r), stored parameter-major (five entries per parameter).
"""

import numpy as np
from numba import njit
from scipy.integrate._ivp import dop853_coefficients as _coef

_NS = _coef.N_STAGES
_A = np.ascontiguousarray(_coef.A[:_NS, :_NS])
_B = np.ascontiguousarray(_coef.B)
_C = np.ascontiguousarray(_coef.C[:_NS])
_E3 = np.ascontiguousarray(_coef.E3[:_NS])
_E5 = np.ascontiguousarray(_coef.E5[:_NS])

NBASE = 6
NFULL = 21

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0
MAX_STEPS = 200000


@njit(cache=True)
def _rhs(y, r, n, out):
    b = y[0]
    c = y[1]
    th = y[4]
    sb = np.sin(b)
    cb = np.cos(b)
    sth = np.sin(th)
    cth = np.cos(th)
    out[0] = c
    out[1] = -r * sb
    out[2] = cth
    out[3] = sth
    out[4] = c
    out[5] = 0.5 * c * c
    if n > NBASE:
        for j in range(3):
            o = NBASE + 5 * j
            db = y[o]
            dc = y[o + 1]
            dth = y[o + 4]
            out[o] = dc
            out[o + 1] = -r * cb * db
            if j == 2:
                out[o + 1] -= sb
            out[o + 2] = -sth * dth
            out[o + 3] = cth * dth
            out[o + 4] = dc


@njit(cache=True)
def _step(y, f, h, r, n, K, ynew, tmp):
    for i in range(n):
        K[0, i] = f[i]
    for s in range(1, _NS):
        for i in range(n):
            acc = 0.0
            for j in range(s):
                acc += _A[s, j] * K[j, i]
            tmp[i] = y[i] + h * acc
        _rhs(tmp, r, n, K[s])
    for i in range(n):
        acc = 0.0
        for j in range(_NS):
            acc += _B[j] * K[j, i]
        ynew[i] = y[i] + h * acc


@njit(cache=True)
def _error_norm(y, ynew, K, h, n, rtol, atol):
    e5 = 0.0
    e3 = 0.0
    for i in range(n):
        sc = atol + max(abs(y[i]), abs(ynew[i])) * rtol
        a5 = 0.0
        a3 = 0.0
        for j in range(_NS):
            a5 += _E5[j] * K[j, i]
            a3 += _E3[j] * K[j, i]
        e5 += (a5 / sc) ** 2
        e3 += (a3 / sc) ** 2
    if e5 == 0.0 and e3 == 0.0:
        return 0.0
    return abs(h) * e5 / np.sqrt((e5 + 0.01 * e3) * n)


@njit(cache=True)
def integrate(y0, r, times, n, rtol, atol):
    """Integrate from t=0 and record the state at each entry of ``times``.

    ``times`` must be non-decreasing and non-negative. Returns
    (samples, status) where status is 0 on success and 1 if the step size
    underflowed or the step budget ran out.
    """
    m = times.shape[0]
    out = np.empty((m, n))
    y = y0[:n].copy()
    f = np.empty(n)
    _rhs(y, r, n, f)
    K = np.empty((_NS, n))
    ynew = np.empty(n)
    fnew = np.empty(n)
    tmp = np.empty(n)
    t = 0.0
    # initial step from the scale of the derivative
    d0 = 0.0
    d1 = 0.0
    for i in range(n):
        sc = atol + abs(y[i]) * rtol
        d0 += (y[i] / sc) ** 2
        d1 += (f[i] / sc) ** 2
    d0 = np.sqrt(d0 / n)
    d1 = np.sqrt(d1 / n)
    if d0 < 1e-5 or d1 < 1e-5:
        h_abs = 1e-6
    else:
        h_abs = 0.01 * d0 / d1
    h_abs = min(h_abs, 0.1)
    steps = 0
    for s in range(m):
        tend = times[s]
        while t < tend:
            rejected = False
            while True:
                min_step = 10.0 * abs(np.nextafter(t, np.inf) - t)
                if h_abs < min_step:
                    return out, 1
                h = h_abs
                tn = t + h
                if tn >= tend:
                    tn = tend
                    h = tn - t
                _step(y, f, h, r, n, K, ynew, tmp)
                err = _error_norm(y, ynew, K, h, n, rtol, atol)
                if err < 1.0:
                    if err == 0.0:
                        fac = MAX_FACTOR
                    else:
                        fac = min(MAX_FACTOR, SAFETY * err ** (-1.0 / 8.0))
                    if rejected:
                        fac = min(1.0, fac)
                    # a step clipped by a sample time keeps the previous size
                    if h < h_abs:
                        h_abs = max(h_abs, h * fac)
                    else:
                        h_abs = h * fac
                    break
                h_abs = h * max(MIN_FACTOR, SAFETY * err ** (-1.0 / 8.0))
                rejected = True
            t = tn
            for i in range(n):
                y[i] = ynew[i]
            _rhs(y, r, n, fnew)
            for i in range(n):
                f[i] = fnew[i]
            steps += 1
            if steps > MAX_STEPS:
                return out, 1
        for i in range(n):
            out[s, i] = y[i]
    return out, 0


@njit(cache=True)
def endpoints_batch(init, t1, rtol, atol):
    """Endpoint (x, y, theta, J) for rows of (beta0, c0, r); NaN on failure."""
    m = init.shape[0]
    res = np.empty((m, 4))
    times = np.array([t1])
    y0 = np.zeros(NBASE)
    for i in range(m):
        y0[:] = 0.0
        y0[0] = init[i, 0]
        y0[1] = init[i, 1]
        out, st = integrate(y0, init[i, 2], times, NBASE, rtol, atol)
        if st != 0:
            res[i, :] = np.nan
        else:
            res[i, 0] = out[0, 2]
            res[i, 1] = out[0, 3]
            res[i, 2] = out[0, 4]
            res[i, 3] = out[0, 5]
    return res
