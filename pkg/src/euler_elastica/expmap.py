"""The exponential map: endpoints, sampled extremals, energies, derivatives.

Exp_t sends an initial covector (beta0, c0, r) to the state (x, y, theta)
reached at time t along the extremal with x' = cos theta, y' = sin theta,
theta' = c, beta' = c, c' = -r sin beta. The energy J = 1/2 int c^2 is
carried as an extra state so it is resolved to the same accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import elliptic as el
from ._integrator import NBASE, NFULL, integrate
from .cuttime import f1
from .strata import (CanonicalCoords, Config, Covector, Stratum,
                     canonical_from_covector, initial_state,
                     initial_state_derivative)

RTOL = 1e-12
ATOL = 1e-12


class IntegrationError(RuntimeError):
    """The adaptive integrator could not reach the requested time."""


@dataclass
class Elastica:
    """Sampled extremal. Columns of ``samples``: t, x, y, theta, c.

    theta is continuous (not reduced modulo 2 pi).
    """
    samples: np.ndarray
    energy: float
    covector: Covector
    meta: dict = field(default_factory=dict)

    @property
    def t(self):
        return self.samples[:, 0]

    @property
    def x(self):
        return self.samples[:, 1]

    @property
    def y(self):
        return self.samples[:, 2]

    @property
    def theta(self):
        return self.samples[:, 3]

    @property
    def c(self):
        return self.samples[:, 4]


def _y0(beta0: float, c0: float, n: int) -> np.ndarray:
    y0 = np.zeros(n)
    y0[0] = beta0
    y0[1] = c0
    if n == NFULL:
        y0[NBASE] = 1.0          # d beta / d beta0
        y0[NBASE + 6] = 1.0      # d c / d c0
    return y0


def _run(beta0, c0, r, times, n, rtol=RTOL, atol=ATOL):
    out, status = integrate(_y0(beta0, c0, n), float(r), np.asarray(times, float),
                            n, rtol, atol)
    if status != 0:
        raise IntegrationError(
            f"integration failed for beta0={beta0}, c0={c0}, r={r} "
            f"at rtol={rtol}, atol={atol}")
    return out


def exp_state(lam: Covector, t: float = 1.0, rtol: float = RTOL,
              atol: float = ATOL) -> np.ndarray:
    """Raw final state [beta, c, x, y, theta, J] with theta unwrapped."""
    if t < 0:
        raise ValueError("t must be non-negative")
    return _run(lam.beta, lam.c, lam.r, [t], NBASE, rtol, atol)[0]


def exp_endpoint(lam: Covector, t: float = 1.0) -> Config:
    s = exp_state(lam, t)
    return Config(s[2], s[3], s[4])


def exp_trajectory(lam: Covector, t1: float = 1.0, n: int = 200,
                   meta: dict | None = None) -> Elastica:
    """Extremal sampled at n equally spaced times on [0, t1]."""
    if n < 2:
        raise ValueError("need at least two samples")
    ts = np.linspace(0.0, t1, n)
    out = _run(lam.beta, lam.c, lam.r, ts, NBASE)
    samples = np.column_stack([ts, out[:, 2], out[:, 3], out[:, 4], out[:, 1]])
    return Elastica(samples, float(out[-1, 5]), lam, dict(meta or {}))


def canonical_state(cc: CanonicalCoords) -> np.ndarray:
    b0, c0, r = initial_state(cc)
    return _run(b0, c0, r, [1.0], NBASE)[0]


def endpoint_and_jacobian(cc: CanonicalCoords, rtol: float = RTOL, atol: float = ATOL):
    """Unwrapped (x, y, theta, J) at t = 1 and d(x, y, theta)/d(tau, p, k).

    Sensitivities with respect to (beta0, c0, r) are integrated jointly with
    the flow and chained with the analytic derivative of the initial data.
    """
    b0, c0, r = initial_state(cc)
    out = _run(b0, c0, r, [1.0], NFULL, rtol, atol)[0]
    S = np.empty((3, 3))
    for j in range(3):
        o = NBASE + 5 * j
        S[:, j] = out[o + 2:o + 5]
    D = np.asarray(initial_state_derivative(cc))
    return out[2:6].copy(), S @ D


def jacobian(cc) -> np.ndarray:
    """d(x, y, theta)/d(tau, p, k) at t = 1; accepts canonical coords or a covector."""
    if isinstance(cc, Covector):
        cc = canonical_from_covector(cc)
    return endpoint_and_jacobian(cc)[1]


def closed_form_checks(cc: CanonicalCoords) -> tuple[float, float, float]:
    """sin(theta/2), P and R = x^2 + y^2 - 1 at t = 1 from elliptic functions.

    sin(theta/2) refers to the continuous angle theta(1); P is taken on the
    same branch.
    """
    tau, p, k = cc.tau, cc.p, cc.k
    st = cc.stratum
    snp, cnp, dnp, _, ep = el.jacobi_all(p, k)
    snt, cnt, dnt, _, _ = el.jacobi_all(tau, k)
    delta = 1.0 - k * k * snp * snp * snt * snt
    if not delta > 0.0:
        raise ZeroDivisionError("degenerate denominator 1 - k^2 sn^2 p sn^2 tau")
    if st is Stratum.N1:
        r = 4.0 * p * p
        sr = 2.0 * p
        f = f1(p, k)
        sin_half = 2.0 * k * snp * dnp * cnt / delta
        P = 4.0 * k * snt * dnt * f / (sr * delta)
        R = (16.0 * ep * (ep - p) / r
             + 16.0 * k * k * snp * dnp * f * snt * snt / (r * delta))
        return sin_half, P, R
    s = st.sign
    r = 4.0 * p * p * k * k
    sr = 2.0 * p * k
    f2 = (k * k * snp * cnp + dnp * ((2.0 - k * k) * p - 2.0 * ep)) / k
    sin_half = s * 2.0 * cnp * snp * dnt / delta
    P = s * 4.0 * snt * cnt * f2 / (sr * delta)
    return sin_half, P, _radius_from_invariants(cc) - 1.0


def _radius_from_invariants(cc: CanonicalCoords) -> float:
    """x^2 + y^2 at t = 1 from the two linear first integrals of the flow.

    With h1 = -r cos(beta): r^2 |q|^2 = (int h1 dt)^2 + (c(1) - c(0))^2.
    """
    tau, p, k = cc.tau, cc.p, cc.k
    st = cc.stratum
    sn0, cn0, dn0, _, e0 = el.jacobi_all(-tau - p, k)
    sn1, cn1, dn1, _, e1 = el.jacobi_all(-tau + p, k)
    if st is Stratum.N1:
        return ((p - (e1 - e0)) ** 2 + (k * (cn1 - cn0)) ** 2) / (p * p)
    r = 4.0 * p * p * k * k
    ih1 = 8.0 * p * p - 4.0 * p * p * k * k - 4.0 * p * (e1 - e0)
    dc = 4.0 * p * (dn1 - dn0)
    return (ih1 * ih1 + dc * dc) / (r * r)


def closed_form_endpoint(cc: CanonicalCoords) -> tuple[float, float]:
    """Endpoint (x, y) from the first integrals; used as an independent check."""
    tau, p, k = cc.tau, cc.p, cc.k
    st = cc.stratum
    b0, c0, r = initial_state(cc)
    sn1, cn1, dn1, _, e1 = el.jacobi_all(-tau + p, k)
    sn0, cn0, dn0, _, e0 = el.jacobi_all(-tau - p, k)
    if st is Stratum.N1:
        ih1 = r * (1.0 - (e1 - e0) / p)
        dc = 4.0 * k * p * (cn1 - cn0)
    else:
        s = st.sign
        kk = k * k if st.family == "N2" else 1.0
        ih1 = 8.0 * p * p - 4.0 * p * p * kk - 4.0 * p * (e1 - e0)
        dc = s * 4.0 * p * (dn1 - dn0)
    a = ih1 / r
    b = dc / r
    # unit vector along the conserved horizontal part of the costate
    ex, ey = -math.cos(b0), math.sin(b0)
    return a * ex - b * ey, a * ey + b * ex
