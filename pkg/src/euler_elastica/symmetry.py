"""The three reflections acting on endpoints and on covectors.

On endpoints they are explicit. On covectors: eps3 is the central symmetry
(beta, c) -> (-beta, -c) of the pendulum, eps1 reverses time (flow for the
unit time, then negate c) and eps2 = eps1 o eps3.
"""

from __future__ import annotations

import math

from . import elliptic as el
from .strata import (CanonicalCoords, Config, Covector, Stratum, TWO_PI,
                     UnsupportedStratumError, normalize_coords, classify_stratum)


def _check(i: int) -> None:
    if i not in (1, 2, 3):
        raise ValueError(f"reflection index must be 1, 2 or 3, got {i!r}")


def eps_on_M(i: int, q: Config) -> Config:
    _check(i)
    th, x, y = q.theta, q.x, q.y
    c, s = math.cos(th), math.sin(th)
    if i == 1:
        return Config(x * c + y * s, -x * s + y * c, TWO_PI - th)
    if i == 2:
        return Config(x * c + y * s, x * s - y * c, th)
    return Config(x, -y, TWO_PI - th)


def eps_on_N(i: int, cc: CanonicalCoords) -> CanonicalCoords:
    """Action on canonical coordinates; p and k are preserved."""
    _check(i)
    st = cc.stratum
    tau = cc.tau
    if st is Stratum.N1:
        K = el.complete_K(cc.k)
        new = {1: 2.0 * K - tau, 2: -tau, 3: tau + 2.0 * K}[i]
        return normalize_coords(CanonicalCoords(new, cc.p, cc.k, st))
    if st.family in ("N2", "N3"):
        if i == 1:
            out = CanonicalCoords(-tau, cc.p, cc.k, st.flipped())
        elif i == 2:
            out = CanonicalCoords(-tau, cc.p, cc.k, st)
        else:
            out = CanonicalCoords(tau, cc.p, cc.k, st.flipped())
        return normalize_coords(out)
    raise UnsupportedStratumError(st.value)


def eps_on_covector(i: int, lam: Covector, t1: float = 1.0) -> Covector:
    """Action on initial covectors for extremals of duration t1."""
    _check(i)
    from .expmap import exp_state

    if i == 3:
        return Covector(-lam.beta, -lam.c, lam.r)
    if i == 2:
        lam = Covector(-lam.beta, -lam.c, lam.r)
    if lam.r == 0.0:
        return Covector(lam.beta, -lam.c, 0.0)
    s = exp_state(lam, t1)
    return Covector(s[0], -s[1], lam.r)


def cost_invariance_check(lam: Covector) -> float:
    """|J(lam) - J(eps3(lam))|; zero up to integration error."""
    from .expmap import exp_state

    if classify_stratum(lam) is Stratum.N7:
        return 0.0
    j0 = exp_state(lam)[5]
    j3 = exp_state(eps_on_covector(3, lam))[5]
    return abs(j0 - j3)
